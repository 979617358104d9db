//! Recursive octagon tiling of the square.
//!
//! The square `[-½, side-½]²` (area `n`, one unit cell per lattice point) is
//! cut into a central regular octagon and four corner right-isosceles
//! triangles. A triangle with hypotenuse `L` is cut into a regular octagon of
//! side `L/(1+√2)²` standing on the hypotenuse, two triangles with hypotenuse
//! `L/(1+√2)` (one level down) and three with hypotenuse `L/(1+√2)²` (two
//! levels down). Every regular octagon that appears has edges at multiples of
//! 45°, so all of them are axis-aligned.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};

const SILVER: f64 = 1.0 + SQRT_2;
const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }

    fn scale(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

/// Right-isosceles triangle: `apex` is the right-angle vertex, `a`–`b` the
/// hypotenuse of length `hyp`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub apex: Point,
    pub a: Point,
    pub b: Point,
    pub hyp: f64,
    pub level: u32,
}

impl Triangle {
    fn new(apex: Point, a: Point, b: Point, level: u32) -> Self {
        Triangle { apex, a, b, hyp: a.dist(b), level }
    }

    pub fn area(&self) -> f64 {
        self.hyp * self.hyp / 4.0
    }

    pub fn centroid(&self) -> Point {
        self.apex.add(self.a).add(self.b).scale(1.0 / 3.0)
    }

    pub fn contains(&self, p: Point) -> bool {
        let cross = |o: Point, u: Point, v: Point| (u.x - o.x) * (v.y - o.y) - (u.y - o.y) * (v.x - o.x);
        let d1 = cross(self.a, self.b, p);
        let d2 = cross(self.b, self.apex, p);
        let d3 = cross(self.apex, self.a, p);
        let tol = EPS * self.hyp.max(1.0);
        let neg = d1 < -tol || d2 < -tol || d3 < -tol;
        let pos = d1 > tol || d2 > tol || d3 > tol;
        !(neg && pos)
    }

    /// Maps local coordinates (along the hypotenuse from `a`, towards the
    /// apex) to the plane.
    fn local(&self, u: f64, v: f64) -> Point {
        let e = self.b.sub(self.a).scale(1.0 / self.hyp);
        let mid = self.a.add(self.b).scale(0.5);
        let f = self.apex.sub(mid).scale(2.0 / self.hyp);
        self.a.add(e.scale(u)).add(f.scale(v))
    }

    /// The octagon and the five sub-triangles of one recursive step.
    fn split(&self) -> (Octagon, [Triangle; 5]) {
        let l = self.hyp;
        let s = l / (SILVER * SILVER);
        let rho = s * SILVER / 2.0;
        let oct = Octagon::new(self.local(l / 2.0, rho), s, Some(self.level));
        let q = s * (1.0 + SQRT_2 / 2.0);
        let p1 = s * SILVER;
        let h = s / SQRT_2;
        let top = s * SILVER;
        let i = self.level;
        let big_left = Triangle::new(self.local(q, 0.0), self.local(0.0, 0.0), self.local(q, q), i + 1);
        let big_right = Triangle::new(self.local(l - q, 0.0), self.local(l, 0.0), self.local(l - q, q), i + 1);
        let small_left = Triangle::new(self.local(q, 0.0), self.local(p1, 0.0), self.local(q, h), i + 2);
        let small_right = Triangle::new(self.local(l - q, 0.0), self.local(l - p1, 0.0), self.local(l - q, h), i + 2);
        let apex = Triangle::new(self.apex, self.local(l / 2.0 - s / 2.0, top), self.local(l / 2.0 + s / 2.0, top), i + 2);
        (oct, [big_left, big_right, small_left, small_right, apex])
    }
}

/// Axis-aligned regular octagon. `level` is the level of the triangle it was
/// cut from; the central octagon has none.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octagon {
    pub center: Point,
    pub side: f64,
    pub circumradius: f64,
    pub level: Option<u32>,
}

impl Octagon {
    fn new(center: Point, side: f64, level: Option<u32>) -> Self {
        Octagon { center, side, circumradius: octagon_circumradius(side), level }
    }

    pub fn apothem(&self) -> f64 {
        self.side * SILVER / 2.0
    }

    pub fn area(&self) -> f64 {
        2.0 * SILVER * self.side * self.side
    }

    pub fn contains(&self, p: Point) -> bool {
        let dx = (p.x - self.center.x).abs();
        let dy = (p.y - self.center.y).abs();
        let r = self.apothem() + EPS * self.side.max(1.0);
        dx <= r && dy <= r && dx + dy <= SQRT_2 * r
    }
}

/// `s / √(2−√2)`.
pub fn octagon_circumradius(side: f64) -> f64 {
    side / (2.0 - SQRT_2).sqrt()
}

/// Hypotenuse of the level-`i` triangles: `√(2n) / ((2+√2)(√2+1)^i)`.
pub fn level_side(n: u64, i: u32) -> f64 {
    (2.0 * n as f64).sqrt() / ((2.0 + SQRT_2) * SILVER.powi(i as i32))
}

/// Circumradius of the octagon cut from a level-`i` triangle.
pub fn level_radius(n: u64, i: u32) -> f64 {
    octagon_circumradius(level_side(n, i) / (SILVER * SILVER))
}

/// `3^{i+1} + (−1)^i`.
pub fn triangle_count(i: u32) -> u64 {
    let pow = 3u64.pow(i + 1);
    if i.is_multiple_of(2) {
        pow + 1
    } else {
        pow - 1
    }
}

/// Smallest `k ≥ 0` with `x_k < c√(log₂ n)`, by direct search.
pub fn depth(n: u64, c: f64) -> u32 {
    let threshold = c * (n as f64).log2().sqrt();
    (0..).find(|&k| level_side(n, k) < threshold).expect("x_k → 0")
}

/// Closed form of [`depth`]: `⌊½ log_{1+√2}(2n / (c²(2+√2)² log₂ n))⌋ + 1`,
/// clamped at 0.
pub fn depth_closed_form(n: u64, c: f64) -> u32 {
    let arg = 2.0 * n as f64 / (c * c * (2.0 + SQRT_2).powi(2) * (n as f64).log2());
    let e = 0.5 * arg.ln() / SILVER.ln();
    if e < 0.0 {
        0
    } else {
        e.floor() as u32 + 1
    }
}

#[derive(Debug, Clone)]
pub struct Tiling {
    pub side: u32,
    pub c: f64,
    /// Recursion depth: triangles of level `< k` are split.
    pub k: u32,
    /// Set when `k = 0`: the tiling is the first step only.
    pub degenerate: bool,
    /// Leaf triangles.
    pub triangles: Vec<Triangle>,
    pub octagons: Vec<Octagon>,
    /// Number of triangles created at each level, split or not.
    pub generated: Vec<u64>,
}

impl Tiling {
    pub fn n(&self) -> u64 {
        self.side as u64 * self.side as u64
    }

    pub fn area(&self) -> f64 {
        self.triangles.iter().map(Triangle::area).sum::<f64>() + self.octagons.iter().map(Octagon::area).sum::<f64>()
    }

    /// Region holding `p`: `Ok(i)` for octagon `i`, `Err(i)` for triangle `i`.
    /// Points on shared edges go to the first match, octagons first.
    pub fn locate(&self, p: Point) -> Option<std::result::Result<usize, usize>> {
        if let Some(i) = self.octagons.iter().position(|o| o.contains(p)) {
            return Some(Ok(i));
        }
        self.triangles.iter().position(|t| t.contains(p)).map(Err)
    }
}

pub fn build_tiling(side: u32, c: f64) -> Result<Tiling> {
    if side < 2 {
        return Err(Error::GridTooSmall(side));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("tiling constant c = {c}")));
    }
    let n = side as u64 * side as u64;
    let k = depth(n, c);
    let s = side as f64;
    let (lo, hi) = (-0.5, s - 0.5);
    let leg = s / (2.0 + SQRT_2);
    let corners = [(lo, lo, 1.0, 1.0), (hi, lo, -1.0, 1.0), (hi, hi, -1.0, -1.0), (lo, hi, 1.0, -1.0)];
    let mut pending: Vec<Triangle> = corners
        .iter()
        .map(|&(x, y, sx, sy)| {
            Triangle::new(Point::new(x, y), Point::new(x + sx * leg, y), Point::new(x, y + sy * leg), 0)
        })
        .collect();
    let center = Point::new((lo + hi) / 2.0, (lo + hi) / 2.0);
    let mut octagons = vec![Octagon::new(center, SQRT_2 * leg, None)];
    let mut triangles = Vec::new();
    let mut generated = vec![0u64; k as usize + 2];
    while let Some(t) = pending.pop() {
        generated[t.level as usize] += 1;
        if t.level < k {
            let (oct, kids) = t.split();
            octagons.push(oct);
            pending.extend(kids);
        } else {
            triangles.push(t);
        }
    }
    if k == 0 {
        generated.truncate(1);
    }
    triangles.sort_by_key(|t| t.level);
    octagons.sort_by_key(|o| o.level.map_or(0, |l| l + 1));
    Ok(Tiling { side, c, k, degenerate: k == 0, triangles, octagons, generated })
}
