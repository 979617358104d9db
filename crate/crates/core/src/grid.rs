//! The probabilistic √n × √n grid and seeded sampling of random node sets.
//!
//! Points sit at integer coordinates `(x, y)` with `0 <= x, y < side`. The
//! 1-based point labels run row-major: `(x, y)` has label `y * side + x + 1`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Name of the pseudorandom generator used by [`sample_instance`]. Recorded in
/// every file this crate writes.
pub const RNG_NAME: &str = "chacha20";

/// A lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: u32,
    pub y: u32,
}

impl Coord {
    pub const fn new(x: u32, y: u32) -> Self {
        Coord { x, y }
    }

    /// Squared Euclidean distance; exact.
    pub fn dist2(self, other: Coord) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }

    pub fn dist(self, other: Coord) -> f64 {
        (self.dist2(other) as f64).sqrt()
    }

    /// Squared distance to an arbitrary point of the plane.
    pub fn dist2_to(self, px: f64, py: f64) -> f64 {
        let dx = self.x as f64 - px;
        let dy = self.y as f64 - py;
        dx * dx + dy * dy
    }

    /// Key ordering points row-major (by `y`, then `x`).
    pub fn row_major_key(self) -> (u32, u32) {
        (self.y, self.x)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Axis-aligned rectangle of grid points, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl Rect {
    pub fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn contains(&self, c: Coord) -> bool {
        (self.x0..=self.x1).contains(&c.x) && (self.y0..=self.y1).contains(&c.y)
    }
}

/// Per-point inclusion probabilities, stored as a region map rather than one
/// float per point.
#[derive(Debug, Clone, PartialEq)]
pub enum ProbMap {
    Uniform(f64),
    /// Later regions override earlier ones.
    Regions(Vec<(Rect, f64)>),
}

/// The grid `R` together with its point probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    side: u32,
    prob: ProbMap,
    p_min: f64,
    p_max: f64,
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidProbability(p))
    }
}

impl GridSpec {
    /// Every point is a node with probability `p`; `p_min = p_max = p`.
    pub fn uniform(side: u32, p: f64) -> Result<Self> {
        Self::new(side, ProbMap::Uniform(p), p, p)
    }

    pub fn new(side: u32, prob: ProbMap, p_min: f64, p_max: f64) -> Result<Self> {
        if side < 2 {
            return Err(Error::GridTooSmall(side));
        }
        check_open_unit(p_min)?;
        check_open_unit(p_max)?;
        if p_min > p_max {
            return Err(Error::InvalidProbability(p_min));
        }
        let in_bounds = |p: f64| p >= p_min && p <= p_max;
        match &prob {
            ProbMap::Uniform(p) => {
                if !in_bounds(*p) {
                    return Err(Error::InvalidProbability(*p));
                }
            }
            ProbMap::Regions(regions) => {
                for (_, p) in regions {
                    if !in_bounds(*p) {
                        return Err(Error::InvalidProbability(*p));
                    }
                }
                let spec = GridSpec { side, prob: prob.clone(), p_min, p_max };
                for y in 0..side {
                    for x in 0..side {
                        if spec.region_prob(Coord::new(x, y)).is_none() {
                            return Err(Error::UncoveredPoint(Coord::new(x, y)));
                        }
                    }
                }
            }
        }
        Ok(GridSpec { side, prob, p_min, p_max })
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    /// Number of grid points `n = side²`.
    pub fn n(&self) -> u64 {
        self.side as u64 * self.side as u64
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn prob_map(&self) -> &ProbMap {
        &self.prob
    }

    fn region_prob(&self, c: Coord) -> Option<f64> {
        match &self.prob {
            ProbMap::Uniform(p) => Some(*p),
            ProbMap::Regions(regions) => regions.iter().rev().find(|(r, _)| r.contains(c)).map(|(_, p)| *p),
        }
    }

    /// Inclusion probability `p_i` of a grid point.
    pub fn prob(&self, c: Coord) -> f64 {
        self.region_prob(c).expect("validated region map covers the grid")
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < self.side && c.y < self.side
    }

    /// Row-major 1-based label of a point.
    pub fn point_index(&self, c: Coord) -> Result<u64> {
        if !self.contains(c) {
            return Err(Error::CoordOutOfRange(c));
        }
        Ok(c.y as u64 * self.side as u64 + c.x as u64 + 1)
    }

    /// Inverse of [`GridSpec::point_index`].
    pub fn index_coord(&self, i: u64) -> Result<Coord> {
        if i == 0 || i > self.n() {
            return Err(Error::IndexOutOfRange(i));
        }
        let k = i - 1;
        let side = self.side as u64;
        Ok(Coord::new((k % side) as u32, (k / side) as u32))
    }

    /// Human-readable description used in file headers.
    pub fn describe_prob(&self) -> String {
        match &self.prob {
            ProbMap::Uniform(p) => format!("uniform {p}"),
            ProbMap::Regions(r) => format!("regions {} pmin {} pmax {}", r.len(), self.p_min, self.p_max),
        }
    }
}

/// Builds a non-uniform spec from rectangles; later regions override earlier
/// ones. `p_min`/`p_max` are taken from the listed probabilities.
pub fn region_prob_spec(side: u32, regions: Vec<(Rect, f64)>) -> Result<GridSpec> {
    let p_min = regions.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let p_max = regions.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    if regions.is_empty() {
        return Err(Error::UncoveredPoint(Coord::new(0, 0)));
    }
    GridSpec::new(side, ProbMap::Regions(regions), p_min, p_max)
}

/// Mixes a master seed with a trial index (SplitMix64 finalizer) to get an
/// independent per-trial seed.
pub fn derive_seed(master: u64, trial: u64) -> u64 {
    let mut z = master ^ trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A sampled node set `S ⊆ R`.
#[derive(Debug, Clone)]
pub struct Instance {
    spec: GridSpec,
    nodes: Vec<Coord>,
    seed: u64,
    // Dense point -> node-index table; u32::MAX marks an absent point.
    slot: Vec<u32>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.seed == other.seed && self.nodes == other.nodes
    }
}

impl Instance {
    /// Builds an instance from explicit nodes (sorted and deduplicated).
    pub fn from_nodes(spec: GridSpec, mut nodes: Vec<Coord>, seed: u64) -> Result<Self> {
        for &c in &nodes {
            if !spec.contains(c) {
                return Err(Error::CoordOutOfRange(c));
            }
        }
        nodes.sort_by_key(|c| c.row_major_key());
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateNode(w[0]));
        }
        let mut slot = vec![u32::MAX; spec.n() as usize];
        for (i, c) in nodes.iter().enumerate() {
            slot[(c.y as usize) * spec.side as usize + c.x as usize] = i as u32;
        }
        Ok(Instance { spec, nodes, seed, slot })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn side(&self) -> u32 {
        self.spec.side
    }

    pub fn n(&self) -> u64 {
        self.spec.n()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Nodes in row-major order; a node's position here is its node index.
    pub fn nodes(&self) -> &[Coord] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, i: usize) -> Coord {
        self.nodes[i]
    }

    /// Node index of the point `c`, if `c` is a node.
    pub fn index_of(&self, c: Coord) -> Option<usize> {
        if !self.spec.contains(c) {
            return None;
        }
        let s = self.slot[(c.y as usize) * self.spec.side as usize + c.x as usize];
        (s != u32::MAX).then_some(s as usize)
    }

    pub fn contains(&self, c: Coord) -> bool {
        self.index_of(c).is_some()
    }

    /// Row-major label of node `i`.
    pub fn label(&self, i: usize) -> u64 {
        let c = self.nodes[i];
        c.y as u64 * self.spec.side as u64 + c.x as u64 + 1
    }

    /// Calls `f(j)` for every node `j` with `dist² <= r2` from the real
    /// point `(px, py)`. Scans whichever is smaller: the bounding box or the
    /// node list.
    pub fn for_each_within(&self, px: f64, py: f64, r2: f64, mut f: impl FnMut(usize)) {
        if r2 < 0.0 {
            return;
        }
        let r = r2.sqrt();
        let side = self.spec.side as i64;
        let x0 = ((px - r).floor() as i64).max(0);
        let x1 = ((px + r).ceil() as i64).min(side - 1);
        let y0 = ((py - r).floor() as i64).max(0);
        let y1 = ((py + r).ceil() as i64).min(side - 1);
        if x0 > x1 || y0 > y1 {
            return;
        }
        let area = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
        if area > self.nodes.len() {
            for (j, c) in self.nodes.iter().enumerate() {
                if c.dist2_to(px, py) <= r2 {
                    f(j);
                }
            }
        } else {
            for y in y0..=y1 {
                let row = y as usize * side as usize;
                for x in x0..=x1 {
                    let s = self.slot[row + x as usize];
                    if s != u32::MAX && self.nodes[s as usize].dist2_to(px, py) <= r2 {
                        f(s as usize);
                    }
                }
            }
        }
    }

    /// Serializes as `side seed`, a `#` metadata line, then `x y` per node.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.spec.side, self.seed);
        out.push_str(&format!("# rng {} prob {}\n", RNG_NAME, self.spec.describe_prob()));
        for c in &self.nodes {
            out.push_str(&format!("{} {}\n", c.x, c.y));
        }
        out
    }
}

impl FromStr for Instance {
    type Err = Error;

    /// Parses the format written by [`Instance::to_text`]. Lines starting
    /// with `#` are ignored except a `# rng .. prob uniform p` line, which
    /// restores the probability. Without it the spec is uniform with the
    /// observed density (clamped into (0, 1)).
    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
        let mut it = header.split_whitespace();
        let side: u32 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(hl, "bad side"))?;
        let seed: u64 = it.next().and_then(|t| t.parse().ok()).ok_or_else(|| parse_err(hl, "bad seed"))?;
        let mut p = None;
        let mut nodes = Vec::new();
        for (ln, line) in lines {
            let line = line.trim();
            if let Some(meta) = line.strip_prefix('#') {
                let toks: Vec<&str> = meta.split_whitespace().collect();
                if let Some(pos) = toks.windows(2).position(|w| w == ["prob", "uniform"]) {
                    p = toks.get(pos + 2).and_then(|t| t.parse::<f64>().ok());
                }
                continue;
            }
            let mut t = line.split_whitespace();
            let x = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| parse_err(ln, "bad x"))?;
            let y = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| parse_err(ln, "bad y"))?;
            nodes.push(Coord::new(x, y));
        }
        let n = side as f64 * side as f64;
        let p = p.unwrap_or_else(|| (nodes.len() as f64 / n).clamp(0.01, 0.99));
        let spec = GridSpec::uniform(side, p)?;
        Instance::from_nodes(spec, nodes, seed)
    }
}

/// Samples `S`: one uniform draw per point in row-major order, the point is
/// kept iff the draw is below `p_i`. Using one draw per point couples
/// instances across probabilities: for the same seed, a larger `p` yields a
/// superset.
pub fn sample_instance(spec: &GridSpec, seed: u64) -> Instance {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut nodes = Vec::new();
    for y in 0..spec.side {
        for x in 0..spec.side {
            let c = Coord::new(x, y);
            let u: f64 = rng.gen();
            if u < spec.prob(c) {
                nodes.push(c);
            }
        }
    }
    Instance::from_nodes(spec.clone(), nodes, seed).expect("sampled nodes are on the grid and distinct")
}
