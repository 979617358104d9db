//! Disk covering on top of the octagon tiling, and its extension to a
//! broadcast assignment through chains of disks.

use super::tiling::{build_tiling, Point, Tiling};
use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};
use crate::range::{disks_to_assignment, Disk, RangeAssignment};

/// Radius of triangle and chain disks: `c√(2 log₂ n)`.
pub fn cover_radius(n: u64, c: f64) -> f64 {
    c * (2.0 * (n as f64).log2()).sqrt()
}

/// Hop length of a chain and the octagon-center search radius: `c√(log₂ n)`.
pub fn hop_length(n: u64, c: f64) -> f64 {
    c * (n as f64).log2().sqrt()
}

/// `16/p_min`, the smallest `c` for which the occupancy argument applies.
pub fn min_tiling_constant(p_min: f64) -> f64 {
    16.0 / p_min
}

fn point_of(c: Coord) -> Point {
    Point::new(c.x as f64, c.y as f64)
}

/// Nearest node to `p` within `radius`; ties go to the smaller label.
fn nearest_node(instance: &Instance, p: Point, radius: f64, filter: impl Fn(usize) -> bool) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    instance.for_each_within(p.x, p.y, radius * radius, |j| {
        if !filter(j) {
            return;
        }
        let d = instance.node(j).dist2_to(p.x, p.y);
        if best.is_none_or(|(bd, bj)| d < bd || (d == bd && j < bj)) {
            best = Some((d, j));
        }
    });
    best.map(|(_, j)| j)
}

/// A cover disk together with the tiling region it was placed for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverDisk {
    pub disk: Disk,
    pub node: usize,
    /// Level of the region; the central octagon has none.
    pub level: Option<u32>,
}

/// Covering of all nodes built on [`build_tiling`].
#[derive(Debug, Clone)]
pub struct OctCover {
    pub tiling: Tiling,
    pub l: f64,
    pub disks: Vec<CoverDisk>,
}

impl OctCover {
    pub fn plain_disks(&self) -> Vec<Disk> {
        self.disks.iter().map(|d| d.disk).collect()
    }
}

/// One disk per non-empty triangle, centered on the member nearest the
/// centroid with radius `c√(2 log₂ n)` (larger only if a member lies further
/// away, which happens in a degenerate tiling). Then one disk per octagon
/// with an uncovered member, centered on the node nearest the octagon center
/// within `c√(log₂ n)`, radius circumradius + `c√(2 log₂ n)`.
pub fn oct_cover_detailed(instance: &Instance, c: f64) -> Result<OctCover> {
    let tiling = build_tiling(instance.side(), c)?;
    let n = instance.n();
    let l = cover_radius(n, c);
    let hop = hop_length(n, c);
    let mut in_tri = vec![Vec::new(); tiling.triangles.len()];
    let mut in_oct = vec![Vec::new(); tiling.octagons.len()];
    for (j, &v) in instance.nodes().iter().enumerate() {
        match tiling.locate(point_of(v)) {
            Some(Ok(o)) => in_oct[o].push(j),
            Some(Err(t)) => in_tri[t].push(j),
            None => unreachable!("tiling covers the square"),
        }
    }
    let mut covered = vec![false; instance.len()];
    let mut disks = Vec::new();
    let place = |disks: &mut Vec<CoverDisk>, covered: &mut Vec<bool>, node: usize, radius: f64, level| {
        let d = Disk::new(instance.node(node), radius);
        instance.for_each_within(d.center.x as f64, d.center.y as f64, radius * radius * (1.0 + 1e-9), |j| {
            covered[j] = true
        });
        disks.push(CoverDisk { disk: d, node, level });
    };
    for (t, members) in tiling.triangles.iter().zip(&in_tri) {
        let g = t.centroid();
        let Some(&center) = members
            .iter()
            .min_by(|&&a, &&b| instance.node(a).dist2_to(g.x, g.y).total_cmp(&instance.node(b).dist2_to(g.x, g.y)).then(a.cmp(&b)))
        else {
            continue;
        };
        let c0 = instance.node(center);
        let far = members.iter().map(|&j| c0.dist(instance.node(j))).fold(0.0, f64::max);
        place(&mut disks, &mut covered, center, l.max(far), Some(t.level));
    }
    for (o, members) in tiling.octagons.iter().zip(&in_oct) {
        if members.iter().all(|&j| covered[j]) {
            continue;
        }
        let center = nearest_node(instance, o.center, hop, |_| true)
            .ok_or(Error::NodeDesert { x: o.center.x, y: o.center.y, radius: hop })?;
        place(&mut disks, &mut covered, center, o.circumradius + l, o.level);
    }
    Ok(OctCover { tiling, l, disks })
}

/// The disk covering alone; see [`oct_cover_detailed`].
pub fn oct_cover(instance: &Instance, c: f64) -> Result<Vec<Disk>> {
    Ok(oct_cover_detailed(instance, c)?.plain_disks())
}

/// Chain of disks from `source` towards `target`. Waypoints sit every
/// `h = c√(log₂ n)` along the segment; at each one the node nearest the
/// waypoint within `h/2` (and within reach of the previous center) becomes
/// the next center. Every center gets radius `c√(2 log₂ n)`; the chain ends
/// with the first disk that covers the target. Empty when the source sits on
/// the target.
pub fn source_chain(instance: &Instance, source: Coord, target: Point, c: f64) -> Result<Vec<Disk>> {
    if instance.index_of(source).is_none() {
        return Err(Error::NotANode(source));
    }
    let n = instance.n();
    let radius = cover_radius(n, c);
    let h = hop_length(n, c);
    let start = point_of(source);
    let total = start.dist(target);
    let mut chain = Vec::new();
    if total == 0.0 {
        return Ok(chain);
    }
    let mut cur = source;
    let mut step = 0u64;
    loop {
        chain.push(Disk::new(cur, radius));
        if point_of(cur).dist(target) <= radius * (1.0 + 1e-9) {
            return Ok(chain);
        }
        step += 1;
        let t = (step as f64 * h).min(total) / total;
        let way = Point::new(start.x + (target.x - start.x) * t, start.y + (target.y - start.y) * t);
        let next = nearest_node(instance, way, h / 2.0, |j| {
            let q = instance.node(j);
            q != cur && cur.dist(q) <= radius
        })
        .ok_or(Error::NodeDesert { x: way.x, y: way.y, radius: h / 2.0 })?;
        cur = instance.node(next);
    }
}

/// Broadcast assignment: the cover disks, a chain from the source to the
/// square's center, and a connector chain for every cover disk from the
/// nearest already connected center. Cover disks are connected coarse level
/// first (central octagon, then levels 0, 1, …), in placement order within a
/// level. Each node keeps the largest radius it is given.
pub fn oct_broadcast(instance: &Instance, source: Coord, c: f64) -> Result<RangeAssignment> {
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    if instance.len() == 1 {
        return Ok(RangeAssignment::zeros(instance));
    }
    let cover = oct_cover_detailed(instance, c)?;
    let mid = (instance.side() as f64 - 1.0) / 2.0;
    let mut disks = source_chain(instance, source, Point::new(mid, mid), c)?;
    // Connected centers with the radius they will hold.
    let mut connected: Vec<Disk> = disks.clone();
    if connected.is_empty() {
        connected.push(Disk::new(instance.node(s), 0.0));
    }
    let mut order: Vec<&CoverDisk> = cover.disks.iter().collect();
    order.sort_by_key(|d| d.level.map_or(0, |l| l as u64 + 1));
    for cd in order {
        let target = cd.disk.center;
        let already = connected.iter().any(|d| d.covers(target));
        if !already {
            let from = connected
                .iter()
                .min_by(|a, b| a.center.dist2(target).cmp(&b.center.dist2(target)).then(a.center.row_major_key().cmp(&b.center.row_major_key())))
                .expect("non-empty")
                .center;
            let chain = source_chain(instance, from, point_of(target), c)?;
            connected.extend(chain.iter().copied());
            disks.extend(chain);
        }
        connected.push(cd.disk);
        disks.push(cd.disk);
    }
    disks_to_assignment(instance, &disks)
}
