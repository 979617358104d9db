//! Range assignments, their energy cost, the induced communication graph and
//! the broadcast / cover predicates.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};

/// Relative slack on `r²` when comparing against exact squared distances.
pub const RADIUS_TOL: f64 = 1e-9;

/// True iff a disk of radius `r` reaches a point at squared distance `d2`.
#[inline]
pub fn reaches(r: f64, d2: u64) -> bool {
    if r <= 0.0 {
        return d2 == 0;
    }
    (d2 as f64) <= r * r * (1.0 + RADIUS_TOL)
}

#[inline]
fn reach2(r: f64) -> f64 {
    r * r * (1.0 + RADIUS_TOL)
}

/// The positive part of Γ; zero is implicitly a member.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeSet {
    radii: Vec<f64>,
}

impl RangeSet {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii[0] <= 0.0 || !radii.iter().all(|r| r.is_finite()) {
            return Err(Error::InvalidRangeSet);
        }
        if radii.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidRangeSet);
        }
        Ok(RangeSet { radii })
    }

    /// Sorts and deduplicates; useful for sets built from distances.
    pub fn from_unsorted(mut radii: Vec<f64>) -> Result<Self> {
        radii.retain(|r| *r > 0.0);
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Self::new(radii)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// Smallest positive range `l₁`.
    pub fn min(&self) -> f64 {
        self.radii[0]
    }

    pub fn max(&self) -> f64 {
        *self.radii.last().expect("non-empty")
    }

    pub fn contains(&self, r: f64) -> bool {
        r == 0.0 || self.radii.contains(&r)
    }

    /// Least element `>= r` (zero maps to zero).
    pub fn round_up(&self, r: f64) -> Option<f64> {
        if r <= 0.0 {
            return Some(0.0);
        }
        let i = self.radii.partition_point(|&g| g < r);
        self.radii.get(i).copied()
    }
}

/// `r: S → Γ ∪ {0}`, stored densely by node index of its instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeAssignment {
    ranges: Vec<f64>,
    gamma: Option<RangeSet>,
}

impl RangeAssignment {
    pub fn zeros(instance: &Instance) -> Self {
        RangeAssignment { ranges: vec![0.0; instance.len()], gamma: None }
    }

    pub fn new(instance: &Instance, ranges: Vec<f64>) -> Result<Self> {
        if ranges.len() != instance.len() {
            return Err(Error::AssignmentLength { expected: instance.len(), got: ranges.len() });
        }
        if ranges.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidParameter("radii must be finite and nonnegative".into()));
        }
        Ok(RangeAssignment { ranges, gamma: None })
    }

    /// Builds from `(node, radius)` pairs; unlisted nodes get 0. A repeated
    /// node keeps its largest radius.
    pub fn from_pairs(instance: &Instance, pairs: &[(Coord, f64)]) -> Result<Self> {
        let mut a = Self::zeros(instance);
        for &(c, r) in pairs {
            let i = instance.index_of(c).ok_or(Error::NotANode(c))?;
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidParameter(format!("radius {r} at {c}")));
            }
            a.ranges[i] = a.ranges[i].max(r);
        }
        Ok(a)
    }

    /// Attaches Γ, checking every positive radius is a member.
    pub fn with_gamma(mut self, instance: &Instance, gamma: RangeSet) -> Result<Self> {
        for (i, &r) in self.ranges.iter().enumerate() {
            if !gamma.contains(r) {
                return Err(Error::RadiusNotInGamma { node: instance.node(i), radius: r });
            }
        }
        self.gamma = Some(gamma);
        Ok(self)
    }

    pub fn gamma(&self) -> Option<&RangeSet> {
        self.gamma.as_ref()
    }

    pub fn ranges(&self) -> &[f64] {
        &self.ranges
    }

    pub fn get(&self, i: usize) -> f64 {
        self.ranges[i]
    }

    pub fn set(&mut self, i: usize, r: f64) {
        self.ranges[i] = r;
    }

    pub fn len(&self) -> usize {
        self.ranges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    /// Number of nodes with a positive radius.
    pub fn transmitters(&self) -> usize {
        self.ranges.iter().filter(|r| **r > 0.0).count()
    }

    pub fn to_text(&self, instance: &Instance) -> String {
        let mut out = String::new();
        for (i, &r) in self.ranges.iter().enumerate() {
            let c = instance.node(i);
            let _ = writeln!(out, "{} {} {}", c.x, c.y, r);
        }
        out
    }

    /// Parses `x y radius` lines (`#` lines skipped); unlisted nodes get 0.
    pub fn from_text(instance: &Instance, text: &str) -> Result<Self> {
        let pairs = parse_xyr(text)?;
        Self::from_pairs(instance, &pairs)
    }
}

fn parse_xyr(text: &str) -> Result<Vec<(Coord, f64)>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse { line: ln + 1, msg: msg.to_string() };
        let mut t = line.split_whitespace();
        let x = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad x"))?;
        let y = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad y"))?;
        let r = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| err("bad radius"))?;
        out.push((Coord::new(x, y), r));
    }
    Ok(out)
}

/// Sum of squared radii. Radii are grouped by value so an assignment that
/// uses a single range `l` on `m` nodes costs exactly `m as f64 * l * l`.
pub fn radii_cost(radii: impl IntoIterator<Item = f64>) -> f64 {
    let mut groups: BTreeMap<u64, u64> = BTreeMap::new();
    for r in radii {
        if r > 0.0 {
            *groups.entry(r.to_bits()).or_default() += 1;
        }
    }
    groups
        .into_iter()
        .map(|(bits, m)| {
            let r = f64::from_bits(bits);
            m as f64 * (r * r)
        })
        .sum()
}

/// Energy cost `Σ r(v)²`.
pub fn cost(assignment: &RangeAssignment) -> f64 {
    radii_cost(assignment.ranges.iter().copied())
}

/// A node-centered disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Coord,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Coord, radius: f64) -> Self {
        Disk { center, radius }
    }

    pub fn covers(&self, c: Coord) -> bool {
        reaches(self.radius, self.center.dist2(c))
    }
}

pub fn disks_cost(disks: &[Disk]) -> f64 {
    radii_cost(disks.iter().map(|d| d.radius))
}

pub fn disks_to_text(disks: &[Disk]) -> String {
    let mut out = String::new();
    for d in disks {
        let _ = writeln!(out, "{} {} {}", d.center.x, d.center.y, d.radius);
    }
    out
}

pub fn disks_from_text(text: &str) -> Result<Vec<Disk>> {
    Ok(parse_xyr(text)?.into_iter().map(|(c, r)| Disk::new(c, r)).collect())
}

/// Directed graph `G(S, E)`: `(v, w) ∈ E` iff `v ≠ w` and `dist(v, w) <= r(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    out: Vec<Vec<usize>>,
}

impl CommGraph {
    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn has_edge(&self, v: usize, w: usize) -> bool {
        self.out[v].binary_search(&w).is_ok()
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

fn out_neighbors(instance: &Instance, v: usize, r: f64, mut f: impl FnMut(usize)) {
    if r <= 0.0 {
        return;
    }
    let c = instance.node(v);
    instance.for_each_within(c.x as f64, c.y as f64, reach2(r), |w| {
        if w != v {
            f(w)
        }
    });
}

pub fn comm_graph(instance: &Instance, assignment: &RangeAssignment) -> CommGraph {
    let out = (0..instance.len())
        .map(|v| {
            let mut adj = Vec::new();
            out_neighbors(instance, v, assignment.get(v), |w| adj.push(w));
            adj.sort_unstable();
            adj
        })
        .collect();
    CommGraph { out }
}

/// Nodes reached from `source` (BFS over the implicit communication graph).
pub fn reached_from(instance: &Instance, ranges: &[f64], source: usize) -> Vec<bool> {
    let mut seen = vec![false; instance.len()];
    let mut queue = VecDeque::new();
    seen[source] = true;
    queue.push_back(source);
    while let Some(v) = queue.pop_front() {
        out_neighbors(instance, v, ranges[v], |w| {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        });
    }
    seen
}

fn feasible_ranges(instance: &Instance, ranges: &[f64], source: usize) -> bool {
    reached_from(instance, ranges, source).into_iter().all(|b| b)
}

/// True iff every node is reachable from `source` in the communication graph.
pub fn is_broadcast_feasible(instance: &Instance, assignment: &RangeAssignment, source: Coord) -> Result<bool> {
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    Ok(feasible_ranges(instance, &assignment.ranges, s))
}

/// Checks the l-cover properties: every radius `>= l`, every center a node,
/// every node inside some disk.
pub fn is_l_cover(instance: &Instance, disks: &[Disk], l: f64) -> bool {
    if disks.iter().any(|d| d.radius < l * (1.0 - RADIUS_TOL) || !instance.contains(d.center)) {
        return false;
    }
    let mut covered = vec![false; instance.len()];
    for d in disks {
        instance.for_each_within(d.center.x as f64, d.center.y as f64, reach2(d.radius), |j| covered[j] = true);
    }
    covered.into_iter().all(|b| b)
}

/// One disk per node with positive radius.
pub fn assignment_to_disks(instance: &Instance, assignment: &RangeAssignment) -> Vec<Disk> {
    assignment
        .ranges
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 0.0)
        .map(|(i, &r)| Disk::new(instance.node(i), r))
        .collect()
}

/// Max radius per center. Centers must be nodes.
pub fn disks_to_assignment(instance: &Instance, disks: &[Disk]) -> Result<RangeAssignment> {
    let pairs: Vec<(Coord, f64)> = disks.iter().map(|d| (d.center, d.radius)).collect();
    RangeAssignment::from_pairs(instance, &pairs)
}

/// Rounds every positive radius up to the least element of Γ not below it.
pub fn quantize_to_gamma(instance: &Instance, assignment: &RangeAssignment, gamma: &RangeSet) -> Result<RangeAssignment> {
    let mut ranges = Vec::with_capacity(assignment.len());
    for &r in &assignment.ranges {
        let q = gamma.round_up(r).ok_or(Error::RadiusExceedsGamma { radius: r, max: gamma.max() })?;
        ranges.push(q);
    }
    RangeAssignment::new(instance, ranges)?.with_gamma(instance, gamma.clone())
}

/// Greedily shrinks radii while broadcast feasibility from `source` holds.
///
/// Nodes are visited by descending radius, ties by row-major label. Each one
/// drops to the smallest candidate that keeps the assignment feasible. With a
/// Γ attached the candidates are `{0} ∪ Γ`; otherwise they are `0` and the
/// distances to other nodes below the current radius.
pub fn prune_redundant(instance: &Instance, assignment: &RangeAssignment, source: Coord) -> Result<RangeAssignment> {
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    let mut ranges = assignment.ranges.clone();
    if !feasible_ranges(instance, &ranges, s) {
        return Err(Error::Infeasible);
    }
    let mut order: Vec<usize> = (0..ranges.len()).filter(|&i| ranges[i] > 0.0).collect();
    order.sort_by(|&a, &b| ranges[b].total_cmp(&ranges[a]).then(a.cmp(&b)));
    for v in order {
        let current = ranges[v];
        let mut candidates: Vec<f64> = vec![0.0];
        match &assignment.gamma {
            Some(g) => candidates.extend(g.radii().iter().copied().filter(|&r| r < current)),
            None => {
                let c = instance.node(v);
                let mut d: Vec<u64> = Vec::new();
                out_neighbors(instance, v, current, |w| d.push(c.dist2(instance.node(w))));
                d.sort_unstable();
                d.dedup();
                candidates.extend(d.into_iter().map(|d2| (d2 as f64).sqrt()).filter(|&r| r < current));
            }
        }
        for r in candidates {
            ranges[v] = r;
            if feasible_ranges(instance, &ranges, s) {
                break;
            }
            ranges[v] = current;
        }
    }
    Ok(RangeAssignment { ranges, gamma: assignment.gamma.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn full_grid(side: u32) -> Instance {
        let spec = GridSpec::uniform(side, 0.5).unwrap();
        let nodes = (0..side).flat_map(|y| (0..side).map(move |x| Coord::new(x, y))).collect();
        Instance::from_nodes(spec, nodes, 0).unwrap()
    }

    fn points(side: u32, pts: &[(u32, u32)]) -> Instance {
        let spec = GridSpec::uniform(side, 0.5).unwrap();
        Instance::from_nodes(spec, pts.iter().map(|&(x, y)| Coord::new(x, y)).collect(), 0).unwrap()
    }

    #[test]
    fn cost_examples() {
        let inst = points(10, &[(0, 0), (5, 0), (9, 9)]);
        assert_eq!(cost(&RangeAssignment::zeros(&inst)), 0.0);
        let a = RangeAssignment::from_pairs(&inst, &[(Coord::new(0, 0), 3.0)]).unwrap();
        assert_eq!(cost(&a), 9.0);
        let a = RangeAssignment::from_pairs(&inst, &[(Coord::new(0, 0), 2.0), (Coord::new(5, 0), 5.0)]).unwrap();
        assert_eq!(cost(&a), 29.0);
    }

    #[test]
    fn boundary_is_inclusive() {
        let inst = points(10, &[(0, 0), (3, 4)]);
        let u = Coord::new(0, 0);
        let g = comm_graph(&inst, &RangeAssignment::from_pairs(&inst, &[(u, 5.0)]).unwrap());
        assert!(g.has_edge(0, 1));
        assert!(!g.has_edge(1, 0));
        let g = comm_graph(&inst, &RangeAssignment::from_pairs(&inst, &[(u, 4.99)]).unwrap());
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn center_of_3x3_reaches_axis_neighbors_only() {
        let inst = full_grid(3);
        let a = RangeAssignment::from_pairs(&inst, &[(Coord::new(1, 1), 1.0)]).unwrap();
        let g = comm_graph(&inst, &a);
        let center = inst.index_of(Coord::new(1, 1)).unwrap();
        let mut nbrs: Vec<Coord> = g.out_neighbors(center).iter().map(|&w| inst.node(w)).collect();
        nbrs.sort();
        assert_eq!(nbrs, vec![Coord::new(0, 1), Coord::new(1, 0), Coord::new(1, 2), Coord::new(2, 1)]);
        assert_eq!(g.edge_count(), 4);
    }

    #[test]
    fn feasibility_examples() {
        let single = points(5, &[(2, 2)]);
        assert!(is_broadcast_feasible(&single, &RangeAssignment::zeros(&single), Coord::new(2, 2)).unwrap());

        let inst = full_grid(6);
        let diag = (50f64).sqrt();
        let star = RangeAssignment::from_pairs(&inst, &[(Coord::new(0, 0), diag)]).unwrap();
        assert!(is_broadcast_feasible(&inst, &star, Coord::new(0, 0)).unwrap());

        let two = points(5, &[(0, 0), (4, 4)]);
        assert!(!is_broadcast_feasible(&two, &RangeAssignment::zeros(&two), Coord::new(0, 0)).unwrap());
        assert!(is_broadcast_feasible(&two, &RangeAssignment::zeros(&two), Coord::new(1, 1)).is_err());
    }

    #[test]
    fn l_cover_examples() {
        let inst = full_grid(5);
        let diag = 32f64.sqrt();
        let disks = vec![Disk::new(Coord::new(2, 3), diag)];
        assert!(is_l_cover(&inst, &disks, 1.0));
        assert!(is_l_cover(&inst, &disks, diag));
        assert!(!is_l_cover(&inst, &[Disk::new(Coord::new(0, 0), diag)], diag + 1e-3));
        assert!(!is_l_cover(&inst, &[Disk::new(Coord::new(0, 0), 3.0)], 1.0));
        let sparse = points(5, &[(0, 0), (4, 4)]);
        assert!(!is_l_cover(&sparse, &[Disk::new(Coord::new(1, 1), 10.0)], 1.0));
    }

    #[test]
    fn disks_from_assignment() {
        let inst = points(6, &[(0, 0), (1, 0), (5, 5)]);
        let a = RangeAssignment::new(&inst, vec![0.0, 2.0, 3.0]).unwrap();
        let disks = assignment_to_disks(&inst, &a);
        assert_eq!(disks.len(), 2);
        assert_eq!(disks_cost(&disks), cost(&a));
        assert!(assignment_to_disks(&inst, &RangeAssignment::zeros(&inst)).is_empty());
    }

    #[test]
    fn quantize_examples() {
        let inst = points(6, &[(0, 0), (1, 0)]);
        let gamma = RangeSet::new(vec![1.0, 2.0, 4.0]).unwrap();
        let a = RangeAssignment::new(&inst, vec![2.3, 2.0]).unwrap();
        let q = quantize_to_gamma(&inst, &a, &gamma).unwrap();
        assert_eq!(q.ranges(), &[4.0, 2.0]);
        let too_big = RangeAssignment::new(&inst, vec![4.5, 0.0]).unwrap();
        assert!(matches!(quantize_to_gamma(&inst, &too_big, &gamma), Err(Error::RadiusExceedsGamma { .. })));
    }

    #[test]
    fn range_set_validation() {
        assert!(RangeSet::new(vec![]).is_err());
        assert!(RangeSet::new(vec![0.0, 1.0]).is_err());
        assert!(RangeSet::new(vec![2.0, 1.0]).is_err());
        assert!(RangeSet::new(vec![1.0, 1.0]).is_err());
        let g = RangeSet::from_unsorted(vec![3.0, 1.0, 3.0, 0.0]).unwrap();
        assert_eq!(g.radii(), &[1.0, 3.0]);
    }

    #[test]
    fn gamma_membership_is_checked() {
        let inst = points(6, &[(0, 0), (1, 0)]);
        let gamma = RangeSet::new(vec![1.0, 2.0]).unwrap();
        assert!(RangeAssignment::new(&inst, vec![1.5, 0.0]).unwrap().with_gamma(&inst, gamma.clone()).is_err());
        assert!(RangeAssignment::new(&inst, vec![2.0, 0.0]).unwrap().with_gamma(&inst, gamma).is_ok());
    }

    #[test]
    fn prune_star_drops_extra_radius() {
        let inst = full_grid(5);
        let diag = 32f64.sqrt();
        let a = RangeAssignment::from_pairs(&inst, &[(Coord::new(0, 0), diag), (Coord::new(3, 3), 1.0)]).unwrap();
        let p = prune_redundant(&inst, &a, Coord::new(0, 0)).unwrap();
        assert_eq!(p.get(inst.index_of(Coord::new(3, 3)).unwrap()), 0.0);
        assert_eq!(p.get(0), diag);
    }

    #[test]
    fn prune_keeps_minimal_chain() {
        let inst = points(5, &[(0, 0), (1, 0), (2, 0), (3, 0)]);
        let a = RangeAssignment::new(&inst, vec![1.0, 1.0, 1.0, 0.0]).unwrap();
        let p = prune_redundant(&inst, &a, Coord::new(0, 0)).unwrap();
        assert_eq!(p, a);
        let bad = RangeAssignment::new(&inst, vec![1.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(prune_redundant(&inst, &bad, Coord::new(0, 0)), Err(Error::Infeasible)));
    }

    #[test]
    fn prune_with_gamma_stays_in_gamma() {
        let inst = points(5, &[(0, 0), (1, 0), (2, 0), (4, 0)]);
        let gamma = RangeSet::new(vec![1.0, 2.0, 4.0]).unwrap();
        let a = RangeAssignment::new(&inst, vec![4.0, 4.0, 4.0, 0.0]).unwrap().with_gamma(&inst, gamma.clone()).unwrap();
        let p = prune_redundant(&inst, &a, Coord::new(0, 0)).unwrap();
        assert!(p.ranges().iter().all(|&r| gamma.contains(r)));
        assert!(is_broadcast_feasible(&inst, &p, Coord::new(0, 0)).unwrap());
        assert_eq!(p.ranges(), &[1.0, 1.0, 2.0, 0.0]);
        assert!(cost(&p) <= cost(&a));
    }

    #[test]
    fn text_roundtrip() {
        let inst = points(6, &[(0, 0), (1, 0), (5, 5)]);
        let a = RangeAssignment::new(&inst, vec![0.0, 2.5, 3.0]).unwrap();
        assert_eq!(RangeAssignment::from_text(&inst, &a.to_text(&inst)).unwrap(), a);
        let disks = assignment_to_disks(&inst, &a);
        assert_eq!(disks_from_text(&disks_to_text(&disks)).unwrap(), disks);
    }
}
