//! Euclidean MST broadcast baseline: root the MST at the source and give
//! each node the distance to its farthest child.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};
use crate::range::RangeAssignment;

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n).collect(), rank: vec![0; n] }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Euclidean MST edges `(u, v, dist²)` with `u < v` (node indices).
///
/// Kruskal over the pairs within a radius `R`, doubling `R` until the result
/// spans. When the `R`-graph is connected every longer edge closes a cycle of
/// shorter ones, so the restricted MST is the full one. Ties in squared
/// length are broken by the endpoint indices.
pub fn euclidean_mst(instance: &Instance) -> Vec<(usize, usize, u64)> {
    let n = instance.len();
    if n < 2 {
        return Vec::new();
    }
    let max_d2 = 2 * (instance.side() as u64 - 1).pow(2);
    let mut r2: u64 = 4;
    loop {
        let mut edges = Vec::new();
        for u in 0..n {
            let cu = instance.node(u);
            instance.for_each_within(cu.x as f64, cu.y as f64, r2 as f64, |v| {
                if v > u {
                    edges.push((cu.dist2(instance.node(v)), u, v));
                }
            });
        }
        edges.sort_unstable();
        let mut dsu = DisjointSet::new(n);
        let mut tree = Vec::with_capacity(n - 1);
        for (d2, u, v) in edges {
            if dsu.union(u, v) {
                tree.push((u, v, d2));
                if tree.len() == n - 1 {
                    return tree;
                }
            }
        }
        assert!(r2 < max_d2, "complete graph must span");
        r2 = (r2 * 4).min(max_d2);
    }
}

/// MST-based broadcast assignment rooted at `source`.
pub fn mst_heuristic(instance: &Instance, source: Coord) -> Result<RangeAssignment> {
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    let n = instance.len();
    let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
    for (u, v, d2) in euclidean_mst(instance) {
        adj[u].push((v, d2));
        adj[v].push((u, d2));
    }
    let mut far2 = vec![0u64; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([s]);
    seen[s] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, d2) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                far2[u] = far2[u].max(d2);
                queue.push_back(v);
            }
        }
    }
    RangeAssignment::new(instance, far2.into_iter().map(|d2| (d2 as f64).sqrt()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_instance, GridSpec};
    use crate::range::{cost, is_broadcast_feasible};

    fn points(side: u32, pts: &[(u32, u32)]) -> Instance {
        let spec = GridSpec::uniform(side, 0.5).unwrap();
        Instance::from_nodes(spec, pts.iter().map(|&(x, y)| Coord::new(x, y)).collect(), 0).unwrap()
    }

    #[test]
    fn collinear_chain() {
        let inst = points(5, &[(0, 0), (1, 0), (2, 0)]);
        let a = mst_heuristic(&inst, Coord::new(0, 0)).unwrap();
        assert_eq!(a.ranges(), &[1.0, 1.0, 0.0]);
        assert_eq!(cost(&a), 2.0);
    }

    #[test]
    fn trivial_sizes() {
        let one = points(5, &[(3, 3)]);
        assert_eq!(cost(&mst_heuristic(&one, Coord::new(3, 3)).unwrap()), 0.0);
        let two = points(9, &[(0, 0), (3, 4)]);
        assert_eq!(cost(&mst_heuristic(&two, Coord::new(3, 4)).unwrap()), 25.0);
    }

    #[test]
    fn mst_weight_matches_prim() {
        let spec = GridSpec::uniform(15, 0.15).unwrap();
        for seed in 0..20 {
            let inst = sample_instance(&spec, seed);
            if inst.len() < 2 {
                continue;
            }
            let kruskal: f64 = euclidean_mst(&inst).iter().map(|e| (e.2 as f64).sqrt()).sum();
            // O(n²) Prim as an independent check.
            let n = inst.len();
            let mut best = vec![f64::INFINITY; n];
            let mut used = vec![false; n];
            best[0] = 0.0;
            let mut total = 0.0;
            for _ in 0..n {
                let u = (0..n).filter(|&i| !used[i]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
                used[u] = true;
                total += best[u];
                for v in 0..n {
                    if !used[v] {
                        best[v] = best[v].min(inst.node(u).dist(inst.node(v)));
                    }
                }
            }
            assert!((kruskal - total).abs() < 1e-9, "seed {seed}: {kruskal} vs {total}");
        }
    }

    #[test]
    fn always_feasible() {
        let spec = GridSpec::uniform(20, 0.3).unwrap();
        for seed in 0..10 {
            let inst = sample_instance(&spec, seed);
            let src = inst.node(inst.len() / 2);
            let a = mst_heuristic(&inst, src).unwrap();
            assert!(is_broadcast_feasible(&inst, &a, src).unwrap());
        }
    }
}
