//! Exhaustive minimum-cost broadcast assignment for tiny instances.

use crate::error::{Error, Result};
use crate::grid::{Coord, Instance};
use crate::range::{reaches, RangeAssignment, RangeSet};

pub const MAX_NODES: usize = 8;

/// Γ made of all pairwise node distances.
pub fn pairwise_gamma(instance: &Instance) -> Option<RangeSet> {
    let nodes = instance.nodes();
    let mut d2: Vec<u64> = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            d2.push(a.dist2(*b));
        }
    }
    d2.sort_unstable();
    d2.dedup();
    RangeSet::new(d2.into_iter().map(|v| (v as f64).sqrt()).collect()).ok()
}

struct Search<'a> {
    dist2: Vec<Vec<u64>>,
    candidates: Vec<Vec<f64>>,
    source: usize,
    current: Vec<f64>,
    best: Option<(f64, Vec<f64>)>,
    _instance: &'a Instance,
}

impl Search<'_> {
    fn feasible(&self) -> bool {
        let n = self.current.len();
        let mut seen = vec![false; n];
        let mut stack = vec![self.source];
        seen[self.source] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for (v, &d2) in self.dist2[u].iter().enumerate() {
                if !seen[v] && reaches(self.current[u], d2) {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    fn descend(&mut self, i: usize, partial: f64) {
        if let Some((best, _)) = &self.best {
            if partial >= best - 1e-9 {
                return;
            }
        }
        if i == self.current.len() {
            if self.feasible() {
                self.best = Some((partial, self.current.clone()));
            }
            return;
        }
        for k in 0..self.candidates[i].len() {
            let r = self.candidates[i][k];
            self.current[i] = r;
            self.descend(i + 1, partial + r * r);
        }
        self.current[i] = 0.0;
    }
}

/// Minimum-cost feasible `r: S → Γ ∪ {0}` by exhaustive search (at most
/// [`MAX_NODES`] nodes). Per node only `0` and the Γ-roundings of its
/// distances to other nodes are tried; any optimum uses nothing else. Among
/// equal costs the lexicographically smallest radius vector wins.
pub fn brute_force_optimum(instance: &Instance, source: Coord, gamma: Option<&RangeSet>) -> Result<RangeAssignment> {
    let n = instance.len();
    if n > MAX_NODES {
        return Err(Error::InstanceTooLarge(n));
    }
    let s = instance.index_of(source).ok_or(Error::NotANode(source))?;
    if n == 1 {
        return Ok(RangeAssignment::zeros(instance));
    }
    let owned;
    let gamma = match gamma {
        Some(g) => g,
        None => {
            owned = pairwise_gamma(instance).expect("two distinct nodes");
            &owned
        }
    };
    let nodes = instance.nodes();
    let dist2: Vec<Vec<u64>> = nodes.iter().map(|a| nodes.iter().map(|b| a.dist2(*b)).collect()).collect();
    let candidates: Vec<Vec<f64>> = (0..n)
        .map(|v| {
            let mut c: Vec<f64> = (0..n)
                .filter(|&w| w != v)
                .filter_map(|w| gamma.round_up((dist2[v][w] as f64).sqrt()))
                .collect();
            c.push(0.0);
            c.sort_by(f64::total_cmp);
            c.dedup();
            c
        })
        .collect();
    let mut search = Search { dist2, candidates, source: s, current: vec![0.0; n], best: None, _instance: instance };
    search.descend(0, 0.0);
    match search.best {
        Some((_, ranges)) => RangeAssignment::new(instance, ranges)?.with_gamma(instance, gamma.clone()),
        None => Err(Error::Infeasible),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::mst::mst_heuristic;
    use crate::grid::{sample_instance, GridSpec};
    use crate::range::{cost, is_broadcast_feasible};

    fn points(side: u32, pts: &[(u32, u32)]) -> Instance {
        let spec = GridSpec::uniform(side, 0.5).unwrap();
        Instance::from_nodes(spec, pts.iter().map(|&(x, y)| Coord::new(x, y)).collect(), 0).unwrap()
    }

    #[test]
    fn two_nodes() {
        let inst = points(9, &[(0, 0), (3, 4)]);
        let g = RangeSet::new(vec![5.0]).unwrap();
        let a = brute_force_optimum(&inst, Coord::new(0, 0), Some(&g)).unwrap();
        assert_eq!(cost(&a), 25.0);
    }

    #[test]
    fn right_triangle() {
        // right angle at (0,0); legs 3 and 4, hypotenuse 5
        let inst = points(9, &[(0, 0), (3, 0), (0, 4)]);
        let a = brute_force_optimum(&inst, Coord::new(0, 0), None).unwrap();
        // Radius 4 at the source reaches both; any relay costs more.
        assert_eq!(cost(&a), 16.0);
        assert!(is_broadcast_feasible(&inst, &a, Coord::new(0, 0)).unwrap());
    }

    #[test]
    fn rejects_large_instances() {
        let inst = points(9, &[(0, 0), (1, 0), (2, 0), (3, 0), (4, 0), (5, 0), (6, 0), (7, 0), (8, 0)]);
        assert!(matches!(brute_force_optimum(&inst, Coord::new(0, 0), None), Err(Error::InstanceTooLarge(9))));
    }

    #[test]
    fn never_worse_than_mst() {
        let spec = GridSpec::uniform(6, 0.15).unwrap();
        let mut tested = 0;
        for seed in 0..60 {
            let inst = sample_instance(&spec, seed);
            if inst.is_empty() || inst.len() > 6 {
                continue;
            }
            let src = inst.node(0);
            let opt = brute_force_optimum(&inst, src, None).unwrap();
            assert!(is_broadcast_feasible(&inst, &opt, src).unwrap());
            assert!(cost(&opt) <= cost(&mst_heuristic(&inst, src).unwrap()) + 1e-9);
            tested += 1;
        }
        assert!(tested > 10);
    }
}
