//! Randomized invariants across modules.

use proptest::prelude::*;

use crate::algorithms::{cell_alg, mst_heuristic};
use crate::grid::{sample_instance, GridSpec};
use crate::range::{
    assignment_to_disks, cost, disks_cost, is_broadcast_feasible, prune_redundant, quantize_to_gamma, RangeAssignment,
    RangeSet,
};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 48, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn sampling_is_deterministic_and_monotone_in_p(side in 4u32..40, p in 0.05f64..0.9, dp in 0.0f64..0.1, seed: u64) {
        let a = sample_instance(&GridSpec::uniform(side, p).unwrap(), seed);
        let b = sample_instance(&GridSpec::uniform(side, p).unwrap(), seed);
        prop_assert_eq!(a.nodes(), b.nodes());
        let more = sample_instance(&GridSpec::uniform(side, p + dp).unwrap(), seed);
        for &c in a.nodes() {
            prop_assert!(more.contains(c));
        }
    }

    #[test]
    fn quantize_rounds_up_monotonically(side in 6u32..24, seed: u64, r1 in 0.0f64..20.0, r2 in 0.0f64..20.0) {
        let inst = sample_instance(&GridSpec::uniform(side, 0.4).unwrap(), seed);
        prop_assume!(inst.len() >= 2);
        let gamma = RangeSet::new(vec![1.0, 2.5, 5.0, 10.0, 20.0]).unwrap();
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let mut ranges = vec![0.0; inst.len()];
        ranges[0] = lo;
        ranges[1] = hi;
        let q = quantize_to_gamma(&inst, &RangeAssignment::new(&inst, ranges).unwrap(), &gamma).unwrap();
        prop_assert!(q.get(0) >= lo && q.get(1) >= hi);
        prop_assert!(q.get(0) <= q.get(1));
        prop_assert!(lo > 0.0 || q.get(0) == 0.0);
    }

    #[test]
    fn pruning_keeps_feasibility_and_never_costs_more(side in 5u32..20, p in 0.3f64..0.8, seed: u64) {
        let inst = sample_instance(&GridSpec::uniform(side, p).unwrap(), seed);
        prop_assume!(!inst.is_empty());
        let src = inst.node(seed as usize % inst.len());
        for a in [mst_heuristic(&inst, src).unwrap(), cell_alg(&inst, src, 2.0 * std::f64::consts::SQRT_2 * 2.0).unwrap()] {
            if !is_broadcast_feasible(&inst, &a, src).unwrap() {
                continue;
            }
            let pruned = prune_redundant(&inst, &a, src).unwrap();
            prop_assert!(is_broadcast_feasible(&inst, &pruned, src).unwrap());
            prop_assert!(cost(&pruned) <= cost(&a));
        }
    }

    #[test]
    fn disks_and_assignment_have_equal_cost(side in 5u32..30, p in 0.1f64..0.9, seed: u64) {
        let inst = sample_instance(&GridSpec::uniform(side, p).unwrap(), seed);
        prop_assume!(!inst.is_empty());
        let a = mst_heuristic(&inst, inst.node(0)).unwrap();
        prop_assert_eq!(disks_cost(&assignment_to_disks(&inst, &a)), cost(&a));
    }
}
