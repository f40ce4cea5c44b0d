//! Best k-subset of a pseudo-solution by enumeration.

use crate::combinatorics::binomial;
use crate::model::{best_subset_of, evaluate_indices, CenterSet, CostProfile, Instance};

use super::ConvertError;

/// Default limit on the number of k-subsets visited.
pub const DEFAULT_SUBSET_CAP: u128 = 2_000_000;

/// The cheapest `k`-subset of `s`, or `s` itself when it has at most `k`
/// centers. Ties go to the lexicographically smallest subset.
pub fn best_k_subset(inst: &Instance, s: &CenterSet, cap: u128) -> Result<(CenterSet, CostProfile), ConvertError> {
    let pool = s.facility_indices(inst)?;
    let k = inst.k();
    if pool.len() <= k {
        let cost = evaluate_indices(inst, &pool);
        return Ok((s.clone(), cost));
    }
    let subsets = binomial(pool.len(), k);
    if subsets > cap {
        return Err(ConvertError::TooLarge { subsets, cap });
    }
    let (idx, cost) = best_subset_of(inst, &pool, k).expect("pool is larger than k");
    Ok((CenterSet::from_facility_indices(inst, &idx)?, cost))
}

/// For each center of `opt`, the nearest member of `s` (lowest id on ties).
/// Its cost bounds the best k-subset of `s`.
pub fn nearest_subset(inst: &Instance, s: &CenterSet, opt: &CenterSet) -> CenterSet {
    let ids = opt
        .ids()
        .iter()
        .map(|&o| {
            *s.ids()
                .iter()
                .min_by(|&&a, &&b| inst.dist(o, a).total_cmp(&inst.dist(o, b)))
                .expect("center sets are nonempty")
        })
        .collect();
    CenterSet::new(ids).expect("opt is nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::micro_suite;
    use crate::model::{brute_force_opt, evaluate, OracleOptions};
    use crate::rounding::{iterative_round, RoundingOptions};

    #[test]
    fn at_most_k_returns_input() {
        let inst = &micro_suite(5, 1)[0];
        let s = CenterSet::from_facility_indices(inst, &(0..inst.k()).collect::<Vec<_>>()).unwrap();
        let (out, _) = best_k_subset(inst, &s, DEFAULT_SUBSET_CAP).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn cost_bound_against_oracle() {
        for inst in micro_suite(61, 30) {
            let pseudo = iterative_round(&inst, &RoundingOptions::default()).unwrap();
            let (out, cost) = best_k_subset(&inst, &pseudo.centers, DEFAULT_SUBSET_CAP).unwrap();
            assert!(out.len() <= inst.k());
            let (opt_set, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            let bound = 3f64.powf(inst.p() - 1.0) * (pseudo.cost.objective + 2.0 * opt.objective);
            assert!(cost.objective <= bound * (1.0 + 1e-9) + 1e-12);
            let witness = nearest_subset(&inst, &pseudo.centers, &opt_set);
            let witness_cost = evaluate(&inst, &witness).unwrap();
            assert!(cost.objective <= witness_cost.objective * (1.0 + 1e-12) + 1e-12);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = micro_suite(8, 4).into_iter().find(|i| i.num_facilities() > i.k()).unwrap();
        let all = CenterSet::new(inst.facilities().to_vec()).unwrap();
        let err = best_k_subset(&inst, &all, 0).unwrap_err();
        assert!(matches!(err, ConvertError::TooLarge { .. }));
    }
}
