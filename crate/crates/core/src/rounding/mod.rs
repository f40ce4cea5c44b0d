//! Iterative LP rounding to a pseudo-solution with at most `k+m` centers.
//!
//! The relaxation's assignment variables are removed by splitting facilities,
//! distances are snapped to powers of `1+λ`, and clients are split into
//! representatives (disjoint candidate sets, each must be fully served) and
//! the rest (served from a shrinking inner ball, paying `D_i` for any
//! shortfall). Whenever an inner-ball constraint is tight its client shrinks
//! and may become a representative. At the end only the partition constraints
//! and the `m` group rows can be tight, so a vertex has at most `k+m` nonzero
//! openings.

mod algorithm;
pub mod lp1;
pub mod metric;
pub mod split;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::LpError;
use crate::model::{evaluate_indices, CenterSet, CostProfile, Instance, ModelError};

pub use algorithm::init_representatives;
pub use lp1::{solve_lp1, Lp1Options, Lp1Solution, Lp1Strategy};
pub use metric::{round_distance, rounded_exponent, RoundedDistances};
pub use split::{split_facilities, Split, SplitFacility};

/// `λ = √(2/3)` minimizes `(1 + 2(1+λ)/λ)(1+λ)`.
pub fn default_lambda() -> f64 {
    (2.0f64 / 3.0).sqrt()
}

/// The approximation factor `((1 + 2(1+λ)/λ)(1+λ))^p`.
pub fn approximation_factor(lambda: f64, p: f64) -> f64 {
    ((1.0 + 2.0 * (1.0 + lambda) / lambda) * (1.0 + lambda)).powf(p)
}

#[derive(Debug, Error)]
pub enum RoundingError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rounding stalled after {iterations} iterations")]
    Stalled { iterations: usize },
    #[error("support of {support} facilities exceeds k + m = {bound}")]
    SupportBound { support: usize, bound: usize },
    #[error("lambda must lie in (0, 1], got {0}")]
    InvalidLambda(f64),
}

#[derive(Debug, Clone)]
pub struct RoundingOptions {
    pub lambda: f64,
    pub lp1: Lp1Options,
    /// Keep one trace record per iteration instead of only the last.
    pub trace: bool,
    /// Check the coverage claim every iteration; `None` checks small instances.
    pub check_coverage: Option<bool>,
    /// Add cheapest facilities until `k` are open when the support is smaller.
    pub pad_to_k: bool,
    pub iteration_constant: f64,
}

impl Default for RoundingOptions {
    fn default() -> Self {
        Self {
            lambda: default_lambda(),
            lp1: Lp1Options::default(),
            trace: false,
            check_coverage: None,
            pad_to_k: true,
            iteration_constant: 64.0,
        }
    }
}

impl RoundingOptions {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Default::default()
        }
    }
}

/// Per-iteration state of a rounding run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub lp_objective: f64,
    pub n_star: usize,
    pub n_free: usize,
    /// Point id of the client whose ball shrank.
    pub shrunk_client: Option<usize>,
    pub support_size: usize,
    pub min_coverage: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct PseudoSolution {
    pub centers: CenterSet,
    /// `k + m`.
    pub size_bound: usize,
    pub cost: CostProfile,
    /// Optimum of the relaxation.
    pub lp_lower_bound: f64,
    /// Objective of the last rounding program.
    pub final_lp_objective: f64,
    pub iterations: usize,
    /// Distinct original facilities in the final support.
    pub support_size: usize,
    /// Facilities added to reach `k`.
    pub padded: usize,
    pub trace: Vec<TraceRecord>,
    pub monotonicity_violations: usize,
    pub coverage_violations: usize,
}

/// Solves the relaxation and rounds it.
pub fn iterative_round(inst: &Instance, opts: &RoundingOptions) -> Result<PseudoSolution, RoundingError> {
    let lp1 = solve_lp1(inst, &opts.lp1)?;
    round_from_lp1(inst, &lp1, opts)
}

/// Rounds a given optimal relaxation solution.
pub fn round_from_lp1(
    inst: &Instance,
    lp1: &Lp1Solution,
    opts: &RoundingOptions,
) -> Result<PseudoSolution, RoundingError> {
    if !(opts.lambda > 0.0 && opts.lambda <= 1.0) {
        return Err(RoundingError::InvalidLambda(opts.lambda));
    }
    let out = algorithm::Rounding::new(inst, lp1, opts).run()?;
    let mut open: Vec<usize> = out
        .y
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > crate::lp::SUPPORT_TOL)
        .map(|(c, _)| out.split.copies[c].original)
        .collect();
    open.sort_unstable();
    open.dedup();
    let bound = inst.k() + inst.num_groups();
    if open.len() > bound {
        return Err(RoundingError::SupportBound {
            support: open.len(),
            bound,
        });
    }
    let support_size = open.len();
    let padded = if opts.pad_to_k { pad_greedily(inst, &mut open, inst.k()) } else { 0 };
    let cost = evaluate_indices(inst, &open);
    Ok(PseudoSolution {
        centers: CenterSet::from_facility_indices(inst, &open)?,
        size_bound: bound,
        cost,
        lp_lower_bound: lp1.z,
        final_lp_objective: out.lp_objective,
        iterations: out.iterations,
        support_size,
        padded,
        trace: out.trace,
        monotonicity_violations: out.monotonicity_violations,
        coverage_violations: out.coverage_violations,
    })
}

/// Adds the facility that lowers the objective most (lowest index on ties)
/// until `target` facilities are open. Returns how many were added.
pub(crate) fn pad_greedily(inst: &Instance, open: &mut Vec<usize>, target: usize) -> usize {
    let n = inst.num_clients();
    let mut conn: Vec<f64> = (0..n)
        .map(|i| open.iter().map(|&j| inst.cost_cf(i, j)).fold(f64::INFINITY, f64::min))
        .collect();
    let mut added = 0;
    while open.len() < target.min(inst.num_facilities()) {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..inst.num_facilities() {
            if open.binary_search(&j).is_ok() {
                continue;
            }
            let trial: Vec<f64> = (0..n).map(|i| conn[i].min(inst.cost_cf(i, j))).collect();
            let obj = crate::model::group_costs(inst, &trial).objective;
            if best.is_none_or(|(_, b)| obj < b) {
                best = Some((j, obj));
            }
        }
        let (j, _) = best.expect("a closed facility exists");
        for (i, c) in conn.iter_mut().enumerate() {
            *c = c.min(inst.cost_cf(i, j));
        }
        let pos = open.binary_search(&j).unwrap_err();
        open.insert(pos, j);
        added += 1;
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::micro_suite;
    use crate::model::{brute_force_opt, OracleOptions};

    #[test]
    fn factor_at_default_lambda() {
        let f = approximation_factor(default_lambda(), 1.0);
        assert!((f - (5.0 + 2.0 * 6f64.sqrt())).abs() < 1e-12);
        assert!(f <= 9.899);
    }

    #[test]
    fn opening_everything_needs_no_rounding() {
        for inst in micro_suite(21, 6) {
            let inst = inst.with_k(inst.num_facilities()).unwrap();
            let sol = iterative_round(&inst, &RoundingOptions::default()).unwrap();
            assert_eq!(sol.centers.len(), inst.num_facilities());
            assert!((sol.cost.objective - sol.lp_lower_bound).abs() <= 1e-7 * (1.0 + sol.lp_lower_bound));
        }
    }

    #[test]
    fn bicriteria_bound_on_micro_instances() {
        for inst in micro_suite(99, 25) {
            let opts = RoundingOptions {
                trace: true,
                check_coverage: Some(true),
                ..Default::default()
            };
            let sol = iterative_round(&inst, &opts).unwrap();
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            assert!(sol.centers.len() <= inst.k() + inst.num_groups());
            let bound = approximation_factor(opts.lambda, inst.p()) * opt.objective;
            assert!(sol.cost.objective <= bound * (1.0 + 1e-6) + 1e-12);
            assert_eq!(sol.monotonicity_violations, 0);
            assert_eq!(sol.coverage_violations, 0);
            assert_eq!(sol.trace.len(), sol.iterations + 1);
        }
    }

    #[test]
    fn invalid_lambda_is_rejected() {
        let inst = &micro_suite(1, 1)[0];
        let err = iterative_round(inst, &RoundingOptions::with_lambda(1.5)).unwrap_err();
        assert!(matches!(err, RoundingError::InvalidLambda(_)));
    }

    #[test]
    fn representatives_are_disjoint_and_maximal() {
        for inst in micro_suite(4, 12) {
            let lp1 = solve_lp1(&inst, &Lp1Options::default()).unwrap();
            let opts = RoundingOptions::default();
            let r = algorithm::Rounding::new(&inst, &lp1, &opts);
            assert!(r.representatives_disjoint());
            assert!(r.every_free_client_is_represented());
        }
    }

    #[test]
    fn identical_candidate_sets_keep_lower_id() {
        let star = init_representatives(&[vec![0, 1], vec![0, 1]], &[Some(2), Some(2)], 2);
        assert_eq!(star, vec![true, false]);
        let star = init_representatives(&[vec![0], vec![1], vec![2]], &[Some(1), None, Some(0)], 3);
        assert_eq!(star, vec![true, true, true]);
    }
}
