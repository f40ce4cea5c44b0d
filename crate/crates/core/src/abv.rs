//! Filtering baseline: round the relaxation by picking clients with small
//! fractional radius whose balls are pairwise disjoint, and open the nearest
//! facility of each.

use serde::Serialize;
use thiserror::Error;

use crate::lp::LpError;
use crate::model::{evaluate_indices, pow_p, CenterSet, CostProfile, Instance, ModelError};
use crate::rounding::{solve_lp1, Lp1Options, Lp1Solution};

#[derive(Debug, Error)]
pub enum AbvError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilteringParams {
    pub epsilon: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbvOutcome {
    pub centers: CenterSet,
    pub cost: CostProfile,
    /// Selected clients in selection order.
    pub selected: Vec<usize>,
    /// Ball radius of every client.
    pub radius: Vec<f64>,
    pub lp_objective: f64,
}

/// Most centers filtering may open: `⌈k/(1−ε)⌉`.
pub fn center_bound(k: usize, epsilon: f64) -> usize {
    (k as f64 / (1.0 - epsilon) - 1e-9).ceil() as usize
}

pub fn abv_filtering(inst: &Instance, params: FilteringParams) -> Result<AbvOutcome, AbvError> {
    let lp1 = solve_lp1(inst, &Lp1Options::default())?;
    filter_from_lp1(inst, &lp1, params)
}

pub fn filter_from_lp1(inst: &Instance, lp1: &Lp1Solution, params: FilteringParams) -> Result<AbvOutcome, AbvError> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AbvError::InvalidEpsilon(eps));
    }
    let n = inst.num_clients();
    let p = inst.p();
    let frac: Vec<f64> = (0..n)
        .map(|i| lp1.x[i].iter().map(|&(j, v)| v * inst.cost_cf(i, j)).sum())
        .collect();
    let radius: Vec<f64> = frac.iter().map(|&r| pow_p((r / eps).max(0.0), 1.0 / p)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| frac[a].total_cmp(&frac[b]).then(a.cmp(&b)));

    let mut suppressed = vec![false; n];
    let mut selected = Vec::new();
    let mut open = Vec::new();
    for &i in &order {
        if suppressed[i] {
            continue;
        }
        selected.push(i);
        let nearest = (0..inst.num_facilities())
            .min_by(|&a, &b| inst.dist_cf(i, a).total_cmp(&inst.dist_cf(i, b)).then(a.cmp(&b)))
            .expect("instances have facilities");
        open.push(nearest);
        let pi = inst.client_point(i);
        for (other, flag) in suppressed.iter_mut().enumerate() {
            if !*flag && inst.dist(pi, inst.client_point(other)) <= 2.0 * radius[other] {
                *flag = true;
            }
        }
    }
    open.sort_unstable();
    open.dedup();
    let cost = evaluate_indices(inst, &open);
    Ok(AbvOutcome {
        centers: CenterSet::from_facility_indices(inst, &open)?,
        cost,
        selected,
        radius,
        lp_objective: lp1.z,
    })
}

/// Whether the facility balls of the selected clients are pairwise disjoint.
pub fn balls_disjoint(inst: &Instance, out: &AbvOutcome) -> bool {
    let ball = |i: usize| -> Vec<usize> {
        (0..inst.num_facilities())
            .filter(|&j| inst.dist_cf(i, j) <= out.radius[i])
            .collect()
    };
    let balls: Vec<Vec<usize>> = out.selected.iter().map(|&i| ball(i)).collect();
    balls
        .iter()
        .enumerate()
        .all(|(a, ba)| balls[a + 1..].iter().all(|bb| ba.iter().all(|j| !bb.contains(j))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::micro_suite;
    use crate::model::{brute_force_opt, OracleOptions};

    #[test]
    fn center_count_and_disjoint_balls() {
        for inst in micro_suite(71, 25) {
            let lp1 = solve_lp1(&inst, &Lp1Options::default()).unwrap();
            for eps in [0.1, 0.3, 0.5, 0.9] {
                let out = filter_from_lp1(&inst, &lp1, FilteringParams { epsilon: eps }).unwrap();
                assert!(out.centers.len() <= center_bound(inst.k(), eps));
                assert!(balls_disjoint(&inst, &out));
            }
        }
    }

    #[test]
    fn within_sanity_envelope() {
        for inst in micro_suite(72, 20) {
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            for eps in [0.2, 0.5] {
                let out = abv_filtering(&inst, FilteringParams { epsilon: eps }).unwrap();
                let envelope = 2.0 * (2.0 / eps).powf(inst.p()) * opt.objective;
                assert!(out.cost.objective <= envelope * (1.0 + 1e-9) + 1e-12);
            }
        }
    }

    #[test]
    fn integral_relaxation() {
        for inst in micro_suite(73, 6) {
            let inst = inst.with_k(inst.num_facilities()).unwrap();
            let out = abv_filtering(&inst, FilteringParams { epsilon: 0.5 }).unwrap();
            assert!(out.centers.len() <= inst.num_facilities());
            assert!(out.cost.objective >= out.lp_objective * (1.0 - 1e-7) - 1e-9);
        }
        // Clients on facilities: zero radii, nothing suppressed across points.
        let coords: Vec<Vec<f64>> = [0.0, 1.0, 5.0].iter().map(|&x| vec![x]).collect();
        let groups = vec![vec![(0, None), (1, None), (2, None)]];
        let inst = Instance::euclidean(coords, vec![0, 1, 2], vec![0, 1, 2], groups, 3, 1.0).unwrap();
        let out = abv_filtering(&inst, FilteringParams { epsilon: 0.5 }).unwrap();
        assert_eq!(out.cost.objective, 0.0);
        assert_eq!(out.centers.len(), 3);
    }

    #[test]
    fn epsilon_range() {
        let inst = &micro_suite(1, 1)[0];
        for eps in [0.0, 1.0, -0.5] {
            assert!(matches!(
                abv_filtering(inst, FilteringParams { epsilon: eps }),
                Err(AbvError::InvalidEpsilon(_))
            ));
        }
    }
}
