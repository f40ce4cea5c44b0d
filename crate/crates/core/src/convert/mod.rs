//! From a pseudo-solution with up to `k+m` centers to a solution with `k`.
//!
//! Two routes: enumerate the `k`-subsets of the pseudo-solution, or, on a
//! sparse instance, prune the pseudo-solution and then guess which of its
//! centers are close to an optimal center ("determined") and which optimal
//! centers are unrelated to it. Each determined center is replaced by one
//! facility from a small ball around it, chosen by a min-max assignment.

pub mod exhaustive;
pub mod minmax;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{binomial, Combinations};
use crate::model::{evaluate_indices, pow_p, CenterSet, CostProfile, Instance, ModelError};
use crate::rounding::{iterative_round, pad_greedily, RoundingError, RoundingOptions};
use crate::sparsify::{enumerate_instances, fball, SparsifyCaps};

pub use exhaustive::{best_k_subset, nearest_subset, DEFAULT_SUBSET_CAP};
pub use minmax::{
    brute_force_minmax, minmax_assign, minmax_assign_with_budget, MinMaxAssignmentProblem, MinMaxError,
    MinMaxSolution,
};

/// Most `V` sets generated per size before sorting.
const V_GENERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum ConvertError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rounding(#[from] RoundingError),
    #[error(transparent)]
    MinMax(#[from] MinMaxError),
    #[error("subproblem too large: {subsets} subsets exceed cap {cap}")]
    TooLarge { subsets: u128, cap: u128 },
    #[error("invalid conversion config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionConfig {
    pub epsilon_prime: f64,
    pub delta: f64,
    pub t: usize,
    /// Most `(D, V)` pairs tried per β.
    pub max_pairs: usize,
    pub minmax_budget: u128,
    pub subset_cap: u128,
}

impl ConversionConfig {
    /// Smallest admissible `t` for `delta` and `p`.
    pub fn min_t(delta: f64, p: f64) -> usize {
        (4.0 * (1.0 + 3.0 / delta).powf(p)).ceil() as usize
    }

    /// Largest admissible `delta` (exclusive) for `epsilon_prime`.
    pub fn delta_limit(epsilon_prime: f64) -> f64 {
        (1.0f64 / 8.0).min((1.0 + epsilon_prime).ln() / 12.0)
    }

    /// A config with the smallest admissible `t` and default caps.
    pub fn new(epsilon_prime: f64, delta: f64, p: f64) -> Result<Self, ConvertError> {
        let cfg = Self {
            epsilon_prime,
            delta,
            t: Self::min_t(delta, p),
            max_pairs: 10_000,
            minmax_budget: minmax::DEFAULT_BUDGET,
            subset_cap: DEFAULT_SUBSET_CAP,
        };
        cfg.validate(p)?;
        Ok(cfg)
    }

    pub fn validate(&self, p: f64) -> Result<(), ConvertError> {
        if !(self.epsilon_prime > 0.0 && self.epsilon_prime.is_finite()) {
            return Err(ConvertError::InvalidConfig(format!(
                "epsilon_prime must be positive, got {}",
                self.epsilon_prime
            )));
        }
        let limit = Self::delta_limit(self.epsilon_prime);
        if !(self.delta > 0.0 && self.delta < limit) {
            return Err(ConvertError::InvalidConfig(format!(
                "delta must lie in (0, {limit}), got {}",
                self.delta
            )));
        }
        let need = 4.0 * (1.0 + 3.0 / self.delta).powf(p);
        if (self.t as f64) < need {
            return Err(ConvertError::InvalidConfig(format!("t must be at least {need}, got {}", self.t)));
        }
        Ok(())
    }

    /// `(1 + 3/δ)^p`.
    fn blowup(&self, p: f64) -> f64 {
        (1.0 + 3.0 / self.delta).powf(p)
    }

    /// Lower end of the admissible β interval for an optimum guess.
    pub fn beta_for(&self, guess: f64, pseudo_cost: f64, m: usize, p: f64) -> f64 {
        2.0 / (m * self.t) as f64 * (guess + self.blowup(p) * pseudo_cost)
    }

    /// The admissible β interval for a known optimum.
    pub fn beta_interval(&self, opt: f64, pseudo_cost: f64, m: usize, p: f64) -> (f64, f64) {
        let scale = 2.0 / (m * self.t) as f64;
        let b = self.blowup(p) * pseudo_cost;
        (scale * (opt + b), scale * (2.0 * opt + b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversionPath {
    EarlyExit,
    Enumeration,
    Fallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConversionOutcome {
    pub centers: CenterSet,
    pub cost: CostProfile,
    pub path: ConversionPath,
    pub beta: f64,
    /// Size of the pseudo-solution after pruning.
    pub pruned_size: usize,
    pub pairs_tried: usize,
    /// Pairs with an empty ball or an over-budget subproblem.
    pub pairs_skipped: usize,
    pub truncated: bool,
}

/// Algorithm for a single β.
pub fn convert(inst: &Instance, pseudo: &CenterSet, cfg: &ConversionConfig, beta: f64) -> Result<ConversionOutcome, ConvertError> {
    cfg.validate(inst.p())?;
    let k = inst.k();
    let mut kept = pseudo.facility_indices(inst)?;
    let mut cost = evaluate_indices(inst, &kept).objective;
    while kept.len() > k {
        let removable = (0..kept.len()).find_map(|pos| {
            let mut rest = kept.clone();
            rest.remove(pos);
            let c = evaluate_indices(inst, &rest).objective;
            (c <= cost + beta).then_some((pos, c))
        });
        match removable {
            Some((pos, c)) => {
                kept.remove(pos);
                cost = c;
            }
            None => break,
        }
    }
    let pruned_size = kept.len();
    if kept.len() <= k {
        pad_greedily(inst, &mut kept, k);
        return finish(inst, kept, ConversionPath::EarlyExit, beta, pruned_size, 0, 0, false);
    }

    let search = enumerate_pairs(inst, &kept, cfg)?;
    match search.best {
        Some((mut s, _)) => {
            pad_greedily(inst, &mut s, k);
            finish(
                inst,
                s,
                ConversionPath::Enumeration,
                beta,
                pruned_size,
                search.tried,
                search.skipped,
                search.truncated,
            )
        }
        None => {
            let (set, _) = best_k_subset(inst, pseudo, cfg.subset_cap)?;
            let mut s = set.facility_indices(inst)?;
            pad_greedily(inst, &mut s, k);
            finish(
                inst,
                s,
                ConversionPath::Fallback,
                beta,
                pruned_size,
                search.tried,
                search.skipped,
                search.truncated,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    inst: &Instance,
    idx: Vec<usize>,
    path: ConversionPath,
    beta: f64,
    pruned_size: usize,
    pairs_tried: usize,
    pairs_skipped: usize,
    truncated: bool,
) -> Result<ConversionOutcome, ConvertError> {
    let cost = evaluate_indices(inst, &idx);
    Ok(ConversionOutcome {
        centers: CenterSet::from_facility_indices(inst, &idx)?,
        cost,
        path,
        beta,
        pruned_size,
        pairs_tried,
        pairs_skipped,
        truncated,
    })
}

struct PairSearch {
    best: Option<(Vec<usize>, f64)>,
    tried: usize,
    skipped: usize,
    truncated: bool,
}

/// Tries `(D, V)` with `D ⊆ kept`, `V ⊆ F`, `|D| + |V| = k`, `|V| < m²t`,
/// smaller `V` first and, within a size, `V` closer to `kept` first.
fn enumerate_pairs(inst: &Instance, kept: &[usize], cfg: &ConversionConfig) -> Result<PairSearch, ConvertError> {
    let k = inst.k();
    let m = inst.num_groups();
    let f = inst.num_facilities();
    let n = inst.num_clients();
    let points: Vec<usize> = kept.iter().map(|&j| inst.facility_point(j)).collect();
    let spacing: Vec<f64> = points
        .iter()
        .map(|&a| {
            points
                .iter()
                .filter(|&&b| b != a)
                .map(|&b| inst.dist(a, b))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    // Facility balls and client balls around each pruned center.
    let balls: Vec<Vec<usize>> = points
        .iter()
        .zip(&spacing)
        .map(|(&q, &l)| {
            fball(inst, q, cfg.delta * l)
                .into_iter()
                .map(|pt| inst.facility_index(pt).expect("fball returns facilities"))
                .collect()
        })
        .collect();
    let near: Vec<Vec<Vec<(usize, f64)>>> = points
        .iter()
        .zip(&spacing)
        .map(|(&q, &l)| {
            inst.groups()
                .iter()
                .map(|g| {
                    g.members()
                        .iter()
                        .copied()
                        .filter(|&(i, _)| inst.dist(q, inst.client_point(i)) < l / 3.0)
                        .collect()
                })
                .collect()
        })
        .collect();
    let score: Vec<f64> = (0..f)
        .map(|j| {
            let pt = inst.facility_point(j);
            points.iter().map(|&q| inst.dist(pt, q)).fold(f64::INFINITY, f64::min)
        })
        .collect();

    let mut search = PairSearch {
        best: None,
        tried: 0,
        skipped: 0,
        truncated: false,
    };
    let v_max = k.min((m * m * cfg.t).saturating_sub(1));
    'sizes: for v_size in 0..=v_max {
        let d_size = k - v_size;
        if d_size > kept.len() {
            continue;
        }
        for v in candidate_vs(&score, v_size) {
            let to_v: Vec<f64> = (0..n)
                .map(|i| v.iter().map(|&j| inst.cost_cf(i, j)).fold(f64::INFINITY, f64::min))
                .collect();
            for d in Combinations::new(kept.len(), d_size) {
                if search.tried >= cfg.max_pairs {
                    search.truncated = true;
                    break 'sizes;
                }
                search.tried += 1;
                let mut s = v.clone();
                if !d.is_empty() {
                    if d.iter().any(|&pos| balls[pos].is_empty()) {
                        search.skipped += 1;
                        continue;
                    }
                    let costs = (0..m)
                        .map(|g| {
                            d.iter()
                                .map(|&pos| {
                                    balls[pos]
                                        .iter()
                                        .map(|&fj| {
                                            near[pos][g]
                                                .iter()
                                                .map(|&(i, w)| w * inst.cost_cf(i, fj).min(to_v[i]))
                                                .sum()
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect();
                    let prob = MinMaxAssignmentProblem {
                        costs,
                        epsilon: cfg.epsilon_prime,
                    };
                    let sol = match minmax_assign_with_budget(&prob, cfg.minmax_budget) {
                        Ok(sol) => sol,
                        Err(MinMaxError::TooLarge { .. }) => {
                            search.skipped += 1;
                            continue;
                        }
                        Err(e) => return Err(e.into()),
                    };
                    s.extend(d.iter().zip(&sol.selection).map(|(&pos, &v)| balls[pos][v]));
                }
                s.sort_unstable();
                s.dedup();
                if s.is_empty() {
                    search.skipped += 1;
                    continue;
                }
                let c = evaluate_indices(inst, &s).objective;
                let better = match &search.best {
                    None => true,
                    Some((bs, bc)) => c < *bc || (c == *bc && s < *bs),
                };
                if better {
                    search.best = Some((s, c));
                }
            }
        }
    }
    Ok(search)
}

/// `size`-subsets of facilities ordered by total score, then lexicographically.
/// Large families are restricted to the best-scoring facilities.
fn candidate_vs(score: &[f64], size: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..score.len()).collect();
    order.sort_by(|&a, &b| score[a].total_cmp(&score[b]).then(a.cmp(&b)));
    let mut len = order.len();
    while len > size && binomial(len, size) > V_GENERATION_CAP {
        len -= 1;
    }
    let mut sets: Vec<(f64, Vec<usize>)> = Combinations::new(len, size)
        .map(|c| {
            let mut v: Vec<usize> = c.iter().map(|&q| order[q]).collect();
            v.sort_unstable();
            (v.iter().map(|&j| score[j]).sum(), v)
        })
        .collect();
    sets.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    sets.into_iter().map(|(_, v)| v).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaRun {
    pub guess: f64,
    pub beta: f64,
    pub path: Option<ConversionPath>,
    pub objective: Option<f64>,
    pub error: Option<String>,
}

/// What the β search did and what it returned.
#[derive(Debug, Clone, Serialize)]
pub struct ConversionReport {
    pub path: ConversionPath,
    pub beta: Option<f64>,
    pub candidates: usize,
    pub runs: Vec<BetaRun>,
    pub centers: CenterSet,
    pub cost: CostProfile,
}

impl ConversionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Optimum guesses: zero, then doubling from the smallest positive cost term
/// until past `pseudo_cost`.
pub fn opt_guesses(inst: &Instance, pseudo_cost: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    if pseudo_cost <= 0.0 {
        return grid;
    }
    let lo = inst
        .groups()
        .iter()
        .flat_map(|g| g.members().iter())
        .filter(|&&(_, w)| w > 0.0)
        .flat_map(|&(i, w)| (0..inst.num_facilities()).map(move |j| (i, w, j)))
        .map(|(i, w, j)| w * inst.cost_cf(i, j))
        .filter(|&c| c > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !lo.is_finite() {
        return grid;
    }
    let mut g = lo;
    loop {
        grid.push(g);
        if g >= pseudo_cost {
            break;
        }
        g *= 2.0;
    }
    grid
}

/// Runs [`convert`] for every optimum guess and keeps the cheapest result.
pub fn convert_with_beta_search(
    inst: &Instance,
    pseudo: &CenterSet,
    cfg: &ConversionConfig,
) -> Result<ConversionReport, ConvertError> {
    cfg.validate(inst.p())?;
    let pseudo_cost = evaluate_indices(inst, &pseudo.facility_indices(inst)?).objective;
    let m = inst.num_groups();
    let guesses = opt_guesses(inst, pseudo_cost);
    let results: Vec<(f64, f64, Result<ConversionOutcome, ConvertError>)> = guesses
        .par_iter()
        .map(|&g| {
            let beta = cfg.beta_for(g, pseudo_cost, m, inst.p());
            (g, beta, convert(inst, pseudo, cfg, beta))
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    let mut best: Option<ConversionOutcome> = None;
    for (guess, beta, res) in results {
        match res {
            Ok(out) => {
                runs.push(BetaRun {
                    guess,
                    beta,
                    path: Some(out.path),
                    objective: Some(out.cost.objective),
                    error: None,
                });
                let better = match &best {
                    None => true,
                    Some(b) => {
                        out.cost.objective < b.cost.objective
                            || (out.cost.objective == b.cost.objective && out.centers < b.centers)
                    }
                };
                if better {
                    best = Some(out);
                }
            }
            Err(e) => runs.push(BetaRun {
                guess,
                beta,
                path: None,
                objective: None,
                error: Some(e.to_string()),
            }),
        }
    }
    let candidates = runs.len();
    match best {
        Some(out) => Ok(ConversionReport {
            path: out.path,
            beta: Some(out.beta),
            candidates,
            runs,
            centers: out.centers,
            cost: out.cost,
        }),
        None => {
            let (set, _) = best_k_subset(inst, pseudo, cfg.subset_cap)?;
            let mut s = set.facility_indices(inst)?;
            pad_greedily(inst, &mut s, inst.k());
            let cost = evaluate_indices(inst, &s);
            Ok(ConversionReport {
                path: ConversionPath::Fallback,
                beta: None,
                candidates,
                runs,
                centers: CenterSet::from_facility_indices(inst, &s)?,
                cost,
            })
        }
    }
}

/// Result of the sparsify, round and convert pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub centers: CenterSet,
    pub cost: CostProfile,
    pub candidates: usize,
    pub failures: usize,
    /// Index of the winning candidate in the sparsifier stream.
    pub best_candidate: usize,
}

/// For each sparsifier candidate: round, convert with β search, and score on
/// the original instance. Returns the cheapest.
pub fn sparse_pipeline(
    inst: &Instance,
    sparsify_t: usize,
    caps: SparsifyCaps,
    rounding: &RoundingOptions,
    cfg: &ConversionConfig,
) -> Result<PipelineOutcome, ConvertError> {
    let candidates: Vec<Instance> = enumerate_instances(inst, sparsify_t, caps).map(|c| c.instance).collect();
    let results: Vec<Result<(Vec<usize>, f64), ConvertError>> = candidates
        .par_iter()
        .map(|cand| {
            let pseudo = iterative_round(cand, rounding)?;
            let report = convert_with_beta_search(cand, &pseudo.centers, cfg)?;
            let idx: Vec<usize> = report
                .centers
                .ids()
                .iter()
                .map(|&pt| inst.facility_index(pt).expect("candidate facilities are a subset"))
                .collect();
            let c = evaluate_indices(inst, &idx).objective;
            Ok((idx, c))
        })
        .collect();
    let mut best: Option<(usize, Vec<usize>, f64)> = None;
    let mut failures = 0;
    let mut last_err = None;
    for (pos, r) in results.into_iter().enumerate() {
        match r {
            Ok((idx, c)) => {
                let better = match &best {
                    None => true,
                    Some((_, bs, bc)) => c < *bc || (c == *bc && idx < *bs),
                };
                if better {
                    best = Some((pos, idx, c));
                }
            }
            Err(e) => {
                log::debug!("pipeline candidate {pos} failed: {e}");
                failures += 1;
                last_err = Some(e);
            }
        }
    }
    match best {
        Some((pos, idx, _)) => Ok(PipelineOutcome {
            cost: evaluate_indices(inst, &idx),
            centers: CenterSet::from_facility_indices(inst, &idx)?,
            candidates: candidates.len(),
            failures,
            best_candidate: pos,
        }),
        None => Err(last_err.unwrap_or(ConvertError::Model(ModelError::NoCenters))),
    }
}

/// Upper bound on the early-exit cost: `cost(T) + mβ`.
pub fn early_exit_bound(pseudo_cost: f64, m: usize, beta: f64) -> f64 {
    pseudo_cost + m as f64 * beta
}

/// `((1+3/δ)^p)` used by the β formula, exposed for reports.
pub fn ball_blowup(delta: f64, p: f64) -> f64 {
    pow_p(1.0 + 3.0 / delta, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::sparse_suite;
    use crate::model::{brute_force_opt, OracleOptions};

    fn cfg() -> ConversionConfig {
        ConversionConfig::new(0.9, 0.05, 1.0).unwrap()
    }

    #[test]
    fn config_limits() {
        assert_eq!(ConversionConfig::min_t(0.05, 1.0), 244);
        assert!(ConversionConfig::new(0.9, 0.06, 1.0).is_err());
        assert!(ConversionConfig::new(0.9, 0.0, 1.0).is_err());
        let mut c = cfg();
        c.t = 243;
        assert!(c.validate(1.0).is_err());
    }

    #[test]
    fn pseudo_solution_with_k_centers_is_returned() {
        let inst = &sparse_suite(2, 1, 1.0)[0];
        let s = CenterSet::from_facility_indices(inst, &(0..inst.k()).collect::<Vec<_>>()).unwrap();
        let out = convert(inst, &s, &cfg(), 0.0).unwrap();
        assert_eq!(out.path, ConversionPath::EarlyExit);
        assert_eq!(out.centers, s);
    }

    #[test]
    fn pruning_shrinks_to_k() {
        for inst in sparse_suite(7, 10, 1.0) {
            let all = CenterSet::new(inst.facilities().to_vec()).unwrap();
            let out = convert(&inst, &all, &cfg(), f64::INFINITY).unwrap();
            assert_eq!(out.path, ConversionPath::EarlyExit);
            assert_eq!(out.centers.len(), inst.k());
        }
    }

    #[test]
    fn zero_cost_pseudo_solution_stays_zero() {
        // Every client sits on a facility; opening all of them costs nothing.
        let coords: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64]).collect();
        let inst = Instance::euclidean(coords, vec![0, 1], vec![0, 1, 2, 3], vec![vec![(0, None), (1, None)]], 2, 1.0).unwrap();
        let all = CenterSet::new(vec![0, 1, 2, 3]).unwrap();
        let report = convert_with_beta_search(&inst, &all, &cfg()).unwrap();
        assert_eq!(report.cost.objective, 0.0);
        assert_eq!(report.centers.len(), 2);
    }

    #[test]
    fn enumeration_path_respects_k_and_bound() {
        let mut enumerated = 0;
        for inst in sparse_suite(13, 20, 1.0) {
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            let all = CenterSet::new(inst.facilities().to_vec()).unwrap();
            if all.len() <= inst.k() {
                continue;
            }
            let out = convert(&inst, &all, &cfg(), 0.0).unwrap();
            assert!(out.centers.len() <= inst.k());
            assert_eq!(out.centers.len(), inst.k().min(inst.num_facilities()));
            if out.path == ConversionPath::Enumeration {
                enumerated += 1;
                // With V ranging over every k-subset the search contains OPT.
                assert!(out.cost.objective <= opt.objective * (1.0 + 1e-9) + 1e-12);
            }
        }
        assert!(enumerated > 0);
    }

    #[test]
    fn beta_grid_brackets_the_optimum() {
        for inst in sparse_suite(3, 10, 1.0) {
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            let all = CenterSet::new(inst.facilities().to_vec()).unwrap();
            let pc = evaluate_indices(&inst, &all.facility_indices(&inst).unwrap()).objective;
            let pc = pc.max(opt.objective);
            let grid = opt_guesses(&inst, pc);
            let c = cfg();
            let (lo, hi) = c.beta_interval(opt.objective, pc, inst.num_groups(), inst.p());
            assert!(grid
                .iter()
                .map(|&g| c.beta_for(g, pc, inst.num_groups(), inst.p()))
                .any(|b| b >= lo - 1e-12 && b <= hi + 1e-12));
        }
    }

    #[test]
    fn report_serializes_path_in_kebab_case() {
        let inst = &sparse_suite(2, 1, 1.0)[0];
        let s = CenterSet::from_facility_indices(inst, &(0..inst.k()).collect::<Vec<_>>()).unwrap();
        let report = convert_with_beta_search(inst, &s, &cfg()).unwrap();
        assert!(report.to_json().contains("\"early-exit\""));
    }
}
