//! The acceptance suite: each criterion is a self-contained check that
//! reports pass or fail with the measurements behind the verdict.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::abv::{filter_from_lp1, FilteringParams};
use crate::convert::{
    best_k_subset, brute_force_minmax, minmax_assign, sparse_pipeline, ConversionConfig, MinMaxAssignmentProblem,
    DEFAULT_SUBSET_CAP,
};
use crate::data::{self, DatasetSpec};
use crate::gen::{micro_suite, partition_matroid_lp, sparse_suite};
use crate::lp::{solve_to_vertex, SUPPORT_TOL};
use crate::model::{brute_force_opt, CenterSet, CostProfile, Instance, OracleOptions};
use crate::rounding::{
    approximation_factor, default_lambda, iterative_round, round_from_lp1, solve_lp1, Lp1Options, PseudoSolution,
    RoundingOptions,
};
use crate::sparsify::{enumerate_instances, is_alpha_sparse, SparsifyCaps};

const MICRO_SEED: u64 = 2023;
const SPARSE_SEED: u64 = 77;
const MATROID_SEED: u64 = 4242;
const MINMAX_SEED: u64 = 9001;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    fn new(id: u32, name: &str, passed: bool, detail: String) -> Self {
        Self {
            id,
            name: name.to_string(),
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn lines(&self) -> Vec<String> {
        self.criteria.iter().map(CriterionResult::line).collect()
    }
}

#[derive(Debug, Clone)]
pub struct AcceptOptions {
    /// Directory holding `credit.json` and `compas.json` dataset specs.
    pub datasets_dir: PathBuf,
    /// Run the suite a second time and compare report bytes.
    pub check_determinism: bool,
}

impl Default for AcceptOptions {
    fn default() -> Self {
        Self {
            datasets_dir: PathBuf::from("datasets"),
            check_determinism: true,
        }
    }
}

/// Runs every criterion in order.
pub fn run_all(opts: &AcceptOptions) -> AcceptanceReport {
    let mut criteria = run_once(&opts.datasets_dir);
    if opts.check_determinism {
        let first = AcceptanceReport {
            criteria: criteria.clone(),
        }
        .to_json();
        let second = AcceptanceReport {
            criteria: run_once(&opts.datasets_dir),
        }
        .to_json();
        criteria.push(determinism(&first, &second));
    }
    AcceptanceReport { criteria }
}

fn run_once(datasets_dir: &Path) -> Vec<CriterionResult> {
    let micro = timed("micro runs", MicroRuns::compute);
    let sparse = sparse_suite(SPARSE_SEED, 20, 1.0);
    let mut out = vec![
        timed("criterion 1", || bicriteria(&micro)),
        timed("criterion 2", || monotonicity(&micro)),
        timed("criterion 3", || coverage(&micro)),
        timed("criterion 4", support_bound),
        timed("criterion 5", || exhaustive_conversion(&micro)),
        timed("criterion 6", minmax),
        timed("criterion 7", || sparsification(&sparse)),
        timed("criterion 8", || pipeline(&sparse)),
    ];
    let bench = timed("benchmark grid", || BenchmarkRuns::compute(datasets_dir));
    out.push(dominance(&bench));
    out.push(center_counts(&bench));
    out
}

fn timed<T>(what: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    log::info!("{what}: {:.1}s", start.elapsed().as_secs_f64());
    out
}

/// Runs of criterion 1 shared by criteria 1, 2, 3 and 5.
pub struct MicroRuns {
    pub runs: Vec<(Instance, Result<PseudoSolution, String>, CostProfile)>,
}

impl MicroRuns {
    pub fn compute() -> Self {
        let runs = micro_suite(MICRO_SEED, 50)
            .into_par_iter()
            .map(|inst| {
                let opts = RoundingOptions {
                    lambda: default_lambda(),
                    trace: true,
                    check_coverage: Some(true),
                    ..Default::default()
                };
                let sol = iterative_round(&inst, &opts).map_err(|e| e.to_string());
                let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).expect("micro instances fit the oracle");
                (inst, sol, opt)
            })
            .collect();
        Self { runs }
    }
}

fn bicriteria(micro: &MicroRuns) -> CriterionResult {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, (inst, sol, opt)) in micro.runs.iter().enumerate() {
        match sol {
            Err(e) => bad.push(format!("#{n}: {e}")),
            Ok(sol) => {
                let bound = approximation_factor(default_lambda(), inst.p()) * opt.objective;
                if opt.objective > 0.0 {
                    worst = worst.max(sol.cost.objective / opt.objective / approximation_factor(default_lambda(), inst.p()));
                }
                if sol.centers.len() > inst.k() + inst.num_groups() {
                    bad.push(format!("#{n}: {} centers", sol.centers.len()));
                }
                if sol.cost.objective > bound * (1.0 + 1e-6) + 1e-12 {
                    bad.push(format!("#{n}: {} > {}", sol.cost.objective, bound));
                }
            }
        }
    }
    CriterionResult::new(
        1,
        "bicriteria guarantee",
        bad.is_empty(),
        format!(
            "{} instances, worst cost/bound {:.4}{}",
            micro.runs.len(),
            worst,
            failures(&bad)
        ),
    )
}

fn failures(bad: &[String]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!(", failures: {}", bad.join("; "))
    }
}

fn monotonicity(micro: &MicroRuns) -> CriterionResult {
    let mut steps = 0;
    let mut bad = Vec::new();
    for (n, (_, sol, _)) in micro.runs.iter().enumerate() {
        let Ok(sol) = sol else {
            bad.push(format!("#{n}: no trace"));
            continue;
        };
        for w in sol.trace.windows(2) {
            steps += 1;
            let (a, b) = (w[0].lp_objective, w[1].lp_objective);
            if b > a + 1e-6 * a.abs().max(1.0) {
                bad.push(format!("#{n} iteration {}: {a} -> {b}", w[1].iteration));
            }
        }
    }
    CriterionResult::new(
        2,
        "LP objective non-increasing",
        bad.is_empty(),
        format!("{steps} steps checked{}", failures(&bad)),
    )
}

fn coverage(micro: &MicroRuns) -> CriterionResult {
    let mut checked = 0;
    let mut min_seen = f64::INFINITY;
    let mut bad = Vec::new();
    for (n, (_, sol, _)) in micro.runs.iter().enumerate() {
        let Ok(sol) = sol else {
            bad.push(format!("#{n}: no trace"));
            continue;
        };
        if sol.coverage_violations > 0 {
            bad.push(format!("#{n}: {} violations", sol.coverage_violations));
        }
        for r in &sol.trace {
            if let Some(c) = r.min_coverage {
                checked += 1;
                min_seen = min_seen.min(c);
                if c < 1.0 - 1e-6 {
                    bad.push(format!("#{n} iteration {}: coverage {c}", r.iteration));
                }
            }
        }
    }
    CriterionResult::new(
        3,
        "coverage of free clients",
        bad.is_empty() && checked > 0,
        format!("{checked} iterations checked, least coverage {min_seen:.9}{}", failures(&bad)),
    )
}

fn support_bound() -> CriterionResult {
    let mut rng = ChaCha8Rng::seed_from_u64(MATROID_SEED);
    let mut bad = Vec::new();
    let mut integral_cases = 0;
    for n in 0..100 {
        let k = rng.random_range(1..=6);
        let m = rng.random_range(0..=3);
        let (lp, _) = partition_matroid_lp(MATROID_SEED + n, k, m);
        match solve_to_vertex(&lp) {
            Err(e) => bad.push(format!("#{n}: {e}")),
            Ok(sol) => {
                if sol.support.len() > k + m {
                    bad.push(format!("#{n}: support {} > {}", sol.support.len(), k + m));
                }
                if m == 0 {
                    integral_cases += 1;
                    if sol.values.iter().any(|&v| v > SUPPORT_TOL && v < 1.0 - SUPPORT_TOL) {
                        bad.push(format!("#{n}: fractional vertex without extra rows"));
                    }
                }
            }
        }
    }
    CriterionResult::new(
        4,
        "vertex support at most k+m",
        bad.is_empty(),
        format!("100 programs, {integral_cases} without extra rows{}", failures(&bad)),
    )
}

fn exhaustive_conversion(micro: &MicroRuns) -> CriterionResult {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, (inst, sol, opt)) in micro.runs.iter().enumerate() {
        let Ok(sol) = sol else {
            bad.push(format!("#{n}: no pseudo-solution"));
            continue;
        };
        match best_k_subset(inst, &sol.centers, DEFAULT_SUBSET_CAP) {
            Err(e) => bad.push(format!("#{n}: {e}")),
            Ok((_, cost)) => {
                let bound = 3f64.powf(inst.p() - 1.0) * (sol.cost.objective + 2.0 * opt.objective);
                if bound > 0.0 {
                    worst = worst.max(cost.objective / bound);
                }
                if cost.objective > bound * (1.0 + 1e-9) {
                    bad.push(format!("#{n}: {} > {bound}", cost.objective));
                }
            }
        }
    }
    CriterionResult::new(
        5,
        "best k-subset conversion bound",
        bad.is_empty(),
        format!("{} instances, worst cost/bound {worst:.4}{}", micro.runs.len(), failures(&bad)),
    )
}

/// The random problems of criterion 6.
pub fn minmax_problems() -> Vec<MinMaxAssignmentProblem> {
    let mut rng = ChaCha8Rng::seed_from_u64(MINMAX_SEED);
    (0..50)
        .map(|n| {
            let m = 1 + n % 2;
            let k = rng.random_range(1..=4);
            let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=4)).collect();
            let costs = (0..m)
                .map(|_| {
                    sizes
                        .iter()
                        .map(|&s| (0..s).map(|_| (rng.random::<f64>() * 100.0).round() / 10.0).collect())
                        .collect()
                })
                .collect();
            MinMaxAssignmentProblem { costs, epsilon: 0.5 }
        })
        .collect()
}

fn minmax() -> CriterionResult {
    let mut bad = Vec::new();
    let mut exact = 0;
    for (n, prob) in minmax_problems().iter().enumerate() {
        let (_, theta) = brute_force_minmax(prob);
        match minmax_assign(prob) {
            Err(e) => bad.push(format!("#{n}: {e}")),
            Ok(sol) => {
                if (sol.value - prob.value(&sol.selection)).abs() > 1e-12 {
                    bad.push(format!("#{n}: reported value differs from selection"));
                }
                if prob.num_groups() == 1 {
                    exact += 1;
                    if (sol.value - theta).abs() > 1e-9 * theta.max(1.0) {
                        bad.push(format!("#{n}: {} != {theta}", sol.value));
                    }
                } else if sol.value > 1.5 * theta * (1.0 + 1e-9) + 1e-12 {
                    bad.push(format!("#{n}: {} > 1.5 * {theta}", sol.value));
                }
            }
        }
    }
    CriterionResult::new(
        6,
        "min-max assignment within 1+eps",
        bad.is_empty(),
        format!("50 problems, {exact} single-group exact{}", failures(&bad)),
    )
}

fn sparsification(sparse: &[Instance]) -> CriterionResult {
    let results: Vec<Result<usize, String>> = sparse
        .par_iter()
        .map(|inst| {
            let oracle = OracleOptions::default();
            let (opt_set, opt) = brute_force_opt(inst, &oracle).map_err(|e| e.to_string())?;
            let alpha = opt.objective / inst.num_groups() as f64;
            let mut emitted = 0;
            let mut found = None;
            for cand in enumerate_instances(inst, 1, SparsifyCaps::default()) {
                emitted += 1;
                let c = &cand.instance;
                let Ok((c_set, c_opt)) = brute_force_opt(c, &oracle) else {
                    continue;
                };
                if (c_opt.objective - opt.objective).abs() > 1e-9 * opt.objective.max(1.0) {
                    continue;
                }
                let base_inside = opt_set.ids().iter().all(|&f| c.facility_index(f).is_some());
                if is_alpha_sparse(c, alpha, &c_set) || (base_inside && is_alpha_sparse(c, alpha, &opt_set)) {
                    found = Some(emitted);
                    break;
                }
            }
            found.ok_or_else(|| format!("none of {emitted} candidates qualifies"))
        })
        .collect();
    let bad: Vec<String> = results
        .iter()
        .enumerate()
        .filter_map(|(n, r)| r.as_ref().err().map(|e| format!("#{n}: {e}")))
        .collect();
    let worst = results.iter().filter_map(|r| r.as_ref().ok()).max().copied().unwrap_or(0);
    CriterionResult::new(
        7,
        "sparse candidate with unchanged optimum",
        bad.is_empty(),
        format!(
            "{} instances, latest qualifying candidate #{worst}{}",
            sparse.len(),
            failures(&bad)
        ),
    )
}

fn pipeline(sparse: &[Instance]) -> CriterionResult {
    let factor = 5.0 + 2.0 * 6f64.sqrt() + 0.5;
    let results: Vec<Result<(f64, f64), String>> = sparse
        .par_iter()
        .map(|inst| {
            let (_, opt) = brute_force_opt(inst, &OracleOptions::default()).map_err(|e| e.to_string())?;
            let cfg = ConversionConfig::new(0.9, 0.05, inst.p()).map_err(|e| e.to_string())?;
            let caps = SparsifyCaps {
                dedupe: true,
                ..Default::default()
            };
            let out = sparse_pipeline(inst, 1, caps, &RoundingOptions::default(), &cfg).map_err(|e| e.to_string())?;
            if out.failures > 0 {
                log::warn!("{} of {} pipeline candidates failed", out.failures, out.candidates);
            }
            Ok((out.cost.objective, opt.objective))
        })
        .collect();
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for (n, r) in results.iter().enumerate() {
        match r {
            Err(e) => bad.push(format!("#{n}: {e}")),
            Ok((c, o)) => {
                if *o > 0.0 {
                    worst = worst.max(c / o);
                }
                if *c > factor * o * (1.0 + 1e-9) + 1e-12 {
                    bad.push(format!("#{n}: {c} > {factor} * {o}"));
                }
            }
        }
    }
    CriterionResult::new(
        8,
        "sparse pipeline within 5+2*sqrt(6)+0.5",
        bad.is_empty(),
        format!("{} instances, worst cost/opt {worst:.4}{}", sparse.len(), failures(&bad)),
    )
}

pub const BENCH_KS: [usize; 10] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50];
pub const BENCH_LAMBDAS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];
pub const BENCH_EPSILONS: [f64; 5] = [0.1, 0.2, 0.3, 0.4, 0.5];

/// One `(dataset, k)` cell of the benchmark grid.
#[derive(Debug, Clone, Serialize)]
pub struct BenchCell {
    pub k: usize,
    /// `(centers, objective)` per λ of [`BENCH_LAMBDAS`].
    pub rounding: Vec<Result<(usize, f64), String>>,
    /// `(centers, objective)` per ε of [`BENCH_EPSILONS`].
    pub filtering: Vec<Result<(usize, f64), String>>,
}

pub struct BenchmarkRuns {
    pub datasets: Vec<(String, Result<Vec<BenchCell>, String>)>,
}

impl BenchmarkRuns {
    pub fn compute(dir: &Path) -> Self {
        let datasets = ["credit", "compas"]
            .iter()
            .map(|name| {
                let cells = DatasetSpec::load(dir.join(format!("{name}.json")))
                    .and_then(|spec| data::load(&spec))
                    .map_err(|e| e.to_string())
                    .map(|d| bench_cells(&d.instance));
                (name.to_string(), cells)
            })
            .collect();
        Self { datasets }
    }
}

fn as_row(r: Result<(CenterSet, CostProfile), String>) -> Result<(usize, f64), String> {
    r.map(|(c, cost)| (c.len(), cost.objective))
}

pub fn bench_cells(inst: &Instance) -> Vec<BenchCell> {
    BENCH_KS
        .par_iter()
        .map(|&k| {
            let start = Instant::now();
            let fail = |e: String| BenchCell {
                k,
                rounding: vec![Err(e.clone()); BENCH_LAMBDAS.len()],
                filtering: vec![Err(e); BENCH_EPSILONS.len()],
            };
            let inst = match inst.with_k(k) {
                Ok(i) => i,
                Err(e) => return fail(e.to_string()),
            };
            let lp1 = match solve_lp1(&inst, &Lp1Options::default()) {
                Ok(l) => l,
                Err(e) => return fail(e.to_string()),
            };
            let lp1_secs = start.elapsed().as_secs_f64();
            let rounding = BENCH_LAMBDAS
                .par_iter()
                .map(|&l| {
                    as_row(
                        round_from_lp1(&inst, &lp1, &RoundingOptions::with_lambda(l))
                            .map(|s| (s.centers, s.cost))
                            .map_err(|e| e.to_string()),
                    )
                })
                .collect();
            let filtering = BENCH_EPSILONS
                .iter()
                .map(|&e| {
                    as_row(
                        filter_from_lp1(&inst, &lp1, FilteringParams { epsilon: e })
                            .map(|o| (o.centers, o.cost))
                            .map_err(|e| e.to_string()),
                    )
                })
                .collect();
            log::info!(
                "k={k}: {:.1}s ({lp1_secs:.1}s relaxation, {} columns, {} pricing rounds)",
                start.elapsed().as_secs_f64(),
                lp1.columns,
                lp1.pricing_rounds
            );
            BenchCell { k, rounding, filtering }
        })
        .collect()
}

/// The filtering run whose center count is closest to `target`; ties go to
/// the smaller ε.
pub fn matched_filtering(cell: &BenchCell, target: usize) -> Option<(f64, usize, f64)> {
    cell.filtering
        .iter()
        .zip(BENCH_EPSILONS)
        .filter_map(|(r, e)| r.as_ref().ok().map(|&(c, o)| (e, c, o)))
        .min_by_key(|&(_, c, _)| c.abs_diff(target))
}

fn dominance(bench: &BenchmarkRuns) -> CriterionResult {
    let lambda_pos = BENCH_LAMBDAS.iter().position(|&l| l == 0.3).expect("0.3 is on the grid");
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, cells) in &bench.datasets {
        let cells = match cells {
            Ok(c) => c,
            Err(e) => {
                passed = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut wins = 0;
        let mut losses = Vec::new();
        for cell in cells {
            let Ok((count, obj)) = cell.rounding[lambda_pos] else {
                losses.push(format!("k={} rounding failed", cell.k));
                continue;
            };
            match matched_filtering(cell, count) {
                Some((_, _, o)) if obj <= o * (1.0 + 1e-9) => wins += 1,
                Some((e, c, o)) => losses.push(format!("k={} {obj:.4} > {o:.4} (eps={e}, {c} centers)", cell.k)),
                None => losses.push(format!("k={} no filtering run", cell.k)),
            }
        }
        if wins < 8 {
            passed = false;
        }
        parts.push(format!(
            "{name}: {wins}/{}{}",
            cells.len(),
            if losses.is_empty() {
                String::new()
            } else {
                format!(" [{}]", losses.join("; "))
            }
        ));
    }
    CriterionResult::new(9, "rounding dominates filtering", passed, parts.join(", "))
}

fn center_counts(bench: &BenchmarkRuns) -> CriterionResult {
    let mut parts = Vec::new();
    let mut passed = true;
    for (name, cells) in &bench.datasets {
        let cells = match cells {
            Ok(c) => c,
            Err(e) => {
                passed = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut total = 0;
        let mut tight = 0;
        let mut out_of_range = Vec::new();
        for cell in cells {
            for (r, l) in cell.rounding.iter().zip(BENCH_LAMBDAS) {
                total += 1;
                match r {
                    Ok((c, _)) => {
                        if *c == cell.k || *c == cell.k + 1 {
                            tight += 1;
                        }
                        if *c < cell.k || *c > cell.k + 2 {
                            out_of_range.push(format!("k={} lambda={l}: {c}", cell.k));
                        }
                    }
                    Err(e) => out_of_range.push(format!("k={} lambda={l}: {e}", cell.k)),
                }
            }
        }
        let share = tight as f64 / total.max(1) as f64;
        if !out_of_range.is_empty() || share < 0.9 {
            passed = false;
        }
        parts.push(format!(
            "{name}: {tight}/{total} cells at k or k+1{}",
            if out_of_range.is_empty() {
                String::new()
            } else {
                format!(" [{}]", out_of_range.join("; "))
            }
        ));
    }
    CriterionResult::new(10, "center counts within [k, k+2]", passed, parts.join(", "))
}

fn determinism(first: &str, second: &str) -> CriterionResult {
    let same = first == second;
    let detail = if same {
        format!("two runs, {} identical report bytes", first.len())
    } else {
        let at = first.bytes().zip(second.bytes()).position(|(a, b)| a != b).unwrap_or(first.len().min(second.len()));
        format!("reports differ from byte {at}")
    };
    CriterionResult::new(11, "deterministic reports", same, detail)
}
