//! Experiment sweeps: algorithms × parameters × k over a list of instances,
//! written as CSV, JSON and SVG charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abv::{filter_from_lp1, FilteringParams};
use crate::convert::{best_k_subset, sparse_pipeline, ConversionConfig, DEFAULT_SUBSET_CAP};
use crate::data::{self, DataError, DatasetSpec};
use crate::gen::{micro_suite, sparse_suite};
use crate::model::{brute_force_opt, evaluate, CenterSet, Instance, ModelError, OracleOptions};
use crate::rounding::{round_from_lp1, solve_lp1, Lp1Options, Lp1Solution, RoundingOptions, TraceRecord};
use crate::sparsify::SparsifyCaps;

pub const CSV_HEADER: &str = "dataset,algorithm,k,params,group_costs,objective,num_centers,runtime_ms";

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    IterativeRounding,
    Abv,
    BestKSubsetPipeline,
    SparsePipeline,
    BruteForce,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Self::IterativeRounding => "iterative_rounding",
            Self::Abv => "abv",
            Self::BestKSubsetPipeline => "best_k_subset_pipeline",
            Self::SparsePipeline => "sparse_pipeline",
            Self::BruteForce => "brute_force",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    /// A dataset spec file.
    Spec(PathBuf),
    /// A JSON instance file.
    Instance(PathBuf),
    /// Random micro instances.
    Micro { seed: u64, count: usize },
    /// Random single-group micro instances.
    Sparse { seed: u64, count: usize, p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseParams {
    pub t: usize,
    pub delta: f64,
    pub epsilon_prime: f64,
}

impl Default for SparseParams {
    fn default() -> Self {
        Self {
            t: 1,
            delta: 0.05,
            epsilon_prime: 0.9,
        }
    }
}

fn default_lambdas() -> Vec<f64> {
    vec![0.3]
}

fn default_epsilons() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5]
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    #[serde(default = "default_lambdas")]
    pub lambda: Vec<f64>,
    #[serde(default = "default_epsilons")]
    pub epsilon: Vec<f64>,
    #[serde(default)]
    pub sparse: SparseParams,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            lambda: default_lambdas(),
            epsilon: default_epsilons(),
            sparse: SparseParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub datasets: Vec<DatasetSource>,
    pub algorithms: Vec<Algorithm>,
    /// Empty means each instance's own `k`.
    #[serde(default)]
    pub k_list: Vec<usize>,
    #[serde(default)]
    pub params: Params,
    /// Overrides the exponent of every instance.
    #[serde(default)]
    pub p: Option<f64>,
    /// Record wall-clock times; off writes zeros so reruns are byte-identical.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default = "default_true")]
    pub plots: bool,
}

impl ExperimentConfig {
    /// Reads a config; relative dataset paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BenchError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for d in &mut cfg.datasets {
            if let DatasetSource::Spec(p) | DatasetSource::Instance(p) = d {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms".into()));
        }
        if self.k_list.contains(&0) {
            return Err(BenchError::Config("k must be positive".into()));
        }
        if let Some(l) = self.params.lambda.iter().find(|&&l| !(l > 0.0 && l <= 1.0)) {
            return Err(BenchError::Config(format!("lambda {l} outside (0, 1]")));
        }
        if let Some(e) = self.params.epsilon.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(BenchError::Config(format!("epsilon {e} outside (0, 1)")));
        }
        if self.params.sparse.t == 0 {
            return Err(BenchError::Config("sparsifier t must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Keep per-iteration rounding traces in the report.
    pub trace: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub k: usize,
    pub params: String,
    pub group_costs: Vec<f64>,
    pub objective: f64,
    pub num_centers: usize,
    pub runtime_ms: f64,
    pub centers: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub rows: Vec<Row>,
}

fn join_costs(costs: &[f64]) -> String {
    costs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

impl ExperimentReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
        for r in &self.rows {
            let (costs, objective) = if r.error.is_some() {
                (String::new(), String::new())
            } else {
                (join_costs(&r.group_costs), r.objective.to_string())
            };
            w.write_record([
                r.dataset.clone(),
                r.algorithm.name().to_string(),
                r.k.to_string(),
                r.params.clone(),
                costs,
                objective,
                r.num_centers.to_string(),
                format!("{:.3}", r.runtime_ms),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
    }

    /// Center counts per `(dataset, k)` and `(algorithm, params)` column.
    pub fn center_table(&self, dataset: &str) -> String {
        let mut cols: Vec<(Algorithm, String)> = Vec::new();
        let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.dataset == dataset && r.error.is_none()) {
            let key = (r.algorithm, r.params.clone());
            let c = match cols.iter().position(|c| *c == key) {
                Some(c) => c,
                None => {
                    cols.push(key);
                    cols.len() - 1
                }
            };
            cells.insert((r.k, c), r.num_centers);
        }
        let mut out = String::from("k");
        for (a, p) in &cols {
            let _ = write!(out, ",{} {}", a.name(), p);
        }
        out.push('\n');
        let mut ks: Vec<usize> = cells.keys().map(|&(k, _)| k).collect();
        ks.dedup();
        for k in ks {
            let _ = write!(out, "{k}");
            for c in 0..cols.len() {
                match cells.get(&(k, c)) {
                    Some(n) => {
                        let _ = write!(out, ",{n}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut d: Vec<String> = Vec::new();
        for r in &self.rows {
            if !d.contains(&r.dataset) {
                d.push(r.dataset.clone());
            }
        }
        d
    }

    /// Writes `report.csv`, `report.json`, per-dataset center tables and,
    /// when requested, SVG charts.
    pub fn write_outputs(&self, dir: &Path, plots: bool) -> Result<Vec<PathBuf>, BenchError> {
        std::fs::create_dir_all(dir).map_err(|source| BenchError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut files = vec![
            (dir.join("report.csv"), self.to_csv()),
            (
                dir.join("report.json"),
                serde_json::to_string_pretty(self).expect("report serializes"),
            ),
        ];
        for d in self.datasets() {
            files.push((dir.join(format!("centers_{d}.csv")), self.center_table(&d)));
            if plots {
                files.push((dir.join(format!("objective_{d}.svg")), objective_chart(self, &d)));
            }
        }
        for (path, body) in &files {
            std::fs::write(path, body).map_err(|source| BenchError::Io {
                path: path.clone(),
                source,
            })?;
        }
        Ok(files.into_iter().map(|(p, _)| p).collect())
    }
}

/// Loads every instance a source describes.
pub fn load_source(src: &DatasetSource) -> Result<Vec<Instance>, BenchError> {
    Ok(match src {
        DatasetSource::Spec(path) => vec![data::load(&DatasetSpec::load(path)?)?.instance],
        DatasetSource::Instance(path) => {
            let mut inst = Instance::load_json(path)?;
            if inst.name().is_none() {
                let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance");
                inst.set_name(stem.to_string());
            }
            vec![inst]
        }
        DatasetSource::Micro { seed, count } => micro_suite(*seed, *count),
        DatasetSource::Sparse { seed, count, p } => sparse_suite(*seed, *count, *p),
    })
}

struct Job {
    inst: Instance,
    k: usize,
}

/// Runs every row of the config. Row failures are recorded, not raised.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentReport, BenchError> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for src in &cfg.datasets {
        for inst in load_source(src)? {
            let inst = match cfg.p {
                Some(p) => inst.with_p(p)?,
                None => inst,
            };
            let ks = if cfg.k_list.is_empty() { vec![inst.k()] } else { cfg.k_list.clone() };
            for k in ks {
                jobs.push(Job { inst: inst.clone(), k });
            }
        }
    }
    let rows: Vec<Vec<Row>> = jobs.par_iter().map(|job| run_job(cfg, opts, job)).collect();
    Ok(ExperimentReport {
        name: cfg.name.clone(),
        rows: rows.into_iter().flatten().collect(),
    })
}

fn dataset_name(inst: &Instance) -> String {
    inst.name().unwrap_or("instance").to_string()
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn run_job(cfg: &ExperimentConfig, opts: &RunOptions, job: &Job) -> Vec<Row> {
    let name = dataset_name(&job.inst);
    let planned = planned_rows(cfg);
    let inst = match job.inst.with_k(job.k) {
        Ok(i) => i,
        Err(e) => {
            return planned
                .into_iter()
                .map(|(a, p)| failed_row(&name, a, job.k, p, e.to_string()))
                .collect()
        }
    };
    let needs_lp1 = cfg
        .algorithms
        .iter()
        .any(|a| matches!(a, Algorithm::IterativeRounding | Algorithm::Abv | Algorithm::BestKSubsetPipeline));
    let start = Instant::now();
    let lp1 = if needs_lp1 { Some(solve_lp1(&inst, &Lp1Options::default())) } else { None };
    let lp1_ms = millis(start);

    let mut rows = Vec::new();
    for (alg, params) in planned {
        let t0 = Instant::now();
        let outcome: Result<(CenterSet, Vec<TraceRecord>), String> = match (alg, &lp1) {
            (Algorithm::IterativeRounding | Algorithm::Abv | Algorithm::BestKSubsetPipeline, Some(Err(e))) => {
                Err(e.to_string())
            }
            (Algorithm::IterativeRounding, Some(Ok(lp))) => {
                round_row(&inst, lp, params.lambda(), opts.trace).map(|(c, t)| (c, t))
            }
            (Algorithm::BestKSubsetPipeline, Some(Ok(lp))) => round_row(&inst, lp, params.lambda(), false)
                .and_then(|(c, _)| best_k_subset(&inst, &c, DEFAULT_SUBSET_CAP).map_err(|e| e.to_string()))
                .map(|(c, _)| (c, Vec::new())),
            (Algorithm::Abv, Some(Ok(lp))) => filter_from_lp1(&inst, lp, FilteringParams { epsilon: params.epsilon() })
                .map(|o| (o.centers, Vec::new()))
                .map_err(|e| e.to_string()),
            (Algorithm::SparsePipeline, _) => {
                let sp = &cfg.params.sparse;
                ConversionConfig::new(sp.epsilon_prime, sp.delta, inst.p())
                    .and_then(|conv| {
                        sparse_pipeline(
                            &inst,
                            sp.t,
                            SparsifyCaps {
                                dedupe: true,
                                ..Default::default()
                            },
                            &RoundingOptions::with_lambda(params.lambda()),
                            &conv,
                        )
                    })
                    .map(|o| (o.centers, Vec::new()))
                    .map_err(|e| e.to_string())
            }
            (Algorithm::BruteForce, _) => brute_force_opt(&inst, &OracleOptions::default())
                .map(|(c, _)| (c, Vec::new()))
                .map_err(|e| e.to_string()),
            (_, None) => unreachable!("relaxation solved whenever a rounding algorithm is requested"),
        };
        let mut runtime = millis(t0);
        if alg.uses_lp1() {
            runtime += lp1_ms;
        }
        if !cfg.timing {
            runtime = 0.0;
        }
        rows.push(match outcome {
            Ok((centers, trace)) => {
                // Reported costs always come from a fresh evaluation.
                let cost = evaluate(&inst, &centers).expect("nonempty centers");
                Row {
                    dataset: name.clone(),
                    algorithm: alg,
                    k: job.k,
                    params: params.label(),
                    group_costs: cost.per_group,
                    objective: cost.objective,
                    num_centers: centers.len(),
                    runtime_ms: runtime,
                    centers: centers.ids().to_vec(),
                    error: None,
                    trace,
                }
            }
            Err(e) => failed_row(&name, alg, job.k, params, e),
        });
    }
    rows
}

impl Algorithm {
    fn uses_lp1(self) -> bool {
        matches!(self, Self::IterativeRounding | Self::Abv | Self::BestKSubsetPipeline)
    }
}

fn round_row(inst: &Instance, lp1: &Lp1Solution, lambda: f64, trace: bool) -> Result<(CenterSet, Vec<TraceRecord>), String> {
    let opts = RoundingOptions {
        trace,
        ..RoundingOptions::with_lambda(lambda)
    };
    let sol = round_from_lp1(inst, lp1, &opts).map_err(|e| e.to_string())?;
    let trace = if trace { sol.trace } else { Vec::new() };
    Ok((sol.centers, trace))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum RowParams {
    Lambda(f64),
    Epsilon(f64),
    Sparse { lambda: f64, t: usize, delta: f64, epsilon_prime: f64 },
    None,
}

impl RowParams {
    fn lambda(self) -> f64 {
        match self {
            Self::Lambda(l) | Self::Sparse { lambda: l, .. } => l,
            _ => 0.3,
        }
    }

    fn epsilon(self) -> f64 {
        match self {
            Self::Epsilon(e) => e,
            _ => 0.5,
        }
    }

    fn label(self) -> String {
        match self {
            Self::Lambda(l) => format!("lambda={l}"),
            Self::Epsilon(e) => format!("epsilon={e}"),
            Self::Sparse {
                lambda,
                t,
                delta,
                epsilon_prime,
            } => format!("lambda={lambda} t={t} delta={delta} epsilon_prime={epsilon_prime}"),
            Self::None => String::new(),
        }
    }
}

fn planned_rows(cfg: &ExperimentConfig) -> Vec<(Algorithm, RowParams)> {
    let mut out = Vec::new();
    let sp = &cfg.params.sparse;
    for &a in &cfg.algorithms {
        match a {
            Algorithm::IterativeRounding | Algorithm::BestKSubsetPipeline => {
                out.extend(cfg.params.lambda.iter().map(|&l| (a, RowParams::Lambda(l))))
            }
            Algorithm::Abv => out.extend(cfg.params.epsilon.iter().map(|&e| (a, RowParams::Epsilon(e)))),
            Algorithm::SparsePipeline => out.extend(cfg.params.lambda.iter().map(|&l| {
                (
                    a,
                    RowParams::Sparse {
                        lambda: l,
                        t: sp.t,
                        delta: sp.delta,
                        epsilon_prime: sp.epsilon_prime,
                    },
                )
            })),
            Algorithm::BruteForce => out.push((a, RowParams::None)),
        }
    }
    out
}

fn failed_row(dataset: &str, algorithm: Algorithm, k: usize, params: RowParams, error: String) -> Row {
    Row {
        dataset: dataset.to_string(),
        algorithm,
        k,
        params: params.label(),
        group_costs: Vec::new(),
        objective: f64::NAN,
        num_centers: 0,
        runtime_ms: 0.0,
        centers: Vec::new(),
        error: Some(error),
        trace: Vec::new(),
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Objective against `k` for every `(algorithm, params)` series. With more
/// than two groups the smallest group cost is drawn dashed under each line.
pub fn objective_chart(report: &ExperimentReport, dataset: &str) -> String {
    let mut series: Vec<(String, Vec<(f64, f64, f64)>)> = Vec::new();
    for r in report.rows.iter().filter(|r| r.dataset == dataset && r.error.is_none()) {
        let label = format!("{} {}", r.algorithm.name(), r.params).trim().to_string();
        let min = r.group_costs.iter().copied().fold(f64::INFINITY, f64::min);
        let point = (r.k as f64, r.objective, min);
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push(point),
            None => series.push((label, vec![point])),
        }
    }
    let bands = report
        .rows
        .iter()
        .find(|r| r.dataset == dataset && r.error.is_none())
        .is_some_and(|r| r.group_costs.len() > 2);
    let (w, h, left, right, top, bottom) = (720.0, 440.0, 70.0, 230.0, 30.0, 50.0);
    let pts = series.iter().flat_map(|(_, p)| p.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
    for &(x, y, lo) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
        if bands {
            y0 = y0.min(lo);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y1) = (0.0, 1.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let pw = w - left - right;
    let ph = h - top - bottom;
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{left}" y="18" font-size="14">{dataset}: objective vs k</text>"#);
    let _ = writeln!(
        svg,
        r#"<polyline points="{left},{top} {left},{b} {r},{b}" fill="none" stroke="black"/>"#,
        b = top + ph,
        r = left + pw
    );
    for i in 0..=4 {
        let y = y0 + (y1 - y0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{:.3}</text>"#,
            left - 6.0,
            sy(y) + 4.0,
            y
        );
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.0}</text>"#,
            sx(x),
            top + ph + 18.0,
            x
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">k</text>"#,
        left + pw / 2.0,
        h - 8.0
    );
    for (n, (label, pts)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let line = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
            pts.iter()
                .map(|p| format!("{:.1},{:.1}", sx(p.0), sy(f(p))))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            line(&|p| p.1)
        );
        if bands {
            let _ = writeln!(
                svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>"#,
                line(&|p| p.2)
            );
        }
        let ly = top + 14.0 * n as f64 + 10.0;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 18.0,
            lx + 22.0,
            ly + 4.0,
            label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn micro_config() -> ExperimentConfig {
        ExperimentConfig {
            name: "micro".into(),
            datasets: vec![DatasetSource::Micro { seed: 5, count: 3 }],
            algorithms: vec![
                Algorithm::IterativeRounding,
                Algorithm::Abv,
                Algorithm::BestKSubsetPipeline,
                Algorithm::BruteForce,
            ],
            k_list: Vec::new(),
            params: Params {
                lambda: vec![0.3, 0.8],
                epsilon: vec![0.2],
                sparse: SparseParams::default(),
            },
            p: None,
            timing: false,
            plots: true,
        }
    }

    #[test]
    fn rows_follow_config_order() {
        let report = run(&micro_config(), &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 3 * (2 + 1 + 2 + 1));
        assert_eq!(report.failures(), 0);
        let first: Vec<Algorithm> = report.rows[..6].iter().map(|r| r.algorithm).collect();
        assert_eq!(
            first,
            vec![
                Algorithm::IterativeRounding,
                Algorithm::IterativeRounding,
                Algorithm::Abv,
                Algorithm::BestKSubsetPipeline,
                Algorithm::BestKSubsetPipeline,
                Algorithm::BruteForce
            ]
        );
    }

    #[test]
    fn brute_force_rows_match_oracle() {
        let report = run(&micro_config(), &RunOptions::default()).unwrap();
        for (r, inst) in report
            .rows
            .iter()
            .filter(|r| r.algorithm == Algorithm::BruteForce)
            .zip(micro_suite(5, 3))
        {
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            assert_eq!(r.objective, opt.objective);
            assert_eq!(r.num_centers, inst.k());
        }
    }

    #[test]
    fn csv_shape_and_determinism() {
        let a = run(&micro_config(), &RunOptions::default()).unwrap().to_csv();
        let b = run(&micro_config(), &RunOptions::default()).unwrap().to_csv();
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[1], "iterative_rounding");
    }

    #[test]
    fn bad_k_fails_rows_without_aborting() {
        let mut cfg = micro_config();
        cfg.k_list = vec![1, 50];
        cfg.algorithms = vec![Algorithm::IterativeRounding];
        cfg.params.lambda = vec![0.3];
        let report = run(&cfg, &RunOptions::default()).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.failures(), 3);
        assert!(report.to_csv().lines().count() == 7);
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = micro_config();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let bad = r#"{"name":"x","datasets":[],"algorithms":["abv"],"params":{"epsilon":[1.5]}}"#;
        let parsed: ExperimentConfig = serde_json::from_str(bad).unwrap();
        assert!(parsed.validate().is_err());
    }

    #[test]
    fn outputs_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&micro_config(), &RunOptions::default()).unwrap();
        let files = report.write_outputs(dir.path(), true).unwrap();
        assert!(files.iter().any(|f| f.ends_with("report.csv")));
        let svg_path = files.iter().find(|f| f.extension().is_some_and(|e| e == "svg")).unwrap();
        let svg = std::fs::read_to_string(svg_path).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("polyline"));
    }
}
