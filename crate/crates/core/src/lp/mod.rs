//! Linear programs solved to optimal basic feasible (vertex) solutions.
//!
//! Every variable is nonnegative. Two backends share one contract: a dense
//! two-phase tableau simplex, and HiGHS' simplex for programs too large for a
//! dense tableau. Both return a basic solution, so the support of the result
//! is bounded by the number of linearly independent tight rows.

mod dense;
#[cfg(feature = "highs")]
mod highs;
mod lpfile;

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub use lpfile::write_lp_file;

/// Tolerance for constraint satisfaction of a returned solution.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Values above this count as nonzero.
pub const SUPPORT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_PIVOTS: usize = 1_000_000;

/// Dense tableaus up to this many cells are solved in-process.
const DENSE_CELL_LIMIT: usize = 150_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("stalled")]
    Stalled,
    #[error("invalid linear program: {0}")]
    Invalid(String),
    #[error("solution violates row {row} by {violation:e}")]
    Inaccurate { row: usize, violation: f64 },
    #[error("lp backend error: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize c.x subject to rows, x >= 0`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    names: Vec<String>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a nonnegative variable with objective coefficient `cost`.
    pub fn add_var(&mut self, name: impl Into<String>, cost: f64) -> usize {
        self.names.push(name.into());
        self.objective.push(cost);
        self.names.len() - 1
    }

    /// Adds a nonnegative variable that also enters existing rows.
    pub fn add_column(&mut self, name: impl Into<String>, cost: f64, entries: &[(usize, f64)]) -> usize {
        let var = self.add_var(name, cost);
        for &(r, a) in entries {
            self.constraints[r].coeffs.push((var, a));
        }
        var
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.objective[var] = cost;
    }

    /// Adds a row and returns its index. Repeated variables are summed.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Invalid("non-finite objective coefficient".into()));
        }
        for (r, c) in self.constraints.iter().enumerate() {
            if !c.rhs.is_finite() {
                return Err(LpError::Invalid(format!("row {r} has non-finite rhs")));
            }
            for &(j, a) in &c.coeffs {
                if j >= self.num_vars() {
                    return Err(LpError::Invalid(format!("row {r} references undeclared variable {j}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Invalid(format!("row {r} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row by `x`, with the row index.
    pub fn max_violation(&self, x: &[f64]) -> (usize, f64) {
        let mut worst = (0, 0.0);
        for (r, c) in self.constraints.iter().enumerate() {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            let scaled = v / (1.0 + c.rhs.abs());
            if scaled > worst.1 {
                worst = (r, scaled);
            }
        }
        for (j, &v) in x.iter().enumerate() {
            if -v > worst.1 {
                worst = (self.constraints.len() + j, -v);
            }
        }
        worst
    }
}

/// An optimal basic feasible solution.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSolution {
    pub values: Vec<f64>,
    pub objective_value: f64,
    /// One dual per row, signed so that `c_j - sum_r dual_r a_rj >= 0` at optimum.
    pub duals: Vec<f64>,
    /// Variables with value above [`SUPPORT_TOL`], ascending.
    pub support: Vec<usize>,
    pub pivots: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Dense tableau for small programs, HiGHS otherwise (when compiled in).
    Auto,
    Dense,
    Highs,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub backend: Backend,
    pub max_pivots: usize,
    /// When set, every program is written here in LP file format before solving.
    pub dump_dir: Option<PathBuf>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            backend: Backend::Auto,
            max_pivots: DEFAULT_MAX_PIVOTS,
            dump_dir: None,
        }
    }
}

static DUMP_SEQ: AtomicUsize = AtomicUsize::new(0);

/// Solves with default options.
pub fn solve_to_vertex(lp: &LinearProgram) -> Result<VertexSolution, LpError> {
    solve_with(lp, &SolveOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolveOptions) -> Result<VertexSolution, LpError> {
    lp.validate()?;
    if let Some(dir) = &opts.dump_dir {
        let seq = DUMP_SEQ.fetch_add(1, Ordering::Relaxed);
        let path = dir.join(format!("lp_{seq:05}.lp"));
        let written = std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::File::create(&path))
            .and_then(|f| write_lp_file(lp, std::io::BufWriter::new(f)));
        if let Err(e) = written {
            log::warn!("could not dump {}: {e}", path.display());
        }
    }
    let sol = match resolve_backend(lp, opts.backend) {
        Backend::Highs => solve_highs(lp, opts)?,
        _ => dense::solve(lp, opts.max_pivots)?,
    };
    let (row, violation) = lp.max_violation(&sol.values);
    if violation > FEASIBILITY_TOL {
        return Err(LpError::Inaccurate { row, violation });
    }
    Ok(sol)
}

fn resolve_backend(lp: &LinearProgram, requested: Backend) -> Backend {
    match requested {
        Backend::Auto => {
            let rows = lp.num_constraints();
            let cells = rows.saturating_mul(lp.num_vars() + 2 * rows + 1);
            if cfg!(feature = "highs") && cells > DENSE_CELL_LIMIT {
                Backend::Highs
            } else {
                Backend::Dense
            }
        }
        other => other,
    }
}

#[cfg(feature = "highs")]
fn solve_highs(lp: &LinearProgram, opts: &SolveOptions) -> Result<VertexSolution, LpError> {
    highs::solve(lp, opts.max_pivots)
}

#[cfg(not(feature = "highs"))]
fn solve_highs(lp: &LinearProgram, opts: &SolveOptions) -> Result<VertexSolution, LpError> {
    log::debug!("built without the highs feature; using the dense simplex");
    dense::solve(lp, opts.max_pivots)
}

/// A program re-solved as it grows by columns and rows. With HiGHS the model
/// stays loaded between solves and each solve starts from the last basis.
pub struct GrowingProgram {
    lp: LinearProgram,
    opts: SolveOptions,
    #[cfg(feature = "highs")]
    model: Option<highs::Model>,
    /// Columns added since the last solve, with entries in synced rows only.
    #[cfg(feature = "highs")]
    pending: Vec<(f64, Vec<(usize, f64)>)>,
    synced_rows: usize,
}

impl GrowingProgram {
    pub fn new(lp: LinearProgram, opts: SolveOptions) -> Self {
        Self {
            lp,
            opts,
            #[cfg(feature = "highs")]
            model: None,
            #[cfg(feature = "highs")]
            pending: Vec::new(),
            synced_rows: 0,
        }
    }

    pub fn lp(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn add_column(&mut self, name: impl Into<String>, cost: f64, entries: &[(usize, f64)]) -> usize {
        #[cfg(feature = "highs")]
        if self.model.is_some() {
            let synced: Vec<(usize, f64)> = entries.iter().copied().filter(|&(r, _)| r < self.synced_rows).collect();
            self.pending.push((cost, synced));
        }
        self.lp.add_column(name, cost, entries)
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.lp.add_constraint(coeffs, relation, rhs)
    }

    pub fn solve(&mut self) -> Result<VertexSolution, LpError> {
        self.lp.validate()?;
        let sol = match resolve_backend(&self.lp, self.opts.backend) {
            #[cfg(feature = "highs")]
            Backend::Highs => self.solve_highs()?,
            _ => solve_with(&self.lp, &self.opts)?,
        };
        self.synced_rows = self.lp.num_constraints();
        let (row, violation) = self.lp.max_violation(&sol.values);
        if violation > FEASIBILITY_TOL {
            return Err(LpError::Inaccurate { row, violation });
        }
        Ok(sol)
    }

    #[cfg(feature = "highs")]
    fn solve_highs(&mut self) -> Result<VertexSolution, LpError> {
        match &mut self.model {
            None => self.model = Some(highs::Model::new(&self.lp, self.opts.max_pivots)?),
            Some(model) => {
                model.add_cols(&self.pending)?;
                model.add_rows(&self.lp.constraints()[self.synced_rows..])?;
            }
        }
        self.pending.clear();
        self.model.as_mut().expect("model loaded above").run(&self.lp)
    }
}

pub(crate) fn support_of(values: &[f64]) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_TOL)
        .map(|(j, _)| j)
        .collect()
}
