//! HiGHS simplex backend via the raw C API.

use std::ffi::{c_void, CString};

use highs_sys::*;

use super::{support_of, LinearProgram, LpError, Relation, VertexSolution};

const OBJ_SENSE_MINIMIZE: HighsInt = 1;
const SIMPLEX_STRATEGY_PRIMAL: HighsInt = 4;

struct Handle(*mut c_void);

impl Drop for Handle {
    fn drop(&mut self) {
        // SAFETY: the pointer came from Highs_create and is destroyed once.
        unsafe { Highs_destroy(self.0) }
    }
}

impl Handle {
    fn set_bool(&self, name: &str, v: bool) -> Result<(), LpError> {
        let key = CString::new(name).expect("option names have no NUL");
        // SAFETY: valid handle and NUL-terminated key.
        check(unsafe { Highs_setBoolOptionValue(self.0, key.as_ptr(), v as HighsInt) }, name)
    }

    fn set_int(&self, name: &str, v: HighsInt) -> Result<(), LpError> {
        let key = CString::new(name).expect("option names have no NUL");
        // SAFETY: valid handle and NUL-terminated key.
        check(unsafe { Highs_setIntOptionValue(self.0, key.as_ptr(), v) }, name)
    }

    fn set_string(&self, name: &str, v: &str) -> Result<(), LpError> {
        let key = CString::new(name).expect("option names have no NUL");
        let val = CString::new(v).expect("option values have no NUL");
        // SAFETY: valid handle and NUL-terminated strings.
        check(unsafe { Highs_setStringOptionValue(self.0, key.as_ptr(), val.as_ptr()) }, name)
    }
}

fn check(status: HighsInt, what: &str) -> Result<(), LpError> {
    if status == STATUS_ERROR {
        Err(LpError::Backend(format!("{what} failed")))
    } else {
        Ok(())
    }
}

pub(super) fn solve(lp: &LinearProgram, max_pivots: usize) -> Result<VertexSolution, LpError> {
    Model::new(lp, max_pivots)?.run(lp)
}

fn bounds(relation: Relation, rhs: f64) -> (f64, f64) {
    match relation {
        Relation::Le => (f64::NEG_INFINITY, rhs),
        Relation::Ge => (rhs, f64::INFINITY),
        Relation::Eq => (rhs, rhs),
    }
}

/// A loaded HiGHS model. Columns and rows added later keep the current basis,
/// so the next run starts warm.
pub(super) struct Model {
    h: Handle,
    cols: usize,
    rows: usize,
}

impl Model {
    pub(super) fn new(lp: &LinearProgram, max_pivots: usize) -> Result<Self, LpError> {
        let n = lp.num_vars();
        let m = lp.num_constraints();

        // Column-wise (CSC) matrix.
        let mut counts = vec![0usize; n + 1];
        for c in lp.constraints() {
            for &(j, _) in &c.coeffs {
                counts[j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let nnz = counts[n];
        let mut fill = counts.clone();
        let mut index = vec![0 as HighsInt; nnz];
        let mut value = vec![0.0; nnz];
        let mut row_lower = Vec::with_capacity(m);
        let mut row_upper = Vec::with_capacity(m);
        for (r, c) in lp.constraints().iter().enumerate() {
            for &(j, a) in &c.coeffs {
                index[fill[j]] = r as HighsInt;
                value[fill[j]] = a;
                fill[j] += 1;
            }
            let (lo, hi) = bounds(c.relation, c.rhs);
            row_lower.push(lo);
            row_upper.push(hi);
        }
        let start: Vec<HighsInt> = counts[..n.max(1)].iter().map(|&s| s as HighsInt).collect();
        let col_lower = vec![0.0; n];
        let col_upper = vec![f64::INFINITY; n];

        // SAFETY: Highs_create returns an owned handle or null.
        let raw = unsafe { Highs_create() };
        if raw.is_null() {
            return Err(LpError::Backend("Highs_create returned null".into()));
        }
        let h = Handle(raw);
        h.set_bool("output_flag", false)?;
        h.set_string("solver", "simplex")?;
        h.set_int("threads", 1)?;
        h.set_int(
            "simplex_iteration_limit",
            max_pivots.min(HighsInt::MAX as usize) as HighsInt,
        )?;

        // SAFETY: all arrays have the lengths HiGHS expects for num_col = n,
        // num_row = m and num_nz = nnz.
        let status = unsafe {
            Highs_passLp(
                h.0,
                n as HighsInt,
                m as HighsInt,
                nnz as HighsInt,
                MATRIX_FORMAT_COLUMN_WISE,
                OBJ_SENSE_MINIMIZE,
                0.0,
                lp.objective().as_ptr(),
                col_lower.as_ptr(),
                col_upper.as_ptr(),
                row_lower.as_ptr(),
                row_upper.as_ptr(),
                start.as_ptr(),
                index.as_ptr(),
                value.as_ptr(),
            )
        };
        check(status, "Highs_passLp")?;
        Ok(Self { h, cols: n, rows: m })
    }

    /// Appends columns given as `(cost, entries in existing rows)`.
    pub(super) fn add_cols(&mut self, cols: &[(f64, Vec<(usize, f64)>)]) -> Result<(), LpError> {
        if cols.is_empty() {
            return Ok(());
        }
        // The old basis stays primal feasible; primal simplex resumes from it.
        self.h.set_int("simplex_strategy", SIMPLEX_STRATEGY_PRIMAL)?;
        let costs: Vec<f64> = cols.iter().map(|c| c.0).collect();
        let lower = vec![0.0; cols.len()];
        let upper = vec![f64::INFINITY; cols.len()];
        let mut starts = Vec::with_capacity(cols.len());
        let mut index = Vec::new();
        let mut value = Vec::new();
        for (_, entries) in cols {
            starts.push(index.len() as HighsInt);
            for &(r, a) in entries {
                debug_assert!(r < self.rows);
                index.push(r as HighsInt);
                value.push(a);
            }
        }
        // SAFETY: arrays sized num_new_col and num_new_nz; row indices exist.
        let status = unsafe {
            Highs_addCols(
                self.h.0,
                cols.len() as HighsInt,
                costs.as_ptr(),
                lower.as_ptr(),
                upper.as_ptr(),
                index.len() as HighsInt,
                starts.as_ptr(),
                index.as_ptr(),
                value.as_ptr(),
            )
        };
        check(status, "Highs_addCols")?;
        self.cols += cols.len();
        Ok(())
    }

    /// Appends rows over existing columns.
    pub(super) fn add_rows(&mut self, rows: &[super::Constraint]) -> Result<(), LpError> {
        if rows.is_empty() {
            return Ok(());
        }
        let mut lower = Vec::with_capacity(rows.len());
        let mut upper = Vec::with_capacity(rows.len());
        let mut starts = Vec::with_capacity(rows.len());
        let mut index = Vec::new();
        let mut value = Vec::new();
        for c in rows {
            let (lo, hi) = bounds(c.relation, c.rhs);
            lower.push(lo);
            upper.push(hi);
            starts.push(index.len() as HighsInt);
            for &(j, a) in &c.coeffs {
                debug_assert!(j < self.cols);
                index.push(j as HighsInt);
                value.push(a);
            }
        }
        // SAFETY: arrays sized num_new_row and num_new_nz; column indices exist.
        let status = unsafe {
            Highs_addRows(
                self.h.0,
                rows.len() as HighsInt,
                lower.as_ptr(),
                upper.as_ptr(),
                index.len() as HighsInt,
                starts.as_ptr(),
                index.as_ptr(),
                value.as_ptr(),
            )
        };
        check(status, "Highs_addRows")?;
        self.rows += rows.len();
        Ok(())
    }

    /// Solves from the current basis. `lp` must match the loaded model.
    pub(super) fn run(&mut self, lp: &LinearProgram) -> Result<VertexSolution, LpError> {
        let h = &self.h;
        let n = self.cols;
        let m = self.rows;
        debug_assert_eq!((n, m), (lp.num_vars(), lp.num_constraints()));
        // SAFETY: valid handle with a model loaded.
        let status = unsafe { Highs_run(h.0) };
        check(status, "Highs_run")?;
        // SAFETY: valid handle.
        let model_status = unsafe { Highs_getModelStatus(h.0) };
        match model_status {
            MODEL_STATUS_OPTIMAL => {}
            MODEL_STATUS_INFEASIBLE => return Err(LpError::Infeasible),
            MODEL_STATUS_UNBOUNDED => return Err(LpError::Unbounded),
            MODEL_STATUS_UNBOUNDED_OR_INFEASIBLE => return Err(LpError::Infeasible),
            MODEL_STATUS_REACHED_ITERATION_LIMIT => return Err(LpError::Stalled),
            other => return Err(LpError::Backend(format!("model status {other}"))),
        }

        let mut col_value = vec![0.0; n];
        let mut col_dual = vec![0.0; n];
        let mut row_value = vec![0.0; m];
        let mut row_dual = vec![0.0; m];
        // SAFETY: output buffers sized num_col / num_row.
        let status = unsafe {
            Highs_getSolution(
                h.0,
                col_value.as_mut_ptr(),
                col_dual.as_mut_ptr(),
                row_value.as_mut_ptr(),
                row_dual.as_mut_ptr(),
            )
        };
        check(status, "Highs_getSolution")?;
        for v in col_value.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let objective_value = col_value.iter().zip(lp.objective()).map(|(x, c)| x * c).sum();
        Ok(VertexSolution {
            support: support_of(&col_value),
            values: col_value,
            objective_value,
            duals: row_dual,
            pivots: 0,
        })
    }
}
