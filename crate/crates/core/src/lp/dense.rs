//! Two-phase primal simplex on a dense row-major tableau.
//!
//! Pricing is Dantzig's rule; after a long run of degenerate pivots it falls
//! back to Bland's rule until the objective moves again. Ratio-test ties go to
//! the smallest basic variable index, which is what Bland's anti-cycling
//! argument needs and keeps results reproducible.

use super::{support_of, LinearProgram, LpError, Relation, VertexSolution};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-9;
const ZERO_TOL: f64 = 1e-12;
const PHASE1_TOL: f64 = 1e-7;

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Original,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    width: usize,
    /// `rows` constraint rows followed by the objective row; the last entry of
    /// each row is the right-hand side (objective row: minus the objective).
    t: Vec<f64>,
    basis: Vec<usize>,
    kind: Vec<ColKind>,
    pivots: usize,
    max_pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width + c]
    }

    #[inline]
    fn rhs(&self, r: usize) -> f64 {
        self.t[r * self.width + self.cols]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(pr, pc);
        {
            let row = &mut self.t[pr * w..(pr + 1) * w];
            for v in row.iter_mut() {
                *v *= inv;
                if v.abs() < ZERO_TOL {
                    *v = 0.0;
                }
            }
            row[pc] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        let eliminate = |row: &mut [f64]| {
            let f = row[pc];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                    if v.abs() < ZERO_TOL {
                        *v = 0.0;
                    }
                }
                row[pc] = 0.0;
            }
        };
        for row in before.chunks_mut(w) {
            eliminate(row);
        }
        for row in after.chunks_mut(w) {
            eliminate(row);
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    /// Runs simplex iterations on the current objective row.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> Result<(), LpError> {
        let obj = self.rows;
        let mut degenerate_run = 0usize;
        let bland_after = 10 * self.cols;
        loop {
            if self.pivots >= self.max_pivots {
                return Err(LpError::Stalled);
            }
            let bland = degenerate_run > bland_after;
            let mut entering = None;
            let mut best = -COST_TOL;
            for c in 0..self.cols {
                if !allowed(c) {
                    continue;
                }
                let d = self.at(obj, c);
                if d < -COST_TOL {
                    if bland {
                        entering = Some(c);
                        break;
                    }
                    if d < best {
                        best = d;
                        entering = Some(c);
                    }
                }
            }
            let Some(pc) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, pc);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            let tie = (ratio - bratio).abs() <= ZERO_TOL * (1.0 + bratio);
                            if (!tie && ratio < bratio) || (tie && self.basis[r] < self.basis[br]) {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            let Some((pr, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= ZERO_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(pr, pc);
        }
    }

    /// Rebuilds the objective row for column costs `cost`.
    fn set_objective(&mut self, cost: &[f64]) {
        let w = self.width;
        let obj = self.rows;
        for c in 0..w {
            self.t[obj * w + c] = if c < self.cols { cost[c] } else { 0.0 };
        }
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                for c in 0..w {
                    let v = self.t[r * w + c];
                    self.t[obj * w + c] -= cb * v;
                }
            }
        }
    }
}

pub(super) fn solve(lp: &LinearProgram, max_pivots: usize) -> Result<VertexSolution, LpError> {
    let n = lp.num_vars();
    let m = lp.num_constraints();

    // Rows are normalized to a nonnegative right-hand side.
    let mut flip = vec![1.0; m];
    let mut rel = Vec::with_capacity(m);
    for (r, c) in lp.constraints().iter().enumerate() {
        let mut relation = c.relation;
        if c.rhs < 0.0 {
            flip[r] = -1.0;
            relation = match relation {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rel.push(relation);
    }

    let mut kind = vec![ColKind::Original; n];
    // Column whose initial tableau column is the unit vector of each row.
    let mut unit_col = vec![0usize; m];
    let mut surplus_col = vec![None; m];
    for r in 0..m {
        match rel[r] {
            Relation::Le => {
                unit_col[r] = kind.len();
                kind.push(ColKind::Slack);
            }
            Relation::Ge => {
                surplus_col[r] = Some(kind.len());
                kind.push(ColKind::Slack);
                unit_col[r] = kind.len();
                kind.push(ColKind::Artificial);
            }
            Relation::Eq => {
                unit_col[r] = kind.len();
                kind.push(ColKind::Artificial);
            }
        }
    }
    let cols = kind.len();
    let width = cols + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for (r, c) in lp.constraints().iter().enumerate() {
        let row = &mut t[r * width..(r + 1) * width];
        for &(j, a) in &c.coeffs {
            row[j] += flip[r] * a;
        }
        row[unit_col[r]] = 1.0;
        if let Some(s) = surplus_col[r] {
            row[s] = -1.0;
        }
        row[cols] = flip[r] * c.rhs;
    }
    let mut tab = Tableau {
        rows: m,
        cols,
        width,
        t,
        basis: unit_col.clone(),
        kind,
        pivots: 0,
        max_pivots,
    };

    let has_artificial = tab.kind.iter().any(|&k| k == ColKind::Artificial);
    if has_artificial {
        let phase1: Vec<f64> = tab
            .kind
            .iter()
            .map(|&k| if k == ColKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tab.set_objective(&phase1);
        tab.optimize(|_| true)?;
        let infeasibility = -tab.rhs(m);
        let scale = 1.0 + lp.constraints().iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > PHASE1_TOL * scale {
            return Err(LpError::Infeasible);
        }
        // Drive zero-valued artificials out of the basis where possible.
        for r in 0..m {
            if tab.kind[tab.basis[r]] != ColKind::Artificial {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for c in 0..cols {
                if tab.kind[c] == ColKind::Artificial {
                    continue;
                }
                let a = tab.at(r, c).abs();
                if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                    best = Some((c, a));
                }
            }
            if let Some((c, _)) = best {
                tab.pivot(r, c);
            }
        }
    }

    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(lp.objective());
    tab.set_objective(&cost);
    let kinds = tab.kind.clone();
    tab.optimize(|c| kinds[c] != ColKind::Artificial)?;

    let mut values = vec![0.0; n];
    for r in 0..m {
        let b = tab.basis[r];
        if b < n {
            values[b] = tab.rhs(r).max(0.0);
        }
    }
    let objective_value = values.iter().zip(lp.objective()).map(|(x, c)| x * c).sum();
    let duals = (0..m).map(|r| -tab.at(m, unit_col[r]) * flip[r]).collect();
    Ok(VertexSolution {
        support: support_of(&values),
        values,
        objective_value,
        duals,
        pivots: tab.pivots,
    })
}
