//! The natural LP relaxation with assignment variables.
//!
//! `min z` subject to `z ≥ Σ_{i∈A_s,j} w_s(i) d(i,j)^p x_ij` for every group,
//! `x_ij ≤ y_j`, `Σ_j y_j = k`, `Σ_j x_ij = 1`, `x, y ≥ 0`.
//!
//! Small programs are solved whole. Larger ones start from each client's
//! nearest facilities and add assignment columns (with their `x_ij ≤ y_j`
//! rows) with negative reduced cost, until the Lagrangian bound from the
//! reduced costs closes the gap. Omitted columns sit at zero with their
//! linking rows slack, so the final point is a vertex of the complete program
//! whose objective is optimal to within the gap tolerance.

use crate::lp::{GrowingProgram, LinearProgram, LpError, Relation, SolveOptions};
use crate::model::Instance;

const PRICING_TOL: f64 = 1e-9;
const MAX_PRICING_ROUNDS: usize = 200;
/// Relative gap between the restricted optimum and its Lagrangian bound at
/// which pricing stops.
const GAP_TOL: f64 = 1e-9;
const COLUMNS_PER_CLIENT: usize = 25;
/// Fewest nearest facilities per client in the first restricted program.
const INITIAL_WIDTH: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Lp1Strategy {
    /// Whole program for small instances, pricing otherwise.
    #[default]
    Auto,
    Full,
    Pricing,
}

#[derive(Debug, Clone, Default)]
pub struct Lp1Options {
    pub strategy: Lp1Strategy,
    pub solve: SolveOptions,
}

/// An optimal solution of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct Lp1Solution {
    /// Per client, `(facility index, x_ij)` for `x_ij > 0`, ascending by facility.
    pub x: Vec<Vec<(usize, f64)>>,
    pub y: Vec<f64>,
    pub z: f64,
    /// Assignment columns in the final program.
    pub columns: usize,
    pub pricing_rounds: usize,
}

/// `(group, weight)` memberships of every client.
pub(crate) fn client_groups(inst: &Instance) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); inst.num_clients()];
    for (s, g) in inst.groups().iter().enumerate() {
        for &(i, w) in g.members() {
            out[i].push((s, w));
        }
    }
    out
}

pub fn solve_lp1(inst: &Instance, opts: &Lp1Options) -> Result<Lp1Solution, LpError> {
    let n = inst.num_clients();
    let f = inst.num_facilities();
    let strategy = match opts.strategy {
        Lp1Strategy::Auto if n * f <= 2500 => Lp1Strategy::Full,
        Lp1Strategy::Auto => Lp1Strategy::Pricing,
        s => s,
    };
    let memberships = client_groups(inst);
    let width = if strategy == Lp1Strategy::Full {
        f
    } else {
        f.min(INITIAL_WIDTH.max(f.div_ceil(inst.k())))
    };
    let mut master = Master::new(inst, &memberships, opts.solve.clone());
    // Columns to one fixed k-set keep every restricted program feasible.
    let anchors = if width < f { spread(inst) } else { Vec::new() };
    for i in 0..n {
        let mut cols = nearest(inst, i, width);
        cols.extend(&anchors);
        cols.sort_unstable();
        cols.dedup();
        for j in cols {
            master.add_column(i, j);
        }
    }
    let mut rounds = 0;
    loop {
        let sol = master.prog.solve()?;
        rounds += 1;
        if strategy != Lp1Strategy::Pricing {
            return Ok(master.extract(&sol.values, rounds));
        }
        // Each client's assignment sums to one, so the most negative reduced
        // cost per client bounds how far the full optimum can lie below.
        let m = inst.num_groups();
        let pi = &sol.duals[..m];
        let mu = &sol.duals[m + 1..m + 1 + n];
        let mut bound = sol.objective_value;
        let mut additions = Vec::new();
        for i in 0..n {
            let mut fresh: Vec<(f64, usize)> = Vec::new();
            let mut least: f64 = 0.0;
            for j in 0..f {
                if master.has(i, j) {
                    continue;
                }
                let c = inst.cost_cf(i, j);
                let rc: f64 = memberships[i].iter().map(|&(s, w)| pi[s] * w * c).sum::<f64>() - mu[i];
                least = least.min(rc);
                if rc < -PRICING_TOL * (1.0 + mu[i].abs()) {
                    fresh.push((rc, j));
                }
            }
            bound += least;
            fresh.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            additions.extend(fresh.into_iter().take(COLUMNS_PER_CLIENT).map(|(_, j)| (i, j)));
        }
        let gap = sol.objective_value - bound;
        log::debug!(
            "lp1 pricing round {rounds}: objective {} gap {gap:.3e} adding {}",
            sol.objective_value,
            additions.len()
        );
        if additions.is_empty() || gap <= GAP_TOL * (1.0 + sol.objective_value.abs()) || rounds >= MAX_PRICING_ROUNDS {
            if gap > GAP_TOL * (1.0 + sol.objective_value.abs()) {
                log::warn!("lp1 pricing stopped after {rounds} rounds with gap {gap:.3e}");
            }
            return Ok(master.extract(&sol.values, rounds));
        }
        for (i, j) in additions {
            master.add_column(i, j);
        }
    }
}

/// `k` facilities by farthest-first traversal from facility 0.
fn spread(inst: &Instance) -> Vec<usize> {
    let f = inst.num_facilities();
    let fp = |j: usize| inst.facility_point(j);
    let mut chosen = vec![0];
    let mut gap: Vec<f64> = (0..f).map(|j| inst.dist(fp(0), fp(j))).collect();
    while chosen.len() < inst.k() {
        let next = (0..f).max_by(|&a, &b| gap[a].total_cmp(&gap[b]).then(b.cmp(&a))).expect("facilities exist");
        if gap[next] == 0.0 {
            break;
        }
        chosen.push(next);
        for (j, g) in gap.iter_mut().enumerate() {
            *g = g.min(inst.dist(fp(next), fp(j)));
        }
    }
    chosen
}

fn nearest(inst: &Instance, i: usize, width: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..inst.num_facilities()).collect();
    order.sort_by(|&a, &b| inst.dist_cf(i, a).total_cmp(&inst.dist_cf(i, b)).then(a.cmp(&b)));
    order.truncate(width);
    order.sort_unstable();
    order
}

/// Rows: one per group, the budget row, one assignment row per client, then
/// one `x_ij ≤ y_j` row per column. Variables: `z`, `y`, then columns.
struct Master<'a> {
    inst: &'a Instance,
    memberships: &'a [Vec<(usize, f64)>],
    prog: GrowingProgram,
    /// Per client, `(facility, variable)` pairs in insertion order.
    columns: Vec<Vec<(usize, usize)>>,
    present: Vec<bool>,
}

impl<'a> Master<'a> {
    fn new(inst: &'a Instance, memberships: &'a [Vec<(usize, f64)>], opts: SolveOptions) -> Self {
        let n = inst.num_clients();
        let f = inst.num_facilities();
        let mut lp = LinearProgram::new();
        let z = lp.add_var("z", 1.0);
        for j in 0..f {
            lp.add_var(format!("y{j}"), 0.0);
        }
        for _ in 0..inst.num_groups() {
            lp.add_constraint(vec![(z, 1.0)], Relation::Ge, 0.0);
        }
        lp.add_constraint((0..f).map(|j| (1 + j, 1.0)).collect(), Relation::Eq, inst.k() as f64);
        for _ in 0..n {
            lp.add_constraint(Vec::new(), Relation::Eq, 1.0);
        }
        Self {
            inst,
            memberships,
            prog: GrowingProgram::new(lp, opts),
            columns: vec![Vec::new(); n],
            present: vec![false; n * f],
        }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.present[i * self.inst.num_facilities() + j]
    }

    fn add_column(&mut self, i: usize, j: usize) {
        let m = self.inst.num_groups();
        let c = self.inst.cost_cf(i, j);
        let mut entries: Vec<(usize, f64)> = self.memberships[i]
            .iter()
            .filter(|&&(_, w)| w > 0.0 && c != 0.0)
            .map(|&(s, w)| (s, -w * c))
            .collect();
        entries.push((m + 1 + i, 1.0));
        let var = self.prog.add_column(format!("x{i}_{j}"), 0.0, &entries);
        self.prog.add_constraint(vec![(var, 1.0), (1 + j, -1.0)], Relation::Le, 0.0);
        self.columns[i].push((j, var));
        self.present[i * self.inst.num_facilities() + j] = true;
    }

    fn extract(&self, values: &[f64], rounds: usize) -> Lp1Solution {
        let f = self.inst.num_facilities();
        let x = self
            .columns
            .iter()
            .map(|cols| {
                let mut xi: Vec<(usize, f64)> =
                    cols.iter().map(|&(j, var)| (j, values[var])).filter(|&(_, v)| v > 1e-12).collect();
                xi.sort_unstable_by_key(|&(j, _)| j);
                xi
            })
            .collect();
        Lp1Solution {
            x,
            y: values[1..=f].to_vec(),
            z: values[0],
            columns: self.columns.iter().map(Vec::len).sum(),
            pricing_rounds: rounds,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{instance_with_shape, micro_suite, MicroShape};
    use crate::lp::Backend;
    use crate::model::{brute_force_opt, evaluate_indices, OracleOptions};

    #[test]
    fn all_facilities_open_gives_integral_optimum() {
        for inst in micro_suite(3, 8) {
            let inst = inst.with_k(inst.num_facilities()).unwrap();
            let sol = solve_lp1(&inst, &Lp1Options::default()).unwrap();
            let all: Vec<usize> = (0..inst.num_facilities()).collect();
            let cost = evaluate_indices(&inst, &all).objective;
            assert!((sol.z - cost).abs() <= 1e-7 * (1.0 + cost), "{} vs {cost}", sol.z);
        }
    }

    #[test]
    fn relaxation_is_a_lower_bound() {
        for inst in micro_suite(11, 15) {
            let sol = solve_lp1(&inst, &Lp1Options::default()).unwrap();
            let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            assert!(sol.z <= opt.objective + 1e-7 * (1.0 + opt.objective));
        }
    }

    #[test]
    fn assignments_are_feasible() {
        for inst in micro_suite(5, 10) {
            let sol = solve_lp1(&inst, &Lp1Options::default()).unwrap();
            assert!((sol.y.iter().sum::<f64>() - inst.k() as f64).abs() < 1e-7);
            for xi in &sol.x {
                let total: f64 = xi.iter().map(|&(_, v)| v).sum();
                assert!((total - 1.0).abs() < 1e-7);
                for &(j, v) in xi {
                    assert!(v <= sol.y[j] + 1e-7);
                }
            }
        }
    }

    /// k-median relaxation written out independently: one group, the
    /// objective is the weighted assignment cost itself.
    fn kmedian_lp(inst: &Instance) -> f64 {
        let n = inst.num_clients();
        let f = inst.num_facilities();
        let w: Vec<f64> = {
            let mut w = vec![0.0; n];
            for &(i, wi) in inst.groups()[0].members() {
                w[i] += wi;
            }
            w
        };
        let mut lp = LinearProgram::new();
        let ys: Vec<_> = (0..f).map(|j| lp.add_var(format!("open{j}"), 0.0)).collect();
        let mut xs = vec![vec![0; f]; n];
        for i in 0..n {
            for j in 0..f {
                xs[i][j] = lp.add_var(format!("a{i}_{j}"), w[i] * inst.cost_cf(i, j));
            }
        }
        lp.add_constraint(ys.iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, inst.k() as f64);
        for i in 0..n {
            lp.add_constraint(xs[i].iter().map(|&v| (v, 1.0)).collect(), Relation::Eq, 1.0);
            for j in 0..f {
                lp.add_constraint(vec![(xs[i][j], 1.0), (ys[j], -1.0)], Relation::Le, 0.0);
            }
        }
        crate::lp::solve_to_vertex(&lp).unwrap().objective_value
    }

    #[test]
    fn single_group_matches_kmedian_relaxation() {
        for seed in 0..8 {
            let inst = instance_with_shape(
                seed,
                MicroShape {
                    clients: 10,
                    facilities: 6,
                    k: 2,
                    groups: 1,
                    p: if seed % 2 == 0 { 1.0 } else { 2.0 },
                    dim: 2,
                    side: 10.0,
                },
            );
            let z = solve_lp1(&inst, &Lp1Options::default()).unwrap().z;
            let reference = kmedian_lp(&inst);
            assert!((z - reference).abs() < 1e-7 * (1.0 + reference), "{z} vs {reference}");
        }
    }

    #[test]
    fn pricing_matches_full_program() {
        for (seed, n, f, backend) in [(1, 12, 30, Backend::Dense), (2, 40, 60, Backend::Highs), (3, 60, 40, Backend::Highs)] {
            let inst = instance_with_shape(
                seed,
                MicroShape {
                    clients: n,
                    facilities: f,
                    k: 3,
                    groups: 2,
                    p: 1.0 + (seed % 2) as f64,
                    dim: 2,
                    side: 10.0,
                },
            );
            let run = |strategy| {
                solve_lp1(
                    &inst,
                    &Lp1Options {
                        strategy,
                        solve: SolveOptions {
                            backend,
                            ..Default::default()
                        },
                    },
                )
                .unwrap()
            };
            let full = run(Lp1Strategy::Full);
            let priced = run(Lp1Strategy::Pricing);
            assert!(
                (full.z - priced.z).abs() < 1e-7 * (1.0 + full.z),
                "{} vs {}",
                full.z,
                priced.z
            );
            assert!(priced.columns < full.columns);
        }
    }
}
