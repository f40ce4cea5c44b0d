//! Pick one item from each of `k` parts to minimize the largest of `m` sums,
//! to within `1+ε`, by guessing the heavy parts and rounding an LP vertex.

use serde::Serialize;
use thiserror::Error;

use crate::combinatorics::{Combinations, Product};
use crate::lp::{solve_to_vertex, LinearProgram, LpError, Relation};

const FRACTIONAL_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MinMaxError {
    #[error("subproblem too large: {work} enumerated cases exceed budget {budget}")]
    TooLarge { work: u128, budget: u128 },
    #[error("invalid subproblem: {0}")]
    Invalid(String),
    #[error("{fractional} fractional parts exceed m = {m}")]
    FractionalParts { fractional: usize, m: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `costs[g][j][v]` is the cost to group `g` of choosing item `v` of part `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxAssignmentProblem {
    pub costs: Vec<Vec<Vec<f64>>>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxSolution {
    /// Chosen item index within each part.
    pub selection: Vec<usize>,
    pub value: f64,
    pub lp_solves: usize,
}

impl MinMaxAssignmentProblem {
    pub fn num_groups(&self) -> usize {
        self.costs.len()
    }

    pub fn num_parts(&self) -> usize {
        self.costs.first().map_or(0, Vec::len)
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        self.costs.first().map_or(Vec::new(), |g| g.iter().map(Vec::len).collect())
    }

    /// `max_g Σ_j costs[g][j][selection[j]]`.
    pub fn value(&self, selection: &[usize]) -> f64 {
        self.costs
            .iter()
            .map(|g| g.iter().zip(selection).map(|(part, &v)| part[v]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), MinMaxError> {
        if self.costs.is_empty() {
            return Err(MinMaxError::Invalid("no groups".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(MinMaxError::Invalid("epsilon must be positive".into()));
        }
        let sizes = self.part_sizes();
        if sizes.iter().any(|&s| s == 0) {
            return Err(MinMaxError::Invalid("empty part".into()));
        }
        for g in &self.costs {
            if g.len() != sizes.len() || g.iter().zip(&sizes).any(|(p, &s)| p.len() != s) {
                return Err(MinMaxError::Invalid("ragged cost table".into()));
            }
            if g.iter().flatten().any(|&a| !(a >= 0.0 && a.is_finite())) {
                return Err(MinMaxError::Invalid("costs must be finite and nonnegative".into()));
            }
        }
        Ok(())
    }
}

/// Default cap on enumerated (guess, completion) cases.
pub const DEFAULT_BUDGET: u128 = 2_000_000;

pub fn minmax_assign(prob: &MinMaxAssignmentProblem) -> Result<MinMaxSolution, MinMaxError> {
    minmax_assign_with_budget(prob, DEFAULT_BUDGET)
}

pub fn minmax_assign_with_budget(prob: &MinMaxAssignmentProblem, budget: u128) -> Result<MinMaxSolution, MinMaxError> {
    prob.validate()?;
    let m = prob.num_groups();
    let k = prob.num_parts();
    let sizes = prob.part_sizes();
    let heavy = (m as f64 / prob.epsilon).floor() as usize;
    let max_guess = (m * heavy).min(k);

    // Work estimate: every guessed set times the choices on it, plus up to
    // max|S|^m completions per LP.
    let widest = sizes.iter().copied().max().unwrap_or(1) as u128;
    let completions = widest.saturating_pow(m.min(k) as u32);
    let mut work: u128 = 0;
    for size in 0..=max_guess {
        for t in Combinations::new(k, size) {
            let choices = t.iter().fold(1u128, |acc, &j| acc.saturating_mul(sizes[j] as u128));
            let per = if size == k { 1 } else { completions };
            work = work.saturating_add(choices.saturating_mul(per));
        }
        if work > budget {
            return Err(MinMaxError::TooLarge { work, budget });
        }
    }

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut lp_solves = 0;
    let consider = |sel: Vec<usize>, best: &mut Option<(Vec<usize>, f64)>| {
        let v = prob.value(&sel);
        if best.as_ref().is_none_or(|(bs, bv)| v < *bv || (v == *bv && sel < *bs)) {
            *best = Some((sel, v));
        }
    };
    for size in 0..=max_guess {
        for t in Combinations::new(k, size) {
            let fixed_sizes: Vec<usize> = t.iter().map(|&j| sizes[j]).collect();
            for choice in Product::new(fixed_sizes) {
                let mut sel = vec![usize::MAX; k];
                for (&j, &v) in t.iter().zip(&choice) {
                    sel[j] = v;
                }
                if size == k {
                    consider(sel, &mut best);
                    continue;
                }
                let (integral, fractional) = match solve_rest(prob, &sel) {
                    Ok(r) => r,
                    Err(LpError::Infeasible) => continue,
                    Err(e) => return Err(e.into()),
                };
                lp_solves += 1;
                if fractional.len() > m {
                    return Err(MinMaxError::FractionalParts {
                        fractional: fractional.len(),
                        m,
                    });
                }
                for (j, v) in integral {
                    sel[j] = v;
                }
                let r_sizes: Vec<usize> = fractional.iter().map(|&j| sizes[j]).collect();
                for completion in Product::new(r_sizes) {
                    let mut full = sel.clone();
                    for (&j, &v) in fractional.iter().zip(&completion) {
                        full[j] = v;
                    }
                    consider(full, &mut best);
                }
            }
        }
    }
    let (selection, value) = best.expect("the all-parts guess always yields a candidate when budget allows");
    Ok(MinMaxSolution {
        selection,
        value,
        lp_solves,
    })
}

/// LP over the parts not fixed in `sel`; returns the integral parts with
/// their items and the parts left fractional at the vertex.
fn solve_rest(prob: &MinMaxAssignmentProblem, sel: &[usize]) -> Result<(Vec<(usize, usize)>, Vec<usize>), LpError> {
    let sizes = prob.part_sizes();
    let mut lp = LinearProgram::new();
    let theta = lp.add_var("theta", 1.0);
    let mut var_of = vec![Vec::new(); sizes.len()];
    for (j, &s) in sizes.iter().enumerate() {
        if sel[j] == usize::MAX {
            var_of[j] = (0..s).map(|v| lp.add_var(format!("x{j}_{v}"), 0.0)).collect();
        }
    }
    for g in &prob.costs {
        let fixed: f64 = (0..sizes.len()).filter(|&j| sel[j] != usize::MAX).map(|j| g[j][sel[j]]).sum();
        let mut row = vec![(theta, 1.0)];
        for (j, vars) in var_of.iter().enumerate() {
            for (v, &x) in vars.iter().enumerate() {
                if g[j][v] != 0.0 {
                    row.push((x, -g[j][v]));
                }
            }
        }
        lp.add_constraint(row, Relation::Ge, fixed);
    }
    for vars in var_of.iter().filter(|v| !v.is_empty()) {
        lp.add_constraint(vars.iter().map(|&x| (x, 1.0)).collect(), Relation::Eq, 1.0);
    }
    let sol = solve_to_vertex(&lp)?;
    let mut integral = Vec::new();
    let mut fractional = Vec::new();
    for (j, vars) in var_of.iter().enumerate() {
        if vars.is_empty() {
            continue;
        }
        match vars.iter().position(|&x| sol.values[x] >= 1.0 - FRACTIONAL_TOL) {
            Some(v) => integral.push((j, v)),
            None => fractional.push(j),
        }
    }
    Ok((integral, fractional))
}

/// Exhaustive optimum, for checks.
pub fn brute_force_minmax(prob: &MinMaxAssignmentProblem) -> (Vec<usize>, f64) {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for sel in Product::new(prob.part_sizes()) {
        let v = prob.value(&sel);
        if best.as_ref().is_none_or(|(_, bv)| v < *bv) {
            best = Some((sel, v));
        }
    }
    best.expect("parts are nonempty")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, k: usize, m: usize, max_part: usize, eps: f64) -> MinMaxAssignmentProblem {
        let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=max_part)).collect();
        let costs = (0..m)
            .map(|_| sizes.iter().map(|&s| (0..s).map(|_| rng.random::<f64>() * 10.0).collect()).collect())
            .collect();
        MinMaxAssignmentProblem { costs, epsilon: eps }
    }

    #[test]
    fn single_group_is_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let prob = random_problem(&mut rng, 4, 1, 4, 0.5);
            let sol = minmax_assign(&prob).unwrap();
            let direct: f64 = prob.costs[0]
                .iter()
                .map(|part| part.iter().copied().fold(f64::INFINITY, f64::min))
                .sum();
            assert!((sol.value - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_costs_give_k_times_c() {
        let prob = MinMaxAssignmentProblem {
            costs: vec![vec![vec![2.5; 3]; 4]; 2],
            epsilon: 0.5,
        };
        let sol = minmax_assign(&prob).unwrap();
        assert!((sol.value - 10.0).abs() < 1e-12);
    }

    #[test]
    fn within_one_plus_epsilon_of_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let prob = random_problem(&mut rng, 3, 2, 3, 0.5);
            let sol = minmax_assign(&prob).unwrap();
            let (_, opt) = brute_force_minmax(&prob);
            assert!(sol.value <= 1.5 * opt + 1e-12);
        }
    }

    #[test]
    fn lp_rounding_path_with_large_epsilon() {
        // ε large enough that nothing is guessed: the vertex rounding alone
        // must still land within the factor.
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..40 {
            let prob = random_problem(&mut rng, 6, 2, 4, 4.0);
            let sol = minmax_assign(&prob).unwrap();
            let (_, opt) = brute_force_minmax(&prob);
            assert!(sol.value >= opt - 1e-12);
            assert!(sol.value <= 5.0 * opt + 1e-12);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let prob = random_problem(&mut rng, 8, 3, 6, 0.1);
        assert!(matches!(
            minmax_assign_with_budget(&prob, 1000),
            Err(MinMaxError::TooLarge { .. })
        ));
        assert!(minmax_assign_with_budget(&prob, 1000).unwrap_err().to_string().starts_with("subproblem too large"));
    }
}
