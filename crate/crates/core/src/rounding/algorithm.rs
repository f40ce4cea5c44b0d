use super::lp1::{client_groups, Lp1Solution};
use super::metric::RoundedDistances;
use super::split::{split_facilities, Split};
use super::{RoundingError, RoundingOptions, TraceRecord};
use crate::lp::{solve_with, LinearProgram, Relation, VertexSolution, SUPPORT_TOL};
use crate::model::Instance;

const TIGHT_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub(super) struct ClientState {
    pub f: Vec<usize>,
    pub b: Vec<usize>,
    /// Exponent of `D_i`; `None` means `D_i = 0`.
    pub d: Option<i32>,
    pub star: bool,
}

/// Greedy representatives: clients in increasing `(D_i, id)` order join while
/// their copy sets stay pairwise disjoint. Returns the membership flags.
pub fn init_representatives(f_sets: &[Vec<usize>], d: &[Option<i32>], num_copies: usize) -> Vec<bool> {
    let mut order: Vec<usize> = (0..f_sets.len()).collect();
    order.sort_by(|&a, &b| d[a].cmp(&d[b]).then(a.cmp(&b)));
    let mut taken = vec![false; num_copies];
    let mut star = vec![false; f_sets.len()];
    for i in order {
        if f_sets[i].iter().all(|&c| !taken[c]) {
            for &c in &f_sets[i] {
                taken[c] = true;
            }
            star[i] = true;
        }
    }
    star
}

pub(super) struct Rounding<'a> {
    inst: &'a Instance,
    opts: &'a RoundingOptions,
    rd: RoundedDistances,
    split: Split,
    memberships: Vec<Vec<(usize, f64)>>,
    pub clients: Vec<ClientState>,
    /// Representative owning each copy.
    owner: Vec<Option<usize>>,
    completion: Option<Vec<f64>>,
}

pub(super) struct Outcome {
    pub y: Vec<f64>,
    pub split: Split,
    pub lp_objective: f64,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub monotonicity_violations: usize,
    pub coverage_violations: usize,
}

impl<'a> Rounding<'a> {
    pub fn new(inst: &'a Instance, lp1: &Lp1Solution, opts: &'a RoundingOptions) -> Self {
        let rd = RoundedDistances::new(inst, opts.lambda);
        let split = split_facilities(lp1, inst.num_facilities());
        let d: Vec<Option<i32>> = split
            .client_copies
            .iter()
            .enumerate()
            .map(|(i, fi)| fi.iter().map(|&c| rd.exponent(i, split.copies[c].original)).max().flatten())
            .collect();
        let star = init_representatives(&split.client_copies, &d, split.copies.len());
        let mut owner = vec![None; split.copies.len()];
        let mut clients = Vec::with_capacity(inst.num_clients());
        for (i, fi) in split.client_copies.iter().enumerate() {
            if star[i] {
                for &c in fi {
                    owner[c] = Some(i);
                }
            }
            clients.push(ClientState {
                f: fi.clone(),
                b: Vec::new(),
                d: d[i],
                star: star[i],
            });
        }
        let check = opts
            .check_coverage
            .unwrap_or(inst.num_clients() + inst.num_facilities() <= 80);
        let completion = check.then(|| rd.completion(inst.num_clients()));
        let mut r = Self {
            inst,
            opts,
            rd,
            split,
            memberships: client_groups(inst),
            clients,
            owner,
            completion,
        };
        for i in 0..r.clients.len() {
            if !r.clients[i].star {
                r.refresh_ball(i);
            }
        }
        r
    }

    #[inline]
    fn copy_exp(&self, i: usize, c: usize) -> Option<i32> {
        self.rd.exponent(i, self.split.copies[c].original)
    }

    /// `B_i = {c ∈ F_i : r(i,c) ≤ D_i/(1+λ)}`.
    fn refresh_ball(&mut self, i: usize) {
        let d = self.clients[i].d;
        let b = self.clients[i]
            .f
            .iter()
            .copied()
            .filter(|&c| match (self.copy_exp(i, c), d) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(e), Some(di)) => e < di,
            })
            .collect();
        self.clients[i].b = b;
    }

    fn build_lp(&self) -> (LinearProgram, Vec<(usize, usize)>) {
        let inst = self.inst;
        let nc = self.split.copies.len();
        let m = inst.num_groups();
        let mut lp = LinearProgram::new();
        for c in 0..nc {
            lp.add_var(format!("y{c}"), 0.0);
        }
        let z = lp.add_var("z", 1.0);
        let mut coef = vec![vec![0.0; nc]; m];
        let mut constant = vec![0.0; m];
        for (i, st) in self.clients.iter().enumerate() {
            if st.star {
                for &(s, w) in &self.memberships[i] {
                    for &c in &st.f {
                        coef[s][c] += w * self.rd.level_pow(self.copy_exp(i, c));
                    }
                }
            } else if st.d.is_some() {
                let dp = self.rd.level_pow(st.d);
                for &(s, w) in &self.memberships[i] {
                    constant[s] += w * dp;
                    for &c in &st.b {
                        coef[s][c] += w * (self.rd.level_pow(self.copy_exp(i, c)) - dp);
                    }
                }
            }
        }
        for s in 0..m {
            let mut row = vec![(z, 1.0)];
            row.extend(coef[s].iter().enumerate().filter(|(_, &a)| a != 0.0).map(|(c, &a)| (c, -a)));
            lp.add_constraint(row, Relation::Ge, constant[s]);
        }
        lp.add_constraint((0..nc).map(|c| (c, 1.0)).collect(), Relation::Eq, inst.k() as f64);
        let mut free_rows = Vec::new();
        for (i, st) in self.clients.iter().enumerate() {
            if st.star {
                lp.add_constraint(st.f.iter().map(|&c| (c, 1.0)).collect(), Relation::Eq, 1.0);
            } else if st.d.is_some() && !st.b.is_empty() {
                let row = lp.add_constraint(st.b.iter().map(|&c| (c, 1.0)).collect(), Relation::Le, 1.0);
                free_rows.push((row, i));
            }
        }
        (lp, free_rows)
    }

    fn solve(&self) -> Result<(VertexSolution, Vec<(usize, usize)>), RoundingError> {
        let (lp, free_rows) = self.build_lp();
        let sol = solve_with(&lp, &self.opts.lp1.solve)?;
        Ok((sol, free_rows))
    }

    /// First (lowest id) non-representative with a tight ball constraint.
    fn find_tight(&self, y: &[f64], free_rows: &[(usize, usize)]) -> Option<usize> {
        free_rows
            .iter()
            .map(|&(_, i)| i)
            .find(|&i| self.clients[i].b.iter().map(|&c| y[c]).sum::<f64>() >= 1.0 - TIGHT_TOL)
    }

    fn shrink(&mut self, i: usize) {
        let st = &mut self.clients[i];
        st.f = std::mem::take(&mut st.b);
        let d = st.d.expect("only clients with D_i > 0 are shrunk");
        let all_zero = st.f.iter().all(|&c| self.rd.exponent(i, self.split.copies[c].original).is_none());
        self.clients[i].d = if all_zero { None } else { Some(d - 1) };
        self.refresh_ball(i);
        self.update_star(i);
    }

    /// Admits `i` as a representative when every representative it shares a
    /// copy with has a strictly larger radius; those are demoted.
    fn update_star(&mut self, i: usize) {
        let di = self.clients[i].d;
        let mut sharers: Vec<usize> = self.clients[i].f.iter().filter_map(|&c| self.owner[c]).collect();
        sharers.sort_unstable();
        sharers.dedup();
        if sharers.iter().any(|&s| self.clients[s].d <= di) {
            return;
        }
        for s in sharers {
            for q in 0..self.clients[s].f.len() {
                let c = self.clients[s].f[q];
                self.owner[c] = None;
            }
            self.clients[s].star = false;
            self.refresh_ball(s);
        }
        for q in 0..self.clients[i].f.len() {
            let c = self.clients[i].f[q];
            self.owner[c] = Some(i);
        }
        self.clients[i].star = true;
        self.clients[i].b.clear();
    }

    /// Smallest y-mass any non-representative sees within
    /// `(1 + 2(1+λ)/λ)·D_i` in the completed rounded metric.
    fn min_coverage(&self, y: &[f64]) -> Option<f64> {
        let comp = self.completion.as_ref()?;
        let f = self.inst.num_facilities();
        let lambda = self.opts.lambda;
        let factor = 1.0 + 2.0 * (1.0 + lambda) / lambda;
        let mut worst: Option<f64> = None;
        for (i, st) in self.clients.iter().enumerate() {
            if st.star {
                continue;
            }
            let radius = factor * self.rd.level(st.d) * (1.0 + 1e-9);
            let mass: f64 = self
                .split
                .copies
                .iter()
                .enumerate()
                .filter(|(_, cp)| comp[i * f + cp.original] <= radius)
                .map(|(c, _)| y[c])
                .sum();
            worst = Some(worst.map_or(mass, |w: f64| w.min(mass)));
        }
        worst
    }

    fn iteration_cap(&self) -> usize {
        let diam = self.inst.client_facility_diameter();
        let ratio = self
            .inst
            .min_positive_client_facility_distance()
            .map_or(1.0, |dmin| (diam / dmin).log2().max(1.0));
        let n = self.inst.num_clients() as f64;
        (self.opts.iteration_constant * n * ratio / self.opts.lambda).ceil() as usize
    }

    fn record(&self, iteration: usize, sol: &VertexSolution, shrunk: Option<usize>, y: &[f64]) -> TraceRecord {
        TraceRecord {
            iteration,
            lp_objective: sol.objective_value,
            n_star: self.clients.iter().filter(|c| c.star).count(),
            n_free: self.clients.iter().filter(|c| !c.star).count(),
            shrunk_client: shrunk.map(|i| self.inst.client_point(i)),
            support_size: y.iter().filter(|&&v| v > SUPPORT_TOL).count(),
            min_coverage: self.min_coverage(y),
        }
    }

    pub fn run(mut self) -> Result<Outcome, RoundingError> {
        let cap = self.iteration_cap();
        let nc = self.split.copies.len();
        let (mut sol, mut free_rows) = self.solve()?;
        let mut trace = Vec::new();
        let mut monotonicity_violations = 0;
        let mut coverage_violations = 0;
        let mut note = |rec: TraceRecord, prev: Option<f64>| {
            if let Some(prev) = prev {
                if rec.lp_objective > prev + 1e-6 * (1.0 + prev.abs()) {
                    log::warn!("rounding lp objective rose from {prev} to {}", rec.lp_objective);
                    monotonicity_violations += 1;
                }
            }
            if rec.min_coverage.is_some_and(|c| c < 1.0 - 1e-6) {
                log::warn!("coverage {} below one at iteration {}", rec.min_coverage.unwrap_or(0.0), rec.iteration);
                coverage_violations += 1;
            }
            log::trace!("{}", serde_json::to_string(&rec).unwrap_or_default());
            rec
        };
        let first = self.record(0, &sol, None, &sol.values[..nc]);
        trace.push(note(first, None));
        let mut iterations = 0;
        while let Some(i) = self.find_tight(&sol.values[..nc], &free_rows) {
            iterations += 1;
            if iterations > cap {
                return Err(RoundingError::Stalled { iterations: cap });
            }
            let prev = sol.objective_value;
            self.shrink(i);
            (sol, free_rows) = self.solve()?;
            let rec = self.record(iterations, &sol, Some(i), &sol.values[..nc]);
            trace.push(note(rec, Some(prev)));
        }
        if !self.opts.trace {
            let last = trace.pop();
            trace.clear();
            trace.extend(last);
        }
        Ok(Outcome {
            y: sol.values[..nc].to_vec(),
            split: self.split,
            lp_objective: sol.objective_value,
            iterations,
            trace,
            monotonicity_violations,
            coverage_violations,
        })
    }

    #[cfg(test)]
    pub fn representatives_disjoint(&self) -> bool {
        let mut seen = vec![false; self.split.copies.len()];
        for st in self.clients.iter().filter(|c| c.star) {
            for &c in &st.f {
                if seen[c] {
                    return false;
                }
                seen[c] = true;
            }
        }
        true
    }

    #[cfg(test)]
    pub fn every_free_client_is_represented(&self) -> bool {
        self.clients.iter().filter(|c| !c.star).all(|st| {
            st.f.iter()
                .filter_map(|&c| self.owner[c])
                .any(|r| self.clients[r].d <= st.d)
        })
    }
}
