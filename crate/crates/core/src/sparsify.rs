//! Candidate instances with facility balls removed, at least one of which is
//! `(opt/mt)`-sparse with the optimum unchanged; plus ball utilities and the
//! sparsity test.

use std::collections::HashSet;

use crate::combinatorics::Product;
use crate::model::{pow_p, CenterSet, Instance};

/// Facility point ids strictly within distance `r` of point `q`.
pub fn fball(inst: &Instance, q: usize, r: f64) -> Vec<usize> {
    inst.facilities().iter().copied().filter(|&j| inst.dist(q, j) < r).collect()
}

/// Weight of group `s` strictly within distance `r` of point `q`.
pub fn cball_mass(inst: &Instance, s: usize, q: usize, r: f64) -> f64 {
    inst.groups()[s]
        .members()
        .iter()
        .filter(|&&(i, _)| inst.dist(q, inst.client_point(i)) < r)
        .map(|&(_, w)| w)
        .sum()
}

/// Distance from point `q` to the nearest center.
fn dist_to_set(inst: &Instance, q: usize, centers: &CenterSet) -> f64 {
    centers.ids().iter().map(|&c| inst.dist(q, c)).fold(f64::INFINITY, f64::min)
}

/// Largest left-hand side of the sparsity inequality over facilities and
/// groups, with the facility and group attaining it.
pub fn max_density(inst: &Instance, opt: &CenterSet) -> (f64, usize, usize) {
    let mut worst = (0.0, inst.facility_point(0), 0);
    for &j in inst.facilities() {
        let d = dist_to_set(inst, j, opt);
        if d == 0.0 {
            continue;
        }
        let scale = pow_p(2.0 * d / 3.0, inst.p());
        for s in 0..inst.num_groups() {
            let v = scale * cball_mass(inst, s, j, d / 3.0);
            if v > worst.0 {
                worst = (v, j, s);
            }
        }
    }
    worst
}

/// Whether `facility` is `alpha`-dense with respect to `opt`.
pub fn is_dense(inst: &Instance, alpha: f64, opt: &CenterSet, facility: usize) -> bool {
    let d = dist_to_set(inst, facility, opt);
    if d == 0.0 {
        return false;
    }
    let scale = pow_p(2.0 * d / 3.0, inst.p());
    (0..inst.num_groups()).any(|s| scale * cball_mass(inst, s, facility, d / 3.0) > alpha * (1.0 + 1e-12))
}

/// True iff no facility of `inst` is `alpha`-dense with respect to `opt`.
pub fn is_alpha_sparse(inst: &Instance, alpha: f64, opt: &CenterSet) -> bool {
    if alpha == f64::INFINITY {
        return true;
    }
    inst.facilities().iter().all(|&j| !is_dense(inst, alpha, opt, j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsifyJob {
    pub t: usize,
    /// Ordered `(j, j')` facility point pairs.
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct SparsifiedInstance {
    pub instance: Instance,
    pub job: SparsifyJob,
}

#[derive(Debug, Clone, Copy)]
pub struct SparsifyCaps {
    /// Stop after this many emitted candidates.
    pub max_candidates: usize,
    /// Stop after visiting this many pair sequences, emitted or not.
    pub max_sequences: usize,
    /// Longest sequence; `None` means `m²t`.
    pub max_pairs: Option<usize>,
    /// Skip candidates whose facility set was already emitted.
    pub dedupe: bool,
}

impl Default for SparsifyCaps {
    fn default() -> Self {
        Self {
            max_candidates: 10_000,
            max_sequences: 1_000_000,
            max_pairs: None,
            dedupe: false,
        }
    }
}

/// Stream of candidate instances: the unmodified instance first, then every
/// sequence of 1..=m²t ordered facility pairs in lexicographic order.
pub struct Sparsifier<'a> {
    base: &'a Instance,
    t: usize,
    caps: SparsifyCaps,
    pairs: Vec<(usize, usize)>,
    max_len: usize,
    len: usize,
    seqs: Option<Product>,
    emitted: usize,
    visited: usize,
    seen: HashSet<Vec<usize>>,
    truncated: bool,
    discarded: usize,
}

pub fn enumerate_instances<'a>(inst: &'a Instance, t: usize, caps: SparsifyCaps) -> Sparsifier<'a> {
    assert!(t >= 1, "t must be positive");
    if !inst.groups_disjoint() {
        log::warn!("groups overlap; the sparsification guarantee assumes disjoint groups");
    }
    let f = inst.facilities();
    let pairs = f.iter().flat_map(|&a| f.iter().map(move |&b| (a, b))).collect();
    let m = inst.num_groups();
    Sparsifier {
        base: inst,
        t,
        caps,
        pairs,
        max_len: caps.max_pairs.unwrap_or(m * m * t),
        len: 0,
        seqs: None,
        emitted: 0,
        visited: 0,
        seen: HashSet::new(),
        truncated: false,
        discarded: 0,
    }
}

impl Sparsifier<'_> {
    /// Whether a cap ended the stream early.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Candidates dropped for having fewer than `k` facilities.
    pub fn discarded(&self) -> usize {
        self.discarded
    }

    fn candidate(&mut self, seq: Vec<(usize, usize)>) -> Option<SparsifiedInstance> {
        let mut removed = HashSet::new();
        for &(a, b) in &seq {
            removed.extend(fball(self.base, a, self.base.dist(a, b)));
        }
        let keep: Vec<usize> = self.base.facilities().iter().copied().filter(|j| !removed.contains(j)).collect();
        if keep.len() < self.base.k() {
            self.discarded += 1;
            return None;
        }
        if self.caps.dedupe && !self.seen.insert(keep.clone()) {
            return None;
        }
        let instance = if keep.len() == self.base.num_facilities() {
            self.base.clone()
        } else {
            self.base.with_facilities(keep).expect("subset of valid facilities")
        };
        Some(SparsifiedInstance {
            instance,
            job: SparsifyJob { t: self.t, pairs: seq },
        })
    }
}

impl Iterator for Sparsifier<'_> {
    type Item = SparsifiedInstance;

    fn next(&mut self) -> Option<SparsifiedInstance> {
        loop {
            if self.emitted >= self.caps.max_candidates || self.visited >= self.caps.max_sequences {
                if self.len <= self.max_len {
                    self.truncated = true;
                }
                return None;
            }
            let seq = if self.len == 0 {
                self.len = 1;
                Vec::new()
            } else {
                if self.len > self.max_len {
                    return None;
                }
                let seqs = self
                    .seqs
                    .get_or_insert_with(|| Product::new(vec![self.pairs.len(); self.len]));
                match seqs.next() {
                    Some(idx) => idx.iter().map(|&q| self.pairs[q]).collect(),
                    None => {
                        self.len += 1;
                        self.seqs = None;
                        continue;
                    }
                }
            };
            self.visited += 1;
            if let Some(c) = self.candidate(seq) {
                self.emitted += 1;
                return Some(c);
            }
        }
    }
}

/// The pair sequence from the sparsification argument: repeatedly take the
/// lowest-id remaining `alpha`-dense facility, pair it with its nearest
/// center of `opt`, and remove the ball between them.
pub fn dense_sequence(inst: &Instance, alpha: f64, opt: &CenterSet) -> Vec<(usize, usize)> {
    let mut removed: HashSet<usize> = HashSet::new();
    let mut seq = Vec::new();
    loop {
        let next = inst
            .facilities()
            .iter()
            .copied()
            .find(|&j| !removed.contains(&j) && is_dense(inst, alpha, opt, j));
        let Some(j) = next else {
            return seq;
        };
        let partner = nearest_center(inst, j, opt);
        removed.extend(fball(inst, j, inst.dist(j, partner)));
        seq.push((j, partner));
    }
}

/// Same construction without the density filter, taking facilities in the
/// given order. Every such sequence satisfies the separation used to show the
/// client balls are disjoint.
pub fn separated_sequence(inst: &Instance, order: &[usize], opt: &CenterSet) -> Vec<(usize, usize)> {
    let mut removed: HashSet<usize> = HashSet::new();
    let mut seq = Vec::new();
    for &j in order {
        if removed.contains(&j) || opt.contains(j) {
            continue;
        }
        let partner = nearest_center(inst, j, opt);
        removed.extend(fball(inst, j, inst.dist(j, partner)));
        seq.push((j, partner));
    }
    seq
}

fn nearest_center(inst: &Instance, j: usize, opt: &CenterSet) -> usize {
    *opt.ids()
        .iter()
        .min_by(|&&a, &&b| inst.dist(j, a).total_cmp(&inst.dist(j, b)).then(a.cmp(&b)))
        .expect("center sets are nonempty")
}

/// Client indices of group `s` in `CBall(j, d(j, j')/3)` for each pair.
pub fn client_balls(inst: &Instance, seq: &[(usize, usize)], s: usize) -> Vec<Vec<usize>> {
    seq.iter()
        .map(|&(j, jp)| {
            let r = inst.dist(j, jp) / 3.0;
            inst.groups()[s]
                .members()
                .iter()
                .filter(|&&(i, _)| inst.dist(j, inst.client_point(i)) < r)
                .map(|&(i, _)| i)
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{instance_with_shape, sparse_suite, MicroShape};
    use crate::model::{brute_force_opt, OracleOptions};

    fn line(positions: &[f64], clients: Vec<usize>, facilities: Vec<usize>, k: usize) -> Instance {
        let coords = positions.iter().map(|&x| vec![x]).collect();
        let g = clients.iter().map(|&c| (c, None)).collect();
        Instance::euclidean(coords, clients, facilities, vec![g], k, 1.0).unwrap()
    }

    #[test]
    fn fball_is_strict() {
        let inst = line(&[0.0, 1.0, 2.0, 5.0], vec![0], vec![1, 2, 3], 1);
        assert!(fball(&inst, 0, 0.0).is_empty());
        assert_eq!(fball(&inst, 0, 2.0), vec![1]);
        assert_eq!(fball(&inst, 0, 100.0), vec![1, 2, 3]);
    }

    #[test]
    fn cball_mass_counts_weights() {
        let inst = line(&[0.0, 1.0, 2.0, 5.0], vec![0, 1, 2], vec![3], 1);
        assert_eq!(cball_mass(&inst, 0, 0, 0.0), 0.0);
        assert!((cball_mass(&inst, 0, 0, 10.0) - 1.0).abs() < 1e-15);
        assert!((cball_mass(&inst, 0, 0, 1.5) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn candidate_count_for_three_facilities() {
        let inst = line(&[0.0, 1.0, 2.0, 4.0], vec![0], vec![1, 2, 3], 1);
        let all: Vec<_> = enumerate_instances(&inst, 1, SparsifyCaps::default()).collect();
        // 1 unmodified + 9 single pairs, none leaves fewer than one facility
        // because FBall(j, d(j, j')) never contains j'.
        assert_eq!(all.len(), 10);
        assert!(all[0].job.pairs.is_empty());
        for c in &all {
            if let [(a, b)] = c.job.pairs[..] {
                if a == b {
                    assert_eq!(c.instance.facilities(), inst.facilities());
                }
            }
        }
    }

    #[test]
    fn small_candidates_are_discarded_and_caps_truncate() {
        let inst = line(&[0.0, 1.0, 2.0, 4.0], vec![0], vec![1, 2, 3], 3);
        let mut it = enumerate_instances(&inst, 1, SparsifyCaps::default());
        let kept: Vec<_> = it.by_ref().collect();
        assert!(kept.iter().all(|c| c.instance.num_facilities() == 3));
        assert!(it.discarded() > 0);
        let caps = SparsifyCaps {
            max_candidates: 2,
            ..Default::default()
        };
        let mut it = enumerate_instances(&inst, 1, caps);
        assert_eq!(it.by_ref().count(), 2);
        assert!(it.truncated());
    }

    #[test]
    fn opt_facilities_are_never_dense() {
        let inst = line(&[0.0, 0.1, 0.2, 3.0, 3.1], vec![0, 1, 2], vec![3, 4], 1);
        let (opt, _) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        assert!(is_alpha_sparse(&inst.with_facilities(opt.ids().to_vec()).unwrap(), 0.0, &opt));
        assert!(is_alpha_sparse(&inst, f64::INFINITY, &opt));
    }

    #[test]
    fn packed_clients_make_a_facility_dense() {
        // Facility 5 sits on four clients; OPT is facility 6 far away.
        let coords = vec![vec![0.0], vec![0.01], vec![0.02], vec![0.03], vec![9.0], vec![0.0], vec![10.0]];
        let g = (0..5).map(|i| (i, None)).collect();
        let inst = Instance::euclidean(coords, (0..5).collect(), vec![5, 6], vec![g], 1, 1.0).unwrap();
        let opt = CenterSet::new(vec![6]).unwrap();
        assert!(!is_alpha_sparse(&inst, 0.1, &opt));
        assert!(is_alpha_sparse(&inst, 100.0, &opt));
        assert_eq!(dense_sequence(&inst, 0.1, &opt), vec![(5, 6)]);
    }

    #[test]
    fn separated_sequences_have_disjoint_client_balls() {
        for seed in 0..30u64 {
            let inst = instance_with_shape(
                seed,
                MicroShape {
                    clients: 10,
                    facilities: 7,
                    k: 2,
                    groups: 2,
                    p: 1.0,
                    dim: 2,
                    side: 10.0,
                },
            );
            let (opt, _) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            let mut order = inst.facilities().to_vec();
            for rot in 0..order.len() {
                order.rotate_left(1);
                let seq = separated_sequence(&inst, &order, &opt);
                for s in 0..inst.num_groups() {
                    let balls = client_balls(&inst, &seq, s);
                    let mut seen = HashSet::new();
                    for b in balls.iter().flatten() {
                        assert!(seen.insert(*b), "seed {seed} rotation {rot}: overlapping balls");
                    }
                }
            }
        }
    }

    #[test]
    fn removal_never_lowers_the_optimum() {
        for inst in sparse_suite(5, 4, 1.0) {
            let (_, base) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
            let caps = SparsifyCaps {
                dedupe: true,
                ..Default::default()
            };
            for cand in enumerate_instances(&inst, 1, caps) {
                let (_, c) = brute_force_opt(&cand.instance, &OracleOptions::default()).unwrap();
                assert!(c.objective >= base.objective - 1e-12);
            }
        }
    }
}
