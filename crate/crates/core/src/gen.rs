//! Seeded pseudo-random micro instances for oracle checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lp::{LinearProgram, Relation};
use crate::model::Instance;

/// Shape of a random instance. Clients and facilities are distinct points
/// drawn uniformly from `[0, side)^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroShape {
    pub clients: usize,
    pub facilities: usize,
    pub k: usize,
    pub groups: usize,
    pub p: f64,
    pub dim: usize,
    pub side: f64,
}

/// Builds an instance of the given shape. Clients are split into disjoint,
/// nonempty groups with weights `1/|A_s|`.
pub fn instance_with_shape(seed: u64, shape: MicroShape) -> Instance {
    assert!(shape.groups >= 1 && shape.groups <= shape.clients);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let total = shape.clients + shape.facilities;
    let coords: Vec<Vec<f64>> = (0..total)
        .map(|_| {
            (0..shape.dim)
                .map(|_| (rng.random::<f64>() * shape.side * 100.0).round() / 100.0)
                .collect()
        })
        .collect();
    let mut label: Vec<usize> = (0..shape.clients)
        .map(|i| if i < shape.groups { i } else { rng.random_range(0..shape.groups) })
        .collect();
    // Shuffle labels so group 0 is not always the lowest client id.
    for i in (1..label.len()).rev() {
        let j = rng.random_range(0..=i);
        label.swap(i, j);
    }
    let groups = (0..shape.groups)
        .map(|s| {
            (0..shape.clients)
                .filter(|&i| label[i] == s)
                .map(|i| (i, None))
                .collect()
        })
        .collect();
    let mut inst = Instance::euclidean(
        coords,
        (0..shape.clients).collect(),
        (shape.clients..total).collect(),
        groups,
        shape.k,
        shape.p,
    )
    .expect("generated shapes are valid");
    inst.set_name(format!("micro-{seed}"));
    inst
}

/// Random shape within the given bounds: clients in `[max(4, m), max_clients]`,
/// facilities in `[k+1, max_facilities]`, `k` in `[1, max_k]`, `m` in
/// `[1, max_groups]`, `p` from `ps`.
pub fn random_shape(
    rng: &mut ChaCha8Rng,
    max_clients: usize,
    max_facilities: usize,
    max_k: usize,
    max_groups: usize,
    ps: &[f64],
) -> MicroShape {
    let k = rng.random_range(1..=max_k.min(max_facilities - 1));
    let facilities = rng.random_range(k + 1..=max_facilities);
    let groups = rng.random_range(1..=max_groups);
    let clients = rng.random_range(4.max(groups)..=max_clients);
    let p = ps[rng.random_range(0..ps.len())];
    MicroShape {
        clients,
        facilities,
        k,
        groups,
        p,
        dim: 2,
        side: 10.0,
    }
}

/// The `count` instances used by the bicriteria checks: up to 12 clients,
/// 8 facilities, `k ≤ 4`, `m ≤ 3`, `p ∈ {1, 2}`.
pub fn micro_suite(base_seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    (0..count)
        .map(|n| {
            let shape = random_shape(&mut rng, 12, 8, 4, 3, &[1.0, 2.0]);
            instance_with_shape(base_seed.wrapping_mul(1000).wrapping_add(n as u64), shape)
        })
        .collect()
}

/// Instances with one group, at most 8 clients and 5 facilities.
pub fn sparse_suite(base_seed: u64, count: usize, p: f64) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    (0..count)
        .map(|n| {
            let mut shape = random_shape(&mut rng, 8, 5, 2, 1, &[p]);
            shape.groups = 1;
            instance_with_shape(base_seed.wrapping_mul(1000).wrapping_add(n as u64), shape)
        })
        .collect()
}

/// A random program over a partition matroid polytope with `k` parts plus
/// `m` packing rows. Returns the program and its part sizes.
pub fn partition_matroid_lp(seed: u64, k: usize, m: usize) -> (LinearProgram, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sizes: Vec<usize> = (0..k).map(|_| rng.random_range(1..=4)).collect();
    let mut lp = LinearProgram::new();
    let mut vars = Vec::new();
    for (j, &s) in sizes.iter().enumerate() {
        let part: Vec<usize> = (0..s)
            .map(|v| lp.add_var(format!("x{j}_{v}"), -1.0 - rng.random::<f64>()))
            .collect();
        lp.add_constraint(part.iter().map(|&x| (x, 1.0)).collect(), Relation::Le, 1.0);
        vars.extend(part);
    }
    for _ in 0..m {
        let coeffs: Vec<(usize, f64)> = vars.iter().map(|&x| (x, rng.random::<f64>())).collect();
        let full: f64 = coeffs.iter().map(|&(_, a)| a).sum::<f64>() / vars.len() as f64 * k as f64;
        let rhs = full * rng.random_range(0.2..0.8);
        lp.add_constraint(coeffs, Relation::Le, rhs);
    }
    (lp, sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_respects_bounds_and_is_reproducible() {
        let a = micro_suite(7, 20);
        let b = micro_suite(7, 20);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_json_string().unwrap(), y.to_json_string().unwrap());
            assert!(x.num_clients() <= 12 && x.num_facilities() <= 8);
            assert!(x.k() <= 4 && x.num_groups() <= 3);
            assert!(x.k() < x.num_facilities());
            assert!(x.groups_disjoint());
            assert!(x.groups().iter().all(|g| !g.is_empty()));
        }
    }
}
