use fairclust::convert::{
    best_k_subset, brute_force_minmax, convert_with_beta_search, minmax_assign, nearest_subset,
    ConversionConfig, MinMaxAssignmentProblem, DEFAULT_SUBSET_CAP,
};
use fairclust::gen::{instance_with_shape, partition_matroid_lp, MicroShape};
use fairclust::lp::solve_to_vertex;
use fairclust::rounding::{approximation_factor, iterative_round, RoundingOptions};
use fairclust::{brute_force_opt, evaluate, CenterSet, Instance, OracleOptions};
use proptest::prelude::*;

fn shape() -> impl Strategy<Value = MicroShape> {
    (2usize..=10, 2usize..=7, 1usize..=3, 1usize..=3, prop::bool::ANY).prop_flat_map(|(n, f, m, k, sq)| {
        let k = k.min(f);
        let m = m.min(n);
        Just(MicroShape {
            clients: n,
            facilities: f,
            k,
            groups: m,
            p: if sq { 2.0 } else { 1.0 },
            dim: 2,
            side: 10.0,
        })
    })
}

fn instance() -> impl Strategy<Value = Instance> {
    (any::<u64>(), shape()).prop_map(|(seed, s)| instance_with_shape(seed, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adding_a_center_never_raises_any_group_cost(inst in instance(), pick in any::<prop::sample::Index>()) {
        let f = inst.num_facilities();
        let ids: Vec<usize> = inst.facilities().to_vec();
        let small = CenterSet::new(vec![ids[pick.index(f)]]).unwrap();
        let big = CenterSet::new(ids.clone()).unwrap();
        let a = evaluate(&inst, &small).unwrap();
        let b = evaluate(&inst, &big).unwrap();
        for (x, y) in a.per_group.iter().zip(&b.per_group) {
            prop_assert!(y <= x);
        }
    }

    #[test]
    fn scaling_distances_scales_costs(inst in instance(), c in 0.1f64..10.0) {
        let centers = CenterSet::new(inst.facilities()[..inst.k()].to_vec()).unwrap();
        let base = evaluate(&inst, &centers).unwrap().objective;
        let scaled = evaluate(&inst.scaled(c).unwrap(), &centers).unwrap().objective;
        let want = c.powf(inst.p()) * base;
        prop_assert!((scaled - want).abs() <= 1e-9 * want.max(1.0));
    }

    #[test]
    fn rounding_respects_size_and_factor(inst in instance()) {
        let sol = iterative_round(&inst, &RoundingOptions::default()).unwrap();
        let (_, opt) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        prop_assert!(sol.centers.len() <= inst.k() + inst.num_groups());
        prop_assert!(sol.lp_lower_bound <= opt.objective * (1.0 + 1e-7) + 1e-9);
        let bound = approximation_factor(RoundingOptions::default().lambda, inst.p()) * opt.objective;
        prop_assert!(sol.cost.objective <= bound * (1.0 + 1e-7) + 1e-9);
    }

    #[test]
    fn best_subset_beats_nearest_witness(inst in instance()) {
        let pseudo = iterative_round(&inst, &RoundingOptions::default()).unwrap();
        let (opt_set, _) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        let (best, cost) = best_k_subset(&inst, &pseudo.centers, DEFAULT_SUBSET_CAP).unwrap();
        prop_assert!(best.len() <= inst.k());
        let witness = nearest_subset(&inst, &pseudo.centers, &opt_set);
        let w = evaluate(&inst, &witness).unwrap();
        prop_assert!(cost.objective <= w.objective * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn vertex_support_is_bounded(seed in any::<u64>(), k in 1usize..6, m in 0usize..4) {
        let (lp, _) = partition_matroid_lp(seed, k, m);
        let sol = solve_to_vertex(&lp).unwrap();
        prop_assert!(sol.support.len() <= k + m);
    }

    #[test]
    fn minmax_within_one_plus_epsilon(
        costs in prop::collection::vec(prop::collection::vec(0.0f64..10.0, 6), 1..=2),
        eps in 0.2f64..1.0,
    ) {
        // three parts of two items each
        let prob = MinMaxAssignmentProblem {
            costs: costs.iter().map(|row| row.chunks(2).map(|c| c.to_vec()).collect()).collect(),
            epsilon: eps,
        };
        let sol = minmax_assign(&prob).unwrap();
        let (_, theta) = brute_force_minmax(&prob);
        prop_assert!((sol.value - prob.value(&sol.selection)).abs() <= 1e-9);
        prop_assert!(sol.value <= (1.0 + eps) * theta + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn single_group_matches_plain_clustering(seed in any::<u64>(), s in shape()) {
        // one group with unit weights is ordinary k-median / k-means
        let inst = instance_with_shape(seed, MicroShape { groups: 1, ..s });
        let (centers, cost) = brute_force_opt(&inst, &OracleOptions::default()).unwrap();
        let idx = centers.facility_indices(&inst).unwrap();
        let total: f64 = (0..inst.num_clients())
            .map(|i| idx.iter().map(|&j| inst.cost_cf(i, j)).fold(f64::INFINITY, f64::min))
            .sum();
        prop_assert!((cost.objective - total / inst.num_clients() as f64).abs() <= 1e-9 * total.max(1.0));
    }

    #[test]
    fn conversion_returns_at_most_k(seed in any::<u64>(), s in shape()) {
        let inst = instance_with_shape(seed, MicroShape { groups: 1, p: 1.0, ..s });
        let pseudo = iterative_round(&inst, &RoundingOptions::default()).unwrap();
        let cfg = ConversionConfig::new(0.9, 0.05, inst.p()).unwrap();
        let report = convert_with_beta_search(&inst, &pseudo.centers, &cfg).unwrap();
        prop_assert!(report.centers.len() <= inst.k());
    }
}
