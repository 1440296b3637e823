mod common;

use casc_core::evaluation::*;
use casc_core::netbuild::{contract_adjacency, degree_centrality_normalized, ContractAttributes};
use casc_core::sbm::*;
use casc_core::similarity::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sym_matrix(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    proptest::collection::vec(-1.0f64..1.0, n * n).prop_map(move |v| {
        let m = DMatrix::from_vec(n, n, v);
        &m + m.transpose()
    })
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_moments_hold(r in 0usize..=50, l in 0usize..=6) {
        let kw = kernel_weights(r, l);
        prop_assert!((kw.scaled_moment(0) - 1.0).abs() <= 1e-10);
        for k in 1..=l.min(r) as u32 {
            prop_assert!(kw.scaled_moment(k).abs() <= 1e-10);
        }
        let total: f64 = kw.iter().map(|(_, w)| w).sum();
        prop_assert!((total - (r + 1) as f64).abs() <= 1e-9 * (r + 1) as f64);
    }

    #[test]
    fn smoothing_is_linear(
        series_a in proptest::collection::vec(sym_matrix(4), 8),
        series_b in proptest::collection::vec(sym_matrix(4), 8),
        a in -3.0f64..3.0, b in -3.0f64..3.0, r in 0usize..=7, l in 0usize..=4,
    ) {
        let kw = kernel_weights(r, l);
        let mixed: Vec<DMatrix<f64>> = series_a.iter().zip(&series_b).map(|(x, y)| x * a + y * b).collect();
        let lhs = smoothed_similarity(&mixed, 7, &kw, EdgePolicy::Strict).unwrap();
        let rhs = smoothed_similarity(&series_a, 7, &kw, EdgePolicy::Strict).unwrap() * a
            + smoothed_similarity(&series_b, 7, &kw, EdgePolicy::Strict).unwrap() * b;
        let scale = kw.w_max() * 12.0;
        prop_assert!((lhs - rhs).amax() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn misclustering_is_bounded_symmetric_and_relabel_free(
        a in proptest::collection::vec(0usize..5, 1..40),
        seed in any::<u64>(),
        perm in permutation(5),
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<usize> = a.iter().map(|_| rng.random_range(0..5)).collect();
        let ab = period_misclustering(&a, &b, 5, 5).unwrap();
        prop_assert_eq!(ab, period_misclustering(&b, &a, 5, 5).unwrap());
        prop_assert!((0.0..=1.0).contains(&ab));
        let relabelled: Vec<usize> = a.iter().map(|&x| perm[x]).collect();
        prop_assert_eq!(period_misclustering(&relabelled, &a, 5, 5).unwrap(), 0.0);
        let b_relabelled: Vec<usize> = b.iter().map(|&x| perm[x]).collect();
        prop_assert_eq!(period_misclustering(&b_relabelled, &a, 5, 5).unwrap(), ab);
    }

    #[test]
    fn bound_is_monotone_in_smoothness_and_churn(seed in any::<u64>(), dl in 0.0f64..5.0, ds in 0.0f64..100.0) {
        use rand::SeedableRng;
        let p = common::random_bound_params(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let base = theorem1_bound(&p).unwrap().value;
        let more_l = theorem1_bound(&BoundParams { smooth_l: p.smooth_l + dl, ..p.clone() }).unwrap().value;
        let more_s = theorem1_bound(&BoundParams { s: p.s + ds, ..p.clone() }).unwrap().value;
        prop_assert!(more_l >= base);
        prop_assert!(more_s >= base);
    }

    #[test]
    fn backtest_legs_are_cash_neutral(seed in any::<u64>(), n in 2usize..25, q in 0.05f64..=0.5) {
        let p = common::iid_panel(30, n, seed);
        let cfg = BacktestConfig { quantile: q, ..BacktestConfig::default() };
        let s = contrarian_strategy(&p, "g", &(0..n).collect::<Vec<_>>(), &(1..30), &cfg).unwrap();
        for book in &s.books {
            let long: f64 = book.long.iter().map(|x| x.1).sum();
            let short: f64 = book.short.iter().map(|x| x.1).sum();
            prop_assert!((long - 1.0).abs() < 1e-12);
            prop_assert!((short - 1.0).abs() < 1e-12);
            prop_assert_eq!(book.long.len(), book.short.len());
        }
        let mut acc = 1.0;
        for (d, c) in s.daily.iter().zip(&s.cumulative) {
            acc *= 1.0 + d;
            prop_assert!((c - (acc - 1.0)).abs() <= 1e-12);
        }
    }

    #[test]
    fn degree_centrality_is_a_distribution(edges in proptest::collection::vec((0usize..12, 0usize..12), 1..40)) {
        let edges: Vec<(usize, usize)> = edges.into_iter().filter(|(i, j)| i != j).collect();
        let c = degree_centrality_normalized(&common::graph(12, &edges)).unwrap();
        let total: f64 = c.scores.iter().sum();
        prop_assert!((total - 1.0).abs() <= 4.0 * f64::EPSILON);
        prop_assert!(c.scores.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn shared_algorithm_always_links(algs in proptest::collection::vec(0usize..3, 2..10)) {
        let n = algs.len();
        let attrs = ContractAttributes::new(
            (0..n).map(|i| i.to_string()).collect(),
            algs.iter().map(|a| Some(format!("alg{a}"))).collect(),
            vec![vec![]; n],
        ).unwrap();
        let a = contract_adjacency(&attrs);
        for i in 0..n {
            prop_assert_eq!(a[(i, i)], 0.0);
            for j in 0..n {
                prop_assert_eq!(a[(i, j)], a[(j, i)]);
                if i != j {
                    prop_assert_eq!(a[(i, j)] == 1.0, algs[i] == algs[j]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn alpha_ignores_node_order(seed in any::<u64>(), perm in permutation(30)) {
        let inst = sample_dynamic_dcbm(&SimConfig::new(30, 3, 3, 3, seed), &BlockProbabilitySeries::linear_ramp(3)).unwrap();
        let base = build_series(&inst.network, Some(&inst.covariates), 3).unwrap();
        let moved = build_series(&inst.network.permuted(&perm).unwrap(), Some(&inst.covariates.permuted_rows(&perm)), 3).unwrap();
        for (a, b) in base.alphas().iter().zip(moved.alphas()) {
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-12), "{} vs {}", a, b);
        }
    }

    #[test]
    fn simulated_churn_respects_the_bound(seed in any::<u64>(), n in 9usize..40, s in 0usize..9) {
        let inst = sample_dynamic_dcbm(&SimConfig::new(n, 4, 3, s, seed), &BlockProbabilitySeries::linear_ramp(4)).unwrap();
        prop_assert!(inst.memberships.max_churn() <= s);
        for t in 0..4 {
            let a = inst.network.slice(t);
            prop_assert_eq!(a, &a.transpose());
        }
    }
}
