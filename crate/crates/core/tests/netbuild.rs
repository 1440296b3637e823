use casc_core::netbuild::*;
use chrono::{Days, NaiveDate};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn panel(returns: DMatrix<f64>) -> ReturnPanel {
    let start = NaiveDate::from_ymd_opt(2018, 1, 1).unwrap();
    let dates = (0..returns.nrows()).map(|d| start + Days::new(d as u64)).collect();
    let assets = (0..returns.ncols()).map(|a| format!("A{a}")).collect();
    ReturnPanel::new(dates, assets, returns).unwrap()
}

fn gaussian(days: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(days, n, |_, _| { let z: f64 = StandardNormal.sample(&mut rng); 0.02 * z })
}

/// Asset 0 duplicates asset 1; the rest are independent.
fn duplicate_fixture(seed: u64) -> ReturnPanel {
    let mut r = gaussian(200, 8, seed);
    let dup = r.column(1).into_owned();
    r.set_column(0, &dup);
    panel(r)
}

#[test]
fn duplicate_column_is_the_only_selection() {
    for seed in 0..10 {
        let fit = adaptive_lasso_fit(&duplicate_fixture(seed), 0, 0..200, &LassoConfig::default()).unwrap();
        assert_eq!(fit.selected, vec![1], "seed {seed}");
        assert!(fit.lambda >= 0.0);
    }
}

#[test]
fn zero_penalty_beats_every_single_predictor_fit() {
    for seed in 0..5 {
        let p = panel(gaussian(120, 6, 100 + seed));
        let cfg = LassoConfig { lambda_grid: Some(vec![0.0]), ..LassoConfig::default() };
        let fit = adaptive_lasso_fit(&p, 2, 0..120, &cfg).unwrap();
        let std = p.standardized(&(0..120));
        let y = std.data.column(2);
        for j in (0..6).filter(|&j| j != 2) {
            let x = std.data.column(j);
            let b = x.dot(&y) / x.dot(&x);
            let rss = (y - x * b).norm_squared();
            assert!(fit.rss <= rss + 1e-8, "seed {seed}: {} > {rss} for predictor {j}", fit.rss);
        }
    }
}

#[test]
fn perfectly_correlated_pair_is_linked_in_every_period() {
    let mut r = gaussian(300, 8, 7);
    let lead = r.column(3).into_owned();
    r.set_column(5, &(lead * 1.5));
    let cfg = ReturnNetworkConfig { window: 60, step: 30, ..ReturnNetworkConfig::default() };
    let net = return_network(&panel(r), &cfg).unwrap();
    assert_eq!(net.network.periods(), 9);
    for t in 0..net.network.periods() {
        let a = net.network.slice(t);
        assert_eq!(a[(3, 5)], 1.0, "t={t}");
        assert_eq!(a, &a.transpose());
        assert!((0..8).all(|i| a[(i, i)] == 0.0));
    }
}

#[test]
fn independent_assets_stay_sparse() {
    let mut total = 0.0;
    for seed in 0..20 {
        let cfg = ReturnNetworkConfig { window: 200, ..ReturnNetworkConfig::default() };
        let net = return_network(&panel(gaussian(200, 10, 1000 + seed)), &cfg).unwrap();
        total += net.network.edge_count(0) as f64 * 2.0 / 10.0;
    }
    assert!(total / 20.0 < 1.0, "average degree {}", total / 20.0);
}

#[test]
fn network_follows_column_order() {
    let mut r = gaussian(90, 6, 3);
    let c = r.column(0).into_owned();
    r.set_column(4, &(c * 0.5 + r.column(4) * 0.1));
    let p = panel(r);
    let perm = [5, 2, 4, 0, 1, 3];
    let cfg = ReturnNetworkConfig { window: 60, step: 15, ..ReturnNetworkConfig::default() };
    let base = return_network(&p, &cfg).unwrap();
    let moved = return_network(&p.permuted_columns(&perm).unwrap(), &cfg).unwrap();
    for t in 0..base.network.periods() {
        let a = base.network.slice(t);
        let b = moved.network.slice(t);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(b[(i, j)], a[(perm[i], perm[j])]);
            }
        }
    }
}

fn random_graph(n: usize, p: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < p {
                a[(i, j)] = 1.0;
                a[(j, i)] = 1.0;
            }
        }
    }
    a
}

#[test]
fn eigenvector_centrality_is_an_eigenvector() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..30 {
        let a = random_graph(15, 0.2, &mut rng);
        let c = eigenvector_centrality(&a).unwrap();
        if c.empty {
            continue;
        }
        let v = nalgebra::DVector::from_vec(c.scores.clone());
        let av = &a * &v;
        for &i in &c.component {
            assert!((av[i] - c.eigenvalue * v[i]).abs() <= 1e-8);
        }
        assert!(c.scores.iter().all(|&s| s >= 0.0));
        assert!((v.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn path_graph_centrality() {
    let mut a = DMatrix::zeros(3, 3);
    for (i, j) in [(0, 1), (1, 2)] {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    let c = eigenvector_centrality(&a).unwrap();
    assert!((c.eigenvalue - 2f64.sqrt()).abs() < 1e-12);
    let expected = [0.5, 0.5 * 2f64.sqrt(), 0.5];
    for i in 0..3 {
        assert!((c.scores[i] - expected[i]).abs() < 1e-12);
    }
}

#[test]
fn degree_centrality_sums_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for n in [3, 7, 31, 101] {
        let a = random_graph(n, 0.3, &mut rng);
        let c = degree_centrality_normalized(&a).unwrap();
        let total: f64 = c.scores.iter().sum();
        assert!((total - 1.0).abs() <= 4.0 * f64::EPSILON, "n={n}: {total}");
    }
}

const ALGS: [&str; 4] = ["SHA-256", "Scrypt", "Ethash", "X11"];
const PROOFS: [&str; 3] = ["PoW", "PoS", "DPoS"];

fn random_table(n: usize, rng: &mut ChaCha8Rng) -> (Vec<Option<String>>, Vec<Vec<String>>) {
    let algs = (0..n).map(|_| if rng.random::<f64>() < 0.15 { None } else { Some(ALGS[rng.random_range(0..4)].to_string()) }).collect();
    let proofs = (0..n).map(|_| PROOFS.iter().filter(|_| rng.random::<f64>() < 0.35).map(|s| s.to_string()).collect()).collect();
    (algs, proofs)
}

fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("c{i}")).collect()
}

#[test]
fn adding_a_shared_attribute_never_removes_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let (algs, mut proofs) = random_table(10, &mut rng);
        let before = contract_adjacency(&ContractAttributes::new(ids(10), algs.clone(), proofs.clone()).unwrap());
        let i = rng.random_range(0..10);
        proofs[i].push(PROOFS[rng.random_range(0..3)].to_string());
        let after = contract_adjacency(&ContractAttributes::new(ids(10), algs, proofs).unwrap());
        assert!(before.iter().zip(after.iter()).all(|(b, a)| a >= b));
    }
}

#[test]
fn dummy_products_reproduce_attribute_sharing() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..50 {
        let (algs, proofs) = random_table(12, &mut rng);
        let attrs = ContractAttributes::new(ids(12), algs, proofs).unwrap();
        let x = covariate_dummies(&attrs);
        let alg_cols: Vec<usize> = x.names().iter().enumerate().filter(|(_, n)| n.starts_with("algorithm:")).map(|(c, _)| c).collect();
        let proof_cols: Vec<usize> = x.names().iter().enumerate().filter(|(_, n)| n.starts_with("proof:")).map(|(c, _)| c).collect();
        let xa = x.values().select_columns(&alg_cols);
        let xp = x.values().select_columns(&proof_cols);
        let ga = &xa * xa.transpose();
        let gp = &xp * xp.transpose();
        let alg = algorithm_adjacency(&attrs);
        let proof = proof_adjacency(&attrs);
        let both = contract_adjacency(&attrs);
        for i in 0..12 {
            for j in 0..12 {
                if i == j {
                    continue;
                }
                assert_eq!(ga[(i, j)] >= 1.0, alg[(i, j)] == 1.0);
                assert_eq!(gp[(i, j)] >= 1.0, proof[(i, j)] == 1.0);
                assert_eq!(ga[(i, j)] + gp[(i, j)] >= 1.0, both[(i, j)] == 1.0);
            }
        }
    }
}

#[test]
fn five_asset_table_hand_count() {
    // a–b share Ethash, b–c share PoS, d–e share PoW, a has unknown proofs.
    let attrs = ContractAttributes::new(
        ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect(),
        vec![Some("Ethash".into()), Some("Ethash".into()), Some("X11".into()), Some("Scrypt".into()), Some("SHA-256".into())],
        vec![vec![], vec!["PoS".into()], vec!["PoS".into()], vec!["PoW".into()], vec!["PoW".into()]],
    )
    .unwrap();
    let a = contract_adjacency(&attrs);
    let c = degree_centrality_normalized(&a).unwrap();
    // degrees 1, 2, 1, 1, 1 over a total of 6
    let expected = [1.0 / 6.0, 2.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0];
    for i in 0..5 {
        assert!((c.scores[i] - expected[i]).abs() < 1e-15);
    }
    assert_eq!(a.iter().sum::<f64>(), 6.0);
}

#[test]
fn attributes_from_json_align_by_id() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    std::fs::write(&path, r#"[{"id":"x","algorithm":"Ethash","proof_types":["PoW"]},{"id":"y","algorithm":"unknown"}]"#).unwrap();
    let attrs = ContractAttributes::from_json_path(&path).unwrap();
    let aligned = attrs.aligned_to(&["y".to_string(), "x".to_string()]).unwrap();
    assert_eq!(aligned.algorithm(0), None);
    assert_eq!(aligned.algorithm(1), Some("Ethash"));
    assert_eq!(contract_adjacency(&aligned).iter().sum::<f64>(), 0.0);
}
