use casc_core::clustering::*;
use casc_core::evaluation::period_misclustering;
use casc_core::sbm::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn distinct_blocks(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(k, k, |a, c| if a == c { 0.6 + 0.3 * rng.random::<f64>() } else { 0.0 }) + DMatrix::from_element(k, k, 0.05)
}

fn two_block_network(n: usize, periods: usize, p_in: f64, p_out: f64, seed: u64) -> (DynamicNetwork, Vec<usize>) {
    let truth: Vec<usize> = (0..n).map(|i| i * 2 / n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let slices = (0..periods)
        .map(|_| {
            let mut a = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i + 1..n {
                    let p = if truth[i] == truth[j] { p_in } else { p_out };
                    if rng.random::<f64>() < p {
                        a[(i, j)] = 1.0;
                        a[(j, i)] = 1.0;
                    }
                }
            }
            a
        })
        .collect();
    (DynamicNetwork::from_adjacency(slices).unwrap(), truth)
}

#[test]
fn population_similarities_are_recovered_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for inst in 0..20 {
        let k = rng.random_range(2..=4);
        let n = rng.random_range(4 * k..=60);
        let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let b = distinct_blocks(k, &mut rng);
        let w: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
        let s = population_similarity(&labels, &b, &w, &CovariateMatrix::zeros(n, 1), 0.0, 1.0).unwrap();
        let series = vec![s; 3];
        let run = cluster_similarity_series(&series, &[0.0; 3], &ClusterConfig::new(k, inst)).unwrap();
        for t in 0..3 {
            assert_eq!(period_misclustering(run.memberships.labels(t), &labels, k, k).unwrap(), 0.0, "instance {inst} t={t}");
        }
    }
}

#[test]
fn two_block_embedding_has_two_distinct_rows() {
    let labels: Vec<usize> = (0..12).map(|i| i % 2).collect();
    let b = DMatrix::from_row_slice(2, 2, &[0.8, 0.1, 0.1, 0.6]);
    let w: Vec<f64> = (0..12).map(|i| 1.0 + 0.1 * i as f64).collect();
    let s = population_similarity(&labels, &b, &w, &CovariateMatrix::zeros(12, 1), 0.0, 2.0).unwrap();
    let u = spectral_embed(&s, 2).unwrap().normalized().clone();
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..12 {
        if !reps.iter().any(|&r| (u.row(i) - u.row(r)).norm() < 1e-8) {
            reps.push(i);
        }
    }
    assert_eq!(reps.len(), 2);
}

fn partition_cost(points: &DMatrix<f64>, assign: &[usize], k: usize) -> f64 {
    let mut cost = 0.0;
    for g in 0..k {
        let rows: Vec<usize> = (0..points.nrows()).filter(|&i| assign[i] == g).collect();
        if rows.is_empty() {
            continue;
        }
        let mean = rows.iter().fold(nalgebra::RowDVector::zeros(points.ncols()), |acc, &i| acc + points.row(i)) / rows.len() as f64;
        cost += rows.iter().map(|&i| (points.row(i) - &mean).norm_squared()).sum::<f64>();
    }
    cost
}

#[test]
fn kmeans_matches_exhaustive_two_partition_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let angles: Vec<f64> = (0..6).map(|i| if i < 3 { 0.0 } else { std::f64::consts::PI } + 0.3 * (rng.random::<f64>() - 0.5)).collect();
        let pts = DMatrix::from_fn(6, 2, |i, j| if j == 0 { angles[i].cos() } else { angles[i].sin() });
        let mut best = (f64::INFINITY, vec![]);
        for mask in 0u32..64 {
            let assign: Vec<usize> = (0..6).map(|i| (mask >> i & 1) as usize).collect();
            let c = partition_cost(&pts, &assign, 2);
            if c < best.0 - 1e-12 {
                best = (c, assign);
            }
        }
        let km = kmeans_rows(&pts, 2, &KMeansOptions::default()).unwrap();
        assert!((km.objective - best.0).abs() < 1e-10);
        assert_eq!(period_misclustering(&km.assignment, &best.1, 2, 2).unwrap(), 0.0);
        assert!(km.within_approximation());
    }
}

#[test]
fn one_node_per_group_is_a_forced_partition() {
    let b = DMatrix::identity(3, 3) * 0.9 + DMatrix::from_element(3, 3, 0.05);
    let s = population_similarity(&[0, 1, 2], &b, &[1.0; 3], &CovariateMatrix::zeros(3, 1), 0.0, 1.0).unwrap();
    let run = cluster_similarity_series(&[s], &[0.0], &ClusterConfig::new(3, 0)).unwrap();
    let mut z = run.memberships.labels(0).to_vec();
    z.sort_unstable();
    assert_eq!(z, vec![0, 1, 2]);
}

#[test]
fn dsc_dc_splits_two_cliques_and_flags_an_empty_network() {
    let mut a = DMatrix::zeros(6, 6);
    for i in 0..6 {
        for j in 0..6 {
            if i != j && i / 3 == j / 3 {
                a[(i, j)] = 1.0;
            }
        }
    }
    let net = DynamicNetwork::from_adjacency(vec![a]).unwrap();
    let run = dsc_dc_baseline(&net, &ClusterConfig::new(2, 1)).unwrap();
    assert_eq!(period_misclustering(run.memberships.labels(0), &[0, 0, 0, 1, 1, 1], 2, 2).unwrap(), 0.0);

    let empty = DynamicNetwork::empty((0..5).map(|i| i.to_string()).collect(), 3);
    let run = dsc_dc_baseline(&empty, &ClusterConfig::new(2, 1)).unwrap();
    assert!(run.periods.iter().all(|d| d.degenerate));
    assert!((0..3).all(|t| run.memberships.labels(t).iter().all(|&l| l == 0)));
}

#[test]
fn covariate_free_pipeline_equals_dsc_pz() {
    let inst = sample_dynamic_dcbm(&SimConfig::new(40, 6, 3, 6, 8), &BlockProbabilitySeries::linear_ramp(6)).unwrap();
    let cfg = ClusterConfig::new(3, 5);
    let pz = dsc_pz_baseline(&inst.network, &cfg).unwrap();
    let zero = casc_dc(&inst.network, Some(&CovariateMatrix::zeros(40, 2)), &cfg).unwrap();
    assert_eq!(pz.memberships, zero.memberships);
    assert_eq!(pz.r_hats(), zero.r_hats());
}

#[test]
fn constant_network_uses_the_widest_window() {
    let (net, truth) = two_block_network(20, 1, 0.8, 0.05, 4);
    let periods = 8;
    let net = DynamicNetwork::from_adjacency(vec![net.slice(0).clone(); periods]).unwrap();
    let cfg = ClusterConfig::new(2, 2);
    let run = dsc_pz_baseline(&net, &cfg).unwrap();
    let expected: Vec<usize> = (0..periods).map(|t| t.min(periods / 2)).collect();
    assert_eq!(run.r_hats(), expected);
    let single = DynamicNetwork::from_adjacency(vec![net.slice(0).clone()]).unwrap();
    let static_run = dsc_pz_baseline(&single, &cfg).unwrap();
    for t in 0..periods {
        assert_eq!(period_misclustering(run.memberships.labels(t), static_run.memberships.labels(0), 2, 2).unwrap(), 0.0);
    }
    assert_eq!(period_misclustering(static_run.memberships.labels(0), &truth, 2, 2).unwrap(), 0.0);
}

#[test]
fn covariate_only_baseline() {
    let truth: Vec<usize> = (0..30).map(|i| i % 3).collect();
    let onehot = CovariateMatrix::continuous(DMatrix::from_fn(30, 3, |i, j| if truth[i] == j { 1.0 } else { 0.0 })).unwrap();
    let run = dsc_cw_baseline(&onehot, 4, &ClusterConfig::new(3, 0)).unwrap();
    for t in 0..4 {
        assert_eq!(period_misclustering(run.memberships.labels(t), &truth, 3, 3).unwrap(), 0.0);
    }

    // Uniform noise carries no group information.
    let mut total = 0.0;
    for seed in 0..100 {
        let inst = sample_dynamic_dcbm(&SimConfig::new(60, 1, 3, 0, seed), &BlockProbabilitySeries::linear_ramp(1)).unwrap();
        let cfg = ClusterConfig { restarts: 5, ..ClusterConfig::new(3, seed) };
        let run = dsc_cw_baseline(&inst.covariates, 1, &cfg).unwrap();
        total += period_misclustering(run.memberships.labels(0), inst.memberships.labels(0), 3, 3).unwrap();
    }
    assert!(total / 100.0 >= 0.3, "mean {}", total / 100.0);
}

#[test]
fn rank_deficient_covariates_are_flagged() {
    let x = CovariateMatrix::continuous(DMatrix::from_fn(10, 1, |i, _| i as f64 + 1.0)).unwrap();
    let run = dsc_cw_baseline(&x, 2, &ClusterConfig::new(3, 0)).unwrap();
    assert!(run.periods.iter().all(|d| d.degenerate));
}

#[test]
fn cross_validation_picks_the_block_count() {
    let labels: Vec<usize> = (0..30).map(|i| i % 2).collect();
    let b = DMatrix::from_row_slice(2, 2, &[0.7, 0.1, 0.1, 0.5]);
    let s = population_similarity(&labels, &b, &[1.0; 30], &CovariateMatrix::zeros(30, 1), 0.0, 1.0).unwrap();
    assert_eq!(select_k(&[s], &[1, 2, 3, 4], 5, 0).unwrap().k, 2);

    let ones = DMatrix::from_element(20, 20, 0.3);
    assert_eq!(select_k(&[ones], &[1, 2, 3, 4], 5, 0).unwrap().k, 1);
}

#[test]
fn cross_validation_on_noise_prefers_one() {
    use rand_distr::{Distribution, StandardNormal};
    let mut picks = Vec::new();
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(30, 30, |_, _| StandardNormal.sample(&mut rng));
        let s = (&m + m.transpose()) * 0.5;
        picks.push(select_k(&[s], &[1, 2, 3, 4], 5, seed).unwrap().k);
    }
    let mean = picks.iter().sum::<usize>() as f64 / 50.0;
    let ones = picks.iter().filter(|&&k| k == 1).count();
    assert!(mean < 1.5 && ones >= 25, "picks {picks:?}");
}

#[test]
fn node_permutation_permutes_labels() {
    let (net, _) = two_block_network(24, 4, 0.7, 0.05, 9);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = CovariateMatrix::continuous(DMatrix::from_fn(24, 2, |_, _| rng.random::<f64>())).unwrap();
    let mut perm: Vec<usize> = (0..24).collect();
    perm.reverse();
    perm.swap(3, 17);
    let cfg = ClusterConfig::new(2, 6);
    let base = casc_dc(&net, Some(&x), &cfg).unwrap();
    let moved = casc_dc(&net.permuted(&perm).unwrap(), Some(&x.permuted_rows(&perm)), &cfg).unwrap();
    for t in 0..4 {
        let back: Vec<usize> = perm.iter().map(|&p| base.memberships.labels(t)[p]).collect();
        assert_eq!(period_misclustering(moved.memberships.labels(t), &back, 2, 2).unwrap(), 0.0, "t={t}");
    }
    assert_eq!(base.r_hats(), moved.r_hats());
}

#[test]
fn isolated_node_gets_the_first_label() {
    let (net, _) = two_block_network(16, 3, 0.8, 0.05, 2);
    let slices: Vec<DMatrix<f64>> = net
        .slices()
        .iter()
        .map(|a| {
            let mut a = a.clone();
            for j in 0..16 {
                a[(5, j)] = 0.0;
                a[(j, 5)] = 0.0;
            }
            a
        })
        .collect();
    let net = DynamicNetwork::from_adjacency(slices).unwrap();
    let run = casc_dc(&net, None, &ClusterConfig::new(2, 0)).unwrap();
    for t in 0..3 {
        assert_eq!(run.memberships.labels(t)[5], 0);
        assert_eq!(run.periods[t].nonzero_rows, 15);
    }
}
