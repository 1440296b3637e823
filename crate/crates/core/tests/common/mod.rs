#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};
use casc_core::evaluation::BoundParams;
use casc_core::netbuild::ReturnPanel;
use chrono::{Days, NaiveDate};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

fn big(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

/// The misclustering bound evaluated at 256-bit precision.
pub fn bound_oracle(p: &BoundParams) -> BigFloat {
    let mut cc = Consts::new().unwrap();
    let add = |a: &BigFloat, b: &BigFloat| a.add(b, PREC, RM);
    let mul = |a: &BigFloat, b: &BigFloat| a.mul(b, PREC, RM);
    let div = |a: &BigFloat, b: &BigFloat| a.div(b, PREC, RM);

    let (n, t, k) = (big(p.n), big(p.t), big(p.k));
    let inner = div(&mul(&mul(&big(8.0), &n), &t), &big(p.confidence));
    let b = mul(&big(3.0), &inner.ln(PREC, RM, &mut cc)).sqrt(PREC, RM);
    let two_eps = add(&big(2.0), &big(p.eps));
    let c = mul(&big(512.0), &mul(&two_eps, &two_eps));

    let noise = div(&mul(&add(&big(4.0), &mul(&big(2.0), &big(p.c_w))), &b), &big(p.delta_min).sqrt(PREC, RM));
    let pm = big(p.p_max);
    let root = mul(&mul(&mul(&big(2.0), &pm), &big(p.r)), &big(p.s)).sqrt(PREC, RM);
    let churn = mul(&div(&mul(&big(2.0), &k), &b), &add(&root, &mul(&big(2.0), &pm)));
    let fact = (1..=p.kernel_order as u64).fold(big(1.0), |acc, i| mul(&acc, &big(i as f64)));
    let ratio = div(&big(p.r), &t);
    let decay = if p.r == 0.0 { big(0.0) } else { ratio.pow(&big(p.beta), PREC, RM, &mut cc) };
    let bias = mul(&div(&mul(&n, &big(p.smooth_l)), &mul(&mul(&b, &b), &fact)), &decay);
    let brace = add(&add(&noise, &churn), &bias);

    let w = big(p.w_max);
    let lam = big(p.lambda_k_max);
    let mz = big(p.m_z);
    let num = mul(&mul(&mul(&c, &k), &mul(&w, &w)), &mul(&brace, &brace));
    let den = mul(&mul(&mul(&mz, &mz), &n), &mul(&lam, &lam));
    div(&num, &den)
}

/// `|value − oracle| ≤ tol·|oracle|` in arbitrary precision.
pub fn relative_close(value: f64, oracle: &BigFloat, tol: f64) -> bool {
    let diff = big(value).sub(oracle, PREC, RM).abs();
    let limit = oracle.abs().mul(&big(tol), PREC, RM);
    diff <= limit
}

pub fn date(d: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2018, 1, 1).unwrap() + Days::new(d as u64)
}

pub fn panel(returns: DMatrix<f64>) -> ReturnPanel {
    let dates = (0..returns.nrows()).map(date).collect();
    let assets = (0..returns.ncols()).map(|a| format!("A{a}")).collect();
    ReturnPanel::new(dates, assets, returns).unwrap()
}

/// Two assets alternating ±1% out of phase.
pub fn alternating_panel(days: usize) -> ReturnPanel {
    panel(DMatrix::from_fn(days, 2, |d, a| if (d + a) % 2 == 0 { 0.01 } else { -0.01 }))
}

pub fn iid_panel(days: usize, n: usize, seed: u64) -> ReturnPanel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    panel(DMatrix::from_fn(days, n, |_, _| {
        let z: f64 = StandardNormal.sample(&mut rng);
        0.03 * z
    }))
}

pub fn graph(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    a
}

/// Within and cross connection from an edge list: each internal edge adds
/// four degree endpoints to its group, each cross edge two to either side.
pub fn hand_connections(n: usize, edges: &[(usize, usize)], labels: &[usize], k: usize) -> Vec<(f64, Option<f64>)> {
    (0..k)
        .map(|g| {
            let size = labels.iter().filter(|&&l| l == g).count() as f64;
            let inside = edges.iter().filter(|&&(i, j)| labels[i] == g && labels[j] == g).count() as f64;
            let cross = edges.iter().filter(|&&(i, j)| (labels[i] == g) != (labels[j] == g)).count() as f64;
            let others = n as f64 - size;
            (4.0 * inside / (4.0 * size), (others > 0.0).then(|| 2.0 * cross / (4.0 * others)))
        })
        .collect()
}

/// Fixed hand-counted connection instances: `(N, edges, labels, K)`.
pub fn connection_fixtures() -> Vec<(usize, Vec<(usize, usize)>, Vec<usize>, usize)> {
    vec![
        (4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)], vec![0, 0, 1, 1], 2),
        (6, vec![(0, 1), (1, 2), (2, 3), (3, 4), (0, 5)], vec![0, 0, 0, 1, 1, 1], 2),
        (6, vec![(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)], vec![0, 0, 0, 1, 1, 1], 2),
        (7, vec![(0, 6), (1, 6), (2, 6), (3, 4), (4, 5), (0, 1), (2, 5)], vec![2, 2, 1, 0, 0, 1, 2], 3),
    ]
}

pub fn random_bound_params(rng: &mut ChaCha8Rng) -> BoundParams {
    use rand::Rng;
    let n = rng.random_range(10.0..5000.0f64).round();
    let t = rng.random_range(2.0..200.0f64).round();
    BoundParams {
        n,
        t,
        k: rng.random_range(2..=8) as f64,
        r: rng.random_range(0.0..t / 2.0).round(),
        s: rng.random_range(0.0..n).round(),
        p_max: rng.random_range(1.0..n),
        delta_min: rng.random_range(1.0..500.0),
        lambda_k_max: rng.random_range(0.01..2.0),
        m_z: rng.random_range(0.01..0.5),
        w_max: rng.random_range(1.0..10.0),
        c_w: rng.random_range(0.0..5.0),
        eps: rng.random_range(0.0..1.0),
        smooth_l: rng.random_range(0.0..10.0),
        beta: rng.random_range(0.1..3.0),
        kernel_order: rng.random_range(0..=6),
        confidence: rng.random_range(0.001..0.5),
    }
}
