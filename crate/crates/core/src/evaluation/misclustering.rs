use serde::Serialize;

use crate::error::{Error, Result};
use crate::sbm::MembershipSeries;

/// Label alphabets up to this size are matched by enumerating permutations.
pub const EXHAUSTIVE_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MisclusteringReport {
    pub per_period: Vec<f64>,
    pub supremum: f64,
    pub mean: f64,
}

/// Square confusion matrix `C[a][b] = #{i : est_i = a, truth_i = b}`, padded
/// to the larger alphabet.
pub fn confusion(est: &[usize], truth: &[usize], k_est: usize, k_true: usize) -> Vec<Vec<usize>> {
    let m = k_est.max(k_true);
    let mut c = vec![vec![0usize; m]; m];
    for (&a, &b) in est.iter().zip(truth) {
        c[a][b] += 1;
    }
    c
}

/// Largest number of agreements over bijections, by full enumeration.
pub fn max_agreement_exhaustive(c: &[Vec<usize>]) -> usize {
    fn rec(c: &[Vec<usize>], row: usize, used: &mut [bool]) -> usize {
        if row == c.len() {
            return 0;
        }
        let mut best = 0;
        for col in 0..c.len() {
            if !used[col] {
                used[col] = true;
                best = best.max(c[row][col] + rec(c, row + 1, used));
                used[col] = false;
            }
        }
        best
    }
    rec(c, 0, &mut vec![false; c.len()])
}

/// Largest number of agreements over bijections, by the Hungarian method.
pub fn max_agreement_hungarian(c: &[Vec<usize>]) -> usize {
    let n = c.len();
    if n == 0 {
        return 0;
    }
    let top = c.iter().flatten().copied().max().unwrap_or(0) as i64;
    // Minimize (top − C) with row/column potentials; 1-based work arrays.
    let cost = |i: usize, j: usize| top - c[i - 1][j - 1] as i64;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0, j) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=n).map(|j| c[p[j] - 1][j - 1]).sum()
}

/// Fraction of nodes mislabelled under the best label bijection.
pub fn period_misclustering(est: &[usize], truth: &[usize], k_est: usize, k_true: usize) -> Result<f64> {
    if est.len() != truth.len() {
        return Err(Error::dims("membership period", truth.len(), est.len()));
    }
    if est.is_empty() {
        return Ok(0.0);
    }
    if est.iter().any(|&l| l >= k_est) || truth.iter().any(|&l| l >= k_true) {
        return Err(Error::InvalidInput("label outside its alphabet".into()));
    }
    let c = confusion(est, truth, k_est, k_true);
    let agree = if c.len() <= EXHAUSTIVE_LIMIT { max_agreement_exhaustive(&c) } else { max_agreement_hungarian(&c) };
    Ok(1.0 - agree as f64 / est.len() as f64)
}

pub fn misclustering_rate(est: &MembershipSeries, truth: &MembershipSeries) -> Result<MisclusteringReport> {
    if est.periods() != truth.periods() || est.nodes() != truth.nodes() {
        return Err(Error::dims(
            "membership series",
            format!("T={}, N={}", truth.periods(), truth.nodes()),
            format!("T={}, N={}", est.periods(), est.nodes()),
        ));
    }
    let per_period = (0..truth.periods())
        .map(|t| period_misclustering(est.labels(t), truth.labels(t), est.k(), truth.k()))
        .collect::<Result<Vec<_>>>()?;
    let supremum = per_period.iter().copied().fold(0.0, f64::max);
    let mean = if per_period.is_empty() { 0.0 } else { per_period.iter().sum::<f64>() / per_period.len() as f64 };
    Ok(MisclusteringReport { per_period, supremum, mean })
}
