use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::rng::substream;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KSelection {
    pub k: usize,
    /// `(K, mean held-out squared error)` in the order of `k_range`.
    pub scores: Vec<(usize, f64)>,
}

/// Node-pair cross-validation over a similarity sequence.
///
/// Unordered off-diagonal pairs are split into `folds` groups. For each fold
/// and period the held-out pairs are zeroed (both triangles), the remaining
/// off-diagonal entries rescaled by the inverse observed fraction, and a
/// rank-K eigen-approximation scored by squared error on the held-out pairs.
/// The K with the lowest mean error wins; ties go to the smaller K.
pub fn select_k(similarities: &[DMatrix<f64>], k_range: &[usize], folds: usize, seed: u64) -> Result<KSelection> {
    if k_range.is_empty() {
        return Err(Error::Config("empty K range".into()));
    }
    if similarities.is_empty() {
        return Err(Error::Config("no similarity matrices".into()));
    }
    if folds < 2 {
        return Err(Error::Config("cross-validation needs at least 2 folds".into()));
    }
    let n = similarities[0].nrows();
    if let Some(&bad) = k_range.iter().find(|&&k| k == 0 || k >= n) {
        return Err(Error::Config(format!("K = {bad} outside [1, {}]", n.saturating_sub(1))));
    }
    let k_max = *k_range.iter().max().expect("non-empty");

    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    pairs.shuffle(&mut substream(seed, "select-k", 0));
    let fold_of: Vec<usize> = (0..pairs.len()).map(|p| p % folds).collect();

    let mut totals = vec![0.0; k_max + 1];
    let mut count = 0usize;
    for s in similarities {
        if s.nrows() != n || s.ncols() != n {
            return Err(Error::dims("similarity series", format!("{n}x{n}"), format!("{}x{}", s.nrows(), s.ncols())));
        }
        for f in 0..folds {
            let held: Vec<(usize, usize)> = pairs.iter().zip(&fold_of).filter(|(_, &g)| g == f).map(|(&p, _)| p).collect();
            if held.is_empty() {
                continue;
            }
            let observed_frac = 1.0 - held.len() as f64 / pairs.len() as f64;
            let mut masked = DMatrix::from_fn(n, n, |i, j| if i == j { s[(i, j)] } else { s[(i, j)] / observed_frac });
            for &(i, j) in &held {
                masked[(i, j)] = 0.0;
                masked[(j, i)] = 0.0;
            }
            let eig = linalg::top_k_by_magnitude(&masked, k_max)?;
            let mut recon = DMatrix::zeros(n, n);
            for k in 1..=k_max {
                let v = eig.vectors.column(k - 1);
                recon += (&v * v.transpose()) * eig.values[k - 1];
                totals[k] += held.iter().map(|&(i, j)| (s[(i, j)] - recon[(i, j)]).powi(2)).sum::<f64>();
            }
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::Config("no held-out pairs (need at least 2 nodes)".into()));
    }
    let scores: Vec<(usize, f64)> = k_range.iter().map(|&k| (k, totals[k] / count as f64)).collect();
    let mut best = scores[0];
    for &(k, e) in &scores[1..] {
        if e < best.1 || (e == best.1 && k < best.0) {
            best = (k, e);
        }
    }
    Ok(KSelection { k: best.0, scores })
}
