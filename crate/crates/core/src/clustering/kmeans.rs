use nalgebra::{DMatrix, RowDVector};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embed::SpectralEmbedding;
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansOptions {
    /// Approximation slack reported against the best restart.
    pub eps: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self { eps: 0.01, restarts: 20, max_iter: 300, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// `K×d` centroid matrix.
    pub centroids: DMatrix<f64>,
    /// Sum of squared distances to assigned centroids.
    pub objective: f64,
    /// Some cluster is empty because the data has fewer than K distinct rows.
    pub degenerate: bool,
    pub best_restart: usize,
    pub restart_objectives: Vec<f64>,
    pub eps: f64,
}

impl KMeansResult {
    /// `objective ≤ (1+ε)·min over restarts`.
    pub fn within_approximation(&self) -> bool {
        let best = self.restart_objectives.iter().copied().fold(f64::INFINITY, f64::min);
        self.objective <= (1.0 + self.eps) * best + f64::EPSILON
    }
}

/// k-means on the row-normalized embedding `U⁺`.
pub fn spherical_kmeans(emb: &SpectralEmbedding, k: usize, opts: &KMeansOptions) -> Result<KMeansResult> {
    kmeans_rows(emb.normalized(), k, opts)
}

/// Lloyd iterations from k-means++ seeds over `opts.restarts` independent
/// streams; the restart with the lowest objective wins (lowest index on ties).
pub fn kmeans_rows(points: &DMatrix<f64>, k: usize, opts: &KMeansOptions) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Infeasible { nonzero_rows: n, k });
    }
    let restarts = opts.restarts.max(1);
    let runs: Vec<Restart> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(opts.seed, "kmeans-restart", r as u64);
            lloyd(points, k, opts.max_iter, &mut rng)
        })
        .collect::<Result<_>>()?;
    let restart_objectives: Vec<f64> = runs.iter().map(|r| r.objective).collect();
    let (best_restart, best) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.objective.total_cmp(&b.objective).then(ia.cmp(ib)))
        .expect("at least one restart");
    Ok(KMeansResult {
        assignment: best.assignment,
        centroids: best.centroids,
        objective: best.objective,
        degenerate: best.degenerate,
        best_restart,
        restart_objectives,
        eps: opts.eps,
    })
}

struct Restart {
    assignment: Vec<usize>,
    centroids: DMatrix<f64>,
    objective: f64,
    degenerate: bool,
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, c: usize) -> f64 {
    points.row(i).iter().zip(centroids.row(c).iter()).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn plus_plus(points: &DMatrix<f64>, k: usize, rng: &mut StreamRng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut centroids = DMatrix::zeros(k, points.ncols());
    let first = rng.random_range(0..n);
    centroids.set_row(0, &points.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                if target < d {
                    chosen = i;
                    break;
                }
                target -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.set_row(c, &points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centroids, c));
        }
    }
    centroids
}

/// Nearest centroid, lowest index on ties.
fn assign(points: &DMatrix<f64>, centroids: &DMatrix<f64>, active: &[bool]) -> (Vec<usize>, Vec<f64>) {
    let k = centroids.nrows();
    (0..points.nrows())
        .map(|i| {
            let mut best = usize::MAX;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                if !active[c] {
                    continue;
                }
                let d = sq_dist(points, i, centroids, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            (best, best_d)
        })
        .unzip()
}

fn lloyd(points: &DMatrix<f64>, k: usize, max_iter: usize, rng: &mut StreamRng) -> Result<Restart> {
    let n = points.nrows();
    let dim = points.ncols();
    let mut centroids = plus_plus(points, k, rng);
    let mut active = vec![true; k];
    let (mut assignment, mut dists) = assign(points, &centroids, &active);
    let mut objective: f64 = dists.iter().sum();
    for _ in 0..max_iter {
        // Update step.
        let mut sums = DMatrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, &c) in assignment.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += points.row(i);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let mean: RowDVector<f64> = sums.row(c) / counts[c] as f64;
                centroids.set_row(c, &mean);
                active[c] = true;
            }
        }
        // Re-seed empty clusters with the worst-fit point from a cluster
        // that can spare it. Fails only when every point sits on its centroid.
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let cand = (0..n)
                .filter(|&i| counts[assignment[i]] > 1)
                .map(|i| (i, sq_dist(points, i, &centroids, assignment[i])))
                .filter(|&(_, d)| d > 0.0)
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)));
            match cand {
                Some((i, _)) => {
                    counts[assignment[i]] -= 1;
                    counts[c] = 1;
                    centroids.set_row(c, &points.row(i));
                    active[c] = true;
                }
                None => active[c] = false,
            }
        }
        let (next, next_d) = assign(points, &centroids, &active);
        let next_obj: f64 = next_d.iter().sum();
        if next_obj > objective * (1.0 + 1e-12) + 1e-12 {
            return Err(Error::Numerical(format!("k-means objective increased from {objective} to {next_obj}")));
        }
        let changed = next != assignment;
        assignment = next;
        dists = next_d;
        objective = next_obj;
        if !changed {
            break;
        }
    }
    let _ = dists;
    let mut counts = vec![0usize; k];
    for &c in &assignment {
        counts[c] += 1;
    }
    Ok(Restart { degenerate: counts.contains(&0), assignment, centroids, objective })
}
