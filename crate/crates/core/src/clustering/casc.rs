use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::embed::spectral_embed;
use super::kmeans::{spherical_kmeans, KMeansOptions};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sbm::{CovariateMatrix, DynamicNetwork, MembershipSeries};
use crate::similarity::{build_series, kernel_weights, lepski_bandwidth, smoothed_similarity, EdgePolicy, NormKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub k: usize,
    pub eps: f64,
    /// Polynomial order `l` of the boundary kernel.
    pub kernel_order: usize,
    pub restarts: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub norm: NormKind,
    /// Optional extra cap on the Lepski bandwidth search.
    pub max_bandwidth: Option<usize>,
}

impl ClusterConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, eps: 0.01, kernel_order: 4, restarts: 20, max_iter: 300, seed, norm: NormKind::Spectral, max_bandwidth: None }
    }

    pub(crate) fn kmeans(&self, tag: &str, t: usize) -> KMeansOptions {
        KMeansOptions {
            eps: self.eps,
            restarts: self.restarts,
            max_iter: self.max_iter,
            seed: derive_seed(self.seed, tag, t as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodDiagnostics {
    pub t: usize,
    pub alpha: f64,
    pub r_hat: usize,
    pub nonzero_rows: usize,
    pub objective: f64,
    pub degenerate: bool,
    /// Set when the period fell back to the all-label-1 assignment.
    pub failure: Option<String>,
}

#[derive(Debug, Clone)]
pub struct ClusteringRun {
    pub memberships: MembershipSeries,
    pub periods: Vec<PeriodDiagnostics>,
}

impl ClusteringRun {
    pub fn r_hats(&self) -> Vec<usize> {
        self.periods.iter().map(|p| p.r_hat).collect()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.periods.iter().map(|p| p.alpha).collect()
    }

    pub fn any_failure(&self) -> bool {
        self.periods.iter().any(|p| p.failure.is_some())
    }
}

pub(crate) struct StaticFit {
    pub labels: Vec<usize>,
    pub nonzero_rows: usize,
    pub objective: f64,
    pub degenerate: bool,
}

/// Embeds one similarity matrix, clusters its normalized nonzero rows and
/// gives every zero row label 0. Nodes whose similarity row is identically
/// zero are left out of the eigenproblem, since a null spectrum would
/// otherwise hand them arbitrary basis vectors.
pub(crate) fn cluster_matrix(s: &DMatrix<f64>, k: usize, opts: &KMeansOptions) -> Result<StaticFit> {
    let active: Vec<usize> = (0..s.nrows()).filter(|&i| s.row(i).iter().any(|&v| v != 0.0)).collect();
    if active.len() < k {
        return Err(Error::Infeasible { nonzero_rows: active.len(), k });
    }
    let sub = s.select_rows(&active).select_columns(&active);
    let emb = spectral_embed(&sub, k)?;
    let km = spherical_kmeans(&emb, k, opts)?;
    let mut labels = vec![0; s.nrows()];
    for (p, &i) in emb.nonzero_rows().iter().enumerate() {
        labels[active[i]] = km.assignment[p];
    }
    Ok(StaticFit { labels, nonzero_rows: emb.nonzero_rows().len(), objective: km.objective, degenerate: km.degenerate })
}

/// Smooths, embeds and clusters a precomputed similarity sequence. Periods
/// that fail are flagged and fall back to label 0 for every node.
pub fn cluster_similarity_series(similarities: &[DMatrix<f64>], alphas: &[f64], cfg: &ClusterConfig) -> Result<ClusteringRun> {
    let periods = similarities.len();
    if periods == 0 {
        return Err(Error::Config("no periods to cluster".into()));
    }
    if alphas.len() != periods {
        return Err(Error::dims("alpha series", periods, alphas.len()));
    }
    let n = similarities[0].nrows();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::Config(format!("K = {} is invalid for {n} nodes", cfg.k)));
    }
    let results: Vec<(Vec<usize>, PeriodDiagnostics)> = (0..periods)
        .into_par_iter()
        .map(|t| {
            let mut cap = t.min(periods / 2);
            if let Some(m) = cfg.max_bandwidth {
                cap = cap.min(m);
            }
            let attempt = || -> Result<(usize, StaticFit)> {
                let r_hat = lepski_bandwidth(similarities, t, cfg.kernel_order, cap, cfg.norm)?;
                let kernel = kernel_weights(r_hat, cfg.kernel_order);
                let smoothed = smoothed_similarity(similarities, t, &kernel, EdgePolicy::Strict)?;
                let smoothed = (&smoothed + smoothed.transpose()) * 0.5;
                Ok((r_hat, cluster_matrix(&smoothed, cfg.k, &cfg.kmeans("period", t))?))
            };
            match attempt() {
                Ok((r_hat, fit)) => (
                    fit.labels,
                    PeriodDiagnostics {
                        t,
                        alpha: alphas[t],
                        r_hat,
                        nonzero_rows: fit.nonzero_rows,
                        objective: fit.objective,
                        degenerate: fit.degenerate,
                        failure: None,
                    },
                ),
                Err(e) => {
                    log::warn!("period {t}: {e}; falling back to a single label");
                    (
                        vec![0; n],
                        PeriodDiagnostics {
                            t,
                            alpha: alphas[t],
                            r_hat: 0,
                            nonzero_rows: 0,
                            objective: f64::NAN,
                            degenerate: true,
                            failure: Some(e.to_string()),
                        },
                    )
                }
            }
        })
        .collect();
    let (labels, diags): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(ClusteringRun { memberships: MembershipSeries::new(cfg.k, labels)?, periods: diags })
}

/// Dynamic covariate-assisted spectral clustering.
///
/// Per period: regularized Laplacian plus α-weighted covariate term, Lepski
/// bandwidth, boundary-kernel smoothing, top-K embedding, spherical k-means.
/// `covariates = None` disables the covariate term.
pub fn casc_dc(net: &DynamicNetwork, covariates: Option<&CovariateMatrix>, cfg: &ClusterConfig) -> Result<ClusteringRun> {
    let series = build_series(net, covariates, cfg.k)?;
    cluster_similarity_series(series.similarities(), series.alphas(), cfg)
}
