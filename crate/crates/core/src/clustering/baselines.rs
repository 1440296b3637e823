use nalgebra::DMatrix;

use super::casc::{casc_dc, cluster_matrix, ClusterConfig, ClusteringRun, PeriodDiagnostics};
use crate::error::{Error, Result};
use crate::sbm::{CovariateMatrix, DynamicNetwork, MembershipSeries};

fn replicate(fit: Result<super::casc::StaticFit>, n: usize, periods: usize, k: usize, extra_degenerate: bool) -> Result<ClusteringRun> {
    let (labels, diag) = match fit {
        Ok(f) => (
            f.labels,
            PeriodDiagnostics {
                t: 0,
                alpha: 0.0,
                r_hat: 0,
                nonzero_rows: f.nonzero_rows,
                objective: f.objective,
                degenerate: f.degenerate || extra_degenerate,
                failure: None,
            },
        ),
        Err(e) => {
            log::warn!("static clustering failed: {e}; falling back to a single label");
            (
                vec![0; n],
                PeriodDiagnostics {
                    t: 0,
                    alpha: 0.0,
                    r_hat: 0,
                    nonzero_rows: 0,
                    objective: f64::NAN,
                    degenerate: true,
                    failure: Some(e.to_string()),
                },
            )
        }
    };
    let periods_diag = (0..periods).map(|t| PeriodDiagnostics { t, ..diag.clone() }).collect();
    Ok(ClusteringRun { memberships: MembershipSeries::replicated(k, labels, periods)?, periods: periods_diag })
}

/// Static degree-corrected spectral clustering of `Σ_t A_t²` with its
/// diagonal removed and symmetric degree normalization. One labelling,
/// replicated over every period.
pub fn dsc_dc_baseline(net: &DynamicNetwork, cfg: &ClusterConfig) -> Result<ClusteringRun> {
    let n = net.nodes();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::Config(format!("K = {} is invalid for {n} nodes", cfg.k)));
    }
    let mut m = DMatrix::zeros(n, n);
    for a in net.slices() {
        m += a * a;
    }
    m.fill_diagonal(0.0);
    let inv: Vec<f64> = m.row_iter().map(|r| r.sum()).map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
    let normalized = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * inv[i] * inv[j]);
    let fit = cluster_matrix(&normalized, cfg.k, &cfg.kmeans("dsc-dc", 0));
    replicate(fit, n, net.periods(), cfg.k, false)
}

/// Dynamic spectral clustering of the smoothed regularized Laplacians
/// alone, i.e. the full pipeline with the covariate term disabled.
pub fn dsc_pz_baseline(net: &DynamicNetwork, cfg: &ClusterConfig) -> Result<ClusteringRun> {
    casc_dc(net, None, cfg)
}

/// Spectral clustering of `XXᵀ` only, replicated over `periods`. Flags the
/// run degenerate when `rank(X) < K`.
pub fn dsc_cw_baseline(x: &CovariateMatrix, periods: usize, cfg: &ClusterConfig) -> Result<ClusteringRun> {
    let n = x.nodes();
    if cfg.k == 0 || cfg.k > n {
        return Err(Error::Config(format!("K = {} is invalid for {n} nodes", cfg.k)));
    }
    let gram = x.values() * x.values().transpose();
    let rank_short = x.rank() < cfg.k;
    let fit = cluster_matrix(&gram, cfg.k, &cfg.kmeans("dsc-cw", 0));
    replicate(fit, n, periods, cfg.k, rank_short)
}
