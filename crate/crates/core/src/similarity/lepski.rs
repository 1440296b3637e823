use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::kernel::{kernel_weights, smoothed_similarity, EdgePolicy};
use crate::error::{Error, Result};
use crate::linalg;

pub const POWER_TOL: f64 = 1e-8;
pub const POWER_MAX_ITER: usize = 1000;

/// Matrix norm used for the deviation test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    #[default]
    Spectral,
    Frobenius,
}

impl NormKind {
    pub fn apply(self, m: &DMatrix<f64>) -> f64 {
        match self {
            NormKind::Spectral => linalg::spectral_norm(m, POWER_TOL, POWER_MAX_ITER),
            NormKind::Frobenius => linalg::frobenius_norm(m),
        }
    }
}

/// Lepski bandwidth: the largest `r ≤ r_max` such that every smaller
/// bandwidth `ρ < r` satisfies
/// `‖Ŝ_r − Ŝ_ρ‖ ≤ 4·W_max(r)·√(N·‖S_t‖_∞ / max(ρ, 1))`.
///
/// `‖S_t‖_∞` is the largest absolute entry of the observed similarity at `t`.
pub fn lepski_bandwidth(series: &[DMatrix<f64>], t: usize, order: usize, r_max: usize, norm: NormKind) -> Result<usize> {
    if t >= series.len() {
        return Err(Error::Range { index: t, reason: format!("series has {} periods", series.len()) });
    }
    let cap = t.min(series.len() / 2);
    if r_max > cap {
        return Err(Error::Range {
            index: r_max,
            reason: format!("bandwidth cap at t={t} with T={} is {cap}", series.len()),
        });
    }
    let n = series[t].nrows() as f64;
    let sup = linalg::max_abs(&series[t]);
    let mut estimates = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        estimates.push(smoothed_similarity(series, t, &kernel_weights(r, order), EdgePolicy::Strict)?);
    }
    for r in 1..=r_max {
        let w_max = kernel_weights(r, order).w_max();
        for rho in 0..r {
            let threshold = 4.0 * w_max * (n * sup / rho.max(1) as f64).sqrt();
            let dev = norm.apply(&(&estimates[r] - &estimates[rho]));
            if dev > threshold {
                return Ok(r - 1);
            }
        }
    }
    Ok(r_max)
}
