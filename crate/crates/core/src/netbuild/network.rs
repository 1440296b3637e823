use std::ops::Range;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lasso::{adaptive_lasso_fit, LassoConfig};
use super::panel::ReturnPanel;
use crate::error::{Error, Result};
use crate::sbm::DynamicNetwork;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowMode {
    /// Fixed-length trailing window.
    Rolling,
    /// Window anchored at the first day.
    Expanding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetrize {
    /// Link if either regression selects the other asset.
    Or,
    /// Link only if both regressions select each other.
    And,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnNetworkConfig {
    pub window: usize,
    pub step: usize,
    pub mode: WindowMode,
    pub symmetrize: Symmetrize,
    pub lasso: LassoConfig,
}

impl Default for ReturnNetworkConfig {
    fn default() -> Self {
        Self { window: 60, step: 1, mode: WindowMode::Rolling, symmetrize: Symmetrize::Or, lasso: LassoConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitFailure {
    pub t: usize,
    pub asset: usize,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct ReturnNetwork {
    pub network: DynamicNetwork,
    /// Last day (inclusive) of each period's window.
    pub period_end_dates: Vec<NaiveDate>,
    pub windows: Vec<Range<usize>>,
    /// Failed fits; those assets are isolated in that period.
    pub failures: Vec<FitFailure>,
}

/// Estimation windows implied by `cfg` over `days` observations.
pub fn period_windows(days: usize, cfg: &ReturnNetworkConfig) -> Result<Vec<Range<usize>>> {
    if cfg.window < cfg.lasso.min_window {
        return Err(Error::Config(format!("window {} is shorter than the minimum {}", cfg.window, cfg.lasso.min_window)));
    }
    if cfg.step == 0 {
        return Err(Error::Config("step must be at least one day".into()));
    }
    if days < cfg.window {
        return Err(Error::Config(format!("panel has {days} days but the first window needs {}", cfg.window)));
    }
    Ok((cfg.window - 1..days)
        .step_by(cfg.step)
        .map(|end| match cfg.mode {
            WindowMode::Rolling => end + 1 - cfg.window..end + 1,
            WindowMode::Expanding => 0..end + 1,
        })
        .collect())
}

/// Rolling adaptive-Lasso networks: in every window each asset is regressed
/// on all others and selected predictors become neighbours.
pub fn return_network(panel: &ReturnPanel, cfg: &ReturnNetworkConfig) -> Result<ReturnNetwork> {
    let windows = period_windows(panel.days(), cfg)?;
    let n = panel.n_assets();
    let mut failures = Vec::new();
    let mut adjacency = Vec::with_capacity(windows.len());
    for (t, window) in windows.iter().enumerate() {
        let fits: Vec<_> = (0..n).into_par_iter().map(|a| adaptive_lasso_fit(panel, a, window.clone(), &cfg.lasso)).collect();
        let mut directed = DMatrix::<f64>::zeros(n, n);
        let mut failed = vec![false; n];
        for (a, fit) in fits.into_iter().enumerate() {
            match fit {
                Ok(f) => {
                    for &j in &f.selected {
                        directed[(a, j)] = 1.0;
                    }
                }
                Err(e) => {
                    failed[a] = true;
                    failures.push(FitFailure { t, asset: a, reason: e.to_string() });
                }
            }
        }
        let mut a = match cfg.symmetrize {
            Symmetrize::Or => directed.zip_map(&directed.transpose(), f64::max),
            Symmetrize::And => directed.zip_map(&directed.transpose(), f64::min),
        };
        for (i, &f) in failed.iter().enumerate() {
            if f {
                a.row_mut(i).fill(0.0);
                a.column_mut(i).fill(0.0);
            }
        }
        a.fill_diagonal(0.0);
        adjacency.push(a);
    }
    if !failures.is_empty() {
        log::warn!("{} asset fits failed and were isolated", failures.len());
    }
    let period_end_dates = windows.iter().map(|w| panel.dates()[w.end - 1]).collect();
    let network = DynamicNetwork::new(panel.assets().to_vec(), adjacency)?;
    Ok(ReturnNetwork { network, period_end_dates, windows, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_layout() {
        let cfg = ReturnNetworkConfig { window: 60, step: 10, ..Default::default() };
        let w = period_windows(85, &cfg).unwrap();
        assert_eq!(w, vec![0..60, 10..70, 20..80]);
        let exp = ReturnNetworkConfig { mode: WindowMode::Expanding, ..cfg.clone() };
        assert_eq!(period_windows(85, &exp).unwrap(), vec![0..60, 0..70, 0..80]);
        assert!(period_windows(59, &cfg).is_err());
        let short = ReturnNetworkConfig { window: 30, ..cfg };
        assert!(period_windows(100, &short).is_err());
    }
}
