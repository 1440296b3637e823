//! Two-stage adaptive Lasso on window-standardized returns.
//!
//! Stage one is a ridge pilot `b̃`; stage two solves
//! `min ‖y − Xb‖² + λ Σ_j ŵ_j |b_j|` with `ŵ_j = 1/(|b̃_j|^γ + 1e-8)` by
//! cyclic coordinate descent along a decreasing λ path.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::panel::ReturnPanel;
use crate::error::{Error, Result};

/// Minimum admissible estimation window, in observations.
pub const MIN_WINDOW: usize = 60;

/// Coefficients below this magnitude are not considered selected.
pub const SELECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LambdaSelection {
    Bic,
    /// Contiguous-block cross-validation.
    Cv { folds: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LassoConfig {
    /// Ridge penalty as a multiple of `trace(XᵀX)/p`.
    pub ridge_scale: f64,
    pub gamma: f64,
    pub weight_floor: f64,
    pub tol: f64,
    pub max_sweeps: usize,
    pub n_lambda: usize,
    /// Smallest grid value as a fraction of `λ_max`.
    pub lambda_min_ratio: f64,
    pub selection: LambdaSelection,
    /// Replaces the automatic grid when set.
    pub lambda_grid: Option<Vec<f64>>,
    pub min_window: usize,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            ridge_scale: 1e-3,
            gamma: 1.0,
            weight_floor: 1e-8,
            tol: 1e-7,
            max_sweeps: 10_000,
            n_lambda: 50,
            lambda_min_ratio: 1e-3,
            selection: LambdaSelection::Bic,
            lambda_grid: None,
            min_window: MIN_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LassoFit {
    pub target: usize,
    /// Asset index of each coefficient (every asset except the target).
    pub predictors: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub lambda: f64,
    /// Asset indices with `|b_j| > 1e-10`.
    pub selected: Vec<usize>,
    /// Adaptive penalty weights; `None` for predictors not usable in the window.
    pub weights: Vec<Option<f64>>,
    /// Residual sum of squares in standardized units.
    pub rss: f64,
    pub degenerate: bool,
}

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Weighted-L1 coordinate descent, warm-started from `beta`.
pub(crate) fn coordinate_descent(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    weights: &[f64],
    lambda: f64,
    beta: &mut DVector<f64>,
    tol: f64,
    max_sweeps: usize,
) -> Result<()> {
    let p = x.ncols();
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared()).collect();
    let mut resid = y - x * &*beta;
    for _ in 0..max_sweeps {
        let mut max_delta = 0.0_f64;
        for j in 0..p {
            if col_sq[j] == 0.0 {
                beta[j] = 0.0;
                continue;
            }
            let old = beta[j];
            let rho = x.column(j).dot(&resid) + col_sq[j] * old;
            let new = soft_threshold(rho, 0.5 * lambda * weights[j]) / col_sq[j];
            if new != old {
                resid.axpy(old - new, &x.column(j), 1.0);
                beta[j] = new;
                max_delta = max_delta.max((new - old).abs());
            }
        }
        if max_delta < tol {
            return Ok(());
        }
    }
    Err(Error::Numerical(format!("coordinate descent did not reach tolerance {tol} in {max_sweeps} sweeps")))
}

fn ridge(x: &DMatrix<f64>, y: &DVector<f64>, scale: f64) -> Result<DVector<f64>> {
    let p = x.ncols();
    let gram = x.transpose() * x;
    let penalty = scale * gram.trace() / p as f64;
    let penalty = if penalty > 0.0 { penalty } else { scale };
    let lhs = gram + DMatrix::identity(p, p) * penalty;
    let rhs = x.transpose() * y;
    lhs.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::Numerical("ridge system is not positive definite".into()))
}

/// The solution path and chosen λ for one standardized design.
struct PathFit {
    beta: DVector<f64>,
    lambda: f64,
    rss: f64,
}

fn lambda_grid(x: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64], cfg: &LassoConfig) -> Vec<f64> {
    if let Some(g) = &cfg.lambda_grid {
        let mut g = g.clone();
        g.sort_by(|a, b| b.total_cmp(a));
        return g;
    }
    let xty = x.transpose() * y;
    let lambda_max = (0..x.ncols()).map(|j| 2.0 * xty[j].abs() / weights[j]).fold(0.0, f64::max);
    if lambda_max == 0.0 {
        return vec![0.0];
    }
    let m = cfg.n_lambda.max(1);
    (0..m)
        .map(|i| {
            let frac = if m == 1 { 0.0 } else { i as f64 / (m - 1) as f64 };
            lambda_max * cfg.lambda_min_ratio.powf(frac)
        })
        .collect()
}

fn bic(n: usize, rss: f64, df: usize) -> f64 {
    let n = n as f64;
    n * (rss / n).max(1e-300).ln() + df as f64 * n.ln()
}

fn fit_path(x: &DMatrix<f64>, y: &DVector<f64>, weights: &[f64], cfg: &LassoConfig) -> Result<PathFit> {
    let grid = lambda_grid(x, y, weights, cfg);
    let n = x.nrows();
    let p = x.ncols();
    match cfg.selection {
        LambdaSelection::Bic => {
            let mut beta = DVector::zeros(p);
            let mut best: Option<(f64, PathFit)> = None;
            for &lambda in &grid {
                coordinate_descent(x, y, weights, lambda, &mut beta, cfg.tol, cfg.max_sweeps)?;
                let rss = (y - x * &beta).norm_squared();
                let df = beta.iter().filter(|b| b.abs() > SELECTION_TOL).count();
                let score = bic(n, rss, df);
                // Strict improvement only: ties keep the larger λ.
                if best.as_ref().is_none_or(|(s, _)| score < *s) {
                    best = Some((score, PathFit { beta: beta.clone(), lambda, rss }));
                }
            }
            Ok(best.expect("non-empty grid").1)
        }
        LambdaSelection::Cv { folds } => {
            let folds = folds.clamp(2, n);
            let mut errors = vec![0.0; grid.len()];
            for f in 0..folds {
                let test: Vec<usize> = (0..n).filter(|i| i * folds / n == f).collect();
                let train: Vec<usize> = (0..n).filter(|i| i * folds / n != f).collect();
                let xt = x.select_rows(&train);
                let yt = y.select_rows(&train);
                let xv = x.select_rows(&test);
                let yv = y.select_rows(&test);
                let mut beta = DVector::zeros(p);
                for (g, &lambda) in grid.iter().enumerate() {
                    coordinate_descent(&xt, &yt, weights, lambda, &mut beta, cfg.tol, cfg.max_sweeps)?;
                    errors[g] += (&yv - &xv * &beta).norm_squared();
                }
            }
            let (g, _) = errors
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .expect("non-empty grid");
            let mut beta = DVector::zeros(p);
            for &lambda in &grid[..=g] {
                coordinate_descent(x, y, weights, lambda, &mut beta, cfg.tol, cfg.max_sweeps)?;
            }
            let rss = (y - x * &beta).norm_squared();
            Ok(PathFit { beta, lambda: grid[g], rss })
        }
    }
}

/// Adaptive Lasso regression of one asset's standardized returns on every
/// other asset's standardized returns inside `window`.
pub fn adaptive_lasso_fit(panel: &ReturnPanel, target: usize, window: Range<usize>, cfg: &LassoConfig) -> Result<LassoFit> {
    let n_assets = panel.n_assets();
    if target >= n_assets {
        return Err(Error::Range { index: target, reason: format!("panel has {n_assets} assets") });
    }
    if window.end > panel.days() || window.start >= window.end {
        return Err(Error::Range { index: window.end, reason: format!("window outside {} days", panel.days()) });
    }
    if window.len() < cfg.min_window {
        return Err(Error::Config(format!("window of {} observations is shorter than {}", window.len(), cfg.min_window)));
    }
    if !panel.is_active_over(target, &window) {
        return Err(Error::InvalidInput(format!("target asset {} is not active over the window", panel.assets()[target])));
    }
    let std = panel.standardized(&window);
    let predictors: Vec<usize> = (0..n_assets).filter(|&j| j != target).collect();
    let usable: Vec<usize> = predictors.iter().copied().filter(|&j| std.active[j] && std.sds[j] > 0.0).collect();

    let empty = |intercept: f64| LassoFit {
        target,
        predictors: predictors.clone(),
        coefficients: vec![0.0; predictors.len()],
        intercept,
        lambda: 0.0,
        selected: vec![],
        weights: vec![None; predictors.len()],
        rss: 0.0,
        degenerate: true,
    };
    if std.sds[target] == 0.0 {
        return Ok(empty(std.means[target]));
    }
    if usable.is_empty() {
        let mut fit = empty(0.0);
        fit.rss = (window.len() - 1) as f64;
        return Ok(fit);
    }

    let y = DVector::from_iterator(window.len(), std.data.column(target).iter().copied());
    let x = std.data.select_columns(&usable);
    let pilot = ridge(&x, &y, cfg.ridge_scale)?;
    let weights: Vec<f64> = pilot.iter().map(|b| 1.0 / (b.abs().powf(cfg.gamma) + cfg.weight_floor)).collect();
    let path = fit_path(&x, &y, &weights, cfg)?;

    let mut coefficients = vec![0.0; predictors.len()];
    let mut all_weights = vec![None; predictors.len()];
    for (u, &asset) in usable.iter().enumerate() {
        let slot = predictors.iter().position(|&p| p == asset).expect("usable ⊂ predictors");
        coefficients[slot] = path.beta[u];
        all_weights[slot] = Some(weights[u]);
    }
    // Columns are centered, so the intercept of the standardized model is
    // mean(y) − Σ b·mean(x), both means being zero up to rounding.
    let y_mean = y.mean();
    let x_means: Vec<f64> = (0..x.ncols()).map(|j| x.column(j).mean()).collect();
    let intercept = y_mean - path.beta.iter().zip(&x_means).map(|(b, m)| b * m).sum::<f64>();
    let selected = predictors
        .iter()
        .zip(&coefficients)
        .filter(|(_, c)| c.abs() > SELECTION_TOL)
        .map(|(&p, _)| p)
        .collect();
    Ok(LassoFit {
        target,
        predictors,
        coefficients,
        intercept,
        lambda: path.lambda,
        selected,
        weights: all_weights,
        rss: path.rss,
        degenerate: false,
    })
}
