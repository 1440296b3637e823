//! Per-period similarity matrices `S_t = L_τ,t + α_t·C^w_t` and their
//! temporal smoothing.

mod kernel;
mod lepski;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg;
use crate::sbm::{CovariateMatrix, DynamicNetwork};

pub use kernel::{kernel_weights, smoothed_similarity, EdgePolicy, KernelWeights};
pub use lepski::{lepski_bandwidth, NormKind, POWER_MAX_ITER, POWER_TOL};

/// Degree-regularized Laplacian of one adjacency slice.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedLaplacian {
    pub matrix: DMatrix<f64>,
    /// Mean degree, added to every degree before normalizing.
    pub tau: f64,
    /// Set when the graph has no edges.
    pub degenerate: bool,
}

/// `L = (D+τI)^{-1/2} A (D+τI)^{-1/2}` with `τ` the average degree.
pub fn regularized_laplacian(a: &DMatrix<f64>) -> Result<RegularizedLaplacian> {
    if !a.is_square() {
        return Err(Error::dims("adjacency", "square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }
    let n = a.nrows();
    if !linalg::is_symmetric(a, 0.0) {
        return Err(Error::InvalidInput("adjacency must be symmetric".into()));
    }
    let degrees: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let tau = if n == 0 { 0.0 } else { degrees.iter().sum::<f64>() / n as f64 };
    if tau == 0.0 {
        return Ok(RegularizedLaplacian { matrix: DMatrix::zeros(n, n), tau: 0.0, degenerate: true });
    }
    let inv: Vec<f64> = degrees.iter().map(|d| 1.0 / (d + tau).sqrt()).collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv[i] * inv[j]);
    Ok(RegularizedLaplacian { matrix, tau, degenerate: false })
}

/// `W = XᵀLX` and `C^w = XWXᵀ`.
pub fn covariate_component(x: &CovariateMatrix, laplacian: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if laplacian.nrows() != x.nodes() || laplacian.ncols() != x.nodes() {
        return Err(Error::dims(
            "covariate component",
            format!("{0}x{0} Laplacian", x.nodes()),
            format!("{}x{}", laplacian.nrows(), laplacian.ncols()),
        ));
    }
    let xv = x.values();
    let w = xv.transpose() * laplacian * xv;
    let w = (&w + w.transpose()) * 0.5;
    let cw = xv * &w * xv.transpose();
    let cw = (&cw + cw.transpose()) * 0.5;
    Ok((w, cw))
}

/// `α = (λ_K(L) − λ_{K+1}(L)) / |λ|₁(C^w)`, clamped at zero; zero when `C^w = 0`.
///
/// `laplacian_spectrum` must be sorted by descending algebraic value and
/// `covariate_scale` is the largest absolute eigenvalue of `C^w`.
pub fn alpha_from_spectra(laplacian_spectrum: &[f64], covariate_scale: f64, k: usize) -> Result<f64> {
    let n = laplacian_spectrum.len();
    if k == 0 || k >= n {
        return Err(Error::Config(format!("alpha tuning needs 1 <= K < N, got K = {k}, N = {n}")));
    }
    if covariate_scale == 0.0 {
        return Ok(0.0);
    }
    let gap = laplacian_spectrum[k - 1] - laplacian_spectrum[k];
    Ok((gap / covariate_scale).max(0.0))
}

pub fn tune_alpha(laplacian: &DMatrix<f64>, cw: &DMatrix<f64>, k: usize) -> Result<f64> {
    if laplacian.shape() != cw.shape() {
        return Err(Error::dims("tune_alpha", format!("{:?}", laplacian.shape()), format!("{:?}", cw.shape())));
    }
    if k == 0 || k >= laplacian.nrows() {
        return Err(Error::Config(format!("alpha tuning needs 1 <= K < N, got K = {k}, N = {}", laplacian.nrows())));
    }
    let spectrum = linalg::symmetric_eigenvalues(laplacian)?;
    let scale = largest_abs_eigenvalue(cw)?;
    alpha_from_spectra(&spectrum, scale, k)
}

fn largest_abs_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    if m.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let vals = linalg::symmetric_eigenvalues(m)?;
    Ok(vals.iter().fold(0.0_f64, |a, v| a.max(v.abs())))
}

/// Everything computed per period before smoothing. Write-once.
#[derive(Debug, Clone)]
pub struct SimilaritySeries {
    k: usize,
    laplacians: Vec<DMatrix<f64>>,
    taus: Vec<f64>,
    degenerate: Vec<bool>,
    weight_matrices: Vec<DMatrix<f64>>,
    covariate_components: Vec<DMatrix<f64>>,
    alphas: Vec<f64>,
    similarities: Vec<DMatrix<f64>>,
    laplacian_spectra: Vec<Vec<f64>>,
    covariate_scales: Vec<f64>,
}

struct Period {
    lap: RegularizedLaplacian,
    w: DMatrix<f64>,
    cw: DMatrix<f64>,
    alpha: f64,
    spectrum: Vec<f64>,
    scale: f64,
}

/// Builds `L_τ,t`, `W_t`, `C^w_t`, `α_t` and `S_t` for every period.
/// With `covariates = None` the covariate term is absent and `S_t = L_τ,t`.
pub fn build_series(net: &DynamicNetwork, covariates: Option<&CovariateMatrix>, k: usize) -> Result<SimilaritySeries> {
    let n = net.nodes();
    if k == 0 {
        return Err(Error::Config("K must be at least 1".into()));
    }
    if let Some(x) = covariates {
        if x.nodes() != n {
            return Err(Error::dims("covariate rows", n, x.nodes()));
        }
    }
    let periods: Vec<Period> = net
        .slices()
        .par_iter()
        .map(|a| -> Result<Period> {
            let lap = regularized_laplacian(a)?;
            let spectrum = linalg::symmetric_eigenvalues(&lap.matrix)?;
            let (w, cw) = match covariates {
                Some(x) => covariate_component(x, &lap.matrix)?,
                None => (DMatrix::zeros(0, 0), DMatrix::zeros(n, n)),
            };
            let scale = largest_abs_eigenvalue(&cw)?;
            // No eigengap exists when K ≥ N; the covariate term is dropped.
            let alpha = if k < n { alpha_from_spectra(&spectrum, scale, k)? } else { 0.0 };
            Ok(Period { lap, w, cw, alpha, spectrum, scale })
        })
        .collect::<Result<_>>()?;

    let mut series = SimilaritySeries {
        k,
        laplacians: Vec::with_capacity(periods.len()),
        taus: Vec::with_capacity(periods.len()),
        degenerate: Vec::with_capacity(periods.len()),
        weight_matrices: Vec::with_capacity(periods.len()),
        covariate_components: Vec::with_capacity(periods.len()),
        alphas: Vec::with_capacity(periods.len()),
        similarities: Vec::with_capacity(periods.len()),
        laplacian_spectra: Vec::with_capacity(periods.len()),
        covariate_scales: Vec::with_capacity(periods.len()),
    };
    for p in periods {
        let s = &p.lap.matrix + &p.cw * p.alpha;
        series.similarities.push(s);
        series.taus.push(p.lap.tau);
        series.degenerate.push(p.lap.degenerate);
        series.laplacians.push(p.lap.matrix);
        series.weight_matrices.push(p.w);
        series.covariate_components.push(p.cw);
        series.alphas.push(p.alpha);
        series.laplacian_spectra.push(p.spectrum);
        series.covariate_scales.push(p.scale);
    }
    Ok(series)
}

impl SimilaritySeries {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn periods(&self) -> usize {
        self.similarities.len()
    }

    pub fn similarities(&self) -> &[DMatrix<f64>] {
        &self.similarities
    }

    pub fn laplacians(&self) -> &[DMatrix<f64>] {
        &self.laplacians
    }

    pub fn covariate_components(&self) -> &[DMatrix<f64>] {
        &self.covariate_components
    }

    pub fn weight_matrices(&self) -> &[DMatrix<f64>] {
        &self.weight_matrices
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn degenerate(&self) -> &[bool] {
        &self.degenerate
    }

    /// Eigenvalues of `L_τ,t`, descending.
    pub fn laplacian_spectrum(&self, t: usize) -> &[f64] {
        &self.laplacian_spectra[t]
    }

    /// Largest absolute eigenvalue of `C^w_t`.
    pub fn covariate_scale(&self, t: usize) -> f64 {
        self.covariate_scales[t]
    }
}
