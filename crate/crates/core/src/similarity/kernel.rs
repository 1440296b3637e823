use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Discrete one-sided boundary kernel on the trailing window `F_r = {-r,…,0}`.
///
/// The weights are the polynomial `W(i) = Σ_{m≤l'} a_m i^m`, `l' = min(l, r)`,
/// whose first `l'` moments over the window vanish and whose mean is one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KernelWeights {
    order: usize,
    effective_order: usize,
    radius: usize,
    /// `weights[p]` is `W(p - r)`.
    weights: Vec<f64>,
    w_max: f64,
}

impl KernelWeights {
    pub fn new(radius: usize, order: usize) -> Self {
        let effective_order = order.min(radius);
        if effective_order < order {
            log::debug!("kernel order {order} truncated to {effective_order} for radius {radius}");
        }
        let len = radius + 1;
        let cols = effective_order + 1;
        // Work on u = i / r ∈ [-1, 0]; the moment system is equivalent after
        // dividing the k-th equation by r^k and is far better conditioned.
        let scale = radius.max(1) as f64;
        let vander = DMatrix::from_fn(len, cols, |p, m| ((p as f64 - radius as f64) / scale).powi(m as i32));
        let qr = vander.qr();
        let q = qr.q();
        let r = qr.r();
        // Solve Rᵀc = |F|·e₀ (forward substitution), then W = Qc.
        let mut c = DVector::zeros(cols);
        for m in 0..cols {
            let rhs = if m == 0 { len as f64 } else { 0.0 };
            let acc: f64 = (0..m).map(|j| r[(j, m)] * c[j]).sum();
            c[m] = (rhs - acc) / r[(m, m)];
        }
        let w = q * c;
        let weights: Vec<f64> = w.iter().copied().collect();
        let w_max = weights.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Self { order, effective_order, radius, weights, w_max }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn effective_order(&self) -> usize {
        self.effective_order
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Weight at offset `i ∈ {-r,…,0}`.
    pub fn weight(&self, offset: i64) -> f64 {
        let p = offset + self.radius as i64;
        assert!((0..=self.radius as i64).contains(&p), "offset {offset} outside window");
        self.weights[p as usize]
    }

    /// `(offset, weight)` pairs from `-r` to `0`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(p, &w)| (p as i64 - self.radius as i64, w))
    }

    /// `(1/|F_r|) Σ i^k W(i)`.
    pub fn moment(&self, k: u32) -> f64 {
        let s: f64 = self.iter().map(|(i, w)| (i as f64).powi(k as i32) * w).sum();
        s / (self.radius + 1) as f64
    }

    /// `(1/|F_r|) Σ (i/r)^k W(i)`, the k-th moment in window-relative time.
    pub fn scaled_moment(&self, k: u32) -> f64 {
        let scale = self.radius.max(1) as f64;
        let s: f64 = self.iter().map(|(i, w)| (i as f64 / scale).powi(k as i32) * w).sum();
        s / (self.radius + 1) as f64
    }
}

pub fn kernel_weights(radius: usize, order: usize) -> KernelWeights {
    KernelWeights::new(radius, order)
}

/// What to do when the window reaches before the first period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgePolicy {
    /// Shrink the radius to the available history and rebuild the weights.
    #[default]
    Shrink,
    Strict,
}

/// `Ŝ_{t,r} = (1/|F_r|) Σ_{i∈F_r} W(i) S_{t+i}`.
pub fn smoothed_similarity(
    series: &[DMatrix<f64>],
    t: usize,
    kernel: &KernelWeights,
    policy: EdgePolicy,
) -> Result<DMatrix<f64>> {
    if t >= series.len() {
        return Err(Error::Range { index: t, reason: format!("series has {} periods", series.len()) });
    }
    let shrunk;
    let kernel = if t < kernel.radius() {
        match policy {
            EdgePolicy::Strict => {
                return Err(Error::Range {
                    index: t,
                    reason: format!("radius {} needs {} periods of history", kernel.radius(), kernel.radius()),
                })
            }
            EdgePolicy::Shrink => {
                shrunk = KernelWeights::new(t, kernel.order());
                &shrunk
            }
        }
    } else {
        kernel
    };
    let n = series[t].nrows();
    let mut out = DMatrix::zeros(n, series[t].ncols());
    for (offset, w) in kernel.iter() {
        let s = &series[(t as i64 + offset) as usize];
        if s.shape() != out.shape() {
            return Err(Error::dims("similarity series", format!("{:?}", out.shape()), format!("{:?}", s.shape())));
        }
        out.zip_apply(s, |o, v| *o += w * v);
    }
    out /= (kernel.radius() + 1) as f64;
    Ok(out)
}
