use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Rows with Euclidean norm at or below this are treated as zero.
pub const ZERO_ROW_TOL: f64 = 1e-12;

/// Top-K eigenvectors of a similarity matrix and their row-normalized
/// nonzero rows.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    vectors: DMatrix<f64>,
    eigenvalues: Vec<f64>,
    nonzero_rows: Vec<usize>,
    normalized: DMatrix<f64>,
}

impl SpectralEmbedding {
    /// Wraps an `N×K` eigenvector block, normalizing its nonzero rows.
    pub fn from_vectors(vectors: DMatrix<f64>, eigenvalues: Vec<f64>) -> Self {
        let k = vectors.ncols();
        let norms: Vec<f64> = vectors.row_iter().map(|r| r.norm()).collect();
        let nonzero_rows: Vec<usize> = (0..vectors.nrows()).filter(|&i| norms[i] > ZERO_ROW_TOL).collect();
        let normalized = DMatrix::from_fn(nonzero_rows.len(), k, |p, j| {
            let i = nonzero_rows[p];
            vectors[(i, j)] / norms[i]
        });
        Self { vectors, eigenvalues, nonzero_rows, normalized }
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn nonzero_rows(&self) -> &[usize] {
        &self.nonzero_rows
    }

    /// `U⁺`: the `N₊×K` row-normalized submatrix.
    pub fn normalized(&self) -> &DMatrix<f64> {
        &self.normalized
    }

    pub fn nodes(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn k(&self) -> usize {
        self.vectors.ncols()
    }
}

/// Eigenvectors of the `k` largest-magnitude eigenvalues of a symmetric matrix.
pub fn spectral_embed(s: &DMatrix<f64>, k: usize) -> Result<SpectralEmbedding> {
    let n = s.nrows();
    if k == 0 || k > n {
        return Err(Error::Config(format!("cannot embed {n} nodes into {k} dimensions")));
    }
    let scale = linalg::max_abs(s).max(1.0);
    if !linalg::is_symmetric(s, 1e-10 * scale) {
        return Err(Error::InvalidInput("similarity matrix must be symmetric".into()));
    }
    let eig = linalg::top_k_by_magnitude(s, k)?;
    let mut vectors = eig.vectors;
    linalg::fix_signs(&mut vectors);
    Ok(SpectralEmbedding::from_vectors(vectors, eig.values))
}
