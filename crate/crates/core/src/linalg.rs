//! Dense symmetric eigen-solvers and norm helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Matrices up to this order go through the full dense decomposition.
pub const DENSE_LIMIT: usize = 2000;

const EIGEN_MAX_ITER: usize = 10_000;

/// Eigen-pairs of a symmetric matrix; `values[j]` pairs with column `j` of `vectors`.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > tol {
                return false;
            }
        }
    }
    true
}

fn check_square(m: &DMatrix<f64>, context: &'static str) -> Result<()> {
    if !m.is_square() {
        return Err(Error::dims(context, "square matrix", format!("{}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

/// Full decomposition, eigenvalues sorted by descending algebraic value.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<SymEigen> {
    check_square(m, "symmetric_eigen")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(SymEigen { values: vec![], vectors: DMatrix::zeros(0, 0) });
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_ITER).ok_or_else(|| {
        Error::Numerical(format!(
            "symmetric QR did not converge within {EIGEN_MAX_ITER} iterations (n = {n})"
        ))
    })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    Ok(reorder(&eig.eigenvalues, &eig.eigenvectors, &order))
}

/// Eigenvalues only, descending algebraic order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_square(m, "symmetric_eigenvalues")?;
    if m.nrows() == 0 {
        return Ok(vec![]);
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    Ok(vals)
}

fn reorder(values: &DVector<f64>, vectors: &DMatrix<f64>, order: &[usize]) -> SymEigen {
    let n = vectors.nrows();
    let mut out = DMatrix::zeros(n, order.len());
    let mut vals = Vec::with_capacity(order.len());
    for (dst, &src) in order.iter().enumerate() {
        out.set_column(dst, &vectors.column(src));
        vals.push(values[src]);
    }
    SymEigen { values: vals, vectors: out }
}

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
pub fn fix_signs(vectors: &mut DMatrix<f64>) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs + 1e-12 {
                best = i;
                best_abs = v.abs();
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// The `k` eigen-pairs of largest magnitude, ordered by decreasing `|λ|`.
pub fn top_k_by_magnitude(m: &DMatrix<f64>, k: usize) -> Result<SymEigen> {
    check_square(m, "top_k_by_magnitude")?;
    let n = m.nrows();
    if k > n {
        return Err(Error::Config(format!("requested {k} eigenvectors of a {n}x{n} matrix")));
    }
    if n > DENSE_LIMIT {
        return subspace_iteration(m, k);
    }
    let full = symmetric_eigen(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        full.values[b]
            .abs()
            .total_cmp(&full.values[a].abs())
            .then(full.values[b].total_cmp(&full.values[a]))
            .then(a.cmp(&b))
    });
    order.truncate(k);
    Ok(reorder(&DVector::from_vec(full.values.clone()), &full.vectors, &order))
}

/// Orthogonal iteration with a Rayleigh-Ritz finish, for orders past
/// [`DENSE_LIMIT`] where a full decomposition is too expensive.
fn subspace_iteration(m: &DMatrix<f64>, k: usize) -> Result<SymEigen> {
    let n = m.nrows();
    if k == 0 {
        return Ok(SymEigen { values: vec![], vectors: DMatrix::zeros(n, 0) });
    }
    // Oversample to speed convergence of the k-th direction.
    let p = (k + 8).min(n);
    let mut q = DMatrix::from_fn(n, p, |i, j| {
        let x = ((i * 7919 + j * 104_729) % 1013) as f64 / 1013.0;
        x - 0.5 + if i % p == j { 1.0 } else { 0.0 }
    });
    q = q.qr().q();
    let max_iter = 1000;
    let mut prev: Vec<f64> = vec![f64::INFINITY; k];
    for iter in 0..max_iter {
        let z = m * &q;
        q = z.qr().q();
        let h = q.transpose() * m * &q;
        let ritz = symmetric_eigen(&h)?;
        let mut mags: Vec<f64> = ritz.values.iter().map(|v| v.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        mags.truncate(k);
        let delta = mags
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs() / a.abs().max(1e-300))
            .fold(0.0, f64::max);
        prev = mags;
        if delta < 1e-12 && iter > 2 {
            break;
        }
        if iter + 1 == max_iter {
            return Err(Error::Numerical(format!(
                "subspace iteration did not converge in {max_iter} iterations (n = {n}, k = {k})"
            )));
        }
    }
    let h = q.transpose() * m * &q;
    let ritz = top_k_by_magnitude(&h, k)?;
    let vectors = &q * &ritz.vectors;
    Ok(SymEigen { values: ritz.values, vectors })
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = m.ncols();
    if n == 0 || m.nrows() == 0 {
        return 0.0;
    }
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.01 * ((i * 37 % 17) as f64));
    v /= v.norm();
    let mut sigma = 0.0;
    for _ in 0..max_iter {
        let w = m * &v;
        let u = m.transpose() * &w;
        let un = u.norm();
        if un == 0.0 {
            return 0.0;
        }
        let next = w.norm();
        v = u / un;
        if (next - sigma).abs() <= tol * next.max(1e-300) {
            return next;
        }
        sigma = next;
    }
    sigma
}

pub fn frobenius_norm(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
