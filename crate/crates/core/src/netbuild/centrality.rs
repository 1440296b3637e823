use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCentrality {
    pub scores: Vec<f64>,
    pub eigenvalue: f64,
    /// Nodes of the component the scores live on.
    pub component: Vec<usize>,
    /// The graph has more than one connected component.
    pub disconnected: bool,
    /// The graph has no edges; scores are all zero.
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCentrality {
    pub scores: Vec<f64>,
    /// No edges: scores fall back to `1/N`.
    pub empty: bool,
}

fn check_input(a: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::dims("adjacency", "square matrix", format!("{}x{}", a.nrows(), a.ncols())));
    }
    if !linalg::is_symmetric(a, 1e-12) {
        return Err(Error::InvalidInput("adjacency must be symmetric".into()));
    }
    if a.iter().any(|&v| v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidInput("adjacency must be finite and nonnegative".into()));
    }
    Ok(())
}

/// Connected components by breadth-first search, each sorted, ordered by
/// their smallest node.
pub fn connected_components(a: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = a.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for v in 0..n {
                if !seen[v] && a[(u, v)] > 0.0 {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Leading eigenvector of the largest connected component, nonnegative and
/// unit-norm, zero elsewhere.
pub fn eigenvector_centrality(a: &DMatrix<f64>) -> Result<EigenCentrality> {
    check_input(a)?;
    let n = a.nrows();
    let comps = connected_components(a);
    let disconnected = comps.len() > 1;
    // Largest component; the earliest one on ties.
    let comp = comps.iter().fold(None::<&Vec<usize>>, |best, c| match best {
        Some(b) if b.len() >= c.len() => Some(b),
        _ => Some(c),
    });
    let comp = match comp {
        Some(c) if c.len() > 1 => c.clone(),
        _ => {
            return Ok(EigenCentrality { scores: vec![0.0; n], eigenvalue: 0.0, component: vec![], disconnected, empty: true });
        }
    };
    let sub = a.select_rows(&comp).select_columns(&comp);
    let eig = linalg::symmetric_eigen(&sub)?;
    let mut v: Vec<f64> = eig.vectors.column(0).iter().copied().collect();
    if v.iter().sum::<f64>() < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v.iter_mut().for_each(|x| *x = x.max(0.0));
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut scores = vec![0.0; n];
    for (p, &i) in comp.iter().enumerate() {
        scores[i] = v[p] / norm;
    }
    Ok(EigenCentrality { scores, eigenvalue: eig.values[0], component: comp, disconnected, empty: false })
}

/// Degrees divided by the total degree.
pub fn degree_centrality_normalized(a: &DMatrix<f64>) -> Result<DegreeCentrality> {
    check_input(a)?;
    let n = a.nrows();
    let degrees: Vec<f64> = a.row_iter().map(|r| linalg::compensated_sum(r.iter().copied())).collect();
    let total = linalg::compensated_sum(degrees.iter().copied());
    if total == 0.0 {
        return Ok(DegreeCentrality { scores: vec![1.0 / n as f64; n], empty: true });
    }
    Ok(DegreeCentrality { scores: degrees.iter().map(|d| d / total).collect(), empty: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    #[test]
    fn complete_graph_is_uniform() {
        let a = DMatrix::from_fn(4, 4, |i, j| if i == j { 0.0 } else { 1.0 });
        let c = eigenvector_centrality(&a).unwrap();
        for s in c.scores {
            assert_abs_diff_eq!(s, 0.5, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(c.eigenvalue, 3.0, epsilon = 1e-12);
        assert!(!c.disconnected);
    }

    #[test]
    fn path_graph() {
        let c = eigenvector_centrality(&graph(3, &[(0, 1), (1, 2)])).unwrap();
        let s2 = 2f64.sqrt();
        assert_abs_diff_eq!(c.eigenvalue, s2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.scores[1] / c.scores[0], s2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.scores[2], c.scores[0], epsilon = 1e-12);
        assert_abs_diff_eq!(c.scores[0], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn disjoint_triangles() {
        let c = eigenvector_centrality(&graph(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])).unwrap();
        assert!(c.disconnected);
        assert_eq!(c.component, vec![0, 1, 2]);
        assert!(c.scores[3..].iter().all(|&s| s == 0.0));
        assert!(c.scores[..3].iter().all(|&s| s > 0.0));
    }

    #[test]
    fn empty_graph() {
        let c = eigenvector_centrality(&DMatrix::zeros(3, 3)).unwrap();
        assert!(c.empty);
        assert!(c.scores.iter().all(|&s| s == 0.0));
        let d = degree_centrality_normalized(&DMatrix::zeros(4, 4)).unwrap();
        assert!(d.empty);
        assert_eq!(d.scores, vec![0.25; 4]);
    }

    #[test]
    fn star_degree_centrality() {
        let d = degree_centrality_normalized(&graph(4, &[(0, 1), (0, 2), (0, 3)])).unwrap();
        assert_abs_diff_eq!(d.scores[0], 0.5, epsilon = 1e-15);
        for s in &d.scores[1..] {
            assert_abs_diff_eq!(*s, 1.0 / 6.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn regular_graph_degree_centrality() {
        let cycle = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let d = degree_centrality_normalized(&cycle).unwrap();
        assert!(d.scores.iter().all(|&s| (s - 0.2).abs() < 1e-15));
    }
}
