use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::{hermitian_defect, max_abs, Matrix, ScalarFunctionSpec};

/// Relative tolerance grouping near-degenerate eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Spectral decomposition `a = U diag(λ) U*` of a Hermitian matrix with
/// eigenvalues sorted ascending and grouped into clusters.
#[derive(Clone, Debug)]
pub struct SpectralData {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: Matrix,
    /// Half-open index ranges into the sorted eigenvalues.
    pub clusters: Vec<std::ops::Range<usize>>,
}

impl SpectralData {
    pub fn new(a: &Matrix) -> Result<Self> {
        let defect = hermitian_defect(a);
        if defect > 1e-12 * max_abs(a).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        let n = a.nrows();
        let eig = SymmetricEigen::new(a.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
        let eigenvectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        let norm = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = CLUSTER_TOL * norm;
        let mut clusters = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || eigenvalues[i] - eigenvalues[i - 1] > tol {
                clusters.push(start..i);
                start = i;
            }
        }
        Ok(SpectralData { eigenvalues, eigenvectors, clusters })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Eigenvalues with each cluster collapsed to its mean.
    pub fn clustered_values(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for c in &self.clusters {
            let mean = self.eigenvalues.rows(c.start, c.len()).sum() / c.len() as f64;
            out[c.clone()].iter_mut().for_each(|v| *v = mean);
        }
        out
    }

    /// Spectral projection of cluster `i`.
    pub fn projection(&self, i: usize) -> Matrix {
        let c = &self.clusters[i];
        let v = self.eigenvectors.columns(c.start, c.len());
        v * v.adjoint()
    }

    /// `U diag(values) U*`.
    pub fn synthesize(&self, values: &[Complex64]) -> Matrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, v) in values.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, j)] *= v;
            }
        }
        scaled * u.adjoint()
    }

    pub fn reconstruct(&self) -> Matrix {
        let vals: Vec<Complex64> = self.eigenvalues.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.synthesize(&vals)
    }
}

/// `f(a) = U f(diag λ) U*` for Hermitian `a`.
pub fn op_function(f: &ScalarFunctionSpec, a: &Matrix) -> Result<Matrix> {
    let s = SpectralData::new(a)?;
    let vals: Vec<Complex64> = s.clustered_values().iter().map(|&v| f.eval(v)).collect();
    Ok(s.synthesize(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v, 0.0)
    }

    fn sample() -> Matrix {
        Matrix::from_fn(4, 4, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                c(i - 1.5)
            } else {
                let (lo, hi) = (i.min(j), i.max(j));
                let sgn = if i < j { 1.0 } else { -1.0 };
                Complex64::new(0.3 * (lo + hi), sgn * 0.1 * (hi - lo))
            }
        })
    }

    #[test]
    fn reconstruction() {
        let a = sample();
        let s = SpectralData::new(&a).unwrap();
        assert!(max_abs(&(s.reconstruct() - &a)) <= 1e-10 * max_abs(&a));
        let total: Matrix = (0..s.clusters.len()).map(|i| s.projection(i)).sum();
        assert!(max_abs(&(total - Matrix::identity(4, 4))) < 1e-12);
    }

    #[test]
    fn degenerate_spectrum_clusters() {
        let s = SpectralData::new(&Matrix::identity(3, 3)).unwrap();
        assert_eq!(s.clusters, vec![0..3]);
    }

    #[test]
    fn identity_and_square() {
        let a = sample();
        let id = ScalarFunctionSpec::monomial(1);
        assert!(max_abs(&(op_function(&id, &a).unwrap() - &a)) < 1e-12);
        let mut d = Matrix::zeros(2, 2);
        d[(0, 0)] = c(1.0);
        d[(1, 1)] = c(2.0);
        let sq = op_function(&ScalarFunctionSpec::monomial(2), &d).unwrap();
        assert!((sq[(0, 0)] - c(1.0)).norm() < 1e-12 && (sq[(1, 1)] - c(4.0)).norm() < 1e-12);
        let horner = &a * &a;
        assert!(max_abs(&(op_function(&ScalarFunctionSpec::monomial(2), &a).unwrap() - horner)) < 1e-10 * 10.0);
    }

    #[test]
    fn exp_i_is_unitary() {
        let u = op_function(&ScalarFunctionSpec::exp_i(1.0), &sample()).unwrap();
        assert!(max_abs(&(&u * u.adjoint() - Matrix::identity(4, 4))) < 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut a = Matrix::zeros(2, 2);
        a[(0, 1)] = c(1.0);
        assert!(matches!(op_function(&ScalarFunctionSpec::monomial(1), &a), Err(Error::NotHermitian(_))));
    }
}
