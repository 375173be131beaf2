use num_complex::Complex64;

use crate::error::{Error, Result};

use super::Matrix;

/// Orthonormal basis of the Hermitian `n x n` matrices for
/// `⟨a, b⟩_n = n Tr(b* a)`.
///
/// Order: `E_jj/√n` for each `j`, then for each pair `j < k` (row-major)
/// the symmetric `(E_jk + E_kj)/√(2n)` followed by the antisymmetric
/// `i(E_jk − E_kj)/√(2n)`. Brownian increments are drawn in this order.
pub fn hermitian_onb(n: usize) -> Vec<Matrix> {
    let mut out = Vec::with_capacity(n * n);
    let d = 1.0 / (n as f64).sqrt();
    let o = 1.0 / (2.0 * n as f64).sqrt();
    for j in 0..n {
        let mut e = Matrix::zeros(n, n);
        e[(j, j)] = Complex64::new(d, 0.0);
        out.push(e);
    }
    for j in 0..n {
        for k in j + 1..n {
            let mut s = Matrix::zeros(n, n);
            s[(j, k)] = Complex64::new(o, 0.0);
            s[(k, j)] = Complex64::new(o, 0.0);
            out.push(s);
            let mut a = Matrix::zeros(n, n);
            a[(j, k)] = Complex64::new(0.0, o);
            a[(k, j)] = Complex64::new(0.0, -o);
            out.push(a);
        }
    }
    out
}

fn check_dims(a: &Matrix, basis: &[Matrix]) -> Result<()> {
    let n = a.nrows();
    if basis.len() != n * n {
        return Err(Error::Dimension { expected: n * n, got: basis.len() });
    }
    if let Some(e) = basis.iter().find(|e| e.nrows() != n) {
        return Err(Error::Dimension { expected: n, got: e.nrows() });
    }
    Ok(())
}

/// `Σ_e e a e`, which equals `tr_n(a) I`.
pub fn magic_sum(a: &Matrix, basis: &[Matrix]) -> Result<Matrix> {
    check_dims(a, basis)?;
    let n = a.nrows();
    let mut out = Matrix::zeros(n, n);
    for e in basis {
        out += e * a * e;
    }
    Ok(out)
}

/// `Σ_e e Tr(e a)`, which equals `a / n`.
pub fn magic_trace_sum(a: &Matrix, basis: &[Matrix]) -> Result<Matrix> {
    check_dims(a, basis)?;
    let n = a.nrows();
    let mut out = Matrix::zeros(n, n);
    for e in basis {
        out += e * (e * a).trace();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(basis: &[Matrix]) -> f64 {
        let n = basis[0].nrows() as f64;
        let mut worst: f64 = 0.0;
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let ip = (b.adjoint() * a).trace() * n;
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - target).norm());
            }
        }
        worst
    }

    #[test]
    fn onb_is_orthonormal_and_hermitian() {
        assert_eq!(hermitian_onb(1), vec![Matrix::identity(1, 1)]);
        for n in [1, 2, 3, 5] {
            let b = hermitian_onb(n);
            assert_eq!(b.len(), n * n);
            assert!(gram(&b) < 1e-12);
            assert!(b.iter().all(super::super::is_hermitian));
        }
    }

    #[test]
    fn magic_on_simple_inputs() {
        let b = hermitian_onb(2);
        let i = Matrix::identity(2, 2);
        assert!((magic_sum(&i, &b).unwrap() - &i).norm() < 1e-12);
        let mut d = Matrix::zeros(2, 2);
        d[(0, 0)] = Complex64::new(1.0, 0.0);
        d[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(magic_sum(&d, &b).unwrap().norm() < 1e-12);
        assert!(magic_sum(&Matrix::identity(3, 3), &b).is_err());
    }
}
