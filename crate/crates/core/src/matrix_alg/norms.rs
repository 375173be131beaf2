use num_complex::Complex64;

use crate::error::{Error, Result};

use super::Matrix;

/// `‖a‖_p = (tr_n |a|^p)^{1/p}` from the singular values; `p = ∞` is the
/// operator norm.
pub fn lp_norm(a: &Matrix, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Invalid(format!("p must be at least 1, got {p}")));
    }
    let sv = a.singular_values();
    if p.is_infinite() {
        return Ok(sv.iter().copied().fold(0.0, f64::max));
    }
    if p == 2.0 {
        let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        return Ok((fro2 / a.nrows() as f64).sqrt());
    }
    let s: f64 = sv.iter().map(|s| s.powf(p)).sum();
    Ok((s / a.nrows() as f64).powf(1.0 / p))
}

/// `tr_n(a^k)`.
pub fn normalized_moment(a: &Matrix, k: u32) -> Complex64 {
    let mut acc = Matrix::identity(a.nrows(), a.ncols());
    for _ in 0..k {
        acc = &acc * a;
    }
    super::tr(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_has_unit_norm() {
        let i = Matrix::identity(5, 5);
        for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
            assert!((lp_norm(&i, p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_entry() {
        let mut a = Matrix::zeros(4, 4);
        a[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!((lp_norm(&a, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((lp_norm(&a, 1.0).unwrap() - 0.5).abs() < 1e-12);
        assert!((lp_norm(&a, f64::INFINITY).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn p_below_one_is_rejected() {
        assert!(lp_norm(&Matrix::identity(2, 2), 0.5).is_err());
        assert!(lp_norm(&Matrix::identity(2, 2), f64::NAN).is_err());
    }
}
