use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{hermitian_defect, max_abs, Matrix};

/// CDF of the semicircle law of variance `t` (support `[-2√t, 2√t]`).
pub fn semicircle_cdf(x: f64, t: f64) -> f64 {
    let r = 2.0 * t.sqrt();
    if x <= -r {
        return 0.0;
    }
    if x >= r {
        return 1.0;
    }
    0.5 + x * (4.0 * t - x * x).sqrt() / (4.0 * PI * t) + (x / r).asin() / PI
}

/// Kolmogorov distance between the empirical spectral distribution of `a`
/// and the semicircle law of variance `t`.
pub fn esd_distance(a: &Matrix, t: f64) -> Result<f64> {
    if t.is_nan() || t <= 0.0 {
        return Err(Error::Invalid(format!("variance must be positive, got {t}")));
    }
    let defect = hermitian_defect(a);
    if defect > 1e-12 * max_abs(a).max(1.0) {
        return Err(Error::NotHermitian(defect));
    }
    let mut ev: Vec<f64> = a.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ks_distance_sorted(&ev, |x| semicircle_cdf(x, t)))
}

/// Kolmogorov distance of sorted samples from a continuous CDF.
pub(crate) fn ks_distance_sorted(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d.max((i as f64 / n - f).abs()).max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_endpoints_and_symmetry() {
        assert_eq!(semicircle_cdf(-3.0, 1.0), 0.0);
        assert_eq!(semicircle_cdf(2.0, 1.0), 1.0);
        assert!((semicircle_cdf(0.0, 2.0) - 0.5).abs() < 1e-15);
        assert!((semicircle_cdf(0.7, 1.0) + semicircle_cdf(-0.7, 1.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_is_half_away() {
        assert!((esd_distance(&Matrix::zeros(6, 6), 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bad_variance() {
        assert!(esd_distance(&Matrix::zeros(2, 2), 0.0).is_err());
    }
}
