use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{Lineage, ProcessPath, RngStream, Role, TimeGrid};
use crate::matrix_alg::Matrix;

/// One increment `Σ_e sqrt(dt) Z_e e` over the Hermitian ONB, with the
/// coefficients drawn in basis order: diagonal first, then each pair `j < k`
/// row-major, symmetric before antisymmetric.
pub fn hbm_increment<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let diag = (dt / n as f64).sqrt();
    for j in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        m[(j, j)] = Complex64::new(diag * z, 0.0);
    }
    let off = (dt / (2.0 * n as f64)).sqrt();
    for j in 0..n {
        for k in j + 1..n {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off * a, off * b);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    m
}

/// Entrywise GUE generator `sqrt(dt / n) H`, with `H` filled row by row over
/// the upper triangle.
pub fn gue_increment<R: Rng + ?Sized>(n: usize, dt: f64, rng: &mut R) -> Matrix {
    let mut m = Matrix::zeros(n, n);
    let s = (dt / n as f64).sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..n {
        for k in j..n {
            if j == k {
                let z: f64 = rng.sample(StandardNormal);
                m[(j, j)] = Complex64::new(s * z, 0.0);
            } else {
                let a: f64 = rng.sample(StandardNormal);
                let b: f64 = rng.sample(StandardNormal);
                let z = Complex64::new(s * h * a, s * h * b);
                m[(j, k)] = z;
                m[(k, j)] = z.conj();
            }
        }
    }
    m
}

fn simulate_with(
    n: usize,
    grid: Arc<TimeGrid>,
    stream: &RngStream,
    step: fn(usize, f64, &mut rand_chacha::ChaCha8Rng) -> Matrix,
) -> ProcessPath {
    let mut values = Vec::with_capacity(grid.len());
    let mut x = Matrix::zeros(n, n);
    values.push(x.clone());
    for k in 0..grid.steps() {
        let mut rng = stream.for_step(k as u64);
        x += step(n, grid.dt(k), &mut rng);
        values.push(x.clone());
    }
    ProcessPath {
        grid,
        values,
        role: Role::Martingale,
        decomposition: None,
        lineage: Some(Lineage { seed: stream.seed, path_index: stream.path }),
    }
}

/// Hermitian Brownian motion started at 0; step `k` draws from
/// `stream.for_step(k)`.
pub fn simulate_hbm(n: usize, grid: Arc<TimeGrid>, stream: &RngStream) -> ProcessPath {
    simulate_with(n, grid, stream, hbm_increment)
}

/// Same law as [`simulate_hbm`] through the entrywise GUE generator.
pub fn simulate_hbm_entrywise(n: usize, grid: Arc<TimeGrid>, stream: &RngStream) -> ProcessPath {
    simulate_with(n, grid, stream, gue_increment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_alg::{hermitian_onb, is_hermitian, tr_prod};

    #[test]
    fn increment_matches_basis_expansion() {
        let n = 3;
        let basis = hermitian_onb(n);
        let mut r1 = RngStream::new(5, 0).for_step(0);
        let fast = hbm_increment(n, 0.25, &mut r1);
        let mut r2 = RngStream::new(5, 0).for_step(0);
        let mut slow = Matrix::zeros(n, n);
        for e in &basis {
            let z: f64 = r2.sample(StandardNormal);
            slow += e * Complex64::new(0.5 * z, 0.0);
        }
        assert!((fast - slow).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn paths_are_hermitian_and_reproducible() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 0.1).unwrap());
        let s = RngStream::new(11, 2);
        let a = simulate_hbm(4, grid.clone(), &s);
        let b = simulate_hbm(4, grid.clone(), &s);
        assert_eq!(a, b);
        assert!(a.values.iter().all(is_hermitian));
        assert_eq!(a.values[0], Matrix::zeros(4, 4));
        let c = simulate_hbm_entrywise(4, grid, &s);
        assert!(c.values.iter().all(is_hermitian));
    }

    #[test]
    fn second_moment_is_dt() {
        let n = 6;
        let (dt, samples) = (0.5, 4000);
        let mut fast = 0.0;
        let mut gue = 0.0;
        for p in 0..samples {
            let s = RngStream::new(3, p);
            let a = hbm_increment(n, dt, &mut s.for_step(0));
            let b = gue_increment(n, dt, &mut s.for_step(1));
            fast += tr_prod(&a, &a).re;
            gue += tr_prod(&b, &b).re;
        }
        let (fast, gue) = (fast / samples as f64, gue / samples as f64);
        assert!((fast - dt).abs() < 0.02, "{fast}");
        assert!((gue - dt).abs() < 0.02, "{gue}");
    }
}
