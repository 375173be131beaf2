//! The finite-dimensional *-probability space `(M_n(C), tr_n)`.

mod basis;
mod divdiff;
mod esd;
mod funcs;
mod moi;
mod norms;
mod spectral;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use basis::{hermitian_onb, magic_sum, magic_trace_sum};
pub use divdiff::{divided_diff, divided_diff_exact, poly_eval_exact};
pub use esd::{esd_distance, semicircle_cdf};
pub use funcs::ScalarFunctionSpec;
pub use moi::{dk_operator_function, dk_operator_function_spectral, moi, moi_with, permutations};
pub use norms::{lp_norm, normalized_moment};
pub use spectral::{op_function, SpectralData, CLUSTER_TOL};

/// Dense complex matrix.
pub type Matrix = DMatrix<Complex64>;

pub fn identity(n: usize) -> Matrix {
    Matrix::identity(n, n)
}

/// Normalized trace `tr_n = Tr / n`.
pub fn tr(a: &Matrix) -> Complex64 {
    a.trace() / a.nrows() as f64
}

/// `tr_n(a b)` without forming the product.
pub fn tr_prod(a: &Matrix, b: &Matrix) -> Complex64 {
    let n = a.nrows();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(j, i)];
        }
    }
    s / n as f64
}

/// Entrywise max-modulus norm.
pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Deviation from self-adjointness, `‖a − a*‖_∞` entrywise.
pub fn hermitian_defect(a: &Matrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn is_hermitian(a: &Matrix) -> bool {
    hermitian_defect(a) <= 1e-12 * max_abs(a).max(f64::MIN_POSITIVE)
}
