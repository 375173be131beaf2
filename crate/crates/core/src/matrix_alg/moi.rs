//! Multiple operator integrals at matrix scale.
//!
//! `I^{a_1..a_{k+1}} φ [b_1..b_k] = Σ φ(λ¹_{i_1}, .., λ^{k+1}_{i_{k+1}})
//! P¹_{i_1} b_1 P²_{i_2} ⋯ b_k P^{k+1}_{i_{k+1}}` is evaluated in the
//! eigenbases: with `b̃_j = U_j* b_j U_{j+1}` the result is `U_1 R U_{k+1}*`
//! where `R[p, q] = Σ φ(...) b̃_1[p, i_2] ⋯ b̃_k[i_k, q]`. Eigenvalues inside
//! one cluster share their mean, which makes the sum equal to the
//! projection-based one.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::{divided_diff, Matrix, ScalarFunctionSpec, SpectralData};

/// Evaluates the MOI of kernel `phi` (called with `k + 1` nodes).
pub fn moi_with<F>(phi: F, spectra: &[&SpectralData], b: &[Matrix]) -> Result<Matrix>
where
    F: Fn(&[f64]) -> Complex64 + Sync,
{
    let k = b.len();
    if spectra.len() != k + 1 {
        return Err(Error::Invalid(format!("need {} spectral inputs for {} directions", k + 1, k)));
    }
    let n = spectra[0].dim();
    for s in spectra {
        if s.dim() != n {
            return Err(Error::Dimension { expected: n, got: s.dim() });
        }
    }
    for m in b {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::Dimension { expected: n, got: m.nrows() });
        }
    }
    let values: Vec<Vec<f64>> = spectra.iter().map(|s| s.clustered_values()).collect();
    let bt: Vec<Matrix> = (0..k)
        .map(|j| spectra[j].eigenvectors.adjoint() * &b[j] * &spectra[j + 1].eigenvectors)
        .collect();

    let rows: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|p| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            let mut nodes = vec![0.0; k + 1];
            nodes[0] = values[0][p];
            if k == 0 {
                row[p] = phi(&nodes);
            } else {
                accumulate(&phi, &values, &bt, 1, p, Complex64::new(1.0, 0.0), &mut nodes, &mut row);
            }
            row
        })
        .collect();
    let r = Matrix::from_fn(n, n, |i, j| rows[i][j]);
    Ok(&spectra[0].eigenvectors * r * spectra[k].eigenvectors.adjoint())
}

#[allow(clippy::too_many_arguments)]
fn accumulate<F: Fn(&[f64]) -> Complex64>(
    phi: &F,
    values: &[Vec<f64>],
    bt: &[Matrix],
    level: usize,
    prev: usize,
    prod: Complex64,
    nodes: &mut Vec<f64>,
    row: &mut [Complex64],
) {
    let k = bt.len();
    let n = row.len();
    for i in 0..n {
        let w = prod * bt[level - 1][(prev, i)];
        if w == Complex64::new(0.0, 0.0) {
            continue;
        }
        nodes[level] = values[level][i];
        if level == k {
            row[i] += phi(nodes) * w;
        } else {
            accumulate(phi, values, bt, level + 1, i, w, nodes, row);
        }
    }
}

/// `I^{a} f^{[k]} [b]` with `k = b.len()` and `a.len() = k + 1`.
pub fn moi(f: &ScalarFunctionSpec, a: &[Matrix], b: &[Matrix]) -> Result<Matrix> {
    let spectra = a.iter().map(SpectralData::new).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&SpectralData> = spectra.iter().collect();
    moi_with(|nodes| divided_diff(f, nodes), &refs, b)
}

/// All permutations of `0..k` in lexicographic order.
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(k), &mut vec![false; k], &mut out);
    out
}

/// `D^k f(a)[b_1..b_k] = Σ_{π ∈ S_k} I^{a,..,a} f^{[k]} [b_π(1), .., b_π(k)]`.
pub fn dk_operator_function_spectral(f: &ScalarFunctionSpec, s: &SpectralData, b: &[Matrix]) -> Result<Matrix> {
    let k = b.len();
    let refs = vec![s; k + 1];
    let n = s.dim();
    let mut out = Matrix::zeros(n, n);
    for perm in permutations(k) {
        let bp: Vec<Matrix> = perm.iter().map(|&i| b[i].clone()).collect();
        out += moi_with(|nodes| divided_diff(f, nodes), &refs, &bp)?;
    }
    Ok(out)
}

pub fn dk_operator_function(f: &ScalarFunctionSpec, a: &Matrix, k: usize, b: &[Matrix]) -> Result<Matrix> {
    if b.len() != k {
        return Err(Error::Invalid(format!("expected {k} directions, got {}", b.len())));
    }
    dk_operator_function_spectral(f, &SpectralData::new(a)?, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_alg::max_abs;

    fn herm(n: usize, seed: f64) -> Matrix {
        Matrix::from_fn(n, n, |i, j| {
            let (x, y) = (i.min(j) as f64, i.max(j) as f64);
            let re = ((x + 1.0) * seed + y * 0.37).sin();
            let im = if i == j { 0.0 } else { ((x + 2.0) * (y + 1.0) * seed).cos() * if i < j { 1.0 } else { -1.0 } };
            Complex64::new(re, im)
        })
    }

    #[test]
    fn constant_kernel_returns_direction() {
        let a = herm(5, 0.7);
        let b = herm(5, 1.9);
        let s = SpectralData::new(&a).unwrap();
        let out = moi_with(|_| Complex64::new(1.0, 0.0), &[&s, &s], std::slice::from_ref(&b)).unwrap();
        assert!(max_abs(&(out - &b)) < 1e-12);
    }

    #[test]
    fn square_first_order() {
        let a = herm(4, 0.3);
        let b = herm(4, 2.2);
        let out = moi(&ScalarFunctionSpec::monomial(2), &[a.clone(), a.clone()], std::slice::from_ref(&b)).unwrap();
        assert!(max_abs(&(out - (&a * &b + &b * &a))) < 1e-12);
    }

    #[test]
    fn order_zero_is_functional_calculus() {
        let a = herm(4, 0.9);
        let s = SpectralData::new(&a).unwrap();
        let f = ScalarFunctionSpec::monomial(3);
        let out = moi_with(|x| divided_diff(&f, x), &[&s], &[]).unwrap();
        assert!(max_abs(&(out - &a * &a * &a)) < 1e-11);
    }

    #[test]
    fn permutations_are_complete() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(permutations(0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn first_derivative_of_identity() {
        let a = herm(3, 0.5);
        let b = herm(3, 1.1);
        let d = dk_operator_function(&ScalarFunctionSpec::monomial(1), &a, 1, std::slice::from_ref(&b)).unwrap();
        assert!(max_abs(&(d - &b)) < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let a = herm(3, 0.5);
        let b = herm(4, 1.1);
        assert!(moi(&ScalarFunctionSpec::monomial(2), &[a.clone(), a], &[b]).is_err());
    }
}
