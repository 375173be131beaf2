use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::ScalarFunctionSpec;

/// Relative node gap below which the derivative form is used.
const CONFLUENT_GAP: f64 = 1e-6;

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// `f^{[k]}(λ_0, ..., λ_k)` for `k = nodes.len() - 1`.
///
/// Polynomials use `Σ_m c_m h_{m-k}(λ)` with `h_d` the complete homogeneous
/// symmetric polynomial, which involves no cancellation. Other functions use
/// a Newton table on sorted nodes; windows whose spread is below
/// `1e-6 · max(1, max|λ|)` use `f^{(m)}(mean)/m!`, the continuous extension
/// at coincident nodes.
pub fn divided_diff(f: &ScalarFunctionSpec, nodes: &[f64]) -> Complex64 {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    if let ScalarFunctionSpec::Polynomial(c) = f {
        return poly_divided_diff(c, nodes);
    }
    let mut x = nodes.to_vec();
    x.sort_by(f64::total_cmp);
    let k = x.len() - 1;
    let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let thresh = CONFLUENT_GAP * scale;
    // table[i] holds f[x_i..x_{i+m}] for the current order m.
    let mut table: Vec<Complex64> = x.iter().map(|&v| f.eval(v)).collect();
    for m in 1..=k {
        for i in 0..=(k - m) {
            let gap = x[i + m] - x[i];
            table[i] = if gap < thresh {
                let mid = x[i..=i + m].iter().sum::<f64>() / (m + 1) as f64;
                f.derivative(m, mid) / factorial(m)
            } else {
                (table[i + 1] - table[i]) / gap
            };
        }
    }
    table[0]
}

/// `h_0..=h_dmax` of the nodes.
fn complete_homogeneous(nodes: &[f64], dmax: usize) -> Vec<f64> {
    let mut h = vec![0.0; dmax + 1];
    h[0] = 1.0;
    for &x in nodes {
        for d in 1..=dmax {
            h[d] += x * h[d - 1];
        }
    }
    h
}

fn poly_divided_diff(c: &[Complex64], nodes: &[f64]) -> Complex64 {
    let k = nodes.len() - 1;
    if c.len() <= k {
        return Complex64::new(0.0, 0.0);
    }
    let h = complete_homogeneous(nodes, c.len() - 1 - k);
    h.iter().zip(&c[k..]).map(|(hd, cm)| cm * hd).sum()
}

/// Exact polynomial evaluation by Horner.
pub fn poly_eval_exact(coeffs: &[BigRational], x: &BigRational) -> BigRational {
    coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn poly_derivative_exact(coeffs: &[BigRational], j: usize) -> Vec<BigRational> {
    (j..coeffs.len())
        .map(|i| {
            let falling: i64 = ((i - j + 1)..=i).map(|m| m as i64).product();
            &coeffs[i] * BigRational::from_integer(falling.into())
        })
        .collect()
}

/// Exact divided difference of a rational polynomial at rational nodes.
/// Coincident nodes use exact derivatives.
pub fn divided_diff_exact(coeffs: &[BigRational], nodes: &[BigRational]) -> BigRational {
    assert!(!nodes.is_empty(), "divided difference needs at least one node");
    let mut x = nodes.to_vec();
    x.sort();
    let k = x.len() - 1;
    let mut table: Vec<BigRational> = x.iter().map(|v| poly_eval_exact(coeffs, v)).collect();
    for m in 1..=k {
        for i in 0..=(k - m) {
            table[i] = if x[i + m] == x[i] {
                let fact: i64 = (1..=m as i64).product();
                poly_eval_exact(&poly_derivative_exact(coeffs, m), &x[i]) / BigRational::from_integer(fact.into())
            } else {
                (&table[i + 1] - &table[i]) / (&x[i + m] - &x[i])
            };
        }
    }
    table.swap_remove(0)
}
