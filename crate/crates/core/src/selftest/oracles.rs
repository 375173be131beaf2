//! Independent reference computations used by the self-test criteria.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix_alg::{permutations, Matrix, ScalarFunctionSpec};
use crate::trace_poly::{Letter, ScalarCoeff, TracePolynomial, Word};

/// Hermitian matrix `(G + G*) / 2` with `G` from [`random_matrix`]; its
/// spectrum is of order one.
pub fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let g = random_matrix(n, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Complex Gaussian matrix with entries of variance `1/n`.
pub fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let s = 1.0 / (2.0 * n as f64).sqrt();
    Matrix::from_fn(n, n, |_, _| {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(s * a, s * b)
    })
}

fn random_letter(vars: u32, rng: &mut ChaCha8Rng) -> Letter {
    let l = Letter::x(rng.random_range(1..=vars));
    if rng.random_bool(0.3) {
        l.star()
    } else {
        l
    }
}

/// Random trace *-polynomial in `x_1..x_vars` of total degree at most
/// `max_degree`, with small complex rational coefficients.
pub fn random_polynomial(vars: u32, max_degree: usize, rng: &mut ChaCha8Rng) -> TracePolynomial {
    let mut p = TracePolynomial::zero().with_num_vars(vars);
    for _ in 0..rng.random_range(1..=4) {
        let re = rng.random_range(-5..=5);
        let im = rng.random_range(-3..=3);
        let den = rng.random_range(1..=4);
        let c = ScalarCoeff::new(BigRational::new(re.into(), den.into()), BigRational::new(im.into(), den.into()));
        let mut budget = rng.random_range(0..=max_degree);
        let mut traces: Vec<Word> = Vec::new();
        while budget > 0 && rng.random_bool(0.3) {
            let len = rng.random_range(1..=budget.min(2));
            traces.push((0..len).map(|_| random_letter(vars, rng)).collect());
            budget -= len;
        }
        let outer: Word = (0..budget).map(|_| random_letter(vars, rng)).collect();
        p.push_term(c, traces, outer);
    }
    p
}

/// All weak compositions of `total` into `parts` nonnegative parts.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// `∂^k x^m = Σ_{π ∈ S_k} Σ_{|δ| = m-k} x^{δ_1} y_{π(1)} x^{δ_2} ⋯ y_{π(k)} x^{δ_{k+1}}`.
pub fn dk_monomial(m: usize, k: usize) -> TracePolynomial {
    let mut p = TracePolynomial::zero().with_num_vars(1);
    if k > m {
        return p;
    }
    for perm in permutations(k) {
        for delta in compositions(m - k, k + 1) {
            let mut w = Word::new();
            for j in 0..=k {
                w.extend(std::iter::repeat_n(Letter::x(1), delta[j]));
                if j < k {
                    w.push(Letter::y(perm[j] as u32 + 1, 1));
                }
            }
            p.push_term(ScalarCoeff::one(), Vec::new(), w);
        }
    }
    p
}

/// `Σ_m c_m x^m` as a trace polynomial in `x1`.
pub fn polynomial_in_x1(coeffs: &[i64]) -> TracePolynomial {
    let mut p = TracePolynomial::zero().with_num_vars(1);
    for (m, &c) in coeffs.iter().enumerate() {
        if c != 0 {
            p.push_term(ScalarCoeff::from_int(c), Vec::new(), vec![Letter::x(1); m]);
        }
    }
    p
}

/// Exact complete homogeneous symmetric polynomial `h_d(nodes)` by
/// expanding over multisets of indices.
pub fn complete_homogeneous_exact(nodes: &[BigRational], d: usize) -> BigRational {
    fn rec(nodes: &[BigRational], d: usize, start: usize, acc: BigRational, out: &mut BigRational) {
        if d == 0 {
            *out += acc;
            return;
        }
        for i in start..nodes.len() {
            rec(nodes, d - 1, i, &acc * &nodes[i], out);
        }
    }
    let mut out = BigRational::from_integer(BigInt::from(0));
    rec(nodes, d, 0, BigRational::from_integer(BigInt::from(1)), &mut out);
    out
}

/// Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 1..=m {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((0.5 * (1.0 - x), 0.5 * w));
    }
    out
}

/// Hermite-Genocchi: `f^{[k]}(λ) = ∫_{simplex} f^{(k)}(Σ s_i λ_i) ds` for
/// `k ∈ {1, 2}`, by tensor Gauss-Legendre quadrature (a Duffy map for the
/// triangle).
pub fn simplex_quadrature(f: &ScalarFunctionSpec, nodes: &[f64]) -> Complex64 {
    let gl = gauss_legendre(40);
    match nodes.len() {
        2 => gl
            .iter()
            .map(|&(s, w)| f.derivative(1, nodes[0] + s * (nodes[1] - nodes[0])) * w)
            .sum(),
        3 => {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(u, wu) in &gl {
                for &(v, wv) in &gl {
                    let (s1, s2) = (u, (1.0 - u) * v);
                    let x = nodes[0] + s1 * (nodes[1] - nodes[0]) + s2 * (nodes[2] - nodes[0]);
                    acc += f.derivative(2, x) * (wu * wv * (1.0 - u));
                }
            }
            acc
        }
        k => panic!("simplex quadrature implemented for orders 1 and 2, got {}", k - 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_polynomials() {
        let s: f64 = gauss_legendre(10).iter().map(|&(x, w)| w * x.powi(7)).sum();
        assert!((s - 0.125).abs() < 1e-14);
        let f = ScalarFunctionSpec::monomial(3);
        // x^3 [a, b, c] = a + b + c.
        assert!((simplex_quadrature(&f, &[1.0, 2.0, 4.0]).re - 7.0).abs() < 1e-12);
    }

    #[test]
    fn dk_of_square() {
        let p = dk_monomial(2, 1);
        assert_eq!(p, crate::trace_poly::parse("x1 y1 + y1 x1").unwrap());
        assert_eq!(dk_monomial(2, 2), crate::trace_poly::parse("y1 y2 + y2 y1").unwrap());
        assert!(dk_monomial(2, 3).is_zero());
    }
}
