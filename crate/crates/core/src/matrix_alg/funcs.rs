use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Scalar function with exact derivatives of every order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFunctionSpec {
    /// `f(λ) = Σ c_i λ^i`, coefficients from degree 0 up.
    Polynomial(Vec<Complex64>),
    /// `f(λ) = Σ c_j e^{i ξ_j λ}` as `(c_j, ξ_j)` pairs.
    ExpSum(Vec<(Complex64, f64)>),
}

impl ScalarFunctionSpec {
    pub fn monomial(degree: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); degree + 1];
        c[degree] = Complex64::new(1.0, 0.0);
        ScalarFunctionSpec::Polynomial(c)
    }

    pub fn real_polynomial(coeffs: &[f64]) -> Self {
        ScalarFunctionSpec::Polynomial(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// `e^{iξλ}`.
    pub fn exp_i(xi: f64) -> Self {
        ScalarFunctionSpec::ExpSum(vec![(Complex64::new(1.0, 0.0), xi)])
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.derivative(0, x)
    }

    /// `f^{(j)}(x)`.
    pub fn derivative(&self, j: usize, x: f64) -> Complex64 {
        match self {
            ScalarFunctionSpec::Polynomial(c) => {
                if j >= c.len() {
                    return Complex64::new(0.0, 0.0);
                }
                // Horner on the j-th derivative's coefficients.
                let mut acc = Complex64::new(0.0, 0.0);
                for i in (j..c.len()).rev() {
                    let falling: f64 = ((i - j + 1)..=i).map(|m| m as f64).product();
                    acc = acc * x + c[i] * falling;
                }
                acc
            }
            ScalarFunctionSpec::ExpSum(terms) => terms
                .iter()
                .map(|&(c, xi)| c * Complex64::new(0.0, xi).powu(j as u32) * Complex64::new(0.0, xi * x).exp())
                .sum(),
        }
    }

    pub fn degree(&self) -> Option<usize> {
        match self {
            ScalarFunctionSpec::Polynomial(c) => Some(c.len().saturating_sub(1)),
            ScalarFunctionSpec::ExpSum(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let p = ScalarFunctionSpec::real_polynomial(&[1.0, 2.0, 0.0, 4.0]);
        assert_eq!(p.eval(2.0), Complex64::new(37.0, 0.0));
        assert_eq!(p.derivative(1, 2.0), Complex64::new(50.0, 0.0));
        assert_eq!(p.derivative(3, 5.0), Complex64::new(24.0, 0.0));
        assert_eq!(p.derivative(4, 5.0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exponential_derivatives() {
        let f = ScalarFunctionSpec::exp_i(2.0);
        let d2 = f.derivative(2, 0.3);
        let expected = -4.0 * Complex64::new(0.0, 0.6).exp();
        assert!((d2 - expected).norm() < 1e-14);
    }
}
