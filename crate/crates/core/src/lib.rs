//! Noncommutative stochastic calculus at matrix scale.
//!
//! * [`trace_poly`]: exact trace *-polynomial algebra, derivatives and gamma
//!   contraction.
//! * [`matrix_alg`]: `(M_n(C), tr_n)` numerics: norms, functional calculus,
//!   divided differences and multiple operator integrals.
//! * [`evaluator`]: evaluation of trace polynomials on matrix tuples.
//! * [`process_sim`]: Hermitian matrix Brownian motion and friends.
//! * [`stoch_int`]: stochastic integrals, quadratic covariation, isometry
//!   and BDG checks.
//! * [`ito_verifier`]: Itô formula residuals and convergence studies.

pub mod error;
pub mod evaluator;
pub mod ito_verifier;
pub mod matrix_alg;
pub mod process_sim;
pub mod report;
pub mod selftest;
pub mod stats;
pub mod stoch_int;
pub mod trace_poly;

pub use error::{Error, Result};
