//! Itô's formula at matrix scale: symbolic right-hand sides for trace
//! polynomials, per-step terms through both the derivative calculus and the
//! multiple-operator-integral route, residual paths and mesh studies.

mod study;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluator::{EvalContext, Session, YBindings};
use crate::matrix_alg::{divided_diff, moi_with, Matrix, ScalarFunctionSpec, SpectralData};
use crate::process_sim::ProcessPath;
use crate::report::{Params, Report};
use crate::stoch_int::cross_rate;
use crate::trace_poly::{derive_k, gamma_contract, partial, ContractionModel, ScalarCoeff, TracePolynomial};

pub use study::{convergence_study, StudyParams, StudyTarget};

/// `(∂P, ½ γ(∂²P))`. Variable `x_i` differentiates into slot 1 with
/// coordinate `i`, so distinct variables are driven by independent motions.
pub fn ito_rhs_symbolic(p: &TracePolynomial, model: ContractionModel) -> Result<(TracePolynomial, TracePolynomial)> {
    if !p.is_x_only() {
        return Err(Error::Invalid("Itô's formula takes a polynomial in x variables only".into()));
    }
    let vars = p.num_vars();
    let mut first = TracePolynomial::zero().with_num_vars(vars);
    for i in 1..=vars {
        first = &first + &partial(p, i, 1, i);
    }
    let correction = if vars == 0 {
        TracePolynomial::zero()
    } else {
        gamma_contract(&derive_k(p, 2)?, model)?.scale(&ScalarCoeff::from_ratio(1, 2))
    };
    Ok((first, correction))
}

/// The three right-hand-side pieces of one time step.
#[derive(Clone, Debug)]
pub struct StepTerms {
    /// `DF(X)[ΔX]`.
    pub first: Matrix,
    /// `½ D²F(X)[ΔX, ΔX]` with the realized increment.
    pub second_realized: Matrix,
    /// Contracted correction density (to be multiplied by `κ(dt)`).
    pub second_contracted: Matrix,
}

/// Precomputed symbols for stepping a trace polynomial.
#[derive(Clone, Debug)]
pub struct PolyStepper {
    pub poly: TracePolynomial,
    pub first: TracePolynomial,
    pub second: TracePolynomial,
    pub correction: TracePolynomial,
}

impl PolyStepper {
    pub fn new(p: &TracePolynomial, model: ContractionModel) -> Result<Self> {
        let (first, correction) = ito_rhs_symbolic(p, model)?;
        let second = if p.num_vars() == 0 {
            TracePolynomial::zero()
        } else {
            derive_k(p, 2)?.scale(&ScalarCoeff::from_ratio(1, 2))
        };
        Ok(PolyStepper { poly: p.clone(), first, second, correction })
    }

    fn increments(d: &[Matrix]) -> (YBindings, YBindings) {
        let mut one = YBindings::default();
        let mut two = YBindings::default();
        for (i, m) in d.iter().enumerate() {
            let c = i as u32 + 1;
            one.insert(1, c, m.clone());
            two.insert(1, c, m.clone());
            two.insert(2, c, m.clone());
        }
        (one, two)
    }

    /// Terms at `x` (bindings of `x_1..`) for increments `d` of each driver.
    pub fn step(&self, s: &Session<'_>, d: &[Matrix]) -> Result<StepTerms> {
        let (one, two) = Self::increments(d);
        Ok(StepTerms {
            first: s.eval_multilinear(&self.first, &one)?,
            second_realized: s.eval_multilinear(&self.second, &two)?,
            second_contracted: s.eval(&self.correction)?,
        })
    }
}

/// `I f^{[1]}[d]`, `I f^{[2]}[d, d]` and the contracted density
/// `Σ_i (1/n Σ_j f^{[2]}(λ_i, λ_j, λ_i)) v_i v_i*` at a Hermitian point.
pub fn functional_step(f: &ScalarFunctionSpec, s: &SpectralData, d: &Matrix) -> Result<StepTerms> {
    let phi = |nodes: &[f64]| divided_diff(f, nodes);
    let first = moi_with(phi, &[s, s], std::slice::from_ref(d))?;
    let second_realized = moi_with(phi, &[s, s, s], &[d.clone(), d.clone()])?;
    let lam = s.clustered_values();
    let n = lam.len();
    let density: Vec<Complex64> = lam
        .iter()
        .map(|&li| lam.iter().map(|&lj| divided_diff(f, &[li, lj, li])).sum::<Complex64>() / n as f64)
        .collect();
    Ok(StepTerms { first, second_realized, second_contracted: s.synthesize(&density) })
}

fn shared_rate(drivers: &[&ProcessPath]) -> Result<f64> {
    let first = drivers.first().ok_or(Error::EmptyEnsemble)?;
    let rate = cross_rate(first, first)?;
    for d in drivers {
        if d.grid != first.grid {
            return Err(Error::GridMismatch);
        }
        if d.n() != first.n() {
            return Err(Error::Dimension { expected: first.n(), got: d.n() });
        }
        if cross_rate(d, d)? != rate {
            return Err(Error::Invalid("drivers must all be Brownian or all FV".into()));
        }
    }
    Ok(rate)
}

fn check_self_adjoint(p: &ProcessPath) -> Result<()> {
    for m in [&p.values[0], &p.values[p.values.len() - 1]] {
        let defect = crate::matrix_alg::hermitian_defect(m);
        if defect > 1e-10 * crate::matrix_alg::max_abs(m).max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
    }
    Ok(())
}

/// `P(X(t)) − P(X(0)) − Σ ∂P(X(t_k))[ΔX_k] − Σ ½γ(∂²P)(X(t_k)) κ(Δ_k)` at
/// every grid time, for drivers `x_i ↦ drivers[i - 1]`.
pub fn ito_residual_path(
    stepper: &PolyStepper,
    drivers: &[&ProcessPath],
) -> Result<Vec<Matrix>> {
    let rate = shared_rate(drivers)?;
    for d in drivers {
        check_self_adjoint(d)?;
    }
    let vars = stepper.poly.num_vars() as usize;
    if vars > drivers.len() {
        return Err(Error::Unbound(drivers.len() as u32 + 1));
    }
    let x0 = drivers[0];
    let n = x0.n();
    let ctx_at = |k: usize| EvalContext::from_slice(&drivers.iter().map(|d| d.values[k].clone()).collect::<Vec<_>>());
    let ctx0 = ctx_at(0);
    let p0 = ctx0.session()?.eval(&stepper.poly)?;
    let mut acc = Matrix::zeros(n, n);
    let mut out = Vec::with_capacity(x0.grid.len());
    out.push(Matrix::zeros(n, n));
    for k in 0..x0.steps() {
        let ctx = ctx_at(k);
        let s = ctx.session()?;
        let d: Vec<Matrix> = drivers.iter().map(|p| p.increment(k)).collect();
        let (one, _) = PolyStepper::increments(&d);
        acc += s.eval_multilinear(&stepper.first, &one)?;
        if rate != 0.0 {
            acc += s.eval(&stepper.correction)? * Complex64::new(rate * x0.grid.dt(k), 0.0);
        }
        let pk = ctx_at(k + 1).session()?.eval(&stepper.poly)?;
        out.push(pk - &p0 - &acc);
    }
    Ok(out)
}

/// Residual of the operator-function Itô formula with realized second-order
/// terms, together with the cumulative realized and contracted second-order
/// sums (the latter integrated against `κ`).
pub struct FunctionalResidual {
    pub residual: Vec<Matrix>,
    pub second_realized: Vec<Matrix>,
    pub second_contracted: Vec<Matrix>,
}

pub fn functional_ito_residual_path(f: &ScalarFunctionSpec, x: &ProcessPath) -> Result<FunctionalResidual> {
    let rate = cross_rate(x, x)?;
    let n = x.n();
    let spectra = x.values.iter().map(SpectralData::new).collect::<Result<Vec<_>>>()?;
    let value = |s: &SpectralData| {
        let v: Vec<Complex64> = s.clustered_values().iter().map(|&l| f.eval(l)).collect();
        s.synthesize(&v)
    };
    let f0 = value(&spectra[0]);
    let zero = Matrix::zeros(n, n);
    let (mut acc, mut real, mut contr) = (zero.clone(), zero.clone(), zero.clone());
    let mut out = FunctionalResidual {
        residual: vec![zero.clone()],
        second_realized: vec![zero.clone()],
        second_contracted: vec![zero],
    };
    for k in 0..x.steps() {
        let t = functional_step(f, &spectra[k], &x.increment(k))?;
        acc += &t.first + &t.second_realized;
        real += &t.second_realized;
        contr += t.second_contracted * Complex64::new(rate * x.grid.dt(k), 0.0);
        out.residual.push(value(&spectra[k + 1]) - &f0 - &acc);
        out.second_realized.push(real.clone());
        out.second_contracted.push(contr.clone());
    }
    Ok(out)
}

/// Residuals of one check at a sequence of meshes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItoReport {
    pub check: String,
    pub target: String,
    pub model: ContractionModel,
    pub n: usize,
    pub paths: usize,
    pub seed: u64,
    pub horizon: f64,
    pub meshes: Vec<f64>,
    /// Per mesh: sup over grid times of the ensemble mean `tr_n`-L¹ norm.
    pub residuals: Vec<f64>,
    pub ses: Vec<f64>,
    pub slope: Option<f64>,
}

impl ItoReport {
    /// Ratios `residual(mesh_i) / residual(mesh_{i+1})` for meshes in the
    /// given order.
    pub fn reduction_factors(&self) -> Vec<f64> {
        self.residuals.windows(2).map(|w| w[0] / w[1]).collect()
    }

    pub fn to_reports(&self) -> Vec<Report> {
        self.meshes
            .iter()
            .zip(self.residuals.iter().zip(&self.ses))
            .map(|(&mesh, (&r, &se))| {
                let params = Params { n: self.n, mesh, paths: self.paths, seed: self.seed, t: self.horizon };
                let mut rep = Report::with_gap(&self.check, params, r, 0.0, r, se);
                rep.slope = self.slope;
                rep
            })
            .collect()
    }
}
