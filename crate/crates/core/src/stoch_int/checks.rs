use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{
    cross_rate, qc_closed_form, rs_integral, rs_values, ArgSpec, BoundTriprocess, IntegrandSpec,
};
use crate::error::{Error, Result};
use crate::matrix_alg::{lp_norm, tr, tr_prod, Matrix};
use crate::process_sim::{make_fv, sq_norm2, DriverSpec, Ensemble, FvKind, ProcessPath, Role};
use crate::report::{Params, Report};
use crate::stats::Estimate;
use crate::trace_poly::{gamma_contract, ContractionModel, TracePolynomial};

/// Fixed non-Hermitian test matrix; `Re tr_n(W D)` is the scalar summary of
/// a matrix-valued discrepancy `D` in the 3-SE tests.
pub fn probe_matrix(n: usize) -> Matrix {
    Matrix::from_fn(n, n, |i, j| {
        let phase = (i + 2 * j) as f64 * 0.7;
        Complex64::from_polar(1.0 / (1.0 + i.abs_diff(j) as f64), phase)
    })
}

fn probe(w: &Matrix, d: &Matrix) -> f64 {
    tr_prod(w, d).re
}

fn params(ens: &Ensemble, t: f64) -> Params {
    Params { n: ens.n, mesh: ens.grid.mesh(), paths: ens.paths, seed: ens.seed, t }
}

fn require_martingale(ens: &Ensemble) -> Result<()> {
    match ens.driver {
        DriverSpec::Hbm => Ok(()),
        _ => Err(Error::Invalid("this check needs a martingale (Hbm) ensemble".into())),
    }
}

/// Paired comparison of per-path samples `(lhs_i, rhs_i)`.
fn paired(check: &str, p: Params, samples: &[(f64, f64)]) -> Report {
    let l: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let d: Vec<f64> = samples.iter().map(|s| s.0 - s.1).collect();
    let (l, r, d) = (Estimate::from_samples(&l), Estimate::from_samples(&r), Estimate::from_samples(&d));
    Report::with_gap(check, p, l.mean, r.mean, d.mean.abs(), d.se)
}

/// `Λ` for which the isometry's right side is the QC: `H[y1]* H[y2]` with
/// the adjoint slot unstarred (self-adjoint driver).
fn isometry_symbol(h: &TracePolynomial) -> TracePolynomial {
    h.star().unstar_slots() * h.relabel_slot(1, 2)
}

/// `‖∫_0^t H[dM]‖_2^2` against `E ∫_0^t tr_n γ(H* H) dκ`, paired per path.
pub fn ito_isometry_check(h: &IntegrandSpec, ens: &Ensemble, t: f64, model: ContractionModel) -> Result<Report> {
    require_martingale(ens)?;
    let kt = ens.grid.require_index(t)?;
    let density = gamma_contract(&isometry_symbol(&h.symbol), model)?;
    let samples = ens.try_map(|_, path| {
        let integ = h.realize(path)?;
        let u = rs_values(&integ, path)?;
        let rate = cross_rate(path, path)?;
        let mut rhs = 0.0;
        for k in 0..kt {
            if let Some((_, ctx)) = integ.step(&path.grid, path.n(), k) {
                rhs += tr(&ctx.session()?.eval(&density)?).re * rate * path.grid.dt(k);
            }
        }
        Ok((sq_norm2(&u[kt]), rhs))
    })?;
    Ok(paired("isometry", params(ens, t), &samples))
}

/// Per-path ingredients of the BDG comparison for a martingale `U`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BdgSample {
    /// `tr_n |U(t)|^2`.
    pub m2: f64,
    /// `tr_n (|U(0)|^2 + Σ ΔU* ΔU)`.
    pub qv2: f64,
    /// `tr_n |U(t)|^4`.
    pub m4: f64,
    /// `tr_n S^2` for `S = |U(0)|^2 + Σ ΔU* ΔU`.
    pub s4: f64,
    /// `tr_n S'^2` for `S' = |U(0)*|^2 + Σ ΔU ΔU*`.
    pub s4_adj: f64,
}

pub fn bdg_sample(u: &ProcessPath, t: f64) -> Result<BdgSample> {
    let kt = u.grid.require_index(t)?;
    let u0 = &u.values[0];
    let mut s = u0.adjoint() * u0;
    let mut s_adj = u0 * u0.adjoint();
    for k in 0..kt {
        let d = u.increment(k);
        s += d.adjoint() * &d;
        s_adj += &d * d.adjoint();
    }
    let ut = &u.values[kt];
    let m = ut.adjoint() * ut;
    Ok(BdgSample {
        m2: tr(&m).re,
        qv2: tr(&s).re,
        m4: tr_prod(&m, &m).re,
        s4: tr_prod(&s, &s).re,
        s4_adj: tr_prod(&s_adj, &s_adj).re,
    })
}

/// Aggregates BDG samples: `p = 2` is the paired identity
/// `‖U(t)‖_2^2 = E tr_n S`, `p = 4` reports `‖U(t)‖_4` against
/// `max(‖S^{1/2}‖_4, ‖S'^{1/2}‖_4)` without a standard error.
pub fn bdg_summary(samples: &[BdgSample], p: u32, params: Params) -> Result<Report> {
    match p {
        2 => {
            let pairs: Vec<(f64, f64)> = samples.iter().map(|s| (s.m2, s.qv2)).collect();
            Ok(paired("bdg_p2", params, &pairs))
        }
        4 => {
            let mean = |f: fn(&BdgSample) -> f64| samples.iter().map(f).sum::<f64>() / samples.len() as f64;
            let lhs = mean(|s| s.m4).powf(0.25);
            let rhs = mean(|s| s.s4).max(mean(|s| s.s4_adj)).powf(0.25);
            Ok(Report::with_gap("bdg_p4", params, lhs, rhs, (lhs - rhs).abs(), 0.0))
        }
        _ => Err(Error::Invalid(format!("BDG statistics are implemented for p = 2 and p = 4, not {p}"))),
    }
}

/// BDG statistics of `U = ∫ H[dM]` over an HBM ensemble.
pub fn bdg_stats(h: &IntegrandSpec, ens: &Ensemble, p: u32, t: f64) -> Result<Report> {
    if p != 2 && p != 4 {
        return Err(Error::Invalid(format!("BDG statistics are implemented for p = 2 and p = 4, not {p}")));
    }
    require_martingale(ens)?;
    let samples = ens.try_map(|_, path| {
        let u = rs_integral(&h.realize(path)?, path)?;
        bdg_sample(&u, t)
    })?;
    bdg_summary(&samples, p, params(ens, t))
}

/// `‖M(t) − M(s)‖_2^2` against `‖M(t)‖_2^2 − ‖M(s)‖_2^2`.
pub fn pythagoras_check(ens: &Ensemble, s: f64, t: f64) -> Result<Report> {
    require_martingale(ens)?;
    let (ks, kt) = (ens.grid.require_index(s)?, ens.grid.require_index(t)?);
    if ks >= kt {
        return Err(Error::Invalid(format!("need s < t, got ({s}, {t}]")));
    }
    let samples = ens.map(|_, p| {
        let inc = sq_norm2(&(&p.values[kt] - &p.values[ks]));
        (inc, sq_norm2(&p.values[kt]) - sq_norm2(&p.values[ks]))
    });
    Ok(paired("pythagoras", params(ens, t), &samples))
}

/// `‖quad_rs_sum − qc_closed_form‖_1` at `t` along one driver path.
pub fn qc_gap_norm(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    path: &ProcessPath,
    t: f64,
    model: ContractionModel,
) -> Result<f64> {
    let l = BoundTriprocess::from_spec(lambda, args, path)?;
    let kt = path.grid.require_index(t)?;
    let q = super::quad_rs_sum(&l, path, path, t)?;
    let c = qc_closed_form(&l, path, path, model)?;
    lp_norm(&(q - &c.values[kt]), 1.0)
}

fn fv_part(path: &ProcessPath) -> Option<&[Matrix]> {
    match path.role {
        Role::Fv => Some(&path.values),
        Role::Decomposable => path.decomposition.as_ref().map(|d| d.fv.as_slice()),
        Role::Martingale => None,
    }
}

/// `‖quad_rs_sum − Σ E[Λ(t_k)[ΔX, ΔX] | past]‖_1` at `t`, the conditional
/// means given by the contraction of the martingale part plus the
/// deterministic FV increments.
pub fn conditional_qc_gap_norm(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    path: &ProcessPath,
    t: f64,
    model: ContractionModel,
) -> Result<f64> {
    let l = BoundTriprocess::from_spec(lambda, args, path)?;
    let kt = path.grid.require_index(t)?;
    let q = super::quad_rs_sum(&l, path, path, t)?;
    let mut cond = qc_closed_form(&l, path, path, model)?.values[kt].clone();
    if let Some(a) = fv_part(path) {
        let n = path.n();
        for k in 0..kt {
            let da = &a[k + 1] - &a[k];
            cond += l.apply(n, k, &da, &da)?;
        }
    }
    lp_norm(&(q - cond), 1.0)
}

fn norm_report(check: &str, p: Params, norms: &[f64]) -> Report {
    let e = Estimate::from_samples(norms);
    Report::with_gap(check, p, e.mean, 0.0, e.mean, e.se)
}

/// Ensemble mean of [`qc_gap_norm`].
pub fn qc_gap_check(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    ens: &Ensemble,
    t: f64,
    model: ContractionModel,
) -> Result<Report> {
    let norms = ens.try_map(|_, p| qc_gap_norm(lambda, args, p, t, model))?;
    Ok(norm_report("qc", params(ens, t), &norms))
}

/// Ensemble mean of [`conditional_qc_gap_norm`].
pub fn conditional_qc_check(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    ens: &Ensemble,
    t: f64,
    model: ContractionModel,
) -> Result<Report> {
    let norms = ens.try_map(|_, p| conditional_qc_gap_norm(lambda, args, p, t, model))?;
    Ok(norm_report("cond_qc", params(ens, t), &norms))
}

/// The second integrator of a QC-of-integrals check.
#[derive(Clone, Debug)]
pub enum SecondLeg {
    /// `Y = X`.
    Same,
    /// A deterministic FV path.
    Fv(FvKind),
}

/// QC of `U = ∫H[dX]`, `V = ∫K[dY]` summed directly against the closed
/// form of the composed symbol `Λ[H·, K·]`, paired per path.
#[allow(clippy::too_many_arguments)]
pub fn qc_of_integrals_check(
    h: &TracePolynomial,
    k: &TracePolynomial,
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    ens: &Ensemble,
    second: &SecondLeg,
    t: f64,
    model: ContractionModel,
) -> Result<Report> {
    let kt = ens.grid.require_index(t)?;
    let composed = lambda.compose_bilinear(h, k).unstar_slots();
    let w = probe_matrix(ens.n);
    let samples = ens.try_map(|_, x| {
        let y = match second {
            SecondLeg::Same => x.clone(),
            SecondLeg::Fv(kind) => make_fv(kind, x.n(), x.grid.clone()),
        };
        let u = rs_values(&IntegrandSpec::adapted(h.clone(), args.clone()).realize(x)?, x)?;
        let v = rs_values(&IntegrandSpec::adapted(k.clone(), args.clone()).realize(x)?, &y)?;
        let l = BoundTriprocess::from_spec(lambda, args, x)?;
        let n = x.n();
        let mut direct = Matrix::zeros(n, n);
        for j in 0..kt {
            direct += l.apply(n, j, &(&u[j + 1] - &u[j]), &(&v[j + 1] - &v[j]))?;
        }
        let lc = BoundTriprocess::from_spec(&composed, args, x)?;
        let closed = &qc_closed_form(&lc, x, &y, model)?.values[kt];
        Ok((probe(&w, &direct), probe(&w, closed)))
    })?;
    Ok(paired("qc_of_integrals", params(ens, t), &samples))
}

/// `∫H[dU]` with `U = ∫K[dX]` against `∫H[K[·]][dX]`, paired per path.
pub fn substitution_check(
    h: &TracePolynomial,
    k: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    ens: &Ensemble,
    t: f64,
) -> Result<Report> {
    let kt = ens.grid.require_index(t)?;
    let hk = h.substitute_slot(1, k);
    let w = probe_matrix(ens.n);
    let samples = ens.try_map(|_, x| {
        let u = rs_integral(&IntegrandSpec::adapted(k.clone(), args.clone()).realize(x)?, x)?;
        let lhs = rs_values(&IntegrandSpec::adapted(h.clone(), args.clone()).realize(x)?, &u)?;
        let rhs = rs_values(&IntegrandSpec::adapted(hk.clone(), args.clone()).realize(x)?, x)?;
        Ok((probe(&w, &lhs[kt]), probe(&w, &rhs[kt])))
    })?;
    Ok(paired("substitution", params(ens, t), &samples))
}

/// Product-rule rearrangement along one path with `Y = X`:
/// `‖RS(Λ)(t) − (Λ[X, X](t) − Λ(0)[X(0), X(0)] − ∫dΛ[X, X] − ∫Λ[dX, X]
/// − ∫Λ[X, dX])‖_1`, every sum taken at left endpoints.
pub fn product_rule_gap_norm(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    x: &ProcessPath,
    t: f64,
) -> Result<f64> {
    let l = BoundTriprocess::from_spec(lambda, args, x)?;
    let kt = x.grid.require_index(t)?;
    let n = x.n();
    let xs = &x.values;
    let q = super::quad_rs_sum(&l, x, x, t)?;
    let mut rhs = l.apply(n, kt, &xs[kt], &xs[kt])? - l.apply(n, 0, &xs[0], &xs[0])?;
    for (k, xk) in xs.iter().enumerate().take(kt) {
        let dx = x.increment(k);
        let here = l.apply(n, k, xk, xk)?;
        let dl = l.apply(n, k + 1, xk, xk)? - here;
        rhs -= dl + l.apply(n, k, &dx, xk)? + l.apply(n, k, xk, &dx)?;
    }
    lp_norm(&(q - rhs), 1.0)
}

pub fn product_rule_check(
    lambda: &TracePolynomial,
    args: &BTreeMap<u32, ArgSpec>,
    ens: &Ensemble,
    t: f64,
) -> Result<Report> {
    let norms = ens.try_map(|_, x| product_rule_gap_norm(lambda, args, x, t))?;
    Ok(norm_report("product_rule", params(ens, t), &norms))
}

