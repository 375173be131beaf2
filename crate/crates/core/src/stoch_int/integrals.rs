use num_complex::Complex64;

use super::{check_args, context_at, BoundTriprocess, ElementaryPredictable, Integrand};
use crate::error::{Error, Result};
use crate::evaluator::{EvalContext, YBindings};
use crate::matrix_alg::Matrix;
use crate::process_sim::{Lineage, ProcessPath, Role};
use crate::trace_poly::{gamma_contract, ContractionModel};

/// `Σ_i H_i[X(t_i ∧ t) − X(s_i ∧ t)]`.
pub fn elementary_integral(h: &ElementaryPredictable, x: &ProcessPath, t: f64) -> Result<Matrix> {
    let grid = &x.grid;
    grid.require_index(t)?;
    let n = x.n();
    let mut out = Matrix::zeros(n, n);
    for p in &h.pieces {
        let a = x.values[grid.require_index(p.s.min(t))?].clone();
        let b = &x.values[grid.require_index(p.t.min(t))?];
        let d = b - a;
        let mut ctx = EvalContext::new(n);
        ctx.bindings = p.bindings.clone();
        out += ctx.session()?.eval_multilinear(&p.symbol, &YBindings::slots(&[&d]))?;
    }
    Ok(out)
}

fn integrate(h: &Integrand<'_>, x: &ProcessPath, values: &[Matrix]) -> Result<Vec<Matrix>> {
    let n = x.n();
    let mut acc = Matrix::zeros(n, n);
    let mut out = Vec::with_capacity(values.len());
    out.push(acc.clone());
    for k in 0..x.steps() {
        let d = &values[k + 1] - &values[k];
        acc += h.apply(&x.grid, n, k, &d)?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// Cumulative left-endpoint sums `Σ_{t_{k+1} <= t} H(t_k)[ΔX_k]` at every
/// grid time.
pub fn rs_values(h: &Integrand<'_>, x: &ProcessPath) -> Result<Vec<Matrix>> {
    h.validate(&x.grid, x.n())?;
    integrate(h, x, &x.values)
}

/// Evaluation point of an RS sum against an FV integrator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    Left,
    Right,
}

/// Cumulative RS sums with the integrand read at the chosen endpoint. Only
/// FV integrators accept right endpoints: against a martingale the limit
/// depends on the tag.
pub fn rs_values_tagged(h: &Integrand<'_>, x: &ProcessPath, tag: Tag) -> Result<Vec<Matrix>> {
    if tag == Tag::Left {
        return rs_values(h, x);
    }
    if x.role != Role::Fv {
        return Err(Error::Invalid("right-endpoint sums need an FV integrator".into()));
    }
    let Integrand::Bound(b) = h else {
        return Err(Error::Invalid("right-endpoint sums need an adapted integrand".into()));
    };
    h.validate(&x.grid, x.n())?;
    let n = x.n();
    let mut acc = Matrix::zeros(n, n);
    let mut out = Vec::with_capacity(x.values.len());
    out.push(acc.clone());
    for k in 0..x.steps() {
        acc += b.apply(n, k + 1, &x.increment(k))?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// The integral path `∫_0^· H[dX]`; a decomposable driver yields a
/// decomposable integral with the parts integrated separately.
pub fn rs_integral(h: &Integrand<'_>, x: &ProcessPath) -> Result<ProcessPath> {
    let values = rs_values(h, x)?;
    let decomposition = match &x.decomposition {
        Some(d) => Some(crate::process_sim::Decomposition {
            martingale: integrate(h, x, &d.martingale)?,
            fv: integrate(h, x, &d.fv)?,
        }),
        None => None,
    };
    Ok(ProcessPath { grid: x.grid.clone(), values, role: x.role, decomposition, lineage: None })
}

fn check_pair(l: &BoundTriprocess<'_>, x: &ProcessPath, y: &ProcessPath) -> Result<()> {
    if x.grid != y.grid {
        return Err(Error::GridMismatch);
    }
    if x.n() != y.n() {
        return Err(Error::Dimension { expected: x.n(), got: y.n() });
    }
    check_args(&l.args, &x.grid, x.n())
}

/// Cumulative quadratic sums `Σ Λ(t_k)[ΔX_k, ΔY_k]` at every grid time.
pub fn quad_rs_path(l: &BoundTriprocess<'_>, x: &ProcessPath, y: &ProcessPath) -> Result<Vec<Matrix>> {
    check_pair(l, x, y)?;
    let n = x.n();
    let mut acc = Matrix::zeros(n, n);
    let mut out = Vec::with_capacity(x.grid.len());
    out.push(acc.clone());
    for k in 0..x.steps() {
        acc += l.apply(n, k, &x.increment(k), &y.increment(k))?;
        out.push(acc.clone());
    }
    Ok(out)
}

/// Quadratic left-endpoint sum up to the grid time `t`.
pub fn quad_rs_sum(l: &BoundTriprocess<'_>, x: &ProcessPath, y: &ProcessPath, t: f64) -> Result<Matrix> {
    check_pair(l, x, y)?;
    let end = x.grid.require_index(t)?;
    let n = x.n();
    let mut acc = Matrix::zeros(n, n);
    for k in 0..end {
        acc += l.apply(n, k, &x.increment(k), &y.increment(k))?;
    }
    Ok(acc)
}

fn brownian_lineage(p: &ProcessPath) -> Result<Option<Lineage>> {
    match (p.role, p.lineage) {
        (Role::Fv, _) => Ok(None),
        (_, Some(l)) => Ok(Some(l)),
        _ => Err(Error::Invalid("closed forms need a simulated Hermitian Brownian driver or an FV path".into())),
    }
}

/// Density of `κ` shared by the martingale parts of `x` and `y` against
/// `dt`: 1 when both are driven by the same simulated Brownian motion,
/// 0 when either is FV or the motions are independent.
pub fn cross_rate(x: &ProcessPath, y: &ProcessPath) -> Result<f64> {
    match (brownian_lineage(x)?, brownian_lineage(y)?) {
        (Some(a), Some(b)) if a == b => Ok(1.0),
        _ => Ok(0.0),
    }
}

/// `∫_0^· γ(Λ)(t) κ(dt)` with the left-endpoint rectangle rule; FV role.
pub fn qc_closed_form(
    l: &BoundTriprocess<'_>,
    x: &ProcessPath,
    y: &ProcessPath,
    model: ContractionModel,
) -> Result<ProcessPath> {
    check_pair(l, x, y)?;
    let contracted = gamma_contract(&l.symbol, model)?;
    let rate = cross_rate(x, y)?;
    let n = x.n();
    let mut acc = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(x.grid.len());
    values.push(acc.clone());
    for k in 0..x.steps() {
        if rate != 0.0 {
            let density = context_at(&l.args, n, k).session()?.eval(&contracted)?;
            acc += density * Complex64::new(rate * x.grid.dt(k), 0.0);
        }
        values.push(acc.clone());
    }
    Ok(ProcessPath { grid: x.grid.clone(), values, role: Role::Fv, decomposition: None, lineage: None })
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;
    use std::sync::Arc;

    use super::*;
    use crate::matrix_alg::max_abs;
    use crate::process_sim::{make_fv, simulate_hbm, FvKind, RngStream, TimeGrid};
    use crate::stoch_int::{Arg, ArgSpec, BoundBiprocess, EpPiece, IntegrandSpec};
    use crate::trace_poly::parse;

    fn grid(h: f64) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(1.0, h).unwrap())
    }

    #[test]
    fn identity_integral_telescopes() {
        let x = simulate_hbm(3, grid(0.1), &RngStream::new(1, 0));
        let h = Integrand::Bound(BoundBiprocess::identity());
        let u = rs_integral(&h, &x).unwrap();
        for k in 0..x.grid.len() {
            assert!(max_abs(&(&u.values[k] - &x.values[k])) < 1e-14);
        }
        assert_eq!(u.role, Role::Martingale);
    }

    #[test]
    fn elementary_matches_window_increments() {
        let x = simulate_hbm(3, grid(0.1), &RngStream::new(2, 0));
        let piece = |s: f64, t: f64| EpPiece {
            s,
            t,
            symbol: parse("y1").unwrap(),
            bindings: BTreeMap::new(),
            frozen_at: s,
        };
        let h = ElementaryPredictable::new(vec![piece(0.0, 1.0)]).unwrap();
        let v = elementary_integral(&h, &x, 0.5).unwrap();
        assert!(max_abs(&(v - &x.values[5])) < 1e-14);
        assert!(elementary_integral(&h, &x, 0.55).is_err());
        let split = ElementaryPredictable::new(vec![piece(0.0, 0.3), piece(0.3, 1.0)]).unwrap();
        let w = elementary_integral(&split, &x, 1.0).unwrap();
        assert!(max_abs(&(w - &x.values[10])) < 1e-13);
        let later = elementary_integral(&split, &x, 1.0).unwrap() - elementary_integral(&split, &x, 0.4).unwrap();
        assert!(max_abs(&(later - (&x.values[10] - &x.values[4]))) < 1e-13);
        assert!(ElementaryPredictable::new(vec![piece(0.0, 0.5), piece(0.4, 1.0)]).is_err());
    }

    #[test]
    fn rs_path_agrees_with_elementary_integral() {
        let x = simulate_hbm(3, grid(0.1), &RngStream::new(3, 0));
        let a = Matrix::from_fn(3, 3, |i, j| Complex64::new(i as f64 - j as f64, 1.0));
        let args = BTreeMap::from([(2, Arg::Constant(a))]);
        let h = BoundBiprocess::new(parse("x2 y1 x2'").unwrap(), args).unwrap();
        let e = ElementaryPredictable::freeze(&h, &x.grid, &[(0.2, 0.7)]).unwrap();
        let path = rs_values(&Integrand::Elementary(e.clone()), &x).unwrap();
        for t in [0.0, 0.3, 0.7, 1.0] {
            let k = x.grid.index_of(t).unwrap();
            let direct = elementary_integral(&e, &x, t).unwrap();
            assert!(max_abs(&(direct - &path[k])) < 1e-12);
        }
    }

    #[test]
    fn fv_tags_agree_in_the_limit() {
        let gap = |h: f64| {
            let g = grid(h);
            let a = make_fv(&FvKind::scalar(f64::sin), 2, g.clone());
            let args = BTreeMap::from([(1, ArgSpec::Driver)]);
            let h = IntegrandSpec::adapted(parse("x1 y1").unwrap(), args).realize(&a).unwrap();
            let l = rs_values_tagged(&h, &a, Tag::Left).unwrap();
            let r = rs_values_tagged(&h, &a, Tag::Right).unwrap();
            // ∫ sin d(sin) = sin²/2 on both sides
            let exact = 0.5 * 1f64.sin().powi(2);
            (l.last().unwrap()[(0, 0)].re - exact, r.last().unwrap()[(0, 0)].re - exact)
        };
        let (l1, r1) = gap(0.01);
        let (l2, r2) = gap(0.001);
        assert!(l1 < 0.0 && r1 > 0.0);
        assert!((l1 / l2 - 10.0).abs() < 0.5 && (r1 / r2 - 10.0).abs() < 0.5);
    }

    #[test]
    fn right_tags_need_fv_integrators() {
        let x = simulate_hbm(2, grid(0.1), &RngStream::new(1, 0));
        let h = IntegrandSpec::identity().realize(&x).unwrap();
        assert!(rs_values_tagged(&h, &x, Tag::Right).is_err());
    }

    #[test]
    fn fv_quad_sum_vanishes_linearly() {
        let mut sums = Vec::new();
        for h in [0.01, 0.001] {
            let a = make_fv(&FvKind::scalar(|t| t), 2, grid(h));
            let l = BoundTriprocess::new(parse("y1 y2").unwrap(), BTreeMap::new()).unwrap();
            sums.push(quad_rs_sum(&l, &a, &a, 1.0).unwrap()[(0, 0)].re);
        }
        assert!((sums[0] - 0.01).abs() < 1e-12);
        assert!((sums[1] - 0.001).abs() < 1e-12);
    }

    #[test]
    fn closed_form_of_sandwich() {
        let x = simulate_hbm(2, grid(0.25), &RngStream::new(4, 0));
        let b = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(3.0, 0.0)]));
        let args = BTreeMap::from([(1, Arg::Constant(b))]);
        let l = BoundTriprocess::new(parse("y1 x1 y2").unwrap(), args).unwrap();
        let c = qc_closed_form(&l, &x, &x, ContractionModel::Matrix { n: 2 }).unwrap();
        assert!(max_abs(&(&c.values[4] - Matrix::identity(2, 2) * Complex64::new(2.0, 0.0))) < 1e-14);
        let a = make_fv(&FvKind::scalar(|t| t), 2, x.grid.clone());
        let z = qc_closed_form(&l, &x, &a, ContractionModel::Matrix { n: 2 }).unwrap();
        assert_eq!(max_abs(&z.values[4]), 0.0);
        let other = simulate_hbm(2, x.grid.clone(), &RngStream::new(4, 1));
        assert_eq!(cross_rate(&x, &other).unwrap(), 0.0);
        let u = rs_integral(&Integrand::Bound(BoundBiprocess::identity()), &x).unwrap();
        assert!(cross_rate(&u, &x).is_err());
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let x = simulate_hbm(2, grid(0.25), &RngStream::new(5, 0));
        let y = simulate_hbm(2, grid(0.5), &RngStream::new(5, 1));
        let l = BoundTriprocess::new(parse("y1 y2").unwrap(), BTreeMap::new()).unwrap();
        assert!(matches!(quad_rs_sum(&l, &x, &y, 1.0), Err(Error::GridMismatch)));
        let h = BoundBiprocess::new(parse("x1 y1").unwrap(), BTreeMap::from([(1, Arg::Path(&y))])).unwrap();
        assert!(rs_integral(&Integrand::Bound(h), &x).is_err());
        assert!(BoundTriprocess::new(parse("y1 y1").unwrap(), BTreeMap::new()).is_err());
    }
}
