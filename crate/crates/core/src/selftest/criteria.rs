use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::oracles::{
    complete_homogeneous_exact, dk_monomial, polynomial_in_x1, random_hermitian, random_matrix,
    random_polynomial, simplex_quadrature,
};
use super::CriterionOutcome;
use crate::error::Result;
use crate::evaluator::{EvalContext, YBindings};
use crate::ito_verifier::{convergence_study, ito_residual_path, PolyStepper, StudyParams, StudyTarget};
use crate::matrix_alg::{
    divided_diff, divided_diff_exact, dk_operator_function, esd_distance, hermitian_onb, lp_norm, magic_sum,
    max_abs, moi, op_function, tr, tr_prod, Matrix, ScalarFunctionSpec,
};
use crate::process_sim::{
    derive_seed, hbm_increment, make_fv, simulate_hbm, DriverSpec, Ensemble, FvKind, RngStream, TimeGrid,
};
use crate::report::{Params, Report};
use crate::stats::{loglog_slope, Estimate};
use crate::stoch_int::{
    bdg_stats, driver_and_constants, ito_isometry_check, probe_matrix, pythagoras_check, qc_closed_form,
    qc_of_integrals_check, quad_rs_sum, substitution_check, ArgSpec, BoundTriprocess, IntegrandSpec, SecondLeg,
};
use crate::trace_poly::{derive, derive_k, gamma_contract, parse, ContractionModel, TracePolynomial};

fn rng(seed: u64, tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, tag))
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rel_err(a: &Matrix, b: &Matrix) -> f64 {
    max_abs(&(a - b)) / max_abs(b).max(1e-300)
}

fn matrix_model(n: usize) -> ContractionModel {
    ContractionModel::Matrix { n: n as u32 }
}

pub(super) fn c01_golden(_seed: u64) -> Result<CriterionOutcome> {
    let p = parse("x1 x2 x2' x3 + 3i tr(x1 x2') x2 + x1' x3^2 + 5")?;
    let d = derive(&p, 2)?;
    let expected = parse("x1 y1 x2' x3 + x1 x2 y1' x3 + 3i tr(x1 y1') x2 + 3i tr(x1 x2') y1")?;
    Ok(CriterionOutcome::new(1, d == expected, format!("d/dx2 P = {d}"), vec![]))
}

pub(super) fn c02_power_derivatives(_seed: u64) -> Result<CriterionOutcome> {
    let mut bad = Vec::new();
    for m in 0..=6 {
        for k in 1..=3 {
            let mut coeffs = vec![0; m + 1];
            coeffs[m] = 1;
            if derive_k(&polynomial_in_x1(&coeffs), k as u32)? != dk_monomial(m, k) {
                bad.push(format!("(n={m}, k={k})"));
            }
        }
    }
    let detail = if bad.is_empty() { "21 cases equal".to_string() } else { format!("mismatch at {}", bad.join(" ")) };
    Ok(CriterionOutcome::new(2, bad.is_empty(), detail, vec![]))
}

pub(super) fn c03_finite_differences(seed: u64) -> Result<CriterionOutcome> {
    let mut g = rng(seed, 3);
    let (n, eps) = (8, 1e-4);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let vars = g.random_range(1..=3u32);
        let p = random_polynomial(vars, 4, &mut g);
        let present: Vec<u32> = (1..=vars).filter(|&i| p.has_letter(|l| l.is_x() && l.index == i)).collect();
        let a: Vec<Matrix> = (0..vars).map(|_| random_hermitian(n, &mut g)).collect();
        let b = random_hermitian(n, &mut g);
        if present.is_empty() {
            continue;
        }
        let i = present[g.random_range(0..present.len())];
        let exact = EvalContext::from_slice(&a).session()?.eval_multilinear(&derive(&p, i)?, &YBindings::slots(&[&b]))?;
        let shifted = |s: f64| {
            let mut a2 = a.clone();
            a2[i as usize - 1] += &b * c(s);
            EvalContext::from_slice(&a2).session()?.eval(&p)
        };
        let fd = (shifted(eps)? - shifted(-eps)?) * c(0.5 / eps);
        let err = if max_abs(&exact) < 1e-12 { max_abs(&fd) } else { rel_err(&fd, &exact) };
        worst = worst.max(err);
    }
    Ok(CriterionOutcome::new(3, worst <= 1e-6, format!("max relative error {worst:.3e}"), vec![]))
}

pub(super) fn c04_magic(seed: u64) -> Result<CriterionOutcome> {
    let mut g = rng(seed, 4);
    let mut worst: f64 = 0.0;
    for n in [2, 4, 8, 16] {
        let basis = hermitian_onb(n);
        for _ in 0..20 {
            let a = random_hermitian(n, &mut g);
            let lhs = magic_sum(&a, &basis)?;
            worst = worst.max(max_abs(&(lhs - Matrix::identity(n, n) * tr(&a))));
        }
    }
    Ok(CriterionOutcome::new(4, worst <= 1e-12, format!("max deviation {worst:.3e}"), vec![]))
}

pub(super) fn c05_gamma_rules(seed: u64) -> Result<CriterionOutcome> {
    let (n, dt, samples) = (8usize, 1e-3, 100_000u64);
    let mut g = rng(seed, 5);
    let mats: Vec<Matrix> = (0..3).map(|_| random_matrix(n, &mut g)).collect();
    let ctx = EvalContext::from_slice(&mats);
    let w = probe_matrix(n);
    let rules = [
        ("R1", "x1 y1 x2 y2 x3"),
        ("R2", "tr(x1 y1 x2 y2)"),
        ("R3", "tr(x1 y1) tr(x2 y2)"),
        ("R4", "tr(x1 y1) x2 y2 x3"),
    ];
    let mut reports = Vec::new();
    let mut pass = true;
    let mut detail = Vec::new();
    for (r, (name, sym)) in rules.iter().enumerate() {
        let lam = parse(sym)?;
        let closed = ctx.session()?.eval(&gamma_contract(&lam, matrix_model(n))?)?;
        let stream_seed = derive_seed(seed, 50 + r as u64);
        let vals = (0..samples)
            .into_par_iter()
            .map(|i| {
                let d = hbm_increment(n, dt, &mut RngStream::new(stream_seed, i).for_step(0));
                let m = ctx.session()?.eval_multilinear(&lam, &YBindings::slots(&[&d, &d]))?;
                Ok(tr_prod(&w, &m).re / dt)
            })
            .collect::<Result<Vec<f64>>>()?;
        let e = Estimate::from_samples(&vals);
        let params = Params { n, mesh: dt, paths: samples as usize, seed: stream_seed, t: dt };
        let rep = Report::compare(&format!("gamma_{name}"), params, e.mean, tr_prod(&w, &closed).re, e.se);
        pass &= rep.within_se(3.0);
        detail.push(format!("{name} z={:.2}", rep.zscore));
        reports.push(rep);
    }
    Ok(CriterionOutcome::new(5, pass, detail.join(", "), reports))
}

pub(super) fn c06_qc_convergence(seed: u64) -> Result<CriterionOutcome> {
    let n = 16;
    let a = random_hermitian(n, &mut rng(seed, 6));
    let params = StudyParams {
        n,
        horizon: 1.0,
        paths: 200,
        seed: derive_seed(seed, 60),
        driver: DriverSpec::Hbm,
        model: matrix_model(n),
        target: StudyTarget::Bilinear { lambda: parse("y1 x2 y2")?, args: driver_and_constants(&[a]) },
    };
    let r = convergence_study("qc", &[0.02, 0.01, 0.005, 0.0025], &params)?;
    let monotone = r.residuals.windows(2).all(|w| w[1] < w[0]);
    let slope = r.slope.unwrap_or(f64::NAN);
    let pass = monotone && (0.3..=0.7).contains(&slope);
    let detail = format!("gaps {:?}, slope {slope:.3}", r.residuals.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>());
    Ok(CriterionOutcome::new(6, pass, detail, r.to_reports()))
}

pub(super) fn c07_ito_residuals(seed: u64) -> Result<CriterionOutcome> {
    let n = 16;
    let meshes = [0.02, 0.01, 0.005, 0.0025, 0.00125];
    let mut reports = Vec::new();
    let mut pass = true;
    let mut detail = Vec::new();
    for (j, poly) in ["x1^2", "x1^4", "tr(x1^2) x1"].iter().enumerate() {
        let params = StudyParams {
            n,
            horizon: 1.0,
            paths: 32,
            seed: derive_seed(seed, 70 + j as u64),
            driver: DriverSpec::Hbm,
            model: matrix_model(n),
            target: StudyTarget::Poly(parse(poly)?),
        };
        let r = convergence_study("ito", &meshes, &params)?;
        let factors = r.reduction_factors();
        let ok = factors.iter().all(|&f| f >= 1.3);
        pass &= ok;
        detail.push(format!("{poly}: factors {}", factors.iter().map(|f| format!("{f:.3}")).collect::<Vec<_>>().join("/")));
        reports.extend(r.to_reports());
    }
    let grid = Arc::new(TimeGrid::uniform(1.0, 0.00125)?);
    let x = simulate_hbm(n, grid.clone(), &RngStream::new(derive_seed(seed, 79), 0));
    let affine = PolyStepper::new(&parse("3 x1 - 2 + i tr(x1)")?, matrix_model(n))?;
    let mut worst: f64 = 0.0;
    for m in ito_residual_path(&affine, &[&x])? {
        worst = worst.max(lp_norm(&m, 1.0)?);
    }
    pass &= worst <= 1e-12;
    detail.push(format!("affine residual {worst:.3e}"));
    let params = Params { n, mesh: grid.mesh(), paths: 1, seed: derive_seed(seed, 79), t: 1.0 };
    reports.push(Report::with_gap("ito_affine", params, worst, 0.0, worst, 0.0));
    Ok(CriterionOutcome::new(7, pass, detail.join("; "), reports))
}

fn sandwich_args(n: usize, seed: u64, tag: u64) -> BTreeMap<u32, ArgSpec> {
    let mut g = rng(seed, tag);
    let c1 = random_matrix(n, &mut g);
    let c2 = random_matrix(n, &mut g);
    driver_and_constants(&[c1, c2])
}

pub(super) fn c08_isometry(seed: u64) -> Result<CriterionOutcome> {
    let n = 8;
    let ens = Ensemble::hbm(n, 1.0, 0.01, 1000, derive_seed(seed, 80))?;
    let sandwich = IntegrandSpec::elementary(parse("x2 y1 x3")?, sandwich_args(n, seed, 81), vec![(0.25, 0.75)]);
    let mut reports = Vec::new();
    for h in [IntegrandSpec::identity(), sandwich] {
        reports.push(ito_isometry_check(&h, &ens, 1.0, matrix_model(n))?);
    }
    let pass = reports.iter().all(|r| r.within_se(3.0));
    let detail = format!("identity z={:.2}, sandwich z={:.2}", reports[0].zscore, reports[1].zscore);
    Ok(CriterionOutcome::new(8, pass, detail, reports))
}

pub(super) fn c09_bdg(seed: u64) -> Result<CriterionOutcome> {
    let n = 8;
    let ens = Ensemble::hbm(n, 1.0, 0.01, 1000, derive_seed(seed, 90))?;
    let sandwich = IntegrandSpec::elementary(parse("x2 y1 x3")?, sandwich_args(n, seed, 91), vec![(0.2, 0.6)]);
    let mut reports = vec![
        bdg_stats(&IntegrandSpec::identity(), &ens, 2, 1.0)?,
        bdg_stats(&sandwich, &ens, 2, 1.0)?,
    ];
    let mut pass = reports.iter().all(|r| r.within_se(3.0));
    let mut detail = format!("HBM z={:.2}, integral z={:.2}", reports[0].zscore, reports[1].zscore);
    for (j, m) in [4usize, 16, 64].into_iter().enumerate() {
        let e = Ensemble::hbm(m, 1.0, 0.05, 100, derive_seed(seed, 92 + j as u64))?;
        let r = bdg_stats(&IntegrandSpec::identity(), &e, 4, 1.0)?;
        let ratio = r.lhs / r.rhs;
        pass &= ratio > 0.2 && ratio < 5.0;
        detail.push_str(&format!(", p=4 ratio n={m}: {ratio:.3}"));
        reports.push(r);
    }
    Ok(CriterionOutcome::new(9, pass, detail, reports))
}

pub(super) fn c10_pythagoras(seed: u64) -> Result<CriterionOutcome> {
    let ens = Ensemble::hbm(8, 1.0, 0.01, 1000, derive_seed(seed, 100))?;
    let mut g = rng(seed, 10);
    let mut reports = Vec::new();
    for _ in 0..10 {
        let s = g.random_range(1..100usize);
        let t = g.random_range(s + 1..=100usize);
        reports.push(pythagoras_check(&ens, s as f64 * 0.01, t as f64 * 0.01)?);
    }
    let pass = reports.iter().all(|r| r.within_se(3.0));
    let zmax = reports.iter().map(|r| r.zscore).fold(0.0, f64::max);
    Ok(CriterionOutcome::new(10, pass, format!("max z={zmax:.2} over 10 pairs"), reports))
}

pub(super) fn c11_fv_kills_qc(seed: u64) -> Result<CriterionOutcome> {
    let (n, paths) = (4usize, 8usize);
    let mut g = rng(seed, 11);
    let (c1, c2, d) = (random_hermitian(n, &mut g), random_hermitian(n, &mut g), random_hermitian(n, &mut g));
    let smooth = FvKind::SmoothMatrix(Arc::new(move |t: f64| &c1 * c(t.sin()) + &c2 * c(t * t)));
    let scalar = FvKind::scalar(f64::sin);
    let fine = Arc::new(TimeGrid::uniform(1.0, 1e-4)?);
    let strides = [100usize, 10, 1];
    let meshes: Vec<f64> = strides.iter().map(|&s| s as f64 * 1e-4).collect();
    let lam = parse("y1 x1 y2")?;
    let consts = BTreeMap::from([(1, ArgSpec::Constant(d))]);
    let stream_seed = derive_seed(seed, 110);
    // norms[path][pair][mesh]
    let norms = (0..paths)
        .into_par_iter()
        .map(|i| {
            let m = simulate_hbm(n, fine.clone(), &RngStream::new(stream_seed, i as u64));
            let b = make_fv(&smooth, n, fine.clone());
            let a = make_fv(&scalar, n, fine.clone());
            let mut out = vec![vec![0.0; strides.len()]; 2];
            for (j, &s) in strides.iter().enumerate() {
                let (ms, bs, as_) = (m.subsample(s)?, b.subsample(s)?, a.subsample(s)?);
                let l = BoundTriprocess::from_spec(&lam, &consts, &ms)?;
                out[0][j] = lp_norm(&quad_rs_sum(&l, &ms, &bs, 1.0)?, 1.0)?;
                out[1][j] = lp_norm(&quad_rs_sum(&l, &as_, &bs, 1.0)?, 1.0)?;
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    let mut pass = true;
    let mut detail = Vec::new();
    for (pair, name) in ["qc_fv_mart", "qc_fv_fv"].iter().enumerate() {
        let means: Vec<Estimate> = (0..strides.len())
            .map(|j| Estimate::from_samples(&norms.iter().map(|p| p[pair][j]).collect::<Vec<_>>()))
            .collect();
        let vals: Vec<f64> = means.iter().map(|e| e.mean).collect();
        let slope = loglog_slope(&meshes, &vals);
        let last = vals[vals.len() - 1];
        pass &= (0.8..=1.2).contains(&slope) && last <= 1e-3;
        detail.push(format!("{name}: slope {slope:.3}, final {last:.3e}"));
        for (j, e) in means.iter().enumerate() {
            let params = Params { n, mesh: meshes[j], paths, seed: stream_seed, t: 1.0 };
            let mut r = Report::with_gap(name, params, e.mean, 0.0, e.mean, e.se);
            r.slope = Some(slope);
            reports.push(r);
        }
    }
    Ok(CriterionOutcome::new(11, pass, detail.join("; "), reports))
}

pub(super) fn c12_substitution(seed: u64) -> Result<CriterionOutcome> {
    let n = 8;
    let ens = Ensemble::hbm(n, 1.0, 1e-3, 200, derive_seed(seed, 120))?;
    let mut g = rng(seed, 12);
    let consts: Vec<Matrix> = (0..3).map(|_| random_matrix(n, &mut g)).collect();
    let args = driver_and_constants(&consts);
    let (h, k) = (parse("x2 y1 x3")?, parse("x1 y1 + y1 x4")?);
    let model = matrix_model(n);
    let lam = parse("y1 x2' y2")?;
    let sandwich_k = parse("x4 y1")?;
    let reports = vec![
        substitution_check(&h, &k, &args, &ens, 1.0)?,
        qc_of_integrals_check(&h, &sandwich_k, &lam, &args, &ens, &SecondLeg::Same, 1.0, model)?,
        qc_of_integrals_check(&h, &k, &lam, &args, &ens, &SecondLeg::Same, 1.0, model)?,
        qc_of_integrals_check(&h, &sandwich_k, &lam, &args, &ens, &SecondLeg::Fv(FvKind::scalar(f64::sin)), 1.0, model)?,
    ];
    let mesh = ens.grid.mesh();
    let pass = reports.iter().all(|r| r.gap <= 3.0 * r.se + mesh);
    let detail = reports.iter().map(|r| format!("{} gap {:.3e} se {:.3e}", r.check, r.gap, r.se)).collect::<Vec<_>>().join("; ");
    Ok(CriterionOutcome::new(12, pass, detail, reports))
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub(super) fn c13_divided_differences(seed: u64) -> Result<CriterionOutcome> {
    let mut g = rng(seed, 13);
    let mut exact_ok = true;
    let mut float_worst: f64 = 0.0;
    for deg in 0..=8usize {
        for k in 0..=4usize {
            let coeffs: Vec<BigRational> = (0..=deg).map(|_| rational(g.random_range(-9..=9), 1)).collect();
            let mut nodes: Vec<BigRational> =
                (0..=k).map(|_| rational(g.random_range(-12..=12), g.random_range(1..=4))).collect();
            if k >= 2 {
                nodes[1] = nodes[0].clone();
            }
            let newton = divided_diff_exact(&coeffs, &nodes);
            let closed = (k..=deg).fold(rational(0, 1), |acc, m| {
                acc + &coeffs[m] * complete_homogeneous_exact(&nodes, m - k)
            });
            exact_ok &= newton == closed;
            let f = ScalarFunctionSpec::real_polynomial(&coeffs.iter().map(|c| c.to_f64().unwrap()).collect::<Vec<_>>());
            let fnodes: Vec<f64> = nodes.iter().map(|v| v.to_f64().unwrap()).collect();
            let exact = closed.to_f64().unwrap();
            let err = (divided_diff(&f, &fnodes).re - exact).abs() / exact.abs().max(1.0);
            float_worst = float_worst.max(err);
        }
    }
    let f = ScalarFunctionSpec::ExpSum(vec![(c(1.0), 1.0), (Complex64::new(0.5, -0.25), -2.0)]);
    let mut quad_worst: f64 = 0.0;
    for k in 1..=2usize {
        for _ in 0..20 {
            let nodes: Vec<f64> = (0..=k).map(|_| g.random_range(-2.0..2.0)).collect();
            let err = (divided_diff(&f, &nodes) - simplex_quadrature(&f, &nodes)).norm();
            quad_worst = quad_worst.max(err);
        }
    }
    let pass = exact_ok && float_worst <= 1e-12 && quad_worst <= 1e-8;
    let detail = format!(
        "exact closed form {}, float error {float_worst:.3e}, exp-sum vs quadrature {quad_worst:.3e}",
        if exact_ok { "equal" } else { "MISMATCH" }
    );
    Ok(CriterionOutcome::new(13, pass, detail, vec![]))
}

pub(super) fn c14_moi_derivatives(seed: u64) -> Result<CriterionOutcome> {
    let n = 8;
    let mut g = rng(seed, 14);
    let f = ScalarFunctionSpec::ExpSum(vec![(c(1.0), 1.0), (Complex64::new(0.5, -0.25), -2.0)]);
    let (mut w1, mut w2): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let a = random_hermitian(n, &mut g);
        let b = random_hermitian(n, &mut g);
        let at = |s: f64| op_function(&f, &(&a + &b * c(s)));
        let d1 = dk_operator_function(&f, &a, 1, std::slice::from_ref(&b))?;
        let e1 = 1e-5;
        let fd1 = (at(e1)? - at(-e1)?) * c(0.5 / e1);
        w1 = w1.max(rel_err(&fd1, &d1));
        let d2 = dk_operator_function(&f, &a, 2, &[b.clone(), b.clone()])?;
        let e2 = 1e-3;
        let fd2 = (at(e2)? - at(0.0)? * c(2.0) + at(-e2)?) * c(1.0 / (e2 * e2));
        w2 = w2.max(rel_err(&fd2, &d2));
    }
    let pass = w1 <= 1e-5 && w2 <= 1e-4;
    Ok(CriterionOutcome::new(14, pass, format!("D1 error {w1:.3e}, D2 error {w2:.3e}"), vec![]))
}

pub(super) fn c15_polynomial_moi(seed: u64) -> Result<CriterionOutcome> {
    let n = 8;
    let mut g = rng(seed, 15);
    let mut worst: f64 = 0.0;
    for m in 1..=6usize {
        for k in 1..=m.min(3) {
            let mut coeffs: Vec<i64> = (0..=m).map(|_| g.random_range(-4..=4)).collect();
            coeffs[m] = g.random_range(1..=4);
            let p = polynomial_in_x1(&coeffs);
            let f = ScalarFunctionSpec::real_polynomial(&coeffs.iter().map(|&v| v as f64).collect::<Vec<_>>());
            let a = random_hermitian(n, &mut g);
            let bs: Vec<Matrix> = (0..k).map(|_| random_matrix(n, &mut g)).collect();
            let dk = derive_k(&p, k as u32)?;
            let session_ctx = EvalContext::new(n).bind(1, a.clone());
            let s = session_ctx.session()?;
            let refs: Vec<&Matrix> = bs.iter().collect();
            let symbolic = s.eval_multilinear(&dk, &YBindings::slots(&refs))?;
            worst = worst.max(rel_err(&dk_operator_function(&f, &a, k, &bs)?, &symbolic));
            let same: Vec<&Matrix> = vec![&bs[0]; k];
            let tensor = s.eval_multilinear(&dk, &YBindings::slots(&same))?;
            let fact: f64 = (1..=k).map(|v| v as f64).product();
            let kernel = moi(&f, &vec![a.clone(); k + 1], &vec![bs[0].clone(); k])? * c(fact);
            worst = worst.max(rel_err(&kernel, &tensor));
        }
    }
    Ok(CriterionOutcome::new(15, worst <= 1e-10, format!("max relative error {worst:.3e}"), vec![]))
}

pub(super) fn c16_semicircle(seed: u64) -> Result<CriterionOutcome> {
    let n = 512;
    let grid = Arc::new(TimeGrid::uniform(1.0, 1.0)?);
    let stream_seed = derive_seed(seed, 160);
    let x = simulate_hbm(n, grid, &RngStream::new(stream_seed, 0));
    let x1 = &x.values[1];
    let ks = esd_distance(x1, 1.0)?;
    let ev = x1.clone().symmetric_eigenvalues();
    let moment = |k: i32| ev.iter().map(|l| l.powi(k)).sum::<f64>() / n as f64;
    let (m2, m4, m6) = (moment(2), moment(4), moment(6));
    let pass = ks <= 0.06 && (m2 - 1.0).abs() <= 0.15 && (m4 - 2.0).abs() <= 0.15 && (m6 - 5.0).abs() <= 0.15;
    let params = Params { n, mesh: 1.0, paths: 1, seed: stream_seed, t: 1.0 };
    let reports = vec![
        Report::with_gap("esd_ks", params.clone(), ks, 0.0, ks, 0.0),
        Report::compare("moment_2", params.clone(), m2, 1.0, 0.0),
        Report::compare("moment_4", params.clone(), m4, 2.0, 0.0),
        Report::compare("moment_6", params, m6, 5.0, 0.0),
    ];
    Ok(CriterionOutcome::new(16, pass, format!("KS {ks:.4}, moments {m2:.3}/{m4:.3}/{m6:.3}"), reports))
}

pub(super) fn c17_free_scaling(seed: u64) -> Result<CriterionOutcome> {
    let lam = parse("tr(x1 y1) tr(x2 y2)")?;
    let ns = [4usize, 16, 64, 256];
    let paths = 16;
    let mut mags = Vec::new();
    let mut reports = Vec::new();
    for (j, &n) in ns.iter().enumerate() {
        let u = Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| c(1.0 + i as f64 / n as f64)));
        let v = Matrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| c(2.0 - i as f64 / n as f64)));
        let args = BTreeMap::from([(1, ArgSpec::Constant(u)), (2, ArgSpec::Constant(v))]);
        let ens = Ensemble::hbm(n, 1.0, 0.05, paths, derive_seed(seed, 170 + j as u64))?;
        let samples = ens.try_map(|_, x| {
            let l = BoundTriprocess::from_spec(&lam, &args, x)?;
            let q = quad_rs_sum(&l, x, x, 1.0)?;
            let closed = qc_closed_form(&l, x, x, matrix_model(n))?;
            Ok((tr(&q).re, tr(&closed.values[x.steps()]).re))
        })?;
        let e = Estimate::from_samples(&samples.iter().map(|s| s.0).collect::<Vec<_>>());
        let closed = samples[0].1;
        let params = Params { n, mesh: ens.grid.mesh(), paths, seed: ens.seed, t: 1.0 };
        reports.push(Report::compare("cross_trace_qc", params, e.mean, closed, e.se));
        mags.push(e.mean.abs());
    }
    let nsf: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = loglog_slope(&nsf, &mags);
    for r in &mut reports {
        r.slope = Some(slope);
    }
    let free = gamma_contract(&lam, ContractionModel::Free)?;
    let pass = (slope + 2.0).abs() <= 0.4 && free == TracePolynomial::zero();
    Ok(CriterionOutcome::new(17, pass, format!("slope {slope:.3}, free contraction {free}"), reports))
}
