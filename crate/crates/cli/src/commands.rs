use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use ncstoch_core::evaluator::EvalContext;
use ncstoch_core::ito_verifier::{convergence_study, ItoReport, StudyParams, StudyTarget};
use ncstoch_core::matrix_alg::{esd_distance, normalized_moment, Matrix, ScalarFunctionSpec};
use ncstoch_core::process_sim::{derive_seed, simulate_hbm, write_ncp1, DriverSpec, Ensemble, RngStream, TimeGrid};
use ncstoch_core::report::{write_csv, Envelope, Params, Report, Verdict};
use ncstoch_core::selftest::{self, oracles::random_hermitian};
use ncstoch_core::stoch_int::{bdg_stats, ito_isometry_check, ArgSpec, IntegrandSpec};
use ncstoch_core::trace_poly::{derive, derive_k, parse, ContractionModel, TracePolynomial};

use crate::config::ExperimentConfig;
use crate::Failure;

const CONSTANTS_TAG: u64 = 0xC0;
pub const DEFAULT_SELFTEST_SEED: u64 = 20240611;

fn emit(command: &str, cfg: &ExperimentConfig, reports: Vec<Report>, verdicts: Vec<Verdict>) -> Result<(), Failure> {
    let mut config = serde_json::to_value(cfg).map_err(|e| Failure::Config(e.to_string()))?;
    if let Value::Object(m) = &mut config {
        m.insert("command".into(), json!(command));
    }
    let env = Envelope { config, reports, verdicts };
    if let Some(p) = &cfg.json {
        std::fs::write(p, env.to_json()?)?;
    }
    if let Some(p) = &cfg.csv {
        write_csv(&env.reports, BufWriter::new(File::create(p)?))?;
    }
    for v in &env.verdicts {
        println!("{} {}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    if env.passed() {
        Ok(())
    } else {
        Err(Failure::Tolerance)
    }
}

fn model(cfg: &ExperimentConfig, n: usize) -> Result<ContractionModel, Failure> {
    match cfg.model.as_deref().unwrap_or("matrix") {
        "matrix" => Ok(ContractionModel::Matrix { n: n as u32 }),
        "free" => Ok(ContractionModel::Free),
        other => Err(Failure::Config(format!("unknown model {other:?}; use matrix or free"))),
    }
}

/// `x1` is the driver; `x2, x3, ...` are random Hermitian constants drawn
/// from the master seed.
fn driver_args(p: &TracePolynomial, n: usize, seed: u64) -> BTreeMap<u32, ArgSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, CONSTANTS_TAG));
    let mut args = BTreeMap::from([(1, ArgSpec::Driver)]);
    for i in 2..=p.num_vars().max(1) {
        args.insert(i, ArgSpec::Constant(random_hermitian(n, &mut rng)));
    }
    args
}

fn parse_var(s: &str) -> Result<u32, Failure> {
    s.trim_start_matches('x').parse().map_err(|_| Failure::Config(format!("bad variable {s:?}")))
}

pub fn diff(cfg: ExperimentConfig) -> Result<(), Failure> {
    let p = parse(&ExperimentConfig::require(&cfg.expr, "expr")?)?;
    let d = match (&cfg.var, cfg.k) {
        (Some(v), None) => derive(&p, parse_var(v)?)?,
        (None, Some(k)) => derive_k(&p, k)?,
        _ => return Err(Failure::Config("give exactly one of --var and --k".into())),
    };
    println!("{d}");
    if let Some(path) = &cfg.json {
        let v = Verdict { name: "diff".into(), pass: true, detail: d.to_string() };
        let mut config = serde_json::to_value(&cfg).map_err(|e| Failure::Config(e.to_string()))?;
        if let Value::Object(m) = &mut config {
            m.insert("command".into(), json!("diff"));
        }
        let env = Envelope { config, reports: vec![], verdicts: vec![v] };
        std::fs::write(path, env.to_json()?)?;
    }
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

fn read_matrices(path: &std::path::Path) -> Result<Vec<Matrix>, Failure> {
    let text = std::fs::read_to_string(path)?;
    let raw: BTreeMap<String, Vec<Vec<Entry>>> =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let mut by_index = BTreeMap::new();
    for (k, rows) in raw {
        let i = parse_var(&k)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Failure::Config(format!("{k} is not square")));
        }
        let m = Matrix::from_fn(n, n, |r, c| match rows[r][c] {
            Entry::Real(v) => Complex64::new(v, 0.0),
            Entry::Complex([a, b]) => Complex64::new(a, b),
        });
        by_index.insert(i, m);
    }
    let count = by_index.len() as u32;
    if by_index.keys().copied().ne(1..=count) {
        return Err(Failure::Config("matrices must be named x1, x2, ... without gaps".into()));
    }
    Ok(by_index.into_values().collect())
}

pub fn eval(cfg: ExperimentConfig) -> Result<(), Failure> {
    let p = parse(&ExperimentConfig::require(&cfg.expr, "expr")?)?;
    let mats = read_matrices(&ExperimentConfig::require(&cfg.matrices, "matrices")?)?;
    if mats.is_empty() {
        return Err(Failure::Config("no matrices given".into()));
    }
    let m = EvalContext::from_slice(&mats).session()?.eval(&p)?;
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect()).collect();
    println!("{}", serde_json::to_string(&rows).map_err(|e| Failure::Config(e.to_string()))?);
    Ok(())
}

pub fn sim(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let n = cfg.n_or(8);
    let horizon = cfg.horizon_or(1.0);
    let mesh = cfg.mesh.unwrap_or(0.01);
    let paths = cfg.paths.unwrap_or(1);
    let seed = cfg.seed_or_default();
    let out = cfg.out.clone().unwrap_or_else(|| "paths".into());
    (cfg.n, cfg.horizon, cfg.mesh, cfg.paths, cfg.seed, cfg.out) =
        (Some(n), Some(horizon), Some(mesh), Some(paths), Some(seed), Some(out.clone()));
    std::fs::create_dir_all(&out)?;
    let grid = Arc::new(TimeGrid::uniform(horizon, mesh)?);
    for i in 0..paths {
        let x = simulate_hbm(n, grid.clone(), &RngStream::new(seed, i as u64));
        let file = out.join(format!("path_{i:05}.ncp1"));
        write_ncp1(&x, BufWriter::new(File::create(&file)?))?;
    }
    let detail = format!("{paths} paths of {} steps written to {}", grid.steps(), out.display());
    emit("sim", &cfg, vec![], vec![Verdict { name: "sim".into(), pass: true, detail }])
}

fn study_verdict(r: &ItoReport, min_factor: f64) -> Verdict {
    let factors = r.reduction_factors();
    let pass = factors.iter().all(|&f| f >= min_factor);
    let detail = format!(
        "residuals [{}], reduction factors [{}], slope {}",
        r.residuals.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", "),
        factors.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(", "),
        r.slope.map_or("n/a".into(), |s| format!("{s:.3}"))
    );
    Verdict { name: r.check.clone(), pass, detail }
}

fn study_params(cfg: &mut ExperimentConfig, n0: usize, paths0: usize, target: StudyTarget) -> Result<(Vec<f64>, StudyParams), Failure> {
    let n = cfg.n_or(n0);
    let meshes = cfg.meshes.clone().unwrap_or_else(|| vec![0.02, 0.01, 0.005, 0.0025]);
    let params = StudyParams {
        n,
        horizon: cfg.horizon_or(1.0),
        paths: cfg.paths.unwrap_or(paths0),
        seed: cfg.seed_or_default(),
        driver: DriverSpec::Hbm,
        model: model(cfg, n)?,
        target,
    };
    (cfg.n, cfg.horizon, cfg.meshes, cfg.paths, cfg.seed) =
        (Some(n), Some(params.horizon), Some(meshes.clone()), Some(params.paths), Some(params.seed));
    cfg.model.get_or_insert_with(|| "matrix".into());
    Ok((meshes, params))
}

pub fn qc(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let expr = cfg.expr.clone().unwrap_or_else(|| "y1 x2 y2".into());
    cfg.expr = Some(expr.clone());
    let lambda = parse(&expr)?;
    let n = cfg.n_or(16);
    let args = driver_args(&lambda, n, cfg.seed_or_default());
    let (meshes, params) = study_params(&mut cfg, 16, 200, StudyTarget::Bilinear { lambda, args })?;
    let r = convergence_study("qc", &meshes, &params)?;
    // Any decrease counts; the rate is reported, not asserted.
    let v = study_verdict(&r, 1.0 + f64::EPSILON);
    emit("qc", &cfg, r.to_reports(), vec![v])
}

pub fn ito(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let (check, target) = match (&cfg.poly, cfg.exp_xi) {
        (Some(p), None) => ("ito", StudyTarget::Poly(parse(p)?)),
        (None, Some(xi)) => ("ito_fn", StudyTarget::Function(ScalarFunctionSpec::exp_i(xi))),
        (None, None) => {
            cfg.poly = Some("x1^2".into());
            ("ito", StudyTarget::Poly(parse("x1^2")?))
        }
        _ => return Err(Failure::Config("give at most one of --poly and --exp-xi".into())),
    };
    let (meshes, params) = study_params(&mut cfg, 16, 32, target)?;
    let r = convergence_study(check, &meshes, &params)?;
    let v = study_verdict(&r, 1.3);
    emit("ito", &cfg, r.to_reports(), vec![v])
}

fn integrand_run(cfg: &mut ExperimentConfig) -> Result<(IntegrandSpec, Ensemble), Failure> {
    let n = cfg.n_or(8);
    let horizon = cfg.horizon_or(1.0);
    let mesh = cfg.mesh.unwrap_or(0.01);
    let paths = cfg.paths.unwrap_or(1000);
    let seed = cfg.seed_or_default();
    let expr = cfg.expr.clone().unwrap_or_else(|| "y1".into());
    (cfg.n, cfg.horizon, cfg.mesh, cfg.paths, cfg.seed, cfg.expr) =
        (Some(n), Some(horizon), Some(mesh), Some(paths), Some(seed), Some(expr.clone()));
    let symbol = parse(&expr)?;
    let args = driver_args(&symbol, n, seed);
    let h = match &cfg.window {
        None => IntegrandSpec::adapted(symbol, args),
        Some(w) if w.len() == 2 => IntegrandSpec::elementary(symbol, args, vec![(w[0], w[1])]),
        Some(_) => return Err(Failure::Config("--window takes two times s,t".into())),
    };
    Ok((h, Ensemble::hbm(n, horizon, mesh, paths, seed)?))
}

pub fn isometry(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let (h, ens) = integrand_run(&mut cfg)?;
    cfg.model.get_or_insert_with(|| "matrix".into());
    let r = ito_isometry_check(&h, &ens, ens.grid.horizon(), model(&cfg, ens.n)?)?;
    let v = Verdict { name: "isometry".into(), pass: r.within_se(3.0), detail: format!("gap {:.4e}, z {:.2}", r.gap, r.zscore) };
    emit("isometry", &cfg, vec![r], vec![v])
}

pub fn bdg(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let p = cfg.p.unwrap_or(2);
    cfg.p = Some(p);
    let (h, ens) = integrand_run(&mut cfg)?;
    let r = bdg_stats(&h, &ens, p, ens.grid.horizon())?;
    let v = if p == 2 {
        Verdict { name: "bdg_p2".into(), pass: r.within_se(3.0), detail: format!("gap {:.4e}, z {:.2}", r.gap, r.zscore) }
    } else {
        let ratio = r.lhs / r.rhs;
        Verdict { name: format!("bdg_p{p}"), pass: ratio > 0.2 && ratio < 5.0, detail: format!("ratio {ratio:.4}") }
    };
    emit("bdg", &cfg, vec![r], vec![v])
}

pub fn esd(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let n = cfg.n_or(512);
    let horizon = cfg.horizon_or(1.0);
    let seed = cfg.seed_or_default();
    (cfg.n, cfg.horizon, cfg.seed) = (Some(n), Some(horizon), Some(seed));
    let grid = Arc::new(TimeGrid::uniform(horizon, horizon)?);
    let x = simulate_hbm(n, grid, &RngStream::new(seed, 0));
    let xt = &x.values[1];
    let ks = esd_distance(xt, horizon)?;
    let params = Params { n, mesh: horizon, paths: 1, seed, t: horizon };
    let mut reports = vec![Report::with_gap("esd_ks", params.clone(), ks, 0.0, ks, 0.0)];
    let mut pass = ks <= 0.06;
    for (k, catalan) in [(2u32, 1.0), (4, 2.0), (6, 5.0)] {
        let target = catalan * horizon.powi(k as i32 / 2);
        let m = normalized_moment(xt, k).re;
        pass &= (m - target).abs() <= 0.15;
        reports.push(Report::compare(&format!("moment_{k}"), params.clone(), m, target, 0.0));
    }
    let detail = format!("KS {ks:.4}; moments {}", reports[1..].iter().map(|r| format!("{:.3}", r.lhs)).collect::<Vec<_>>().join(", "));
    emit("esd", &cfg, reports, vec![Verdict { name: "esd".into(), pass, detail }])
}

pub fn selftest(mut cfg: ExperimentConfig) -> Result<(), Failure> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SELFTEST_SEED);
    cfg.seed = Some(seed);
    let outcomes = match &cfg.only {
        Some(ids) => selftest::run_selected(ids, seed),
        None => selftest::run_all(seed),
    };
    let env = selftest::envelope(seed, &outcomes);
    emit("selftest", &cfg, env.reports, env.verdicts)
}
