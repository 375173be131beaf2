use std::collections::BTreeMap;
use std::sync::Arc;

use super::{functional_ito_residual_path, ito_residual_path, ItoReport, PolyStepper};
use crate::error::{Error, Result};
use crate::matrix_alg::{lp_norm, Matrix, ScalarFunctionSpec};
use crate::process_sim::{DriverSpec, Ensemble, ProcessPath, TimeGrid};
use crate::stats::{loglog_slope, Estimate};
use crate::stoch_int::{conditional_qc_gap_norm, product_rule_gap_norm, qc_gap_norm, ArgSpec};
use crate::trace_poly::{ContractionModel, TracePolynomial};

/// What a mesh study measures.
#[derive(Clone, Debug)]
pub enum StudyTarget {
    Poly(TracePolynomial),
    Function(ScalarFunctionSpec),
    /// A bilinear symbol with its arguments, for the QC checks.
    Bilinear { lambda: TracePolynomial, args: BTreeMap<u32, ArgSpec> },
}

#[derive(Clone, Debug)]
pub struct StudyParams {
    pub n: usize,
    pub horizon: f64,
    pub paths: usize,
    pub seed: u64,
    pub driver: DriverSpec,
    pub model: ContractionModel,
    pub target: StudyTarget,
}

/// Integer strides of each mesh relative to the finest one.
fn strides(meshes: &[f64], horizon: f64) -> Result<(f64, Vec<usize>)> {
    if meshes.len() < 3 {
        return Err(Error::Invalid(format!("a mesh study needs at least 3 meshes, got {}", meshes.len())));
    }
    if meshes.iter().any(|&m| !(m > 0.0 && m <= horizon)) {
        return Err(Error::Invalid("meshes must lie in (0, horizon]".into()));
    }
    let ratios: Vec<f64> = meshes.windows(2).map(|w| w[0] / w[1]).collect();
    if ratios.iter().any(|r| (r - ratios[0]).abs() > 1e-6 * ratios[0] || (r - 1.0).abs() < 1e-9) {
        return Err(Error::Invalid("meshes must form a geometric progression".into()));
    }
    let finest = meshes.iter().copied().fold(f64::INFINITY, f64::min);
    let steps = horizon / finest;
    if (steps - steps.round()).abs() > 1e-6 * steps {
        return Err(Error::Invalid(format!("finest mesh {finest} does not divide the horizon {horizon}")));
    }
    let s = meshes
        .iter()
        .map(|&m| {
            let r = m / finest;
            if (r - r.round()).abs() > 1e-6 * r {
                return Err(Error::Invalid(format!("mesh {m} is not a multiple of the finest mesh {finest}")));
            }
            Ok(r.round() as usize)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((finest, s))
}

fn sup_norms(values: &[Matrix]) -> Result<Vec<f64>> {
    values.iter().map(|m| lp_norm(m, 1.0)).collect()
}

/// Per-time residual norms of one path on one mesh.
fn measure(check: &str, params: &StudyParams, path: &ProcessPath, stepper: Option<&PolyStepper>) -> Result<Vec<f64>> {
    let t = path.grid.horizon();
    match (check, &params.target) {
        ("ito", StudyTarget::Poly(_)) => sup_norms(&ito_residual_path(stepper.unwrap(), &[path])?),
        ("ito_fn", StudyTarget::Function(f)) => sup_norms(&functional_ito_residual_path(f, path)?.residual),
        ("qc", StudyTarget::Bilinear { lambda, args }) => Ok(vec![qc_gap_norm(lambda, args, path, t, params.model)?]),
        ("cond_qc", StudyTarget::Bilinear { lambda, args }) => {
            Ok(vec![conditional_qc_gap_norm(lambda, args, path, t, params.model)?])
        }
        ("product_rule", StudyTarget::Bilinear { lambda, args }) => {
            Ok(vec![product_rule_gap_norm(lambda, args, path, t)?])
        }
        ("ito" | "ito_fn" | "qc" | "cond_qc" | "product_rule", _) => {
            Err(Error::Invalid(format!("check `{check}` does not take this kind of target")))
        }
        _ => Err(Error::UnknownCheck(check.to_string())),
    }
}

/// Runs `check` at every mesh on the same simulated paths (simulated at the
/// finest mesh and observed on coarser sub-grids) and fits the log-log slope
/// of the residual against the mesh.
///
/// Checks: `ito` (trace polynomial), `ito_fn` (operator function), `qc`,
/// `cond_qc` and `product_rule` (bilinear symbol). Residuals are sup over
/// grid times of the ensemble-mean `tr_n`-L¹ norm; the QC checks measure at
/// the horizon only.
pub fn convergence_study(check: &str, meshes: &[f64], params: &StudyParams) -> Result<ItoReport> {
    if !["ito", "ito_fn", "qc", "cond_qc", "product_rule"].contains(&check) {
        return Err(Error::UnknownCheck(check.to_string()));
    }
    let (finest, strides) = strides(meshes, params.horizon)?;
    let grid = Arc::new(TimeGrid::uniform(params.horizon, finest)?);
    let ens = Ensemble::new(params.n, grid, params.paths, params.seed, params.driver.clone())?;
    let stepper = match &params.target {
        StudyTarget::Poly(p) => Some(PolyStepper::new(p, params.model)?),
        _ => None,
    };
    let per_path: Vec<Vec<Vec<f64>>> = ens.try_map(|_, path| {
        strides
            .iter()
            .map(|&s| measure(check, params, &path.subsample(s)?, stepper.as_ref()))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut residuals = Vec::with_capacity(meshes.len());
    let mut ses = Vec::with_capacity(meshes.len());
    for m in 0..meshes.len() {
        let times = per_path[0][m].len();
        let mut best = Estimate { mean: f64::NEG_INFINITY, se: 0.0 };
        for k in 0..times {
            let samples: Vec<f64> = per_path.iter().map(|p| p[m][k]).collect();
            let e = Estimate::from_samples(&samples);
            if e.mean > best.mean {
                best = e;
            }
        }
        residuals.push(best.mean);
        ses.push(best.se);
    }
    let slope = if residuals.iter().all(|&r| r > 0.0) { Some(loglog_slope(meshes, &residuals)) } else { None };
    let target = match &params.target {
        StudyTarget::Poly(p) => p.to_string(),
        StudyTarget::Function(f) => serde_json::to_string(f)?,
        StudyTarget::Bilinear { lambda, .. } => lambda.to_string(),
    };
    Ok(ItoReport {
        check: check.to_string(),
        target,
        model: params.model,
        n: params.n,
        paths: params.paths,
        seed: params.seed,
        horizon: params.horizon,
        meshes: meshes.to_vec(),
        residuals,
        ses,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process_sim::FvKind;
    use crate::trace_poly::parse;

    fn params(target: StudyTarget, driver: DriverSpec) -> StudyParams {
        StudyParams {
            n: 4,
            horizon: 1.0,
            paths: 4,
            seed: 5,
            driver,
            model: ContractionModel::Matrix { n: 4 },
            target,
        }
    }

    #[test]
    fn rejects_bad_meshes_and_names() {
        let p = params(StudyTarget::Poly(parse("x1^2").unwrap()), DriverSpec::Hbm);
        assert!(matches!(convergence_study("nope", &[0.1, 0.05, 0.025], &p), Err(Error::UnknownCheck(_))));
        assert!(convergence_study("ito", &[0.1, 0.05], &p).is_err());
        assert!(convergence_study("ito", &[0.1, 0.05, 0.02], &p).is_err());
        assert!(convergence_study("qc", &[0.1, 0.05, 0.025], &p).is_err());
    }

    #[test]
    fn x_squared_residual_shrinks() {
        let p = params(StudyTarget::Poly(parse("x1^2").unwrap()), DriverSpec::Hbm);
        let r = convergence_study("ito", &[0.04, 0.02, 0.01], &p).unwrap();
        assert!(r.reduction_factors().iter().all(|&f| f > 1.2), "{:?}", r.residuals);
        assert!(r.slope.unwrap() > 0.3);
        assert_eq!(r.to_reports().len(), 3);
    }

    #[test]
    fn fv_driver_gives_first_order_slope() {
        let kind = FvKind::scalar(|t| t * t);
        let p = params(StudyTarget::Poly(parse("x1^3 + tr(x1) x1").unwrap()), DriverSpec::Fv(kind));
        let r = convergence_study("ito", &[0.02, 0.01, 0.005], &p).unwrap();
        assert!((r.slope.unwrap() - 1.0).abs() < 0.1, "{:?}", r);
    }
}
