//! Built-in acceptance criteria. Every criterion derives its randomness from
//! one master seed, so a run is reproducible bit for bit.

mod criteria;
pub mod oracles;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::report::{Envelope, Report, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
    pub reports: Vec<Report>,
}

impl CriterionOutcome {
    fn new(id: u32, pass: bool, detail: String, reports: Vec<Report>) -> Self {
        CriterionOutcome { id, name: criterion_name(id).to_string(), pass, detail, reports }
    }

    fn failed(id: u32, err: impl std::fmt::Display) -> Self {
        CriterionOutcome::new(id, false, format!("error: {err}"), vec![])
    }
}

pub const CRITERIA: [(u32, &str); 18] = [
    (1, "golden derivative"),
    (2, "k-th derivatives of powers"),
    (3, "finite-difference derivatives"),
    (4, "magic sum"),
    (5, "contraction rules by Monte Carlo"),
    (6, "quadratic covariation convergence"),
    (7, "Ito formula residuals"),
    (8, "Ito isometry"),
    (9, "BDG moments"),
    (10, "Pythagoras identity"),
    (11, "FV legs kill quadratic covariation"),
    (12, "substitution and QC of integrals"),
    (13, "divided differences"),
    (14, "operator derivatives by finite differences"),
    (15, "polynomial MOIs against symbolic derivatives"),
    (16, "semicircle law"),
    (17, "free-limit scaling of cross traces"),
    (18, "determinism across thread counts"),
];

pub fn criterion_name(id: u32) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1)
}

type CriterionFn = fn(u64) -> Result<CriterionOutcome>;

fn criterion_fn(id: u32) -> Option<CriterionFn> {
    use criteria::*;
    let f: CriterionFn = match id {
        1 => c01_golden,
        2 => c02_power_derivatives,
        3 => c03_finite_differences,
        4 => c04_magic,
        5 => c05_gamma_rules,
        6 => c06_qc_convergence,
        7 => c07_ito_residuals,
        8 => c08_isometry,
        9 => c09_bdg,
        10 => c10_pythagoras,
        11 => c11_fv_kills_qc,
        12 => c12_substitution,
        13 => c13_divided_differences,
        14 => c14_moi_derivatives,
        15 => c15_polynomial_moi,
        16 => c16_semicircle,
        17 => c17_free_scaling,
        18 => determinism_probe,
        _ => return None,
    };
    Some(f)
}

/// Runs one criterion; errors become a failing outcome.
pub fn run_criterion(id: u32, seed: u64) -> CriterionOutcome {
    match criterion_fn(id) {
        Some(f) => f(seed).unwrap_or_else(|e| CriterionOutcome::failed(id, e)),
        None => CriterionOutcome::failed(id, format!("no criterion {id}")),
    }
}

pub fn run_all(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA.iter().map(|&(id, _)| run_criterion(id, seed)).collect()
}

pub fn run_selected(ids: &[u32], seed: u64) -> Vec<CriterionOutcome> {
    ids.iter().map(|&id| run_criterion(id, seed)).collect()
}

/// Collects outcomes into the JSON envelope shared with the other commands.
pub fn envelope(seed: u64, outcomes: &[CriterionOutcome]) -> Envelope {
    Envelope {
        config: serde_json::json!({ "command": "selftest", "seed": seed }),
        reports: outcomes.iter().flat_map(|o| o.reports.iter().cloned()).collect(),
        verdicts: outcomes
            .iter()
            .map(|o| Verdict { name: format!("{:02} {}", o.id, o.name), pass: o.pass, detail: o.detail.clone() })
            .collect(),
    }
}

/// Reruns a few stochastic criteria on a one-thread and a four-thread pool
/// and compares the serialized reports byte for byte.
fn determinism_probe(seed: u64) -> Result<CriterionOutcome> {
    let probe = [5, 10];
    let run = |threads: usize| -> Result<String> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| crate::Error::Invalid(e.to_string()))?;
        pool.install(|| envelope(seed, &run_selected(&probe, seed)).to_json())
    };
    let (a, b) = (run(1)?, run(4)?);
    let detail = format!("criteria {probe:?} on 1 and 4 threads: {} bytes, identical {}", a.len(), a == b);
    Ok(CriterionOutcome::new(18, a == b, detail, vec![]))
}
