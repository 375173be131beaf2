use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Every knob of a run. Loaded from `--config`, then overridden by flags.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Matrix size.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Horizon.
    #[arg(long = "T")]
    #[serde(default, rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Grid mesh.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    /// Comma-separated meshes for convergence studies, coarsest first.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meshes: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    /// Master seed; every random draw derives from it.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Expression (`diff`, `eval`), integrand symbol (`isometry`, `bdg`) or
    /// bilinear symbol (`qc`).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expr: Option<String>,
    /// Variable to differentiate in, as `x2` or `2`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<String>,
    /// Order of the total derivative `∂^k`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    /// Polynomial for `ito`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poly: Option<String>,
    /// Frequency ξ of `e^{iξλ}` for the operator-function Itô check.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_xi: Option<f64>,
    /// Elementary window `s,t` for the integrand.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<Vec<f64>>,
    /// Moment order for `bdg` (2 or 4).
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    /// Contraction model: `matrix` or `free`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    /// JSON file with matrices for `eval`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<PathBuf>,
    /// Output directory for `sim`.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Criteria to run in `selftest`, comma-separated; all by default.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub only: Option<Vec<u32>>,
    /// JSON report path.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    /// CSV table path.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $(if $top.$f.is_some() { $base.$f = $top.$f.clone(); })*
    };
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every key set in `flags` replaced.
    pub fn overridden_by(mut self, flags: &ExperimentConfig) -> Self {
        overlay!(
            self, flags, n, horizon, mesh, meshes, paths, seed, expr, var, k, poly, exp_xi, window, p, model,
            matrices, out, only, json, csv
        );
        self
    }

    pub fn require<T: Clone>(v: &Option<T>, key: &str) -> Result<T, Failure> {
        v.clone().ok_or_else(|| Failure::Config(format!("missing --{key}")))
    }

    pub fn n_or(&self, d: usize) -> usize {
        self.n.unwrap_or(d)
    }

    pub fn horizon_or(&self, d: f64) -> f64 {
        self.horizon.unwrap_or(d)
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
