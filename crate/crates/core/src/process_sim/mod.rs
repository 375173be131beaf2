//! Discretized noncommutative processes: Hermitian matrix Brownian motion,
//! finite-variation paths, decomposable sums, stopping and the `κ` measure.

mod ensemble;
mod hbm;
mod ncp1;
mod rng;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_alg::{lp_norm, Matrix};
use crate::stats::Estimate;

pub use ensemble::{DriverSpec, Ensemble};
pub use hbm::{gue_increment, hbm_increment, simulate_hbm, simulate_hbm_entrywise};
pub use ncp1::{read_ncp1, write_ncp1};
pub use rng::{derive_seed, RngStream};

/// Strictly increasing times starting at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::Invalid("grid must start at 0".into()));
        }
        if times.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::Invalid("grid times must be strictly increasing".into()));
        }
        Ok(TimeGrid { times })
    }

    /// `[0, horizon]` in `round(horizon / mesh)` equal steps.
    pub fn uniform(horizon: f64, mesh: f64) -> Result<Self> {
        if !(horizon > 0.0 && mesh > 0.0) {
            return Err(Error::Invalid(format!("bad grid horizon {horizon} / mesh {mesh}")));
        }
        let steps = (horizon / mesh).round().max(1.0) as usize;
        let h = horizon / steps as f64;
        Ok(TimeGrid { times: (0..=steps).map(|k| k as f64 * h).collect() })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.times[k + 1] - self.times[k]
    }

    /// Largest gap.
    pub fn mesh(&self) -> f64 {
        self.times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of a grid time (within rounding).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        let i = self.times.partition_point(|&s| s < t - tol);
        (i < self.times.len() && (self.times[i] - t).abs() <= tol).then_some(i)
    }

    pub fn require_index(&self, t: f64) -> Result<usize> {
        self.index_of(t).ok_or(Error::OffGrid(t))
    }

    /// Index of the last grid time `<= t`.
    pub fn floor_index(&self, t: f64) -> usize {
        match self.index_of(t) {
            Some(i) => i,
            None => self.times.partition_point(|&s| s <= t).saturating_sub(1),
        }
    }

    /// Every `stride`-th time; the horizon must be kept.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.steps().is_multiple_of(stride) {
            return Err(Error::Invalid(format!("stride {stride} does not divide {} steps", self.steps())));
        }
        Ok(TimeGrid { times: self.times.iter().step_by(stride).copied().collect() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Martingale,
    Fv,
    Decomposable,
}

/// `X = M + A` stored alongside a decomposable path, with `A(0) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub martingale: Vec<Matrix>,
    pub fv: Vec<Matrix>,
}

/// Where the randomness of a path came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lineage {
    pub seed: u64,
    pub path_index: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcessPath {
    pub grid: Arc<TimeGrid>,
    pub values: Vec<Matrix>,
    pub role: Role,
    pub decomposition: Option<Decomposition>,
    pub lineage: Option<Lineage>,
}

impl ProcessPath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<Matrix>, role: Role) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Invalid(format!("{} values for {} grid times", values.len(), grid.len())));
        }
        let n = values[0].nrows();
        if let Some(m) = values.iter().find(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::Dimension { expected: n, got: m.nrows() });
        }
        if role == Role::Decomposable {
            return Err(Error::Invalid("use ProcessPath::decomposable".into()));
        }
        Ok(ProcessPath { grid, values, role, decomposition: None, lineage: None })
    }

    /// Constant path (a trivially FV, and martingale, process).
    pub fn constant(grid: Arc<TimeGrid>, m: Matrix) -> Self {
        let values = vec![m; grid.len()];
        ProcessPath { grid, values, role: Role::Fv, decomposition: None, lineage: None }
    }

    /// `X = M + A`; requires a shared grid and `A(0) = 0`.
    pub fn decomposable(m: &ProcessPath, a: &ProcessPath) -> Result<Self> {
        if m.grid != a.grid {
            return Err(Error::GridMismatch);
        }
        if a.values[0].iter().any(|z| z.norm() != 0.0) {
            return Err(Error::Invalid("finite-variation part must start at 0".into()));
        }
        let values = m.values.iter().zip(&a.values).map(|(x, y)| x + y).collect();
        Ok(ProcessPath {
            grid: m.grid.clone(),
            values,
            role: Role::Decomposable,
            decomposition: Some(Decomposition { martingale: m.values.clone(), fv: a.values.clone() }),
            lineage: m.lineage,
        })
    }

    pub fn n(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn times(&self) -> &[f64] {
        self.grid.times()
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    /// `X(t_{k+1}) − X(t_k)`.
    pub fn increment(&self, k: usize) -> Matrix {
        &self.values[k + 1] - &self.values[k]
    }

    pub fn at(&self, t: f64) -> Result<&Matrix> {
        Ok(&self.values[self.grid.require_index(t)?])
    }

    /// Martingale part: the path itself, zero for FV paths, `M` for
    /// decomposable ones.
    pub fn martingale_part(&self) -> ProcessPath {
        match (self.role, &self.decomposition) {
            (Role::Martingale, _) => self.clone(),
            (Role::Decomposable, Some(d)) => ProcessPath {
                grid: self.grid.clone(),
                values: d.martingale.clone(),
                role: Role::Martingale,
                decomposition: None,
                lineage: self.lineage,
            },
            _ => {
                let n = self.n();
                ProcessPath::constant(self.grid.clone(), Matrix::zeros(n, n))
            }
        }
    }

    /// The stopped path `X(· ∧ t)`, frozen from the last grid time `<= t`.
    pub fn stop(&self, t: f64) -> Result<Self> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::Invalid(format!("stopping time must be nonnegative, got {t}")));
        }
        let k = self.grid.floor_index(t);
        let freeze = |v: &[Matrix]| -> Vec<Matrix> {
            (0..v.len()).map(|i| v[i.min(k)].clone()).collect()
        };
        Ok(ProcessPath {
            grid: self.grid.clone(),
            values: freeze(&self.values),
            role: self.role,
            decomposition: self
                .decomposition
                .as_ref()
                .map(|d| Decomposition { martingale: freeze(&d.martingale), fv: freeze(&d.fv) }),
            lineage: self.lineage,
        })
    }

    /// The same path observed on every `stride`-th grid time.
    pub fn subsample(&self, stride: usize) -> Result<Self> {
        let grid = Arc::new(self.grid.subsample(stride)?);
        let pick = |v: &[Matrix]| v.iter().step_by(stride).cloned().collect::<Vec<_>>();
        Ok(ProcessPath {
            grid,
            values: pick(&self.values),
            role: self.role,
            decomposition: self
                .decomposition
                .as_ref()
                .map(|d| Decomposition { martingale: pick(&d.martingale), fv: pick(&d.fv) }),
            lineage: self.lineage,
        })
    }

    /// Grid variation `Σ ‖ΔX‖_p` over steps between indices `s` and `t`.
    pub fn variation(&self, s: usize, t: usize, p: f64) -> Result<f64> {
        let mut total = 0.0;
        for k in s..t {
            total += lp_norm(&self.increment(k), p)?;
        }
        Ok(total)
    }
}

/// Generator of a deterministic finite-variation path.
#[derive(Clone)]
pub enum FvKind {
    /// `A(t) = g(t) I`.
    Scalar(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `A(t) = G(t)` for a smooth matrix-valued `G`.
    SmoothMatrix(Arc<dyn Fn(f64) -> Matrix + Send + Sync>),
}

impl fmt::Debug for FvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FvKind::Scalar(_) => write!(f, "FvKind::Scalar(..)"),
            FvKind::SmoothMatrix(_) => write!(f, "FvKind::SmoothMatrix(..)"),
        }
    }
}

impl FvKind {
    pub fn scalar(g: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        FvKind::Scalar(Arc::new(g))
    }

    pub fn value(&self, n: usize, t: f64) -> Matrix {
        match self {
            FvKind::Scalar(g) => Matrix::identity(n, n) * Complex64::new(g(t), 0.0),
            FvKind::SmoothMatrix(g) => g(t),
        }
    }
}

/// Samples an FV generator on the grid.
pub fn make_fv(kind: &FvKind, n: usize, grid: Arc<TimeGrid>) -> ProcessPath {
    let values = grid.times().iter().map(|&t| kind.value(n, t)).collect();
    ProcessPath { grid, values, role: Role::Fv, decomposition: None, lineage: None }
}

/// Monte-Carlo estimate of `κ_M((s, t]) = ‖M(t) − M(s)‖_2^2`.
pub fn kappa_estimate(paths: &[ProcessPath], s: f64, t: f64) -> Result<Estimate> {
    let first = paths.first().ok_or(Error::EmptyEnsemble)?;
    if s.is_nan() || t.is_nan() || s >= t {
        return Err(Error::Invalid(format!("need s < t, got ({s}, {t}]")));
    }
    let (i, j) = (first.grid.require_index(s)?, first.grid.require_index(t)?);
    let mut samples = Vec::with_capacity(paths.len());
    for p in paths {
        if p.grid != first.grid {
            return Err(Error::GridMismatch);
        }
        samples.push(sq_norm2(&(&p.values[j] - &p.values[i])));
    }
    Ok(Estimate::from_samples(&samples))
}

/// `tr_n |a|^2`.
pub fn sq_norm2(a: &Matrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>() / a.nrows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(h: f64) -> Arc<TimeGrid> {
        Arc::new(TimeGrid::uniform(1.0, h).unwrap())
    }

    #[test]
    fn grid_lookup() {
        let g = TimeGrid::uniform(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.index_of(0.3), Some(3));
        assert_eq!(g.index_of(0.35), None);
        assert_eq!(g.floor_index(0.35), 3);
        assert_eq!(g.floor_index(7.0), 10);
        assert!((g.mesh() - 0.1).abs() < 1e-15);
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::new(vec![0.1, 0.5]).is_err());
        assert_eq!(g.subsample(5).unwrap().times(), &[0.0, 0.5, 1.0]);
        assert!(g.subsample(3).is_err());
    }

    #[test]
    fn linear_drift_has_unit_variation() {
        let a = make_fv(&FvKind::scalar(|t| t), 3, grid(0.01));
        assert!((a.values[100][(1, 1)].re - 1.0).abs() < 1e-12);
        assert!((a.variation(0, 100, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let c = make_fv(&FvKind::scalar(|_| 2.0), 3, grid(0.01));
        assert_eq!(c.variation(0, 100, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn sine_variation_converges() {
        let g = Arc::new(TimeGrid::uniform(std::f64::consts::PI, 1e-4).unwrap());
        let a = make_fv(&FvKind::scalar(f64::sin), 2, g.clone());
        let v = a.variation(0, g.steps(), f64::INFINITY).unwrap();
        assert!((v - 2.0).abs() < 1e-3, "variation {v}");
    }

    #[test]
    fn stopping() {
        let a = make_fv(&FvKind::scalar(|t| t), 2, grid(0.1));
        let s0 = a.stop(0.0).unwrap();
        assert!(s0.values.iter().all(|m| m == &a.values[0]));
        assert_eq!(a.stop(1.0).unwrap(), a);
        let s = a.stop(0.45).unwrap();
        assert_eq!(s.values[10], a.values[4]);
        assert!(a.stop(-1.0).is_err());
    }

    #[test]
    fn decomposable_requires_zero_start() {
        let g = grid(0.5);
        let m = ProcessPath::constant(g.clone(), Matrix::identity(2, 2));
        let a = make_fv(&FvKind::scalar(|t| t), 2, g.clone());
        let x = ProcessPath::decomposable(&m, &a).unwrap();
        assert_eq!(x.role, Role::Decomposable);
        assert_eq!(x.values[2], &m.values[2] + &a.values[2]);
        let bad = make_fv(&FvKind::scalar(|t| t + 1.0), 2, g);
        assert!(ProcessPath::decomposable(&m, &bad).is_err());
    }

    #[test]
    fn kappa_of_constant_is_zero() {
        let p = ProcessPath::constant(grid(0.5), Matrix::identity(2, 2));
        let k = kappa_estimate(&[p.clone(), p], 0.0, 1.0).unwrap();
        assert_eq!(k.mean, 0.0);
        assert!(kappa_estimate(&[], 0.0, 1.0).is_err());
    }
}
