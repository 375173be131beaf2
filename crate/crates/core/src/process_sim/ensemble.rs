use std::sync::Arc;

use rayon::prelude::*;

use super::{make_fv, simulate_hbm, FvKind, ProcessPath, RngStream, TimeGrid};
use crate::error::{Error, Result};

/// What each path of an ensemble is.
#[derive(Clone, Debug)]
pub enum DriverSpec {
    Hbm,
    HbmWithDrift(FvKind),
    Fv(FvKind),
}

/// A reproducible family of independent paths. Paths are generated on demand
/// from `(seed, index)`, so the ensemble never holds them all at once.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub n: usize,
    pub grid: Arc<TimeGrid>,
    pub paths: usize,
    pub seed: u64,
    pub driver: DriverSpec,
}

impl Ensemble {
    pub fn new(n: usize, grid: Arc<TimeGrid>, paths: usize, seed: u64, driver: DriverSpec) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("matrix size must be positive".into()));
        }
        if paths == 0 {
            return Err(Error::EmptyEnsemble);
        }
        Ok(Ensemble { n, grid, paths, seed, driver })
    }

    pub fn hbm(n: usize, horizon: f64, mesh: f64, paths: usize, seed: u64) -> Result<Self> {
        let grid = Arc::new(TimeGrid::uniform(horizon, mesh)?);
        Ensemble::new(n, grid, paths, seed, DriverSpec::Hbm)
    }

    pub fn path(&self, i: usize) -> ProcessPath {
        let stream = RngStream::new(self.seed, i as u64);
        match &self.driver {
            DriverSpec::Hbm => simulate_hbm(self.n, self.grid.clone(), &stream),
            DriverSpec::HbmWithDrift(kind) => {
                let m = simulate_hbm(self.n, self.grid.clone(), &stream);
                let a = make_fv(kind, self.n, self.grid.clone());
                ProcessPath::decomposable(&m, &a).expect("drift generators start at 0")
            }
            DriverSpec::Fv(kind) => make_fv(kind, self.n, self.grid.clone()),
        }
    }

    /// Applies `f` to every path in parallel; results come back in path order.
    pub fn map<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize, &ProcessPath) -> T + Sync + Send,
    {
        (0..self.paths).into_par_iter().map(|i| f(i, &self.path(i))).collect()
    }

    pub fn try_map<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, &ProcessPath) -> Result<T> + Sync + Send,
    {
        self.map(f).into_iter().collect()
    }

    pub fn collect(&self) -> Vec<ProcessPath> {
        self.map(|_, p| p.clone())
    }
}
