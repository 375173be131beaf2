//! Left-endpoint stochastic integrals and quadratic covariation on a grid,
//! their closed forms under gamma contraction, and Monte-Carlo checks of
//! the isometry, BDG, substitution and QC identities.

mod checks;
mod integrals;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::evaluator::{EvalContext, YBindings};
use crate::matrix_alg::Matrix;
use crate::process_sim::{make_fv, FvKind, ProcessPath, TimeGrid};
use crate::trace_poly::{classify_linearity, Linearity, TracePolynomial};

pub use checks::{
    bdg_sample, bdg_stats, bdg_summary, conditional_qc_check, conditional_qc_gap_norm, ito_isometry_check,
    probe_matrix, product_rule_check, product_rule_gap_norm, pythagoras_check, qc_gap_check, qc_gap_norm,
    qc_of_integrals_check, substitution_check, BdgSample, SecondLeg,
};
pub use integrals::{
    cross_rate, elementary_integral, qc_closed_form, quad_rs_path, quad_rs_sum, rs_integral, rs_values,
    rs_values_tagged, Tag,
};

/// Value of an `x_i` argument along a path.
#[derive(Clone, Debug)]
pub enum Arg<'a> {
    Path(&'a ProcessPath),
    Owned(ProcessPath),
    Constant(Matrix),
}

impl Arg<'_> {
    fn at(&self, k: usize) -> &Matrix {
        match self {
            Arg::Path(p) => &p.values[k],
            Arg::Owned(p) => &p.values[k],
            Arg::Constant(m) => m,
        }
    }
}

/// Path-independent description of an argument, resolved per driver path.
#[derive(Clone, Debug)]
pub enum ArgSpec {
    Driver,
    Constant(Matrix),
    /// A deterministic FV path sampled on the driver's grid.
    Fv(FvKind),
}

pub type ArgMap<'a> = BTreeMap<u32, Arg<'a>>;

pub fn bind_args<'a>(specs: &BTreeMap<u32, ArgSpec>, driver: &'a ProcessPath) -> ArgMap<'a> {
    specs
        .iter()
        .map(|(&i, s)| {
            let a = match s {
                ArgSpec::Driver => Arg::Path(driver),
                ArgSpec::Constant(m) => Arg::Constant(m.clone()),
                ArgSpec::Fv(kind) => Arg::Owned(make_fv(kind, driver.n(), driver.grid.clone())),
            };
            (i, a)
        })
        .collect()
}

/// `x1` is the driver, the given matrices are `x2, x3, ...`.
pub fn driver_and_constants(constants: &[Matrix]) -> BTreeMap<u32, ArgSpec> {
    let mut m = BTreeMap::from([(1, ArgSpec::Driver)]);
    for (i, c) in constants.iter().enumerate() {
        m.insert(i as u32 + 2, ArgSpec::Constant(c.clone()));
    }
    m
}

fn check_args(args: &ArgMap<'_>, grid: &TimeGrid, n: usize) -> Result<()> {
    let check_path = |p: &ProcessPath| {
        if *p.grid != *grid {
            return Err(Error::GridMismatch);
        }
        if p.n() != n {
            return Err(Error::Dimension { expected: n, got: p.n() });
        }
        Ok(())
    };
    for a in args.values() {
        match a {
            Arg::Path(p) => check_path(p)?,
            Arg::Owned(p) => check_path(p)?,
            Arg::Constant(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Dimension { expected: n, got: m.nrows() });
                }
            }
        }
    }
    Ok(())
}

fn context_at(args: &ArgMap<'_>, n: usize, k: usize) -> EvalContext {
    let mut ctx = EvalContext::new(n);
    for (&i, a) in args {
        ctx.bindings.insert(i, a.at(k).clone());
    }
    ctx
}

fn require_linear(symbol: &TracePolynomial, k: u32) -> Result<()> {
    if classify_linearity(symbol, k) == Linearity::NotLinear {
        return Err(Error::NotLinear(k));
    }
    Ok(())
}

/// A 1-linear trace symbol `H(x)[y1]` with its `x` arguments bound along
/// adapted paths.
#[derive(Clone, Debug)]
pub struct BoundBiprocess<'a> {
    pub symbol: TracePolynomial,
    pub args: ArgMap<'a>,
}

impl<'a> BoundBiprocess<'a> {
    pub fn new(symbol: TracePolynomial, args: ArgMap<'a>) -> Result<Self> {
        require_linear(&symbol, 1)?;
        Ok(BoundBiprocess { symbol, args })
    }

    pub fn from_spec(symbol: &TracePolynomial, specs: &BTreeMap<u32, ArgSpec>, driver: &'a ProcessPath) -> Result<Self> {
        Self::new(symbol.clone(), bind_args(specs, driver))
    }

    /// `y ↦ y`.
    pub fn identity() -> Self {
        BoundBiprocess { symbol: TracePolynomial::letter(crate::trace_poly::Letter::y(1, 1)), args: ArgMap::new() }
    }

    /// `H(t_k)[d]`.
    pub fn apply(&self, n: usize, k: usize, d: &Matrix) -> Result<Matrix> {
        context_at(&self.args, n, k).session()?.eval_multilinear(&self.symbol, &YBindings::slots(&[d]))
    }
}

/// A 2-linear trace symbol `Λ(x)[y1, y2]` with bound arguments.
#[derive(Clone, Debug)]
pub struct BoundTriprocess<'a> {
    pub symbol: TracePolynomial,
    pub args: ArgMap<'a>,
}

impl<'a> BoundTriprocess<'a> {
    pub fn new(symbol: TracePolynomial, args: ArgMap<'a>) -> Result<Self> {
        require_linear(&symbol, 2)?;
        Ok(BoundTriprocess { symbol, args })
    }

    pub fn from_spec(symbol: &TracePolynomial, specs: &BTreeMap<u32, ArgSpec>, driver: &'a ProcessPath) -> Result<Self> {
        Self::new(symbol.clone(), bind_args(specs, driver))
    }

    /// `Λ(t_k)[d1, d2]`.
    pub fn apply(&self, n: usize, k: usize, d1: &Matrix, d2: &Matrix) -> Result<Matrix> {
        context_at(&self.args, n, k).session()?.eval_multilinear(&self.symbol, &YBindings::slots(&[d1, d2]))
    }
}

/// One window `(s, t]` of an elementary predictable process, with the
/// symbol's arguments frozen at `frozen_at <= s`.
#[derive(Clone, Debug, PartialEq)]
pub struct EpPiece {
    pub s: f64,
    pub t: f64,
    pub symbol: TracePolynomial,
    pub bindings: BTreeMap<u32, Matrix>,
    pub frozen_at: f64,
}

/// `Σ_i 1_{(s_i, t_i]} H_i` with disjoint windows in increasing order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ElementaryPredictable {
    pub pieces: Vec<EpPiece>,
}

impl ElementaryPredictable {
    pub fn new(pieces: Vec<EpPiece>) -> Result<Self> {
        for p in &pieces {
            if p.s.is_nan() || p.t.is_nan() || p.s >= p.t {
                return Err(Error::Invalid(format!("empty window ({}, {}]", p.s, p.t)));
            }
            if p.frozen_at > p.s {
                return Err(Error::Invalid(format!("bindings frozen at {} after window start {}", p.frozen_at, p.s)));
            }
            require_linear(&p.symbol, 1)?;
        }
        if pieces.windows(2).any(|w| w[1].s < w[0].t) {
            return Err(Error::Invalid("windows must be disjoint and increasing".into()));
        }
        Ok(ElementaryPredictable { pieces })
    }

    /// Freezes a bound biprocess at the start of each window.
    pub fn freeze(h: &BoundBiprocess<'_>, grid: &TimeGrid, windows: &[(f64, f64)]) -> Result<Self> {
        let pieces = windows
            .iter()
            .map(|&(s, t)| {
                let k = grid.require_index(s)?;
                let bindings = h.args.iter().map(|(&i, a)| (i, a.at(k).clone())).collect();
                Ok(EpPiece { s, t, symbol: h.symbol.clone(), bindings, frozen_at: s })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pieces)
    }

    fn piece_at_step(&self, grid: &TimeGrid, k: usize) -> Option<&EpPiece> {
        let (a, b) = (grid.times()[k], grid.times()[k + 1]);
        let tol = 1e-9 * b.abs().max(1.0);
        self.pieces.iter().find(|p| p.s <= a + tol && b <= p.t + tol)
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        for p in &self.pieces {
            grid.require_index(p.s)?;
            if p.t < grid.horizon() {
                grid.require_index(p.t)?;
            }
        }
        Ok(())
    }
}

/// An integrand for left-endpoint sums along one driver path.
#[derive(Clone, Debug)]
pub enum Integrand<'a> {
    Bound(BoundBiprocess<'a>),
    Elementary(ElementaryPredictable),
}

impl Integrand<'_> {
    /// Symbol and evaluation context on step `k`, or `None` where the
    /// integrand vanishes.
    pub fn step(&self, grid: &TimeGrid, n: usize, k: usize) -> Option<(&TracePolynomial, EvalContext)> {
        match self {
            Integrand::Bound(h) => Some((&h.symbol, context_at(&h.args, n, k))),
            Integrand::Elementary(e) => e.piece_at_step(grid, k).map(|p| {
                let mut ctx = EvalContext::new(n);
                ctx.bindings = p.bindings.clone();
                (&p.symbol, ctx)
            }),
        }
    }

    fn validate(&self, grid: &TimeGrid, n: usize) -> Result<()> {
        match self {
            Integrand::Bound(h) => check_args(&h.args, grid, n),
            Integrand::Elementary(e) => {
                e.check_grid(grid)?;
                for p in &e.pieces {
                    if let Some(m) = p.bindings.values().find(|m| m.nrows() != n) {
                        return Err(Error::Dimension { expected: n, got: m.nrows() });
                    }
                }
                Ok(())
            }
        }
    }

    /// `H(t_k)[d]`, zero outside the support.
    pub fn apply(&self, grid: &TimeGrid, n: usize, k: usize, d: &Matrix) -> Result<Matrix> {
        match self.step(grid, n, k) {
            Some((sym, ctx)) => ctx.session()?.eval_multilinear(sym, &YBindings::slots(&[d])),
            None => Ok(Matrix::zeros(n, n)),
        }
    }
}

/// Path-independent integrand: a 1-linear symbol with argument specs, either
/// adapted (`windows = None`) or elementary, frozen at each window start.
#[derive(Clone, Debug)]
pub struct IntegrandSpec {
    pub symbol: TracePolynomial,
    pub args: BTreeMap<u32, ArgSpec>,
    pub windows: Option<Vec<(f64, f64)>>,
}

impl IntegrandSpec {
    pub fn identity() -> Self {
        IntegrandSpec {
            symbol: TracePolynomial::letter(crate::trace_poly::Letter::y(1, 1)),
            args: BTreeMap::new(),
            windows: None,
        }
    }

    pub fn adapted(symbol: TracePolynomial, args: BTreeMap<u32, ArgSpec>) -> Self {
        IntegrandSpec { symbol, args, windows: None }
    }

    pub fn elementary(symbol: TracePolynomial, args: BTreeMap<u32, ArgSpec>, windows: Vec<(f64, f64)>) -> Self {
        IntegrandSpec { symbol, args, windows: Some(windows) }
    }

    pub fn realize<'a>(&self, driver: &'a ProcessPath) -> Result<Integrand<'a>> {
        let h = BoundBiprocess::from_spec(&self.symbol, &self.args, driver)?;
        match &self.windows {
            None => Ok(Integrand::Bound(h)),
            Some(w) => Ok(Integrand::Elementary(ElementaryPredictable::freeze(&h, &driver.grid, w)?)),
        }
    }
}
