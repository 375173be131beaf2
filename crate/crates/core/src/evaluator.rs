//! Evaluation of trace polynomials on tuples of matrices.
//!
//! Trace factors become scalars (`tr_n` of the evaluated word, or its
//! average over a sample set in ensemble mode) and the outer word becomes a
//! matrix product. Products of x-only subwords are cached per [`Session`], so
//! evaluating several polynomials at the same point shares work.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix_alg::{lp_norm, tr, tr_prod, Matrix};
use crate::trace_poly::{Family, Letter, TracePolynomial};

/// How trace factors are turned into scalars.
#[derive(Clone, Debug, Default)]
pub enum TraceMode {
    /// `tr_n` of the product at the bound matrices.
    #[default]
    Pathwise,
    /// Average of `tr_n` over a sample set of x-bindings.
    Ensemble(Vec<BTreeMap<u32, Matrix>>),
}

#[derive(Clone, Debug)]
pub struct EvalContext {
    pub n: usize,
    pub trace_mode: TraceMode,
    pub bindings: BTreeMap<u32, Matrix>,
}

/// Matrices bound to slot letters, keyed by `(slot, coordinate)`.
#[derive(Clone, Debug, Default)]
pub struct YBindings(pub BTreeMap<(u32, u32), Matrix>);

impl YBindings {
    /// Binds `y_j` (coordinate 1) to `mats[j - 1]`.
    pub fn slots(mats: &[&Matrix]) -> Self {
        YBindings(mats.iter().enumerate().map(|(j, m)| ((j as u32 + 1, 1), (*m).clone())).collect())
    }

    pub fn insert(&mut self, slot: u32, coord: u32, m: Matrix) {
        self.0.insert((slot, coord), m);
    }
}

impl EvalContext {
    pub fn new(n: usize) -> Self {
        EvalContext { n, trace_mode: TraceMode::Pathwise, bindings: BTreeMap::new() }
    }

    pub fn bind(mut self, var: u32, m: Matrix) -> Self {
        self.bindings.insert(var, m);
        self
    }

    pub fn from_slice(mats: &[Matrix]) -> Self {
        let n = mats.first().map_or(0, |m| m.nrows());
        let mut ctx = EvalContext::new(n);
        for (i, m) in mats.iter().enumerate() {
            ctx.bindings.insert(i as u32 + 1, m.clone());
        }
        ctx
    }

    pub fn with_trace_mode(mut self, mode: TraceMode) -> Self {
        self.trace_mode = mode;
        self
    }

    fn validate(&self) -> Result<()> {
        for m in self.bindings.values() {
            if m.nrows() != self.n || m.ncols() != self.n {
                return Err(Error::Dimension { expected: self.n, got: m.nrows() });
            }
        }
        if let TraceMode::Ensemble(samples) = &self.trace_mode {
            if samples.is_empty() {
                return Err(Error::EmptyEnsemble);
            }
            for s in samples {
                for m in s.values() {
                    if m.nrows() != self.n {
                        return Err(Error::Dimension { expected: self.n, got: m.nrows() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn session(&self) -> Result<Session<'_>> {
        self.validate()?;
        Ok(Session { ctx: self, words: RefCell::new(HashMap::new()), traces: RefCell::new(HashMap::new()) })
    }
}

/// Evaluates an x-only polynomial; pure-trace polynomials give `c I`.
pub fn eval_poly(p: &TracePolynomial, ctx: &EvalContext) -> Result<Matrix> {
    ctx.session()?.eval(p)
}

/// Evaluates a multilinear polynomial; starred slot letters receive the
/// adjoint of the bound matrix.
pub fn eval_multilinear(p: &TracePolynomial, ctx: &EvalContext, y: &YBindings) -> Result<Matrix> {
    ctx.session()?.eval_multilinear(p, y)
}

/// Monte-Carlo lower bound for the multilinear norm
/// `sup ‖P[b_1, ..., b_k]‖_q / Π ‖b_j‖_{p_j}` at the bound point, over
/// `trials` complex Gaussian directions. The supremum itself is not
/// computed.
pub fn multilinear_norm_lower_bound(
    p: &TracePolynomial,
    ctx: &EvalContext,
    slot_exponents: &[f64],
    out_exponent: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let k = p.num_slots() as usize;
    if slot_exponents.len() != k {
        return Err(Error::Invalid(format!("{k} slots but {} exponents", slot_exponents.len())));
    }
    let n = ctx.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = ctx.session()?;
    let mut best: f64 = 0.0;
    for _ in 0..trials {
        let dirs: Vec<Matrix> = (0..k)
            .map(|_| {
                Matrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                })
            })
            .collect();
        let mut denom = 1.0;
        for (b, &e) in dirs.iter().zip(slot_exponents) {
            denom *= lp_norm(b, e)?;
        }
        let refs: Vec<&Matrix> = dirs.iter().collect();
        let v = lp_norm(&s.eval_multilinear(p, &YBindings::slots(&refs))?, out_exponent)?;
        best = best.max(v / denom);
    }
    Ok(best)
}

/// Evaluation state at one point, caching x-only products.
pub struct Session<'a> {
    ctx: &'a EvalContext,
    words: RefCell<HashMap<Vec<Letter>, Matrix>>,
    traces: RefCell<HashMap<Vec<Letter>, Complex64>>,
}

impl Session<'_> {
    pub fn eval(&self, p: &TracePolynomial) -> Result<Matrix> {
        self.eval_multilinear(p, &YBindings::default())
    }

    pub fn eval_multilinear(&self, p: &TracePolynomial, y: &YBindings) -> Result<Matrix> {
        let n = self.ctx.n;
        let mut out = Matrix::zeros(n, n);
        for t in p.terms() {
            let mut scalar = t.coeff.to_c64();
            for f in t.traces {
                scalar *= self.trace_value(f.word(), y)?;
            }
            if t.outer.is_empty() {
                for i in 0..n {
                    out[(i, i)] += scalar;
                }
            } else {
                let m = self.word(t.outer, y, &self.ctx.bindings, true)?;
                out += m * scalar;
            }
        }
        Ok(out)
    }

    fn letter(&self, l: &Letter, y: &YBindings, x: &BTreeMap<u32, Matrix>) -> Result<Matrix> {
        let base = match l.family {
            Family::X => x.get(&l.index).ok_or(Error::Unbound(l.index))?,
            Family::Y => y.0.get(&(l.index, l.coord)).ok_or(Error::UnboundSlot(l.index, l.coord))?,
        };
        if base.nrows() != self.ctx.n {
            return Err(Error::Dimension { expected: self.ctx.n, got: base.nrows() });
        }
        Ok(if l.starred { base.adjoint() } else { base.clone() })
    }

    /// Product of an x-only run; cached when evaluated at the context
    /// bindings.
    fn x_run(&self, run: &[Letter], x: &BTreeMap<u32, Matrix>, cache: bool) -> Result<Matrix> {
        if cache {
            if let Some(m) = self.words.borrow().get(run) {
                return Ok(m.clone());
            }
        }
        let m = if run.len() == 1 {
            self.letter(&run[0], &YBindings::default(), x)?
        } else {
            let head = self.x_run(&run[..run.len() - 1], x, cache)?;
            let last = self.x_run(&run[run.len() - 1..], x, cache)?;
            head * last
        };
        if cache {
            self.words.borrow_mut().insert(run.to_vec(), m.clone());
        }
        Ok(m)
    }

    fn segments(word: &[Letter]) -> Vec<&[Letter]> {
        let mut segs = Vec::new();
        let mut i = 0;
        while i < word.len() {
            if word[i].is_x() {
                let mut j = i;
                while j < word.len() && word[j].is_x() {
                    j += 1;
                }
                segs.push(&word[i..j]);
                i = j;
            } else {
                segs.push(&word[i..i + 1]);
                i += 1;
            }
        }
        segs
    }

    fn segment(&self, seg: &[Letter], y: &YBindings, x: &BTreeMap<u32, Matrix>, cache: bool) -> Result<Matrix> {
        if seg[0].is_x() {
            self.x_run(seg, x, cache)
        } else {
            self.letter(&seg[0], y, x)
        }
    }

    fn word(&self, word: &[Letter], y: &YBindings, x: &BTreeMap<u32, Matrix>, cache: bool) -> Result<Matrix> {
        let segs = Self::segments(word);
        let mut acc = self.segment(segs[0], y, x, cache)?;
        for s in &segs[1..] {
            acc *= self.segment(s, y, x, cache)?;
        }
        Ok(acc)
    }

    /// `tr_n` of a word, the last segment paired without forming the product.
    fn word_trace(&self, word: &[Letter], y: &YBindings, x: &BTreeMap<u32, Matrix>, cache: bool) -> Result<Complex64> {
        let segs = Self::segments(word);
        if segs.len() == 1 {
            return Ok(tr(&self.segment(segs[0], y, x, cache)?));
        }
        let last = self.segment(segs[segs.len() - 1], y, x, cache)?;
        let mut head = self.segment(segs[0], y, x, cache)?;
        for s in &segs[1..segs.len() - 1] {
            head *= self.segment(s, y, x, cache)?;
        }
        Ok(tr_prod(&head, &last))
    }

    fn trace_value(&self, word: &[Letter], y: &YBindings) -> Result<Complex64> {
        let x_only = word.iter().all(|l| l.is_x());
        if x_only {
            if let Some(v) = self.traces.borrow().get(word) {
                return Ok(*v);
            }
        }
        let v = match &self.ctx.trace_mode {
            TraceMode::Pathwise => self.word_trace(word, y, &self.ctx.bindings, true)?,
            TraceMode::Ensemble(samples) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for s in samples {
                    acc += self.word_trace(word, y, s, false)?;
                }
                acc / samples.len() as f64
            }
        };
        if x_only {
            self.traces.borrow_mut().insert(word.to_vec(), v);
        }
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_alg::max_abs;
    use crate::trace_poly::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m(n: usize, s: f64) -> Matrix {
        Matrix::from_fn(n, n, |i, j| c(((i * n + j) as f64 * s).sin(), ((i + 2 * j) as f64 * s).cos()))
    }

    #[test]
    fn single_variable() {
        let a = m(3, 0.4);
        let ctx = EvalContext::new(3).bind(1, a.clone());
        assert_eq!(eval_poly(&parse("x1").unwrap(), &ctx).unwrap(), a);
    }

    #[test]
    fn trace_scales_outer() {
        let mut a = Matrix::zeros(2, 2);
        a[(0, 0)] = c(1.0, 0.0);
        a[(1, 1)] = c(3.0, 0.0);
        let b = m(2, 0.9);
        let ctx = EvalContext::new(2).bind(1, a).bind(2, b.clone());
        let v = eval_poly(&parse("tr(x1) x2").unwrap(), &ctx).unwrap();
        assert!(max_abs(&(v - b * c(2.0, 0.0))) < 1e-14);
    }

    #[test]
    fn pure_trace_is_scalar_identity() {
        let a = m(3, 0.2);
        let ctx = EvalContext::new(3).bind(1, a.clone());
        let v = eval_poly(&parse("tr(x1 x1')").unwrap(), &ctx).unwrap();
        let expected = tr(&(&a * a.adjoint()));
        assert!(max_abs(&(v - Matrix::identity(3, 3) * expected)) < 1e-14);
    }

    #[test]
    fn sandwich_and_adjoint_slot() {
        let (a1, a2, b) = (m(3, 0.3), m(3, 0.5), m(3, 0.7));
        let ctx = EvalContext::new(3).bind(1, a1.clone()).bind(2, a2.clone());
        let y = YBindings::slots(&[&b]);
        let v = eval_multilinear(&parse("x1 y1 x2").unwrap(), &ctx, &y).unwrap();
        assert!(max_abs(&(v - &a1 * &b * &a2)) < 1e-13);
        let v = eval_multilinear(&parse("x1 y1'").unwrap(), &ctx, &y).unwrap();
        assert!(max_abs(&(v - &a1 * b.adjoint())) < 1e-13);
    }

    #[test]
    fn errors() {
        let ctx = EvalContext::new(3).bind(1, m(3, 0.1));
        assert!(matches!(eval_poly(&parse("x2").unwrap(), &ctx), Err(Error::Unbound(2))));
        assert!(matches!(
            eval_multilinear(&parse("y1").unwrap(), &ctx, &YBindings::default()),
            Err(Error::UnboundSlot(1, 1))
        ));
        let bad = EvalContext::new(3).bind(1, m(2, 0.1));
        assert!(matches!(eval_poly(&parse("x1").unwrap(), &bad), Err(Error::Dimension { .. })));
    }

    #[test]
    fn ensemble_mode_averages_traces() {
        let (a, b) = (m(2, 0.3), m(2, 0.8));
        let samples = vec![BTreeMap::from([(1, a.clone())]), BTreeMap::from([(1, b.clone())])];
        let ctx = EvalContext::new(2).bind(1, a.clone()).with_trace_mode(TraceMode::Ensemble(samples));
        let v = eval_poly(&parse("tr(x1^2)").unwrap(), &ctx).unwrap();
        let expected = (tr(&(&a * &a)) + tr(&(&b * &b))) / 2.0;
        assert!((v[(0, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn norm_lower_bound_of_identity_slot() {
        // ‖y‖_2 / ‖y‖_2 = 1 for every direction
        let p = crate::trace_poly::parse("y1").unwrap();
        let ctx = EvalContext::new(3);
        let v = multilinear_norm_lower_bound(&p, &ctx, &[2.0], 2.0, 5, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let q = crate::trace_poly::parse("x1 y1 x1").unwrap();
        let a = Matrix::from_diagonal_element(3, 3, Complex64::new(2.0, 0.0));
        let v = multilinear_norm_lower_bound(&q, &EvalContext::new(3).bind(1, a), &[2.0], 2.0, 5, 1).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        assert!(multilinear_norm_lower_bound(&q, &EvalContext::new(3), &[], 2.0, 1, 1).is_err());
    }
}
