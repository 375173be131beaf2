//! Exact symbolic algebra of trace *-polynomials.
//!
//! A [`TracePolynomial`] is a finite sum of terms `c tr(P_1)...tr(P_l) P_0`
//! where each `P_j` is a word in the letters `x_i`, `x_i*`, `y_{j,l}`,
//! `y_{j,l}*`. Every value is kept in canonical form (trace factors rotated to
//! their minimal rotation and sorted, like terms merged, zero terms dropped),
//! so two polynomials are equal exactly when their representations are.

mod coeff;
mod contract;
mod derive;
mod letter;
mod linearity;
mod parse;
mod subst;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, Zero};

pub use coeff::ScalarCoeff;
pub use contract::{drop_martingale_null, gamma_contract, ContractionModel};
pub use derive::{derive, derive_k, partial};
pub use letter::{word_star, Family, Letter, TraceFactor, Word};
pub use linearity::{classify_linearity, Linearity};
pub use parse::{parse, parse_with, ParseError, ParseOptions};

use letter::fmt_word;

/// Key of a term: its sorted trace factors and its outer word.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermKey {
    pub traces: Vec<TraceFactor>,
    pub outer: Word,
}

impl TermKey {
    fn new(traces: Vec<Word>, outer: Word) -> Self {
        let mut traces: Vec<TraceFactor> = traces
            .into_iter()
            .filter(|w| !w.is_empty())
            .map(TraceFactor::new)
            .collect();
        traces.sort();
        TermKey { traces, outer }
    }

    /// Every letter of the term, trace factors first.
    pub fn letters(&self) -> impl Iterator<Item = &Letter> {
        self.traces.iter().flat_map(|t| t.word().iter()).chain(self.outer.iter())
    }
}

/// Borrowed view of one term.
#[derive(Clone, Copy, Debug)]
pub struct TPTerm<'a> {
    pub coeff: &'a ScalarCoeff,
    pub traces: &'a [TraceFactor],
    pub outer: &'a [Letter],
}

#[derive(Clone, Default, Debug)]
pub struct TracePolynomial {
    terms: BTreeMap<TermKey, ScalarCoeff>,
    /// Declared number of x-variables; never less than the largest index used.
    n_vars: u32,
}

impl PartialEq for TracePolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for TracePolynomial {}

impl TracePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: ScalarCoeff) -> Self {
        let mut p = Self::zero();
        p.push_term(c, Vec::new(), Vec::new());
        p
    }

    pub fn one() -> Self {
        Self::constant(ScalarCoeff::one())
    }

    pub fn letter(l: Letter) -> Self {
        let mut p = Self::zero();
        p.push_term(ScalarCoeff::one(), Vec::new(), vec![l]);
        p
    }

    pub fn x(i: u32) -> Self {
        Self::letter(Letter::x(i))
    }

    /// Adds `c tr(traces...) outer` to `self`, canonicalizing as it goes.
    pub fn push_term(&mut self, c: ScalarCoeff, traces: Vec<Word>, outer: Word) {
        if c.is_zero() {
            return;
        }
        let key = TermKey::new(traces, outer);
        for l in key.letters() {
            if l.is_x() {
                self.n_vars = self.n_vars.max(l.index);
            }
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub(crate) fn push_key(&mut self, c: ScalarCoeff, key: &TermKey) {
        let traces = key.traces.iter().map(|t| t.word().to_vec()).collect();
        self.push_term(c, traces, key.outer.clone());
    }

    pub fn terms(&self) -> impl Iterator<Item = TPTerm<'_>> {
        self.terms.iter().map(|(k, c)| TPTerm { coeff: c, traces: &k.traces, outer: &k.outer })
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = (&TermKey, &ScalarCoeff)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Number of x-variables (declared or used).
    pub fn num_vars(&self) -> u32 {
        self.n_vars
    }

    pub fn with_num_vars(mut self, n: u32) -> Self {
        self.n_vars = self.n_vars.max(n);
        self
    }

    /// Largest slot index of any y-letter, 0 if none.
    pub fn num_slots(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|k| k.letters())
            .filter(|l| l.family == Family::Y)
            .map(|l| l.index)
            .max()
            .unwrap_or(0)
    }

    pub fn has_slots(&self) -> bool {
        self.num_slots() > 0
    }

    /// Coefficient of the pure constant term.
    pub fn constant_term(&self) -> ScalarCoeff {
        self.terms
            .get(&TermKey { traces: Vec::new(), outer: Vec::new() })
            .cloned()
            .unwrap_or_else(ScalarCoeff::zero)
    }

    pub fn scale(&self, c: &ScalarCoeff) -> Self {
        let mut out = Self { terms: BTreeMap::new(), n_vars: self.n_vars };
        for (k, v) in &self.terms {
            out.push_key(v * c, k);
        }
        out
    }

    /// The *-operation: conjugates coefficients, adjoints every trace factor
    /// and reverses-and-stars the outer word.
    pub fn star(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), n_vars: self.n_vars };
        for (k, v) in &self.terms {
            let traces = k.traces.iter().map(|t| word_star(t.word())).collect();
            out.push_term(v.conj(), traces, word_star(&k.outer));
        }
        out
    }

    /// The abstract trace `tr(P)`.
    pub fn trace(&self) -> Self {
        let mut out = Self { terms: BTreeMap::new(), n_vars: self.n_vars };
        for (k, v) in &self.terms {
            let mut traces: Vec<Word> = k.traces.iter().map(|t| t.word().to_vec()).collect();
            traces.push(k.outer.clone());
            out.push_term(v.clone(), traces, Vec::new());
        }
        out
    }

    /// Rewrites every letter through `f`, keeping coefficients.
    pub fn map_letters(&self, f: impl Fn(Letter) -> Letter) -> Self {
        let mut out = Self { terms: BTreeMap::new(), n_vars: self.n_vars };
        for (k, v) in &self.terms {
            let traces = k.traces.iter().map(|t| t.word().iter().map(|&l| f(l)).collect()).collect();
            out.push_term(v.clone(), traces, k.outer.iter().map(|&l| f(l)).collect());
        }
        out
    }

    /// Exchanges slot families `a` and `b`.
    pub fn swap_slots(&self, a: u32, b: u32) -> Self {
        self.map_letters(|l| match l.family {
            Family::Y if l.index == a => Letter { index: b, ..l },
            Family::Y if l.index == b => Letter { index: a, ..l },
            _ => l,
        })
    }

    /// Moves slot `from` to slot `to`.
    pub fn relabel_slot(&self, from: u32, to: u32) -> Self {
        self.map_letters(|l| if l.is_slot(from) { Letter { index: to, ..l } } else { l })
    }

    /// Replaces every `y*` by `y`: valid when the slot is fed self-adjoint
    /// increments.
    pub fn unstar_slots(&self) -> Self {
        self.map_letters(|l| if l.family == Family::Y { Letter { starred: false, ..l } } else { l })
    }
}

impl Add for &TracePolynomial {
    type Output = TracePolynomial;
    fn add(self, rhs: &TracePolynomial) -> TracePolynomial {
        let mut out = self.clone();
        out.n_vars = out.n_vars.max(rhs.n_vars);
        for (k, v) in &rhs.terms {
            out.push_key(v.clone(), k);
        }
        out
    }
}

impl Sub for &TracePolynomial {
    type Output = TracePolynomial;
    fn sub(self, rhs: &TracePolynomial) -> TracePolynomial {
        self + &(-rhs)
    }
}

impl Neg for &TracePolynomial {
    type Output = TracePolynomial;
    fn neg(self) -> TracePolynomial {
        self.scale(&ScalarCoeff::from_int(-1))
    }
}

impl Mul for &TracePolynomial {
    type Output = TracePolynomial;
    fn mul(self, rhs: &TracePolynomial) -> TracePolynomial {
        let mut out = TracePolynomial { terms: BTreeMap::new(), n_vars: self.n_vars.max(rhs.n_vars) };
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                let traces = ka
                    .traces
                    .iter()
                    .chain(&kb.traces)
                    .map(|t| t.word().to_vec())
                    .collect();
                let mut outer = ka.outer.clone();
                outer.extend_from_slice(&kb.outer);
                out.push_term(va * vb, traces, outer);
            }
        }
        out
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for TracePolynomial {
            type Output = TracePolynomial;
            fn $m(self, rhs: TracePolynomial) -> TracePolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Canonical printer; output parses back to the same polynomial.
impl fmt::Display for TracePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, c)) in self.terms.iter().enumerate() {
            let has_letters = !(k.traces.is_empty() && k.outer.is_empty());
            let negative = if c.im().is_zero() {
                c.re().is_negative()
            } else {
                c.re().is_zero() && c.im().is_negative()
            };
            let shown = if negative { -c.clone() } else { c.clone() };
            match (i, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if !has_letters {
                write!(f, "{shown}")?;
                continue;
            }
            let mut sep = "";
            if !shown.is_one() {
                write!(f, "{shown}")?;
                sep = " ";
            }
            for t in &k.traces {
                write!(f, "{sep}{t}")?;
                sep = " ";
            }
            if !k.outer.is_empty() {
                write!(f, "{sep}")?;
                fmt_word(&k.outer, f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> TracePolynomial {
        parse(s).unwrap()
    }

    #[test]
    fn star_of_monomial() {
        assert_eq!(p("i x1 x2'").star(), p("-i x2 x1'"));
    }

    #[test]
    fn trace_commutes_with_star() {
        let q = &p("tr(x1)") * &p("x2");
        assert_eq!(q.star(), p("tr(x1') x2'"));
    }

    #[test]
    fn additive_inverse() {
        let q = p("tr(x1 x2') x3 + 1/2 x1^2 - 3i");
        assert!((&q + &q.scale(&ScalarCoeff::from_int(-1))).is_zero());
    }

    #[test]
    fn trace_of_scalar_is_scalar() {
        assert_eq!(p("tr(1)"), TracePolynomial::one());
        assert_eq!(p("tr(3 + x1)"), p("3 + tr(x1)"));
    }

    #[test]
    fn printer_is_deterministic() {
        let q = p("x2 x1 - 2 tr(x1) x3 + (1/2 + i) x1^2");
        assert_eq!(q.to_string(), p(&q.to_string()).to_string());
        assert_eq!(p("-x1").to_string(), "-x1");
        assert_eq!(TracePolynomial::zero().to_string(), "0");
    }

    #[test]
    fn swap_slots_roundtrip() {
        let q = p("tr(x1 y1) y2 x1");
        assert_eq!(q.swap_slots(1, 2).swap_slots(1, 2), q);
        assert_eq!(q.swap_slots(1, 2), p("tr(x1 y2) y1 x1"));
    }
}
