//! Gamma contraction: turns a bilinear symbol `P(x)[dM, dM]` driven by a
//! self-adjoint Brownian motion into the density of its quadratic
//! covariation against `dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{classify_linearity, Family, Letter, Linearity, ScalarCoeff, TracePolynomial, Word};

/// Conditional covariance model of the driver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContractionModel {
    /// Hermitian Brownian motion on `n x n` matrices, normalized by `tr_n`.
    Matrix { n: u32 },
    /// The large-n (free) limit; cross-trace pairings vanish.
    Free,
}

impl ContractionModel {
    fn cross_weight(&self) -> Option<ScalarCoeff> {
        match *self {
            ContractionModel::Matrix { n } => {
                let n = i64::from(n);
                Some(ScalarCoeff::from_ratio(1, n * n))
            }
            ContractionModel::Free => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Site {
    Outer(usize),
    Trace(usize, usize),
}

/// Rotation of `w` starting right after position `p` and ending before it:
/// `tr(a y b) = tr(b a y)`, so this returns `b a`.
fn around(w: &[Letter], p: usize) -> Word {
    w[p + 1..].iter().chain(&w[..p]).copied().collect()
}

/// Applies the contraction rules to each term of a real 2-linear symbol:
///
/// * `u y1 v y2 w` → `tr(v) u w`
/// * `tr(u y1 v y2)` → `tr(u) tr(v)`
/// * `tr(u y1) tr(v y2)` → `n^-2 tr(u v)` (matrix) or 0 (free)
/// * `tr(u y1) v y2 w` → `n^-2 v u w` (matrix) or 0 (free)
///
/// Slot letters with different coordinates are driven by independent
/// motions and contract to zero.
pub fn gamma_contract(p: &TracePolynomial, model: ContractionModel) -> Result<TracePolynomial> {
    if classify_linearity(p, 2) == Linearity::NotLinear {
        return Err(Error::NotLinear(2));
    }
    let cross = model.cross_weight();
    let mut out = TracePolynomial::zero().with_num_vars(p.num_vars());
    for (key, c) in p.raw_terms() {
        let traces: Vec<Word> = key.traces.iter().map(|t| t.word().to_vec()).collect();
        let mut sites: Vec<(Letter, Site)> = Vec::with_capacity(2);
        for (ti, w) in traces.iter().enumerate() {
            for (pos, l) in w.iter().enumerate() {
                if l.family == Family::Y {
                    sites.push((*l, Site::Trace(ti, pos)));
                }
            }
        }
        for (pos, l) in key.outer.iter().enumerate() {
            if l.family == Family::Y {
                sites.push((*l, Site::Outer(pos)));
            }
        }
        if let Some((l, _)) = sites.iter().find(|(l, _)| l.starred) {
            return Err(Error::StarredSlot(l.index));
        }
        let [(la, sa), (lb, sb)] = [sites[0], sites[1]];
        if la.coord != lb.coord {
            continue;
        }
        let rest = |skip: &[usize]| -> Vec<Word> {
            traces
                .iter()
                .enumerate()
                .filter(|(i, _)| !skip.contains(i))
                .map(|(_, w)| w.clone())
                .collect()
        };
        match (sa, sb) {
            (Site::Outer(p), Site::Outer(q)) => {
                let (p, q) = (p.min(q), p.max(q));
                let o = &key.outer;
                let mut t = rest(&[]);
                t.push(o[p + 1..q].to_vec());
                let mut outer = o[..p].to_vec();
                outer.extend_from_slice(&o[q + 1..]);
                out.push_term(c.clone(), t, outer);
            }
            (Site::Trace(ti, p), Site::Trace(tj, q)) if ti == tj => {
                let w = &traces[ti];
                let (p, q) = (p.min(q), p.max(q));
                let mut t = rest(&[ti]);
                t.push(w[p + 1..q].to_vec());
                t.push(w[q + 1..].iter().chain(&w[..p]).copied().collect());
                out.push_term(c.clone(), t, key.outer.clone());
            }
            (Site::Trace(ti, p), Site::Trace(tj, q)) => {
                let Some(wt) = &cross else { continue };
                let mut t = rest(&[ti, tj]);
                let mut joined = around(&traces[ti], p);
                joined.extend(around(&traces[tj], q));
                t.push(joined);
                out.push_term(c * wt, t, key.outer.clone());
            }
            (Site::Trace(ti, p), Site::Outer(q)) | (Site::Outer(q), Site::Trace(ti, p)) => {
                let Some(wt) = &cross else { continue };
                let o = &key.outer;
                let mut outer = o[..q].to_vec();
                outer.extend(around(&traces[ti], p));
                outer.extend_from_slice(&o[q + 1..]);
                out.push_term(c * wt, rest(&[ti]), outer);
            }
        }
    }
    Ok(out)
}

/// Drops every term of a 1-linear symbol whose slot letter sits inside a
/// trace factor; such terms integrate to zero against a martingale.
pub fn drop_martingale_null(p: &TracePolynomial) -> Result<TracePolynomial> {
    if classify_linearity(p, 1) == Linearity::NotLinear {
        return Err(Error::NotLinear(1));
    }
    let mut out = TracePolynomial::zero().with_num_vars(p.num_vars());
    for (key, c) in p.raw_terms() {
        if key.outer.iter().any(|l| l.family == Family::Y) {
            out.push_key(c.clone(), key);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_poly::parse;

    const M8: ContractionModel = ContractionModel::Matrix { n: 8 };

    fn g(s: &str, m: ContractionModel) -> TracePolynomial {
        gamma_contract(&parse(s).unwrap(), m).unwrap()
    }

    #[test]
    fn outer_rule() {
        let expected = parse("tr(x2) x1 x3").unwrap();
        assert_eq!(g("x1 y1 x2 y2 x3", M8), expected);
        assert_eq!(g("x1 y1 x2 y2 x3", ContractionModel::Free), expected);
        assert_eq!(g("x1 y2 x2 y1 x3", M8), expected);
        assert_eq!(g("y1 y2", M8), TracePolynomial::one());
    }

    #[test]
    fn same_trace_rule() {
        assert_eq!(g("tr(x1 y1 x2 y2)", M8), parse("tr(x1) tr(x2)").unwrap());
        assert_eq!(g("tr(y2 x2 y1 x1) x3", M8), parse("tr(x1) tr(x2) x3").unwrap());
    }

    #[test]
    fn cross_trace_rule() {
        assert_eq!(g("tr(x1 y1) tr(x2 y2)", M8), parse("1/64 tr(x1 x2)").unwrap());
        assert!(g("tr(x1 y1) tr(x2 y2)", ContractionModel::Free).is_zero());
    }

    #[test]
    fn trace_outer_rule() {
        assert_eq!(g("tr(x1 y1) x2 y2 x3", M8), parse("1/64 x2 x1 x3").unwrap());
        assert_eq!(g("x2 y1 x3 tr(x4 y2 x1)", M8), parse("1/64 x2 x1 x4 x3").unwrap());
        assert!(g("tr(x1 y1) x2 y2 x3", ContractionModel::Free).is_zero());
    }

    #[test]
    fn independent_coordinates_do_not_pair() {
        assert!(g("y1 y2_2", M8).is_zero());
        assert_eq!(g("y1_2 y2_2", M8), TracePolynomial::one());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(gamma_contract(&parse("y1' y2").unwrap(), M8), Err(Error::StarredSlot(1))));
        assert!(matches!(gamma_contract(&parse("y1 y1").unwrap(), M8), Err(Error::NotLinear(2))));
    }

    #[test]
    fn martingale_null_terms() {
        let d = |s: &str| drop_martingale_null(&parse(s).unwrap()).unwrap();
        assert!(d("tr(x1 y1) x2").is_zero());
        assert_eq!(d("x1 y1 x2"), parse("x1 y1 x2").unwrap());
        assert_eq!(d("x1 y1 x2 + tr(x3 y1) x4"), parse("x1 y1 x2").unwrap());
        assert!(drop_martingale_null(&parse("y1 y1").unwrap()).is_err());
    }
}
