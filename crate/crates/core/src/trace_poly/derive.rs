use crate::error::{Error, Result};

use super::{Family, Letter, TracePolynomial, Word};

/// Leibniz rule: replaces each occurrence of `x_var` (or `x_var*`) in turn by
/// `y_{slot,coord}` (or its adjoint) and sums the results.
pub fn partial(p: &TracePolynomial, var: u32, slot: u32, coord: u32) -> TracePolynomial {
    let target = |l: &Letter| l.family == Family::X && l.index == var;
    let fresh = Letter::y(slot, coord);
    let mut out = TracePolynomial::zero().with_num_vars(p.num_vars());
    for (key, c) in p.raw_terms() {
        let traces: Vec<Word> = key.traces.iter().map(|t| t.word().to_vec()).collect();
        for (ti, tw) in traces.iter().enumerate() {
            for (pos, l) in tw.iter().enumerate() {
                if target(l) {
                    let mut t2 = traces.clone();
                    t2[ti][pos] = if l.starred { fresh.star() } else { fresh };
                    out.push_term(c.clone(), t2, key.outer.clone());
                }
            }
        }
        for (pos, l) in key.outer.iter().enumerate() {
            if target(l) {
                let mut outer = key.outer.clone();
                outer[pos] = if l.starred { fresh.star() } else { fresh };
                out.push_term(c.clone(), traces.clone(), outer);
            }
        }
    }
    out
}

/// `∂_{x_var} P` with a fresh slot (one past the largest slot already used).
pub fn derive(p: &TracePolynomial, var: u32) -> Result<TracePolynomial> {
    if var == 0 || var > p.num_vars() {
        return Err(Error::VarOutOfRange(var, p.num_vars()));
    }
    Ok(partial(p, var, p.num_slots() + 1, 1))
}

/// Total k-th derivative: slot `j` receives coordinate `i` when the j-th
/// derivative is taken in `x_i`.
pub fn derive_k(p: &TracePolynomial, k: u32) -> Result<TracePolynomial> {
    if k == 0 {
        return Err(Error::Invalid("derivative order must be at least 1".into()));
    }
    let base = p.num_slots();
    let n = p.num_vars();
    let mut q = p.clone();
    for j in 1..=k {
        let mut next = TracePolynomial::zero().with_num_vars(n);
        for i in 1..=n {
            next = &next + &partial(&q, i, base + j, i);
        }
        q = next;
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_poly::parse;

    #[test]
    fn golden_partial() {
        let p = parse("x1 x2 x2' x3 + 3i tr(x1 x2') x2 + x1' x3^2 + 5").unwrap();
        let expected = parse("x1 y1 x2' x3 + x1 x2 y1' x3 + 3i tr(x1 y1') x2 + 3i tr(x1 x2') y1").unwrap();
        assert_eq!(derive(&p, 2).unwrap(), expected);
    }

    #[test]
    fn absent_variable() {
        let p = parse("x2").unwrap().with_num_vars(2);
        assert!(derive(&p, 1).unwrap().is_zero());
        assert!(matches!(derive(&p, 3), Err(Error::VarOutOfRange(3, 2))));
        assert!(derive(&p, 0).is_err());
    }

    #[test]
    fn trace_times_variable() {
        let p = parse("tr(x1) x1").unwrap();
        assert_eq!(derive(&p, 1).unwrap(), parse("tr(y1) x1 + tr(x1) y1").unwrap());
    }

    #[test]
    fn fresh_slot_follows_existing() {
        let p = parse("x1 y1").unwrap();
        assert_eq!(derive(&p, 1).unwrap(), parse("y2 y1").unwrap());
    }

    #[test]
    fn second_derivative_of_cube() {
        let p = parse("x1^3").unwrap();
        let expected = parse("y1 y2 x1 + y1 x1 y2 + x1 y1 y2 + y2 y1 x1 + y2 x1 y1 + x1 y2 y1").unwrap();
        assert_eq!(derive_k(&p, 2).unwrap(), expected);
        assert_eq!(derive_k(&parse("x1^2").unwrap(), 1).unwrap(), parse("x1 y1 + y1 x1").unwrap());
    }

    #[test]
    fn constants_vanish() {
        assert!(derive_k(&parse("7 + 2i").unwrap(), 2).unwrap().is_zero());
    }

    #[test]
    fn coordinates_follow_variables() {
        let p = parse("x1 x2").unwrap();
        assert_eq!(derive_k(&p, 1).unwrap(), parse("y1 x2 + x1 y1_2").unwrap());
    }
}
