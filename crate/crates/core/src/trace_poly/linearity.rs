use super::{Family, TracePolynomial};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Linearity {
    NotLinear,
    RealLinear,
    ComplexLinear,
}

/// Classifies `p` with respect to slots `y1..yk`.
///
/// Real k-linear: in every term each slot letter occurs exactly once,
/// starred or not. Complex k-linear additionally never stars a slot letter.
/// Letters of slots above `k` make the polynomial not linear.
pub fn classify_linearity(p: &TracePolynomial, k: u32) -> Linearity {
    let mut complex = true;
    for (key, _) in p.raw_terms() {
        let mut counts = vec![0u32; k as usize + 1];
        for l in key.letters().filter(|l| l.family == Family::Y) {
            if l.index == 0 || l.index > k {
                return Linearity::NotLinear;
            }
            counts[l.index as usize] += 1;
            complex &= !l.starred;
        }
        if counts[1..].iter().any(|&c| c != 1) {
            return Linearity::NotLinear;
        }
    }
    if complex {
        Linearity::ComplexLinear
    } else {
        Linearity::RealLinear
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_poly::parse;

    fn class(s: &str, k: u32) -> Linearity {
        classify_linearity(&parse(s).unwrap(), k)
    }

    #[test]
    fn examples_with_two_slots() {
        assert_eq!(class("tr(x1 y1') x3' y2 x3 x2", 2), Linearity::RealLinear);
        assert_eq!(class("tr(x1 y1) x3' y2 x3 x2", 2), Linearity::ComplexLinear);
        assert_eq!(class("y1 y1", 1), Linearity::NotLinear);
    }

    #[test]
    fn full_examples() {
        let real = "tr(x1 y1') x3' y2 x3 x2 - tr(y2') x2^7 y1 x3^5 + 4 y1 x3' y2 + i y2' y1' x2";
        let complex = "tr(x1 y1) x3' y2 x3 x2 - tr(y2) x2^7 y1 x3^5 + 4 y1 x3' y2 + i y2 y1 x2";
        assert_eq!(class(real, 2), Linearity::RealLinear);
        assert_eq!(class(complex, 2), Linearity::ComplexLinear);
    }

    #[test]
    fn missing_slot() {
        assert_eq!(class("x1 y1", 2), Linearity::NotLinear);
        assert_eq!(class("y1 y2 y3", 2), Linearity::NotLinear);
    }
}
