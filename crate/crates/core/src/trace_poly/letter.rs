use std::fmt;

/// Which indeterminate family a letter belongs to.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Family {
    /// Base indeterminates `x_i`.
    X,
    /// Linear-slot indeterminates `y_{j,l}`.
    Y,
}

/// A single (possibly adjoint) indeterminate.
///
/// For `X` letters `index` is the variable number and `coord` is 0. For `Y`
/// letters `index` is the slot `j` and `coord` the coordinate `l` (1 when the
/// slot has a single coordinate). Field order is the canonical letter order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Letter {
    pub family: Family,
    pub index: u32,
    pub coord: u32,
    pub starred: bool,
}

impl Letter {
    pub const fn x(index: u32) -> Self {
        Letter { family: Family::X, index, coord: 0, starred: false }
    }

    pub const fn y(slot: u32, coord: u32) -> Self {
        Letter { family: Family::Y, index: slot, coord, starred: false }
    }

    pub fn star(self) -> Self {
        Letter { starred: !self.starred, ..self }
    }

    pub fn is_x(&self) -> bool {
        self.family == Family::X
    }

    pub fn is_slot(&self, slot: u32) -> bool {
        self.family == Family::Y && self.index == slot
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::X => write!(f, "x{}", self.index)?,
            Family::Y if self.coord == 1 => write!(f, "y{}", self.index)?,
            Family::Y => write!(f, "y{}_{}", self.index, self.coord)?,
        }
        if self.starred {
            write!(f, "'")?;
        }
        Ok(())
    }
}

pub type Word = Vec<Letter>;

/// Adjoint of a word: reversed, every letter starred.
pub fn word_star(word: &[Letter]) -> Word {
    word.iter().rev().map(|l| l.star()).collect()
}

pub(crate) fn fmt_word(word: &[Letter], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut i = 0;
    let mut first = true;
    while i < word.len() {
        let mut run = 1;
        while i + run < word.len() && word[i + run] == word[i] {
            run += 1;
        }
        if !first {
            write!(f, " ")?;
        }
        first = false;
        write!(f, "{}", word[i])?;
        if run > 1 {
            write!(f, "^{run}")?;
        }
        i += run;
    }
    Ok(())
}

/// A `tr(w)` factor stored as the lexicographically minimal rotation of `w`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TraceFactor(Word);

impl TraceFactor {
    pub fn new(word: Word) -> Self {
        TraceFactor(min_rotation(word))
    }

    pub fn word(&self) -> &[Letter] {
        &self.0
    }

    pub fn star(&self) -> Self {
        TraceFactor::new(word_star(&self.0))
    }
}

fn min_rotation(word: Word) -> Word {
    let n = word.len();
    if n < 2 {
        return word;
    }
    let mut best = 0;
    for start in 1..n {
        let candidate = word[start..].iter().chain(&word[..start]);
        let current = word[best..].iter().chain(&word[..best]);
        if candidate.cmp(current).is_lt() {
            best = start;
        }
    }
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&word[best..]);
    out.extend_from_slice(&word[..best]);
    out
}

impl fmt::Display for TraceFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tr(")?;
        fmt_word(&self.0, f)?;
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotation_is_canonical() {
        let (a, b) = (Letter::x(1), Letter::x(2));
        assert_eq!(TraceFactor::new(vec![b, a, a]), TraceFactor::new(vec![a, a, b]));
        assert_eq!(TraceFactor::new(vec![a, b, a]).word(), &[a, a, b]);
    }

    #[test]
    fn palindromic_word_has_single_form() {
        let (a, b) = (Letter::x(1), Letter::x(2));
        let w = TraceFactor::new(vec![a, b, a, b]);
        assert_eq!(w, TraceFactor::new(vec![b, a, b, a]));
        assert_eq!(w.word(), &[a, b, a, b]);
    }

    #[test]
    fn letter_order_is_family_index_star() {
        assert!(Letter::x(1) < Letter::x(1).star());
        assert!(Letter::x(1).star() < Letter::x(2));
        assert!(Letter::x(9) < Letter::y(1, 1));
    }
}
