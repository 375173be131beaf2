//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*')? factor)*
//! factor := scalar | var | var "'" | "tr" "(" expr ")" | "(" expr ")" | factor "^" uint
//! var    := ("x"|"y") uint ("_" uint)?
//! scalar := decimal | decimal "i" | "i"        (a/b accepted for rationals)
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::{classify_linearity, Letter, Linearity, ScalarCoeff, TracePolynomial};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: usize, name: String },
    #[error("expression is not real {slots}-linear in y1..y{slots}")]
    SlotLinearity { slots: u32 },
}

/// Arity hints for [`parse_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Reject `x_i` with `i` above this bound.
    pub max_vars: Option<u32>,
    /// Declared k-linear signature: every term must contain each of
    /// `y1..yk` exactly once.
    pub slots: Option<u32>,
}

pub fn parse(text: &str) -> Result<TracePolynomial, ParseError> {
    parse_with(text, ParseOptions::default())
}

pub fn parse_with(text: &str, opts: ParseOptions) -> Result<TracePolynomial, ParseError> {
    let tokens = lex(text, opts)?;
    let mut p = Parser { tokens, pos: 0, end: text.len() };
    let poly = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::Syntax { pos: t.pos, msg: format!("unexpected {:?}", t.kind) });
    }
    let poly = match opts.max_vars {
        Some(n) => poly.with_num_vars(n),
        None => poly,
    };
    if let Some(k) = opts.slots {
        if classify_linearity(&poly, k) == Linearity::NotLinear {
            return Err(ParseError::SlotLinearity { slots: k });
        }
    }
    Ok(poly)
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Num { value: BigRational, imag: bool, integer: Option<u32> },
    Imag,
    Var(Letter),
    Tr,
    LParen,
    RParen,
    Plus,
    Minus,
    Times,
    Caret,
    Prime,
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    pos: usize,
}

fn lex(text: &str, opts: ParseOptions) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let digits = |mut j: usize| {
        while j < bytes.len() && bytes[j].is_ascii_digit() {
            j += 1;
        }
        j
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'(' => Some(Kind::LParen),
            b')' => Some(Kind::RParen),
            b'+' => Some(Kind::Plus),
            b'-' => Some(Kind::Minus),
            b'*' => Some(Kind::Times),
            b'^' => Some(Kind::Caret),
            b'\'' => Some(Kind::Prime),
            _ => None,
        };
        if let Some(kind) = simple {
            out.push(Token { kind, pos: start });
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let (mut value, mut is_int, next) = decimal(text, i)?;
            i = next;
            if i < bytes.len() && bytes[i] == b'/' {
                let (den, den_int, next) = decimal(text, i + 1)?;
                if den.is_zero() {
                    return Err(ParseError::Syntax { pos: i, msg: "division by zero".into() });
                }
                value /= den;
                is_int = is_int && den_int && value.is_integer();
                i = next;
            }
            let imag = i < bytes.len()
                && bytes[i] == b'i'
                && !bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphanumeric());
            if imag {
                i += 1;
            }
            let integer = if is_int && !imag { u32::try_from(value.to_integer()).ok() } else { None };
            out.push(Token { kind: Kind::Num { value, imag, integer }, pos: start });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let mut j = i;
            while j < bytes.len() && bytes[j].is_ascii_alphabetic() {
                j += 1;
            }
            let name = &text[i..j];
            match name {
                "tr" => out.push(Token { kind: Kind::Tr, pos: start }),
                "i" => out.push(Token { kind: Kind::Imag, pos: start }),
                "x" | "y" => {
                    let k = digits(j);
                    let unknown = || ParseError::UnknownIdentifier { pos: start, name: text[start..k.max(j)].to_string() };
                    let index: u32 = text[j..k].parse().map_err(|_| unknown())?;
                    if index == 0 {
                        return Err(unknown());
                    }
                    let mut end = k;
                    let letter = if name == "x" {
                        if opts.max_vars.is_some_and(|m| index > m) {
                            return Err(unknown());
                        }
                        Letter::x(index)
                    } else {
                        let mut coord = 1;
                        if end < bytes.len() && bytes[end] == b'_' {
                            let e2 = digits(end + 1);
                            coord = text[end + 1..e2].parse().map_err(|_| ParseError::Syntax {
                                pos: end,
                                msg: "expected coordinate after `_`".into(),
                            })?;
                            if coord == 0 {
                                return Err(ParseError::UnknownIdentifier { pos: start, name: text[start..e2].into() });
                            }
                            end = e2;
                        }
                        if opts.slots.is_some_and(|k| index > k) {
                            return Err(ParseError::UnknownIdentifier { pos: start, name: text[start..end].into() });
                        }
                        Letter::y(index, coord)
                    };
                    out.push(Token { kind: Kind::Var(letter), pos: start });
                    i = end;
                    continue;
                }
                _ => {
                    return Err(ParseError::UnknownIdentifier { pos: start, name: name.to_string() });
                }
            }
            i = j;
            continue;
        }
        return Err(ParseError::Syntax { pos: i, msg: format!("unexpected character `{}`", text[i..].chars().next().unwrap()) });
    }
    Ok(out)
}

/// Parses `ddd(.ddd)?` at `i`; returns the exact value, whether it was an
/// integer literal, and the end offset.
fn decimal(text: &str, i: usize) -> Result<(BigRational, bool, usize), ParseError> {
    let bytes = text.as_bytes();
    let mut j = i;
    while j < bytes.len() && bytes[j].is_ascii_digit() {
        j += 1;
    }
    let int_part = &text[i..j];
    let mut frac_part = "";
    if j < bytes.len() && bytes[j] == b'.' {
        let k = j + 1;
        let mut e = k;
        while e < bytes.len() && bytes[e].is_ascii_digit() {
            e += 1;
        }
        frac_part = &text[k..e];
        j = e;
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(ParseError::Syntax { pos: i, msg: "expected a number".into() });
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| ParseError::Syntax { pos: i, msg: "bad number".into() })?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Ok((BigRational::new(numer, denom), frac_part.is_empty(), j))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn eat(&mut self, kind: &Kind) -> bool {
        if self.peek().is_some_and(|t| &t.kind == kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: Kind, what: &str) -> Result<(), ParseError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.here(), msg: format!("expected {what}") })
        }
    }

    fn expr(&mut self) -> Result<TracePolynomial, ParseError> {
        let negate = if self.eat(&Kind::Minus) {
            true
        } else {
            self.eat(&Kind::Plus);
            false
        };
        let mut acc = self.term()?;
        if negate {
            acc = -&acc;
        }
        loop {
            if self.eat(&Kind::Plus) {
                acc = &acc + &self.term()?;
            } else if self.eat(&Kind::Minus) {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek().map(|t| &t.kind),
            Some(Kind::Num { .. } | Kind::Imag | Kind::Var(_) | Kind::Tr | Kind::LParen)
        )
    }

    fn term(&mut self) -> Result<TracePolynomial, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Kind::Times) || self.starts_factor() {
                acc = &acc * &self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<TracePolynomial, ParseError> {
        let mut base = self.primary()?;
        while self.eat(&Kind::Caret) {
            let pos = self.here();
            let exp = match self.peek().map(|t| &t.kind) {
                Some(Kind::Num { integer: Some(e), .. }) => *e,
                _ => return Err(ParseError::Syntax { pos, msg: "expected unsigned integer exponent".into() }),
            };
            self.pos += 1;
            let mut out = TracePolynomial::one();
            for _ in 0..exp {
                out = &out * &base;
            }
            base = out;
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<TracePolynomial, ParseError> {
        let pos = self.here();
        let Some(tok) = self.peek().cloned() else {
            return Err(ParseError::Syntax { pos, msg: "unexpected end of input".into() });
        };
        self.pos += 1;
        match tok.kind {
            Kind::Num { value, imag, .. } => {
                let c = if imag {
                    ScalarCoeff::new(BigRational::zero(), value)
                } else {
                    ScalarCoeff::real(value)
                };
                Ok(TracePolynomial::constant(c))
            }
            Kind::Imag => Ok(TracePolynomial::constant(ScalarCoeff::i())),
            Kind::Var(l) => {
                let l = if self.eat(&Kind::Prime) { l.star() } else { l };
                Ok(TracePolynomial::letter(l))
            }
            Kind::Tr => {
                self.expect(Kind::LParen, "`(` after tr")?;
                let inner = self.expr()?;
                self.expect(Kind::RParen, "`)`")?;
                Ok(inner.trace())
            }
            Kind::LParen => {
                let inner = self.expr()?;
                self.expect(Kind::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(ParseError::Syntax { pos, msg: format!("unexpected {other:?}") }),
        }
    }
}
