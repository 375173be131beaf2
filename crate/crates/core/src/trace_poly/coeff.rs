use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact complex rational coefficient.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ScalarCoeff(pub Complex<BigRational>);

impl ScalarCoeff {
    pub fn zero() -> Self {
        ScalarCoeff(Complex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn i() -> Self {
        ScalarCoeff(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn from_int(v: i64) -> Self {
        ScalarCoeff(Complex::new(BigRational::from_integer(v.into()), BigRational::zero()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::real(BigRational::new(num.into(), den.into()))
    }

    pub fn real(re: BigRational) -> Self {
        ScalarCoeff(Complex::new(re, BigRational::zero()))
    }

    pub fn new(re: BigRational, im: BigRational) -> Self {
        ScalarCoeff(Complex::new(re, im))
    }

    pub fn re(&self) -> &BigRational {
        &self.0.re
    }

    pub fn im(&self) -> &BigRational {
        &self.0.im
    }

    pub fn is_zero(&self) -> bool {
        self.0.re.is_zero() && self.0.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.re.is_one() && self.0.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        ScalarCoeff(self.0.conj())
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(
            self.0.re.to_f64().unwrap_or(f64::NAN),
            self.0.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl From<i64> for ScalarCoeff {
    fn from(v: i64) -> Self {
        Self::from_int(v)
    }
}

impl Add for ScalarCoeff {
    type Output = ScalarCoeff;
    fn add(self, rhs: Self) -> Self {
        ScalarCoeff(self.0 + rhs.0)
    }
}

impl AddAssign for ScalarCoeff {
    fn add_assign(&mut self, rhs: Self) {
        self.0 = &self.0 + rhs.0;
    }
}

impl Sub for ScalarCoeff {
    type Output = ScalarCoeff;
    fn sub(self, rhs: Self) -> Self {
        ScalarCoeff(self.0 - rhs.0)
    }
}

impl Mul for ScalarCoeff {
    type Output = ScalarCoeff;
    fn mul(self, rhs: Self) -> Self {
        ScalarCoeff(self.0 * rhs.0)
    }
}

impl<'a> Mul<&'a ScalarCoeff> for &'a ScalarCoeff {
    type Output = ScalarCoeff;
    fn mul(self, rhs: &ScalarCoeff) -> ScalarCoeff {
        ScalarCoeff(&self.0 * &rhs.0)
    }
}

impl Neg for ScalarCoeff {
    type Output = ScalarCoeff;
    fn neg(self) -> Self {
        ScalarCoeff(-self.0)
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom() == &BigInt::one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Prints in the expression grammar: `3`, `-1/2`, `2i`, `-i`, `(1/2 + 3i)`.
impl fmt::Display for ScalarCoeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (&self.0.re, &self.0.im);
        if im.is_zero() {
            return fmt_rational(re, f);
        }
        let write_imag = |f: &mut fmt::Formatter<'_>, v: &BigRational| -> fmt::Result {
            if v.is_one() {
                write!(f, "i")
            } else {
                fmt_rational(v, f)?;
                write!(f, "i")
            }
        };
        if re.is_zero() {
            if im.is_negative() {
                write!(f, "-")?;
            }
            return write_imag(f, &im.abs());
        }
        write!(f, "(")?;
        fmt_rational(re, f)?;
        write!(f, "{}", if im.is_negative() { " - " } else { " + " })?;
        write_imag(f, &im.abs())?;
        write!(f, ")")
    }
}
