//! Numeric modes. A computation runs entirely over one [`Scalar`] type:
//! either exact arbitrary-precision rationals or `f64`.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, Integer, One, ToPrimitive, Zero};

use crate::linalg;

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = BigRational;

/// Numeric field used by kernels, distributions and weights.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    /// `true` for exact rationals.
    const EXACT: bool;
    /// Name used in reports.
    const MODE: &'static str;

    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_u64(v: u64) -> Self;
    fn to_f64(&self) -> f64;

    /// Parse a kernel entry: `p/q`, an integer, or a decimal literal.
    fn parse_entry(s: &str) -> Option<Self>;

    /// Equality with the mode's tolerance: exact equality for rationals,
    /// `|a - b| <= tol * max(1, |a|, |b|)` for floats.
    fn close_to(&self, other: &Self, tol: f64) -> bool;

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }

    fn abs_value(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Determinant of a dense square matrix.
    fn det(matrix: Vec<Vec<Self>>) -> Self {
        linalg::gaussian_det(matrix)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;
    const MODE: &'static str = "exact";

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_u64(v: u64) -> Self {
        Rational::from_integer(BigInt::from(v))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn parse_entry(s: &str) -> Option<Self> {
        parse_rational(s)
    }

    fn close_to(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn det(matrix: Vec<Vec<Self>>) -> Self {
        linalg::bareiss_det(matrix)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;
    const MODE: &'static str = "float";

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn from_u64(v: u64) -> Self {
        v as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_entry(s: &str) -> Option<Self> {
        let s = s.trim();
        match s.split_once('/') {
            Some((p, q)) => {
                let p: f64 = p.trim().parse().ok()?;
                let q: f64 = q.trim().parse().ok()?;
                if q == 0.0 {
                    None
                } else {
                    Some(p / q)
                }
            }
            None => s.parse().ok().filter(|v: &f64| v.is_finite()),
        }
    }

    fn close_to(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= tol * scale
    }
}

/// Parses `p/q`, plain integers and decimal literals (`0.125`, `2.5e-3`)
/// into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let all_digits = format!("{int_part}{frac_part}");
    let mut numer: BigInt = all_digits.parse().ok()?;
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// `true` when the literal should load in float mode (has a decimal point or
/// an exponent).
pub fn is_decimal_literal(s: &str) -> bool {
    let s = s.trim();
    !s.contains('/') && s.contains(['.', 'e', 'E'])
}

/// Writes every value as `p/d` over the least common denominator `d`, e.g.
/// `33/226, 95/226, 98/226` rather than `49/113` for the last entry.
pub fn over_common_denominator(values: &[Rational]) -> Vec<String> {
    let d = values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    values
        .iter()
        .map(|v| format!("{}/{}", v.numer() * (&d / v.denom()), d))
        .collect()
}
