//! Scalar abstraction shared by the float solvers and the exact-rational oracle.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::game::Branch;

/// Field used by the linear-system solvers and strategy iteration.
///
/// `f64` compares with a small absolute tolerance, `BigRational` compares
/// exactly.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Zero
    + One
    + Signed
{
    fn from_branch(b: &Branch) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// `self > other` beyond the comparison tolerance.
    fn definitely_gt(&self, other: &Self) -> bool;
    fn approx_eq(&self, other: &Self) -> bool {
        !self.definitely_gt(other) && !other.definitely_gt(self)
    }
}

/// Absolute tolerance used for float comparisons in strategy selection.
pub const FLOAT_TIE_TOLERANCE: f64 = 1e-12;

impl Scalar for f64 {
    fn from_branch(b: &Branch) -> Self {
        b.prob
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn definitely_gt(&self, other: &Self) -> bool {
        *self > *other + FLOAT_TIE_TOLERANCE
    }
}

impl Scalar for BigRational {
    fn from_branch(b: &Branch) -> Self {
        b.exact.clone()
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn definitely_gt(&self, other: &Self) -> bool {
        self > other
    }
}

/// Converts a rational to the nearest representable `f64`, also for
/// numerators and denominators far outside the `f64` range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Scale both parts down to 64 significant bits before dividing.
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift_n = (nb - 64).max(0);
    let shift_d = (db - 64).max(0);
    let n = (r.numer() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (r.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    let exp = (shift_n - shift_d) as i32;
    (n / d) * 2f64.powi(exp)
}

/// Exact rational from the shortest decimal rendering of `x`, so `0.01`
/// becomes `1/100` rather than the binary expansion of the float.
pub fn rational_from_f64_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    parse_decimal(&format!("{x}"))
}

/// Exact binary value of a float.
pub fn rational_from_f64_exact(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parses `n/d`, integers, and plain or exponent-form decimals exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n = parse_decimal(n)?;
        let d = parse_decimal(d)?;
        if Zero::is_zero(&d) {
            return None;
        }
        return Some(n / d);
    }
    parse_decimal(text)
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(pos) => (&text[..pos], text[pos + 1..].parse::<i32>().ok()?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|c| c.is_ascii_digit()) || !frac_part.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut value = BigRational::from_integer(numer);
    if scale >= 0 {
        value *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if negative { -value } else { value })
}

/// Canonical text for a probability: `1`, `0`, or `n/d`.
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("1/3"), Some(q(1, 3)));
        assert_eq!(parse_rational("0.25"), Some(q(1, 4)));
        assert_eq!(parse_rational("1"), Some(q(1, 1)));
        assert_eq!(parse_rational(".5"), Some(q(1, 2)));
        assert_eq!(parse_rational("1e-2"), Some(q(1, 100)));
        assert_eq!(parse_rational("2.5E1"), Some(q(25, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
    }

    #[test]
    fn decimal_conversion_is_exact() {
        assert_eq!(rational_from_f64_decimal(0.01), Some(q(1, 100)));
        assert_eq!(rational_from_f64_decimal(1e-6), Some(q(1, 1_000_000)));
    }

    #[test]
    fn huge_rationals_convert_to_float() {
        let big = num_traits::pow(BigInt::from(3), 2000);
        let r = BigRational::new(big.clone() + 1, big * 2);
        assert!((rational_to_f64(&r) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn float_ties_use_tolerance() {
        assert!(!1.0f64.definitely_gt(&(1.0 - 1e-14)));
        assert!(1.0f64.definitely_gt(&0.9));
        assert!(q(1, 2).definitely_gt(&q(499_999, 1_000_000)));
    }
}
