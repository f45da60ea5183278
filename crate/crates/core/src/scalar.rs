//! Exact rational scalars and the small amount of numeric glue around them.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational; every criterion comparison is made on these.
pub type ExactScalar = BigRational;

pub fn int(v: i64) -> ExactScalar {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> ExactScalar {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3/7"`, `"-2"` or a plain decimal such as `"0.125"` / `"-1.5e-3"`.
pub fn parse_rational(text: &str) -> Result<ExactScalar> {
    let s = text.trim();
    let bad = || Error::Parse(format!("not a rational number: {text:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{whole}{frac}0").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32 - 1;
    let mut value = BigRational::from_integer(all) * pow10(scale);
    if neg {
        value = -value;
    }
    Ok(value)
}

pub fn pow10(exp: i32) -> ExactScalar {
    let p = BigInt::from(10u32).pow(exp.unsigned_abs());
    if exp >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Integer power with a possibly negative exponent.
pub fn powi(base: &ExactScalar, exp: i64) -> ExactScalar {
    let e = exp.unsigned_abs() as u32;
    let p = BigRational::new(base.numer().pow(e), base.denom().pow(e));
    if exp >= 0 {
        p
    } else {
        p.recip()
    }
}

/// Nearest integer, ties to even.
pub fn round_half_even(x: &ExactScalar) -> BigInt {
    let floor = x.floor().to_integer();
    let frac = x - BigRational::from_integer(floor.clone());
    let half = ratio(1, 2);
    match frac.cmp(&half) {
        Ordering::Less => floor,
        Ordering::Greater => floor + 1,
        Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + 1
            }
        }
    }
}

/// True when `x` is exactly halfway between two integers.
pub fn is_half_tie(x: &ExactScalar) -> bool {
    let two = BigInt::from(2);
    x.denom() == &two
}

/// Compares `x` with `base^exponent` exactly, for `x >= 0`, `base > 0` and a
/// rational exponent `a/d`: the comparison is carried out on `x^d` and
/// `base^a`, both exact.
pub fn cmp_with_power(x: &ExactScalar, base: &ExactScalar, exponent: &ExactScalar) -> Ordering {
    debug_assert!(!x.is_negative() && base.is_positive());
    if x.is_zero() {
        return Ordering::Less;
    }
    let d = exponent.denom().to_u32().expect("exponent denominator too large");
    let a = exponent.numer().to_i64().expect("exponent numerator too large");
    let lhs = powi(x, d as i64);
    let rhs = powi(base, a);
    lhs.cmp(&rhs)
}

/// `x <= base^(-v)`: the basic witness test behind every approximation
/// inequality.
pub fn le_neg_power(x: &ExactScalar, base: &ExactScalar, v: &ExactScalar) -> bool {
    cmp_with_power(x, base, &-v.clone()) != Ordering::Greater
}

pub fn abs(x: &ExactScalar) -> ExactScalar {
    x.abs()
}

/// Natural log of a positive big integer, to roughly f64 accuracy.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    ln_biguint(n.magnitude())
}

/// Natural log of `|x|`; `-inf` for zero.
pub fn ln_abs(x: &ExactScalar) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

pub fn to_f64(x: &ExactScalar) -> f64 {
    if let Some(v) = x.to_f64() {
        if v.is_finite() && (v != 0.0 || x.is_zero()) {
            return v;
        }
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln_abs(x).exp()
}

/// Renders as `num/den` (or just `num` for integers).
pub fn fmt_exact(x: &ExactScalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn sup_abs<'a>(xs: impl IntoIterator<Item = &'a ExactScalar>) -> ExactScalar {
    xs.into_iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(ExactScalar::zero)
}

pub fn is_positive_integer(x: &BigInt) -> bool {
    x.sign() == Sign::Plus
}

/// Exact rational approximation of `f` (finite) as a dyadic number.
pub fn from_f64(f: f64) -> Option<ExactScalar> {
    BigRational::from_float(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/7").unwrap(), ratio(3, 7));
        assert_eq!(parse_rational("-2").unwrap(), int(-2));
        assert_eq!(parse_rational("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), ratio(-3, 2000));
        assert_eq!(parse_rational("2.5E2").unwrap(), int(250));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(&ratio(1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&ratio(3, 2)), BigInt::from(2));
        assert_eq!(round_half_even(&ratio(-1, 2)), BigInt::from(0));
        assert_eq!(round_half_even(&ratio(-3, 2)), BigInt::from(-2));
        assert_eq!(round_half_even(&ratio(7, 3)), BigInt::from(2));
        assert_eq!(round_half_even(&ratio(-7, 3)), BigInt::from(-2));
    }

    #[test]
    fn power_comparisons() {
        // 1/8 <= 4^(-3/2) = 1/8
        assert!(le_neg_power(&ratio(1, 8), &int(4), &ratio(3, 2)));
        assert!(!le_neg_power(&ratio(1, 7), &int(4), &ratio(3, 2)));
        assert_eq!(cmp_with_power(&int(9), &int(3), &int(2)), Ordering::Equal);
        assert_eq!(cmp_with_power(&int(0), &int(3), &int(2)), Ordering::Less);
    }

    #[test]
    fn logs_of_huge_numbers() {
        let big = BigInt::from(10u32).pow(300);
        assert!((ln_bigint(&big) - 300.0 * 10f64.ln()).abs() < 1e-9);
        let tiny = BigRational::new(BigInt::one(), big);
        assert!((to_f64(&tiny) - 1e-300).abs() < 1e-310);
    }
}
