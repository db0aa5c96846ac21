//! Parsing of real-number tokens into high-precision rationals.
//!
//! Polynomial coefficients and rotation numbers are accepted either as exact
//! rationals (`3/7`, `-1/4`), as decimal literals (`0.25`, `1e-3`), or as one
//! of a few named irrational constants. Irrationals are resolved to a rational
//! approximation carrying 128 fractional bits, which is far below the 2^-64
//! grid used by [`crate::torus::Frac64`], so the single rounding step when a
//! value enters the torus is the only loss of precision.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::str::FromStr;
use thiserror::Error;

/// Number of fractional bits carried by named irrational constants.
pub const CONST_FRAC_BITS: u32 = 128;

/// Error raised when a coefficient token cannot be interpreted.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RealTokenError {
    #[error("empty coefficient token")]
    Empty,
    #[error("unrecognized coefficient token `{0}`")]
    Unrecognized(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

/// First 60 decimals of the fractional part of pi; about 199 bits, i.e. more
/// than enough to survive the 128-bit truncation below.
const PI_FRAC_DIGITS: &str = "141592653589793238462643383279502884197169399375105820974944";

/// Integer square root of a nonnegative `BigInt`.
fn isqrt(n: &BigInt) -> BigInt {
    n.sqrt()
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

/// `sqrt(n)` truncated to [`CONST_FRAC_BITS`] fractional bits.
fn sqrt_rational(n: u64) -> BigRational {
    let scaled = BigInt::from(n) * pow2(2 * CONST_FRAC_BITS);
    BigRational::new(isqrt(&scaled), pow2(CONST_FRAC_BITS))
}

/// The square root of two.
pub fn sqrt2() -> BigRational {
    sqrt_rational(2)
}

/// The golden ratio `(1 + sqrt 5) / 2`.
pub fn phi() -> BigRational {
    let sqrt5 = isqrt(&(BigInt::from(5u32) * pow2(2 * CONST_FRAC_BITS)));
    BigRational::new(sqrt5 + pow2(CONST_FRAC_BITS), pow2(CONST_FRAC_BITS + 1))
}

/// The fractional part of pi, `pi - 3`.
pub fn pi_frac() -> BigRational {
    let digits = BigInt::from_str(PI_FRAC_DIGITS).expect("literal digits");
    let scale = BigInt::from(10u32).pow(PI_FRAC_DIGITS.len() as u32);
    BigRational::new(digits, scale)
}

/// Parses a decimal literal (optionally signed, optionally with a fractional
/// part and/or an `e`/`E` exponent) into an exact rational.
fn parse_decimal(tok: &str) -> Option<BigRational> {
    let (mantissa, exp) = match tok.find(['e', 'E']) {
        Some(pos) => {
            let e: i32 = tok[pos + 1..].parse().ok()?;
            (&tok[..pos], e)
        }
        None => (tok, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.find('.') {
        Some(pos) => (&digits[..pos], &digits[pos + 1..]),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let joined = format!("{int_part}{frac_part}");
    let mut value = BigRational::new(
        BigInt::from(sign) * BigInt::from_str(&joined).ok()?,
        BigInt::from(10u32).pow(frac_part.len() as u32),
    );
    let ten = BigRational::from_integer(BigInt::from(10u32));
    match exp.cmp(&0) {
        std::cmp::Ordering::Greater => value *= ten.pow(exp),
        std::cmp::Ordering::Less => value /= ten.pow(-exp),
        std::cmp::Ordering::Equal => {}
    }
    Some(value)
}

fn parse_fraction(tok: &str) -> Option<Result<BigRational, RealTokenError>> {
    let (num, den) = tok.split_once('/')?;
    let num = BigInt::from_str(num.trim()).ok()?;
    let den = BigInt::from_str(den.trim()).ok()?;
    if den.is_zero() {
        return Some(Err(RealTokenError::ZeroDenominator(tok.to_string())));
    }
    Some(Ok(BigRational::new(num, den)))
}

/// Resolves a coefficient token to an exact rational.
///
/// Accepted forms: `sqrt2`, `phi`, `pi-frac` (each optionally preceded by
/// `-`), rationals `a/b`, and decimal literals such as `2`, `-0.5`, `1e-3`.
pub fn parse_real_token(token: &str) -> Result<BigRational, RealTokenError> {
    let tok = token.trim();
    if tok.is_empty() {
        return Err(RealTokenError::Empty);
    }
    let (negate, body) = match tok.strip_prefix('-') {
        Some(rest) if !rest.is_empty() && !rest.bytes().next().unwrap().is_ascii_digit() => (true, rest),
        _ => (false, tok),
    };
    let value = match body {
        "sqrt2" => sqrt2(),
        "phi" => phi(),
        "pi-frac" => pi_frac(),
        other => {
            if let Some(res) = parse_fraction(other) {
                res?
            } else {
                parse_decimal(other).ok_or_else(|| RealTokenError::Unrecognized(token.to_string()))?
            }
        }
    };
    Ok(if negate { -value } else { value })
}

/// Fractional part of a rational, always in `[0, 1)`.
pub fn frac_part(x: &BigRational) -> BigRational {
    let fl = x.floor();
    x - fl
}

/// Convenience: `|x|` as an `f64`, for diagnostics only.
pub fn to_f64_lossy(x: &BigRational) -> f64 {
    let bits = 128u32;
    let scaled = (x * BigRational::from_integer(pow2(bits).into())).floor();
    let (sign, mag) = (scaled.numer().signum(), scaled.numer().abs());
    let mut acc = 0.0f64;
    for digit in mag.to_u64_digits().1.iter().rev() {
        acc = acc * 1.8446744073709552e19 + *digit as f64;
    }
    let signed = if sign < BigInt::zero() { -acc } else { acc };
    signed / 2f64.powi(bits as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_and_decimal_tokens() {
        assert_eq!(parse_real_token("3/7").unwrap(), BigRational::new(3.into(), 7.into()));
        assert_eq!(parse_real_token("-1/4").unwrap(), BigRational::new((-1).into(), 4.into()));
        assert_eq!(parse_real_token("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_real_token("2").unwrap(), BigRational::from_integer(2.into()));
        assert_eq!(parse_real_token("1e-3").unwrap(), BigRational::new(1.into(), 1000.into()));
        assert_eq!(parse_real_token("2.5e2").unwrap(), BigRational::from_integer(250.into()));
        assert_eq!(parse_real_token(" -3 "), Ok(BigRational::from_integer((-3).into())));
    }

    #[test]
    fn named_constants_square_correctly() {
        // sqrt2^2 differs from 2 by less than 2^-126.
        let s = sqrt2();
        let err = (&s * &s - BigRational::from_integer(2.into())).abs();
        assert!(err < BigRational::new(1.into(), BigInt::one() << 126u32));
        // phi^2 = phi + 1 up to the same precision.
        let p = phi();
        let err = (&p * &p - &p - BigRational::one()).abs();
        assert!(err < BigRational::new(1.into(), BigInt::one() << 126u32));
        // pi-frac lies in (0.1415926535, 0.1415926536).
        let pf = pi_frac();
        assert!(pf > BigRational::new(1415926535.into(), 10000000000u64.into()));
        assert!(pf < BigRational::new(1415926536.into(), 10000000000u64.into()));
    }

    #[test]
    fn negated_constants() {
        assert_eq!(parse_real_token("-sqrt2").unwrap(), -sqrt2());
        assert_eq!(parse_real_token("-pi-frac").unwrap(), -pi_frac());
    }

    #[test]
    fn bad_tokens_are_rejected() {
        assert_eq!(parse_real_token(""), Err(RealTokenError::Empty));
        assert!(matches!(parse_real_token("sqrt3"), Err(RealTokenError::Unrecognized(_))));
        assert!(matches!(parse_real_token("1/0"), Err(RealTokenError::ZeroDenominator(_))));
        assert!(matches!(parse_real_token("1.2.3"), Err(RealTokenError::Unrecognized(_))));
    }

    #[test]
    fn frac_part_in_unit_interval() {
        let x = BigRational::new((-9).into(), 4.into());
        assert_eq!(frac_part(&x), BigRational::new(3.into(), 4.into()));
        assert_eq!(frac_part(&BigRational::from_integer(5.into())), BigRational::zero());
    }
}
