//! Exact rational scalar helpers shared across the crate.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The exact scalar used everywhere outside float-mode dynamics.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse a canonical `num/den` literal: den > 0 and gcd(num, den) = 1.
/// Non-reduced or negative-denominator forms are rejected so that file
/// schemas stay bit-exact under round-trips.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let (num, den) = s
        .split_once('/')
        .ok_or_else(|| Error::Rational(s.to_string()))?;
    let num: BigInt = num.parse().map_err(|_| Error::Rational(s.to_string()))?;
    let den: BigInt = den.parse().map_err(|_| Error::Rational(s.to_string()))?;
    if den.sign() != Sign::Plus {
        return Err(Error::Rational(s.to_string()));
    }
    if num.gcd(&den) != BigInt::one() {
        return Err(Error::Rational(s.to_string()));
    }
    Ok(Rat::new(num, den))
}

/// Canonical `num/den` rendering; inverse of [`parse_rat`].
pub fn rat_to_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Enormous numerator/denominator: fall back to a scaled division.
        let bits = r.numer().bits().max(r.denom().bits()) as i64;
        let shift = (bits - 500).max(0) as u64;
        let n = r.numer() >> shift;
        let d = r.denom() >> shift;
        n.to_f64().unwrap_or(f64::NAN) / d.to_f64().unwrap_or(f64::NAN)
    })
}

/// Floor of the integer square root. `n` must be nonnegative.
pub fn isqrt_floor(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative integer");
    n.sqrt()
}

pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = isqrt_floor(n);
    (&r * &r == *n).then_some(r)
}

/// Rational approximation of sqrt(r) with error below 2^-bits.
/// Exact when r is a perfect square of a rational. Requires r >= 0.
pub fn rat_sqrt_approx(r: &Rat, bits: u64) -> Rat {
    assert!(!r.is_negative(), "sqrt of negative rational");
    if r.is_zero() {
        return Rat::zero();
    }
    // sqrt(n/d) = sqrt(n*d)/d; scale by 4^bits so the integer root carries
    // `bits` extra binary digits.
    let nd = r.numer() * r.denom();
    let scaled = &nd << (2 * bits);
    let root = isqrt_floor(&scaled);
    Rat::new(root, r.denom() << bits)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rejects_unreduced_and_negative_denominator() {
        assert!(parse_rat("2/4").is_err());
        assert!(parse_rat("1/-2").is_err());
        assert!(parse_rat("1/0").is_err());
        assert!(parse_rat("x/2").is_err());
        assert_eq!(parse_rat("-3/7").unwrap(), rat(-3, 7));
        assert_eq!(parse_rat("0/1").unwrap(), Rat::zero());
    }

    #[test]
    fn round_trip_is_identity() {
        for r in [rat(0, 1), rat(-5, 3), rat(10006, 10007)] {
            assert_eq!(parse_rat(&rat_to_string(&r)).unwrap(), r);
        }
    }

    #[test]
    fn sqrt_approx_tightness() {
        let v = rat(2, 1);
        let s = rat_sqrt_approx(&v, 80);
        let err = (&s * &s - v).abs();
        // |s^2 - 2| = |s - sqrt2| * |s + sqrt2| <= 2^-80 * 4
        assert!(err < rat(1, 1 << 30) * rat(1, 1 << 30));
        assert_eq!(rat_sqrt_approx(&rat(9, 4), 16), rat(3, 2));
    }
}
