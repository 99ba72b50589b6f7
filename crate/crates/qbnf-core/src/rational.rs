//! Exact rational scalars.
//!
//! All symbolic coefficients in this crate are arbitrary-precision rationals.
//! `num_rational::BigRational` already maintains the invariants we need
//! (positive denominator, fully reduced after every operation), so this
//! module only adds construction helpers, the canonical `"p/q"` string
//! format used by every serialized artifact, and exact square roots.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use std::str::FromStr;
use thiserror::Error;

pub type Rat = num_rational::BigRational;

/// `num/den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Integer as an exact rational.
pub fn rint(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid rational literal {0:?}")]
pub struct RatParseError(pub String);

/// Parse a canonical rational string: `"p"` or `"p/q"`, decimal-free.
pub fn parse_rat(s: &str) -> Result<Rat, RatParseError> {
    let t = s.trim();
    if t.is_empty() || t.contains('.') {
        return Err(RatParseError(s.to_string()));
    }
    Rat::from_str(t).map_err(|_| RatParseError(s.to_string()))
}

/// Canonical string form: `"p"` when the denominator is 1, else `"p/q"`
/// with `q > 0` and the sign on the numerator.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// Nearest f64 (numerator/denominator division, correctly rounded by
/// `BigRational::to_f64`).
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().expect("rational out of f64 range")
}

/// Exact square root of a non-negative rational, if it is a perfect square.
pub fn sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().sqrt();
    let den = r.denom().sqrt();
    if &(&num * &num) == r.numer() && &(&den * &den) == r.denom() {
        Some(Rat::new(num, den))
    } else {
        None
    }
}

/// Rational lower bound for `sqrt(r)`: `isqrt(p*q)/q` for `r = p/q >= 0`.
/// The true root lies in `[bound, bound + 1/q]`.
pub fn sqrt_floor(r: &Rat) -> Rat {
    assert!(!r.is_negative(), "sqrt_floor of a negative rational");
    if r.is_zero() {
        return Rat::zero();
    }
    let pq: BigInt = r.numer() * r.denom();
    Rat::new(pq.sqrt(), r.denom().clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_roundtrip() {
        for s in ["-15/4", "0", "7", "1/3", "-2"] {
            let r = parse_rat(s).unwrap();
            assert_eq!(format_rat(&r), s);
        }
        // non-canonical inputs normalize
        assert_eq!(format_rat(&parse_rat("6/4").unwrap()), "3/2");
        assert_eq!(format_rat(&parse_rat("5/-10").unwrap()), "-1/2");
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("").is_err());
    }

    #[test]
    fn reduction_invariant_after_arithmetic() {
        let a = rat(3, 4) + rat(1, 4);
        assert_eq!(a, rint(1));
        assert_eq!(a.denom(), &BigInt::from(1));
        let b = rat(1, 6) * rat(3, 5);
        assert_eq!(b, rat(1, 10));
        assert!(b.denom().is_positive());
    }

    #[test]
    fn exact_sqrt() {
        assert_eq!(sqrt_exact(&rat(9, 4)), Some(rat(3, 2)));
        assert_eq!(sqrt_exact(&rint(0)), Some(rint(0)));
        assert_eq!(sqrt_exact(&rat(2, 1)), None);
        assert_eq!(sqrt_exact(&rat(-1, 4)), None);
        let lo = sqrt_floor(&rat(2, 1));
        assert!(&lo * &lo <= rat(2, 1));
        let hi = &lo + rat(1, 1); // denominator of 2/1 is 1
        assert!(&hi * &hi > rat(2, 1));
    }
}
