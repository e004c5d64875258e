//! Exact rational scalars and their textual form.
//!
//! Rationals travel through files as `"p/q"` or `"p"` with an optional
//! leading minus and `q > 0`. Everything emitted is gcd-reduced.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// A point of ℚ^d, ordered lexicographically.
pub type Point = Vec<Rational>;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

fn parse_digits(s: &str, whole: &str) -> Result<BigInt> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(Error::Parse(format!("`{whole}` is not a rational")));
    }
    s.parse::<BigInt>()
        .map_err(|e| Error::Parse(format!("`{whole}`: {e}")))
}

/// Parses `"p/q"` or `"p"`, optional leading `-`, strictly positive `q`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (num, den) = match body.split_once('/') {
        Some((n, d)) => (parse_digits(n, s)?, parse_digits(d, s)?),
        None => (parse_digits(body, s)?, BigInt::one()),
    };
    if den.is_zero() {
        return Err(Error::Parse(format!("`{s}` has a zero denominator")));
    }
    let num = if negative { -num } else { num };
    Ok(Rational::new(num, den))
}

/// Canonical text: gcd-reduced, denominator omitted when 1.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn format_point(p: &[Rational]) -> String {
    format!("[{}]", p.iter().map(format_rational).collect::<Vec<_>>().join(", "))
}

/// Lossy conversion for table rendering only.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn is_nonneg(r: &Rational) -> bool {
    !r.is_negative()
}

/// `2^{-n}` as an exact rational.
pub fn pow2_inv(n: u32) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << n)
}

/// Serde adapter that stores a rational as its canonical string.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_rational_vec {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(format_rational))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect()
    }
}
