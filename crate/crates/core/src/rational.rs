//! Exact rational numbers and their textual form.
//!
//! Rationals are written as `"num/den"` with the denominator omitted when it
//! is one (`"-3"`, `"25/4"`). Parsing accepts the same grammar and always
//! returns the canonical reduced value, so a format/parse round trip is exact.

use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_prime::nt_funcs;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Arbitrary precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {input:?} as a rational")]
pub struct ParseRationalError {
    pub input: String,
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn parse(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError {
        input: text.to_string(),
    };
    let t = text.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

pub fn format(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Sign-carrying squarefree representative of the class of `q` in
/// `Q^* / (Q^*)^2`. Since `a/b = ab / b^2`, this is the squarefree part of
/// `a*b`. Returns `None` for zero.
pub fn squarefree_class(q: &Rational) -> Option<BigInt> {
    if q.is_zero() {
        return None;
    }
    let prod = q.numer() * q.denom();
    let sign = prod.sign();
    let core = squarefree_part(&prod.abs());
    Some(if sign == Sign::Minus { -core } else { core })
}

const TRIAL_BOUND: u64 = 1 << 14;

/// Squarefree kernel of a positive integer. Small primes are removed by
/// trial division; the cofactor is settled by size, primality and
/// perfect-square tests where possible, and factored otherwise.
fn squarefree_part(n: &BigInt) -> BigInt {
    let mut rest = n.magnitude().clone();
    let mut core = BigUint::one();
    for p in nt_funcs::primes(TRIAL_BOUND) {
        if rest.is_one() {
            break;
        }
        let mut exp = 0u32;
        while (&rest % p).is_zero() {
            rest /= p;
            exp += 1;
        }
        if exp % 2 == 1 {
            core *= p;
        }
    }
    if !rest.is_one() {
        // no prime factor below the bound remains
        let b = BigUint::from(TRIAL_BOUND);
        let root = rest.sqrt();
        if &root * &root == rest {
            // rest = r^2 leaves the class unchanged
        } else if rest < &b * &b * &b || nt_funcs::is_prime(&rest, None).probably() {
            core *= rest;
        } else {
            for (p, exp) in nt_funcs::factorize(rest) {
                if exp % 2 == 1 {
                    core *= p;
                }
            }
        }
    }
    BigInt::from(core)
}

/// Serializes a rational as its canonical string.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalString(pub Rational);

impl fmt::Debug for RationalString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format(&self.0))
    }
}

impl Serialize for RationalString {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(&self.0))
    }
}

impl<'de> Deserialize<'de> for RationalString {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map(RationalString).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "rational::serde_str")]` helper for plain `Rational` fields.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse(&text).map_err(serde::de::Error::custom)
    }
}
