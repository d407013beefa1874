//! Exact-or-float scalars and the rational text format (`"p/q"`).

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number carried either exactly (arbitrary-precision rational) or as `f64`.
///
/// Serialized as a JSON string `"p/q"` when exact and as a JSON number otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

impl Scalar {
    pub fn from_int(v: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => rational_to_f64(q),
            Scalar::Float(x) => *x,
        }
    }

    /// Exact rational value; floats convert to their exact binary value.
    pub fn to_rational(&self) -> Result<BigRational> {
        match self {
            Scalar::Exact(q) => Ok(q.clone()),
            Scalar::Float(x) => float_to_rational(*x),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Float(x) => *x > 0.0,
        }
    }

    /// Compare values, exactly when both sides are exact.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => match (self.to_rational(), other.to_rational()) {
                (Ok(a), Ok(b)) => a.cmp(&b),
                _ => self
                    .to_f64()
                    .partial_cmp(&other.to_f64())
                    .unwrap_or(Ordering::Equal),
            },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => f.write_str(&format_rational(q)),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::Exact(q)
    }
}

impl std::str::FromStr for Scalar {
    type Err = Error;

    /// Strings containing `/` or looking like integers are exact; anything with
    /// a decimal point or exponent is parsed as `f64`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') || t.parse::<i64>().is_ok() || t.parse::<BigInt>().is_ok() {
            parse_rational(t).map(Scalar::Exact)
        } else {
            t.parse::<f64>()
                .map(Scalar::Float)
                .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => serializer.serialize_str(&format_rational(q)),
            Scalar::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a rational string \"p/q\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Float(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Float(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Scalar, E> {
                Ok(Scalar::Float(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Scalar, E> {
                parse_rational(v).map(Scalar::Exact).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}

/// Parse `"p/q"`, an integer, or a finite decimal such as `"0.125"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((num, den)) = t.split_once('/') {
        let p: BigInt = num.trim().parse().map_err(|_| bad())?;
        let q: BigInt = den.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = t.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int_part}{frac_part}");
        let p: BigInt = digits.parse().map_err(|_| bad())?;
        let q = num_traits::pow(BigInt::from(10u32), frac_part.len());
        return Ok(BigRational::new(p, q));
    }
    let p: BigInt = t.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Canonical text form: `"p"` for integers, `"p/q"` otherwise (lowest terms).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn float_to_rational(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

/// Nearest integer with ties rounded to the even neighbour.
pub fn round_half_even(x: &BigRational) -> BigInt {
    let floor = x.floor();
    let diff = x - &floor;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let f = floor.to_integer();
    match diff.cmp(&half) {
        Ordering::Less => f,
        Ordering::Greater => f + 1,
        Ordering::Equal => {
            if (&f % 2u32).is_zero() {
                f
            } else {
                f + 1
            }
        }
    }
}

/// Distance to the nearest integer, `||x||`.
pub fn dist_to_nearest(x: &BigRational) -> BigRational {
    let p = BigRational::from_integer(round_half_even(x));
    (x - p).abs()
}
