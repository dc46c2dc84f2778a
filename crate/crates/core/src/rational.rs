//! Exact rational helpers: parsing from text and JSON, conversion to `f64`.

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal `{0}`")]
pub struct RationalParseError(pub String);

/// Parses `"-3/2"`, `"0.125"`, `"1e-3"`, `"7"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<BigRational, RationalParseError> {
    let err = || RationalParseError(text.to_string());
    let t = text.trim();
    if t.is_empty() {
        return Err(err());
    }
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_decimal(num.trim()).ok_or_else(err)?;
        let d = parse_decimal(den.trim()).ok_or_else(err)?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(n / d);
    }
    parse_decimal(t).ok_or_else(err)
}

/// Exact value of a decimal literal with optional sign, fraction and exponent.
pub fn parse_decimal(t: &str) -> Option<BigRational> {
    let (neg, body) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i64>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).ok()?);
    let shift = exponent - frac_part.len() as i64;
    let ten = BigRational::from_integer(BigInt::from(10));
    if shift >= 0 {
        value *= Pow::pow(&ten, shift.unsigned_abs());
    } else {
        value /= Pow::pow(&ten, shift.unsigned_abs());
    }
    Some(if neg { -value } else { value })
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Canonical text form: `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Serde adapter: accepts a JSON string (`"-3/2"`) or number (`0.5`),
/// serializes as a string.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigRational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }

    pub(crate) struct RationalVisitor;

    impl Visitor<'_> for RationalVisitor {
        type Value = BigRational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a rational number as string or JSON number")
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<BigRational, E> {
            parse_rational(v).map_err(E::custom)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> Result<BigRational, E> {
            if !v.is_finite() {
                return Err(E::custom("non-finite coefficient"));
            }
            // Shortest round-trip decimal, so 0.1 means 1/10.
            parse_rational(&format!("{v:e}")).map_err(E::custom)
        }
    }
}

/// Same as [`serde_rational`] for a list.
pub mod serde_rational_vec {
    use super::*;
    use serde::de::SeqAccess;
    use serde::ser::SerializeSeq;

    pub fn serialize<S: Serializer>(qs: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(qs.len()))?;
        for q in qs {
            seq.serialize_element(&format_rational(q))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigRational>, D::Error> {
        struct Elem(BigRational);
        impl<'de> serde::Deserialize<'de> for Elem {
            fn deserialize<D2: Deserializer<'de>>(d: D2) -> Result<Self, D2::Error> {
                d.deserialize_any(serde_rational::RationalVisitor).map(Elem)
            }
        }
        struct SeqVisitor;
        impl<'de> Visitor<'de> for SeqVisitor {
            type Value = Vec<BigRational>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a list of rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some(Elem(q)) = seq.next_element()? {
                    out.push(q);
                }
                Ok(out)
            }
        }
        d.deserialize_seq(SeqVisitor)
    }
}
