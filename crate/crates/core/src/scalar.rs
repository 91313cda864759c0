//! Exact rational scalars.
//!
//! All coefficients in the library are arbitrary precision rationals. They are
//! serialized as decimal strings (`"3"`, `"-1/2"`) so reports stay exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn zero() -> Scalar {
    Scalar::zero()
}

pub fn one() -> Scalar {
    Scalar::one()
}

/// Parses `"3"`, `"-2"`, `"1/2"` or `"-7/3"`. Whitespace around the value is ignored.
pub fn parse(s: &str) -> Option<Scalar> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let v: BigRational = s.parse().ok()?;
    Some(v)
}

pub fn format(s: &Scalar) -> String {
    s.to_string()
}

pub fn is_negative(s: &Scalar) -> bool {
    s.is_negative()
}

/// Serde adapter storing a scalar as its string form.
pub mod serde_str {
    use super::Scalar;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse(&raw).ok_or_else(|| serde::de::Error::custom(format!("invalid rational `{raw}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for s in ["0", "3", "-2", "1/2", "-7/3"] {
            assert_eq!(format(&parse(s).unwrap()), s);
        }
        assert_eq!(format(&parse("4/2").unwrap()), "2");
        assert!(parse("x").is_none());
        assert!(parse("").is_none());
    }
}
