//! Extended nonnegative reals `[0, ∞]`.
//!
//! Every modular takes its values here. Infinity is a distinct variant rather
//! than `f64::INFINITY` or a large sentinel so that absorption is exact:
//! `∞ + a = ∞` and `c·∞ = ∞` for every finite `c > 0`. Comparisons between
//! finite values are exact float comparisons; tolerances are applied by the
//! callers that check inequalities.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ExtRealError {
    #[error("extended real must be nonnegative, got {0}")]
    Negative(f64),
    #[error("extended real cannot be NaN")]
    NotANumber,
    #[error("scale factor must be finite and strictly positive, got {0}")]
    BadScale(f64),
}

#[derive(Clone, Copy, PartialEq, Debug)]
enum Repr {
    Finite(f64),
    Infinity,
}

/// A value in `[0, ∞]`.
///
/// Construction rejects negative numbers and NaN, so the type carries a total
/// order and implements [`Ord`]. `-0.0` is normalised to `0.0`.
#[derive(Clone, Copy, PartialEq)]
pub struct ExtReal(Repr);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(Repr::Finite(0.0));
    pub const INFINITY: ExtReal = ExtReal(Repr::Infinity);

    /// Builds a value from an `f64`. `f64::INFINITY` maps to [`ExtReal::INFINITY`].
    pub fn new(value: f64) -> Result<Self, ExtRealError> {
        if value.is_nan() {
            return Err(ExtRealError::NotANumber);
        }
        if value < 0.0 {
            return Err(ExtRealError::Negative(value));
        }
        if value == f64::INFINITY {
            return Ok(Self::INFINITY);
        }
        // +0.0 here also absorbs -0.0
        Ok(ExtReal(Repr::Finite(value + 0.0)))
    }

    /// Like [`ExtReal::new`] but panics on invalid input. For literals and
    /// values that are nonnegative by construction.
    #[track_caller]
    pub fn of(value: f64) -> Self {
        match Self::new(value) {
            Ok(v) => v,
            Err(e) => panic!("{e}"),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self.0, Repr::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        !self.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == Repr::Finite(0.0)
    }

    /// The finite value, or `None` for infinity.
    pub fn finite(self) -> Option<f64> {
        match self.0 {
            Repr::Finite(v) => Some(v),
            Repr::Infinity => None,
        }
    }

    /// Lossy view as `f64`, with infinity mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    /// Sum in `[0, ∞]`. A finite sum that overflows `f64` becomes infinity.
    pub fn add(self, other: ExtReal) -> ExtReal {
        match (self.0, other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtReal::of(a + b),
            _ => ExtReal::INFINITY,
        }
    }

    /// `c · self` for a finite `c > 0`. `0 · ∞` is left undefined, so a zero
    /// factor is rejected.
    pub fn scale(self, c: f64) -> Result<ExtReal, ExtRealError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ExtRealError::BadScale(c));
        }
        Ok(match self.0 {
            Repr::Finite(a) => ExtReal::of(a * c),
            Repr::Infinity => ExtReal::INFINITY,
        })
    }

    pub fn leq(self, other: ExtReal) -> bool {
        self <= other
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0, other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => a.partial_cmp(&b).expect("NaN excluded"),
            (Repr::Finite(_), Repr::Infinity) => Ordering::Less,
            (Repr::Infinity, Repr::Finite(_)) => Ordering::Greater,
            (Repr::Infinity, Repr::Infinity) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        ExtReal::add(self, rhs)
    }
}

impl Default for ExtReal {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Repr::Finite(v) => write!(f, "{v}"),
            Repr::Infinity => f.write_str("inf"),
        }
    }
}

impl TryFrom<f64> for ExtReal {
    type Error = ExtRealError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Self::new(value)
    }
}

// Finite values serialize as JSON numbers (shortest round-trip form, so the
// bits survive a round trip); infinity as the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            Repr::Finite(v) => serializer.serialize_f64(v),
            Repr::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtRealVisitor;

        impl Visitor<'_> for ExtRealVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<ExtReal, E> {
                ExtReal::new(v).map_err(E::custom)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtReal, E> {
                Ok(ExtReal::of(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtReal, E> {
                ExtReal::new(v as f64).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtReal, E> {
                match v {
                    "inf" => Ok(ExtReal::INFINITY),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        deserializer.deserialize_any(ExtRealVisitor)
    }
}

/// Serde helper for plain `f64` fields that may be non-finite
/// (`"inf"`, `"-inf"`, `"nan"`); JSON has no literal for those.
pub mod signed_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, serializer: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            serializer.serialize_f64(*v)
        } else if v.is_nan() {
            serializer.serialize_str("nan")
        } else if *v > 0.0 {
            serializer.serialize_str("inf")
        } else {
            serializer.serialize_str("-inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(v) => Ok(v),
            Raw::Str(s) => match s.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("bad float literal {s:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(v: f64) -> ExtReal {
        ExtReal::of(v)
    }

    #[test]
    fn add_examples() {
        assert_eq!(e(2.0) + e(3.0), e(5.0));
        assert_eq!(ExtReal::INFINITY + e(5.0), ExtReal::INFINITY);
        assert_eq!(e(0.0) + ExtReal::INFINITY, ExtReal::INFINITY);
    }

    #[test]
    fn add_overflow_is_infinite() {
        assert_eq!(e(f64::MAX) + e(f64::MAX), ExtReal::INFINITY);
    }

    #[test]
    fn scale_examples() {
        assert_eq!(e(3.0).scale(2.0).unwrap(), e(6.0));
        assert_eq!(ExtReal::INFINITY.scale(0.5).unwrap(), ExtReal::INFINITY);
        assert_eq!(e(0.0).scale(0.1).unwrap(), e(0.0));
    }

    #[test]
    fn scale_rejects_bad_factors() {
        for c in [0.0, -1.0, f64::INFINITY, f64::NAN] {
            assert!(ExtReal::INFINITY.scale(c).is_err(), "{c}");
            assert!(e(1.0).scale(c).is_err(), "{c}");
        }
    }

    #[test]
    fn leq_examples() {
        assert!(e(3.0).leq(ExtReal::INFINITY));
        assert!(ExtReal::INFINITY.leq(ExtReal::INFINITY));
        assert!(!e(5.0).leq(e(2.0)));
    }

    #[test]
    fn construction_rejects_negative_and_nan() {
        assert_eq!(ExtReal::new(-1.0), Err(ExtRealError::Negative(-1.0)));
        assert_eq!(ExtReal::new(f64::NAN), Err(ExtRealError::NotANumber));
        assert!(ExtReal::new(f64::NEG_INFINITY).is_err());
        assert_eq!(ExtReal::new(f64::INFINITY), Ok(ExtReal::INFINITY));
        assert_eq!(ExtReal::new(-0.0).unwrap().to_f64().to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn json_forms() {
        assert_eq!(serde_json::to_string(&ExtReal::INFINITY).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&e(2.5)).unwrap(), "2.5");
        let back: ExtReal = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(back, ExtReal::INFINITY);
        let back: ExtReal = serde_json::from_str("7").unwrap();
        assert_eq!(back, e(7.0));
        assert!(serde_json::from_str::<ExtReal>("-1").is_err());
        assert!(serde_json::from_str::<ExtReal>("\"infinity\"").is_err());
    }
}
