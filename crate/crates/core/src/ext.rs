//! Nonnegative extended reals `[0, +∞]`.
//!
//! Laplace-transform values and critical exponents live on this half-line.
//! Infinity is an explicit variant, never a large float, so that absorbing
//! arithmetic and JSON round-trips stay exact.

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Mul};

/// A value in `[0, +∞]`.
///
/// Arithmetic is absorbing: any operation touching `Infinity` yields
/// `Infinity`, with the measure-theoretic exception `0 · ∞ = 0`. Finite
/// results that overflow `f64` saturate to `Infinity`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    /// Wraps a nonnegative float, mapping `f64::INFINITY` to the explicit
    /// infinite state.
    ///
    /// Panics on NaN or negative input; callers only produce values of
    /// expectations of positive quantities.
    pub fn new(x: f64) -> Self {
        assert!(!x.is_nan(), "ExtReal cannot hold NaN");
        assert!(x >= 0.0, "ExtReal cannot hold negative value {x}");
        if x.is_infinite() {
            ExtReal::Infinity
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn finite(x: f64) -> Self {
        let e = Self::new(x);
        debug_assert!(e.is_finite(), "finite() called with infinite value");
        e
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtReal::Infinity)
    }

    /// The finite value, if any.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(*x),
            ExtReal::Infinity => None,
        }
    }

    /// The finite value, panicking with `msg` on infinity.
    pub fn expect_finite(&self, msg: &str) -> f64 {
        match self {
            ExtReal::Finite(x) => *x,
            ExtReal::Infinity => panic!("{msg}: value is infinite"),
        }
    }

    /// Collapses to `f64`, mapping `Infinity` to `f64::INFINITY`. Useful at
    /// reporting boundaries only.
    pub fn to_f64_lossy(&self) -> f64 {
        match self {
            ExtReal::Finite(x) => *x,
            ExtReal::Infinity => f64::INFINITY,
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// Scales by a nonnegative finite factor, with `0 · ∞ = 0`.
    pub fn scale(self, c: f64) -> ExtReal {
        assert!(c.is_finite() && c >= 0.0, "scale factor must be finite and nonnegative");
        if c == 0.0 {
            return ExtReal::Finite(0.0);
        }
        match self {
            ExtReal::Finite(x) => ExtReal::new(c * x),
            ExtReal::Infinity => ExtReal::Infinity,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::new(a + b),
            _ => ExtReal::Infinity,
        }
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::new(a * b),
            (ExtReal::Finite(0.0), ExtReal::Infinity) | (ExtReal::Infinity, ExtReal::Finite(0.0)) => {
                ExtReal::Finite(0.0)
            }
            _ => ExtReal::Infinity,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::Infinity) => Some(Ordering::Less),
            (ExtReal::Infinity, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Infinity, ExtReal::Infinity) => Some(Ordering::Equal),
        }
    }
}

impl PartialEq<f64> for ExtReal {
    fn eq(&self, other: &f64) -> bool {
        matches!(self, ExtReal::Finite(x) if x == other)
    }
}

impl PartialOrd<f64> for ExtReal {
    fn partial_cmp(&self, other: &f64) -> Option<std::cmp::Ordering> {
        match self {
            ExtReal::Finite(x) => x.partial_cmp(other),
            ExtReal::Infinity => Some(std::cmp::Ordering::Greater),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::Infinity => write!(f, "inf"),
        }
    }
}

// JSON encoding: a finite value is a plain number, infinity is the string "inf".
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtVisitor;
        impl<'de> Visitor<'de> for ExtVisitor {
            type Value = ExtReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, x: f64) -> Result<ExtReal, E> {
                if x.is_nan() || x < 0.0 {
                    return Err(E::custom(format!("extended real must be in [0, inf], got {x}")));
                }
                Ok(ExtReal::new(x))
            }
            fn visit_u64<E: de::Error>(self, x: u64) -> Result<ExtReal, E> {
                self.visit_f64(x as f64)
            }
            fn visit_i64<E: de::Error>(self, x: i64) -> Result<ExtReal, E> {
                self.visit_f64(x as f64)
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<ExtReal, E> {
                if s == "inf" {
                    Ok(ExtReal::Infinity)
                } else {
                    Err(E::custom(format!("expected \"inf\", got {s:?}")))
                }
            }
        }
        deserializer.deserialize_any(ExtVisitor)
    }
}
