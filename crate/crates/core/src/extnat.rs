//! The extended naturals `ω ∪ {ω}`: every natural number plus a top element.
//!
//! This is the carrier on which time warps act. The order is the usual one
//! on naturals with `ω` strictly above everything.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// A natural number or the top element `ω`.
///
/// `Ord` puts `Fin(n) < Omega` for every `n`, matching the intended total
/// order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExtNat {
    Fin(u64),
    Omega,
}

pub use ExtNat::{Fin, Omega};

/// Shorthand for `ExtNat::Fin(0)`.
pub const ZERO: ExtNat = Fin(0);

impl ExtNat {
    pub fn is_omega(self) -> bool {
        matches!(self, Omega)
    }

    pub fn is_zero(self) -> bool {
        self == Fin(0)
    }

    /// Total successor: `p ⊕ 1`, with `ω ⊕ 1 = ω`.
    pub fn succ(self) -> ExtNat {
        match self {
            Fin(n) => Fin(n.checked_add(1).expect("extnat overflow")),
            Omega => Omega,
        }
    }

    /// Total predecessor: `p ⊖ 1`, with `0 ⊖ 1 = 0` and `ω ⊖ 1 = ω`.
    pub fn pred(self) -> ExtNat {
        match self {
            Fin(0) => Fin(0),
            Fin(n) => Fin(n - 1),
            Omega => Omega,
        }
    }

    /// Truncated addition of a natural: `ω + m = ω`.
    pub fn add(self, m: u64) -> ExtNat {
        match self {
            Fin(n) => Fin(n.checked_add(m).expect("extnat overflow")),
            Omega => Omega,
        }
    }

    /// The finite value, if any.
    pub fn fin(self) -> Option<u64> {
        match self {
            Fin(n) => Some(n),
            Omega => None,
        }
    }

    pub fn min(self, other: ExtNat) -> ExtNat {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: ExtNat) -> ExtNat {
        std::cmp::max(self, other)
    }
}

impl From<u64> for ExtNat {
    fn from(n: u64) -> Self {
        Fin(n)
    }
}

impl fmt::Display for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fin(n) => write!(f, "{n}"),
            Omega => write!(f, "ω"),
        }
    }
}

impl fmt::Debug for ExtNat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

// JSON form: a plain number for finite values, the string "omega" for ω.
impl Serialize for ExtNat {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Fin(n) => serializer.serialize_u64(*n),
            Omega => serializer.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtNat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ExtNatVisitor;

        impl Visitor<'_> for ExtNatVisitor {
            type Value = ExtNat;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative integer or the string \"omega\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtNat, E> {
                Ok(Fin(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtNat, E> {
                u64::try_from(v).map(Fin).map_err(|_| E::custom("negative value"))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtNat, E> {
                match v {
                    "omega" | "ω" | "w" => Ok(Omega),
                    _ => Err(E::custom(format!("expected \"omega\", got {v:?}"))),
                }
            }
        }

        deserializer.deserialize_any(ExtNatVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_puts_omega_on_top() {
        assert!(Fin(0) < Fin(1));
        assert!(Fin(u64::MAX) < Omega);
        assert!(Omega <= Omega);
    }

    #[test]
    fn succ_and_pred_are_total() {
        assert_eq!(Fin(3).succ(), Fin(4));
        assert_eq!(Omega.succ(), Omega);
        assert_eq!(Fin(3).pred(), Fin(2));
        assert_eq!(Fin(0).pred(), Fin(0));
        assert_eq!(Omega.pred(), Omega);
    }

    #[test]
    fn json_roundtrip() {
        let v: ExtNat = serde_json::from_str("7").unwrap();
        assert_eq!(v, Fin(7));
        let v: ExtNat = serde_json::from_str("\"omega\"").unwrap();
        assert_eq!(v, Omega);
        assert_eq!(serde_json::to_string(&Omega).unwrap(), "\"omega\"");
        assert_eq!(serde_json::to_string(&Fin(2)).unwrap(), "2");
    }
}
