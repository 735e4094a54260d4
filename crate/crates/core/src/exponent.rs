use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Exponent `q ∈ (0, ∞]` of an `L_q` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 {
            Ok(Exponent::Finite(q))
        } else {
            Err(invalid(format!("exponent must be positive, got {q}")))
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `q` as a float (`f64::INFINITY` for ∞).
    pub fn value(self) -> f64 {
        match self {
            Exponent::Finite(q) => q,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    pub fn as_integer(self) -> Option<u32> {
        match self {
            Exponent::Finite(q) if q.fract() == 0.0 && q <= 64.0 => Some(q as u32),
            _ => None,
        }
    }

    pub(crate) fn finite_value(self, what: &str) -> Result<f64> {
        match self {
            Exponent::Finite(q) => Ok(q),
            Exponent::Infinity => Err(invalid(format!("{what} needs a finite exponent"))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(q) => write!(f, "{q}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "∞" => Ok(Exponent::Infinity),
            t => Exponent::finite(t.parse::<f64>().map_err(|_| invalid(format!("bad exponent {t:?}")))?),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(q) => crate::report::float(q, s),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}
