//! JSON helpers: floats carry 17 significant digits, exact rationals travel as `"p/q"` strings.

use num_rational::BigRational;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::exact::{ratio_string, Dyadic};

/// Renders a float with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        "0.0000000000000000e0".to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn float<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_str(&x.to_string());
    }
    let raw = RawValue::from_string(format_float(*x)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub fn opt_float<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => float(v, s),
        None => s.serialize_none(),
    }
}

pub fn floats<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    struct F(f64);
    impl Serialize for F {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            float(&self.0, s)
        }
    }
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for &x in xs {
        seq.serialize_element(&F(x))?;
    }
    seq.end()
}

/// An exact rational with its float rendering.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactNumber {
    pub exact: String,
    #[serde(serialize_with = "float")]
    pub approx: f64,
}

impl From<&Dyadic> for ExactNumber {
    fn from(d: &Dyadic) -> Self {
        ExactNumber { exact: d.to_string(), approx: d.to_f64() }
    }
}

impl From<&BigRational> for ExactNumber {
    fn from(r: &BigRational) -> Self {
        use num_traits::ToPrimitive;
        ExactNumber { exact: ratio_string(r), approx: r.to_f64().unwrap_or(f64::NAN) }
    }
}

/// `value^power` known exactly.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactPower {
    pub power: u32,
    pub value: ExactNumber,
    #[serde(skip)]
    pub ratio: BigRational,
}

impl ExactPower {
    pub fn new(power: u32, ratio: BigRational) -> Self {
        ExactPower { power, value: ExactNumber::from(&ratio), ratio }
    }
}
