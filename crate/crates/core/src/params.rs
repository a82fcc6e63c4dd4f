//! Named real parameters with JSON support for extended reals.
//!
//! Values serialize as JSON numbers; infinities use the strings `"inf"` and
//! `"-inf"`.

use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Extended real number with `"inf"`/`"-inf"` JSON encoding.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtReal(pub f64);

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else if self.0 == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

struct ExtRealVisitor;

impl<'de> Visitor<'de> for ExtRealVisitor {
    type Value = ExtReal;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or one of \"inf\", \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal(v))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
        Ok(ExtReal(v as f64))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
        match v {
            "inf" | "+inf" | "Infinity" => Ok(ExtReal(f64::INFINITY)),
            "-inf" | "-Infinity" => Ok(ExtReal(f64::NEG_INFINITY)),
            _ => Err(E::custom(format!("unrecognized extended real `{v}`"))),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        d.deserialize_any(ExtRealVisitor)
    }
}

/// Parameter map keyed by name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Params(pub BTreeMap<String, ExtReal>);

impl Params {
    /// Empty map.
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder-style insertion.
    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), ExtReal(value));
        self
    }

    /// Value of `name`, if present.
    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).map(|v| v.0)
    }

    /// Required value of `name`.
    pub fn require(&self, family: &str, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::params(family, format!("missing parameter `{name}`")))
    }

    /// Value of `name` or a default.
    pub fn get_or(&self, name: &str, default: f64) -> f64 {
        self.get(name).unwrap_or(default)
    }

    /// Required integer-valued parameter (infinite values allowed).
    pub fn require_int(&self, family: &str, name: &str) -> Result<f64> {
        let v = self.require(family, name)?;
        if v.is_finite() && v.fract() != 0.0 {
            return Err(Error::params(family, format!("`{name}` must be an integer")));
        }
        Ok(v)
    }
}
