//! JSON encodings for extended reals.
//!
//! Finite values are plain numbers. Infinities are written as the strings
//! `"inf"` / `"-inf"`, except where a field documents `null` for `+∞`.
//! Readers accept every form.

use serde::de::{self, Deserializer, Visitor};
use serde::Serializer;
use std::fmt;

struct ExtVisitor;

impl<'de> Visitor<'de> for ExtVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number, null, \"inf\" or \"-inf\"")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_unit<E: de::Error>(self) -> Result<f64, E> {
        Ok(f64::INFINITY)
    }

    fn visit_none<E: de::Error>(self) -> Result<f64, E> {
        Ok(f64::INFINITY)
    }

    fn visit_some<D: Deserializer<'de>>(self, d: D) -> Result<f64, D::Error> {
        d.deserialize_any(ExtVisitor)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse_ext(v).ok_or_else(|| E::invalid_value(de::Unexpected::Str(v), &self))
    }
}

pub(crate) fn parse_ext(v: &str) -> Option<f64> {
    match v.trim() {
        "inf" | "+inf" | "infinity" | "+infinity" | "∞" => Some(f64::INFINITY),
        "-inf" | "-infinity" | "-∞" => Some(f64::NEG_INFINITY),
        s => s.parse::<f64>().ok(),
    }
}

pub(crate) fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    d.deserialize_any(ExtVisitor)
}

/// `±∞` as `"inf"` / `"-inf"`, NaN as `null`.
pub(crate) fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

/// `+∞` written as `null`.
pub(crate) mod inf_null {
    use serde::Serializer;

    pub(crate) fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_none()
        } else {
            super::serialize(v, s)
        }
    }
}

/// `None` as `null`.
pub(crate) mod opt {
    use serde::Serializer;

    pub(crate) fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => super::serialize(x, s),
            None => s.serialize_none(),
        }
    }
}
