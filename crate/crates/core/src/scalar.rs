//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All model code is written against [`Real`] so that it can run in `f64`
//! (the default, and the only precision at which the documented tolerances
//! are meaningful) or in `f32` for cheap exploratory sweeps.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the library: `f32` or `f64`.
///
/// Extended reals are encoded in the type itself: `+inf` stands for a
/// divergent integral or an infinite exponential moment.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Panics only for non-representable input,
    /// which cannot happen for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize must be representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("scalar must convert to f64")
    }

    /// Machine epsilon scaled into a usable floor for relative tolerances.
    #[inline]
    fn tol_floor() -> Self {
        Self::epsilon() * Self::lit(16.0)
    }

    #[inline]
    fn is_pos_inf(self) -> bool {
        self.is_infinite() && self > Self::zero()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Clamps a requested tolerance to something the scalar can resolve.
#[inline]
pub fn effective_tol<S: Real>(requested: f64) -> S {
    S::lit(requested).max(S::tol_floor())
}

/// Serde adapter writing extended reals as JSON-friendly values: finite
/// numbers as numbers, infinities as the strings `"inf"` / `"-inf"`.
pub mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<Ser: Serializer>(x: &f64, s: Ser) -> Result<Ser::Ok, Ser::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else if x.is_nan() {
            s.serialize_none()
        } else if *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
        Null(()),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Null(()) => Ok(f64::NAN),
            Repr::Text(t) => match t.as_str() {
                "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
                "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
                other => Err(serde::de::Error::custom(format!("not an extended real: {other}"))),
            },
        }
    }
}
