//! Scalar abstraction shared by scorers, spectral numerics and metrics.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point type usable for scores and Laplacian numerics: `f32` or `f64`.
pub trait Scalar:
    Float
    + RealField
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Lossless for counts below 2^24 (`f32`) or 2^53 (`f64`).
    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable as float")
    }

    fn from_f64_lossy(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 representable")
    }

    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Total order on scores with NaN sorted lowest, so selection never panics.
pub fn score_cmp<T: Scalar>(a: T, b: T) -> std::cmp::Ordering {
    match (Float::is_nan(a), Float::is_nan(b)) {
        (true, true) => std::cmp::Ordering::Equal,
        (true, false) => std::cmp::Ordering::Less,
        (false, true) => std::cmp::Ordering::Greater,
        _ => a.partial_cmp(&b).unwrap(),
    }
}
