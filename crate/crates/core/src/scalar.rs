//! Scalar abstraction shared by the numeric modules.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num};

/// Any ordered field element that can be built from counts.
///
/// Implemented for `f32`, `f64` and `Ratio<i64>`/`Ratio<i128>`, so ratio
/// arithmetic can be run either in floating point or exactly.
pub trait Scalar: Num + Clone + PartialOrd + FromPrimitive + Debug {
    fn from_count(n: u64) -> Self {
        Self::from_u64(n).expect("count fits the scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
impl Scalar for Ratio<i64> {}
impl Scalar for Ratio<i128> {}

/// Floating point scalar used by the embedding and clustering code.
pub trait Real: Float + Scalar + Default + Send + Sync + std::iter::Sum + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable")
    }
}

impl Real for f32 {}
impl Real for f64 {}
