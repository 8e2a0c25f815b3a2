//! Scalar traits.

use std::fmt::Debug;

use nalgebra::RealField;
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Any ring-like scalar an operator can be applied over: integers for exact
/// checks, rationals for diagram algebra, floats for the solvers.
pub trait Scalar: Clone + Num + FromPrimitive + Debug + Send + Sync + 'static {}

impl<T> Scalar for T where T: Clone + Num + FromPrimitive + Debug + Send + Sync + 'static {}

/// Floating point scalar used by the eigensolvers and the Bethe machinery.
pub trait Real:
    RealField + Scalar + Copy + FromPrimitive + ToPrimitive + PartialOrd + Default
{
    /// Converts an `f64` literal; panics only if the type cannot hold finite literals.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
