use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Scalar type for rewards, values, confidences and feature coordinates.
///
/// Everything numeric in this crate is generic over `Scalar`; the partition
/// machinery itself (blocks, keys, assignments) is integer-only and does not
/// depend on it. `f64` is the default used by the environments and the CLI,
/// see the aliases at the crate root.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and config defaults.
    fn from_config(value: f64) -> Self {
        Self::from_f64(value).expect("scalar must be constructible from f64")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
}
