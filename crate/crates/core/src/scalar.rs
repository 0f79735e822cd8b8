//! Scalar abstraction for parameters and charges.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar used for the algorithm parameters and for charge values.
///
/// Implemented for `f32` and `f64`. Vertex counts are converted into the
/// scalar before every threshold comparison, so the choice of scalar decides
/// how boundary cases such as `|N(u) ∩ C| ≤ δ|C| − 1` resolve.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    fn from_count(count: usize) -> Self {
        Self::from_usize(count).expect("vertex count representable in scalar")
    }

    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("literal representable in scalar")
    }

    /// `⌊self⌋` clamped at zero.
    fn floor_count(self) -> usize {
        let f = self.floor();
        if f <= Self::zero() {
            0
        } else {
            f.to_usize().unwrap_or(usize::MAX)
        }
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_count_clamps_negative() {
        assert_eq!((-0.5f64).floor_count(), 0);
        assert_eq!((0.179f64 * 51.0).floor_count(), 9);
        assert_eq!((0.179f32 * 3.0).floor_count(), 0);
    }
}
