//! Scalar traits used throughout the crate.
//!
//! Graph weights only need ring arithmetic plus an ordering, so the rewiring
//! machinery works for exact integer matrices as well as floats. Anything
//! that divides, averages, or takes square roots (strength statistics,
//! assortativity, the LP solver) additionally requires [`Real`].

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, Num, NumAssign};

/// Minimal scalar for edge weights and difference-matrix entries.
pub trait Weight: Num + NumAssign + PartialOrd + Copy + Debug + Display {
    /// Magnitude without requiring `Signed` (also fine for floats: NaN maps
    /// to itself, which every comparison downstream treats as a failure).
    fn abs_val(self) -> Self {
        if self < Self::zero() {
            Self::zero() - self
        } else {
            self
        }
    }
}

impl<T> Weight for T where T: Num + NumAssign + PartialOrd + Copy + Debug + Display {}

/// Scalar for statistics and optimization: a float that we can seed from
/// `f64` literals (tolerances, probabilities).
pub trait Real: Weight + Float + FromPrimitive {
    /// Shorthand for converting an `f64` constant; panics only if the target
    /// type cannot represent finite `f64` values at all.
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert")
    }
}

impl<T> Real for T where T: Weight + Float + FromPrimitive {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_val_matches_signs() {
        assert_eq!((-3i64).abs_val(), 3);
        assert_eq!(3i64.abs_val(), 3);
        assert_eq!(0i64.abs_val(), 0);
        assert_eq!((-2.5f64).abs_val(), 2.5);
        assert_eq!(2.5f64.abs_val(), 2.5);
    }

    #[test]
    fn constant_conversion() {
        assert_eq!(f64::c(0.25), 0.25);
        assert_eq!(f32::c(0.5), 0.5f32);
    }
}
