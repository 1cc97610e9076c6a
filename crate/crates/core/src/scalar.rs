//! Numeric traits the generic parts of the crate are written against.

use std::fmt::Debug;
use std::ops::{Add, Sub};

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, ToPrimitive, Zero};

/// Floating-point scalar for probability maps, logits and losses.
pub trait Scalar: Float + FromPrimitive + Debug + Default + Send + Sync + 'static {
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("scalar literal out of range")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Entry type of an assignment cost matrix.
///
/// Floating-point costs compare reduced costs against a tolerance scaled by
/// the largest entry; exact types (integers, rationals) compare exactly.
pub trait Cost: Clone + PartialOrd + Zero + Add<Output = Self> + Sub<Output = Self> + Debug {
    fn is_finite_cost(&self) -> bool;

    /// Whether a reduced cost is zero, given the largest absolute cost entry.
    fn is_tight(&self, scale: &Self) -> bool;

    fn to_f64_lossy(&self) -> f64;
}

macro_rules! float_cost {
    ($t:ty, $eps:expr) => {
        impl Cost for $t {
            fn is_finite_cost(&self) -> bool {
                self.is_finite()
            }

            fn is_tight(&self, scale: &Self) -> bool {
                self.abs() <= $eps * (1.0 + scale.abs())
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_cost!(f32, 1e-5);
float_cost!(f64, 1e-10);

macro_rules! int_cost {
    ($($t:ty),*) => {$(
        impl Cost for $t {
            fn is_finite_cost(&self) -> bool {
                true
            }

            fn is_tight(&self, _scale: &Self) -> bool {
                *self == 0
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    )*};
}

int_cost!(i32, i64);

impl Cost for Ratio<i64> {
    fn is_finite_cost(&self) -> bool {
        true
    }

    fn is_tight(&self, _scale: &Self) -> bool {
        self.is_zero()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}
