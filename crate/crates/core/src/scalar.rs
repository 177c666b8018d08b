use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};

/// Floating-point type the scoring code is generic over.
pub trait Scalar: Float + FromPrimitive + Debug + Display + Default + Send + Sync + 'static {
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in a float")
    }

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal fits in a float")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `num / den`, or zero when `den` is zero.
pub(crate) fn ratio<F: Scalar>(num: usize, den: usize) -> F {
    if den == 0 {
        F::zero()
    } else {
        F::from_count(num) / F::from_count(den)
    }
}
