//! Scalar abstractions for the numeric kernels.

use std::fmt::{Debug, Display};

/// Ring-level scalar: enough for LP value arithmetic (objectives, loads,
/// feasibility sums). Satisfied by `f32`/`f64` and by exact rationals, which
/// the test suite uses to check linearity identities without float error.
pub trait Scalar:
    num_traits::Num + num_traits::FromPrimitive + num_traits::ToPrimitive + PartialOrd + Copy + Debug + Display
{
    fn two() -> Self {
        Self::one() + Self::one()
    }
}

impl<T> Scalar for T where
    T: num_traits::Num
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + PartialOrd
        + Copy
        + Debug
        + Display
{
}

/// Field-level scalar with transcendentals, required by the solver proper
/// (step sizes, logarithmic iteration caps, weight classes).
pub trait Real: Scalar + num_traits::Float {}

impl Real for f32 {}
impl Real for f64 {}

/// Shorthand for lifting an `f64` constant into a generic scalar.
pub fn lift<S: Scalar>(x: f64) -> S {
    S::from_f64(x).expect("constant representable in scalar type")
}
