//! Scalar abstraction for probabilities, potentials and energies.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar used by the probabilistic parts of the crate.
///
/// Implemented for `f32` and `f64`. Combinatorial objects (vertices,
/// configurations, descriptions) are integer-valued and do not depend on it.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    fn from_f64_lossy(value: f64) -> Self {
        Self::from_f64(value).expect("f64 converts to every Real")
    }

    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize converts to every Real")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().expect("every Real converts to f64")
    }
}

impl<T> Real for T where
    T: Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
}

/// Numerically stable `ln(sum(exp(x)))`.
pub fn log_sum_exp<T: Real>(values: impl IntoIterator<Item = T> + Clone) -> T {
    let max = values
        .clone()
        .into_iter()
        .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if max == T::neg_infinity() {
        return max;
    }
    let sum = values
        .into_iter()
        .fold(T::zero(), |acc, v| acc + (v - max).exp());
    max + sum.ln()
}
