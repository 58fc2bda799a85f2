//! Scalar abstraction: f32 or f64.

use std::fmt::{Display, LowerExp};

/// Floating-point scalar the whole crate is generic over.
///
/// `nalgebra::RealField` supplies the transcendental and ordering operations
/// (and is what the eigensolvers in the oracle require); the num-traits
/// bounds supply `Complex` arithmetic and literal conversion.
pub trait Real:
    nalgebra::RealField
    + num_traits::Num
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + Copy
    + Display
    + LowerExp
{
    /// Shorthand for converting an f64 literal; exact for every constant
    /// used in this crate when `Self = f32` would lose nothing we assert on.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits scalar")
    }
}

impl<T> Real for T where
    T: nalgebra::RealField
        + num_traits::Num
        + num_traits::FromPrimitive
        + num_traits::ToPrimitive
        + Copy
        + Display
        + LowerExp
{
}
