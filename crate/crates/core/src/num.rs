//! Scalar abstraction for the network algebra.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign};

/// Floating point type the network kernels are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for constants and case data.
    fn of(x: f64) -> Self;

    fn to_f64_lossy(self) -> f64;
}

impl Scalar for f32 {
    #[inline]
    fn of(x: f64) -> Self {
        x as f32
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    #[inline]
    fn of(x: f64) -> Self {
        x
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Element type an LU factorization can pivot on.
pub trait Pivot:
    Copy
    + Debug
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::Div<Output = Self>
    + Send
    + Sync
{
    type Real: Scalar;

    fn pivot_zero() -> Self;

    /// Magnitude used for partial pivoting.
    fn magnitude(&self) -> Self::Real;
}

macro_rules! impl_pivot {
    ($t:ty) => {
        impl Pivot for $t {
            type Real = $t;

            #[inline]
            fn pivot_zero() -> Self {
                0.0
            }

            #[inline]
            fn magnitude(&self) -> $t {
                self.abs()
            }
        }

        impl Pivot for Complex<$t> {
            type Real = $t;

            #[inline]
            fn pivot_zero() -> Self {
                Complex::new(0.0, 0.0)
            }

            #[inline]
            fn magnitude(&self) -> $t {
                self.norm()
            }
        }
    };
}

impl_pivot!(f32);
impl_pivot!(f64);
