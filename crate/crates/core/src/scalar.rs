//! The scalar abstraction every geometric routine is generic over.
//!
//! Plain floats (`f32`, `f64`) implement [`Scalar`] directly; [`crate::Jet`]
//! implements it on top of any other scalar, which is what lets the same code
//! path produce values, first derivatives, or derivatives of derivatives.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{Float, One, Zero};

pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;

    /// Innermost real value (the point value once all derivative parts are stripped).
    fn re(&self) -> f64;

    fn scale(&self, c: f64) -> Self;

    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, c: f64) -> Self;

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn from_f64(v: f64) -> Self {
                v as $t
            }
            #[inline]
            fn re(&self) -> f64 {
                *self as f64
            }
            #[inline]
            fn scale(&self, c: f64) -> Self {
                *self * c as $t
            }
            #[inline]
            fn sqrt(&self) -> Self {
                Float::sqrt(*self)
            }
            #[inline]
            fn exp(&self) -> Self {
                Float::exp(*self)
            }
            #[inline]
            fn ln(&self) -> Self {
                Float::ln(*self)
            }
            #[inline]
            fn sin(&self) -> Self {
                Float::sin(*self)
            }
            #[inline]
            fn cos(&self) -> Self {
                Float::cos(*self)
            }
            #[inline]
            fn powi(&self, n: i32) -> Self {
                Float::powi(*self, n)
            }
            #[inline]
            fn powf(&self, c: f64) -> Self {
                Float::powf(*self, c as $t)
            }
            #[inline]
            fn recip(&self) -> Self {
                Float::recip(*self)
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);
