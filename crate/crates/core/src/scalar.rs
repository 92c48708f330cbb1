//! Real scalar abstraction shared by every numeric routine in the crate.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use crate::dd::DoubleDouble;

/// Real field the library is generic over: `f32`, `f64` and [`DoubleDouble`].
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Denominator moduli at or below this value are treated as poles.
    fn pole_floor() -> Self;

    /// Unit roundoff of the format (`Float::epsilon` is unreliable for extended types).
    fn eps() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64`.
    #[inline]
    fn to_f(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Relative threshold below which trailing polynomial coefficients are dropped.
    #[inline]
    fn trim_tol() -> Self {
        Self::of(1e-14).max(Self::eps() * Self::of(16.0))
    }
}

impl Scalar for f32 {
    fn pole_floor() -> Self {
        f32::MIN_POSITIVE
    }
    fn eps() -> Self {
        f32::EPSILON
    }
}

impl Scalar for f64 {
    fn pole_floor() -> Self {
        1e-300
    }
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Scalar for DoubleDouble {
    fn pole_floor() -> Self {
        <DoubleDouble as From<f64>>::from(1e-300)
    }
    fn eps() -> Self {
        <DoubleDouble as From<f64>>::from(crate::dd::EPS)
    }
}

/// Complex number over a [`Scalar`].
pub type C<T> = Complex<T>;

/// Complex constant from two `f64` parts.
#[inline]
pub fn cplx<T: Scalar>(re: f64, im: f64) -> C<T> {
    Complex::new(T::of(re), T::of(im))
}

/// Real value embedded in the complex plane.
#[inline]
pub fn re<T: Scalar>(x: T) -> C<T> {
    Complex::new(x, T::zero())
}

/// Imaginary-axis point `iω`.
#[inline]
pub fn jw<T: Scalar>(omega: T) -> C<T> {
    Complex::new(T::zero(), omega)
}

/// Converts a complex value between scalar types.
#[inline]
pub fn cast_c<S: Scalar, T: Scalar>(z: C<S>) -> C<T> {
    Complex::new(T::of(z.re.to_f()), T::of(z.im.to_f()))
}
