//! Scalar abstraction shared by every numerical kernel in the crate.

use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the kernels are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only for non-representable values, which
    /// cannot happen for the finite constants used in this crate.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize fits in a float")
    }

    /// `v` clamped from below by a small multiple of the machine epsilon, so that a
    /// tolerance written for `f64` stays meaningful in lower precision.
    #[inline]
    fn tol(v: f64) -> Self {
        Self::lit(v).max(Self::epsilon() * Self::lit(64.0))
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over [`Real`].
pub type Cplx<T> = Complex<T>;

#[inline]
pub(crate) fn cplx<T: Real>(re: T, im: T) -> Cplx<T> {
    Complex::new(re, im)
}

/// Principal square root, with the negative real axis mapped to the upper half
/// plane regardless of the sign of a zero imaginary part.
#[inline]
pub(crate) fn principal_sqrt<T: Real>(z: Cplx<T>) -> Cplx<T> {
    if z.im == T::zero() {
        if z.re >= T::zero() {
            cplx(z.re.sqrt(), T::zero())
        } else {
            cplx(T::zero(), (-z.re).sqrt())
        }
    } else {
        z.sqrt()
    }
}
