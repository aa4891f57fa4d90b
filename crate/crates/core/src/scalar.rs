//! Scalar abstraction shared by every numerical routine.
//!
//! All of the operator algebra is written against [`Real`], which is
//! implemented for `f32` and `f64`. Region descriptors, grids and reports stay
//! in `f64`; they are converted with [`Real::lit`] at the boundary.

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point type usable by the Fock-space algebra.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + std::fmt::Debug + 'static
{
    /// Converts an `f64` literal into this type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    /// Converts an index or count.
    #[inline]
    fn of(n: usize) -> Self {
        Self::from_usize(n).expect("representable count")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Machine epsilon.
    fn epsilon() -> Self;

    /// Widens an `f64` tolerance so it stays attainable at this precision.
    ///
    /// For `f64` this is the identity; for `f32` the tolerance is floored at
    /// `1e3 * f32::EPSILON`.
    #[inline]
    fn tolerance(tol: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(1e3);
        let t = Self::lit(tol);
        if t < floor {
            floor
        } else {
            t
        }
    }
}

impl Real for f32 {
    fn epsilon() -> Self {
        f32::EPSILON
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
}

/// Complex scalar over `T`.
pub type Cx<T> = Complex<T>;
/// Dense complex matrix over `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;
/// Dense complex column vector over `T`.
pub type CVector<T> = DVector<Complex<T>>;

#[inline]
pub(crate) fn cx<T: Real>(re: T, im: T) -> Cx<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn re<T: Real>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

/// `e^{iθ}`.
#[inline]
pub(crate) fn cis<T: Real>(theta: T) -> Cx<T> {
    Complex::new(theta.cos(), theta.sin())
}

/// Converts a complex `f64` into `Cx<T>`.
#[inline]
pub fn cx_lit<T: Real>(z: Complex<f64>) -> Cx<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}
