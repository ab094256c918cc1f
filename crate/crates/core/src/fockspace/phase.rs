use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cabs, Real};

/// A point `alpha` of the complex phase plane, `alpha = (q + i p) / sqrt(2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint<T: Real>(pub Complex<T>);

impl<T: Real> PhasePoint<T> {
    pub fn new(re: T, im: T) -> Self {
        PhasePoint(Complex::new(re, im))
    }

    pub fn origin() -> Self {
        PhasePoint::new(T::zero(), T::zero())
    }

    pub fn real(re: T) -> Self {
        PhasePoint::new(re, T::zero())
    }

    pub fn imag(im: T) -> Self {
        PhasePoint::new(T::zero(), im)
    }

    pub fn from_polar(radius: T, angle: T) -> Self {
        PhasePoint::new(radius * angle.cos(), radius * angle.sin())
    }

    #[inline]
    pub fn value(self) -> Complex<T> {
        self.0
    }

    #[inline]
    pub fn re(self) -> T {
        self.0.re
    }

    #[inline]
    pub fn im(self) -> T {
        self.0.im
    }

    #[inline]
    pub fn norm(self) -> T {
        cabs(self.0)
    }

    #[inline]
    pub fn norm_sqr(self) -> T {
        self.0.norm_sqr()
    }

    #[inline]
    pub fn arg(self) -> T {
        self.0.im.atan2(self.0.re)
    }

    pub fn conj(self) -> Self {
        PhasePoint(self.0.conj())
    }

    pub fn is_finite(self) -> bool {
        self.0.re.is_finite() && self.0.im.is_finite()
    }

    pub fn ensure_finite(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::domain("phase-space point must be finite"))
        }
    }
}

impl<T: Real> From<Complex<T>> for PhasePoint<T> {
    fn from(z: Complex<T>) -> Self {
        PhasePoint(z)
    }
}

impl<T: Real> Add for PhasePoint<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        PhasePoint(self.0 + rhs.0)
    }
}

impl<T: Real> Sub for PhasePoint<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        PhasePoint(self.0 - rhs.0)
    }
}

impl<T: Real> Neg for PhasePoint<T> {
    type Output = Self;
    fn neg(self) -> Self {
        PhasePoint(-self.0)
    }
}

impl<T: Real> Mul<T> for PhasePoint<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        PhasePoint(self.0.scale(rhs))
    }
}

/// Complex symplectic form `omega(a, b) = a b* - a* b` (purely imaginary).
///
/// `D(a) D(b) = e^{omega(a, b)} D(b) D(a)` and
/// `D(a) D(b) = e^{omega(a, b) / 2} D(a + b)`.
pub fn symplectic_form<T: Real>(a: PhasePoint<T>, b: PhasePoint<T>) -> Complex<T> {
    a.0 * b.0.conj() - a.0.conj() * b.0
}
