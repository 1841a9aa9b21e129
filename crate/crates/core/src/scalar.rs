use num_complex::Complex64;
use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

/// Field used by the stepping (real) and frequency-domain (complex) code paths.
pub trait Scalar:
    Copy
    + Debug
    + Send
    + Sync
    + PartialEq
    + From<f64>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + 'static
{
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    /// Re(self * conj(other)).
    fn re_dot(self, other: Self) -> f64;
    fn zero() -> Self {
        Self::from(0.0)
    }
}

impl Scalar for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn re_dot(self, other: Self) -> f64 {
        self * other
    }
}

impl Scalar for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn re_dot(self, other: Self) -> f64 {
        self.re * other.re + self.im * other.im
    }
}
