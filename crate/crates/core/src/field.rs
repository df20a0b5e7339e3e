//! Value kinds carried by radial fields: real scalars, complex scalars and 3-vectors.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::Vec3;

/// A nodal value of a radial field.
///
/// Fields themselves are plain slices `&[T]` whose length must equal the grid's node count.
pub trait FieldValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;

    /// `f * conj(g)` summed over components.
    fn dot_conj(&self, other: &Self) -> Complex64;

    fn norm_sqr(&self) -> f64;

    fn abs(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn dot_conj(&self, other: &Self) -> Complex64 {
        Complex64::new(self * other, 0.0)
    }
    fn norm_sqr(&self) -> f64 {
        self * self
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn dot_conj(&self, other: &Self) -> Complex64 {
        self * other.conj()
    }
    fn norm_sqr(&self) -> f64 {
        Complex64::norm_sqr(self)
    }
}

impl FieldValue for Vec3 {
    fn zero() -> Self {
        Vec3::zeros()
    }
    fn dot_conj(&self, other: &Self) -> Complex64 {
        Complex64::new(self.dot(other), 0.0)
    }
    fn norm_sqr(&self) -> f64 {
        Vec3::norm_squared(self)
    }
}

/// Real "dot" of two complex numbers: `Re a Re b + Im a Im b`.
#[inline]
pub fn circ(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}
