use std::ops::{Add, Div, Mul, Neg, Sub};

use super::tape::Var;

/// Scalar arithmetic shared by plain `f64` and recorded tape nodes, so the
/// objective and scalarization formulas are written once.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn exp(self) -> Self;
    fn square(self) -> Self;
    fn maximum(self, other: Self) -> Self;
    fn value(&self) -> f64;
}

impl Real for f64 {
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn square(self) -> Self {
        self * self
    }
    fn maximum(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Real for Var<'_> {
    fn sin(self) -> Self {
        Var::sin(self)
    }
    fn cos(self) -> Self {
        Var::cos(self)
    }
    fn sqrt(self) -> Self {
        Var::sqrt(self)
    }
    fn abs(self) -> Self {
        Var::abs(self)
    }
    fn exp(self) -> Self {
        Var::exp(self)
    }
    fn square(self) -> Self {
        Var::square(self)
    }
    fn maximum(self, other: Self) -> Self {
        Var::max(self, other)
    }
    fn value(&self) -> f64 {
        self.scalar()
    }
}

/// Maximum of a non-empty list, first maximiser wins ties.
pub fn max_of<T: Real>(xs: &[T]) -> T {
    let mut it = xs.iter().copied();
    let first = it.next().expect("max_of on empty slice");
    it.fold(first, |acc, x| acc.maximum(x))
}

/// Sum of a non-empty list.
pub fn sum_of<T: Real>(xs: &[T]) -> T {
    let mut it = xs.iter().copied();
    let first = it.next().expect("sum_of on empty slice");
    it.fold(first, |acc, x| acc + x)
}
