//! Forward-mode dual numbers.
//!
//! `Dual<f64>` carries a first derivative. Nesting (`Dual<Dual<f64>>`) gives
//! second derivatives, which the caustics module needs for the foci-curve tangent
//! of expression mirrors.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar types that expressions and curve formulas can be evaluated over.
pub trait Real:
    Copy
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    /// The primal `f64` value.
    fn value(self) -> f64;
    /// True when every component (value and all derivative parts) is finite.
    fn all_finite(self) -> bool;
    /// True when all derivative parts vanish.
    fn is_constant(self) -> bool;
    fn is_zero(self) -> bool;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn tanh(self) -> Self;
    /// `None` where the absolute value has no derivative (at zero, for duals).
    fn abs(self) -> Option<Self>;
    fn pow(self, exponent: Self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn all_finite(self) -> bool {
        self.is_finite()
    }
    #[inline]
    fn is_constant(self) -> bool {
        true
    }
    #[inline]
    fn is_zero(self) -> bool {
        self == 0.0
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sinh(self) -> Self {
        f64::sinh(self)
    }
    fn cosh(self) -> Self {
        f64::cosh(self)
    }
    fn tanh(self) -> Self {
        f64::tanh(self)
    }
    fn abs(self) -> Option<Self> {
        Some(f64::abs(self))
    }
    fn pow(self, exponent: Self) -> Self {
        self.powf(exponent)
    }
}

/// A value paired with its derivative with respect to one seed variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<T = f64> {
    pub value: T,
    pub deriv: T,
}

impl<T: Real> Dual<T> {
    #[inline]
    pub fn new(value: T, deriv: T) -> Self {
        Self { value, deriv }
    }

    /// The seed variable: derivative one.
    #[inline]
    pub fn variable(value: T) -> Self {
        Self::new(value, T::constant(1.0))
    }

    #[inline]
    fn chain(self, value: T, outer_deriv: T) -> Self {
        Self::new(value, outer_deriv * self.deriv)
    }
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.value * rhs.value,
            self.deriv * rhs.value + self.value * rhs.deriv,
        )
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let q = self.value / rhs.value;
        Self::new(q, (self.deriv - q * rhs.deriv) / rhs.value)
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl<T: Real> Real for Dual<T> {
    #[inline]
    fn constant(v: f64) -> Self {
        Self::new(T::constant(v), T::constant(0.0))
    }
    #[inline]
    fn value(self) -> f64 {
        self.value.value()
    }
    fn all_finite(self) -> bool {
        self.value.all_finite() && self.deriv.all_finite()
    }
    fn is_constant(self) -> bool {
        self.deriv.is_zero() && self.value.is_constant()
    }
    fn is_zero(self) -> bool {
        self.value.is_zero() && self.deriv.is_zero()
    }

    fn sin(self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tan(self) -> Self {
        let t = self.value.tan();
        self.chain(t, T::constant(1.0) + t * t)
    }
    fn sqrt(self) -> Self {
        let s = self.value.sqrt();
        self.chain(s, T::constant(0.5) / s)
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.value.ln(), T::constant(1.0) / self.value)
    }
    fn sinh(self) -> Self {
        self.chain(self.value.sinh(), self.value.cosh())
    }
    fn cosh(self) -> Self {
        self.chain(self.value.cosh(), self.value.sinh())
    }
    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.chain(t, T::constant(1.0) - t * t)
    }
    fn abs(self) -> Option<Self> {
        let v = self.value.value();
        if v > 0.0 {
            Some(self)
        } else if v < 0.0 {
            Some(-self)
        } else {
            None
        }
    }
    fn pow(self, exponent: Self) -> Self {
        let p = self.value.pow(exponent.value);
        if exponent.is_constant() {
            // power rule; keeps negative bases with integer exponents finite
            let n = exponent.value;
            let d = n * self.value.pow(n - T::constant(1.0));
            self.chain(p, d)
        } else {
            let d = p * (exponent.deriv * self.value.ln()
                + exponent.value * self.deriv / self.value);
            Self::new(p, d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: f64) -> Dual {
        Dual::variable(x)
    }

    #[test]
    fn arithmetic_rules() {
        let a = Dual::new(3.0, 2.0);
        let b = Dual::new(5.0, -1.0);
        assert_eq!((a + b).deriv, 1.0);
        assert_eq!((a * b).deriv, 2.0 * 5.0 - 3.0);
        let q = a / b;
        assert!((q.deriv - (2.0 * 5.0 + 3.0) / 25.0).abs() < 1e-15);
    }

    #[test]
    fn power_of_negative_base_with_integer_exponent() {
        let x = d(-2.0);
        let y = x.pow(Dual::constant(2.0));
        assert_eq!(y.value, 4.0);
        assert_eq!(y.deriv, -4.0);
    }

    #[test]
    fn abs_is_undefined_at_zero() {
        assert!(Real::abs(d(0.0)).is_none());
        assert_eq!(Real::abs(d(-1.5)).unwrap().deriv, -1.0);
        assert_eq!(Real::abs(0.0_f64), Some(0.0));
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        // x^3 at 2: f' = 12, f'' = 12
        let x: Dual<Dual> = Dual::new(Dual::variable(2.0), Dual::constant(1.0));
        let y = x * x * x;
        assert_eq!(y.value.value, 8.0);
        assert_eq!(y.deriv.value, 12.0);
        assert_eq!(y.deriv.deriv, 12.0);
        // sin: f'' = -sin
        let s = x.sin();
        assert!((s.deriv.deriv + 2.0_f64.sin()).abs() < 1e-15);
    }
}
