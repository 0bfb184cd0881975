use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde_json::Value;

use super::Rat;

/// Numeric carrier shared by every generic routine: exact [`Rat`] or
/// binary64 `f64`.
pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// True when arithmetic is exact and comparisons need no tolerance.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_rat(r: &Rat) -> Self;
    fn to_f64(&self) -> f64;
    /// Serialized form: rationals as `"num/den"` strings, reals as numbers.
    fn to_json(&self) -> Value;
    /// Absolute tolerance used by checks that do not take one explicitly:
    /// zero for exact arithmetic.
    fn default_tolerance() -> Self;

    fn from_usize(v: usize) -> Self {
        Self::from_i64(v as i64)
    }

    fn abs(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn min_of(a: Self, b: Self) -> Self {
        if b < a {
            b
        } else {
            a
        }
    }

    fn max_of(a: Self, b: Self) -> Self {
        if b > a {
            b
        } else {
            a
        }
    }

    /// `max{0, self}`.
    fn pos(&self) -> Self {
        Self::max_of(Self::zero(), self.clone())
    }

    fn sum<'a, I: IntoIterator<Item = &'a Self>>(items: I) -> Self {
        items
            .into_iter()
            .fold(Self::zero(), |acc, v| acc + v.clone())
    }
}

impl Scalar for Rat {
    const EXACT: bool = true;

    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn from_i64(v: i64) -> Self {
        Rat::from_int(v)
    }
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        Rat::to_f64(self)
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn default_tolerance() -> Self {
        Rat::zero()
    }
    fn abs(&self) -> Self {
        Rat::abs(self)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rat(r: &Rat) -> Self {
        r.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn default_tolerance() -> Self {
        1e-9
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}
