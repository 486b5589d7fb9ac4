//! Scalar abstraction shared by every solver in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the solvers are generic over (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts a literal; every `f64` constant used in the crate is representable.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("index representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Diffusion exponent `m > 1` with a fast path for integer powers.
///
/// `v^m` is evaluated once per node per step, so the integer shortcut matters
/// for the common `m = 2`, `m = 3` runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponent<T> {
    value: T,
    integer: Option<i32>,
}

impl<T: Real> Exponent<T> {
    pub fn new(m: T) -> crate::Result<Self> {
        if !(m > T::one()) || !m.is_finite() {
            return Err(crate::Error::DegenerateExponent(m.as_f64()));
        }
        let integer = if m.fract() == T::zero() && m < T::lit(64.0) {
            m.to_i32()
        } else {
            None
        };
        Ok(Self { value: m, integer })
    }

    #[inline]
    pub fn value(&self) -> T {
        self.value
    }

    /// `m - 1`
    #[inline]
    pub fn minus_one(&self) -> T {
        self.value - T::one()
    }

    /// `v^m` for `v >= 0`.
    #[inline]
    pub fn pow(&self, v: T) -> T {
        match self.integer {
            Some(2) => v * v,
            Some(k) => v.powi(k),
            None => {
                if v <= T::zero() {
                    T::zero()
                } else {
                    v.powf(self.value)
                }
            }
        }
    }

    /// `v^(m-1)` for `v >= 0`.
    #[inline]
    pub fn pow_minus_one(&self, v: T) -> T {
        match self.integer {
            Some(2) => v,
            Some(k) => v.powi(k - 1),
            None => {
                if v <= T::zero() {
                    T::zero()
                } else {
                    v.powf(self.value - T::one())
                }
            }
        }
    }
}

/// Sup-norm of `a - b` divided by the sup-norm of `b`.
pub fn relative_sup_distance<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()));
    let diff = a
        .iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()));
    if scale > T::zero() {
        diff / scale
    } else {
        diff
    }
}

pub(crate) fn sup_norm<T: Real>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}
