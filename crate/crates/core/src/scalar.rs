//! Scalar abstraction.
//!
//! The exact parts of the crate (gap-law recurrence, correlation series,
//! exact variance, walk-maximum law) only need field arithmetic, so they are
//! written against [`Scalar`] and run on `f32`, `f64` or arbitrary-precision
//! rationals. Sampling, quadrature and distribution distances additionally
//! need transcendental functions and are written against [`Real`].

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Signed, ToPrimitive};

/// Field-like scalar: `f32`, `f64` or [`BigRational`].
pub trait Scalar: Clone + Debug + PartialOrd + Signed + FromPrimitive + ToPrimitive {
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    fn from_int(value: i64) -> Self;

    /// `num / den`, exact for rational scalars.
    fn ratio(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    fn lossy_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Error-free transformation of `a + b` into `(sum, err)` with
    /// `sum + err == a + b` exactly. `err` is always zero for exact scalars.
    fn two_sum(a: &Self, b: &Self) -> (Self, Self) {
        let s = a.clone() + b.clone();
        if Self::EXACT {
            return (s, Self::zero());
        }
        let bp = s.clone() - a.clone();
        let ap = s.clone() - bp.clone();
        let err = (a.clone() - ap) + (b.clone() - bp);
        (s, err)
    }
}

impl Scalar for f32 {
    const EXACT: bool = false;

    fn from_int(value: i64) -> Self {
        value as f32
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(value: i64) -> Self {
        value as f64
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Scalar + Float + FloatConst + Copy + Send + Sync + 'static {
    fn of(value: f64) -> Self;
}

impl Real for f32 {
    fn of(value: f64) -> Self {
        value as f32
    }
}

impl Real for f64 {
    fn of(value: f64) -> Self {
        value
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone)]
pub struct CompensatedSum<T: Scalar> {
    sum: T,
    carry: T,
}

impl<T: Scalar> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self { sum: T::zero(), carry: T::zero() }
    }
}

impl<T: Scalar> CompensatedSum<T> {
    pub fn add(&mut self, x: &T) {
        let (s, e) = T::two_sum(&self.sum, x);
        self.sum = s;
        self.carry = self.carry.clone() + e;
    }

    pub fn value(&self) -> T {
        self.sum.clone() + self.carry.clone()
    }
}
