//! Scalar abstraction and the small amount of dense linear algebra the
//! interpolation code needs.
//!
//! Gram matrices of smooth kernels are ill-conditioned enough that `f64` loses
//! the power function and the smallest eigenvalue long before the interesting
//! regime, so the interpolation routines are generic over [`Real`] and run in
//! either `f64` or [`DoubleDouble`]. The smallest-eigenvalue certificate goes
//! further still and uses [`wide`] (256-bit floats).

pub mod dd;
pub mod fit;
pub mod linalg;
pub mod quadrature;
pub mod special;
pub mod wide;

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub use dd::DoubleDouble;

pub trait Real:
    Copy
    + Debug
    + Default
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Unit roundoff of the format.
    const EPSILON: f64;
    const NAME: &'static str;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn pi() -> Self;

    fn abs(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn is_finite(self) -> bool;

    fn mul_f64(self, b: f64) -> Self {
        self * Self::from_f64(b)
    }

    fn powf(self, p: f64) -> Self {
        if p == p.trunc() && p.abs() < 64.0 {
            self.powi(p as i32)
        } else {
            (self.ln().mul_f64(p)).exp()
        }
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    const EPSILON: f64 = f64::EPSILON;
    const NAME: &'static str = "f64";

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }
    #[inline]
    fn to_f64(self) -> f64 {
        self
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }
    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }
    #[inline]
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    #[inline]
    fn mul_f64(self, b: f64) -> Self {
        self * b
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

impl Real for DoubleDouble {
    // 2^-104
    const EPSILON: f64 = 4.930_380_657_631_324e-32;
    const NAME: &'static str = "double-double";

    #[inline]
    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    #[inline]
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn pi() -> Self {
        dd::PI
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn exp(self) -> Self {
        DoubleDouble::exp(self)
    }
    fn ln(self) -> Self {
        DoubleDouble::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        DoubleDouble::powi(self, n)
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
    fn mul_f64(self, b: f64) -> Self {
        DoubleDouble::mul_f64(self, b)
    }
}

/// Which scalar format a computation ran in; recorded in reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F64,
    DoubleDouble,
    Wide256,
}

impl Precision {
    pub fn of<T: Real>() -> Self {
        if T::EPSILON == f64::EPSILON {
            Precision::F64
        } else {
            Precision::DoubleDouble
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Precision::F64 => "f64",
            Precision::DoubleDouble => "double-double",
            Precision::Wide256 => "wide-256",
        }
    }
}

/// Squared Euclidean distance, accumulated in `T` from `f64` coordinates.
#[inline]
pub fn dist2<T: Real>(u: &[f64], v: &[f64]) -> T {
    let mut acc = T::zero();
    for (a, b) in u.iter().zip(v) {
        let d = T::from_f64(*a) - T::from_f64(*b);
        acc += d * d;
    }
    acc
}

#[inline]
pub fn dist(u: &[f64], v: &[f64]) -> f64 {
    dist2::<f64>(u, v).sqrt()
}
