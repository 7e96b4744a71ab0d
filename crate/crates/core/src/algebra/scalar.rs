use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// Exact rational scalars.
pub type Rational = BigRational;

/// Field interface shared by exact rationals, `f64` and first-order perturbations.
///
/// All polynomial and flow code is written against this trait only.
pub trait Field:
    Clone
    + Debug
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
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// Exact zero test (no tolerance).
    fn is_zero(&self) -> bool;
    /// Magnitude used for norms and tolerances.
    fn magnitude(&self) -> f64;
    fn abs(&self) -> Self;
    fn to_f64(&self) -> f64;
    /// `true` when arithmetic is exact; tolerances collapse to exact zero tests.
    fn is_exact() -> bool;
    /// Short label used in error messages and JSON.
    fn realization() -> &'static str;

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }
}

impl Field for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        f64::abs(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_exact() -> bool {
        false
    }
    fn realization() -> &'static str {
        "float"
    }
}

impl Field for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        ToPrimitive::to_f64(&Signed::abs(self)).unwrap_or(f64::INFINITY)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_exact() -> bool {
        true
    }
    fn realization() -> &'static str {
        "exact"
    }
}

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if Zero::is_zero(&d) {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Formats a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Max-norm of a coefficient slice.
pub fn max_norm<S: Field>(xs: &[S]) -> f64 {
    xs.iter().map(Field::magnitude).fold(0.0, f64::max)
}

/// Converts an exact value to `f64`; used when seeding numerical runs from exact data.
pub fn to_float_vec(xs: &[Rational]) -> Vec<f64> {
    xs.iter().map(Field::to_f64).collect()
}
