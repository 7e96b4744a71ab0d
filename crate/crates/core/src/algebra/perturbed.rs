use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

use super::scalar::Field;

/// First-order perturbation `value + deriv * eps` with `eps^2 = 0`.
///
/// Evaluating a polynomial map over `Perturbed` scalars yields its exact
/// directional derivative in the `deriv` component.
#[derive(Clone, Debug, PartialEq)]
pub struct Perturbed<S> {
    pub value: S,
    pub deriv: S,
}

impl<S: Field> Perturbed<S> {
    pub fn new(value: S, deriv: S) -> Self {
        Self { value, deriv }
    }

    pub fn constant(value: S) -> Self {
        Self { value, deriv: S::zero() }
    }

    /// Seeds `p + eps * v` coordinate-wise.
    pub fn seed(p: &[S], v: &[S]) -> Vec<Self> {
        p.iter()
            .zip(v)
            .map(|(a, b)| Self::new(a.clone(), b.clone()))
            .collect()
    }
}

/// Scalars that a base scalar `S` embeds into: `S` itself and `Perturbed<S>`.
pub trait Embed<S>: Field {
    fn embed(s: &S) -> Self;
}

impl<S: Field> Embed<S> for S {
    fn embed(s: &S) -> Self {
        s.clone()
    }
}

impl<S: Field> Embed<S> for Perturbed<S> {
    fn embed(s: &S) -> Self {
        Perturbed::constant(s.clone())
    }
}

impl<S: Field> Add for Perturbed<S> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.deriv + rhs.deriv)
    }
}

impl<S: Field> Sub for Perturbed<S> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.deriv - rhs.deriv)
    }
}

impl<S: Field> Mul for Perturbed<S> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let deriv = self.value.clone() * rhs.deriv + self.deriv * rhs.value.clone();
        Self::new(self.value * rhs.value, deriv)
    }
}

impl<S: Field> Div for Perturbed<S> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value.clone() / rhs.value.clone();
        let deriv = (self.deriv * rhs.value.clone() - self.value * rhs.deriv)
            / (rhs.value.clone() * rhs.value);
        Self::new(value, deriv)
    }
}

impl<S: Field> Neg for Perturbed<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.deriv)
    }
}

impl<S: Field> PartialOrd for Perturbed<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.value.partial_cmp(&other.value) {
            Some(Ordering::Equal) => self.deriv.partial_cmp(&other.deriv),
            ord => ord,
        }
    }
}

impl<S: Field> Field for Perturbed<S> {
    fn zero() -> Self {
        Self::constant(S::zero())
    }
    fn one() -> Self {
        Self::constant(S::one())
    }
    fn from_i64(n: i64) -> Self {
        Self::constant(S::from_i64(n))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::constant(S::from_ratio(num, den))
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero() && self.deriv.is_zero()
    }
    fn magnitude(&self) -> f64 {
        self.value.magnitude().max(self.deriv.magnitude())
    }
    fn abs(&self) -> Self {
        if self.value < S::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }
    fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
    fn is_exact() -> bool {
        S::is_exact()
    }
    fn realization() -> &'static str {
        S::realization()
    }
}
