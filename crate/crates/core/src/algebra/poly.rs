use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::scalar::Field;
use crate::error::{Error, Result};

/// Dense univariate polynomial; `coeffs[i]` is the coefficient of `x^i`.
///
/// Trailing zeros are stripped on construction, so the zero polynomial is the
/// empty sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct UniPoly<S> {
    coeffs: Vec<S>,
}

/// Ring operation selector for [`poly_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

/// Ring arithmetic on two polynomials over the same scalar realization.
///
/// Mixing realizations is a type error; the dynamic (JSON) path rejects it
/// with [`Error::MixedScalars`] before values reach this function.
pub fn poly_arith<S: Field>(a: &UniPoly<S>, b: &UniPoly<S>, op: PolyOp) -> UniPoly<S> {
    match op {
        PolyOp::Add => a + b,
        PolyOp::Sub => a - b,
        PolyOp::Mul => a * b,
    }
}

impl<S: Field> UniPoly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().map_or(false, Field::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(S::one())
    }

    pub fn constant(c: S) -> Self {
        Self::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let mut coeffs = vec![S::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn x() -> Self {
        Self::monomial(S::one(), 1)
    }

    /// `x - r`.
    pub fn linear_root(r: S) -> Self {
        Self::new(vec![-r, S::one()])
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| S::from_i64(c)).collect())
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^i` (zero beyond the stored range).
    pub fn coeff(&self, i: usize) -> S {
        self.coeffs.get(i).cloned().unwrap_or_else(S::zero)
    }

    pub fn leading(&self) -> S {
        self.coeffs.last().cloned().unwrap_or_else(S::zero)
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::new(self.coeffs.iter().map(|a| a.clone() * c.clone()).collect())
    }

    pub fn eval(&self, x: &S) -> S {
        self.coeffs
            .iter()
            .rev()
            .fold(S::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn max_norm(&self) -> f64 {
        super::scalar::max_norm(&self.coeffs)
    }

    /// Coefficients `c[0..len]`, zero-padded.
    pub fn padded(&self, len: usize) -> Vec<S> {
        (0..len).map(|i| self.coeff(i)).collect()
    }

    /// `p(x)^2`.
    pub fn square(&self) -> Self {
        self * self
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * S::from_i64(i as i64))
                .collect(),
        )
    }

    /// Euclidean division; the divisor must be nonzero.
    pub fn div_rem(&self, divisor: &Self) -> Result<(Self, Self)> {
        let dd = divisor.degree().ok_or(Error::ZeroDenominator)?;
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd].clone() / lead.clone();
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] = rem[k + j].clone() - c.clone() * dc.clone();
            }
            quot[k] = c;
        }
        rem.truncate(dd);
        Ok((Self::new(quot), Self::new(rem)))
    }

    /// Exact division, failing with `NonDivisible` when the remainder is nonzero
    /// (relative tolerance `1e-9` for inexact scalars).
    pub fn exact_div(&self, divisor: &Self) -> Result<Self> {
        let (q, r) = self.div_rem(divisor)?;
        check_remainder::<S>(r.max_norm(), self.max_norm())?;
        Ok(q)
    }

    /// Polynomial with every other coefficient, starting at `offset`,
    /// i.e. `p(x) = x^offset * s(x^2)` returns `s`.
    pub fn parity_part(&self, offset: usize) -> Self {
        Self::new(self.coeffs.iter().skip(offset).step_by(2).cloned().collect())
    }

    /// Inverse of [`parity_part`]: `x^offset * s(x^2)`.
    pub fn from_parity(s: &Self, offset: usize) -> Self {
        let mut coeffs = vec![S::zero(); 2 * s.coeffs.len() + offset];
        for (i, c) in s.coeffs.iter().enumerate() {
            coeffs[2 * i + offset] = c.clone();
        }
        Self::new(coeffs)
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> UniPoly<T> {
        UniPoly::new(self.coeffs.iter().map(f).collect())
    }
}

/// Relative tolerance used for float divisibility tests.
pub const FLOAT_DIVISIBILITY_TOL: f64 = 1e-9;

pub(crate) fn check_remainder<S: Field>(rem_norm: f64, scale: f64) -> Result<()> {
    let ok = if S::is_exact() {
        rem_norm == 0.0
    } else {
        rem_norm <= FLOAT_DIVISIBILITY_TOL * scale.max(1.0)
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NonDivisible { remainder: rem_norm })
    }
}

/// Product of linear factors `(x - r)`.
pub fn from_roots<S: Field>(roots: &[S]) -> UniPoly<S> {
    roots
        .iter()
        .fold(UniPoly::one(), |acc, r| &acc * &UniPoly::linear_root(r.clone()))
}

impl<S: Field> Add for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn add(self, rhs: Self) -> UniPoly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<S: Field> Sub for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn sub(self, rhs: Self) -> UniPoly<S> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<S: Field> Mul for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn mul(self, rhs: Self) -> UniPoly<S> {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![S::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        UniPoly::new(out)
    }
}

impl<S: Field> Neg for &UniPoly<S> {
    type Output = UniPoly<S>;
    fn neg(self) -> UniPoly<S> {
        UniPoly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Field> $tr for UniPoly<S> {
            type Output = UniPoly<S>;
            fn $m(self, rhs: Self) -> UniPoly<S> {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<S: Field + fmt::Display> fmt::Display for UniPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "({c})x")?,
                _ => write!(f, "({c})x^{i}")?,
            }
        }
        Ok(())
    }
}
