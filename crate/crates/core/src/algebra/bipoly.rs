use std::ops::{Add, Mul, Sub};

use super::poly::{check_remainder, UniPoly};
use super::scalar::Field;
use crate::error::{Error, Result};

/// Dense bivariate polynomial stored as a polynomial in `x1` whose
/// coefficients are polynomials in `x2`: `rows[i]` multiplies `x1^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly<S> {
    rows: Vec<UniPoly<S>>,
}

impl<S: Field> BiPoly<S> {
    pub fn from_rows(mut rows: Vec<UniPoly<S>>) -> Self {
        while rows.last().map_or(false, UniPoly::is_zero) {
            rows.pop();
        }
        Self { rows }
    }

    /// Builds from a dense matrix, entry `(i, j)` = coefficient of `x1^i x2^j`.
    pub fn from_matrix(m: Vec<Vec<S>>) -> Self {
        Self::from_rows(m.into_iter().map(UniPoly::new).collect())
    }

    pub fn zero() -> Self {
        Self { rows: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Self::from_rows(vec![UniPoly::constant(c)])
    }

    /// `p(x1)`.
    pub fn in_x1(p: &UniPoly<S>) -> Self {
        Self::from_rows(p.coeffs().iter().map(|c| UniPoly::constant(c.clone())).collect())
    }

    /// `p(x2)`.
    pub fn in_x2(p: &UniPoly<S>) -> Self {
        Self::from_rows(vec![p.clone()])
    }

    /// `p(x1) * q(x2)`.
    pub fn outer(p: &UniPoly<S>, q: &UniPoly<S>) -> Self {
        Self::from_rows(p.coeffs().iter().map(|c| q.scale(c)).collect())
    }

    /// `p(x1 + x2)`.
    pub fn at_sum(p: &UniPoly<S>) -> Self {
        let sum = &Self::in_x1(&UniPoly::x()) + &Self::in_x2(&UniPoly::x());
        let mut acc = Self::zero();
        let mut power = Self::constant(S::one());
        for c in p.coeffs() {
            acc = &acc + &power.scale(c);
            power = &power * &sum;
        }
        acc
    }

    pub fn rows(&self) -> &[UniPoly<S>] {
        &self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    /// Coefficient of `x1^i x2^j`.
    pub fn coeff(&self, i: usize, j: usize) -> S {
        self.rows.get(i).map_or_else(S::zero, |r| r.coeff(j))
    }

    pub fn degree_x1(&self) -> Option<usize> {
        self.rows.len().checked_sub(1)
    }

    pub fn degree_x2(&self) -> Option<usize> {
        self.rows.iter().filter_map(UniPoly::degree).max()
    }

    pub fn scale(&self, c: &S) -> Self {
        Self::from_rows(self.rows.iter().map(|r| r.scale(c)).collect())
    }

    pub fn max_norm(&self) -> f64 {
        self.rows.iter().map(UniPoly::max_norm).fold(0.0, f64::max)
    }

    /// Dense matrix view (rows padded to a common width).
    pub fn to_matrix(&self) -> Vec<Vec<S>> {
        let w = self.degree_x2().map_or(0, |d| d + 1);
        self.rows.iter().map(|r| r.padded(w)).collect()
    }
}

/// Exact quotient `n / d` in the bivariate ring.
///
/// Division runs in `x1` with coefficients in `S[x2]`; each leading
/// coefficient must itself divide exactly. Fails with `NonDivisible` on a
/// nonzero remainder (relative tolerance `1e-9` for floats).
pub fn exact_bivariate_quotient<S: Field>(n: &BiPoly<S>, d: &BiPoly<S>) -> Result<BiPoly<S>> {
    let dd = d.degree_x1().ok_or(Error::ZeroDenominator)?;
    let lead = d.rows[dd].clone();
    let scale = n.max_norm();
    let mut rem = n.rows.clone();
    if rem.len() <= dd {
        check_remainder::<S>(n.max_norm(), scale)?;
        return Ok(BiPoly::zero());
    }
    let mut quot = vec![UniPoly::zero(); rem.len() - dd];
    for k in (0..quot.len()).rev() {
        let (c, r) = rem[k + dd].div_rem(&lead)?;
        check_remainder::<S>(r.max_norm(), scale)?;
        for (j, dc) in d.rows.iter().enumerate() {
            rem[k + j] = &rem[k + j] - &(&c * dc);
        }
        quot[k] = c;
    }
    let residual = rem[..dd].iter().map(UniPoly::max_norm).fold(0.0, f64::max);
    check_remainder::<S>(residual, scale)?;
    Ok(BiPoly::from_rows(quot))
}

impl<S: Field> Add for &BiPoly<S> {
    type Output = BiPoly<S>;
    fn add(self, rhs: Self) -> BiPoly<S> {
        let n = self.rows.len().max(rhs.rows.len());
        let zero = UniPoly::zero();
        BiPoly::from_rows(
            (0..n)
                .map(|i| self.rows.get(i).unwrap_or(&zero) + rhs.rows.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl<S: Field> Sub for &BiPoly<S> {
    type Output = BiPoly<S>;
    fn sub(self, rhs: Self) -> BiPoly<S> {
        let n = self.rows.len().max(rhs.rows.len());
        let zero = UniPoly::zero();
        BiPoly::from_rows(
            (0..n)
                .map(|i| self.rows.get(i).unwrap_or(&zero) - rhs.rows.get(i).unwrap_or(&zero))
                .collect(),
        )
    }
}

impl<S: Field> Mul for &BiPoly<S> {
    type Output = BiPoly<S>;
    fn mul(self, rhs: Self) -> BiPoly<S> {
        if self.is_zero() || rhs.is_zero() {
            return BiPoly::zero();
        }
        let mut out = vec![UniPoly::zero(); self.rows.len() + rhs.rows.len() - 1];
        for (i, a) in self.rows.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.rows.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        BiPoly::from_rows(out)
    }
}
