use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, Integer, One, Signed, Zero};

use crate::error::{Error, Result};

/// Half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfInt(pub i64);

impl HalfInt {
    pub fn int(n: i64) -> Self {
        Self(2 * n)
    }
    pub fn half(n_halves: i64) -> Self {
        Self(n_halves)
    }
    pub fn doubled(self) -> i64 {
        self.0
    }
    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Finitely supported Laurent polynomial in `t = q^{1/2}` with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct QLaurent {
    terms: BTreeMap<i64, BigInt>,
}

impl QLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0)
    }

    /// `c * t^e`.
    pub fn monomial(c: BigInt, t_exp: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(t_exp, c);
        }
        Self { terms }
    }

    /// `q^k` for half-integer `k`.
    pub fn q_power(k: HalfInt) -> Self {
        Self::monomial(BigInt::one(), k.doubled())
    }

    /// The bracket `[k]_q = 1 - q^k`.
    pub fn bracket(k: HalfInt) -> Self {
        &Self::one() - &Self::q_power(k)
    }

    pub fn from_terms(it: impl IntoIterator<Item = (i64, i64)>) -> Self {
        let mut out = Self::zero();
        for (e, c) in it {
            out = &out + &Self::monomial(BigInt::from(c), e);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<i64, BigInt> {
        &self.terms
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Value at `t = 1` (equivalently `q = 1`).
    pub fn at_one(&self) -> BigInt {
        self.terms.values().fold(BigInt::zero(), |a, c| a + c)
    }

    /// Evaluates at a real `t`.
    pub fn eval_t(&self, t: f64) -> f64 {
        use num::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| c.to_f64().unwrap_or(f64::NAN) * t.powi(*e as i32))
            .sum()
    }

    fn shifted(&self, by: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (e + by, c.clone())).collect() }
    }

    /// Splits into `t^shift * p(t)` with `p(0) != 0`; `p` is returned densely.
    fn to_shifted_dense(&self) -> (i64, Vec<BigInt>) {
        match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => {
                let mut p = vec![BigInt::zero(); (hi - lo + 1) as usize];
                for (e, c) in &self.terms {
                    p[(e - lo) as usize] = c.clone();
                }
                (lo, p)
            }
            _ => (0, Vec::new()),
        }
    }

    fn from_dense(shift: i64, p: &[BigInt]) -> Self {
        Self {
            terms: p
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (shift + i as i64, c.clone()))
                .collect(),
        }
    }

    /// Renders the Laurent polynomial in powers of `q`.
    pub fn to_q_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = q_monomial(*e);
            if mono.is_empty() {
                out.push_str(&mag.to_string());
            } else if mag.is_one() {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{mag}{mono}"));
            }
        }
        out
    }
}

fn q_monomial(t_exp: i64) -> String {
    match t_exp {
        0 => String::new(),
        2 => "q".to_string(),
        e if e % 2 == 0 => format!("q^{{{}}}", e / 2),
        e => format!("q^{{{}/2}}", e),
    }
}

impl Add for &QLaurent {
    type Output = QLaurent;
    fn add(self, rhs: Self) -> QLaurent {
        let mut terms = self.terms.clone();
        for (e, c) in &rhs.terms {
            let v = terms.entry(*e).or_insert_with(BigInt::zero);
            *v += c;
            if v.is_zero() {
                terms.remove(e);
            }
        }
        QLaurent { terms }
    }
}

impl Neg for &QLaurent {
    type Output = QLaurent;
    fn neg(self) -> QLaurent {
        QLaurent { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl Sub for &QLaurent {
    type Output = QLaurent;
    fn sub(self, rhs: Self) -> QLaurent {
        self + &(-rhs)
    }
}

impl Mul for &QLaurent {
    type Output = QLaurent;
    fn mul(self, rhs: Self) -> QLaurent {
        let mut out = QLaurent::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                out = &out + &QLaurent::monomial(c1 * c2, e1 + e2);
            }
        }
        out
    }
}

/// Product convention for half-integer q-factorials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorialConvention {
    /// `[k]_q [k-1]_q ... [1/2]_q` for half-integer `k` (the literal definition).
    Full,
    /// `[k]_q [k-1]_q ... [3/2]_q`: the half bracket is left out.
    OmitHalf,
}

/// `[k]_q!` for an integer or half-integer `k >= 0`.
pub fn q_factorial(k: HalfInt, convention: FactorialConvention) -> QLaurent {
    let lowest = if k.is_integer() {
        2
    } else {
        match convention {
            FactorialConvention::Full => 1,
            FactorialConvention::OmitHalf => 3,
        }
    };
    let mut acc = QLaurent::one();
    let mut j = k.doubled();
    while j >= lowest {
        acc = &acc * &QLaurent::bracket(HalfInt(j));
        j -= 2;
    }
    acc
}

/// Ratio of Laurent polynomials in `t = q^{1/2}`; canonical after [`q_normalize`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QRational {
    pub num: QLaurent,
    pub den: QLaurent,
}

impl QRational {
    pub fn new(num: QLaurent, den: QLaurent) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den })
    }

    pub fn from_laurent(num: QLaurent) -> Self {
        Self { num, den: QLaurent::one() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self { num: &self.num * &other.num, den: &self.den * &other.den }
    }

    /// Value of the (already reduced) function at real `t`.
    pub fn eval_t(&self, t: f64) -> f64 {
        self.num.eval_t(t) / self.den.eval_t(t)
    }

    pub fn to_q_string(&self) -> String {
        if self.den == QLaurent::one() {
            self.num.to_q_string()
        } else {
            format!("({})/({})", self.num.to_q_string(), self.den.to_q_string())
        }
    }
}

impl fmt::Display for QRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_q_string())
    }
}

/// Reduces to canonical form: `num = t^s N(t)`, `den = D(t)` with `D(0) != 0`,
/// `gcd(N, D) = 1` in `Q[t]`, integer coefficients with no common content and
/// positive leading coefficient of `D`.
pub fn q_normalize(x: &QRational) -> Result<QRational> {
    if x.den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    if x.num.is_zero() {
        return Ok(QRational { num: QLaurent::zero(), den: QLaurent::one() });
    }
    let (sn, n) = x.num.to_shifted_dense();
    let (sd, d) = x.den.to_shifted_dense();
    let g = zpoly::gcd(&n, &d);
    let mut n = zpoly::exact_div(&n, &g);
    let mut d = zpoly::exact_div(&d, &g);
    let content = zpoly::content(&n).gcd(&zpoly::content(&d));
    for c in n.iter_mut().chain(d.iter_mut()) {
        *c = &*c / &content;
    }
    if d.last().map_or(false, Signed::is_negative) {
        for c in n.iter_mut().chain(d.iter_mut()) {
            *c = -&*c;
        }
    }
    let (n_shift, n) = zpoly::strip_low(&n);
    let (d_shift, d) = zpoly::strip_low(&d);
    Ok(QRational {
        num: QLaurent::from_dense(sn - sd + n_shift as i64 - d_shift as i64, &n),
        den: QLaurent::from_dense(0, &d),
    })
}

/// Value at `q = 1` of the reduced rational function.
pub fn q_limit_at_one(x: &QRational) -> Result<BigRational> {
    let r = q_normalize(x)?;
    let den = r.den.at_one();
    if den.is_zero() {
        return Err(Error::PoleAtOne);
    }
    Ok(BigRational::new(r.num.at_one(), den))
}

impl QLaurent {
    /// Shift by a half-integer power of `q`.
    pub fn times_q_power(&self, k: HalfInt) -> Self {
        self.shifted(k.doubled())
    }
}

/// Dense integer polynomial helpers (`p[i]` = coefficient of `t^i`).
mod zpoly {
    use num::{BigInt, Integer, One, Signed, Zero};

    fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
        while p.last().map_or(false, Zero::is_zero) {
            p.pop();
        }
        p
    }

    pub fn content(p: &[BigInt]) -> BigInt {
        let c = p.iter().fold(BigInt::zero(), |a, c| a.gcd(c));
        if c.is_zero() {
            BigInt::one()
        } else {
            c
        }
    }

    fn primitive(p: Vec<BigInt>) -> Vec<BigInt> {
        let c = content(&p);
        let mut p: Vec<BigInt> = p.into_iter().map(|x| x / &c).collect();
        if p.last().map_or(false, Signed::is_negative) {
            p.iter_mut().for_each(|x| *x = -&*x);
        }
        p
    }

    /// Pseudo-remainder of `a` by `b`.
    fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut r = a.to_vec();
        let db = b.len() - 1;
        let lb = &b[db];
        while r.len() > db && !r.is_empty() {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            for x in r.iter_mut() {
                *x = &*x * lb;
            }
            for (j, bc) in b.iter().enumerate() {
                let idx = dr - db + j;
                r[idx] = &r[idx] - &lr * bc;
            }
            r = trim(r);
        }
        r
    }

    /// Primitive gcd with positive leading coefficient.
    pub fn gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let (mut a, mut b) = (primitive(trim(a.to_vec())), primitive(trim(b.to_vec())));
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_empty() {
            let r = prem(&a, &b);
            a = b;
            b = if r.is_empty() { r } else { primitive(r) };
        }
        primitive(a)
    }

    /// Exact quotient in `Z[t]`; `g` must divide `a`.
    pub fn exact_div(a: &[BigInt], g: &[BigInt]) -> Vec<BigInt> {
        let dg = g.len() - 1;
        let mut r = a.to_vec();
        if r.len() <= dg {
            return vec![BigInt::zero(); 0];
        }
        let mut q = vec![BigInt::zero(); r.len() - dg];
        for k in (0..q.len()).rev() {
            let (c, rem) = r[k + dg].div_rem(&g[dg]);
            debug_assert!(rem.is_zero(), "non-exact division in Z[t]");
            for (j, gc) in g.iter().enumerate() {
                r[k + j] = &r[k + j] - &c * gc;
            }
            q[k] = c;
        }
        debug_assert!(r.iter().all(Zero::is_zero));
        trim(q)
    }

    pub fn strip_low(p: &[BigInt]) -> (usize, Vec<BigInt>) {
        let lo = p.iter().position(|c| !c.is_zero()).unwrap_or(0);
        (lo, p[lo..].to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn br(k2: i64) -> QLaurent {
        QLaurent::bracket(HalfInt(k2))
    }

    #[test]
    fn integer_factorial() {
        let f3 = q_factorial(HalfInt::int(3), FactorialConvention::Full);
        assert_eq!(f3, &(&br(6) * &br(4)) * &br(2));
        assert_eq!(q_factorial(HalfInt::int(0), FactorialConvention::Full), QLaurent::one());
    }

    #[test]
    fn half_integer_factorial() {
        let k = HalfInt::half(3);
        assert_eq!(q_factorial(k, FactorialConvention::Full), &br(3) * &br(1));
        assert_eq!(q_factorial(k, FactorialConvention::OmitHalf), br(3));
        assert_eq!(q_factorial(HalfInt::half(1), FactorialConvention::OmitHalf), QLaurent::one());
    }

    #[test]
    fn factorial_degree() {
        for k in 0..7 {
            let f = q_factorial(HalfInt::int(k), FactorialConvention::Full);
            assert_eq!(f.max_exp().unwrap(), k * (k + 1));
        }
    }

    #[test]
    fn normalize_cancels_cyclotomic_factors() {
        let r = QRational::new(br(6), br(2)).unwrap();
        let n = q_normalize(&r).unwrap();
        assert_eq!(n.num, QLaurent::from_terms([(0, 1), (2, 1), (4, 1)]));
        assert_eq!(n.den, QLaurent::one());

        let r = QRational::new(br(6), br(3)).unwrap();
        let n = q_normalize(&r).unwrap();
        assert_eq!(n.num, QLaurent::from_terms([(0, 1), (3, 1)]));
        assert_eq!(n.den, QLaurent::one());
    }

    #[test]
    fn normalize_zero_and_zero_den() {
        let r = QRational::new(QLaurent::zero(), br(2)).unwrap();
        let n = q_normalize(&r).unwrap();
        assert!(n.num.is_zero());
        assert_eq!(n.den, QLaurent::one());
        assert_eq!(QRational::new(QLaurent::one(), QLaurent::zero()), Err(Error::ZeroDenominator));
    }

    #[test]
    fn limits() {
        let r = QRational::new(br(6), br(2)).unwrap();
        assert_eq!(q_limit_at_one(&r).unwrap(), BigRational::from_integer(3.into()));
        // -t^{-1} (1 + t^3) / (1 + t)
        let num = &QLaurent::monomial((-1).into(), -1) * &QLaurent::from_terms([(0, 1), (3, 1)]);
        let den = QLaurent::from_terms([(0, 1), (1, 1)]);
        let r = QRational::new(num, den).unwrap();
        assert_eq!(q_limit_at_one(&r).unwrap(), BigRational::from_integer((-1).into()));
        let r = QRational::from_laurent(br(2));
        assert_eq!(q_limit_at_one(&r).unwrap(), BigRational::zero());
        let pole = QRational::new(QLaurent::one(), br(2)).unwrap();
        assert_eq!(q_limit_at_one(&pole), Err(Error::PoleAtOne));
    }

    #[test]
    fn q_strings() {
        let p = QLaurent::from_terms([(-2, -1), (0, -1), (2, -1)]);
        assert_eq!(p.to_q_string(), "-q^{-1} - 1 - q");
        let p = QLaurent::from_terms([(-1, -1), (0, 1), (1, -1)]);
        assert_eq!(p.to_q_string(), "-q^{-1/2} + 1 - q^{1/2}");
    }

    #[test]
    fn normalize_is_idempotent_and_value_preserving() {
        let num = &(&br(8) * &br(3)) * &QLaurent::monomial(2.into(), -3);
        let den = &(&br(4) * &br(1)) * &QLaurent::monomial((-6).into(), 1);
        let x = QRational::new(num.clone(), den.clone()).unwrap();
        let n1 = q_normalize(&x).unwrap();
        assert_eq!(q_normalize(&n1).unwrap(), n1);
        assert_eq!(&num * &n1.den, &n1.num * &den);
    }
}
