//! Betti numbers of affine Jacobians and their strata, and q-Euler
//! characteristics of the graded de Rham complexes.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Zero};

use crate::algebra::{q_factorial, q_limit_at_one, q_normalize, FactorialConvention, HalfInt, QLaurent, QRational};
use crate::error::{Error, Result};
use crate::parallel::par_map;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SystemKind {
    OddMumford,
    EvenMumford,
    PrymI,
    PrymII,
}

impl SystemKind {
    pub const ALL: [SystemKind; 4] = [Self::OddMumford, Self::EvenMumford, Self::PrymI, Self::PrymII];

    pub fn name(self) -> &'static str {
        match self {
            Self::OddMumford => "odd-mumford",
            Self::EvenMumford => "even-mumford",
            Self::PrymI => "prym1",
            Self::PrymII => "prym2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "odd" | "odd-mumford" | "mumford" => Ok(Self::OddMumford),
            "even" | "even-mumford" => Ok(Self::EvenMumford),
            "prym1" | "prym-i" | "prymi" => Ok(Self::PrymI),
            "prym2" | "prym-ii" | "prymii" => Ok(Self::PrymII),
            _ => Err(Error::Parse(format!("unknown system kind {s:?}"))),
        }
    }
}

impl fmt::Display for SystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `C(n, k)`, zero unless `0 <= k <= n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn alternating(terms: impl Iterator<Item = (i64, BigInt)>) -> BigInt {
    terms.fold(BigInt::zero(), |acc, (k, b)| if k % 2 == 0 { acc + b } else { acc - b })
}

fn sign(g: i64) -> BigInt {
    if g % 2 == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// `dim H^k` of the generic level set of `kind` (zero outside `0..=g`).
pub fn betti_affine(kind: SystemKind, g: usize, k: i64) -> BigInt {
    let (g, gi) = (g as i64, g);
    if k < 0 || k > g {
        return BigInt::zero();
    }
    match kind {
        SystemKind::OddMumford => betti_stratum(gi, gi, k, Stratum::Plain),
        SystemKind::EvenMumford => betti_stratum(gi, gi, k, Stratum::Pm),
        SystemKind::PrymI => betti_stratum(gi, gi, k, Stratum::ZeroPm),
        SystemKind::PrymII => BigInt::from(2) * betti_stratum(gi, gi, k, Stratum::ZeroPm),
    }
}

/// Which translates of `W_{r-1}` are removed from `W_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratum {
    /// `W_r \ W_{r-1}`.
    Plain,
    /// `W_r \ W_{r-1}^{+-}`.
    Pm,
    /// `W_r \ W_{r-1}^{0+-}`.
    ZeroPm,
}

impl Stratum {
    pub const ALL: [Stratum; 3] = [Self::Plain, Self::Pm, Self::ZeroPm];

    pub fn name(self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Pm => "pm",
            Self::ZeroPm => "zero_pm",
        }
    }
}

/// `h^k` of a stratum `W_r` minus translates of `W_{r-1}` (zero outside `0..=r`).
pub fn betti_stratum(g: usize, r: usize, k: i64, variant: Stratum) -> BigInt {
    if k < 0 || k > r as i64 {
        return BigInt::zero();
    }
    let g = g as i64;
    match variant {
        Stratum::Plain => binomial(2 * g, k) - binomial(2 * g, k - 2),
        Stratum::Pm => binomial(2 * g + 1, k) - binomial(2 * g + 1, k - 2),
        Stratum::ZeroPm => binomial(2 * g + 2, k),
    }
}

/// `dim H^k(W_r)` for `0 <= k <= 2r` (zero otherwise).
pub fn betti_w(g: usize, r: usize, k: i64) -> BigInt {
    let (g, r) = (g as i64, r as i64);
    if k < 0 || k > 2 * r {
        BigInt::zero()
    } else if k <= r {
        binomial(2 * g, k)
    } else {
        binomial(2 * g, 2 * r - k)
    }
}

/// Euler characteristic of the generic level set: `(alternating sum, closed form)`.
pub fn euler_char(kind: SystemKind, g: usize) -> (BigInt, BigInt) {
    let alt = alternating((0..=g as i64).map(|k| (k, betti_affine(kind, g, k))));
    let gi = g as i64;
    let s = sign(gi);
    let closed = match kind {
        SystemKind::OddMumford => s * (binomial(2 * gi, gi) - binomial(2 * gi, gi - 1)),
        SystemKind::EvenMumford => s * (binomial(2 * gi + 1, gi) - binomial(2 * gi + 1, gi - 1)),
        SystemKind::PrymI => s * binomial(2 * gi + 1, gi),
        SystemKind::PrymII => s * binomial(2 * gi + 2, gi + 1),
    };
    (alt, closed)
}

/// `chi(W_r)`: `(alternating sum of betti_w, (-1)^r (C(2g-2, r) - C(2g-2, r-2)))`.
pub fn euler_w(g: usize, r: usize) -> (BigInt, BigInt) {
    let alt = alternating((0..=2 * r as i64).map(|k| (k, betti_w(g, r, k))));
    let (g, r) = (g as i64, r as i64);
    let closed = sign(r) * (binomial(2 * g - 2, r) - binomial(2 * g - 2, r - 2));
    (alt, closed)
}

/// Degrees of the coordinate ring generators, the spectral relations and the
/// time one-forms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedPresentation {
    pub generators: Vec<HalfInt>,
    pub relations: Vec<HalfInt>,
    pub time_forms: Vec<HalfInt>,
}

fn ints(range: std::ops::RangeInclusive<i64>) -> impl Iterator<Item = HalfInt> {
    range.map(HalfInt::int)
}

pub fn presentation(kind: SystemKind, g: usize) -> GradedPresentation {
    let g = g as i64;
    let mut generators: Vec<HalfInt> = ints(1..=g).collect();
    let (relations, time_forms): (Vec<HalfInt>, Vec<HalfInt>) = match kind {
        SystemKind::OddMumford => {
            generators.extend((1..=g).map(|i| HalfInt(2 * i + 1)));
            generators.extend(ints(1..=g + 1));
            (ints(1..=2 * g + 1).collect(), (1..=g).map(|i| HalfInt(1 - 2 * i)).collect())
        }
        SystemKind::EvenMumford => {
            generators.extend(ints(2..=g + 1));
            generators.extend(ints(1..=g + 2));
            (ints(1..=2 * g + 2).collect(), (1..=g).map(|i| HalfInt::int(-i)).collect())
        }
        SystemKind::PrymI => {
            generators.extend(ints(1..=g));
            generators.extend(ints(1..=g + 1));
            (ints(1..=2 * g + 1).collect(), (1..=g).map(|i| HalfInt::int(-i)).collect())
        }
        SystemKind::PrymII => {
            generators.extend(ints(1..=g + 1));
            generators.extend(ints(1..=g + 1));
            (ints(1..=2 * g + 2).collect(), (1..=g).map(|i| HalfInt::int(-i)).collect())
        }
    };
    GradedPresentation { generators, relations, time_forms }
}

/// `prod_num (1 - q^d) / prod_den (1 - q^d)` after cancelling common brackets.
fn bracket_ratio(num: &[HalfInt], den: &[HalfInt]) -> Result<QRational> {
    let mut count: BTreeMap<HalfInt, i64> = BTreeMap::new();
    for d in num {
        *count.entry(*d).or_default() += 1;
    }
    for d in den {
        *count.entry(*d).or_default() -= 1;
    }
    let (mut n, mut dd) = (QLaurent::one(), QLaurent::one());
    for (deg, c) in count {
        for _ in 0..c.abs() {
            if c > 0 {
                n = &n * &QLaurent::bracket(deg);
            } else {
                dd = &dd * &QLaurent::bracket(deg);
            }
        }
    }
    q_normalize(&QRational::new(n, dd)?)
}

/// Hilbert-series (regular sequence) value of `chi_q(C_0)`: relations and
/// time forms over generators.
pub fn chi_q_hilbert(kind: SystemKind, g: usize) -> Result<QRational> {
    if g == 0 {
        return Err(Error::InvalidArgument("g must be at least 1".into()));
    }
    let p = presentation(kind, g);
    let num: Vec<HalfInt> = p.relations.iter().chain(&p.time_forms).copied().collect();
    bracket_ratio(&num, &p.generators)
}

/// The displayed product formula for `chi_q(C_0)`.
pub fn chi_q_closed(kind: SystemKind, g: usize, convention: FactorialConvention) -> Result<QRational> {
    if g == 0 {
        return Err(Error::InvalidArgument("g must be at least 1".into()));
    }
    let gi = g as i64;
    let fact = |k: HalfInt| q_factorial(k, convention);
    let int = HalfInt::int;
    let (prefactor_t, num, den) = match kind {
        SystemKind::OddMumford => (
            -gi * gi,
            &QLaurent::bracket(HalfInt(1)) * &fact(int(2 * gi + 1)),
            &(&fact(HalfInt(2 * gi + 1)) * &fact(int(gi))) * &fact(int(gi + 1)),
        ),
        SystemKind::EvenMumford => (
            -gi * (gi + 1),
            &QLaurent::bracket(int(1)) * &fact(int(2 * gi + 2)),
            &fact(int(gi + 1)) * &fact(int(gi + 2)),
        ),
        SystemKind::PrymI => (-gi * (gi + 1), fact(int(2 * gi + 1)), &fact(int(gi)) * &fact(int(gi + 1))),
        SystemKind::PrymII => (-gi * (gi + 1), fact(int(2 * gi + 2)), &fact(int(gi + 1)) * &fact(int(gi + 1))),
    };
    let s = if g % 2 == 0 { 1 } else { -1 };
    let num = &QLaurent::monomial(BigInt::from(s), prefactor_t) * &num;
    q_normalize(&QRational::new(num, den)?)
}

/// `lim_{q -> 1} chi_q_hilbert(kind, g)`.
pub fn q_euler_limit(kind: SystemKind, g: usize) -> Result<BigInt> {
    let l = q_limit_at_one(&chi_q_hilbert(kind, g)?)?;
    integral(l)
}

fn integral(l: BigRational) -> Result<BigInt> {
    if l.is_integer() {
        Ok(l.to_integer())
    } else {
        Err(Error::InvalidArgument(format!("limit {l} is not an integer")))
    }
}

/// Oracle-versus-closed-form comparison for one `(kind, g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QEulerReport {
    pub kind: SystemKind,
    pub g: usize,
    pub convention: FactorialConvention,
    pub hilbert: QRational,
    pub closed: QRational,
    pub agree: bool,
    pub hilbert_limit: BigInt,
    /// `None` when the closed form has a pole at `q = 1`.
    pub closed_limit: Option<BigInt>,
    pub euler: BigInt,
}

impl QEulerReport {
    /// The oracle limit equals the Euler number; the closed form is required
    /// to agree except for the odd system, whose convention is only reported.
    pub fn passed(&self) -> bool {
        self.hilbert_limit == self.euler && (self.kind == SystemKind::OddMumford || self.agree)
    }
}

pub fn q_euler_report(kind: SystemKind, g: usize, convention: FactorialConvention) -> Result<QEulerReport> {
    let hilbert = chi_q_hilbert(kind, g)?;
    let closed = chi_q_closed(kind, g, convention)?;
    let closed_limit = match q_limit_at_one(&closed) {
        Ok(l) => Some(integral(l)?),
        Err(Error::PoleAtOne) => None,
        Err(e) => return Err(e),
    };
    Ok(QEulerReport {
        kind,
        g,
        convention,
        agree: hilbert == closed,
        hilbert_limit: q_euler_limit(kind, g)?,
        euler: euler_char(kind, g).1,
        hilbert,
        closed,
        closed_limit,
    })
}

/// One CSV row of the cohomology table.
#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub kind: SystemKind,
    pub g: usize,
    pub k: usize,
    pub betti: BigInt,
    pub euler: BigInt,
    pub chi_q: String,
    pub limit: BigInt,
}

/// Rows for all kinds and `g` in `1..=max_g`, `k` in `0..=g`.
pub fn cohomology_table(max_g: usize) -> Result<Vec<TableRow>> {
    let jobs: Vec<(SystemKind, usize)> =
        SystemKind::ALL.iter().flat_map(|&kind| (1..=max_g).map(move |g| (kind, g))).collect();
    let blocks = par_map(jobs, |(kind, g)| -> Result<Vec<TableRow>> {
        let chi = chi_q_hilbert(kind, g)?;
        let limit = q_euler_limit(kind, g)?;
        let euler = euler_char(kind, g).0;
        Ok((0..=g)
            .map(|k| TableRow {
                kind,
                g,
                k,
                betti: betti_affine(kind, g, k as i64),
                euler: euler.clone(),
                chi_q: chi.to_q_string(),
                limit: limit.clone(),
            })
            .collect())
    });
    Ok(blocks.into_iter().collect::<Result<Vec<_>>>()?.into_iter().flatten().collect())
}
