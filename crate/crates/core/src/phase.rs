//! Phase points for the Mumford-type systems, the Lax-chain systems and the
//! Noumi-Yamada chains, together with the spectral maps.
//!
//! A phase point is its family plus a flat coordinate vector in subscript
//! order. The [`Layout`] of a family records where each coordinate sits in
//! the materialized polynomials (u, v, w or a, b, c, d); monic leading terms
//! are part of the layout and never stored.

use std::fmt;

use rand::Rng;
use serde_json::{json, Map, Value};

use crate::algebra::{format_rational, parse_rational, Field, Rational, UniPoly};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Mumford,
    EvenMumford,
    PrymI,
    PrymII,
    DLaxI,
    DLaxII,
    NYI,
    NYII,
}

impl Kind {
    pub const FRAMED: [Kind; 6] =
        [Kind::Mumford, Kind::EvenMumford, Kind::PrymI, Kind::PrymII, Kind::DLaxI, Kind::DLaxII];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Mumford => "mumford",
            Kind::EvenMumford => "even-mumford",
            Kind::PrymI => "prym1",
            Kind::PrymII => "prym2",
            Kind::DLaxI => "dlax1",
            Kind::DLaxII => "dlax2",
            Kind::NYI => "ny1",
            Kind::NYII => "ny2",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let k = match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "mumford" | "odd-mumford" => Kind::Mumford,
            "even-mumford" | "evenmumford" => Kind::EvenMumford,
            "prym1" | "prym-i" | "prymi" => Kind::PrymI,
            "prym2" | "prym-ii" | "prymii" => Kind::PrymII,
            "dlax1" | "dlax-i" | "dlaxi" => Kind::DLaxI,
            "dlax2" | "dlax-ii" | "dlaxii" => Kind::DLaxII,
            "ny1" | "ny-i" | "nyi" => Kind::NYI,
            "ny2" | "ny-ii" | "nyii" => Kind::NYII,
            _ => return Err(Error::InvalidArgument(format!("unknown family '{s}'"))),
        };
        Ok(k)
    }

    pub fn is_mumford_like(self) -> bool {
        matches!(self, Kind::Mumford | Kind::EvenMumford | Kind::PrymI | Kind::PrymII)
    }

    pub fn is_dlax(self) -> bool {
        matches!(self, Kind::DLaxI | Kind::DLaxII)
    }

    pub fn is_ny(self) -> bool {
        matches!(self, Kind::NYI | Kind::NYII)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Family {
    pub kind: Kind,
    pub g: usize,
}

impl Family {
    pub fn new(kind: Kind, g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidArgument("genus must be at least 1".into()));
        }
        Ok(Self { kind, g })
    }

    pub fn layout(&self) -> Layout {
        Layout::of(*self)
    }

    /// Number of stored coordinates.
    pub fn dim(&self) -> usize {
        match self.kind {
            Kind::NYI => 2 * self.g + 1,
            Kind::NYII => 2 * self.g + 2,
            _ => self.layout().coords.len(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} g={}", self.kind, self.g)
    }
}

/// Shape of one materialized polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyShape {
    pub name: &'static str,
    /// Degree of an implicit leading coefficient 1.
    pub monic: Option<usize>,
    /// Largest degree the polynomial may have.
    pub max_degree: usize,
}

/// One stored coordinate and the `(polynomial, degree)` slots it fills.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coord {
    pub name: String,
    pub slots: Vec<(usize, usize)>,
}

/// Coordinate layout and x2-exponent pattern of the D(x) expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub family: Family,
    pub polys: Vec<PolyShape>,
    pub coords: Vec<Coord>,
}

fn sub_name(prefix: &str, doubled: usize) -> String {
    if doubled % 2 == 0 {
        format!("{prefix}{}", doubled / 2)
    } else {
        format!("{prefix}{doubled}/2")
    }
}

impl Layout {
    pub fn of(family: Family) -> Self {
        let g = family.g;
        let mut coords = Vec::new();
        // n coefficients descending from `top` by `step`, subscripts from `first` (doubled)
        fn push_run(
            coords: &mut Vec<Coord>,
            (poly, prefix, n): (usize, &str, usize),
            (top, step, first): (usize, usize, usize),
        ) {
            for i in 0..n {
                coords.push(Coord {
                    name: sub_name(prefix, first + 2 * i),
                    slots: vec![(poly, top - step * i)],
                });
            }
        }
        let shape = |name, monic: Option<usize>, max_degree| PolyShape { name, monic, max_degree };
        let polys = match family.kind {
            Kind::Mumford => {
                push_run(&mut coords, (0, "u", g), (g - 1, 1, 2));
                push_run(&mut coords, (1, "v", g), (g - 1, 1, 3));
                push_run(&mut coords, (2, "w", g + 1), (g, 1, 2));
                vec![shape("u", Some(g), g), shape("v", None, g - 1), shape("w", Some(g + 1), g + 1)]
            }
            Kind::EvenMumford => {
                push_run(&mut coords, (0, "u", g), (g - 1, 1, 2));
                push_run(&mut coords, (1, "v", g), (g - 1, 1, 4));
                push_run(&mut coords, (2, "w", g + 2), (g + 1, 1, 2));
                vec![shape("u", Some(g), g), shape("v", None, g - 1), shape("w", Some(g + 2), g + 2)]
            }
            Kind::PrymI => {
                push_run(&mut coords, (0, "u", g), (2 * g - 2, 2, 2));
                push_run(&mut coords, (1, "v", g), (2 * g - 1, 2, 2));
                push_run(&mut coords, (2, "w", g + 1), (2 * g, 2, 2));
                vec![
                    shape("u", Some(2 * g), 2 * g),
                    shape("v", None, 2 * g - 1),
                    shape("w", Some(2 * g + 2), 2 * g + 2),
                ]
            }
            Kind::PrymII => {
                push_run(&mut coords, (0, "u", g), (2 * g - 1, 2, 2));
                push_run(&mut coords, (1, "v", g + 1), (2 * g, 2, 2));
                push_run(&mut coords, (2, "w", g + 1), (2 * g + 1, 2, 2));
                vec![
                    shape("u", Some(2 * g + 1), 2 * g + 1),
                    shape("v", None, 2 * g),
                    shape("w", Some(2 * g + 3), 2 * g + 3),
                ]
            }
            Kind::DLaxI | Kind::DLaxII => {
                let two = family.kind == Kind::DLaxII;
                // polys: a=0, b=1, c=2, d=3
                if two {
                    coords.push(Coord { name: "b0".into(), slots: vec![(1, g), (2, g + 1)] });
                }
                coords.push(Coord { name: "a1/2".into(), slots: vec![(0, g), (3, g)] });
                push_run(&mut coords, (0, "a", g), (g - 1, 1, 3));
                push_run(&mut coords, (3, "d", g), (g - 1, 1, 3));
                push_run(&mut coords, (1, "b", g), (g - 1, 1, 2));
                push_run(&mut coords, (2, "c", g + 1), (g, 1, 2));
                if two {
                    vec![
                        shape("a", Some(g + 1), g + 1),
                        shape("b", None, g),
                        shape("c", None, g + 1),
                        shape("d", Some(g + 1), g + 1),
                    ]
                } else {
                    vec![
                        shape("a", None, g),
                        shape("b", Some(g), g),
                        shape("c", Some(g + 1), g + 1),
                        shape("d", None, g),
                    ]
                }
            }
            Kind::NYI | Kind::NYII => {
                let n = if family.kind == Kind::NYI { 2 * g + 1 } else { 2 * g + 2 };
                for k in 1..=n {
                    coords.push(Coord { name: format!("q{k}"), slots: vec![] });
                }
                vec![]
            }
        };
        Self { family, polys, coords }
    }

    pub fn names(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.name.clone()).collect()
    }

    /// Exponent of x2 multiplying `D_i` (1-based `i`) in the D(x) expansion.
    pub fn pattern(&self, i: usize) -> usize {
        let g = self.family.g;
        match self.family.kind {
            Kind::PrymI => 2 * (g - i),
            Kind::PrymII => 2 * (g - i) + 1,
            _ => g - i,
        }
    }

    /// Stored coordinate occupying `(poly, degree)`, if any.
    pub fn coord_at(&self, poly: usize, degree: usize) -> Option<usize> {
        self.coords.iter().position(|c| c.slots.contains(&(poly, degree)))
    }

    /// Builds the full polynomials from a coordinate vector.
    pub fn materialize<S: Field>(&self, coords: &[S]) -> Vec<UniPoly<S>> {
        let mut dense: Vec<Vec<S>> =
            self.polys.iter().map(|p| vec![S::zero(); p.max_degree + 1]).collect();
        for (k, p) in self.polys.iter().enumerate() {
            if let Some(m) = p.monic {
                dense[k][m] = S::one();
            }
        }
        for (c, x) in self.coords.iter().zip(coords) {
            for &(p, d) in &c.slots {
                dense[p][d] = x.clone();
            }
        }
        dense.into_iter().map(UniPoly::new).collect()
    }

    /// Shape violations of a full polynomial tuple against this layout.
    pub fn check_polys<S: Field>(&self, polys: &[UniPoly<S>]) -> Vec<String> {
        let mut out = Vec::new();
        if polys.len() != self.polys.len() {
            out.push(format!("expected {} polynomials, got {}", self.polys.len(), polys.len()));
            return out;
        }
        for (k, (shape, p)) in self.polys.iter().zip(polys).enumerate() {
            if let Some(d) = p.degree() {
                if d > shape.max_degree {
                    out.push(format!("{}: degree {d} exceeds {}", shape.name, shape.max_degree));
                }
            }
            if let Some(m) = shape.monic {
                if p.coeff(m) != S::one() {
                    out.push(format!("{}: coefficient of x^{m} must be 1 (monic)", shape.name));
                }
            }
            for d in 0..=shape.max_degree {
                if Some(d) == shape.monic || self.coord_at(k, d).is_some() {
                    continue;
                }
                if !p.coeff(d).is_zero() {
                    out.push(format!("{}: coefficient of x^{d} must vanish (parity/degree shape)", shape.name));
                }
            }
        }
        for c in &self.coords {
            if let Some((&(p0, d0), rest)) = c.slots.split_first() {
                for &(p, d) in rest {
                    if polys[p].coeff(d) != polys[p0].coeff(d0) {
                        out.push(format!(
                            "shared coefficient {} differs between {} and {}",
                            c.name, self.polys[p0].name, self.polys[p].name
                        ));
                    }
                }
            }
        }
        out
    }

    /// Reads the coordinate vector back from full polynomials.
    pub fn read<S: Field>(&self, polys: &[UniPoly<S>]) -> Result<Vec<S>> {
        let v = self.check_polys(polys);
        if !v.is_empty() {
            return Err(Error::Shape(v));
        }
        Ok(self
            .coords
            .iter()
            .map(|c| {
                let (p, d) = c.slots[0];
                polys[p].coeff(d)
            })
            .collect())
    }
}

/// A point of one of the six framed families.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint<S> {
    pub family: Family,
    pub coords: Vec<S>,
}

impl<S: Field> PhasePoint<S> {
    pub fn new(family: Family, coords: Vec<S>) -> Result<Self> {
        let p = Self { family, coords };
        let v = p.validate();
        if v.is_empty() {
            Ok(p)
        } else {
            Err(Error::Shape(v))
        }
    }

    pub fn from_polys(family: Family, polys: &[UniPoly<S>]) -> Result<Self> {
        Self::new(family, family.layout().read(polys)?)
    }

    pub fn zero(family: Family) -> Self {
        Self { family, coords: vec![S::zero(); family.dim()] }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.family.kind.is_ny() {
            out.push("NY states are NYState values, not phase points".into());
        } else if self.coords.len() != self.family.dim() {
            out.push(format!(
                "{}: expected {} coordinates, got {}",
                self.family,
                self.family.dim(),
                self.coords.len()
            ));
        }
        out
    }

    pub fn polys(&self) -> Vec<UniPoly<S>> {
        self.family.layout().materialize(&self.coords)
    }

    pub fn map<T: Field>(&self, f: impl Fn(&S) -> T) -> PhasePoint<T> {
        PhasePoint { family: self.family, coords: self.coords.iter().map(f).collect() }
    }

    /// Value of `b0` for DLaxII points.
    pub fn b0(&self) -> Option<S> {
        (self.family.kind == Kind::DLaxII).then(|| self.coords[0].clone())
    }
}

/// Mumford point `(u, v, w)` in subscript order.
#[derive(Clone, Debug, PartialEq)]
pub struct MumfordPoint<S> {
    pub u: Vec<S>,
    pub v: Vec<S>,
    pub w: Vec<S>,
}

/// Even Mumford point `(u, v, w)` in subscript order.
#[derive(Clone, Debug, PartialEq)]
pub struct EvenMumfordPoint<S> {
    pub u: Vec<S>,
    pub v: Vec<S>,
    pub w: Vec<S>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    I,
    II,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Variant::I),
            "II" | "2" => Ok(Variant::II),
            _ => Err(Error::InvalidArgument(format!("unknown variant '{s}'"))),
        }
    }
}

/// Prym point; `u`, `v`, `w` hold the independent coefficients only.
#[derive(Clone, Debug, PartialEq)]
pub struct PrymPoint<S> {
    pub variant: Variant,
    pub u: Vec<S>,
    pub v: Vec<S>,
    pub w: Vec<S>,
}

/// Lax-chain point. `a` starts with the shared `a_{1/2}`; `d` starts at `d_{3/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DLaxPoint<S> {
    pub variant: Variant,
    pub a: Vec<S>,
    pub b: Vec<S>,
    pub c: Vec<S>,
    pub d: Vec<S>,
    pub b0: Option<S>,
}

fn split<S: Clone>(xs: &[S], lens: &[usize]) -> Vec<Vec<S>> {
    let mut out = Vec::new();
    let mut at = 0;
    for &l in lens {
        out.push(xs[at..at + l].to_vec());
        at += l;
    }
    out
}

fn genus_from(kind: Kind, len: usize, sub: usize) -> Result<usize> {
    if len < sub || len == 0 {
        return Err(Error::InvalidArgument(format!("{kind}: empty coordinate list")));
    }
    Ok(len - sub)
}

impl<S: Field> MumfordPoint<S> {
    pub fn genus(&self) -> usize {
        self.u.len()
    }
    pub fn to_phase(&self) -> Result<PhasePoint<S>> {
        let g = genus_from(Kind::Mumford, self.u.len(), 0)?;
        let coords = [self.u.clone(), self.v.clone(), self.w.clone()].concat();
        PhasePoint::new(Family::new(Kind::Mumford, g)?, coords)
    }
    pub fn from_phase(p: &PhasePoint<S>) -> Result<Self> {
        if p.family.kind != Kind::Mumford {
            return Err(Error::InvalidArgument(format!("expected mumford, got {}", p.family.kind)));
        }
        let g = p.family.g;
        let s = split(&p.coords, &[g, g, g + 1]);
        Ok(Self { u: s[0].clone(), v: s[1].clone(), w: s[2].clone() })
    }
}

impl<S: Field> EvenMumfordPoint<S> {
    pub fn to_phase(&self) -> Result<PhasePoint<S>> {
        let g = genus_from(Kind::EvenMumford, self.u.len(), 0)?;
        let coords = [self.u.clone(), self.v.clone(), self.w.clone()].concat();
        PhasePoint::new(Family::new(Kind::EvenMumford, g)?, coords)
    }
    pub fn from_phase(p: &PhasePoint<S>) -> Result<Self> {
        if p.family.kind != Kind::EvenMumford {
            return Err(Error::InvalidArgument(format!("expected even-mumford, got {}", p.family.kind)));
        }
        let g = p.family.g;
        let s = split(&p.coords, &[g, g, g + 2]);
        Ok(Self { u: s[0].clone(), v: s[1].clone(), w: s[2].clone() })
    }
}

impl<S: Field> PrymPoint<S> {
    pub fn to_phase(&self) -> Result<PhasePoint<S>> {
        let kind = match self.variant {
            Variant::I => Kind::PrymI,
            Variant::II => Kind::PrymII,
        };
        let g = genus_from(kind, self.u.len(), 0)?;
        let coords = [self.u.clone(), self.v.clone(), self.w.clone()].concat();
        PhasePoint::new(Family::new(kind, g)?, coords)
    }
    pub fn from_phase(p: &PhasePoint<S>) -> Result<Self> {
        let g = p.family.g;
        let (variant, lens) = match p.family.kind {
            Kind::PrymI => (Variant::I, [g, g, g + 1]),
            Kind::PrymII => (Variant::II, [g, g + 1, g + 1]),
            k => return Err(Error::InvalidArgument(format!("expected prym, got {k}"))),
        };
        let s = split(&p.coords, &lens);
        Ok(Self { variant, u: s[0].clone(), v: s[1].clone(), w: s[2].clone() })
    }
}

impl<S: Field> DLaxPoint<S> {
    pub fn to_phase(&self) -> Result<PhasePoint<S>> {
        let (kind, mut coords) = match (self.variant, &self.b0) {
            (Variant::I, None) => (Kind::DLaxI, vec![]),
            (Variant::II, Some(b0)) => (Kind::DLaxII, vec![b0.clone()]),
            _ => {
                return Err(Error::Shape(vec!["b0 is present exactly for variant II".into()]));
            }
        };
        let g = genus_from(kind, self.a.len(), 1)?;
        coords.extend([self.a.clone(), self.d.clone(), self.b.clone(), self.c.clone()].concat());
        PhasePoint::new(Family::new(kind, g)?, coords)
    }
    pub fn from_phase(p: &PhasePoint<S>) -> Result<Self> {
        let g = p.family.g;
        let (variant, off) = match p.family.kind {
            Kind::DLaxI => (Variant::I, 0),
            Kind::DLaxII => (Variant::II, 1),
            k => return Err(Error::InvalidArgument(format!("expected dlax, got {k}"))),
        };
        let s = split(&p.coords[off..], &[g + 1, g, g, g + 1]);
        Ok(Self {
            variant,
            a: s[0].clone(),
            d: s[1].clone(),
            b: s[2].clone(),
            c: s[3].clone(),
            b0: (off == 1).then(|| p.coords[0].clone()),
        })
    }
}

/// State of a Noumi-Yamada chain: `q` and parameters `e`, both of length N.
#[derive(Clone, Debug, PartialEq)]
pub struct NYState<S> {
    pub q: Vec<S>,
    pub e: Vec<S>,
}

impl<S: Field> NYState<S> {
    pub fn new(q: Vec<S>, e: Vec<S>) -> Result<Self> {
        let s = Self { q, e };
        let v = s.validate();
        if v.is_empty() {
            Ok(s)
        } else {
            Err(Error::Shape(v))
        }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    pub fn family(&self) -> Result<Family> {
        let n = self.n();
        if n < 3 {
            return Err(Error::InvalidArgument("NY chains need N >= 3".into()));
        }
        if n % 2 == 1 {
            Family::new(Kind::NYI, (n - 1) / 2)
        } else {
            Family::new(Kind::NYII, (n - 2) / 2)
        }
    }

    /// `sum q_even - sum q_odd` (1-based indices).
    pub fn constraint(&self) -> S {
        self.q.iter().enumerate().fold(S::zero(), |acc, (i, q)| {
            if i % 2 == 1 {
                acc + q.clone()
            } else {
                acc - q.clone()
            }
        })
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.q.len() != self.e.len() {
            out.push(format!("q has {} entries but e has {}", self.q.len(), self.e.len()));
        }
        if self.q.len() < 3 {
            out.push("N must be at least 3".into());
        } else if self.q.len() % 2 == 0 && !constraint_holds(&self.constraint(), &self.q) {
            out.push("constraint sum mismatch: sum q_{2k} != sum q_{2k-1}".into());
        }
        out
    }
}

fn constraint_holds<S: Field>(c: &S, q: &[S]) -> bool {
    if S::is_exact() {
        c.is_zero()
    } else {
        let scale = q.iter().map(Field::magnitude).fold(1.0, f64::max);
        c.magnitude() <= crate::algebra::FLOAT_DIVISIBILITY_TOL * scale
    }
}

/// Image of a point under the spectral map.
#[derive(Clone, Debug, PartialEq)]
pub enum SpectralData<S> {
    /// `f = u w + v^2`.
    Curve(UniPoly<S>),
    /// `(Tr T, -det T)` for variant I, `(Tr T, det T)` for variant II.
    Pair(UniPoly<S>, UniPoly<S>),
}

impl<S: Field> SpectralData<S> {
    /// Non-trivial coefficients with names: `f_i` for curves (even powers only
    /// for Prym), `h_{k/2}` and `f2_(k)` for pairs.
    pub fn named_invariants(&self, family: Family) -> Vec<(String, S)> {
        let g = family.g;
        match self {
            SpectralData::Curve(f) => {
                let (deg, step) = match family.kind {
                    Kind::Mumford => (2 * g + 1, 1),
                    Kind::EvenMumford => (2 * g + 2, 1),
                    Kind::PrymI => (4 * g + 2, 2),
                    _ => (4 * g + 4, 2),
                };
                (1..=deg / step).map(|i| (format!("f{i}"), f.coeff(deg - step * i))).collect()
            }
            SpectralData::Pair(f1, f2) => {
                let mut out: Vec<(String, S)> =
                    (0..=g).map(|i| (sub_name("h", 2 * i + 1), f1.coeff(g - i))).collect();
                let top = if family.kind == Kind::DLaxII { 2 * g + 2 } else { 2 * g + 1 };
                out.extend((1..=top).map(|i| (format!("f2_{i}"), f2.coeff(top - i))));
                out
            }
        }
    }

    pub fn invariants(&self, family: Family) -> Vec<S> {
        self.named_invariants(family).into_iter().map(|(_, v)| v).collect()
    }

    /// All coefficients (padded) for exact comparisons.
    pub fn coefficient_vectors(&self) -> Vec<Vec<S>> {
        match self {
            SpectralData::Curve(f) => vec![f.coeffs().to_vec()],
            SpectralData::Pair(a, b) => vec![a.coeffs().to_vec(), b.coeffs().to_vec()],
        }
    }
}

/// `f = u w + v^2` for Mumford-like families.
pub fn spectral_map<S: Field>(p: &PhasePoint<S>) -> Result<SpectralData<S>> {
    if !p.family.kind.is_mumford_like() {
        return Err(Error::InvalidArgument(format!("spectral_map needs a Mumford-like family, got {}", p.family.kind)));
    }
    let v = p.validate();
    if !v.is_empty() {
        return Err(Error::Shape(v));
    }
    let ps = p.polys();
    Ok(SpectralData::Curve(&(&ps[0] * &ps[2]) + &ps[1].square()))
}

/// `(Tr T, -det T)` (variant I) or `(Tr T, det T)` (variant II) of a raw matrix.
pub fn psi_prime<S: Field>(
    variant: Variant,
    a: &UniPoly<S>,
    b: &UniPoly<S>,
    c: &UniPoly<S>,
    d: &UniPoly<S>,
) -> (UniPoly<S>, UniPoly<S>) {
    let tr = a + d;
    let det = &(a * d) - &(b * c);
    match variant {
        Variant::I => (tr, -&det),
        Variant::II => (tr, det),
    }
}

pub fn dlax_invariants<S: Field>(p: &PhasePoint<S>) -> Result<SpectralData<S>> {
    let variant = match p.family.kind {
        Kind::DLaxI => Variant::I,
        Kind::DLaxII => Variant::II,
        k => return Err(Error::InvalidArgument(format!("dlax_invariants needs a DLax family, got {k}"))),
    };
    let v = p.validate();
    if !v.is_empty() {
        return Err(Error::Shape(v));
    }
    let ps = p.polys();
    let (tr, det) = psi_prime(variant, &ps[0], &ps[1], &ps[2], &ps[3]);
    Ok(SpectralData::Pair(tr, det))
}

/// Spectral image for any framed family.
pub fn spectral_data<S: Field>(p: &PhasePoint<S>) -> Result<SpectralData<S>> {
    if p.family.kind.is_dlax() {
        dlax_invariants(p)
    } else {
        spectral_map(p)
    }
}

/// Max-norm distance between the spectral image of `p` and `f`.
pub fn level_set_residual<S: Field>(p: &PhasePoint<S>, f: &SpectralData<S>) -> Result<f64> {
    let own = spectral_data(p)?;
    let (a, b) = (own.coefficient_vectors(), f.coefficient_vectors());
    if a.len() != b.len() {
        return Err(Error::InvalidArgument("spectral data kinds differ".into()));
    }
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(&b) {
        let n = x.len().max(y.len());
        for i in 0..n {
            let xi = x.get(i).cloned().unwrap_or_else(S::zero);
            let yi = y.get(i).cloned().unwrap_or_else(S::zero);
            worst = worst.max((xi - yi).magnitude());
        }
    }
    Ok(worst)
}

/// Rational with numerator and denominator uniform in `[-10, 10] \ {0}`.
pub fn sample_rational<R: Rng + ?Sized>(rng: &mut R) -> Rational {
    let mut draw = || loop {
        let n: i64 = rng.gen_range(-10..=10);
        if n != 0 {
            return n;
        }
    };
    let (n, d) = (draw(), draw());
    <Rational as Field>::from_ratio(n, d)
}

pub fn random_point<R: Rng + ?Sized>(family: Family, rng: &mut R) -> PhasePoint<Rational> {
    PhasePoint { family, coords: (0..family.dim()).map(|_| sample_rational(rng)).collect() }
}

/// Scalars that can be written to the JSON interchange format.
pub trait JsonScalar: Field {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl JsonScalar for Rational {
    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s).ok_or_else(|| Error::Parse(format!("bad rational '{s}'"))),
            Value::Number(n) if n.is_i64() => Ok(<Rational as Field>::from_i64(n.as_i64().unwrap())),
            Value::Number(_) => Err(Error::MixedScalars),
            other => Err(Error::Parse(format!("expected rational, got {other}"))),
        }
    }
}

impl JsonScalar for f64 {
    fn to_json(&self) -> Value {
        json!(self)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| Error::Parse("bad number".into())),
            Value::String(_) => Err(Error::MixedScalars),
            other => Err(Error::Parse(format!("expected number, got {other}"))),
        }
    }
}

/// Scalar realization detected in a JSON document.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realization {
    Exact,
    Float,
}

fn collect_scalars<'a>(v: &'a Value, out: &mut Vec<&'a Value>) {
    match v {
        Value::Array(xs) => xs.iter().for_each(|x| collect_scalars(x, out)),
        Value::String(_) | Value::Number(_) => out.push(v),
        _ => {}
    }
}

/// Decides the scalar realization of a point document: strings mean exact,
/// numbers mean float; both at once is rejected.
pub fn detect_realization(doc: &Value) -> Result<Realization> {
    let mut xs = Vec::new();
    if let Value::Object(m) = doc {
        for (k, v) in m {
            if !matches!(k.as_str(), "family" | "g") {
                collect_scalars(v, &mut xs);
            }
        }
    }
    let strings = xs.iter().filter(|v| v.is_string()).count();
    let numbers = xs.len() - strings;
    match (strings, numbers) {
        (_, 0) => Ok(Realization::Exact),
        (0, _) => Ok(Realization::Float),
        _ => Err(Error::MixedScalars),
    }
}

fn arr<S: JsonScalar>(xs: &[S]) -> Value {
    Value::Array(xs.iter().map(JsonScalar::to_json).collect())
}

fn get_arr<S: JsonScalar>(m: &Map<String, Value>, key: &str) -> Result<Vec<S>> {
    match m.get(key) {
        Some(Value::Array(xs)) => xs.iter().map(S::from_json).collect(),
        Some(_) => Err(Error::Parse(format!("'{key}' must be an array"))),
        None => Err(Error::Parse(format!("missing key '{key}'"))),
    }
}

impl<S: JsonScalar> PhasePoint<S> {
    pub fn to_json(&self) -> Value {
        let g = self.family.g;
        let mut m = Map::new();
        m.insert("family".into(), json!(self.family.kind.name()));
        m.insert("g".into(), json!(g));
        match self.family.kind {
            Kind::DLaxI | Kind::DLaxII => {
                let d = DLaxPoint::from_phase(self).expect("dlax layout");
                m.insert("a".into(), arr(&d.a));
                m.insert("b".into(), arr(&d.b));
                m.insert("c".into(), arr(&d.c));
                m.insert("d".into(), arr(&d.d));
                if let Some(b0) = &d.b0 {
                    m.insert("b0".into(), b0.to_json());
                }
            }
            kind => {
                let lens = match kind {
                    Kind::Mumford | Kind::PrymI => [g, g, g + 1],
                    Kind::EvenMumford => [g, g, g + 2],
                    _ => [g, g + 1, g + 1],
                };
                let s = split(&self.coords, &lens);
                m.insert("u".into(), arr(&s[0]));
                m.insert("v".into(), arr(&s[1]));
                m.insert("w".into(), arr(&s[2]));
            }
        }
        Value::Object(m)
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let m = doc.as_object().ok_or_else(|| Error::Parse("point must be a JSON object".into()))?;
        detect_realization(doc)?;
        let kind = Kind::parse(m.get("family").and_then(Value::as_str).ok_or_else(|| Error::Parse("missing 'family'".into()))?)?;
        let g = m.get("g").and_then(Value::as_u64).ok_or_else(|| Error::Parse("missing 'g'".into()))? as usize;
        let family = Family::new(kind, g)?;
        let p = match kind {
            Kind::DLaxI | Kind::DLaxII => {
                let b0 = match m.get("b0") {
                    Some(v) => Some(S::from_json(v)?),
                    None => None,
                };
                DLaxPoint {
                    variant: if kind == Kind::DLaxI { Variant::I } else { Variant::II },
                    a: get_arr(m, "a")?,
                    b: get_arr(m, "b")?,
                    c: get_arr(m, "c")?,
                    d: get_arr(m, "d")?,
                    b0,
                }
                .to_phase()?
            }
            Kind::NYI | Kind::NYII => {
                return Err(Error::Parse("NY states are decoded with NYState::from_json".into()))
            }
            _ => {
                let coords = [get_arr::<S>(m, "u")?, get_arr(m, "v")?, get_arr(m, "w")?].concat();
                PhasePoint::new(family, coords)?
            }
        };
        if p.family != family {
            return Err(Error::Shape(vec![format!("declared g={g} but coefficients give g={}", p.family.g)]));
        }
        Ok(p)
    }
}

impl<S: JsonScalar> NYState<S> {
    pub fn to_json(&self) -> Value {
        let family = self.family().map(|f| f.kind.name()).unwrap_or("ny");
        json!({ "family": family, "q": arr(&self.q), "e": arr(&self.e) })
    }

    pub fn from_json(doc: &Value) -> Result<Self> {
        let m = doc.as_object().ok_or_else(|| Error::Parse("state must be a JSON object".into()))?;
        detect_realization(doc)?;
        NYState::new(get_arr(m, "q")?, get_arr(m, "e")?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64) -> Rational {
        <Rational as Field>::from_i64(n)
    }

    fn fam(kind: Kind, g: usize) -> Family {
        Family::new(kind, g).unwrap()
    }

    #[test]
    fn dimensions() {
        for g in 1..5 {
            assert_eq!(fam(Kind::Mumford, g).dim(), 3 * g + 1);
            assert_eq!(fam(Kind::EvenMumford, g).dim(), 3 * g + 2);
            assert_eq!(fam(Kind::PrymI, g).dim(), 3 * g + 1);
            assert_eq!(fam(Kind::PrymII, g).dim(), 3 * g + 2);
            assert_eq!(fam(Kind::DLaxI, g).dim(), 4 * g + 2);
            assert_eq!(fam(Kind::DLaxII, g).dim(), 4 * g + 3);
        }
    }

    #[test]
    fn mumford_spectral_example() {
        let p = PhasePoint::new(fam(Kind::Mumford, 1), vec![r(2), r(1), r(1), r(0)]).unwrap();
        let f = spectral_map(&p).unwrap();
        assert_eq!(f, SpectralData::Curve(UniPoly::from_i64(&[1, 2, 3, 1])));
        let z = PhasePoint::<Rational>::zero(fam(Kind::Mumford, 1));
        assert_eq!(spectral_map(&z).unwrap(), SpectralData::Curve(UniPoly::from_i64(&[0, 0, 0, 1])));
    }

    #[test]
    fn prym_spectral_example() {
        let p = PhasePoint::new(fam(Kind::PrymI, 1), vec![r(0), r(1), r(0), r(0)]).unwrap();
        let f = spectral_map(&p).unwrap();
        assert_eq!(f, SpectralData::Curve(UniPoly::from_i64(&[0, 0, 1, 0, 0, 0, 1])));
    }

    #[test]
    fn dlax_invariant_examples() {
        let x = UniPoly::<Rational>::x();
        let (tr, mdet) = psi_prime(Variant::I, &UniPoly::zero(), &x, &x.square(), &UniPoly::zero());
        assert!(tr.is_zero());
        assert_eq!(mdet, UniPoly::from_i64(&[0, 0, 0, 1]));
        let a = UniPoly::from_i64(&[3, 1]);
        let (tr, mdet) = psi_prime(Variant::I, &a, &UniPoly::zero(), &UniPoly::zero(), &a);
        assert_eq!(tr, a.scale(&r(2)));
        assert_eq!(mdet, -&a.square());
        // c = x has no b0 x^2 term, so this lies outside the DLaxII shape
        let x2 = x.square();
        let (tr, det) = psi_prime(Variant::II, &x2, &x, &x, &x2);
        assert_eq!(det, UniPoly::from_i64(&[0, 0, -1, 0, 1]));
        assert_eq!(tr, x2.scale(&r(2)));
    }

    #[test]
    fn level_set_residual_examples() {
        let z = PhasePoint::<Rational>::zero(fam(Kind::Mumford, 1));
        let f = SpectralData::Curve(UniPoly::from_i64(&[1, 0, 0, 1]));
        assert_eq!(level_set_residual(&z, &f).unwrap(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in Kind::FRAMED {
            let p = random_point(fam(kind, 2), &mut rng);
            let own = spectral_data(&p).unwrap();
            assert_eq!(level_set_residual(&p, &own).unwrap(), 0.0);
        }
    }

    #[test]
    fn ny_validation() {
        assert!(NYState::new(vec![r(1), r(2), r(3), r(2)], vec![r(0); 4]).is_ok());
        let bad = NYState { q: vec![r(1), r(2), r(3), r(4)], e: vec![r(0); 4] };
        assert!(bad.validate()[0].contains("constraint sum mismatch"));
    }

    #[test]
    fn prym_parity_violation() {
        let f = fam(Kind::PrymI, 1);
        let u = UniPoly::from_i64(&[0, 0, 1]);
        let v = UniPoly::from_i64(&[1, 1]);
        let w = UniPoly::from_i64(&[0, 0, 0, 0, 1]);
        let err = PhasePoint::<Rational>::from_polys(f, &[u, v, w]).unwrap_err();
        match err {
            Error::Shape(v) => assert!(v.iter().any(|s| s.contains("parity"))),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn materialize_read_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in Kind::FRAMED {
            for g in 1..4 {
                let p = random_point(fam(kind, g), &mut rng);
                let back = PhasePoint::from_polys(p.family, &p.polys()).unwrap();
                assert_eq!(back, p);
                assert!(p.validate().is_empty());
            }
        }
    }

    #[test]
    fn json_roundtrip_and_mixed_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in Kind::FRAMED {
            let p = random_point(fam(kind, 2), &mut rng);
            let doc = p.to_json();
            assert_eq!(PhasePoint::<Rational>::from_json(&doc).unwrap(), p);
            let pf = p.map(Field::to_f64);
            assert_eq!(PhasePoint::<f64>::from_json(&pf.to_json()).unwrap(), pf);
        }
        let doc = json!({"family":"mumford","g":1,"u":["1"],"v":[2.0],"w":["3","5"]});
        assert_eq!(detect_realization(&doc), Err(Error::MixedScalars));
        assert_eq!(PhasePoint::<Rational>::from_json(&doc), Err(Error::MixedScalars));
    }

    #[test]
    fn names_follow_subscripts() {
        assert_eq!(fam(Kind::Mumford, 2).layout().names(), ["u1", "u2", "v3/2", "v5/2", "w1", "w2", "w3"]);
        assert_eq!(fam(Kind::DLaxII, 1).layout().names(), ["b0", "a1/2", "a3/2", "d3/2", "b1", "c1", "c2"]);
    }
}
