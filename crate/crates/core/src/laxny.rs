//! Noumi-Yamada chains at alpha = 0, the dressing chain, the Lax product and
//! the maps between the Lax-chain systems and the Mumford system.

use rand::Rng;

use crate::algebra::{from_roots, Field, Rational, UniPoly, FLOAT_DIVISIBILITY_TOL};
use crate::error::{Error, Result};
use crate::phase::{
    random_point, sample_rational, spectral_map, Family, Kind, NYState, PhasePoint, SpectralData,
    Variant,
};

fn cyc<S: Clone>(xs: &[S], k: usize) -> S {
    xs[k % xs.len()].clone()
}

fn negligible<S: Field>(x: &S, scale: f64) -> bool {
    if S::is_exact() {
        x.is_zero()
    } else {
        x.magnitude() <= FLOAT_DIVISIBILITY_TOL * scale.max(1.0)
    }
}

/// Right-hand side without the parity constraint check (0-based cyclic indices).
pub fn ny_rhs_unchecked<S: Field>(q: &[S], e: &[S]) -> Vec<S> {
    let n = q.len();
    let at = |k: usize| cyc(q, k);
    let ea = |k: usize| cyc(e, k);
    (0..n)
        .map(|k| {
            if n % 2 == 1 {
                let g = (n - 1) / 2;
                let s = (1..=g).fold(S::zero(), |acc, i| acc + at(k + 2 * i - 1) - at(k + 2 * i));
                q[k].clone() * s + ea(k) - ea(k + 1)
            } else {
                let g = (n - 2) / 2;
                let mut s = S::zero();
                for i in 1..=g {
                    for j in i..=g {
                        s = s + at(k + 2 * i - 1) * at(k + 2 * j) - at(k + 2 * i) * at(k + 2 * j + 1);
                    }
                }
                let es = (1..=g + 1).fold(S::zero(), |acc, i| acc + ea(k + 2 * i - 1) - ea(k + 2 * i));
                let qs = (1..=g + 1).fold(S::zero(), |acc, i| acc + at(k + 2 * i - 1));
                q[k].clone() * s + es * q[k].clone() + (ea(k) - ea(k + 1)) * qs
            }
        })
        .collect()
}

/// Velocity of the alpha = 0 Noumi-Yamada chain.
pub fn ny_rhs<S: Field>(state: &NYState<S>) -> Result<Vec<S>> {
    check_state(state)?;
    Ok(ny_rhs_unchecked(&state.q, &state.e))
}

fn check_state<S: Field>(state: &NYState<S>) -> Result<()> {
    if state.q.len() != state.e.len() || state.q.len() < 3 {
        return Err(Error::Shape(state.validate()));
    }
    if state.n() % 2 == 0 {
        let scale = state.q.iter().map(Field::magnitude).fold(0.0, f64::max);
        if !negligible(&state.constraint(), scale) {
            return Err(Error::Shape(vec!["constraint sum mismatch: sum q_{2k} != sum q_{2k-1}".into()]));
        }
    }
    Ok(())
}

/// Lifted chain variables `qcheck` with parameters `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<S> {
    pub qcheck: Vec<S>,
    pub e: Vec<S>,
}

/// Choice of `qcheck_1` for even N.
#[derive(Clone, Debug, PartialEq)]
pub enum Gauge<S> {
    /// `qcheck_1 = c`.
    Fixed(S),
    /// The unique `c` for which `Lambda` lands in the DLaxII shape.
    Canonical,
}

/// Velocity of the dressing chain (odd N only).
pub fn dressing_rhs<S: Field>(state: &ChainState<S>) -> Result<Vec<S>> {
    let n = state.qcheck.len();
    if n % 2 == 0 {
        return Err(Error::EvenPeriod);
    }
    if state.e.len() != n {
        return Err(Error::InvalidArgument("qcheck and e lengths differ".into()));
    }
    let qc = &state.qcheck;
    let r: Vec<S> = (0..n)
        .map(|k| {
            let a = cyc(qc, k + 1);
            let b = qc[k].clone();
            a.clone() * a - b.clone() * b + state.e[k].clone() - cyc(&state.e, k + 1)
        })
        .collect();
    Ok(alternating_half_sums(&r))
}

/// Unique solution of `y_k + y_{k+1} = r_k` for odd cyclic length.
fn alternating_half_sums<S: Field>(r: &[S]) -> Vec<S> {
    let n = r.len();
    (0..n)
        .map(|k| {
            let s = (0..n).fold(S::zero(), |acc, j| {
                if j % 2 == 0 {
                    acc + cyc(r, k + j)
                } else {
                    acc - cyc(r, k + j)
                }
            });
            s * S::half()
        })
        .collect()
}

/// `q_k = qcheck_k + qcheck_{k+1}`.
pub fn q_from_qcheck<S: Field>(state: &ChainState<S>) -> NYState<S> {
    let qc = &state.qcheck;
    NYState {
        q: (0..qc.len()).map(|k| qc[k].clone() + cyc(qc, k + 1)).collect(),
        e: state.e.clone(),
    }
}

/// Inverse of [`q_from_qcheck`]; the gauge is used (and required) for even N.
pub fn qcheck_from_q<S: Field>(state: &NYState<S>, gauge: &Gauge<S>) -> Result<ChainState<S>> {
    let n = state.n();
    if n % 2 == 1 {
        return Ok(ChainState { qcheck: alternating_half_sums(&state.q), e: state.e.clone() });
    }
    let c = match gauge {
        Gauge::Fixed(c) => c.clone(),
        Gauge::Canonical => canonical_gauge(state)?,
    };
    lift_even(state, c)
}

fn lift_even<S: Field>(state: &NYState<S>, c: S) -> Result<ChainState<S>> {
    let n = state.n();
    let mut qc = Vec::with_capacity(n);
    qc.push(c);
    for k in 0..n - 1 {
        let next = state.q[k].clone() - qc[k].clone();
        qc.push(next);
    }
    let scale = state.q.iter().map(Field::magnitude).fold(0.0, f64::max);
    let closing = qc[n - 1].clone() + qc[0].clone() - state.q[n - 1].clone();
    if !negligible(&closing, scale) {
        return Err(Error::Unsolvable("sum q_{2k} != sum q_{2k-1}".into()));
    }
    Ok(ChainState { qcheck: qc, e: state.e.clone() })
}

/// 2x2 polynomial matrix `((a, b), (c, d))`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaxMatrix<S> {
    pub a: UniPoly<S>,
    pub b: UniPoly<S>,
    pub c: UniPoly<S>,
    pub d: UniPoly<S>,
}

impl<S: Field> LaxMatrix<S> {
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            a: &(&self.a * &o.a) + &(&self.b * &o.c),
            b: &(&self.a * &o.b) + &(&self.b * &o.d),
            c: &(&self.c * &o.a) + &(&self.d * &o.c),
            d: &(&self.c * &o.b) + &(&self.d * &o.d),
        }
    }

    pub fn trace(&self) -> UniPoly<S> {
        &self.a + &self.d
    }

    pub fn det(&self) -> UniPoly<S> {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// `l_k(x - e)` with `l_k(x) = ((qc, 1), (x + qc^2, qc))`.
    pub fn chain_factor(qc: &S, e: &S) -> Self {
        Self {
            a: UniPoly::constant(qc.clone()),
            b: UniPoly::one(),
            c: UniPoly::new(vec![qc.clone() * qc.clone() - e.clone(), S::one()]),
            d: UniPoly::constant(qc.clone()),
        }
    }
}

/// `T(x) = l_N(x - e_N) ... l_1(x - e_1)` without shape validation.
pub fn lax_product<S: Field>(state: &ChainState<S>) -> LaxMatrix<S> {
    let mut t = LaxMatrix::chain_factor(&state.qcheck[0], &state.e[0]);
    for k in 1..state.qcheck.len() {
        t = LaxMatrix::chain_factor(&state.qcheck[k], &state.e[k]).mul(&t);
    }
    t
}

/// Lax-chain family and genus for a chain of length `n`.
pub fn dlax_family(n: usize) -> Result<Family> {
    if n < 3 {
        return Err(Error::InvalidArgument("chains need N >= 3".into()));
    }
    if n % 2 == 1 {
        Family::new(Kind::DLaxI, (n - 1) / 2)
    } else {
        Family::new(Kind::DLaxII, (n - 2) / 2)
    }
}

/// `Lambda`: the Lax product as a validated DLax point.
pub fn lambda_map<S: Field>(state: &ChainState<S>) -> Result<PhasePoint<S>> {
    let fam = dlax_family(state.qcheck.len())?;
    let t = lax_product(state);
    PhasePoint::from_polys(fam, &[t.a, t.b, t.c, t.d])
}

/// The gauge `c` making the `x^g` coefficients of `a` and `d` agree (even N).
pub fn canonical_gauge<S: Field>(state: &NYState<S>) -> Result<S> {
    let n = state.n();
    if n % 2 == 1 {
        return Err(Error::InvalidArgument("the gauge exists only for even N".into()));
    }
    let g = (n - 2) / 2;
    let mismatch = |c: S| -> Result<(S, S)> {
        let t = lax_product(&lift_even(state, c)?);
        Ok((t.a.coeff(g) - t.d.coeff(g), t.b.coeff(g)))
    };
    let (d0, b0) = mismatch(S::zero())?;
    if b0.is_zero() {
        return Err(Error::ZeroB0);
    }
    let (d1, _) = mismatch(S::one())?;
    let slope = d1 - d0.clone();
    if slope.is_zero() {
        return Err(Error::Unsolvable("gauge condition does not depend on qcheck_1".into()));
    }
    let c = -d0 / slope;
    let (dc, _) = mismatch(c.clone())?;
    let scale = state.q.iter().map(Field::magnitude).fold(1.0, f64::max);
    if !negligible(&dc, scale * scale) {
        return Err(Error::Unsolvable("gauge condition is not affine in qcheck_1".into()));
    }
    Ok(c)
}

/// `Lambda` from NY coordinates through the gauge lift.
pub fn lambda_from_q<S: Field>(state: &NYState<S>, gauge: &Gauge<S>) -> Result<PhasePoint<S>> {
    lambda_map(&qcheck_from_q(state, gauge)?)
}

/// Trace coefficients `h_{1/2}, ..., h_{g+1/2}` of the Lax product.
pub fn psi_doubleprime<S: Field>(state: &ChainState<S>) -> Result<Vec<S>> {
    let fam = dlax_family(state.qcheck.len())?;
    let tr = lax_product(state).trace();
    let g = fam.g;
    Ok((0..=g).map(|i| tr.coeff(g - i)).collect())
}

pub fn psi_doubleprime_q<S: Field>(state: &NYState<S>, gauge: &Gauge<S>) -> Result<Vec<S>> {
    psi_doubleprime(&qcheck_from_q(state, gauge)?)
}

fn variant_of(kind: Kind) -> Result<Variant> {
    match kind {
        Kind::DLaxI => Ok(Variant::I),
        Kind::DLaxII => Ok(Variant::II),
        k => Err(Error::InvalidArgument(format!("expected a DLax family, got {k}"))),
    }
}

/// `Phi`: `v = (a - d)/2`, `w = c`, `u = b`, divided by `b0` for variant II.
pub fn phi_map<S: Field>(p: &PhasePoint<S>) -> Result<PhasePoint<S>> {
    let variant = variant_of(p.family.kind)?;
    let ps = p.polys();
    let (a, b, c, d) = (&ps[0], &ps[1], &ps[2], &ps[3]);
    let scale = match variant {
        Variant::I => S::one(),
        Variant::II => {
            let b0 = p.coords[0].clone();
            if b0.is_zero() {
                return Err(Error::ZeroB0);
            }
            S::one() / b0
        }
    };
    let v = (a - d).scale(&(S::half() * scale.clone()));
    let fam = Family::new(Kind::Mumford, p.family.g)?;
    PhasePoint::from_polys(fam, &[b.scale(&scale), v, c.scale(&scale)])
}

/// Inverse of `Phi` on the fiber over `(f1, f2)`.
///
/// Variant I ignores `sigma` and `b0star`. Variant II places the point on the
/// sheet `b0 = sigma * b0star`; when `f2` is given, `b0star^2 = f1^(1) - f2^(1)`
/// is checked.
pub fn phi_inverse<S: Field>(
    l: &PhasePoint<S>,
    f1: &UniPoly<S>,
    f2: Option<&UniPoly<S>>,
    variant: Variant,
    sigma: i64,
    b0star: &S,
) -> Result<PhasePoint<S>> {
    if l.family.kind != Kind::Mumford {
        return Err(Error::InvalidArgument("phi_inverse expects a Mumford point".into()));
    }
    let g = l.family.g;
    let ps = l.polys();
    let (u, v, w) = (&ps[0], &ps[1], &ps[2]);
    let half_f1 = f1.scale(&S::half());
    let (kind, s) = match variant {
        Variant::I => (Kind::DLaxI, S::one()),
        Variant::II => {
            if sigma != 1 && sigma != -1 {
                return Err(Error::InvalidArgument("sigma must be +1 or -1".into()));
            }
            if b0star.is_zero() {
                return Err(Error::ZeroB0);
            }
            if let Some(f2) = f2 {
                let gap = f1.coeff(g) - f2.coeff(2 * g + 1);
                let scale = gap.magnitude().max(b0star.magnitude().powi(2));
                if !negligible(&(b0star.clone() * b0star.clone() - gap), scale) {
                    return Err(Error::InconsistentB0);
                }
            }
            (Kind::DLaxII, S::from_i64(sigma) * b0star.clone())
        }
    };
    let sv = v.scale(&s);
    let a = &sv + &half_f1;
    let d = &half_f1 - &sv;
    PhasePoint::from_polys(Family::new(kind, g)?, &[a, u.scale(&s), w.scale(&s), d])
}

/// `phi`: `f1^2/4 + f2` (I) or `(f1^2/4 - f2) / (f1^(1) - f2^(1))` (II).
pub fn phi_small<S: Field>(variant: Variant, f1: &UniPoly<S>, f2: &UniPoly<S>) -> Result<UniPoly<S>> {
    let quarter = S::from_ratio(1, 4);
    let sq = f1.square().scale(&quarter);
    match variant {
        Variant::I => Ok(&sq + f2),
        Variant::II => {
            let deg = f2.degree().unwrap_or(0);
            if deg < 4 || deg % 2 == 1 {
                return Err(Error::InvalidArgument("variant II needs f2 of degree 2g+2".into()));
            }
            let g = (deg - 2) / 2;
            let gap = f1.coeff(g) - f2.coeff(2 * g + 1);
            if gap.is_zero() {
                return Err(Error::DegenerateFiber);
            }
            let num = &sq - f2;
            if !negligible(&num.coeff(2 * g + 2), sq.max_norm()) {
                return Err(Error::Shape(vec!["x^(2g+2) terms do not cancel".into()]));
            }
            let mut cs = num.padded(2 * g + 2);
            cs.truncate(2 * g + 2);
            let f = UniPoly::new(cs).scale(&(S::one() / gap));
            Ok(f)
        }
    }
}

/// `lambda(h) = (f1, f2)` with `f1 = Tr` and `f2 = prod (x - e_k)` for both
/// variants (the sign for which the square involving `psi'` commutes).
pub fn lambda_small<S: Field>(variant: Variant, h: &[S], e: &[S]) -> (UniPoly<S>, UniPoly<S>) {
    let g = h.len() - 1;
    let mut f1: Vec<S> = (0..=g).map(|i| h[g - i].clone()).collect();
    if variant == Variant::II {
        f1.push(S::from_i64(2));
    }
    (UniPoly::new(f1), from_roots(e))
}

/// The g=1 relations as printed, variant I: `(u1, v_{3/2})`.
pub fn q1_relations<S: Field>(q: &[S], h: &[S], e: &[S]) -> (S, S) {
    let u1 = q[0].clone() * q[1].clone() - e[1].clone();
    let v = -(q[1].clone() * (u1.clone() + e[0].clone()))
        + S::half() * (h[0].clone() * u1.clone() - h[1].clone());
    (u1, v)
}

/// The g=1 relations as printed, variant II: `(u1, v_{3/2})`.
pub fn q1_relations_ii<S: Field>(q: &[S], b0: &S, h: &[S], e: &[S]) -> (S, S) {
    let (q1, q2, q3) = (q[0].clone(), q[1].clone(), q[2].clone());
    let u1 = (q1.clone() * q2.clone() * q3.clone() - e[1].clone() * q3.clone() - e[2].clone() * q1) / b0.clone();
    let v = (u1.clone() * (e[2].clone() - q2 * q3) + S::half() * (h[0].clone() * u1.clone() - h[1].clone()))
        / b0.clone();
    (u1, v)
}

/// `(u1, v_{3/2})` of `Phi(Lambda(qcheck(q)))`, any N.
pub fn composite_mumford<S: Field>(state: &NYState<S>, gauge: &Gauge<S>) -> Result<PhasePoint<S>> {
    phi_map(&lambda_from_q(state, gauge)?)
}

/// Inverse of the composite at g=1, variant I: `q` from `(u1, v_{3/2})`, `h`, `e`.
pub fn q_from_mumford_i<S: Field>(u1: &S, v: &S, h: &[S], e: &[S]) -> Result<Vec<S>> {
    let den = u1.clone() + e[0].clone();
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let q2 = (S::half() * (h[0].clone() * u1.clone() - h[1].clone()) - v.clone()) / den;
    if q2.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let q1 = (u1.clone() + e[1].clone()) / q2.clone();
    let q3 = h[0].clone() - q1.clone() - q2.clone();
    Ok(vec![q1, q2, q3])
}

/// Inverse of the composite at g=1, variant II (canonical gauge).
pub fn q_from_mumford_ii<S: Field>(u1: &S, v: &S, b0: &S, h: &[S], e: &[S]) -> Result<Vec<S>> {
    let (e1, e2, e3) = (e[0].clone(), e[1].clone(), e[2].clone());
    let den = u1.clone() + e1.clone();
    if den.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let k = (u1.clone() * e3.clone()
        + e1 * (u1.clone() + e3.clone())
        + S::half() * (h[0].clone() * u1.clone() - h[1].clone())
        - b0.clone() * v.clone())
        / den;
    let kd = e3.clone() - e2 - k.clone();
    if kd.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let q3 = b0.clone() * (u1.clone() + e3 - k.clone()) / kd;
    if q3.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    let q1 = b0.clone() - q3.clone();
    let q2 = k / q3.clone();
    let q4 = b0.clone() - q2.clone();
    Ok(vec![q1, q2, q3, q4])
}

/// Mumford points on one level set, built by flipping the signs of `v` at
/// the (rational) roots of `u`. Returns up to `2^g` distinct points.
pub fn level_set_points(l0: &PhasePoint<Rational>, roots: &[Rational]) -> Result<Vec<PhasePoint<Rational>>> {
    let g = l0.family.g;
    if roots.len() != g {
        return Err(Error::InvalidArgument("need one root of u per genus".into()));
    }
    let ps = l0.polys();
    let (u, v) = (&ps[0], &ps[1]);
    if u != &from_roots(roots) {
        return Err(Error::InvalidArgument("roots do not match u".into()));
    }
    let f = match spectral_map(l0)? {
        SpectralData::Curve(f) => f,
        SpectralData::Pair(..) => unreachable!(),
    };
    let vals: Vec<Rational> = roots.iter().map(|r| v.eval(r)).collect();
    let mut out: Vec<PhasePoint<Rational>> = Vec::new();
    for mask in 0..(1u32 << g) {
        let target: Vec<Rational> = vals
            .iter()
            .enumerate()
            .map(|(j, y)| if mask >> j & 1 == 1 { -y.clone() } else { y.clone() })
            .collect();
        let v2 = lagrange(roots, &target);
        let w2 = (&f - &v2.square()).exact_div(u)?;
        let p = PhasePoint::from_polys(l0.family, &[u.clone(), v2, w2])?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

fn lagrange(xs: &[Rational], ys: &[Rational]) -> UniPoly<Rational> {
    let mut acc = UniPoly::zero();
    for (i, (xi, yi)) in xs.iter().zip(ys).enumerate() {
        let mut basis = UniPoly::constant(yi.clone());
        for (j, xj) in xs.iter().enumerate() {
            if i != j {
                basis = &basis * &UniPoly::linear_root(xj.clone());
                basis = basis.scale(&(<Rational as Field>::one() / (xi - xj)));
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// Outcome of the two-sheet check over one variant-II fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberSplitReport {
    pub g: usize,
    pub b0_star: Rational,
    pub level_set_points: usize,
    pub sheets: usize,
    /// Every constructed point lies on the fiber over `(f1, f2)`.
    pub on_fiber: bool,
    /// `b0 = +b0*` on one sheet and `-b0*` on the other.
    pub disjoint: bool,
    /// `Phi` maps each sheet back onto the sampled level-set points.
    pub roundtrip: bool,
    /// Distinct level-set points give distinct Lax points within each sheet.
    pub injective: bool,
    /// A point with `b0 = 0` is not produced.
    pub b0_nonzero: bool,
}

impl FiberSplitReport {
    pub fn passed(&self) -> bool {
        self.sheets == 2 && self.on_fiber && self.disjoint && self.roundtrip && self.injective && self.b0_nonzero
    }
}

/// Builds a random variant-II fiber with rational `b0*` and checks its split
/// into the two sheets `b0 = +b0*` and `b0 = -b0*`.
pub fn fiber_split<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Result<FiberSplitReport> {
    let mumford = Family::new(Kind::Mumford, g)?;
    let roots: Vec<Rational> = loop {
        let mut rs: Vec<Rational> = (0..g).map(|_| sample_rational(rng)).collect();
        rs.sort();
        rs.dedup();
        if rs.len() == g {
            break rs;
        }
    };
    let mut l0 = random_point(mumford, rng);
    let u = from_roots(&roots);
    let ps = l0.polys();
    l0 = PhasePoint::from_polys(mumford, &[u, ps[1].clone(), ps[2].clone()])?;
    let b0_star = loop {
        let b = sample_rational(rng);
        if b > <Rational as Field>::zero() {
            break b;
        }
    };
    let mut f1c: Vec<Rational> = (0..=g).map(|_| sample_rational(rng)).collect();
    f1c.push(<Rational as Field>::from_i64(2));
    let f1 = UniPoly::new(f1c);
    let dlax = phi_inverse(&l0, &f1, None, Variant::II, 1, &b0_star)?;
    let (tr, det) = match crate::phase::dlax_invariants(&dlax)? {
        SpectralData::Pair(a, b) => (a, b),
        SpectralData::Curve(_) => unreachable!(),
    };
    let points = level_set_points(&l0, &roots)?;
    let mut on_fiber = true;
    let mut disjoint = true;
    let mut roundtrip = true;
    let mut injective = true;
    let mut b0_nonzero = true;
    let mut sheets = Vec::new();
    for sigma in [1i64, -1] {
        let mut sheet = Vec::new();
        for l in &points {
            let t = phi_inverse(l, &tr, Some(&det), Variant::II, sigma, &b0_star)?;
            let b0 = t.coords[0].clone();
            b0_nonzero &= !b0.is_zero();
            disjoint &= b0 == <Rational as Field>::from_i64(sigma) * b0_star.clone();
            match crate::phase::dlax_invariants(&t)? {
                SpectralData::Pair(a, b) => on_fiber &= a == tr && b == det,
                SpectralData::Curve(_) => on_fiber = false,
            }
            roundtrip &= &phi_map(&t)? == l;
            injective &= !sheet.contains(&t);
            sheet.push(t);
        }
        sheets.push(sheet);
    }
    disjoint &= sheets[0].iter().all(|t| !sheets[1].contains(t));
    Ok(FiberSplitReport {
        g,
        b0_star,
        level_set_points: points.len(),
        sheets: sheets.iter().filter(|s| !s.is_empty()).count(),
        on_fiber,
        disjoint,
        roundtrip,
        injective,
        b0_nonzero,
    })
}
