//! Exact first-order calculus on the polynomial vector fields: JVPs, Lie
//! brackets, pushforwards along the Lax maps and frame rank.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::algebra::{Embed, Field, Perturbed, Rational, FLOAT_DIVISIBILITY_TOL};
use crate::error::{Error, Result};
use crate::flows::{self, Tangent};
use crate::laxny::{self, Gauge};
use crate::parallel::par_map;
use crate::phase::{random_point, sample_rational, Family, JsonScalar, Kind, NYState, PhasePoint, Variant};

/// Directional derivative of `map` at `p` along `v`, from one evaluation over
/// perturbation pairs.
pub fn jvp_map<S, F>(map: F, p: &[S], v: &[S]) -> Result<Vec<S>>
where
    S: Field,
    F: Fn(&[Perturbed<S>]) -> Result<Vec<Perturbed<S>>>,
{
    if p.len() != v.len() {
        return Err(Error::InvalidArgument("point and tangent lengths differ".into()));
    }
    Ok(map(&Perturbed::seed(p, v))?.into_iter().map(|x| x.deriv).collect())
}

/// `jvp(D_i; p; v)`.
pub fn jvp<S: Field>(p: &PhasePoint<S>, i: usize, v: &[S]) -> Result<Tangent<S>> {
    let family = p.family;
    jvp_map(|x| flows::field(&PhasePoint::new(family, x.to_vec())?, i), &p.coords, v)
}

/// `[D_i, D_j](p) = jvp(D_j; p; D_i(p)) - jvp(D_i; p; D_j(p))`.
pub fn lie_bracket<S: Field>(p: &PhasePoint<S>, i: usize, j: usize) -> Result<Tangent<S>> {
    let di = flows::field(p, i)?;
    let dj = flows::field(p, j)?;
    let a = jvp(p, j, &di)?;
    let b = jvp(p, i, &dj)?;
    Ok(a.into_iter().zip(b).map(|(x, y)| x - y).collect())
}

/// `jvp(Phi; p; D_i(p)) - b0 D_i(Phi(p))` for a DLax point (`b0 = 1` for
/// variant I).
///
/// The Mumford fields are quadratic, so the `1/b0` prefactor of `Phi` leaves
/// one factor of the (conserved) `b0` on the pushed-forward field.
pub fn pushforward_residual<S: Field>(p: &PhasePoint<S>, i: usize) -> Result<Tangent<S>> {
    if !p.family.kind.is_dlax() {
        return Err(Error::InvalidArgument(format!("pushforward needs a DLax point, got {}", p.family.kind)));
    }
    if p.family.kind == Kind::DLaxII && p.coords[0].is_zero() {
        return Err(Error::ZeroB0);
    }
    let family = p.family;
    let d = flows::field(p, i)?;
    let lhs = jvp_map(|x| Ok(laxny::phi_map(&PhasePoint::new(family, x.to_vec())?)?.coords), &p.coords, &d)?;
    let rhs = flows::field(&laxny::phi_map(p)?, i)?;
    let rate = if family.kind == Kind::DLaxII { p.coords[0].clone() } else { S::one() };
    Ok(lhs.into_iter().zip(rhs).map(|(x, y)| x - rate.clone() * y).collect())
}

/// `jvp(Lambda; q; NY(q)) + 2 D_1(Lambda(q))`: the alpha = 0 chain is carried
/// to `-2 D_1` on the Lax side.
pub fn ny_pushforward_residual<S: Field>(state: &NYState<S>, gauge: &Gauge<S>) -> Result<Tangent<S>> {
    let velocity = laxny::ny_rhs(state)?;
    let e: Vec<Perturbed<S>> = state.e.iter().map(Perturbed::embed).collect();
    let lifted_gauge = match gauge {
        Gauge::Fixed(c) => Gauge::Fixed(Perturbed::embed(c)),
        Gauge::Canonical => Gauge::Canonical,
    };
    let lhs = jvp_map(
        |q| Ok(laxny::lambda_from_q(&NYState { q: q.to_vec(), e: e.clone() }, &lifted_gauge)?.coords),
        &state.q,
        &velocity,
    )?;
    let target = laxny::lambda_from_q(state, gauge)?;
    let d1 = flows::field(&target, 1)?;
    Ok(lhs.into_iter().zip(d1).map(|(x, y)| x + S::from_i64(2) * y).collect())
}

/// Rank of `rows` by Gaussian elimination; floats use a pivot threshold
/// relative to the largest entry.
pub fn matrix_rank<S: Field>(rows: &[Vec<S>]) -> usize {
    let mut m: Vec<Vec<S>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let scale = m.iter().flatten().map(Field::magnitude).fold(0.0, f64::max);
    let tiny = |x: &S| {
        if S::is_exact() {
            x.is_zero()
        } else {
            x.magnitude() <= FLOAT_DIVISIBILITY_TOL * scale.max(1e-300)
        }
    };
    let mut rank = 0;
    for col in 0..ncols {
        if rank == m.len() {
            break;
        }
        let pivot = (rank..m.len())
            .filter(|&r| !tiny(&m[r][col]))
            .max_by(|&a, &b| m[a][col].magnitude().total_cmp(&m[b][col].magnitude()));
        let Some(pr) = pivot else { continue };
        m.swap(rank, pr);
        let pv = m[rank][col].clone();
        for r in 0..m.len() {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone() / pv.clone();
            for c in col..ncols {
                let sub = f.clone() * m[rank][c].clone();
                m[r][c] = m[r][c].clone() - sub;
            }
        }
        rank += 1;
    }
    rank
}

/// Rank of the `g x dim` frame matrix at `p`.
pub fn independence_rank<S: Field>(p: &PhasePoint<S>) -> Result<usize> {
    Ok(matrix_rank(&flows::frame(p)?.rows))
}

/// Entry of largest magnitude (zero for an empty slice).
pub fn max_residual<S: Field>(xs: &[S]) -> S {
    xs.iter()
        .cloned()
        .map(|x| x.abs())
        .fold(S::zero(), |acc, x| if x.magnitude() > acc.magnitude() { x } else { acc })
}

/// One line of a verification report.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub family: Family,
    pub points: usize,
    /// Largest residual over all points, or `None` for counting checks.
    pub max_residual: Option<Rational>,
    /// Points meeting the contract, for counting checks.
    pub successes: Option<usize>,
    pub passed: bool,
    pub note: Option<String>,
}

impl CheckReport {
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "name": self.name,
            "family": self.family.kind.name(),
            "genus": self.family.g,
            "points": self.points,
            "passed": self.passed,
        });
        if let Some(r) = &self.max_residual {
            v["max_residual"] = r.to_json();
        }
        if let Some(s) = self.successes {
            v["successes"] = json!(s);
        }
        if let Some(n) = &self.note {
            v["note"] = json!(n);
        }
        v
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "passed": self.passed(),
            "checks": self.checks.iter().map(CheckReport::to_json).collect::<Vec<_>>(),
        })
    }

    pub fn extend(&mut self, other: VerifyReport) {
        self.checks.extend(other.checks);
    }
}

/// Seeded rational points of one family; DLaxII points have `b0 != 0` by
/// construction of the sampler.
pub fn sample_points(family: Family, n: usize, seed: u64) -> Vec<PhasePoint<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_point(family, &mut rng)).collect()
}

fn residual_check(
    name: &str,
    family: Family,
    points: usize,
    results: Vec<Result<Vec<Rational>>>,
) -> CheckReport {
    let mut worst = <Rational as Field>::zero();
    let mut note = None;
    for r in results {
        match r {
            Ok(v) => {
                let m = max_residual(&v);
                if m > worst {
                    worst = m;
                }
            }
            Err(e) => note = Some(e.to_string()),
        }
    }
    CheckReport {
        name: name.into(),
        family,
        points,
        passed: note.is_none() && worst.is_zero(),
        max_residual: Some(worst),
        successes: None,
        note,
    }
}

/// Derivatives of all spectral invariants along every `D_i`.
pub fn check_invariance(family: Family, points: usize, seed: u64) -> CheckReport {
    let g = family.g;
    let results = par_map(sample_points(family, points, seed), |p| {
        let mut out = Vec::new();
        for i in 1..=g {
            out.extend(flows::invariant_derivative(&p, i)?.into_iter().map(|(_, v)| v));
            if family.kind == Kind::DLaxII {
                out.push(flows::field(&p, i)?[0].clone());
            }
        }
        Ok(out)
    });
    residual_check("invariance", family, points, results)
}

/// `[D_i, D_j]` for all `i < j`.
pub fn check_brackets(family: Family, points: usize, seed: u64) -> CheckReport {
    let g = family.g;
    let results = par_map(sample_points(family, points, seed), |p| {
        let mut out = Vec::new();
        for i in 1..=g {
            for j in i + 1..=g {
                out.extend(lie_bracket(&p, i, j)?);
            }
        }
        Ok(out)
    });
    residual_check("lie_bracket", family, points, results)
}

/// Frame rank `g` on at least 95% of the sampled points.
pub fn check_rank(family: Family, points: usize, seed: u64) -> CheckReport {
    let ranks = par_map(sample_points(family, points, seed), |p| independence_rank(&p));
    let mut note = None;
    let mut ok = 0;
    for r in ranks {
        match r {
            Ok(r) if r == family.g => ok += 1,
            Ok(_) => {}
            Err(e) => note = Some(e.to_string()),
        }
    }
    CheckReport {
        name: "independence_rank".into(),
        family,
        points,
        max_residual: None,
        successes: Some(ok),
        passed: note.is_none() && ok * 100 >= points * 95,
        note,
    }
}

/// `Phi` pushforward of every `D_i` from a DLax family.
pub fn check_pushforward(family: Family, points: usize, seed: u64) -> CheckReport {
    let g = family.g;
    let results = par_map(sample_points(family, points, seed), |p| {
        let mut out = Vec::new();
        for i in 1..=g {
            out.extend(pushforward_residual(&p, i)?);
        }
        Ok(out)
    });
    residual_check("pushforward_phi", family, points, results)
}

/// Seeded random NY states. For even N the constraint is enforced through
/// `q_1`, and draws with `b0 = sum q_odd = 0` are rejected.
pub fn sample_ny_states(n: usize, count: usize, seed: u64) -> Vec<NYState<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut q: Vec<Rational> = (0..n).map(|_| sample_rational(&mut rng)).collect();
        let e: Vec<Rational> = (0..n).map(|_| sample_rational(&mut rng)).collect();
        if n % 2 == 0 {
            let c = NYState { q: q.clone(), e: e.clone() }.constraint();
            q[0] = q[0].clone() + c;
            let b0 = q.iter().step_by(2).cloned().fold(<Rational as Field>::zero(), |a, b| a + b);
            if b0.is_zero() {
                continue;
            }
        }
        out.push(NYState { q, e });
    }
    out
}

/// `Lambda` pushforward of the alpha = 0 chain onto `-2 D_1`.
pub fn check_ny_pushforward(n: usize, points: usize, seed: u64) -> Result<CheckReport> {
    let family = laxny::dlax_family(n)?;
    let results = par_map(sample_ny_states(n, points, seed), |s| ny_pushforward_residual(&s, &Gauge::Canonical));
    Ok(residual_check("pushforward_lambda", family, points, results))
}

/// Every exact check that applies to `family`.
pub fn verify_family(family: Family, points: usize, seed: u64) -> VerifyReport {
    let mut checks = vec![
        check_invariance(family, points, seed),
        check_brackets(family, points, seed),
        check_rank(family, points, seed),
    ];
    if family.kind.is_dlax() {
        checks.push(check_pushforward(family, points, seed));
    }
    VerifyReport { checks }
}

/// `psi o Phi = phi o psi'` and `Phi^-1 o Phi = id` on random DLax points.
pub fn check_phi_diagram(family: Family, points: usize, seed: u64) -> CheckReport {
    let variant = if family.kind == Kind::DLaxI { Variant::I } else { Variant::II };
    let results = par_map(sample_points(family, points, seed), |t| {
        let l = laxny::phi_map(&t)?;
        let (f1, f2) = match crate::phase::dlax_invariants(&t)? {
            crate::phase::SpectralData::Pair(a, b) => (a, b),
            crate::phase::SpectralData::Curve(_) => unreachable!(),
        };
        let lhs = match crate::phase::spectral_map(&l)? {
            crate::phase::SpectralData::Curve(f) => f,
            crate::phase::SpectralData::Pair(..) => unreachable!(),
        };
        let rhs = laxny::phi_small(variant, &f1, &f2)?;
        let mut out: Vec<Rational> = (0..=lhs.degree().max(rhs.degree()).unwrap_or(0))
            .map(|k| lhs.coeff(k) - rhs.coeff(k))
            .collect();
        let b0 = t.coords[0].clone();
        let (sigma, b0s) = if b0 < <Rational as Field>::zero() { (-1, -b0) } else { (1, b0) };
        let back = laxny::phi_inverse(&l, &f1, Some(&f2), variant, sigma, &b0s)?;
        out.extend(back.coords.iter().zip(&t.coords).map(|(a, b)| a - b));
        Ok(out)
    });
    residual_check("diagram_phi", family, points, results)
}

/// `psi' o Lambda = lambda o psi''` on random chains of length `n`; even `N`
/// uses the fixed gauge `qcheck_1 = c`.
pub fn check_lambda_diagram(n: usize, points: usize, seed: u64, gauge: &Gauge<Rational>) -> Result<CheckReport> {
    let family = laxny::dlax_family(n)?;
    let variant = if n % 2 == 1 { Variant::I } else { Variant::II };
    let states = sample_ny_states(n, points, seed);
    let results = par_map(states, |s| {
        let chain = laxny::qcheck_from_q(&s, gauge)?;
        let t = laxny::lax_product(&chain);
        let (l1, l2) = crate::phase::psi_prime(variant, &t.a, &t.b, &t.c, &t.d);
        let h = laxny::psi_doubleprime(&chain)?;
        let (r1, r2) = laxny::lambda_small(variant, &h, &s.e);
        let mut out: Vec<Rational> = Vec::new();
        for (a, b) in [(&l1, &r1), (&l2, &r2)] {
            let top = a.degree().max(b.degree()).unwrap_or(0);
            out.extend((0..=top).map(|k| a.coeff(k) - b.coeff(k)));
        }
        Ok(out)
    });
    Ok(residual_check("diagram_lambda", family, points, results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(kind: Kind, g: usize) -> Family {
        Family::new(kind, g).unwrap()
    }

    #[test]
    fn mumford_g2_report_is_exact_zero() {
        let rep = verify_family(fam(Kind::Mumford, 2), 20, 7);
        assert!(rep.passed(), "{:?}", rep);
        let j = rep.to_json();
        assert_eq!(j["checks"][0]["max_residual"], json!("0"));
    }

    #[test]
    fn brackets_vanish_for_all_families() {
        for kind in Kind::FRAMED {
            for g in 1..=2 {
                let rep = check_brackets(fam(kind, g), 5, 1);
                assert!(rep.passed, "{rep:?}");
            }
        }
    }

    #[test]
    fn bracket_antisymmetry() {
        let p = &sample_points(fam(Kind::PrymII, 2), 1, 3)[0];
        assert!(lie_bracket(p, 1, 1).unwrap().iter().all(Field::is_zero));
        let a = lie_bracket(p, 1, 2).unwrap();
        let b = lie_bracket(p, 2, 1).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| (x.clone() + y.clone()).is_zero()));
    }

    #[test]
    fn pushforwards_vanish() {
        for kind in [Kind::DLaxI, Kind::DLaxII] {
            for g in 1..=2 {
                let rep = check_pushforward(fam(kind, g), 5, 2);
                assert!(rep.passed, "{rep:?}");
            }
        }
        let zero_b0 = PhasePoint::<Rational>::zero(fam(Kind::DLaxII, 1));
        assert_eq!(pushforward_residual(&zero_b0, 1), Err(Error::ZeroB0));
    }

    #[test]
    fn ny_chain_maps_to_minus_two_d1() {
        for n in 3..=6 {
            let rep = check_ny_pushforward(n, 4, 5).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn ranks() {
        let p = &sample_points(fam(Kind::Mumford, 2), 1, 4)[0];
        assert_eq!(independence_rank(p).unwrap(), 2);
        let p = &sample_points(fam(Kind::DLaxII, 1), 1, 4)[0];
        assert_eq!(independence_rank(p).unwrap(), 1);
        // v = 0 kills every u-component of the frame
        let mut z = PhasePoint::<Rational>::zero(fam(Kind::Mumford, 2));
        z.coords[0] = <Rational as Field>::one();
        assert!(independence_rank(&z).unwrap() <= 2);
    }

    #[test]
    fn diagrams() {
        for g in 1..=2 {
            assert!(check_phi_diagram(fam(Kind::DLaxI, g), 5, 6).passed);
            assert!(check_phi_diagram(fam(Kind::DLaxII, g), 5, 6).passed);
        }
        for n in 3..=6 {
            let gauge = Gauge::Fixed(<Rational as Field>::from_ratio(1, 3));
            let rep = check_lambda_diagram(n, 5, 6, &gauge).unwrap();
            assert!(rep.passed, "{rep:?}");
        }
    }

    #[test]
    fn matrix_rank_float_and_exact() {
        let m = vec![vec![1.0, 2.0], vec![2.0, 4.0 + 1e-14]];
        assert_eq!(matrix_rank(&m), 1);
        let m = vec![vec![1.0, 2.0], vec![2.0, 5.0]];
        assert_eq!(matrix_rank(&m), 2);
    }
}
