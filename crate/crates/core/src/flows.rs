//! Commuting vector fields `D_1, ..., D_g` of the framed families.
//!
//! For each coordinate polynomial `P` the generating polynomial
//! `D(x2) P(x1) = sum_i x2^{pattern(i)} D_i P(x1)` is built at the point,
//! divided exactly, and `D_i` of a coordinate is read off as the coefficient
//! of `x1^j x2^{pattern(i)}`.

use crate::algebra::{exact_bivariate_quotient, BiPoly, Field, Perturbed, UniPoly, FLOAT_DIVISIBILITY_TOL};
use crate::error::{Error, Result};
use crate::phase::{spectral_data, Family, Kind, Layout, PhasePoint};

/// Direction vector in the coordinate layout of a phase point.
pub type Tangent<S> = Vec<S>;

/// The `g` tangents `D_1(p), ..., D_g(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFieldFrame<S> {
    pub family: Family,
    pub rows: Vec<Tangent<S>>,
}

impl<S: Field> VectorFieldFrame<S> {
    pub fn row(&self, i: usize) -> &Tangent<S> {
        &self.rows[i - 1]
    }
}

fn half<S: Field>() -> S {
    S::half()
}

/// Generating bivariate polynomials `D(x2) P(x1)`, one per materialized polynomial.
pub fn generating_polynomials<S: Field>(p: &PhasePoint<S>) -> Result<Vec<BiPoly<S>>> {
    let ps = p.polys();
    let one = || UniPoly::<S>::one();
    let x = UniPoly::<S>::x();
    let x1 = BiPoly::in_x1(&x);
    let x2 = BiPoly::in_x2(&x);
    let cross = |a: &UniPoly<S>, b: &UniPoly<S>| BiPoly::outer(a, b);
    let x1_minus_x2 = &x1 - &x2;
    match p.family.kind {
        Kind::Mumford | Kind::EvenMumford => {
            let (u, v, w) = (&ps[0], &ps[1], &ps[2]);
            let alpha = if p.family.kind == Kind::Mumford {
                one()
            } else {
                // x + w1 - u1
                let w1 = p.coords[2 * p.family.g].clone();
                let u1 = p.coords[0].clone();
                &x + &UniPoly::constant(w1 - u1)
            };
            let alpha12 = BiPoly::at_sum(&alpha);
            let du = exact_bivariate_quotient(&(&cross(u, v) - &cross(v, u)), &x1_minus_x2)?;
            let dv_q = exact_bivariate_quotient(&(&cross(w, u) - &cross(u, w)), &x1_minus_x2)?;
            let dv = (&dv_q - &(&alpha12 * &cross(u, u))).scale(&half());
            let dw_q = exact_bivariate_quotient(&(&cross(v, w) - &cross(w, v)), &x1_minus_x2)?;
            let dw = &dw_q + &(&alpha12 * &cross(v, u));
            Ok(vec![du, dv, dw])
        }
        Kind::PrymI | Kind::PrymII => {
            let (u, v, w) = (&ps[0], &ps[1], &ps[2]);
            let den = &(&x1 * &x1) - &(&x2 * &x2);
            let du_n = &(&x2 * &cross(u, v)) - &(&x1 * &cross(v, u));
            let du = exact_bivariate_quotient(&du_n, &den)?;
            let dv_q = exact_bivariate_quotient(&(&cross(w, u) - &cross(u, w)), &den)?;
            let dv = (&x1 * &(&dv_q - &cross(u, u))).scale(&half());
            let dw_n = &(&x1 * &cross(v, w)) - &(&x2 * &cross(w, v));
            let dw = &exact_bivariate_quotient(&dw_n, &den)? + &(&x1 * &cross(v, u));
            Ok(vec![du, dv, dw])
        }
        Kind::DLaxI | Kind::DLaxII => {
            let (a, b, c, d) = (&ps[0], &ps[1], &ps[2], &ps[3]);
            let m = a - d;
            let den = x1_minus_x2.scale(&S::from_i64(2));
            let bb = cross(b, b).scale(&half());
            let da = &exact_bivariate_quotient(&(&cross(c, b) - &cross(b, c)), &den)? - &bb;
            let db = exact_bivariate_quotient(&(&cross(b, &m) - &cross(&m, b)), &den)?;
            let dc = &exact_bivariate_quotient(&(&cross(&m, c) - &cross(c, &m)), &den)?
                + &cross(&m, b).scale(&half());
            let dd = &exact_bivariate_quotient(&(&cross(b, c) - &cross(c, b)), &den)? + &bb;
            Ok(vec![da, db, dc, dd])
        }
        k => Err(Error::InvalidArgument(format!("{k} has no D(x) frame; use the NY right-hand side"))),
    }
}

fn negligible<S: Field>(x: &S, scale: f64) -> bool {
    if S::is_exact() {
        x.is_zero()
    } else {
        x.magnitude() <= FLOAT_DIVISIBILITY_TOL * scale.max(1.0)
    }
}

/// Splits `D(x2) P(x1)` into `D_i P(x1)` for `i = 1..g`, rejecting x2-powers
/// outside the pattern.
fn split_pattern<S: Field>(layout: &Layout, name: &str, gen: &BiPoly<S>) -> Result<Vec<UniPoly<S>>> {
    let g = layout.family.g;
    let allowed: Vec<usize> = (1..=g).map(|i| layout.pattern(i)).collect();
    let scale = gen.max_norm();
    for row in gen.rows() {
        for (j, c) in row.coeffs().iter().enumerate() {
            if !allowed.contains(&j) && !negligible(c, scale) {
                return Err(Error::PatternOverflow { slot: name.to_string(), degree: j });
            }
        }
    }
    Ok((1..=g)
        .map(|i| {
            let e = layout.pattern(i);
            UniPoly::new(gen.rows().iter().map(|r| r.coeff(e)).collect())
        })
        .collect())
}

/// Tangent of `D_i` at `p` read from the per-polynomial derivatives.
fn read_tangent<S: Field>(layout: &Layout, dpolys: &[UniPoly<S>]) -> Result<Tangent<S>> {
    let scale = dpolys.iter().map(UniPoly::max_norm).fold(0.0, f64::max);
    let mut t = Vec::with_capacity(layout.coords.len());
    for c in &layout.coords {
        let (p0, d0) = c.slots[0];
        let val = dpolys[p0].coeff(d0);
        for &(p, d) in &c.slots[1..] {
            if !negligible(&(dpolys[p].coeff(d) - val.clone()), scale) {
                return Err(Error::FrameAssertion {
                    slot: c.name.clone(),
                    detail: format!(
                        "derivative of the shared coefficient differs between {} and {}",
                        layout.polys[p0].name, layout.polys[p].name
                    ),
                });
            }
        }
        t.push(val);
    }
    for (k, (shape, dp)) in layout.polys.iter().zip(dpolys).enumerate() {
        for (deg, c) in dp.coeffs().iter().enumerate() {
            if layout.coord_at(k, deg).is_some() || negligible(c, scale) {
                continue;
            }
            let detail = if Some(deg) == shape.monic {
                format!("leading coefficient x^{deg} must be preserved")
            } else {
                format!("derivative leaves the shape at x^{deg}")
            };
            return Err(Error::FrameAssertion { slot: shape.name.to_string(), detail });
        }
    }
    Ok(t)
}

/// `D_1(p), ..., D_g(p)`.
pub fn frame<S: Field>(p: &PhasePoint<S>) -> Result<VectorFieldFrame<S>> {
    let v = p.validate();
    if !v.is_empty() {
        return Err(Error::Shape(v));
    }
    let layout = p.family.layout();
    let gens = generating_polynomials(p)?;
    let per_poly = layout
        .polys
        .iter()
        .zip(&gens)
        .map(|(shape, gen)| split_pattern(&layout, shape.name, gen))
        .collect::<Result<Vec<_>>>()?;
    let rows = (0..p.family.g)
        .map(|i| {
            let dpolys: Vec<UniPoly<S>> = per_poly.iter().map(|d| d[i].clone()).collect();
            read_tangent(&layout, &dpolys)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorFieldFrame { family: p.family, rows })
}

/// `D_i(p)` for 1-based `i`.
pub fn field<S: Field>(p: &PhasePoint<S>, i: usize) -> Result<Tangent<S>> {
    check_index(p.family, i)?;
    Ok(frame(p)?.rows.swap_remove(i - 1))
}

pub(crate) fn check_index(family: Family, i: usize) -> Result<()> {
    if i == 0 || i > family.g {
        return Err(Error::InvalidArgument(format!("field index {i} outside 1..={}", family.g)));
    }
    Ok(())
}

/// `sum_i c_i D_i(p)`.
pub fn directional_field<S: Field>(p: &PhasePoint<S>, c: &[S]) -> Result<Tangent<S>> {
    if c.len() != p.family.g {
        return Err(Error::InvalidArgument(format!("direction needs {} entries, got {}", p.family.g, c.len())));
    }
    let fr = frame(p)?;
    Ok(combine(&fr.rows, c, p.coords.len()))
}

pub(crate) fn combine<S: Field>(rows: &[Tangent<S>], c: &[S], dim: usize) -> Tangent<S> {
    let mut out = vec![S::zero(); dim];
    for (row, ci) in rows.iter().zip(c) {
        if ci.is_zero() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o = o.clone() + ci.clone() * r.clone();
        }
    }
    out
}

/// Derivative of every spectral invariant along `D_i` at `p`, by the chain rule
/// through the spectral map evaluated on perturbation pairs.
pub fn invariant_derivative<S: Field>(p: &PhasePoint<S>, i: usize) -> Result<Vec<(String, S)>> {
    let t = field(p, i)?;
    let lifted = PhasePoint { family: p.family, coords: Perturbed::seed(&p.coords, &t) };
    let sd = spectral_data(&lifted)?;
    Ok(sd
        .named_invariants(p.family)
        .into_iter()
        .map(|(n, v)| (n, v.deriv))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rational;
    use crate::phase::random_point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        <Rational as Field>::from_ratio(n, d)
    }

    fn fam(kind: Kind, g: usize) -> Family {
        Family::new(kind, g).unwrap()
    }

    #[test]
    fn mumford_g1_example() {
        let p = PhasePoint::new(fam(Kind::Mumford, 1), vec![r(1, 1), r(2, 1), r(3, 1), r(5, 1)]).unwrap();
        let d1 = field(&p, 1).unwrap();
        assert_eq!(d1, vec![r(2, 1), r(-3, 2), r(-2, 1), r(-4, 1)]);
    }

    #[test]
    fn mumford_g1_matches_hand_formulas() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = random_point(fam(Kind::Mumford, 1), &mut rng);
            let (u1, v, w1, w2) = (p.coords[0].clone(), p.coords[1].clone(), p.coords[2].clone(), p.coords[3].clone());
            let expect = vec![
                v.clone(),
                r(1, 2) * (u1.clone() * w1.clone() - w2 - u1.clone() * u1.clone()),
                -v.clone(),
                v * (u1 - w1),
            ];
            assert_eq!(field(&p, 1).unwrap(), expect);
        }
    }

    #[test]
    fn zero_v_freezes_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in 1..4 {
            let mut p = random_point(fam(Kind::Mumford, g), &mut rng);
            for k in g..2 * g {
                p.coords[k] = r(0, 1);
            }
            let fr = frame(&p).unwrap();
            for row in &fr.rows {
                assert!(row[..g].iter().all(|x| x.is_zero()));
            }
        }
    }

    #[test]
    fn dlax_structural_zero() {
        // a = d = 0, b = x, c = x^2
        let p = PhasePoint::<Rational>::zero(fam(Kind::DLaxI, 1));
        let layout = p.family.layout();
        let d1 = field(&p, 1).unwrap();
        for (k, c) in layout.coords.iter().enumerate() {
            if c.name.starts_with('b') {
                assert!(d1[k].is_zero());
            }
        }
    }

    #[test]
    fn frames_exist_for_all_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for kind in Kind::FRAMED {
            for g in 1..4 {
                let p = random_point(fam(kind, g), &mut rng);
                let fr = frame(&p).unwrap();
                assert_eq!(fr.rows.len(), g);
                assert!(fr.rows.iter().all(|r| r.len() == p.family.dim()));
            }
        }
    }

    #[test]
    fn invariants_are_conserved_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for kind in Kind::FRAMED {
            for g in 1..4 {
                let p = random_point(fam(kind, g), &mut rng);
                for i in 1..=g {
                    for (name, d) in invariant_derivative(&p, i).unwrap() {
                        assert!(d.is_zero(), "{kind} g={g} D{i} {name}");
                    }
                }
            }
        }
    }

    #[test]
    fn mumford_example_invariants() {
        let p = PhasePoint::new(fam(Kind::Mumford, 1), vec![r(1, 1), r(2, 1), r(3, 1), r(5, 1)]).unwrap();
        let d = invariant_derivative(&p, 1).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.iter().all(|(_, x)| x.is_zero()));
    }

    #[test]
    fn b0_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for g in 1..4 {
            let p = random_point(fam(Kind::DLaxII, g), &mut rng);
            for row in frame(&p).unwrap().rows {
                assert!(row[0].is_zero());
            }
        }
    }

    #[test]
    fn directional_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_point(fam(Kind::EvenMumford, 2), &mut rng);
        let fr = frame(&p).unwrap();
        assert_eq!(directional_field(&p, &[r(1, 1), r(0, 1)]).unwrap(), fr.rows[0]);
        assert!(directional_field(&p, &[r(0, 1), r(0, 1)]).unwrap().iter().all(|x| x.is_zero()));
        let sum: Vec<Rational> = fr.rows[0].iter().zip(&fr.rows[1]).map(|(a, b)| a + b).collect();
        assert_eq!(directional_field(&p, &[r(1, 1), r(1, 1)]).unwrap(), sum);
    }

    #[test]
    fn float_frame_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for kind in Kind::FRAMED {
            let p = random_point(fam(kind, 2), &mut rng);
            let ex = frame(&p).unwrap();
            let fl = frame(&p.map(Field::to_f64)).unwrap();
            for (a, b) in ex.rows.iter().zip(&fl.rows) {
                for (x, y) in a.iter().zip(b) {
                    assert!((x.to_f64() - y).abs() <= 1e-9 * (1.0 + y.abs()));
                }
            }
        }
    }
}
