use mumford_core::algebra::{Field, Rational};
use mumford_core::flows::field;
use mumford_core::laxny::phi_map;
use mumford_core::phase::{random_point, Family, Kind, PhasePoint};
use mumford_core::verification::*;
use num::BigInt;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i64) -> Rational {
    Rational::from(BigInt::from(n))
}

fn point(kind: Kind, g: usize, seed: u64) -> PhasePoint<Rational> {
    random_point(Family::new(kind, g).unwrap(), &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jvp_is_linear(seed in any::<u64>(), k in 0usize..6, a in -4i64..=4, b in -4i64..=4) {
        let p = point(Kind::FRAMED[k], 2, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let n = p.coords.len();
        let v: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-3..=3))).collect();
        let w: Vec<Rational> = (0..n).map(|_| r(rng.gen_range(-3..=3))).collect();
        let mix: Vec<Rational> = v.iter().zip(&w).map(|(x, y)| r(a) * x + r(b) * y).collect();
        let lhs = jvp(&p, 1, &mix).unwrap();
        let jv = jvp(&p, 1, &v).unwrap();
        let jw = jvp(&p, 1, &w).unwrap();
        let rhs: Vec<Rational> = jv.iter().zip(&jw).map(|(x, y)| r(a) * x + r(b) * y).collect();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn jvp_product_rule(seed in any::<u64>(), k in 0usize..6) {
        let p = point(Kind::FRAMED[k], 2, seed);
        let family = p.family;
        let v = field(&p, 2).unwrap();
        let both = |x: &[_]| -> mumford_core::Result<Vec<_>> {
            let q = PhasePoint::new(family, x.to_vec())?;
            let a = field(&q, 1)?;
            let b = field(&q, 2)?;
            Ok(a.into_iter().zip(b).map(|(x, y)| x * y).collect())
        };
        let lhs = jvp_map(both, &p.coords, &v).unwrap();
        let (a, b) = (field(&p, 1).unwrap(), field(&p, 2).unwrap());
        let (da, db) = (jvp(&p, 1, &v).unwrap(), jvp(&p, 2, &v).unwrap());
        let rhs: Vec<Rational> = (0..a.len()).map(|i| &da[i] * &b[i] + &a[i] * &db[i]).collect();
        prop_assert_eq!(lhs, rhs);
    }
}

#[test]
fn jvp_matches_central_differences() {
    for kind in Kind::FRAMED {
        let p = point(kind, 2, 5).map(Field::to_f64);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v: Vec<f64> = (0..p.coords.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = 1e-6;
        let shift = |s: f64| PhasePoint {
            family: p.family,
            coords: p.coords.iter().zip(&v).map(|(x, d)| x + s * d).collect(),
        };
        let plus = field(&shift(h), 1).unwrap();
        let minus = field(&shift(-h), 1).unwrap();
        let exact = jvp(&p, 1, &v).unwrap();
        for ((a, b), j) in plus.iter().zip(&minus).zip(&exact) {
            let fd = (a - b) / (2.0 * h);
            assert!((fd - j).abs() <= 1e-5 * j.abs().max(1.0), "{kind}: {fd} vs {j}");
        }
    }
}

#[test]
fn variant_two_pushforward_literal_form() {
    let family = Family::new(Kind::DLaxII, 2).unwrap();
    for (b0, seed) in [(1i64, 0u64), (1, 1), (2, 2), (-3, 3)] {
        let mut p = point(Kind::DLaxII, 2, seed);
        p.coords[0] = r(b0);
        for i in 1..=2 {
            let d = field(&p, i).unwrap();
            let lhs = jvp_map(|x| Ok(phi_map(&PhasePoint::new(family, x.to_vec())?)?.coords), &p.coords, &d).unwrap();
            let rhs = field(&phi_map(&p).unwrap(), i).unwrap();
            let literal: Vec<Rational> = lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect();
            let scaled: Vec<Rational> = lhs.iter().zip(&rhs).map(|(a, b)| a - r(b0) * b).collect();
            assert!(scaled.iter().all(Field::is_zero));
            assert_eq!(literal.iter().all(Field::is_zero), b0 == 1, "b0 = {b0}");
            assert_eq!(pushforward_residual(&p, i).unwrap(), scaled);
        }
    }
}

#[test]
fn pushforward_rejects_zero_b0() {
    let mut p = point(Kind::DLaxII, 1, 0);
    p.coords[0] = r(0);
    assert!(pushforward_residual(&p, 1).is_err());
    assert!(pushforward_residual(&point(Kind::Mumford, 1, 0), 1).is_err());
}

#[test]
fn ny_pushforward_is_minus_two_d1() {
    for n in 3..=6 {
        let rep = check_ny_pushforward(n, 10, 4).unwrap();
        assert!(rep.passed, "{rep:?}");
    }
}

#[test]
fn rank_is_generic() {
    for kind in Kind::FRAMED {
        for g in 1..=3 {
            let rep = check_rank(Family::new(kind, g).unwrap(), 20, 9);
            assert!(rep.successes.unwrap() >= 19, "{kind} g={g}: {rep:?}");
        }
    }
}

#[test]
fn matrix_rank_basics() {
    let rows = vec![vec![r(1), r(2), r(3)], vec![r(2), r(4), r(6)], vec![r(0), r(1), r(1)]];
    assert_eq!(matrix_rank(&rows), 2);
    assert_eq!(matrix_rank::<Rational>(&[]), 0);
}

#[test]
fn reports_serialize_residuals_as_strings() {
    let rep = verify_family(Family::new(Kind::PrymII, 2).unwrap(), 6, 3);
    assert!(rep.passed());
    let j = rep.to_json();
    assert_eq!(j["checks"][0]["max_residual"], "0");
    assert_eq!(j["checks"][2]["successes"], 6);
}

#[test]
fn sampling_is_seeded() {
    let f = Family::new(Kind::DLaxII, 2).unwrap();
    assert_eq!(sample_points(f, 5, 1), sample_points(f, 5, 1));
    assert_ne!(sample_points(f, 5, 1), sample_points(f, 5, 2));
    assert!(sample_points(f, 50, 3).iter().all(|p| !Field::is_zero(&p.coords[0])));
    for s in sample_ny_states(6, 30, 1) {
        assert!(Field::is_zero(&s.constraint()));
    }
}
