use mumford_core::algebra::{Field, Rational};
use mumford_core::phase::*;
use mumford_core::Error;
use num::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn one() -> Rational {
    Rational::from(BigInt::from(1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn spectral_curve_shape(seed in any::<u64>(), k in 0usize..4, g in 1usize..=3) {
        let kind = [Kind::Mumford, Kind::EvenMumford, Kind::PrymI, Kind::PrymII][k];
        let family = Family::new(kind, g).unwrap();
        let p = random_point(family, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(p.validate().is_empty());
        let SpectralData::Curve(f) = spectral_map(&p).unwrap() else { panic!("curve expected") };
        let deg = match kind {
            Kind::Mumford => 2 * g + 1,
            Kind::EvenMumford => 2 * g + 2,
            Kind::PrymI => 4 * g + 2,
            _ => 4 * g + 4,
        };
        prop_assert_eq!(f.degree(), Some(deg));
        prop_assert_eq!(f.leading(), one());
        if matches!(kind, Kind::PrymI | Kind::PrymII) {
            for i in (1..deg).step_by(2) {
                prop_assert!(Field::is_zero(&f.coeff(i)), "odd coefficient x^{} nonzero", i);
            }
        }
        prop_assert_eq!(spectral_data(&p).unwrap().invariants(family).len(), deg / if deg > 2 * g + 2 { 2 } else { 1 });
    }

    #[test]
    fn json_roundtrip(seed in any::<u64>(), k in 0usize..6, g in 1usize..=3) {
        let family = Family::new(Kind::FRAMED[k], g).unwrap();
        let p = random_point(family, &mut ChaCha8Rng::seed_from_u64(seed));
        let doc = p.to_json();
        prop_assert_eq!(detect_realization(&doc).unwrap(), Realization::Exact);
        prop_assert_eq!(PhasePoint::<Rational>::from_json(&doc).unwrap(), p.clone());
        let pf = p.map(Field::to_f64);
        prop_assert_eq!(PhasePoint::<f64>::from_json(&pf.to_json()).unwrap(), pf);
    }
}

#[test]
fn dlax_pair_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for g in 1..=3 {
        for kind in [Kind::DLaxI, Kind::DLaxII] {
            let family = Family::new(kind, g).unwrap();
            let p = random_point(family, &mut rng);
            let SpectralData::Pair(f1, f2) = dlax_invariants(&p).unwrap() else { panic!("pair expected") };
            assert!(f1.degree().unwrap() <= g + 1);
            let top = if kind == Kind::DLaxI { 2 * g + 1 } else { 2 * g + 2 };
            assert_eq!(f2.degree(), Some(top), "{kind} g={g}");
            assert_eq!(f2.leading().abs(), one());
        }
    }
}

#[test]
fn mixed_scalars_rejected() {
    let doc = json!({"family": "mumford", "g": 1, "u": ["1"], "v": [2.0], "w": ["0", "1"]});
    assert!(matches!(detect_realization(&doc), Err(Error::MixedScalars)));
    assert!(PhasePoint::<Rational>::from_json(&doc).is_err());
}

#[test]
fn declared_genus_must_match() {
    let doc = json!({"family": "mumford", "g": 2, "u": ["1"], "v": ["2"], "w": ["0", "1"]});
    assert!(PhasePoint::<Rational>::from_json(&doc).is_err());
}

#[test]
fn ny_state_json_and_constraint() {
    let q: Vec<Rational> = [1, 2, 3, 2].iter().map(|&x| Rational::from(BigInt::from(x))).collect();
    let e = vec![Rational::from(BigInt::from(0)); 4];
    let s = NYState::new(q, e).unwrap();
    assert!(Field::is_zero(&s.constraint()));
    assert_eq!(s.family().unwrap(), Family::new(Kind::NYII, 1).unwrap());
    assert_eq!(NYState::<Rational>::from_json(&s.to_json()).unwrap(), s);
    let bad = NYState::new(vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]);
    assert!(bad.is_err() || !bad.unwrap().validate().is_empty());
}

#[test]
fn dimensions() {
    for g in 1..=4 {
        assert_eq!(Family::new(Kind::Mumford, g).unwrap().dim(), 3 * g + 1);
        assert_eq!(Family::new(Kind::NYI, g).unwrap().dim(), 2 * g + 1);
        assert_eq!(Family::new(Kind::NYII, g).unwrap().dim(), 2 * g + 2);
    }
    assert!(Family::new(Kind::Mumford, 0).is_err());
}
