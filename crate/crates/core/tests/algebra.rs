use mumford_core::algebra::*;
use num::{BigInt, BigRational, One, Zero};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=7).prop_map(|(n, d)| q(n, d))
}

fn poly(max_len: usize) -> impl Strategy<Value = UniPoly<Rational>> {
    prop::collection::vec(rational(), 0..=max_len).prop_map(UniPoly::new)
}

fn bipoly() -> impl Strategy<Value = BiPoly<Rational>> {
    prop::collection::vec(prop::collection::vec(rational(), 1..=3), 1..=3).prop_map(BiPoly::from_matrix)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_axioms(a in poly(4), b in poly(4), c in poly(4)) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
    }

    #[test]
    fn division_with_remainder(a in poly(6), b in poly(3)) {
        prop_assume!(!b.is_zero());
        let (quo, rem) = a.div_rem(&b).unwrap();
        prop_assert_eq!(&(&quo * &b) + &rem, a);
        prop_assert!(rem.is_zero() || rem.degree() < b.degree());
    }

    #[test]
    fn exact_quotient_inverts_product(a in poly(4), b in poly(3)) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!((&a * &b).exact_div(&b).unwrap(), a);
    }

    #[test]
    fn bivariate_quotient_inverts_product(a in bipoly(), b in bipoly()) {
        prop_assume!(!b.is_zero());
        prop_assert_eq!(exact_bivariate_quotient(&(&a * &b), &b).unwrap(), a);
    }

    #[test]
    fn dual_numbers_differentiate(p in poly(5), x in rational(), dx in rational()) {
        let lifted = p.map(|c| Perturbed::constant(c.clone()));
        let y = lifted.eval(&Perturbed::new(x.clone(), dx.clone()));
        prop_assert_eq!(y.value, p.eval(&x));
        prop_assert_eq!(y.deriv, p.derivative().eval(&x) * dx);
    }

    #[test]
    fn normalize_is_idempotent_and_value_preserving(
        num in prop::collection::vec((-4i64..=6, -3i64..=3), 1..4),
        den in prop::collection::vec((-4i64..=6, -3i64..=3), 1..4),
        common in prop::collection::vec(1i64..=4, 0..3),
    ) {
        let mut n = QLaurent::from_terms(num);
        let mut d = QLaurent::from_terms(den);
        prop_assume!(!n.is_zero() && !d.is_zero());
        for k in common {
            n = &n * &QLaurent::bracket(HalfInt(k));
            d = &d * &QLaurent::bracket(HalfInt(k));
        }
        let x = QRational::new(n, d).unwrap();
        let r = q_normalize(&x).unwrap();
        prop_assert_eq!(q_normalize(&r).unwrap(), r.clone());
        prop_assert_eq!(&x.num * &r.den, &r.num * &x.den);
    }
}

#[test]
fn integer_factorial_shape() {
    for k in 0..8i64 {
        for conv in [FactorialConvention::Full, FactorialConvention::OmitHalf] {
            let f = q_factorial(HalfInt::int(k), conv);
            assert_eq!(f.min_exp(), Some(0));
            assert_eq!(f.max_exp(), Some(k * (k + 1)));
            let mut expect = QLaurent::one();
            for j in 1..=k {
                expect = &expect * &(&QLaurent::one() - &QLaurent::monomial(BigInt::one(), 2 * j));
            }
            assert_eq!(f, expect);
        }
    }
}

#[test]
fn half_integer_conventions_differ_by_the_half_bracket() {
    for k in [1i64, 3, 5, 7] {
        let full = q_factorial(HalfInt(k), FactorialConvention::Full);
        let omit = q_factorial(HalfInt(k), FactorialConvention::OmitHalf);
        assert_eq!(full, &omit * &QLaurent::bracket(HalfInt(1)));
        assert!(full.at_one().is_zero());
    }
}

#[test]
fn limits_at_one() {
    let three = QLaurent::bracket(HalfInt::int(3));
    let one = QLaurent::bracket(HalfInt::int(1));
    let r = QRational::new(three, one.clone()).unwrap();
    assert_eq!(q_limit_at_one(&r).unwrap(), BigRational::from_integer(BigInt::from(3)));
    let pole = QRational::new(QLaurent::one(), one).unwrap();
    assert!(matches!(q_limit_at_one(&pole), Err(mumford_core::Error::PoleAtOne)));
}

#[test]
fn q_strings() {
    let x = QLaurent::from_terms([(-2, -1), (0, -1), (2, -1)]);
    assert_eq!(x.to_q_string(), "-q^{-1} - 1 - q");
    assert_eq!(QLaurent::from_terms([(1, 2)]).to_q_string(), "2q^{1/2}");
}

#[test]
fn rational_text_roundtrip() {
    for s in ["0", "-3", "7/4", "-22/7"] {
        assert_eq!(format_rational(&parse_rational(s).unwrap()), s);
    }
    assert_eq!(parse_rational("6/8").unwrap(), q(3, 4));
    assert!(parse_rational("1/0").is_none());
    assert!(parse_rational("x").is_none());
}

#[test]
fn roots_expand() {
    let p = from_roots(&[q(1, 1), q(-2, 1), q(1, 2)]);
    assert_eq!(p.leading(), q(1, 1));
    for r in [q(1, 1), q(-2, 1), q(1, 2)] {
        assert!(Zero::is_zero(&p.eval(&r)));
    }
}
