use std::collections::BTreeMap;

use mumford_core::algebra::{q_normalize, FactorialConvention, HalfInt, QLaurent, QRational};
use mumford_core::cohomology::*;
use num::{BigInt, BigRational, One, Signed, Zero};

fn pascal(n: usize) -> Vec<Vec<BigInt>> {
    let mut rows: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
    for i in 1..=n {
        let mut row = vec![BigInt::one(); i + 1];
        for k in 1..i {
            row[k] = &rows[i - 1][k - 1] + &rows[i - 1][k];
        }
        rows.push(row);
    }
    rows
}

#[test]
fn binomials_match_pascal() {
    let p = pascal(30);
    for n in 0..=30i64 {
        for k in -2..=n + 2 {
            let want = if (0..=n).contains(&k) { p[n as usize][k as usize].clone() } else { BigInt::zero() };
            assert_eq!(binomial(n, k), want, "C({n}, {k})");
        }
    }
}

#[test]
fn alternating_betti_sums() {
    for kind in SystemKind::ALL {
        for g in 1..=6 {
            let alt: BigInt = (0..=g as i64)
                .map(|k| if k % 2 == 0 { betti_affine(kind, g, k) } else { -betti_affine(kind, g, k) })
                .sum();
            let (a, c) = euler_char(kind, g);
            assert_eq!(a, c, "{kind} g={g}");
            assert_eq!(alt, a, "{kind} g={g}");
        }
    }
}

#[test]
fn prym_two_euler_is_twice_prym_one() {
    let p = pascal(30);
    for g in 1..=10usize {
        let s = if g % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        assert_eq!(&s * &p[2 * g + 2][g + 1], &s * &p[2 * g + 1][g] * 2);
        if g <= 6 {
            assert_eq!(euler_char(SystemKind::PrymII, g).0, euler_char(SystemKind::PrymI, g).0 * 2);
        }
    }
}

#[test]
fn spot_values() {
    assert_eq!(betti_affine(SystemKind::OddMumford, 2, 2), BigInt::from(5));
    assert_eq!(q_euler_limit(SystemKind::OddMumford, 1).unwrap(), BigInt::from(-1));
    assert_eq!(q_euler_limit(SystemKind::EvenMumford, 2).unwrap(), BigInt::from(5));
    assert_eq!(q_euler_limit(SystemKind::PrymII, 2).unwrap(), BigInt::from(20));
    assert_eq!(chi_q_hilbert(SystemKind::PrymI, 1).unwrap().to_q_string(), "-q^{-1} - 1 - q");
    assert!(chi_q_hilbert(SystemKind::PrymI, 0).is_err());
}

#[test]
fn odd_conventions_are_reported_not_resolved() {
    for g in 1..=4 {
        let omit = q_euler_report(SystemKind::OddMumford, g, FactorialConvention::OmitHalf).unwrap();
        let full = q_euler_report(SystemKind::OddMumford, g, FactorialConvention::Full).unwrap();
        assert!(omit.passed() && full.passed());
        assert_eq!(full.closed_limit, None, "full convention should have a pole at q = 1");
        if g == 1 {
            assert!(omit.agree);
            assert_eq!(omit.closed_limit, Some(omit.euler.clone()));
        } else {
            assert!(!omit.agree);
            assert_eq!(omit.closed_limit, None);
        }
    }
}

fn brackets(ks: impl Iterator<Item = i64>) -> QLaurent {
    ks.fold(QLaurent::one(), |acc, k| &acc * &QLaurent::bracket(HalfInt(k)))
}

#[test]
fn odd_oracle_has_a_single_half_bracket_denominator() {
    for g in 1..=6i64 {
        let sign = if g % 2 == 0 { 1 } else { -1 };
        let num = &(&QLaurent::monomial(BigInt::from(sign), -g * g) * &QLaurent::bracket(HalfInt(1)))
            * &brackets((1..=2 * g + 1).map(|k| 2 * k));
        let den = &(&QLaurent::bracket(HalfInt(2 * g + 1)) * &brackets((1..=g).map(|k| 2 * k)))
            * &brackets((1..=g + 1).map(|k| 2 * k));
        let want = q_normalize(&QRational::new(num, den).unwrap()).unwrap();
        assert_eq!(chi_q_hilbert(SystemKind::OddMumford, g as usize).unwrap(), want, "g={g}");
    }
}

/// Power series in `t = q^{1/2}` starting at `t^low`, valid below `t^high`.
struct Series {
    low: i64,
    coeffs: Vec<BigRational>,
    high: i64,
}

impl Series {
    fn at(&self, e: i64) -> BigRational {
        let i = e - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigRational::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Multiplication by `1 - t^e`.
    fn times_bracket(&self, e: i64) -> Series {
        let low = self.low.min(self.low + e);
        let high = self.high.min(self.high + e);
        let coeffs = (low..high).map(|k| self.at(k) - self.at(k - e)).collect();
        Series { low, coeffs, high }
    }
}

/// Monomial counts of the graded polynomial ring on the given generators.
fn ring_series(generators: &[HalfInt], n: usize) -> Series {
    let mut c = vec![BigInt::zero(); n];
    c[0] = BigInt::one();
    for d in generators {
        let w = d.doubled() as usize;
        for k in w..n {
            let add = c[k - w].clone();
            c[k] += add;
        }
    }
    Series { low: 0, coeffs: c.into_iter().map(BigRational::from_integer).collect(), high: n as i64 }
}

/// Laurent expansion of a reduced ratio with `den(0) != 0`.
fn expand(x: &QRational, upto: i64) -> BTreeMap<i64, BigRational> {
    let den: Vec<BigInt> = {
        let t = x.den.terms();
        let top = *t.keys().next_back().unwrap();
        (0..=top).map(|k| t.get(&k).cloned().unwrap_or_default()).collect()
    };
    assert!(!den[0].is_zero());
    let nt = x.num.terms();
    let low = *nt.keys().next().unwrap();
    let mut out: BTreeMap<i64, BigRational> = BTreeMap::new();
    for e in low..upto {
        let mut acc = BigRational::from_integer(nt.get(&e).cloned().unwrap_or_default());
        for (k, dk) in den.iter().enumerate().skip(1) {
            if let Some(prev) = out.get(&(e - k as i64)) {
                acc -= prev * BigRational::from_integer(dk.clone());
            }
        }
        out.insert(e, acc / BigRational::from_integer(den[0].clone()));
    }
    out
}

#[test]
fn hilbert_form_matches_monomial_counting() {
    for kind in SystemKind::ALL {
        for g in 1..=3 {
            let p = presentation(kind, g);
            let mut s = ring_series(&p.generators, 80);
            for d in p.relations.iter().chain(&p.time_forms) {
                s = s.times_bracket(d.doubled());
            }
            let chi = chi_q_hilbert(kind, g).unwrap();
            let exp = expand(&chi, s.high);
            let mut checked = 0;
            for e in s.low..s.high {
                let want = exp.get(&e).cloned().unwrap_or_default();
                assert_eq!(s.at(e), want, "{kind} g={g} t^{e}");
                checked += 1;
            }
            assert!(checked > 20, "{kind} g={g}: only {checked} coefficients compared");
        }
    }
}

#[test]
fn hilbert_form_numeric_values() {
    for kind in SystemKind::ALL {
        for g in 1..=4 {
            let p = presentation(kind, g);
            let chi = chi_q_hilbert(kind, g).unwrap();
            for qv in [0.2f64, 0.55, 0.9] {
                let br = |d: &HalfInt| 1.0 - qv.powf(d.doubled() as f64 / 2.0);
                let num: f64 = p.relations.iter().chain(&p.time_forms).map(br).product();
                let den: f64 = p.generators.iter().map(br).product();
                let got = chi.eval_t(qv.sqrt());
                assert!((got - num / den).abs() <= 1e-9 * (num / den).abs().max(1.0), "{kind} g={g} q={qv}");
            }
        }
    }
}

#[test]
fn table_rows() {
    let rows = cohomology_table(3).unwrap();
    assert_eq!(rows.len(), 4 * (2 + 3 + 4));
    let row = rows.iter().find(|r| r.kind == SystemKind::OddMumford && r.g == 2 && r.k == 2).unwrap();
    assert_eq!(row.betti, BigInt::from(5));
    assert!(rows.iter().all(|r| r.limit == r.euler && !r.betti.is_negative()));
}
