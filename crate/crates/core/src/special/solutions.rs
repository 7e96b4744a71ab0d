//! Closed-form genus-1 trajectories of the Mumford flow `D_1` and of the
//! Noumi-Yamada chains with N = 3 and N = 4.

use num::complex::Complex64 as C64;

use super::elliptic::{elliptic_from_cubic, EllipticData};
use crate::error::{Error, Result};
use crate::integrator::{Trajectory, BLOW_UP};
use crate::laxny::{self, Gauge};
use crate::parallel::par_map;
use crate::phase::{Family, Kind, NYState, PhasePoint, Variant};

/// `x(t) = 4 p(t + c) - f1/3` with `(dx/dt)^2 = f(x)`, read as
/// `u1 = -x`, `v_{3/2} = -dx/dt` and `w = (f - v^2) / u`.
#[derive(Clone, Debug)]
pub struct MumfordG1 {
    pub ed: EllipticData,
    pub c: C64,
}

fn spectral_cubic(p: &PhasePoint<f64>) -> [f64; 3] {
    let (u1, v, w1, w2) = (p.coords[0], p.coords[1], p.coords[2], p.coords[3]);
    [u1 + w1, w2 + u1 * w1, u1 * w2 + v * v]
}

/// Closed-form `D_1` trajectory through `p0` on the level set of `f`.
pub fn mumford_g1_exact(f: [f64; 3], p0: &PhasePoint<f64>) -> Result<MumfordG1> {
    if p0.family != Family::new(Kind::Mumford, 1)? {
        return Err(Error::InvalidArgument(format!("expected a g=1 Mumford point, got {}", p0.family)));
    }
    let own = spectral_cubic(p0);
    let scale = 1.0 + p0.coords.iter().fold(0.0f64, |m, x| m.max(x.abs())).powi(2);
    let gap = own.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > 1e-9 * scale {
        return Err(Error::InvalidArgument(format!("p0 is off the level set (gap {gap:.3e})")));
    }
    let ed = elliptic_from_cubic(f)?;
    let (u1, v) = (p0.coords[0], p0.coords[1]);
    let x0 = C64::new((-u1 + f[0] / 3.0) / 4.0, 0.0);
    let y0 = C64::new(-v / 4.0, 0.0);
    let c = ed.wp_inverse(x0, y0)?;
    Ok(MumfordG1 { ed, c })
}

impl MumfordG1 {
    pub fn f(&self) -> [f64; 3] {
        self.ed.f
    }

    /// `(x, dx/dt)` at time `t`.
    pub fn x(&self, t: f64) -> Result<(C64, C64)> {
        let (p, dp) = self.ed.wp_both(C64::new(t, 0.0) + self.c).map_err(|e| match e {
            Error::LatticePole => Error::PoleHit(t),
            e => e,
        })?;
        let x = p * 4.0 - self.ed.f[0] / 3.0;
        if x.norm() > BLOW_UP {
            return Err(Error::PoleHit(t));
        }
        Ok((x, dp * 4.0))
    }

    /// `(u1, v_{3/2}, w1, w2)` at time `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (x, dx) = self.x(t)?;
        let [f1, f2, f3] = self.ed.f;
        let u1 = -x.re;
        let v = -dx.re;
        let w1 = f1 - u1;
        let w2 = f2 - u1 * w1;
        let rem = f3 - v * v - u1 * w2;
        let scale = 1.0 + u1.abs().powi(3) + v * v + f3.abs();
        if rem.abs() > 1e-8 * scale {
            return Err(Error::NonDivisible { remainder: rem.abs() });
        }
        Ok(vec![u1, v, w1, w2])
    }

    /// Abel coordinate `z = (t + c) / (2 omega1)` on `C / (Z + tau Z)`.
    pub fn abel(&self, t: f64) -> C64 {
        (C64::new(t, 0.0) + self.c) / (self.ed.omega1 * 2.0)
    }

    /// Samples in the integrator CSV layout (`u1,v3/2,w1,w2` then `f1,f2,f3`).
    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        let fam = Family::new(Kind::Mumford, 1)?;
        let states = par_map(times.to_vec(), |t: f64| self.eval(t)).into_iter().collect::<Result<Vec<_>>>()?;
        let invariant_log: Vec<Vec<f64>> = states
            .iter()
            .map(|s| spectral_cubic(&PhasePoint { family: fam, coords: s.clone() }).to_vec())
            .collect();
        let drift = drift(&invariant_log);
        Ok(Trajectory {
            coord_names: fam.layout().names(),
            invariant_names: (1..=3).map(|i| format!("f{i}")).collect(),
            times: times.to_vec(),
            states,
            invariant_log,
            drift,
        })
    }
}

fn drift(log: &[Vec<f64>]) -> f64 {
    let Some(first) = log.first() else { return 0.0 };
    log.iter().flat_map(|r| r.iter().zip(first).map(|(a, b)| (a - b).abs())).fold(0.0, f64::max)
}

/// Closed-form NY trajectory at g=1, built from the Mumford solution through
/// `Phi o Lambda` (canonical gauge for N = 4) and the inverse relations.
///
/// NY time `t` runs along the Mumford flow as `s = rate * t`.
#[derive(Clone, Debug)]
pub struct NyG1 {
    pub variant: Variant,
    pub e: Vec<f64>,
    pub h: [f64; 2],
    pub b0: Option<f64>,
    pub rate: f64,
    pub mumford: MumfordG1,
}

/// Deviation of the displayed closed forms from the composite route.
#[derive(Clone, Debug)]
pub struct DisplayedReport {
    pub max_deviation: f64,
    pub samples: usize,
    /// Set when the deviation exceeds the tolerance.
    pub mismatch: Option<Error>,
}

pub fn q1_exact(variant: Variant, h: Option<&[f64]>, e: &[f64], q0: &[f64]) -> Result<NyG1> {
    let n = match variant {
        Variant::I => 3,
        Variant::II => 4,
    };
    if q0.len() != n || e.len() != n {
        return Err(Error::InvalidArgument(format!("variant {variant:?} needs {n} q's and {n} e's")));
    }
    let state = NYState::new(q0.to_vec(), e.to_vec())?;
    let own = laxny::psi_doubleprime_q(&state, &Gauge::Canonical)?;
    if let Some(h) = h {
        let scale = 1.0 + own.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if h.len() != 2 || h.iter().zip(&own).any(|(a, b)| (a - b).abs() > 1e-9 * scale) {
            return Err(Error::InvalidArgument(format!("h = {h:?} does not match q0 (expected {own:?})")));
        }
    }
    let l0 = laxny::composite_mumford(&state, &Gauge::Canonical)?;
    let f = spectral_cubic(&l0);
    let mumford = mumford_g1_exact(f, &l0)?;
    let (b0, rate) = match variant {
        Variant::I => (None, -2.0),
        Variant::II => {
            let b0 = q0[0] + q0[2];
            (Some(b0), -2.0 * b0)
        }
    };
    Ok(NyG1 { variant, e: e.to_vec(), h: [own[0], own[1]], b0, rate, mumford })
}

impl NyG1 {
    fn mumford_at(&self, t: f64) -> Result<(f64, f64)> {
        let l = self.mumford.eval(self.rate * t).map_err(|e| match e {
            Error::PoleHit(_) => Error::PoleHit(t),
            e => e,
        })?;
        Ok((l[0], l[1]))
    }

    /// `q(t)`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let (u1, v) = self.mumford_at(t)?;
        let q = match self.b0 {
            None => laxny::q_from_mumford_i(&u1, &v, &self.h, &self.e),
            Some(b0) => laxny::q_from_mumford_ii(&u1, &v, &b0, &self.h, &self.e),
        }
        .map_err(|_| Error::PoleHit(t))?;
        if q.iter().any(|x| !x.is_finite() || x.abs() > BLOW_UP) {
            return Err(Error::PoleHit(t));
        }
        Ok(q)
    }

    /// The displayed closed forms evaluated with `p = -u1` and `p' = -2 v_{3/2}`
    /// (the argument derivative of the half-argument form).
    pub fn displayed(&self, t: f64) -> Result<Vec<f64>> {
        let (u1, v) = self.mumford_at(t)?;
        let (p, dp) = (-u1, -2.0 * v);
        let (h1, h3) = (self.h[0], self.h[1]);
        let e = &self.e;
        let nz = |x: f64| if x == 0.0 { Err(Error::PoleHit(t)) } else { Ok(x) };
        match self.b0 {
            None => {
                let a = nz(-dp + h1 * p + h3)?;
                let d = nz(2.0 * (p - e[0]))?;
                let q1 = a / d;
                let q2 = -2.0 * (p - e[0]) * (p - e[1]) / a;
                let q3 = -(h1 * e[0] + h3) / (p - e[0]) + 2.0 * (p - e[1]) * (e[2] - e[0]) / a;
                Ok(vec![q1, q2, q3])
            }
            Some(b0) => {
                let a = |ej: f64| 2.0 * ej * p - 2.0 * b0 * dp + p * h1 + h3;
                let q1 = 2.0 * p * b0 * (e[1] - p) / nz(a(e[1]))?;
                let q2 = a(e[1]) * a(e[2]) / nz(2.0 * p * b0 * (-2.0 * b0 * dp + 2.0 * p * p + p * h1 + h3))?;
                Ok(vec![q1, q2, b0 - q1, b0 - q2])
            }
        }
    }

    /// Compares [`displayed`](Self::displayed) with [`eval`](Self::eval) at
    /// the given times; pole times are skipped.
    pub fn compare_displayed(&self, times: &[f64], tol: f64) -> DisplayedReport {
        let mut worst = 0.0f64;
        let mut samples = 0;
        for &t in times {
            if let (Ok(a), Ok(b)) = (self.eval(t), self.displayed(t)) {
                let scale = 1.0 + a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let d = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale;
                worst = worst.max(d);
                samples += 1;
            }
        }
        let mismatch = (worst > tol).then(|| Error::NormalizationMismatch { max_deviation: worst });
        DisplayedReport { max_deviation: worst, samples, mismatch }
    }

    /// `max_i |dq_i/dt - rhs_i|` with central differences of step `h`.
    pub fn ode_residual(&self, t: f64, h: f64) -> Result<f64> {
        let (a, b) = (self.eval(t + h)?, self.eval(t - h)?);
        let rhs = laxny::ny_rhs_unchecked(&self.eval(t)?, &self.e);
        Ok(a.iter()
            .zip(&b)
            .zip(&rhs)
            .map(|((x, y), r)| ((x - y) / (2.0 * h) - r).abs())
            .fold(0.0, f64::max))
    }

    /// Samples in the integrator CSV layout (`q1..qN`, then `h1/2,h3/2[,constraint]`).
    pub fn trajectory(&self, times: &[f64]) -> Result<Trajectory> {
        let states = par_map(times.to_vec(), |t: f64| self.eval(t)).into_iter().collect::<Result<Vec<_>>>()?;
        let mut invariant_names = vec!["h1/2".to_string(), "h3/2".to_string()];
        if self.b0.is_some() {
            invariant_names.push("constraint".into());
        }
        let invariant_log = states
            .iter()
            .map(|q| {
                let s = NYState { q: q.clone(), e: self.e.clone() };
                let mut out = laxny::psi_doubleprime_q(&s, &Gauge::Canonical)?;
                if self.b0.is_some() {
                    out.push(s.constraint());
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        let drift = drift(&invariant_log);
        Ok(Trajectory {
            coord_names: (1..=self.e.len()).map(|k| format!("q{k}")).collect(),
            invariant_names,
            times: times.to_vec(),
            states,
            invariant_log,
            drift,
        })
    }
}
