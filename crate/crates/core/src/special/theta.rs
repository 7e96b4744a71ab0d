//! Riemann theta functions with rational characteristics and the
//! hyperelliptic inverse-Abel formula for `u(x)`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num::complex::Complex64 as C64;
use num::Zero;
use serde_json::{json, Value};

use super::elliptic::EllipticData;
use crate::error::{Error, Result};

/// Default target for the truncation tail, relative to the dominant term.
pub const THETA_TOL: f64 = 1e-16;

const PI: f64 = std::f64::consts::PI;

/// A truncated theta value with an upper bound on the omitted tail.
#[derive(Clone, Copy, Debug)]
pub struct ThetaValue {
    pub value: C64,
    pub bound: f64,
    /// Sum of the moduli of the retained terms.
    pub mass: f64,
}

/// Characteristic `(eta, eta')` with `int_inf^{a_k} w = Omega eta + eta'`.
#[derive(Clone, Debug, PartialEq)]
pub struct Characteristic {
    pub eta: Vec<f64>,
    pub eta_prime: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ThetaData {
    pub g: usize,
    pub omega: Vec<Vec<C64>>,
    pub characteristics: Vec<Characteristic>,
    pub delta: Vec<C64>,
    pub v: Vec<usize>,
    pub branch_x: Vec<C64>,
    /// Truncation radius used by [`lambda_functions`].
    pub radius: usize,
}

struct Imag {
    y: DMatrix<f64>,
    lambda_min: f64,
}

fn imag_part(omega: &[Vec<C64>]) -> Result<Imag> {
    let g = omega.len();
    if g == 0 || omega.iter().any(|r| r.len() != g) {
        return Err(Error::InvalidArgument("period matrix must be square and non-empty".into()));
    }
    let norm = omega.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max);
    for i in 0..g {
        for j in 0..i {
            if (omega[i][j] - omega[j][i]).norm() > 1e-12 * norm.max(1.0) {
                return Err(Error::InvalidArgument("period matrix is not symmetric".into()));
            }
        }
    }
    let y = DMatrix::from_fn(g, g, |i, j| 0.5 * (omega[i][j].im + omega[j][i].im));
    let lambda_min = SymmetricEigen::new(y.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lambda_min > 0.0) {
        return Err(Error::NonConvergent(format!("Im Omega is not positive definite (min eigenvalue {lambda_min:.3e})")));
    }
    Ok(Imag { y, lambda_min })
}

fn tail(g: usize, lambda_min: f64, r: usize) -> f64 {
    let mut s = 0.0;
    for k in r + 1..r + 200 {
        let shell = 2.0 * g as f64 * (2.0 * k as f64 + 1.0).powi(g as i32 - 1);
        let t = shell * (-PI * lambda_min * (k as f64 - 0.5).powi(2)).exp();
        s += t;
        if t < 1e-300 || t < s * 1e-18 {
            break;
        }
    }
    s
}

/// Smallest max-norm radius whose Gaussian tail bound is below `tol`
/// (relative to the dominant term).
pub fn truncation_radius(omega: &[Vec<C64>], tol: f64) -> Result<usize> {
    let im = imag_part(omega)?;
    let g = omega.len();
    (0..10_000)
        .find(|&r| tail(g, im.lambda_min, r) < tol)
        .ok_or_else(|| Error::NonConvergent("tail bound does not reach the tolerance".into()))
}

fn quad(omega: &[Vec<C64>], a: &[f64], b: &[f64]) -> C64 {
    let g = omega.len();
    let mut s = C64::zero();
    for i in 0..g {
        for j in 0..g {
            s += omega[i][j] * (a[i] * b[j]);
        }
    }
    s
}

fn lin(omega: &[Vec<C64>], a: &[f64]) -> Vec<C64> {
    omega.iter().map(|row| row.iter().zip(a).map(|(w, x)| w * x).sum()).collect()
}

/// `theta(z, Omega)` summed over the max-norm ball of radius `r` around the
/// dominant lattice point.
pub fn theta_bounded(z: &[C64], omega: &[Vec<C64>], r: usize) -> Result<ThetaValue> {
    let im = imag_part(omega)?;
    let g = omega.len();
    if z.len() != g {
        return Err(Error::InvalidArgument(format!("z has length {}, expected {g}", z.len())));
    }
    let imz = DVector::from_iterator(g, z.iter().map(|c| c.im));
    let c = im
        .y
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NonConvergent("Im Omega is not positive definite".into()))?
        .solve(&imz);
    let peak = PI * c.dot(&(&im.y * &c));
    let center: Vec<i64> = c.iter().map(|x| (-x).round() as i64).collect();
    let side = 2 * r as i64 + 1;
    let total = (side as usize).pow(g as u32);
    let mut value = C64::zero();
    let mut mass = 0.0;
    let mut n = vec![0.0; g];
    for idx in 0..total {
        let mut rest = idx as i64;
        for (k, nk) in n.iter_mut().enumerate() {
            *nk = (center[k] + rest % side - r as i64) as f64;
            rest /= side;
        }
        let mut phase = quad(omega, &n, &n) * C64::new(0.0, PI);
        for k in 0..g {
            phase += z[k] * C64::new(0.0, 2.0 * PI * n[k]);
        }
        let term = phase.exp();
        value += term;
        mass += term.norm();
    }
    Ok(ThetaValue { value, bound: tail(g, im.lambda_min, r) * peak.exp(), mass })
}

/// `theta[a; b](z) = exp(pi i a.Omega.a + 2 pi i a.(z + b)) theta(z + Omega a + b)`.
pub fn theta_char_bounded(z: &[C64], omega: &[Vec<C64>], a: &[f64], b: &[f64], r: usize) -> Result<ThetaValue> {
    let g = omega.len();
    if a.len() != g || b.len() != g {
        return Err(Error::InvalidArgument("characteristic length differs from the genus".into()));
    }
    let oa = lin(omega, a);
    let shifted: Vec<C64> = (0..g).map(|k| z[k] + oa[k] + b[k]).collect();
    let mut phase = quad(omega, a, a) * C64::new(0.0, PI);
    for k in 0..g {
        phase += (z[k] + b[k]) * C64::new(0.0, 2.0 * PI * a[k]);
    }
    let pre = phase.exp();
    let t = theta_bounded(&shifted, omega, r)?;
    Ok(ThetaValue { value: pre * t.value, bound: pre.norm() * t.bound, mass: pre.norm() * t.mass })
}

/// Theta value with optional characteristic `(a, b)`.
pub fn theta(z: &[C64], omega: &[Vec<C64>], ch: Option<(&[f64], &[f64])>, r: usize) -> Result<C64> {
    Ok(match ch {
        None => theta_bounded(z, omega, r)?.value,
        Some((a, b)) => theta_char_bounded(z, omega, a, b, r)?.value,
    })
}

impl ThetaData {
    pub fn new(
        omega: Vec<Vec<C64>>,
        characteristics: Vec<Characteristic>,
        v: Vec<usize>,
        branch_x: Vec<C64>,
    ) -> Result<Self> {
        imag_part(&omega)?;
        let g = omega.len();
        if characteristics.len() != 2 * g + 1 || branch_x.len() != 2 * g + 1 {
            return Err(Error::InvalidArgument(format!("expected {} branch points", 2 * g + 1)));
        }
        if characteristics.iter().any(|c| c.eta.len() != g || c.eta_prime.len() != g) {
            return Err(Error::InvalidArgument("characteristic length differs from the genus".into()));
        }
        let mut sorted = v.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != g + 1 || sorted.iter().any(|&k| k > 2 * g) {
            return Err(Error::InvalidArgument(format!("V must hold {} distinct branch indices", g + 1)));
        }
        let mut delta = vec![C64::zero(); g];
        for k in (0..2 * g + 1).step_by(2).take(g + 1) {
            let ch = &characteristics[k];
            let oe = lin(&omega, &ch.eta);
            for i in 0..g {
                delta[i] += oe[i] + ch.eta_prime[i];
            }
        }
        let radius = truncation_radius(&omega, THETA_TOL)?;
        Ok(Self { g, omega, characteristics, delta, v, branch_x, radius })
    }

    /// Genus-1 data: `Omega = tau`, branch points ordered by the half periods
    /// `1/2, (1 + tau)/2, tau/2`, `V = {a_1, a_3}`.
    pub fn from_elliptic(ed: &EllipticData) -> Result<Self> {
        let shift = ed.f[0] / 3.0;
        let mut branch_x = Vec::new();
        for w in [ed.omega1, ed.omega1 + ed.omega2, ed.omega2] {
            let p = ed.wp(w)?;
            let e = ed.e.iter().min_by(|a, b| (*a - p).norm().total_cmp(&(*b - p).norm())).unwrap();
            branch_x.push(e * 4.0 - shift);
        }
        let half = |a: f64, b: f64| Characteristic { eta: vec![a], eta_prime: vec![b] };
        Self::new(
            vec![vec![ed.tau]],
            vec![half(0.0, 0.5), half(0.5, 0.5), half(0.5, 0.0)],
            vec![0, 2],
            branch_x,
        )
    }

    pub fn with_radius(mut self, r: usize) -> Self {
        self.radius = r;
        self
    }

    pub fn to_json(&self) -> Value {
        let c = |z: &C64| json!([z.re, z.im]);
        json!({
            "genus": self.g,
            "omega": self.omega.iter().map(|r| r.iter().map(c).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "characteristics": self.characteristics.iter()
                .map(|ch| json!({"eta": ch.eta, "eta_prime": ch.eta_prime}))
                .collect::<Vec<_>>(),
            "delta": self.delta.iter().map(c).collect::<Vec<_>>(),
            "v": self.v,
            "branch_x": self.branch_x.iter().map(c).collect::<Vec<_>>(),
            "radius": self.radius,
        })
    }

    /// Reads the JSON form; `delta` is recomputed from the characteristics.
    pub fn from_json(doc: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("ThetaData: bad or missing '{what}'"));
        let cplx = |v: &Value| -> Option<C64> {
            let a = v.as_array()?;
            if a.len() != 2 {
                return None;
            }
            Some(C64::new(a[0].as_f64()?, a[1].as_f64()?))
        };
        let reals = |v: &Value| -> Option<Vec<f64>> { v.as_array()?.iter().map(Value::as_f64).collect() };
        let omega = doc["omega"]
            .as_array()
            .and_then(|rows| rows.iter().map(|r| r.as_array()?.iter().map(cplx).collect()).collect())
            .ok_or_else(|| bad("omega"))?;
        let characteristics = doc["characteristics"]
            .as_array()
            .and_then(|cs| {
                cs.iter()
                    .map(|c| Some(Characteristic { eta: reals(&c["eta"])?, eta_prime: reals(&c["eta_prime"])? }))
                    .collect()
            })
            .ok_or_else(|| bad("characteristics"))?;
        let v = doc["v"]
            .as_array()
            .and_then(|a| a.iter().map(|x| x.as_u64().map(|k| k as usize)).collect())
            .ok_or_else(|| bad("v"))?;
        let branch_x = doc["branch_x"]
            .as_array()
            .and_then(|a| a.iter().map(cplx).collect())
            .ok_or_else(|| bad("branch_x"))?;
        let td = Self::new(omega, characteristics, v, branch_x)?;
        if let Some(g) = doc.get("genus") {
            if g.as_u64() != Some(td.g as u64) {
                return Err(bad("genus"));
            }
        }
        Ok(match doc.get("radius").and_then(Value::as_u64) {
            Some(r) => td.with_radius(r as usize),
            None => td,
        })
    }
}

/// `lambda_k(z) = (theta[eta_k](0) theta[eta_k](z + Delta) / (theta(0) theta(z + Delta)))^2`, `k in V`.
pub fn lambda_functions(td: &ThetaData, z: &[C64]) -> Result<Vec<C64>> {
    let g = td.g;
    if z.len() != g {
        return Err(Error::InvalidArgument(format!("z has length {}, expected {g}", z.len())));
    }
    let zero = vec![C64::zero(); g];
    let zd: Vec<C64> = (0..g).map(|i| z[i] + td.delta[i]).collect();
    let t0 = theta_bounded(&zero, &td.omega, td.radius)?;
    let td_ = theta_bounded(&zd, &td.omega, td.radius)?;
    for t in [&t0, &td_] {
        let rel = t.value.norm() / t.mass.max(f64::MIN_POSITIVE);
        if rel < 1e-12 {
            return Err(Error::DivisorHit(rel));
        }
    }
    td.v.iter()
        .map(|&k| {
            let ch = &td.characteristics[k];
            let a = theta_char_bounded(&zero, &td.omega, &ch.eta, &ch.eta_prime, td.radius)?.value;
            let b = theta_char_bounded(&zd, &td.omega, &ch.eta, &ch.eta_prime, td.radius)?.value;
            let r = a * b / (t0.value * td_.value);
            Ok(r * r)
        })
        .collect()
}

/// Polynomial returned by [`u_from_theta`]: ascending coefficients after
/// normalising to monic, with the raw leading coefficient kept.
#[derive(Clone, Debug)]
pub struct ThetaPoly {
    pub coeffs: Vec<C64>,
    pub leading: C64,
}

fn mul_linear(p: &[C64], root: C64) -> Vec<C64> {
    let mut out = vec![C64::zero(); p.len() + 1];
    for (i, c) in p.iter().enumerate() {
        out[i + 1] += c;
        out[i] -= c * root;
    }
    out
}

/// `u(x) = sum_{k in V} lambda_k(z) prod_{j in V, j != k} (x - x(a_j))`.
pub fn u_from_theta(td: &ThetaData, z: &[C64]) -> Result<ThetaPoly> {
    let lam = lambda_functions(td, z)?;
    let mut acc = vec![C64::zero(); td.g + 1];
    for (idx, &k) in td.v.iter().enumerate() {
        let mut p = vec![C64::new(1.0, 0.0)];
        for &j in td.v.iter().filter(|&&j| j != k) {
            p = mul_linear(&p, td.branch_x[j]);
        }
        for (a, c) in acc.iter_mut().zip(&p) {
            *a += lam[idx] * c;
        }
    }
    let leading = acc[td.g];
    if leading.is_zero() {
        return Err(Error::DivisorHit(0.0));
    }
    Ok(ThetaPoly { coeffs: acc.iter().map(|c| c / leading).collect(), leading })
}
