//! Weierstrass data of a genus-1 curve `y^2 = f(x)`, `f` a monic real cubic.

use num::complex::Complex64 as C64;
use num::Zero;

use crate::error::{Error, Result};

const LAURENT_TERMS: usize = 140;

/// Weierstrass invariants, roots and half-periods of `y^2 = x^3 + f1 x^2 + f2 x + f3`.
///
/// The substitution `x = 4p - f1/3` turns `(dx/dt)^2 = f(x)` into
/// `p'^2 = 4p^3 - g2 p - g3`; `e` holds the roots of the latter, so
/// `e[i] = (roots[i] + f1/3) / 4`. The lattice is `2 omega1 Z + 2 omega2 Z`
/// with `tau = omega2 / omega1` reduced to the standard fundamental domain.
#[derive(Clone, Debug)]
pub struct EllipticData {
    pub f: [f64; 3],
    pub roots: [C64; 3],
    pub e: [C64; 3],
    pub g2: f64,
    pub g3: f64,
    pub omega1: C64,
    pub omega2: C64,
    pub tau: C64,
    laurent: Vec<C64>,
}

fn cubic_roots(a: [C64; 3]) -> [C64; 3] {
    let eval = |x: C64| ((x + a[0]) * x + a[1]) * x + a[2];
    let scale = 1.0 + a.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut r = [seed * scale, seed * seed * scale, seed * seed * seed * scale];
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..3 {
            let mut den = C64::new(1.0, 0.0);
            for j in 0..3 {
                if i != j {
                    den *= r[i] - r[j];
                }
            }
            if den.is_zero() {
                den = C64::new(1e-300, 0.0);
            }
            let step = eval(r[i]) / den;
            r[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-16 * scale {
            break;
        }
    }
    for x in r.iter_mut() {
        for _ in 0..3 {
            let d = (C64::new(3.0, 0.0) * *x + a[0] * 2.0) * *x + a[1];
            if d.norm() > 0.0 {
                *x -= eval(*x) / d;
            }
        }
    }
    r
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = x;
        ws[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// `int_{a}^{b} dp / sqrt(4 (p-a)(p-b)(p-c))` along the segment, via
/// `p = a + (b-a) sin^2 theta`, with the square root continued along the path.
fn segment_integral(a: C64, b: C64, c: C64) -> C64 {
    let (xs, ws) = gauss_legendre(12);
    let rule = |panels: usize| -> C64 {
        let width = std::f64::consts::FRAC_PI_2 / panels as f64;
        let mut prev: Option<C64> = None;
        let mut acc = C64::zero();
        for k in 0..panels {
            let lo = k as f64 * width;
            // nodes come out of gauss_legendre in decreasing order
            for (x, w) in xs.iter().zip(&ws).rev() {
                let th = lo + 0.5 * width * (x + 1.0);
                let p = a + (b - a) * th.sin().powi(2);
                let mut s = (p - c).sqrt();
                if let Some(q) = prev {
                    if (s - q).norm() > (s + q).norm() {
                        s = -s;
                    }
                }
                prev = Some(s);
                acc += 0.5 * width * w / s;
            }
        }
        acc * C64::new(0.0, -1.0)
    };
    let mut panels = 8;
    let mut last = rule(panels);
    while panels < 8192 {
        panels *= 2;
        let next = rule(panels);
        if (next - last).norm() <= 1e-15 * next.norm() {
            return next;
        }
        last = next;
    }
    last
}

fn reduce_basis(mut w1: C64, mut w2: C64) -> (C64, C64) {
    if (w2 / w1).im < 0.0 {
        w2 = -w2;
    }
    for _ in 0..200 {
        let tau = w2 / w1;
        let n = tau.re.round();
        if n != 0.0 {
            w2 -= w1 * n;
        }
        let tau = w2 / w1;
        if tau.norm() < 1.0 - 1e-14 {
            let t = w1;
            w1 = w2;
            w2 = -t;
        } else {
            break;
        }
    }
    (w1, w2)
}

/// Coefficients `c_k` of `p(z) = z^-2 + sum_{k>=2} c_k z^(2k-2)`.
pub fn laurent_coefficients(g2: f64, g3: f64, terms: usize) -> Vec<C64> {
    let mut c = vec![C64::zero(); terms.max(4)];
    c[2] = C64::new(g2 / 20.0, 0.0);
    c[3] = C64::new(g3 / 28.0, 0.0);
    for k in 4..c.len() {
        let s: C64 = (2..=k - 2).map(|m| c[m] * c[k - m]).sum();
        c[k] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
    }
    c
}

/// `c_k R^(2k)`, the coefficients in the variable `z / R`.
fn scaled_laurent(g2: f64, g3: f64, r: f64) -> Vec<C64> {
    let mut d = vec![C64::zero(); LAURENT_TERMS];
    d[2] = C64::new(g2 * r.powi(4) / 20.0, 0.0);
    d[3] = C64::new(g3 * r.powi(6) / 28.0, 0.0);
    for k in 4..d.len() {
        let s: C64 = (2..=k - 2).map(|m| d[m] * d[k - m]).sum();
        d[k] = s * (3.0 / ((2 * k + 1) as f64 * (k - 3) as f64));
    }
    d
}

/// Carlson's symmetric integral `R_F(x, y, z)`.
pub fn carlson_rf(mut x: C64, mut y: C64, mut z: C64) -> C64 {
    for _ in 0..200 {
        let a = (x + y + z) / 3.0;
        let dev = [x, y, z].iter().map(|v| (C64::new(1.0, 0.0) - v / a).norm()).fold(0.0, f64::max);
        if dev < 1e-3 {
            let dx = C64::new(1.0, 0.0) - x / a;
            let dy = C64::new(1.0, 0.0) - y / a;
            let dz = -(dx + dy);
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (C64::new(1.0, 0.0) - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - e2 * e3 * (3.0 / 44.0))
                / a.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * sy + sy * sz + sz * sx;
        x = (x + lam) / 4.0;
        y = (y + lam) / 4.0;
        z = (z + lam) / 4.0;
    }
    C64::new(f64::NAN, f64::NAN)
}

/// Invariants and periods of `y^2 = x^3 + f1 x^2 + f2 x + f3`.
pub fn elliptic_from_cubic(f: [f64; 3]) -> Result<EllipticData> {
    let [f1, f2, f3] = f;
    let p = f2 - f1 * f1 / 3.0;
    let q = f3 - f1 * f2 / 3.0 + 2.0 * f1.powi(3) / 27.0;
    let g2 = -p / 4.0;
    let g3 = -q / 16.0;
    let disc = g2.powi(3) - 27.0 * g3 * g3;
    let scale = g2.abs().powi(3) + 27.0 * g3 * g3;
    if !(disc.abs() > 1e-12 * scale) {
        return Err(Error::MultipleRoot);
    }
    let coeffs = [C64::new(f1, 0.0), C64::new(f2, 0.0), C64::new(f3, 0.0)];
    let roots = cubic_roots(coeffs);
    let e = roots.map(|r| (r + f1 / 3.0) / 4.0);
    let min_gap = (0..3).map(|i| (e[i] - e[(i + 1) % 3]).norm()).fold(f64::INFINITY, f64::min);
    let size = e.iter().map(|x| x.norm()).fold(0.0, f64::max);
    if min_gap <= 1e-9 * size {
        return Err(Error::MultipleRoot);
    }
    // drop the longest side of the root triangle; the two remaining cycles
    // meet once and give a lattice basis
    let sides = [(0, 1, 2), (1, 2, 0), (0, 2, 1)];
    let longest = (0..3)
        .max_by(|&i, &j| {
            let (a, b, _) = sides[i];
            let (c, d, _) = sides[j];
            (e[a] - e[b]).norm().total_cmp(&(e[c] - e[d]).norm())
        })
        .unwrap();
    let (a, b, _) = sides[longest];
    let apex = 3 - a - b;
    let w1 = segment_integral(e[apex], e[a], e[b]);
    let w2 = segment_integral(e[apex], e[b], e[a]);
    let (omega1, omega2) = reduce_basis(w1, w2);
    let tau = omega2 / omega1;
    if !(tau.im > 0.0) {
        return Err(Error::MultipleRoot);
    }
    Ok(EllipticData {
        f,
        roots,
        e,
        g2,
        g3,
        omega1,
        omega2,
        tau,
        laurent: scaled_laurent(g2, g3, (omega1 * 2.0).norm()),
    })
}

/// The curve with Weierstrass invariants `(g2, g3)` (`f1 = 0` normal form).
pub fn elliptic_from_invariants(g2: f64, g3: f64) -> Result<EllipticData> {
    elliptic_from_cubic([0.0, -4.0 * g2, -16.0 * g3])
}

impl EllipticData {
    /// Reduces `z` modulo the lattice to the cell centered at 0.
    pub fn reduce(&self, z: C64) -> C64 {
        let w = z / (self.omega1 * 2.0);
        let b = w.im / self.tau.im;
        let a = w.re - b * self.tau.re;
        let (na, nb) = (a.round(), b.round());
        z - self.omega1 * (2.0 * na) - self.omega2 * (2.0 * nb)
    }

    fn series(&self, z: C64) -> (C64, C64) {
        let r = (self.omega1 * 2.0).norm();
        let s = z / r;
        let s2 = s * s;
        let (mut p, mut dp) = (C64::zero(), C64::zero());
        for k in (2..self.laurent.len()).rev() {
            p = p * s2 + self.laurent[k];
            dp = dp * s2 + self.laurent[k] * ((2 * k - 2) as f64);
        }
        // p = sum d_k s^(2k-4) and dp = sum (2k-2) d_k s^(2k-4) so far
        let one = C64::new(1.0, 0.0);
        let x = (one / s2 + p * s2) / (r * r);
        let y = (-(one * 2.0) / (s2 * s) + dp * s) / (r * r * r);
        (x, y)
    }

    /// `(p(z), p'(z))`.
    pub fn wp_both(&self, z: C64) -> Result<(C64, C64)> {
        let z = self.reduce(z);
        let radius = (self.omega1 * 2.0).norm();
        if z.norm() <= 1e-150 * radius {
            return Err(Error::LatticePole);
        }
        let mut halvings = 0;
        let mut w = z;
        while w.norm() > 0.75 * radius {
            w /= 2.0;
            halvings += 1;
        }
        let (mut x, mut y) = self.series(w);
        for _ in 0..halvings {
            if y.is_zero() {
                return Err(Error::LatticePole);
            }
            let m = (x * x * 12.0 - self.g2) / (y * 2.0);
            let x2 = m * m / 4.0 - x * 2.0;
            let y2 = -y - m * (x2 - x);
            x = x2;
            y = y2;
        }
        if !(x.re.is_finite() && x.im.is_finite()) {
            return Err(Error::LatticePole);
        }
        Ok((x, y))
    }

    pub fn wp(&self, z: C64) -> Result<C64> {
        Ok(self.wp_both(z)?.0)
    }

    pub fn wp_prime(&self, z: C64) -> Result<C64> {
        Ok(self.wp_both(z)?.1)
    }

    /// `(p'^2 - 4p^3 + g2 p + g3) / max(1, |4 p^3|)`.
    pub fn ode_residual(&self, z: C64) -> Result<f64> {
        let (x, y) = self.wp_both(z)?;
        let cubic = x * x * x * 4.0;
        Ok((y * y - cubic + x * self.g2 + self.g3).norm() / cubic.norm().max(1.0))
    }

    /// A point `z` with `p(z) = x0` and `p'(z) = y0`; `(x0, y0)` must lie on the curve.
    pub fn wp_inverse(&self, x0: C64, y0: C64) -> Result<C64> {
        let on_curve = (y0 * y0 - x0 * x0 * x0 * 4.0 + x0 * self.g2 + self.g3).norm();
        let scale = 1.0 + (x0 * x0 * x0 * 4.0).norm() + (y0 * y0).norm();
        if on_curve > 1e-8 * scale {
            return Err(Error::InvalidArgument(format!("(p, p') = ({x0}, {y0}) is off the curve")));
        }
        let s1 = x0.norm().max(1.0);
        let s2 = y0.norm().max(1.0).max(x0.norm().powf(1.5));
        let miss = |z: C64| -> f64 {
            self.wp_both(z)
                .map(|(x, y)| ((x - x0).norm() / s1).max((y - y0).norm() / s2))
                .unwrap_or(f64::INFINITY)
        };
        let mut candidates = Vec::new();
        let rf = carlson_rf(x0 - self.e[0], x0 - self.e[1], x0 - self.e[2]);
        if rf.re.is_finite() && rf.im.is_finite() {
            candidates.extend([rf, -rf]);
        }
        let n = 24;
        for i in 0..n {
            for j in 0..n {
                let a = (i as f64 + 0.5) / n as f64;
                let b = (j as f64 + 0.5) / n as f64;
                candidates.push(self.omega1 * (2.0 * a) + self.omega2 * (2.0 * b));
            }
        }
        let mut z = *candidates
            .iter()
            .min_by(|a, b| miss(**a).total_cmp(&miss(**b)))
            .ok_or_else(|| Error::InvalidArgument("no starting point".into()))?;
        // Newton on p(z) = x0, then Gauss-Newton on both equations
        for _ in 0..60 {
            let (x, y) = self.wp_both(z)?;
            if y.is_zero() {
                break;
            }
            let dz = (x - x0) / y;
            z -= dz;
            if dz.norm() <= 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        if let Ok((_, y)) = self.wp_both(z) {
            if (y + y0).norm() < (y - y0).norm() {
                z = -z;
            }
        }
        for _ in 0..30 {
            let (x, y) = self.wp_both(z)?;
            let ddp = x * x * 6.0 - self.g2 / 2.0;
            let (r1, r2) = ((x - x0) / s1, (y - y0) / s2);
            let (j1, j2) = (y / s1, ddp / s2);
            let den = j1.norm_sqr() + j2.norm_sqr();
            if den == 0.0 {
                break;
            }
            let dz = (j1.conj() * r1 + j2.conj() * r2) / den;
            z -= dz;
            if dz.norm() <= 1e-16 * z.norm().max(1.0) {
                break;
            }
        }
        if miss(z) > 1e-8 {
            return Err(Error::InvalidArgument(format!("could not invert p at ({x0}, {y0})")));
        }
        Ok(self.reduce(z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x3_minus_x_invariants() {
        let ed = elliptic_from_cubic([0.0, -1.0, 0.0]).unwrap();
        assert!((ed.g2 - 0.25).abs() < 1e-15);
        assert!(ed.g3.abs() < 1e-15);
        assert!(ed.tau.im > 0.0);
    }

    #[test]
    fn triple_root_rejected() {
        assert_eq!(elliptic_from_cubic([0.0, 0.0, 0.0]).unwrap_err(), Error::MultipleRoot);
        assert_eq!(elliptic_from_cubic([-2.0, 1.0, 0.0]).unwrap_err(), Error::MultipleRoot);
    }

    #[test]
    fn periodic_even_and_ode() {
        let ed = elliptic_from_cubic([0.5, -1.5, 0.3]).unwrap();
        let z = C64::new(0.31, 0.17);
        let p = ed.wp(z).unwrap();
        let shifted = ed.wp(z + ed.omega1 * 2.0).unwrap();
        assert!((p - shifted).norm() < 1e-9 * p.norm().max(1.0));
        let shifted = ed.wp(z + ed.omega2 * 2.0).unwrap();
        assert!((p - shifted).norm() < 1e-9 * p.norm().max(1.0));
        assert!((ed.wp(-z).unwrap() - p).norm() < 1e-12 * p.norm());
        assert!((ed.wp_prime(-z).unwrap() + ed.wp_prime(z).unwrap()).norm() < 1e-10);
        assert!(ed.ode_residual(z).unwrap() < 1e-10);
        assert_eq!(ed.wp(ed.omega1 * 2.0).unwrap_err(), Error::LatticePole);
    }

    #[test]
    fn half_periods_hit_roots() {
        let ed = elliptic_from_cubic([0.0, -1.0, 0.0]).unwrap();
        for w in [ed.omega1, ed.omega2, ed.omega1 + ed.omega2] {
            let p = ed.wp(w).unwrap();
            let near = ed.e.iter().map(|e| (p - e).norm()).fold(f64::INFINITY, f64::min);
            assert!(near < 1e-10, "{p}");
        }
    }

    #[test]
    fn inverse_roundtrip() {
        let ed = elliptic_from_cubic([1.0, -2.0, 0.5]).unwrap();
        let z = C64::new(0.2, -0.4);
        let (x, y) = ed.wp_both(z).unwrap();
        let w = ed.wp_inverse(x, y).unwrap();
        let (x2, y2) = ed.wp_both(w).unwrap();
        assert!((x - x2).norm() < 1e-10 * x.norm().max(1.0));
        assert!((y - y2).norm() < 1e-10 * y.norm().max(1.0));
    }
}
