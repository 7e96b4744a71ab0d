//! Fixed-step RK4 integration with invariant monitoring.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::flows;
use crate::laxny::{self, Gauge};
use crate::parallel::par_map;
use crate::phase::{spectral_data, Family, NYState, PhasePoint};

/// Coordinates beyond this magnitude are treated as a pole of the flow.
pub const BLOW_UP: f64 = 1e12;

/// An autonomous polynomial vector field on `R^n` with conserved quantities.
pub trait VectorField: Sync {
    fn coord_names(&self) -> Vec<String>;
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn invariant_names(&self) -> Vec<String>;
    fn invariants(&self, x: &[f64]) -> Result<Vec<f64>>;
}

/// `sum_i c_i D_i` on one framed family.
#[derive(Clone, Debug)]
pub struct FamilyFlow {
    pub family: Family,
    pub direction: Vec<f64>,
}

impl FamilyFlow {
    pub fn new(family: Family, direction: Vec<f64>) -> Result<Self> {
        if direction.len() != family.g {
            return Err(Error::InvalidArgument(format!(
                "direction needs {} entries, got {}",
                family.g,
                direction.len()
            )));
        }
        Ok(Self { family, direction })
    }

    /// `D_i` (1-based).
    pub fn basis(family: Family, i: usize) -> Result<Self> {
        let mut c = vec![0.0; family.g];
        *c.get_mut(i.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidArgument(format!("field index {i} outside 1..={}", family.g)))? = 1.0;
        Self::new(family, c)
    }
}

impl VectorField for FamilyFlow {
    fn coord_names(&self) -> Vec<String> {
        self.family.layout().names()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.direction.iter().all(|c| *c == 0.0) {
            return Ok(vec![0.0; x.len()]);
        }
        flows::directional_field(&PhasePoint::new(self.family, x.to_vec())?, &self.direction)
    }

    fn invariant_names(&self) -> Vec<String> {
        let p = PhasePoint::<f64>::zero(self.family);
        spectral_data(&p)
            .map(|sd| sd.named_invariants(self.family).into_iter().map(|(n, _)| n).collect())
            .unwrap_or_default()
    }

    fn invariants(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = PhasePoint::new(self.family, x.to_vec())?;
        Ok(spectral_data(&p)?.invariants(self.family))
    }
}

/// The alpha = 0 Noumi-Yamada chain with fixed parameters `e`.
///
/// Invariants are the trace coefficients `h_{k/2}` of the Lax product (canonical
/// gauge for even N), followed by the constraint sum for even N.
#[derive(Clone, Debug)]
pub struct NyFlow {
    pub e: Vec<f64>,
}

impl VectorField for NyFlow {
    fn coord_names(&self) -> Vec<String> {
        (1..=self.e.len()).map(|k| format!("q{k}")).collect()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        laxny::ny_rhs(&NYState { q: x.to_vec(), e: self.e.clone() })
    }

    fn invariant_names(&self) -> Vec<String> {
        let n = self.e.len();
        let g = if n % 2 == 1 { (n - 1) / 2 } else { n.saturating_sub(2) / 2 };
        let mut names: Vec<String> = (0..=g).map(|i| format!("h{}/2", 2 * i + 1)).collect();
        if n % 2 == 0 {
            names.push("constraint".into());
        }
        names
    }

    fn invariants(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = NYState { q: x.to_vec(), e: self.e.clone() };
        let mut out = laxny::psi_doubleprime_q(&s, &Gauge::Canonical)?;
        if s.n() % 2 == 0 {
            out.push(s.constraint());
        }
        Ok(out)
    }
}

/// Sampled solution of a flow.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub coord_names: Vec<String>,
    pub invariant_names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub invariant_log: Vec<Vec<f64>>,
    /// `max_t max_i |f_i(t) - f_i(0)|`.
    pub drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().map_or(&[], Vec::as_slice)
    }

    fn compute_drift(log: &[Vec<f64>]) -> f64 {
        let Some(first) = log.first() else { return 0.0 };
        log.iter()
            .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max)
    }

    /// Drift of one named invariant.
    pub fn drift_of(&self, name: &str) -> Option<f64> {
        let k = self.invariant_names.iter().position(|n| n == name)?;
        let first = self.invariant_log.first()?[k];
        Some(self.invariant_log.iter().map(|r| (r[k] - first).abs()).fold(0.0, f64::max))
    }

    /// Linear interpolation of the state at time `t` inside the sampled range.
    pub fn state_at(&self, t: f64) -> Option<Vec<f64>> {
        let (lo, hi) = (*self.times.first()?, *self.times.last()?);
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return None;
        }
        let k = self
            .times
            .windows(2)
            .position(|w| (w[0] - t) * (w[1] - t) <= 0.0)
            .unwrap_or(self.times.len() - 1);
        if k + 1 >= self.times.len() {
            return Some(self.states[k].clone());
        }
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let a = if t1 == t0 { 0.0 } else { (t - t0) / (t1 - t0) };
        Some(self.states[k].iter().zip(&self.states[k + 1]).map(|(x, y)| x + a * (y - x)).collect())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        header.extend(self.coord_names.iter().cloned());
        header.extend(self.invariant_names.iter().cloned());
        out.write_record(&header).map_err(csv_err)?;
        for ((t, x), inv) in self.times.iter().zip(&self.states).zip(&self.invariant_log) {
            let row: Vec<String> = std::iter::once(t).chain(x).chain(inv).map(|v| format!("{v:e}")).collect();
            out.write_record(&row).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    /// Reads a CSV written by [`write_csv`]; `n_coords` splits state columns
    /// from invariant columns.
    pub fn read_csv<R: Read>(r: R, n_coords: usize) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers().map_err(csv_err)?.iter().map(String::from).collect();
        if header.first().map(String::as_str) != Some("t") || header.len() < 1 + n_coords {
            return Err(Error::Parse("CSV header must be t,<coordinates>,<invariants>".into()));
        }
        let coord_names = header[1..1 + n_coords].to_vec();
        let invariant_names = header[1 + n_coords..].to_vec();
        let (mut times, mut states, mut invariant_log) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            let vals = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            times.push(vals[0]);
            states.push(vals[1..1 + n_coords].to_vec());
            invariant_log.push(vals[1 + n_coords..].to_vec());
        }
        let drift = Self::compute_drift(&invariant_log);
        Ok(Self { coord_names, invariant_names, times, states, invariant_log, drift })
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn axpy(x: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    x.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical RK4 step.
pub fn rk4_step<F: VectorField + ?Sized>(f: &F, x: &[f64], h: f64) -> Result<Vec<f64>> {
    let k1 = f.eval(x)?;
    let k2 = f.eval(&axpy(x, h / 2.0, &k1))?;
    let k3 = f.eval(&axpy(x, h / 2.0, &k2))?;
    let k4 = f.eval(&axpy(x, h, &k3))?;
    Ok((0..x.len())
        .map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Sampling options for [`integrate_with`].
#[derive(Clone, Copy, Debug)]
pub struct Sampling {
    /// Record every `every`-th step (the final state is always recorded).
    pub every: usize,
    /// Evaluate invariants at recorded samples.
    pub invariants: bool,
}

impl Default for Sampling {
    fn default() -> Self {
        Self { every: 1, invariants: true }
    }
}

fn check_state(t: f64, x: &[f64], last: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotFinite { t, last_state: last.to_vec() });
    }
    if x.iter().any(|v| v.abs() > BLOW_UP) {
        return Err(Error::BlowUp { t, last_state: last.to_vec() });
    }
    Ok(())
}

/// Integrates from `t = 0` to `t_end` (either sign) with fixed `step > 0`;
/// the final step is shortened to land on `t_end`.
pub fn integrate_with<F: VectorField + ?Sized>(
    f: &F,
    x0: &[f64],
    t_end: f64,
    step: f64,
    sampling: Sampling,
) -> Result<Trajectory> {
    if !(step > 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument("step must be positive and t_end finite".into()));
    }
    check_state(0.0, x0, x0)?;
    let every = sampling.every.max(1);
    let n = (t_end.abs() / step - 1e-9).ceil().max(0.0) as usize;
    let dir = t_end.signum();
    let record = |x: &[f64]| -> Result<Vec<f64>> {
        if sampling.invariants {
            f.invariants(x)
        } else {
            Ok(Vec::new())
        }
    };
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut invariant_log = vec![record(x0)?];
    let mut x = x0.to_vec();
    let mut t = 0.0;
    for k in 1..=n {
        let target = if k == n { t_end } else { dir * k as f64 * step };
        let h = target - t;
        let next = rk4_step(f, &x, h)?;
        check_state(target, &next, &x)?;
        x = next;
        t = target;
        if k % every == 0 || k == n {
            times.push(t);
            invariant_log.push(record(&x)?);
            states.push(x.clone());
        }
    }
    let drift = Trajectory::compute_drift(&invariant_log);
    Ok(Trajectory {
        coord_names: f.coord_names(),
        invariant_names: if sampling.invariants { f.invariant_names() } else { Vec::new() },
        times,
        states,
        invariant_log,
        drift,
    })
}

/// RK4 along `sum_i c_i D_i` for one family.
pub fn integrate(p0: &PhasePoint<f64>, direction: &[f64], t_end: f64, step: f64) -> Result<Trajectory> {
    let flow = FamilyFlow::new(p0.family, direction.to_vec())?;
    integrate_with(&flow, &p0.coords, t_end, step, Sampling::default())
}

/// Endpoint only, without recording.
pub fn flow_endpoint<F: VectorField + ?Sized>(f: &F, x0: &[f64], t_end: f64, step: f64) -> Result<Vec<f64>> {
    let sampling = Sampling { every: usize::MAX, invariants: false };
    Ok(integrate_with(f, x0, t_end, step, sampling)?.last().to_vec())
}

/// `|phi_j^s phi_i^s p0 - phi_i^s phi_j^s p0|_inf`.
pub fn commutativity_probe(p0: &PhasePoint<f64>, i: usize, j: usize, s: f64, step: f64) -> Result<f64> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let fi = FamilyFlow::basis(p0.family, i)?;
    let fj = FamilyFlow::basis(p0.family, j)?;
    let ij = flow_endpoint(&fj, &flow_endpoint(&fi, &p0.coords, s, step)?, s, step)?;
    let ji = flow_endpoint(&fi, &flow_endpoint(&fj, &p0.coords, s, step)?, s, step)?;
    Ok(ij.iter().zip(&ji).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Least-squares slope of `log err` against `log step`, where `err` is the
/// endpoint distance to a run at `reference_step`.
pub fn order_slope<F: VectorField + ?Sized>(
    f: &F,
    x0: &[f64],
    t_end: f64,
    steps: &[f64],
    reference_step: f64,
) -> Result<(f64, Vec<f64>)> {
    let reference = flow_endpoint(f, x0, t_end, reference_step)?;
    let errs = steps
        .iter()
        .map(|&h| {
            let x = flow_endpoint(f, x0, t_end, h)?;
            Ok(x.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((log_log_slope(steps, &errs), errs))
}

pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Integrates independent initial conditions of one field concurrently.
pub fn integrate_batch<F: VectorField>(
    f: &F,
    inits: Vec<Vec<f64>>,
    t_end: f64,
    step: f64,
    sampling: Sampling,
) -> Vec<Result<Trajectory>> {
    par_map(inits, |x0| integrate_with(f, &x0, t_end, step, sampling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Kind;

    fn mumford1() -> PhasePoint<f64> {
        PhasePoint::new(Family::new(Kind::Mumford, 1).unwrap(), vec![1.0, 2.0, 3.0, 5.0]).unwrap()
    }

    #[test]
    fn mumford_g1_drift() {
        let tr = integrate(&mumford1(), &[1.0], 1.0, 1e-3).unwrap();
        assert_eq!(tr.times.len(), 1001);
        assert!((tr.times[1000] - 1.0).abs() < 1e-15);
        assert!(tr.drift < 1e-8, "drift {}", tr.drift);
        assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_direction_is_constant() {
        let tr = integrate(&mumford1(), &[0.0], 1.0, 1e-2).unwrap();
        assert_eq!(tr.drift, 0.0);
        assert!(tr.states.iter().all(|s| s == &tr.states[0]));
    }

    #[test]
    fn step_halving_gives_fourth_order() {
        let f = FamilyFlow::basis(Family::new(Kind::Mumford, 1).unwrap(), 1).unwrap();
        let (slope, errs) = order_slope(&f, &mumford1().coords, 1.0, &[1.6e-2, 8e-3, 4e-3], 2.5e-4).unwrap();
        assert!((3.5..=4.5).contains(&slope), "slope {slope} {errs:?}");
    }

    #[test]
    fn commutativity_probe_cases() {
        let p = mumford1();
        assert_eq!(commutativity_probe(&p, 1, 1, 0.1, 1e-2).unwrap(), 0.0);
        let fam = Family::new(Kind::Mumford, 2).unwrap();
        let p = PhasePoint::new(fam, vec![0.3, -0.2, 0.5, 0.1, 0.4, -0.3, 0.2]).unwrap();
        assert_eq!(commutativity_probe(&p, 1, 2, 0.0, 1e-3).unwrap(), 0.0);
        let d = commutativity_probe(&p, 1, 2, 0.1, 1e-3).unwrap();
        assert!(d < 1e-8, "{d}");
    }

    #[test]
    fn blow_up_is_reported() {
        // NY with e = 0 and q = (1, 1, 1) is an equilibrium; a large push diverges.
        let f = NyFlow { e: vec![0.0, 0.0, 0.0] };
        let tr = integrate_with(&f, &[1.0, 1.0, 1.0], 1.0, 1e-2, Sampling::default()).unwrap();
        assert!(tr.drift < 1e-12);
        let fam = Family::new(Kind::Mumford, 1).unwrap();
        let p = PhasePoint::new(fam, vec![1e11, 1e11, 1e11, 1e11]).unwrap();
        match integrate(&p, &[1.0], 1.0, 1e-2) {
            Err(Error::BlowUp { last_state, .. }) | Err(Error::NotFinite { last_state, .. }) => {
                assert_eq!(last_state.len(), 4)
            }
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn csv_roundtrip() {
        let tr = integrate_with(&FamilyFlow::basis(mumford1().family, 1).unwrap(), &mumford1().coords, 0.1, 1e-2, Sampling::default())
            .unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,u1,v3/2,w1,w2,f1,f2,f3\n"));
        let back = Trajectory::read_csv(buf.as_slice(), 4).unwrap();
        assert_eq!(back, tr);
    }

    #[test]
    fn nyii_constraint_drift() {
        let f = NyFlow { e: vec![0.1, -0.2, 0.3, 0.05] };
        let q0 = vec![0.3, 0.2, 0.1, 0.2];
        let tr = integrate_with(&f, &q0, 1.0, 1e-3, Sampling::default()).unwrap();
        assert!(tr.drift_of("constraint").unwrap() < 1e-10);
        assert!(tr.drift < 1e-8, "{}", tr.drift);
    }
}
