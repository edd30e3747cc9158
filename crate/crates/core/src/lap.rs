//! Convergence of forced wave solutions to the time-harmonic regime: the
//! error functional `E(t)`, the 1D offset `U_inf`, and decay-rate fits.

use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{h1_norm_ball, l2_norm_ball, Field, RadialGrid};
use crate::helmholtz::HelmholtzSolution;
use crate::medium::{MediumProfile, SourceProfile};
use crate::quad::Quadrature;
use crate::wave::{run_observed, Observation, WaveConfig, WaveRun};

/// `U_inf = (2 i omega sqrt(alpha0 beta0))^{-1} int_R F beta dx` for even data on the line.
pub fn u_infty_1d(medium: &MediumProfile, source: &SourceProfile) -> Result<Complex64> {
    if source.r_supp <= 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut pts = vec![0.0];
    let mut inner: Vec<f64> = source
        .profile
        .breakpoints()
        .into_iter()
        .chain(medium.beta.breakpoints())
        .filter(|&b| b < source.r_supp)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(source.r_supp);
    let q = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-12,
        max_panels: 10_000,
    };
    let half = q.integrate_with_breaks(|r| source.eval(r) * medium.beta(r), &pts)?.value;
    let denom = Complex64::new(0.0, 2.0 * source.omega * (medium.alpha0 * medium.beta0).sqrt());
    Ok(2.0 * half / denom)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecaySeries {
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    pub e_u: Vec<f64>,
    pub e_ut: Vec<f64>,
}

impl DecaySeries {
    pub fn push(&mut self, t: f64, e_u: f64, e_ut: f64) {
        self.times.push(t);
        self.e_u.push(e_u);
        self.e_ut.push(e_ut);
        self.e.push(e_u.hypot(e_ut));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Builds a series with `E_ut = 0` from sampled `(t, E)` pairs.
    pub fn from_samples(times: &[f64], values: &[f64]) -> Self {
        let mut s = DecaySeries::default();
        for (&t, &e) in times.iter().zip(values) {
            s.push(t, e, 0.0);
        }
        s
    }

    /// Value at the sample closest to `t`.
    pub fn at(&self, t: f64) -> Option<f64> {
        let idx = self.times.partition_point(|&x| x < t);
        let candidates = [idx.checked_sub(1), (idx < self.len()).then_some(idx)];
        candidates
            .into_iter()
            .flatten()
            .min_by(|&a, &b| (self.times[a] - t).abs().total_cmp(&(self.times[b] - t).abs()))
            .map(|i| self.e[i])
    }

    /// `t,E,E_u,E_ut` rows with a header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,E,E_u,E_ut")?;
        for i in 0..self.len() {
            writeln!(
                out,
                "{:e},{:e},{:e},{:e}",
                self.times[i], self.e[i], self.e_u[i], self.e_ut[i]
            )?;
        }
        Ok(())
    }
}

/// Restriction of nodal values to the smallest sub-grid that still holds the
/// centred stencil around every node inside `B_{r0}`.
fn ball_field(grid: &RadialGrid, r0: f64, value: impl Fn(usize) -> Complex64) -> Result<Field> {
    if !(r0 > 0.0) || r0 > grid.r_max * (1.0 + 1e-12) {
        return Err(Error::Domain(format!("ball radius {r0} outside (0, {}]", grid.r_max)));
    }
    let dr = grid.dr();
    let m = (((r0 / dr) * (1.0 - 1e-14)).ceil() as usize + 1).clamp(2, grid.n);
    let sub = RadialGrid::new(m as f64 * dr, m, grid.d)?;
    Field::new(sub, (0..=m).map(value).collect())
}

/// Accumulates `E(t)` for `u_diff = u - e^{-i omega t} U - U_inf [d = 1]` and
/// `ut_diff = u_t + i omega e^{-i omega t} U`.
pub struct DiffAccumulator<'a> {
    helm: &'a HelmholtzSolution,
    r0: f64,
    u_infty: Complex64,
    pub series: DecaySeries,
}

impl<'a> DiffAccumulator<'a> {
    pub fn new(helm: &'a HelmholtzSolution, r0: f64, u_infty: Option<Complex64>) -> Result<Self> {
        let d = helm.u.grid.d;
        let u_infty = match (d, u_infty) {
            (1, Some(v)) => v,
            (1, None) => return Err(Error::Config("d = 1 needs U_inf".into())),
            (_, Some(_)) => return Err(Error::Config("U_inf is only defined for d = 1".into())),
            (_, None) => Complex64::new(0.0, 0.0),
        };
        Ok(DiffAccumulator {
            helm,
            r0,
            u_infty,
            series: DecaySeries::default(),
        })
    }

    pub fn observe(&mut self, obs: &Observation<'_>) -> Result<()> {
        let grid = &self.helm.u.grid;
        if obs.grid != grid {
            return Err(Error::Config("wave and Helmholtz grids differ".into()));
        }
        let (e_u, e_ut) = diff_norms(self.helm, obs.t, obs.u, obs.ut, self.u_infty, self.r0)?;
        self.series.push(obs.t, e_u, e_ut);
        Ok(())
    }
}

/// `(||u_diff||, ||ut_diff||)` over `B_{r0}` at time `t`.
pub fn diff_norms(
    helm: &HelmholtzSolution,
    t: f64,
    u: &[Complex64],
    ut: &[Complex64],
    u_infty: Complex64,
    r0: f64,
) -> Result<(f64, f64)> {
    let grid = &helm.u.grid;
    let phase = Complex64::from_polar(1.0, -helm.omega * t);
    let big_u = &helm.u.values;
    let iw = Complex64::new(0.0, helm.omega);
    let du = ball_field(grid, r0, |j| u[j] - phase * big_u[j] - u_infty)?;
    let dut = ball_field(grid, r0, |j| ut[j] + iw * phase * big_u[j])?;
    Ok((l2_norm_ball(&du, r0)?, l2_norm_ball(&dut, r0)?))
}

/// Runs the forced wave problem and records `E(t)` every `every` steps.
pub fn diff_series(
    cfg: &WaveConfig,
    helm: &HelmholtzSolution,
    r0: f64,
    u_infty: Option<Complex64>,
    every: usize,
) -> Result<(DecaySeries, WaveRun)> {
    if cfg.grid != helm.u.grid {
        return Err(Error::Config("wave and Helmholtz grids differ".into()));
    }
    let mut acc = DiffAccumulator::new(helm, r0, u_infty)?;
    let run = run_observed(cfg, every.max(1), |obs| acc.observe(obs))?;
    Ok((acc.series, run))
}

/// Records `E_u = ||u||_{H^1(B_r0)}`, `E_ut = ||u_t||_{L^2(B_r0)}` for an
/// unforced or decaying-forced run.
pub fn ic_decay_series(cfg: &WaveConfig, r0: f64, every: usize) -> Result<(DecaySeries, WaveRun)> {
    let mut series = DecaySeries::default();
    let grid = cfg.grid;
    let run = run_observed(cfg, every.max(1), |obs| {
        let u = ball_field(&grid, r0, |j| obs.u[j])?;
        let ut = ball_field(&grid, r0, |j| obs.ut[j])?;
        series.push(obs.t, h1_norm_ball(&u, r0)?, l2_norm_ball(&ut, r0)?);
        Ok(())
    })?;
    Ok((series, run))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Exponential,
    Algebraic,
    AlgebraicLog,
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Exponential => "exponential",
            FitModel::Algebraic => "algebraic",
            FitModel::AlgebraicLog => "algebraic-log",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayFit {
    pub model: FitModel,
    /// Decay constant for the exponential model, log-log slope for the
    /// algebraic ones (the algebraic-log model has a fixed exponent of -1).
    pub rate: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the linearized fit.
    pub residual: f64,
    pub floor: Option<f64>,
    pub samples: usize,
}

impl fmt::Display for DecayFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "model = {}", self.model)?;
        writeln!(f, "rate = {:e}", self.rate)?;
        writeln!(f, "prefactor = {:e}", self.prefactor)?;
        writeln!(f, "window = [{:e}, {:e}]", self.window.0, self.window.1)?;
        writeln!(f, "residual = {:e}", self.residual)?;
        match self.floor {
            Some(v) => writeln!(f, "floor = {v:e}")?,
            None => writeln!(f, "floor = none")?,
        }
        write!(f, "samples = {}", self.samples)
    }
}

pub const MIN_FIT_SAMPLES: usize = 10;
/// Fit windows drop samples within this factor of the detected floor.
pub const FLOOR_MARGIN: f64 = 3.0;
/// Fraction of trailing samples whose median defines the floor.
pub const FLOOR_TAIL: f64 = 0.05;
/// Start of the reference block compared against the tail, as a fraction of the series.
pub const PLATEAU_REFERENCE: f64 = 0.75;
/// The tail is a plateau when its median keeps at least this fraction of the reference median.
pub const PLATEAU_RATIO: f64 = 0.9;

fn median(v: &[f64]) -> f64 {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// Median of `E` over the final 5% of samples, reported only when the tail has
/// flattened: a series still decaying through its tail has no floor.
pub fn detect_floor(series: &DecaySeries) -> Option<f64> {
    let n = series.len();
    let k = (n as f64 * FLOOR_TAIL).ceil() as usize;
    if k == 0 || n < 2 * k {
        return None;
    }
    let tail = median(&series.e[n - k..]);
    let start = ((n as f64 * PLATEAU_REFERENCE) as usize).min(n - 2 * k);
    let reference = median(&series.e[start..start + k]);
    (tail >= PLATEAU_RATIO * reference).then_some(tail)
}

/// How samples near the numerical floor are screened before a fit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FloorRule {
    /// Keep every positive sample.
    None,
    /// Drop samples below an explicit level.
    Threshold(f64),
    /// Drop samples within [`FLOOR_MARGIN`] of [`detect_floor`].
    Detect,
}

fn window_samples(series: &DecaySeries, window: (f64, f64), rule: FloorRule) -> Result<(Vec<(f64, f64)>, Option<f64>)> {
    if !(window.0 < window.1) {
        return Err(Error::Fit(format!("empty window [{}, {}]", window.0, window.1)));
    }
    let (floor, cut) = match rule {
        FloorRule::None => (None, 0.0),
        FloorRule::Threshold(v) => (Some(v), v),
        FloorRule::Detect => {
            let f = detect_floor(series);
            (f, f.map_or(0.0, |v| FLOOR_MARGIN * v))
        }
    };
    let pts: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.e)
        .filter(|(&t, &e)| t >= window.0 && t <= window.1 && e > 0.0 && e >= cut)
        .map(|(&t, &e)| (t, e))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "only {} usable samples in [{}, {}] (need {MIN_FIT_SAMPLES})",
            pts.len(),
            window.0,
            window.1
        )));
    }
    Ok((pts, floor))
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, r2)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    (a, b, r_squared(y, |i| a + b * x[i]))
}

fn r_squared(y: &[f64], model: impl Fn(usize) -> f64) -> f64 {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let ss_res: f64 = y.iter().enumerate().map(|(i, v)| (v - model(i)).powi(2)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Least-squares line through `(t, log E)`; rate is minus the slope.
pub fn fit_exponential(series: &DecaySeries, window: (f64, f64), rule: FloorRule) -> Result<DecayFit> {
    let (pts, floor) = window_samples(series, window, rule)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (a, b, r2) = linear_fit(&x, &y);
    Ok(DecayFit {
        model: FitModel::Exponential,
        rate: -b,
        prefactor: a.exp(),
        window,
        residual: r2,
        floor,
        samples: pts.len(),
    })
}

/// Least-squares line through `(log t, log E)`; rate is the slope.
pub fn fit_algebraic(series: &DecaySeries, window: (f64, f64), rule: FloorRule) -> Result<DecayFit> {
    if window.0 <= 0.0 {
        return Err(Error::Fit("algebraic fit needs positive times".into()));
    }
    let (pts, floor) = window_samples(series, window, rule)?;
    let x: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (a, b, r2) = linear_fit(&x, &y);
    Ok(DecayFit {
        model: FitModel::Algebraic,
        rate: b,
        prefactor: a.exp(),
        window,
        residual: r2,
        floor,
        samples: pts.len(),
    })
}

/// One-parameter fit `E ~ C (1 + log(1 + t^2)) / (1 + t^2)^{1/2}` in log space.
pub fn fit_algebraic_log(series: &DecaySeries, window: (f64, f64), rule: FloorRule) -> Result<DecayFit> {
    if window.0 <= 0.0 {
        return Err(Error::Fit("algebraic fit needs positive times".into()));
    }
    let (pts, floor) = window_samples(series, window, rule)?;
    let shape = |t: f64| theoretical_bound(2, 1.0, 0.0, t).ln();
    let y: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let log_c = pts.iter().map(|p| p.1.ln() - shape(p.0)).sum::<f64>() / pts.len() as f64;
    let r2 = r_squared(&y, |i| log_c + shape(pts[i].0));
    Ok(DecayFit {
        model: FitModel::AlgebraicLog,
        rate: -1.0,
        prefactor: log_c.exp(),
        window,
        residual: r2,
        floor,
        samples: pts.len(),
    })
}

/// Upper bounds of the decay theorems: `C e^{-lambda t}` (d = 1),
/// `C (1 + log(1 + t^2)) / (1 + t^2)^{1/2}` (d = 2), `C / (1 + t^2)^{1/2}` (d = 3).
pub fn theoretical_bound(d: usize, c: f64, lambda: f64, t: f64) -> f64 {
    let s = 1.0 + t * t;
    match d {
        1 => c * (-lambda * t).exp(),
        2 => c * (1.0 + s.ln()) / s.sqrt(),
        _ => c / s.sqrt(),
    }
}

/// Decay exponent predicted for compact initial data: `(1 + t^2)^{-(d-1)/2}`.
pub fn free_decay_exponent(d: usize) -> f64 {
    -(d as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn synthetic(f: impl Fn(f64) -> f64, t0: f64, t1: f64, n: usize) -> DecaySeries {
        let times: Vec<f64> = (0..=n).map(|i| t0 + (t1 - t0) * i as f64 / n as f64).collect();
        let values: Vec<f64> = times.iter().map(|&t| f(t)).collect();
        DecaySeries::from_samples(&times, &values)
    }

    #[test]
    fn u_infty_for_benchmark_data() {
        let u = u_infty_1d(&MediumProfile::benchmark(), &SourceProfile::benchmark()).unwrap();
        assert!((u - Complex64::new(0.0, -320.0 / (3.0 * PI))).norm() < 1e-9);
        assert_eq!(
            u_infty_1d(&MediumProfile::benchmark(), &SourceProfile::zero(1.0)).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn exponential_fit_exact() {
        let s = synthetic(|t| 5.0 * (-0.3 * t).exp(), 0.0, 60.0, 200);
        let f = fit_exponential(&s, (0.0, 60.0), FloorRule::None).unwrap();
        assert!((f.rate - 0.3).abs() < 1e-12);
        assert!((f.residual - 1.0).abs() < 1e-12);
        assert!((f.prefactor - 5.0).abs() < 1e-10);
    }

    #[test]
    fn exponential_fit_with_floor() {
        let s = synthetic(|t| 5.0 * (-0.3 * t).exp() + 1e-12, 0.0, 150.0, 1500);
        let f = fit_exponential(&s, (0.0, 150.0), FloorRule::Detect).unwrap();
        assert!((f.rate - 0.3).abs() < 0.003, "{}", f.rate);
        assert!((f.floor.unwrap() - 1e-12).abs() < 1e-13);
    }

    #[test]
    fn algebraic_fits() {
        let s = synthetic(|t| 7.0 / t, 1.0, 100.0, 300);
        let f = fit_algebraic(&s, (1.0, 100.0), FloorRule::None).unwrap();
        assert!((f.rate + 1.0).abs() < 1e-12 && (f.residual - 1.0).abs() < 1e-12);
        let g = synthetic(|t| theoretical_bound(2, 1.0, 0.0, t), 100.0, 1000.0, 300);
        let slope = fit_algebraic(&g, (100.0, 1000.0), FloorRule::None).unwrap().rate;
        assert!(slope > -1.0 && slope < -0.8, "{slope}");
        let lg = fit_algebraic_log(&g, (100.0, 1000.0), FloorRule::None).unwrap();
        assert!((lg.residual - 1.0).abs() < 1e-12 && (lg.prefactor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_samples_is_a_fit_error() {
        let s = synthetic(|t| (-t).exp(), 0.0, 1.0, 5);
        assert!(matches!(fit_exponential(&s, (0.0, 1.0), FloorRule::None), Err(Error::Fit(_))));
        assert!(matches!(fit_algebraic(&s, (0.0, 1.0), FloorRule::None), Err(Error::Fit(_))));
    }

    #[test]
    fn bounds() {
        assert_eq!(theoretical_bound(3, 2.5, 0.0, 0.0), 2.5);
        assert_eq!(theoretical_bound(2, 2.5, 0.0, 0.0), 2.5);
        let t = 1e7;
        let ratio = theoretical_bound(2, 1.0, 0.0, t) / (2.0 * t.ln() / t);
        assert!((ratio - 1.0).abs() < 0.07);
        assert!((theoretical_bound(1, 2.0, 0.5, 2.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn floor_is_tail_median() {
        let mut s = DecaySeries::default();
        for i in 0..100 {
            s.push(i as f64, if i < 95 { 1.0 } else { (i - 94) as f64 }, 0.0);
        }
        assert_eq!(detect_floor(&s), Some(3.0));
        assert_eq!(s.at(42.4), Some(1.0));
    }

    #[test]
    fn decaying_tail_has_no_floor() {
        let s = synthetic(|t| 3.0 / t, 60.0, 240.0, 1000);
        assert_eq!(detect_floor(&s), None);
        let f = fit_algebraic(&s, (60.0, 240.0), FloorRule::Detect).unwrap();
        assert!(f.floor.is_none() && (f.rate + 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_csv_header() {
        let mut s = DecaySeries::default();
        s.push(0.5, 3.0, 4.0);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,E,E_u,E_ut\n5e-1,5e0,3e0,4e0\n");
    }

    proptest! {
        #[test]
        fn exponential_fit_recovers_rate(rate in 0.01f64..2.0, amp in 1e-3f64..1e3) {
            let s = synthetic(|t| amp * (-rate * t).exp(), 0.0, 10.0, 50);
            let f = fit_exponential(&s, (0.0, 10.0), FloorRule::None).unwrap();
            prop_assert!((f.rate - rate).abs() < 1e-10);
        }

        #[test]
        fn algebraic_fit_recovers_exponent(p in -4.0f64..-0.2, amp in 1e-3f64..1e3) {
            let s = synthetic(|t| amp * t.powf(p), 1.0, 50.0, 50);
            let f = fit_algebraic(&s, (1.0, 50.0), FloorRule::None).unwrap();
            prop_assert!((f.rate - p).abs() < 1e-10);
        }
    }
}
