//! End-to-end studies built from the solver, oracle and diagnostic modules.
//! The CLI and the acceptance suite both drive these.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{l2_norm_ball, Field, RadialGrid};
use crate::helmholtz::{solve_problem, HelmholtzSolution};
use crate::lap::{
    diff_series, fit_algebraic, fit_algebraic_log, fit_exponential, ic_decay_series, linear_fit, u_infty_1d, DecayFit,
    DecaySeries, FloorRule,
};
use crate::medium::{MediumProfile, SourceProfile};
use crate::oracle::{self, CauchyData};
use crate::par::{self, Execution};
use crate::rays::{self, Sampling, ScanConfig, ScanReport, TraceConfig};
use crate::wave::{run, CflReport, Forcing, WaveConfig};

/// A named threshold comparison.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, threshold: impl Into<String>, passed: bool) -> Self {
        Check {
            name: name.into(),
            value,
            threshold: threshold.into(),
            passed,
        }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value, format!("<= {limit:e}"), value <= limit)
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check::new(name, value, format!(">= {limit:e}"), value >= limit)
    }

    pub fn within(name: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check::new(name, value, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&value))
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:.6e} (want {})", self.name, self.value, self.threshold)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

// ---------------------------------------------------------------- Figure B

#[derive(Clone, Debug, Serialize)]
pub struct FigureBParams {
    pub r0: f64,
    pub r_max: f64,
    pub dr: f64,
    pub dt: f64,
    pub t_final: f64,
    /// Record `E(t)` every this many steps.
    pub every: usize,
    /// Window for the d = 1, 3 exponential/algebraic comparison.
    pub fast_window: (f64, f64),
    /// Window for the d = 2 algebraic fit.
    pub slow_window: (f64, f64),
    /// `E(t1) / E(t0)` is reported for these times.
    pub ratio_times: (f64, f64),
}

impl Default for FigureBParams {
    fn default() -> Self {
        FigureBParams {
            r0: 5.0,
            r_max: 120.0,
            dr: 6e-2,
            dt: 1.33e-2,
            t_final: 240.0,
            every: 10,
            fast_window: (30.0, 120.0),
            slow_window: (60.0, 240.0),
            ratio_times: (10.0, 120.0),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureBOutcome {
    pub d: usize,
    #[serde(skip)]
    pub series: DecaySeries,
    pub fits: Vec<DecayFit>,
    pub fit_errors: Vec<String>,
    pub helmholtz_residual: f64,
    pub u_infty: Option<[f64; 2]>,
    pub dt: f64,
    pub steps: usize,
    pub cfl: CflReport,
    pub decay_ratio: Option<f64>,
    pub checks: Vec<Check>,
}

impl FigureBOutcome {
    pub fn passed(&self) -> bool {
        self.fit_errors.is_empty() && all_passed(&self.checks)
    }
}

/// Forced run for one dimension plus the fits and threshold checks that go
/// with it.
pub fn figure_b(d: usize, params: &FigureBParams, medium: &MediumProfile, source: &SourceProfile) -> Result<FigureBOutcome> {
    let grid = RadialGrid::with_spacing(params.r_max, params.dr, d)?;
    let helm = solve_problem(grid, medium, source)?;
    let u_inf = if d == 1 { Some(u_infty_1d(medium, source)?) } else { None };
    let cfg =
        WaveConfig::new(grid, medium.clone(), params.dt, params.t_final).with_forcing(Forcing::TimeHarmonic(source.clone()));
    let (series, wave) = diff_series(&cfg, &helm, params.r0, u_inf, params.every)?;

    let mut fits = Vec::new();
    let mut fit_errors = Vec::new();
    let mut keep = |r: Result<DecayFit>, fits: &mut Vec<DecayFit>| match r {
        Ok(f) => fits.push(f),
        Err(e) => fit_errors.push(e.to_string()),
    };
    let rule = FloorRule::Detect;
    if d == 2 {
        keep(fit_algebraic(&series, params.slow_window, rule), &mut fits);
        keep(fit_algebraic_log(&series, params.slow_window, rule), &mut fits);
    } else {
        keep(fit_exponential(&series, params.fast_window, rule), &mut fits);
        keep(fit_algebraic(&series, params.fast_window, rule), &mut fits);
    }

    let (ta, tb) = params.ratio_times;
    let reached = series
        .times
        .last()
        .is_some_and(|&t| t >= tb - params.dt * params.every as f64);
    let decay_ratio = match (series.at(ta), series.at(tb).filter(|_| reached)) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    let mut checks = Vec::new();
    let ratio_name = format!("E({tb})/E({ta})");
    match d {
        1 => {
            if let Some(f) = fits.first() {
                checks.push(Check::new("exponential rate", f.rate, "> 0", f.rate > 0.0));
                checks.push(Check::at_least("exponential fit R^2", f.residual, 0.98));
            }
            checks.push(Check::at_most(ratio_name, decay_ratio.unwrap_or(f64::INFINITY), 1e-3));
        }
        2 => {
            if let Some(f) = fits.first() {
                checks.push(Check::within("algebraic slope", f.rate, -1.25, -0.80));
            }
        }
        _ => {
            if let [e, a, ..] = fits.as_slice() {
                checks.push(Check::new(
                    "exponential minus algebraic R^2",
                    e.residual - a.residual,
                    "> 0",
                    e.residual > a.residual,
                ));
            }
            checks.push(Check::at_most(ratio_name, decay_ratio.unwrap_or(f64::INFINITY), 1e-2));
        }
    }
    Ok(FigureBOutcome {
        d,
        series,
        fits,
        fit_errors,
        helmholtz_residual: helm.residual_norm,
        u_infty: u_inf.map(|z| [z.re, z.im]),
        dt: wave.dt,
        steps: wave.steps,
        cfl: wave.cfl,
        decay_ratio,
        checks,
    })
}

/// Runs [`figure_b`] for several dimensions, concurrently when allowed.
pub fn figure_b_dims(
    dims: &[usize],
    params: &FigureBParams,
    medium: &MediumProfile,
    source: &SourceProfile,
    exec: Execution,
) -> Vec<Result<FigureBOutcome>> {
    par::map(exec, dims, |&d| figure_b(d, params, medium, source))
}

// ---------------------------------------------------------- convergence

/// Errors on a coarse and a refined grid and their ratio.
#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceStudy {
    pub label: String,
    pub spacing: [f64; 2],
    pub errors: [f64; 2],
    pub ratio: f64,
}

impl ConvergenceStudy {
    fn new(label: String, spacing: [f64; 2], errors: [f64; 2]) -> Self {
        ConvergenceStudy {
            label,
            spacing,
            errors,
            ratio: errors[0] / errors[1],
        }
    }

    pub fn checks(&self, max_error: f64, ratio: (f64, f64)) -> Vec<Check> {
        vec![
            Check::at_most(format!("{} relative error", self.label), self.errors[0], max_error),
            Check::within(format!("{} refinement ratio", self.label), self.ratio, ratio.0, ratio.1),
        ]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossValidationParams {
    pub r_max: f64,
    pub courant: f64,
    pub t: f64,
    pub width: f64,
    pub a0: f64,
    pub a1: f64,
}

impl Default for CrossValidationParams {
    fn default() -> Self {
        CrossValidationParams {
            r_max: 20.0,
            courant: 0.5,
            t: 10.0,
            width: 1.0,
            a0: 1.0,
            a1: 0.5,
        }
    }
}

/// Free wave from Gaussian data in a unit medium against d'Alembert (d = 1) or
/// Kirchhoff (d = 3); returns `max |u - v| / max |v|` over the grid.
pub fn wave_vs_oracle(d: usize, dr: f64, p: &CrossValidationParams, exec: Execution) -> Result<f64> {
    if d != 1 && d != 3 {
        return Err(Error::Domain(format!("closed-form oracles exist for d = 1, 3, got {d}")));
    }
    let grid = RadialGrid::with_spacing(p.r_max, dr, d)?;
    let data = CauchyData::gaussian(p.a0.into(), p.a1.into(), 0.0, p.width, 1.0, d);
    let u0 = grid.sample(|r| (data.v0)(r));
    let u1 = grid.sample(|r| (data.v1)(r));
    let cfg = WaveConfig::new(grid, MediumProfile::constant(1.0, 1.0), p.courant * dr, p.t).with_initial_data(u0, u1);
    let out = run(&cfg)?;
    let t = out.steps as f64 * out.dt;
    let exact = par::map_range(exec, grid.len(), |j| {
        let r = grid.r(j);
        if d == 1 {
            oracle::dalembert(&data, r, t)
        } else {
            oracle::kirchhoff_radial(&data, r, t)
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let scale = exact.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let err = exact
        .iter()
        .zip(&out.final_state.u_curr.values)
        .map(|(v, u)| (u - v).norm())
        .fold(0.0, f64::max);
    Ok(err / scale)
}

pub fn wave_convergence(d: usize, dr: f64, p: &CrossValidationParams, exec: Execution) -> Result<ConvergenceStudy> {
    let e0 = wave_vs_oracle(d, dr, p, exec)?;
    let e1 = wave_vs_oracle(d, 0.5 * dr, p, exec)?;
    let name = if d == 1 { "d'Alembert" } else { "Kirchhoff" };
    Ok(ConvergenceStudy::new(
        format!("wave vs {name} (d={d})"),
        [dr, 0.5 * dr],
        [e0, e1],
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct HelmholtzValidationParams {
    pub r_max: f64,
    pub r0: f64,
    /// `|U|` flatness is measured on this interval for d = 1.
    pub flat_interval: (f64, f64),
}

impl Default for HelmholtzValidationParams {
    fn default() -> Self {
        HelmholtzValidationParams {
            r_max: 120.0,
            r0: 5.0,
            flat_interval: (8.0, 119.0),
        }
    }
}

/// Relative `L^2(B_r0)` distance between the finite-difference solution and
/// the Green's-function quadrature, unit medium, benchmark source.
pub fn helmholtz_vs_green(d: usize, dr: f64, p: &HelmholtzValidationParams, exec: Execution) -> Result<(f64, HelmholtzSolution)> {
    let medium = MediumProfile::constant(1.0, 1.0);
    let source = SourceProfile::benchmark();
    let grid = RadialGrid::with_spacing(p.r_max, dr, d)?;
    let sol = solve_problem(grid, &medium, &source)?;
    let m = ((p.r0 / dr).ceil() as usize + 1).min(grid.n);
    let exact = par::map_range(exec, m + 1, |j| {
        oracle::helmholtz_green_quadrature(&source, &medium, d, grid.r(j))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let zero = Complex64::new(0.0, 0.0);
    let pad = |v: Vec<Complex64>| -> Field {
        let mut v = v;
        v.resize(grid.len(), zero);
        Field { grid, values: v }
    };
    let diff = pad((0..=m).map(|j| sol.u.values[j] - exact[j]).collect());
    let reference = pad(exact);
    let rel = l2_norm_ball(&diff, p.r0)? / l2_norm_ball(&reference, p.r0)?;
    Ok((rel, sol))
}

pub fn helmholtz_convergence(d: usize, dr: f64, p: &HelmholtzValidationParams, exec: Execution) -> Result<ConvergenceStudy> {
    let (e0, _) = helmholtz_vs_green(d, dr, p, exec)?;
    let (e1, _) = helmholtz_vs_green(d, 0.5 * dr, p, exec)?;
    Ok(ConvergenceStudy::new(
        format!("Helmholtz vs Green (d={d})"),
        [dr, 0.5 * dr],
        [e0, e1],
    ))
}

/// `max |(|U(r)| - |U(r_a)|)| / |U(r_a)|` over the flat interval `[r_a, r_b]`.
pub fn amplitude_flatness(sol: &HelmholtzSolution, interval: (f64, f64)) -> f64 {
    let grid = sol.u.grid;
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&j| (interval.0..=interval.1).contains(&grid.r(j)))
        .collect();
    let Some(&first) = nodes.first() else {
        return f64::NAN;
    };
    let a = sol.u.values[first].norm();
    nodes
        .iter()
        .map(|&j| (sol.u.values[j].norm() - a).abs() / a)
        .fold(0.0, f64::max)
}

// ------------------------------------------------------------------ rays

#[derive(Clone, Debug, Serialize)]
pub struct RaySuiteParams {
    pub n_positions: usize,
    pub n_directions: usize,
    pub sampling: Sampling,
    pub dt: f64,
    pub escape_time: f64,
    pub r_escape: f64,
    pub drift_time: f64,
    /// Coarse step for the RK4 order check on the smooth fixture.
    pub order_dt: f64,
}

impl Default for RaySuiteParams {
    fn default() -> Self {
        RaySuiteParams {
            n_positions: 10,
            n_directions: 10,
            sampling: Sampling::Grid,
            dt: 1e-3,
            escape_time: 40.0,
            r_escape: 10.0,
            drift_time: 200.0,
            order_dt: 0.1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RaySuite {
    pub scan: ScanReport,
    /// Conservation over the long horizon with no escape cut-off.
    pub h_drift: f64,
    pub l_drift: f64,
    pub order_drifts: [f64; 2],
    pub order_ratio: f64,
}

impl RaySuite {
    pub fn checks(&self) -> Vec<Check> {
        let trapped = self.scan.trapped().count() as f64;
        vec![
            Check::new("rays not escaped by the time budget", trapped, "= 0", trapped == 0.0),
            Check::at_most("|H| drift", self.h_drift, 1e-8),
            Check::at_most("angular momentum drift", self.l_drift, 1e-8),
            Check::at_least("RK4 drift reduction under dt halving", self.order_ratio, 12.0),
        ]
    }
}

/// Largest `|H|` along a ray of the smooth fixture for a given step.
pub fn smooth_fixture_drift(dt: f64, t_final: f64) -> Result<f64> {
    let m = rays::smooth_fixture();
    let q0 = [3.0, 1.0];
    let p0 = rays::normalize_momentum(&m, q0, [0.6, 0.8]);
    Ok(rays::trace(&m, q0, p0, &TraceConfig::new(dt, t_final, f64::INFINITY))?.h_drift)
}

pub fn ray_suite(medium: &MediumProfile, p: &RaySuiteParams, exec: Execution) -> Result<RaySuite> {
    let scan = rays::nontrapping_scan(
        medium,
        &ScanConfig {
            n_positions: p.n_positions,
            n_directions: p.n_directions,
            trace: TraceConfig::new(p.dt, p.escape_time, p.r_escape),
            sampling: p.sampling,
        },
        exec,
    )?;
    let long = rays::nontrapping_scan(
        medium,
        &ScanConfig {
            n_positions: p.n_positions,
            n_directions: p.n_directions,
            trace: TraceConfig::new(p.dt, p.drift_time, f64::INFINITY),
            sampling: p.sampling,
        },
        exec,
    )?;
    let coarse = smooth_fixture_drift(p.order_dt, p.drift_time)?;
    let fine = smooth_fixture_drift(0.5 * p.order_dt, p.drift_time)?;
    Ok(RaySuite {
        scan,
        h_drift: long.max_h_drift,
        l_drift: long.max_l_drift,
        order_drifts: [coarse, fine],
        order_ratio: coarse / fine,
    })
}

// ------------------------------------------------- oscillatory integral

#[derive(Clone, Copy, Debug, Serialize)]
pub struct OscillatoryRow {
    pub t: f64,
    pub quadrature: [f64; 2],
    pub asymptotic: [f64; 2],
    /// `t |quadrature - asymptotic|`.
    pub scaled_defect: f64,
}

pub fn oscillatory_table(a: f64, times: &[f64]) -> Result<Vec<OscillatoryRow>> {
    times
        .iter()
        .map(|&t| {
            let o = oracle::oscillatory_integral(a, t)?;
            let s = o
                .asymptotic
                .ok_or_else(|| Error::Domain("the asymptotic form needs t > 0".into()))?;
            Ok(OscillatoryRow {
                t,
                quadrature: [o.quadrature.re, o.quadrature.im],
                asymptotic: [s.re, s.im],
                scaled_defect: t * o.defect.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

// -------------------------------------------------- slow-decay data sweep

#[derive(Clone, Debug, Serialize)]
pub struct SlowDecayParams {
    pub omega: f64,
    pub c0: f64,
    pub rho: (f64, f64),
    pub t_range: (f64, f64),
    /// Log-spaced sample count over `t_range`.
    pub samples: usize,
}

impl Default for SlowDecayParams {
    fn default() -> Self {
        SlowDecayParams {
            omega: PI / 4.0,
            c0: 1.0,
            rho: (2.0, 4.0),
            t_range: (20.0, 200.0),
            samples: 181,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SlowDecayRow {
    pub d: usize,
    pub r: f64,
    pub times: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub slope: f64,
    /// `sup |v| t` over the first and the second half of the samples.
    pub sup_early: f64,
    pub sup_late: f64,
}

impl SlowDecayRow {
    pub fn sup(&self) -> f64 {
        self.sup_early.max(self.sup_late)
    }

    pub fn checks(&self) -> Vec<Check> {
        let tag = format!("d={} r={}", self.d, self.r);
        vec![
            Check::new(
                format!("{tag} sup |v| t finite and not growing"),
                self.sup(),
                "finite, late half <= 2x early half",
                self.sup().is_finite() && self.sup_late <= 2.0 * self.sup_early,
            ),
            Check::within(format!("{tag} log-log slope"), self.slope, -1.3, -0.7),
        ]
    }
}

fn log_spaced(range: (f64, f64), n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![range.0];
    }
    let (a, b) = (range.0.ln(), range.1.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Evaluates the slow-decay data through Poisson (d = 2) or Kirchhoff (d = 3)
/// at radius `r` over log-spaced times.
pub fn slow_decay_sweep(d: usize, r: f64, p: &SlowDecayParams, exec: Execution) -> Result<SlowDecayRow> {
    let data = oracle::slow_decay_ic(d, p.omega, p.c0, p.rho.0, p.rho.1)?;
    let times = log_spaced(p.t_range, p.samples);
    let magnitudes = par::map(exec, &times, |&t| {
        if d == 2 {
            oracle::poisson_radial(&data, r, t)
        } else {
            oracle::kirchhoff_radial(&data, r, t)
        }
        .map(|v| v.norm())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let x: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let y: Vec<f64> = magnitudes.iter().map(|v| v.ln()).collect();
    let (_, slope, _) = linear_fit(&x, &y);
    let half = times.len() / 2;
    let sup = |range: std::ops::Range<usize>| range.map(|i| times[i] * magnitudes[i]).fold(0.0, f64::max);
    Ok(SlowDecayRow {
        d,
        r,
        slope,
        sup_early: sup(0..half),
        sup_late: sup(half..times.len()),
        times,
        magnitudes,
    })
}

// ----------------------------------------------------- free decay of ICs

#[derive(Clone, Debug, Serialize)]
pub struct IcDecayParams {
    pub d: usize,
    pub r_max: f64,
    pub dr: f64,
    pub dt: f64,
    pub t_final: f64,
    pub r0: f64,
    /// Data `u0 = u1 = amplitude exp(-(r/width)^2)`.
    pub amplitude: f64,
    pub width: f64,
    pub every: usize,
    pub window: (f64, f64),
    /// Switches to `(1 + t^2)^{-p/2} F` forcing from zero data.
    pub forcing_p: Option<f64>,
}

impl IcDecayParams {
    pub fn new(d: usize) -> Self {
        IcDecayParams {
            d,
            r_max: 120.0,
            dr: 5e-2,
            dt: 2.5e-2,
            t_final: 200.0,
            r0: 5.0,
            amplitude: 1.0,
            width: 1.0,
            every: 20,
            window: (10.0, 100.0),
            forcing_p: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IcDecayOutcome {
    pub params: IcDecayParams,
    #[serde(skip)]
    pub series: DecaySeries,
    pub fit: Option<DecayFit>,
    pub fit_error: Option<String>,
    /// `-(d - 1)` for free data.
    pub reference_slope: f64,
}

impl IcDecayOutcome {
    pub fn check(&self, tolerance: f64) -> Check {
        let name = format!("d={} H1 x L2 log-log slope", self.params.d);
        match &self.fit {
            Some(f) => Check::within(
                name,
                f.rate,
                self.reference_slope - tolerance,
                self.reference_slope + tolerance,
            ),
            None => Check::new(
                format!("{name} ({})", self.fit_error.as_deref().unwrap_or("no fit")),
                f64::NAN,
                format!(
                    "in [{}, {}]",
                    self.reference_slope - tolerance,
                    self.reference_slope + tolerance
                ),
                false,
            ),
        }
    }
}

/// Unit medium, Gaussian data (or decaying benchmark forcing), algebraic fit of
/// `||u||_{H^1(B_r0)}` and `||u_t||_{L^2(B_r0)}` combined.
pub fn ic_decay(p: &IcDecayParams) -> Result<IcDecayOutcome> {
    let grid = RadialGrid::with_spacing(p.r_max, p.dr, p.d)?;
    let medium = MediumProfile::constant(1.0, 1.0);
    let mut cfg = WaveConfig::new(grid, medium, p.dt, p.t_final);
    match p.forcing_p {
        Some(pw) => {
            cfg = cfg.with_forcing(Forcing::Decaying {
                source: SourceProfile::benchmark(),
                p: pw,
            })
        }
        None => {
            let (a, w) = (p.amplitude, p.width);
            let g = grid.sample(|r| Complex64::new(a * (-(r / w).powi(2)).exp(), 0.0));
            cfg = cfg.with_initial_data(g.clone(), g);
        }
    }
    let (series, _) = ic_decay_series(&cfg, p.r0, p.every)?;
    let all_zero = series.e.iter().all(|&e| e == 0.0);
    let (fit, fit_error) = if all_zero {
        (None, Some("series is identically zero; fit skipped".to_string()))
    } else {
        match fit_algebraic(&series, p.window, FloorRule::Detect) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(IcDecayOutcome {
        params: p.clone(),
        series,
        fit,
        fit_error,
        reference_slope: -(p.d as f64 - 1.0),
    })
}
