//! Leapfrog time stepping for the radial wave equation
//! `u_tt - beta^{-1} r^{1-d} (alpha r^{d-1} u_r)_r = f` with a first-order
//! absorbing condition at `r = R`.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Field, RadialGrid};
use crate::medium::{MediumProfile, SourceProfile};
use crate::operator::RadialOperator;

/// Runs are aborted once `max |u|` exceeds this.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub enum Forcing {
    None,
    /// `e^{-i omega t} F(r)`.
    TimeHarmonic(SourceProfile),
    /// `F(r) (1 + t^2)^{-p/2}`.
    Decaying {
        source: SourceProfile,
        p: f64,
    },
}

impl Forcing {
    fn profile(&self) -> Option<&SourceProfile> {
        match self {
            Forcing::None => None,
            Forcing::TimeHarmonic(s) | Forcing::Decaying { source: s, .. } => Some(s),
        }
    }

    pub fn time_factor(&self, t: f64) -> Complex64 {
        match self {
            Forcing::None => ZERO,
            Forcing::TimeHarmonic(s) => Complex64::from_polar(1.0, -s.omega * t),
            Forcing::Decaying { p, .. } => Complex64::new((1.0 + t * t).powf(-0.5 * p), 0.0),
        }
    }
}

#[derive(Clone, Debug)]
pub struct WaveConfig {
    pub grid: RadialGrid,
    pub medium: MediumProfile,
    /// Requested step; the realized step is `t_final / ceil(t_final / dt)`.
    pub dt: f64,
    pub t_final: f64,
    pub forcing: Forcing,
    pub u0: Field,
    pub u1: Field,
    pub snapshot_times: Vec<f64>,
}

impl WaveConfig {
    /// Zero initial data, no forcing, no snapshots.
    pub fn new(grid: RadialGrid, medium: MediumProfile, dt: f64, t_final: f64) -> Self {
        WaveConfig {
            grid,
            medium,
            dt,
            t_final,
            forcing: Forcing::None,
            u0: grid.zeros(),
            u1: grid.zeros(),
            snapshot_times: Vec::new(),
        }
    }

    pub fn with_forcing(mut self, forcing: Forcing) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_initial_data(mut self, u0: Field, u1: Field) -> Self {
        self.u0 = u0;
        self.u1 = u1;
        self
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn steps(&self) -> usize {
        if self.t_final <= 0.0 {
            0
        } else {
            (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn realized_dt(&self) -> f64 {
        match self.steps() {
            0 => self.dt,
            k => self.t_final / k as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CflReport {
    pub ratio: f64,
    pub ratio_max: f64,
    pub stable: bool,
}

/// `dt c_max / dr` against the conservative bound `1/sqrt(d)`.
pub fn cfl_check(grid: &RadialGrid, medium: &MediumProfile, dt: f64) -> CflReport {
    let ratio = dt * RadialOperator::max_speed(grid, medium) / grid.dr();
    let ratio_max = 1.0 / (grid.d as f64).sqrt();
    CflReport {
        ratio,
        ratio_max,
        stable: ratio <= ratio_max * (1.0 + 1e-12),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub u_prev: Field,
    pub u_curr: Field,
    pub t: f64,
    pub step: usize,
}

/// Precomputed stencil, forcing profile and time step for one configuration.
#[derive(Clone, Debug)]
pub struct Stepper {
    pub op: RadialOperator,
    pub dt: f64,
    forcing: Forcing,
    source: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cfg: &WaveConfig) -> Result<Self> {
        let op = RadialOperator::new(cfg.grid, &cfg.medium)?;
        let source = match cfg.forcing.profile() {
            Some(s) => cfg.grid.nodes().map(|r| s.eval(r)).collect(),
            None => vec![ZERO; cfg.grid.len()],
        };
        Ok(Stepper {
            op,
            dt: cfg.realized_dt(),
            forcing: cfg.forcing.clone(),
            source,
        })
    }

    #[inline]
    fn force(&self, j: usize, factor: Complex64) -> Complex64 {
        self.source[j] * factor
    }

    /// New value at the origin from the limit equation `u_tt = d alpha/beta u_rr + f`.
    pub fn origin_update(&self, prev: &[Complex64], curr: &[Complex64], factor: Complex64) -> Complex64 {
        let dt2 = self.dt * self.dt;
        2.0 * curr[0] - prev[0] + dt2 * (self.op.apply_origin(curr) + self.force(0, factor))
    }

    /// New boundary value with the ghost node eliminated through the
    /// centered discretization of `u_t = -c0 (u_r + kappa u / R)`.
    pub fn apply_radiation_bc(&self, prev: &[Complex64], curr: &[Complex64], factor: Complex64) -> Complex64 {
        let op = &self.op;
        let n = op.n();
        let dt = self.dt;
        let dr = op.grid.dr();
        let (a, b) = op.boundary_coefficients();
        let lambda = a * dt * dr / op.c0;
        let curv = 1.0 + 2.0 * dr * op.kappa / op.grid.r_max;
        let lap = a * (curr[n - 1] - curr[n] * curv) - b * (curr[n] - curr[n - 1]);
        (2.0 * curr[n] - (1.0 - lambda) * prev[n] + dt * dt * (lap + self.force(n, factor))) / (1.0 + lambda)
    }

    /// One leapfrog step from `(prev, curr)` at time `t` into `next`.
    pub fn advance(&self, prev: &[Complex64], curr: &[Complex64], t: f64, next: &mut [Complex64]) {
        let n = self.op.n();
        let dt2 = self.dt * self.dt;
        let factor = self.forcing.time_factor(t);
        for j in 1..n {
            next[j] = 2.0 * curr[j] - prev[j] + dt2 * (self.op.apply_interior(curr, j) + self.force(j, factor));
        }
        next[0] = self.origin_update(prev, curr, factor);
        next[n] = self.apply_radiation_bc(prev, curr, factor);
    }

    /// Second-order Taylor start `u^1 = u^0 + dt u_1 + dt^2/2 (L u^0 + f(0))`.
    pub fn taylor_start(&self, u0: &[Complex64], u1: &[Complex64]) -> Vec<Complex64> {
        let op = &self.op;
        let n = op.n();
        let dt = self.dt;
        let dr = op.grid.dr();
        // ghost from the boundary condition with u_t = u1 at t = 0
        let ghost = u0[n - 1] - 2.0 * dr / op.c0 * u1[n] - 2.0 * dr * op.kappa / op.grid.r_max * u0[n];
        let mut lu = vec![ZERO; n + 1];
        op.apply(u0, ghost, &mut lu);
        let factor = self.forcing.time_factor(0.0);
        (0..=n)
            .map(|j| u0[j] + dt * u1[j] + 0.5 * dt * dt * (lu[j] + self.force(j, factor)))
            .collect()
    }

    /// `1/2 sum m |u_t|^2 + 1/2 sum a_{j+1/2} |u_{j+1} - u_j|^2 / dr`.
    pub fn energy(&self, u: &[Complex64], ut: &[Complex64]) -> f64 {
        let op = &self.op;
        let n = op.n();
        let dr = op.grid.dr();
        let kinetic: f64 = (0..=n).map(|j| op.mass[j] * ut[j].norm_sqr()).sum();
        let potential: f64 = (0..n).map(|j| op.flux[j] * (u[j + 1] - u[j]).norm_sqr() / dr).sum();
        0.5 * (kinetic + potential)
    }
}

/// Advances `state` by one step.
pub fn step(state: &WaveState, cfg: &WaveConfig) -> Result<WaveState> {
    let stepper = Stepper::new(cfg)?;
    let mut next = cfg.grid.zeros();
    stepper.advance(&state.u_prev.values, &state.u_curr.values, state.t, &mut next.values);
    Ok(WaveState {
        u_prev: state.u_curr.clone(),
        u_curr: next,
        t: state.t + stepper.dt,
        step: state.step + 1,
    })
}

/// Data handed to a per-step observer: the field at `t` and its centered
/// time derivative.
pub struct Observation<'a> {
    pub step: usize,
    pub t: f64,
    pub grid: &'a RadialGrid,
    pub u: &'a [Complex64],
    pub ut: &'a [Complex64],
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub u: Field,
}

#[derive(Clone, Debug)]
pub struct WaveRun {
    pub dt: f64,
    pub steps: usize,
    pub cfl: CflReport,
    pub snapshots: Vec<Snapshot>,
    pub final_state: WaveState,
    pub max_abs: f64,
}

/// Integrates to `t_final` without observation.
pub fn run(cfg: &WaveConfig) -> Result<WaveRun> {
    run_observed(cfg, 0, |_| Ok(()))
}

/// Integrates to `t_final`, calling `observer` at every `every`-th step
/// (including step 0 and, if divisible, the last step); `every = 0` disables it.
/// Observations stop one step short of the end only when the final step is
/// not a multiple of `every`.
pub fn run_observed<F>(cfg: &WaveConfig, every: usize, mut observer: F) -> Result<WaveRun>
where
    F: FnMut(&Observation<'_>) -> Result<()>,
{
    let cfl = cfl_check(&cfg.grid, &cfg.medium, cfg.realized_dt());
    if !cfl.stable {
        return Err(Error::Config(format!(
            "CFL ratio {:.4} exceeds the bound {:.4}",
            cfl.ratio, cfl.ratio_max
        )));
    }
    if cfg.u0.grid != cfg.grid || cfg.u1.grid != cfg.grid {
        return Err(Error::Config("initial data live on a different grid".into()));
    }
    let stepper = Stepper::new(cfg)?;
    let steps = cfg.steps();
    let dt = stepper.dt;
    let grid = cfg.grid;
    let n = grid.n;

    let snap_steps: Vec<usize> = cfg
        .snapshot_times
        .iter()
        .filter(|&&t| t >= 0.0 && t <= cfg.t_final + 0.5 * dt)
        .map(|&t| ((t / dt).round() as usize).min(steps))
        .collect();
    let mut snapshots = Vec::with_capacity(snap_steps.len() + 1);
    let mut snap_cursor = 0;
    let take_snapshots = |k: usize, u: &[Complex64], cursor: &mut usize, out: &mut Vec<Snapshot>| {
        while *cursor < snap_steps.len() && snap_steps[*cursor] == k {
            out.push(Snapshot {
                t: k as f64 * dt,
                step: k,
                u: Field {
                    grid,
                    values: u.to_vec(),
                },
            });
            *cursor += 1;
        }
    };

    let u0 = cfg.u0.values.clone();
    if steps == 0 {
        snapshots.push(Snapshot {
            t: 0.0,
            step: 0,
            u: cfg.u0.clone(),
        });
        if every > 0 {
            observer(&Observation {
                step: 0,
                t: 0.0,
                grid: &grid,
                u: &u0,
                ut: &cfg.u1.values,
            })?;
        }
        let max_abs = cfg.u0.max_abs();
        return Ok(WaveRun {
            dt,
            steps,
            cfl,
            snapshots,
            final_state: WaveState {
                u_prev: cfg.u0.clone(),
                u_curr: cfg.u0.clone(),
                t: 0.0,
                step: 0,
            },
            max_abs,
        });
    }

    let mut prev = u0;
    let mut curr = stepper.taylor_start(&prev, &cfg.u1.values);
    let mut next = vec![ZERO; n + 1];
    let mut ut = vec![ZERO; n + 1];
    let mut max_abs = cfg.u0.max_abs();

    take_snapshots(0, &prev, &mut snap_cursor, &mut snapshots);
    if every > 0 {
        observer(&Observation {
            step: 0,
            t: 0.0,
            grid: &grid,
            u: &prev,
            ut: &cfg.u1.values,
        })?;
    }

    let limit = BLOWUP_THRESHOLD * BLOWUP_THRESHOLD;
    for k in 1..=steps {
        let mut peak = 0.0f64;
        for v in &curr {
            peak = peak.max(v.norm_sqr());
        }
        if !(peak <= limit) {
            return Err(Error::Unstable {
                step: k,
                time: k as f64 * dt,
                magnitude: peak.sqrt(),
            });
        }
        max_abs = max_abs.max(peak.sqrt());
        take_snapshots(k, &curr, &mut snap_cursor, &mut snapshots);
        if k == steps {
            if every > 0 && k % every == 0 {
                // one extra step gives the centered velocity at t_final
                stepper.advance(&prev, &curr, k as f64 * dt, &mut next);
                let inv = 0.5 / dt;
                for j in 0..=n {
                    ut[j] = (next[j] - prev[j]) * inv;
                }
                observer(&Observation {
                    step: k,
                    t: k as f64 * dt,
                    grid: &grid,
                    u: &curr,
                    ut: &ut,
                })?;
            }
            break;
        }
        stepper.advance(&prev, &curr, k as f64 * dt, &mut next);
        if every > 0 && k % every == 0 {
            let inv = 0.5 / dt;
            for j in 0..=n {
                ut[j] = (next[j] - prev[j]) * inv;
            }
            observer(&Observation {
                step: k,
                t: k as f64 * dt,
                grid: &grid,
                u: &curr,
                ut: &ut,
            })?;
        }
        std::mem::swap(&mut prev, &mut curr);
        std::mem::swap(&mut curr, &mut next);
    }

    Ok(WaveRun {
        dt,
        steps,
        cfl,
        snapshots,
        final_state: WaveState {
            u_prev: Field { grid, values: prev },
            u_curr: Field { grid, values: curr },
            t: steps as f64 * dt,
            step: steps,
        },
        max_abs,
    })
}

/// Writes each snapshot as its own `r,re,im` block preceded by `# t=...`.
pub fn write_snapshots<W: Write>(snapshots: &[Snapshot], mut out: W) -> std::io::Result<()> {
    for s in snapshots {
        writeln!(out, "# t={:e}", s.t)?;
        s.u.write_csv(&mut out)?;
    }
    Ok(())
}
