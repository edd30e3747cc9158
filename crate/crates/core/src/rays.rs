//! Hamiltonian ray tracing for `H(q, p) = alpha(|q|) |p|^2 - beta(|q|)`.
//!
//! Radial media are embedded in the plane, so rays live in R^2. The flow is
//! `q' = 2 alpha p`, `p' = -(beta / alpha) grad alpha + grad beta`, integrated
//! with classical RK4.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::medium::MediumProfile;
use crate::par::{self, Execution};

pub type Vec2 = [f64; 2];

/// Initial conditions must sit on `H = 0` to this tolerance.
pub const LEVEL_SET_TOL: f64 = 1e-10;

fn norm(v: Vec2) -> f64 {
    v[0].hypot(v[1])
}

pub fn hamiltonian(medium: &MediumProfile, q: Vec2, p: Vec2) -> f64 {
    let r = norm(q);
    medium.alpha(r) * (p[0] * p[0] + p[1] * p[1]) - medium.beta(r)
}

/// Scales a unit direction onto the zero level set at `q`.
pub fn normalize_momentum(medium: &MediumProfile, q: Vec2, direction: Vec2) -> Vec2 {
    let r = norm(q);
    let s = (medium.beta(r) / medium.alpha(r)).sqrt();
    [s * direction[0], s * direction[1]]
}

/// `q x p`, conserved by the flow in radial media.
pub fn angular_momentum(q: Vec2, p: Vec2) -> f64 {
    q[0] * p[1] - q[1] * p[0]
}

fn rhs(medium: &MediumProfile, q: Vec2, p: Vec2) -> (Vec2, Vec2) {
    let r = norm(q);
    let a = medium.alpha(r);
    let b = medium.beta(r);
    let dq = [2.0 * a * p[0], 2.0 * a * p[1]];
    // radial gradients vanish at the origin by symmetry
    if r == 0.0 {
        return (dq, [0.0, 0.0]);
    }
    let g = -b / a * medium.alpha.derivative(r) + medium.beta.derivative(r);
    (dq, [g * q[0] / r, g * q[1] / r])
}

fn axpy(x: Vec2, h: f64, y: Vec2) -> Vec2 {
    [x[0] + h * y[0], x[1] + h * y[1]]
}

/// One classical RK4 step.
pub fn rk4_step(medium: &MediumProfile, q: Vec2, p: Vec2, dt: f64) -> (Vec2, Vec2) {
    let (k1q, k1p) = rhs(medium, q, p);
    let (k2q, k2p) = rhs(medium, axpy(q, 0.5 * dt, k1q), axpy(p, 0.5 * dt, k1p));
    let (k3q, k3p) = rhs(medium, axpy(q, 0.5 * dt, k2q), axpy(p, 0.5 * dt, k2p));
    let (k4q, k4p) = rhs(medium, axpy(q, dt, k3q), axpy(p, dt, k3p));
    let comb = |x: Vec2, a: Vec2, b: Vec2, c: Vec2, d: Vec2| -> Vec2 {
        [
            x[0] + dt / 6.0 * (a[0] + 2.0 * b[0] + 2.0 * c[0] + d[0]),
            x[1] + dt / 6.0 * (a[1] + 2.0 * b[1] + 2.0 * c[1] + d[1]),
        ]
    };
    (comb(q, k1q, k2q, k3q, k4q), comb(p, k1p, k2p, k3p, k4p))
}

/// Radii where either coefficient switches formula.
pub fn medium_breakpoints(medium: &MediumProfile) -> Vec<f64> {
    let mut b = medium.alpha.breakpoints();
    b.extend(medium.beta.breakpoints());
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// RK4 step that restarts at the first coefficient break point crossed, so
/// each sub-step sees smooth coefficients.
pub fn step_across_breaks(medium: &MediumProfile, breaks: &[f64], q: Vec2, p: Vec2, dt: f64) -> (Vec2, Vec2) {
    let (q1, p1) = rk4_step(medium, q, p, dt);
    let (r0, r1) = (norm(q), norm(q1));
    let Some(&b) = breaks.iter().find(|&&b| (r0 - b) * (r1 - b) < 0.0) else {
        return (q1, p1);
    };
    let (mut lo, mut hi) = (0.0, dt);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let (qm, _) = rk4_step(medium, q, p, mid);
        if (r0 - b) * (norm(qm) - b) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (qa, pa) = rk4_step(medium, q, p, hi);
    rk4_step(medium, qa, pa, dt - hi)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Integration stops once `|q|` exceeds this radius.
    pub r_escape: f64,
    /// Keep every `record_every`-th step in the trajectory (0 keeps only the ends).
    pub record_every: usize,
}

impl TraceConfig {
    pub fn new(dt: f64, t_final: f64, r_escape: f64) -> Self {
        TraceConfig {
            dt,
            t_final,
            r_escape,
            record_every: 0,
        }
    }

    pub fn recording(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RaySample {
    pub t: f64,
    pub q: Vec2,
    pub p: Vec2,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RayTrajectory {
    pub samples: Vec<RaySample>,
    pub escaped: bool,
    pub t_escape: Option<f64>,
    /// `max |H|` over all steps.
    pub h_drift: f64,
    /// `max |q x p - q0 x p0|` over all steps.
    pub l_drift: f64,
}

impl RayTrajectory {
    pub fn last(&self) -> &RaySample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,qx,qy,px,py,H")?;
        for s in &self.samples {
            writeln!(out, "{:e},{:e},{:e},{:e},{:e},{:e}", s.t, s.q[0], s.q[1], s.p[0], s.p[1], s.h)?;
        }
        Ok(())
    }
}

pub fn trace(medium: &MediumProfile, q0: Vec2, p0: Vec2, cfg: &TraceConfig) -> Result<RayTrajectory> {
    if !(cfg.dt > 0.0 && cfg.t_final >= 0.0) {
        return Err(Error::Config(format!(
            "ray step {} and final time {} must be positive",
            cfg.dt, cfg.t_final
        )));
    }
    let h0 = hamiltonian(medium, q0, p0);
    if h0.abs() > LEVEL_SET_TOL {
        return Err(Error::Domain(format!("initial ray is off the zero level set: H = {h0:e}")));
    }
    let steps = (cfg.t_final / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let l0 = angular_momentum(q0, p0);
    let (mut q, mut p) = (q0, p0);
    let mut samples = vec![RaySample { t: 0.0, q, p, h: h0 }];
    let mut h_drift = h0.abs();
    let mut l_drift: f64 = 0.0;
    let mut t_escape = None;
    let breaks = medium_breakpoints(medium);
    for k in 1..=steps {
        (q, p) = step_across_breaks(medium, &breaks, q, p, cfg.dt);
        let t = k as f64 * cfg.dt;
        if !(q.iter().chain(&p).all(|v| v.is_finite())) {
            return Err(Error::Integration { time: t });
        }
        let h = hamiltonian(medium, q, p);
        h_drift = h_drift.max(h.abs());
        l_drift = l_drift.max((angular_momentum(q, p) - l0).abs());
        let escaped = norm(q) > cfg.r_escape;
        if escaped || k == steps || (cfg.record_every > 0 && k % cfg.record_every == 0) {
            samples.push(RaySample { t, q, p, h });
        }
        if escaped {
            t_escape = Some(t);
            break;
        }
    }
    Ok(RayTrajectory {
        samples,
        escaped: t_escape.is_some(),
        t_escape,
        h_drift,
        l_drift,
    })
}

/// How scan start points are chosen inside `|q| <= r_inhom`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Sampling {
    /// Radii `r_inhom * i / n_positions` on the positive x-axis (rotation
    /// invariance makes the polar angle redundant), directions `2 pi k / n_directions`.
    Grid,
    /// Positions uniform in the disk and directions uniform on the circle,
    /// from a ChaCha8 stream with the given seed.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanConfig {
    pub n_positions: usize,
    pub n_directions: usize,
    pub trace: TraceConfig,
    pub sampling: Sampling,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RayOutcome {
    pub q0: Vec2,
    pub p0: Vec2,
    pub escaped: bool,
    pub t_escape: Option<f64>,
    pub h_drift: f64,
    pub l_drift: f64,
    pub final_radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub rays: Vec<RayOutcome>,
    pub all_escaped: bool,
    /// Latest escape time among escaping rays.
    pub worst_t_escape: Option<f64>,
    pub max_h_drift: f64,
    pub max_l_drift: f64,
    pub config: ScanConfig,
}

impl ScanReport {
    pub fn trapped(&self) -> impl Iterator<Item = &RayOutcome> {
        self.rays.iter().filter(|r| !r.escaped)
    }
}

impl fmt::Display for ScanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let trapped = self.trapped().count();
        writeln!(f, "rays = {}", self.rays.len())?;
        writeln!(f, "escaped = {}", self.rays.len() - trapped)?;
        writeln!(f, "all_escaped = {}", self.all_escaped)?;
        match self.worst_t_escape {
            Some(t) => writeln!(f, "worst_t_escape = {t:e}")?,
            None => writeln!(f, "worst_t_escape = none")?,
        }
        writeln!(f, "max_h_drift = {:e}", self.max_h_drift)?;
        writeln!(f, "max_l_drift = {:e}", self.max_l_drift)?;
        for r in self.trapped() {
            writeln!(
                f,
                "not_escaped q0 = ({:e}, {:e}) p0 = ({:e}, {:e}) final_radius = {:e}",
                r.q0[0], r.q0[1], r.p0[0], r.p0[1], r.final_radius
            )?;
        }
        write!(f, "note = sampled evidence only, not a proof of non-trapping")
    }
}

/// Start points `(q0, p0)` on the zero level set for a scan.
pub fn scan_initial_conditions(
    medium: &MediumProfile,
    n_positions: usize,
    n_directions: usize,
    sampling: Sampling,
) -> Vec<(Vec2, Vec2)> {
    let rmax = medium.r_inhom;
    let mut out = Vec::with_capacity(n_positions * n_directions);
    match sampling {
        Sampling::Grid => {
            for i in 0..n_positions {
                let q = [rmax * i as f64 / n_positions as f64, 0.0];
                for k in 0..n_directions {
                    let th = 2.0 * std::f64::consts::PI * k as f64 / n_directions as f64;
                    out.push((q, normalize_momentum(medium, q, [th.cos(), th.sin()])));
                }
            }
        }
        Sampling::Seeded(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tau = 2.0 * std::f64::consts::PI;
            for _ in 0..n_positions * n_directions {
                let r = rmax * rng.gen::<f64>().sqrt();
                let phi = tau * rng.gen::<f64>();
                let th = tau * rng.gen::<f64>();
                let q = [r * phi.cos(), r * phi.sin()];
                out.push((q, normalize_momentum(medium, q, [th.cos(), th.sin()])));
            }
        }
    }
    out
}

pub fn nontrapping_scan(medium: &MediumProfile, cfg: &ScanConfig, exec: Execution) -> Result<ScanReport> {
    if cfg.n_positions == 0 || cfg.n_directions == 0 {
        return Err(Error::Config("ray scan needs at least one position and one direction".into()));
    }
    let starts = scan_initial_conditions(medium, cfg.n_positions, cfg.n_directions, cfg.sampling);
    let tc = TraceConfig {
        record_every: 0,
        ..cfg.trace
    };
    let results = par::map(exec, &starts, |&(q0, p0)| {
        trace(medium, q0, p0, &tc).map(|tr| RayOutcome {
            q0,
            p0,
            escaped: tr.escaped,
            t_escape: tr.t_escape,
            h_drift: tr.h_drift,
            l_drift: tr.l_drift,
            final_radius: norm(tr.last().q),
        })
    });
    let rays = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScanReport {
        all_escaped: rays.iter().all(|r| r.escaped),
        worst_t_escape: rays.iter().filter_map(|r| r.t_escape).reduce(f64::max),
        max_h_drift: rays.iter().map(|r| r.h_drift).fold(0.0, f64::max),
        max_l_drift: rays.iter().map(|r| r.l_drift).fold(0.0, f64::max),
        rays,
        config: *cfg,
    })
}

/// `alpha = 1`, `beta = 11 + 10 cos(pi r / 4)` on `[0, 4)`: `r sqrt(beta)` has an
/// interior maximum, so tangential rays near `r = 2` stay bounded.
pub fn trapping_fixture() -> MediumProfile {
    use crate::medium::{RadialProfile, Segment};
    MediumProfile {
        alpha: RadialProfile::constant(1.0),
        beta: RadialProfile::new(
            vec![Segment::raised_cosine(0.0, 4.0, 11.0, 10.0, std::f64::consts::PI / 4.0, 0.0)],
            1.0,
        ),
        alpha0: 1.0,
        beta0: 1.0,
        r_inhom: 4.0,
    }
}

/// `alpha = 1.5 + 0.5 cos(pi r / 20)` on `[0, 20)`, `beta = 1`: smooth on the
/// whole traced region, used for integrator order checks.
pub fn smooth_fixture() -> MediumProfile {
    use crate::medium::{RadialProfile, Segment};
    MediumProfile {
        alpha: RadialProfile::new(
            vec![Segment::raised_cosine(0.0, 20.0, 1.5, 0.5, std::f64::consts::PI / 20.0, 0.0)],
            1.0,
        ),
        beta: RadialProfile::constant(1.0),
        alpha0: 1.0,
        beta0: 1.0,
        r_inhom: 20.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hamiltonian_examples() {
        let c = MediumProfile::constant(1.0, 1.0);
        assert_eq!(hamiltonian(&c, [0.3, 0.1], [1.0, 0.0]), 0.0);
        let m = MediumProfile::benchmark();
        assert_eq!(hamiltonian(&m, [0.0, 0.0], [1.0, 0.0]), 1.0);
    }

    #[test]
    fn normalized_momentum_examples() {
        let m = MediumProfile::benchmark();
        let p = normalize_momentum(&m, [0.0, 0.0], [1.0, 0.0]);
        assert!((norm(p) - 0.5f64.sqrt()).abs() < 1e-15);
        let p = normalize_momentum(&m, [3.0, 4.0], [0.6, 0.8]);
        assert!((norm(p) - 3f64.sqrt()).abs() < 1e-14);
        assert!(hamiltonian(&m, [3.0, 4.0], p).abs() < 1e-14);
    }

    #[test]
    fn straight_rays_in_constant_medium() {
        let m = MediumProfile::constant(2.0, 8.0);
        let q0 = [0.5, -0.25];
        let p0 = normalize_momentum(&m, q0, [0.6, 0.8]);
        let tr = trace(&m, q0, p0, &TraceConfig::new(0.01, 1.0, 1e9)).unwrap();
        let s = tr.last();
        for i in 0..2 {
            assert!((s.q[i] - (q0[i] + 4.0 * p0[i] * s.t)).abs() < 1e-12);
        }
        assert!((s.t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn off_level_set_is_rejected() {
        let m = MediumProfile::benchmark();
        assert!(matches!(
            trace(&m, [0.0, 0.0], [1.0, 0.0], &TraceConfig::new(0.01, 1.0, 10.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn escape_time_closed_form() {
        let m = MediumProfile::constant(1.0, 1.0);
        let cfg = ScanConfig {
            n_positions: 3,
            n_directions: 4,
            trace: TraceConfig::new(1e-3, 50.0, 10.0),
            sampling: Sampling::Grid,
        };
        let rep = nontrapping_scan(&m, &cfg, Execution::Sequential).unwrap();
        assert!(rep.all_escaped);
        // outward ray from the origin: 2 |p| t = 10
        let r0 = &rep.rays[0];
        assert!((r0.t_escape.unwrap() - 5.0).abs() <= 1e-3 + 1e-12);
    }

    #[test]
    fn fixture_traps_tangential_rays() {
        let m = trapping_fixture();
        let q0 = [2.0, 0.0];
        let p0 = normalize_momentum(&m, q0, [0.0, 1.0]);
        let tr = trace(&m, q0, p0, &TraceConfig::new(1e-3, 40.0, 10.0)).unwrap();
        assert!(!tr.escaped);
        assert!(norm(tr.last().q) < 4.0);
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let m = smooth_fixture();
        let q0 = [1.0, 2.0];
        let p0 = normalize_momentum(&m, q0, [0.8, -0.6]);
        let fwd = trace(&m, q0, p0, &TraceConfig::new(1e-3, 5.0, 1e9)).unwrap();
        let end = fwd.last();
        let back = trace(&m, end.q, [-end.p[0], -end.p[1]], &TraceConfig::new(1e-3, 5.0, 1e9)).unwrap();
        let q = back.last().q;
        assert!((q[0] - q0[0]).hypot(q[1] - q0[1]) < 1e-6);
    }

    #[test]
    fn seeded_sampling_is_deterministic_and_inside() {
        let m = MediumProfile::benchmark();
        let a = scan_initial_conditions(&m, 5, 4, Sampling::Seeded(7));
        let b = scan_initial_conditions(&m, 5, 4, Sampling::Seeded(7));
        assert_eq!(a, b);
        assert_eq!(a.len(), 20);
        for (q, p) in a {
            assert!(norm(q) <= m.r_inhom);
            assert!(hamiltonian(&m, q, p).abs() < 1e-14);
        }
    }

    #[test]
    fn trajectory_csv_header() {
        let m = MediumProfile::constant(1.0, 1.0);
        let tr = trace(&m, [0.0, 0.0], [1.0, 0.0], &TraceConfig::new(0.5, 1.0, 10.0)).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,qx,qy,px,py,H\n0e0,0e0,0e0,1e0,0e0,0e0\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
