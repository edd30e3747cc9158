use std::f64::consts::TAU;

use lapsim::grid::l2_norm_ball;
use lapsim::helmholtz::{assemble, solve, solve_problem};
use lapsim::lap::{diff_norms, diff_series};
use lapsim::rays::{self, TraceConfig};
use lapsim::wave::{run, Forcing, WaveConfig};
use lapsim::{Error, Field, MediumProfile, RadialGrid, SourceProfile};
use num_complex::Complex64;
use proptest::prelude::*;

fn gaussian(grid: &RadialGrid, center: f64, width: f64) -> Field {
    grid.sample(|r| Complex64::new((-((r - center) / width).powi(2)).exp(), 0.0))
}

/// Largest `|u_small - u_large|` on the small domain over a set of times,
/// relative to the largest reference amplitude there.
fn boundary_reflection(d: usize, r_small: f64, dr: f64, dt: f64, times: &[f64]) -> f64 {
    let medium = MediumProfile::constant(1.0, 1.0);
    let t_final = *times.last().unwrap();
    let go = |r_max: f64| {
        let grid = RadialGrid::with_spacing(r_max, dr, d).unwrap();
        let g = gaussian(&grid, 0.0, 1.0);
        let cfg = WaveConfig::new(grid, medium.clone(), dt, t_final)
            .with_initial_data(g, grid.zeros())
            .with_snapshots(times.to_vec());
        run(&cfg).unwrap().snapshots
    };
    let small = go(r_small);
    let large = go(3.0 * r_small);
    let n = small[0].u.values.len();
    let mut err: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for (a, b) in small.iter().zip(&large) {
        for j in 0..n {
            err = err.max((a.u.values[j] - b.u.values[j]).norm());
            scale = scale.max(b.u.values[j].norm());
        }
    }
    err / scale
}

#[test]
fn one_dimensional_boundary_is_transparent_at_unit_courant() {
    let times: Vec<f64> = (1..=40).map(|k| k as f64).collect();
    let rel = boundary_reflection(1, 20.0, 0.05, 0.05, &times);
    assert!(rel < 1e-10, "{rel:e}");
}

#[test]
fn three_dimensional_boundary_reflects_under_one_percent() {
    let times: Vec<f64> = (1..=40).map(|k| k as f64).collect();
    let rel = boundary_reflection(3, 20.0, 0.05, 0.025, &times);
    assert!(rel < 1e-2, "{rel:e}");
}

#[test]
fn unstable_step_is_a_configuration_error() {
    let grid = RadialGrid::with_spacing(20.0, 0.05, 3).unwrap();
    // benchmark medium peaks at speed sqrt(2) near the origin
    let cfg = WaveConfig::new(grid, MediumProfile::benchmark(), 0.05, 1.0);
    assert!(matches!(run(&cfg), Err(Error::Config(_))));
}

#[test]
fn zero_source_zero_data_gives_zero_error_functional_against_zero_solution() {
    let grid = RadialGrid::with_spacing(20.0, 0.1, 3).unwrap();
    let src = SourceProfile::zero(0.7);
    let helm = solve_problem(grid, &MediumProfile::benchmark(), &src).unwrap();
    let cfg = WaveConfig::new(grid, MediumProfile::benchmark(), 0.02, 2.0).with_forcing(Forcing::TimeHarmonic(src));
    let (series, _) = diff_series(&cfg, &helm, 5.0, None, 5).unwrap();
    assert!(series.e.iter().all(|&e| e == 0.0));
}

#[test]
fn error_functional_at_zero_time() {
    let grid = RadialGrid::with_spacing(20.0, 0.1, 2).unwrap();
    let m = MediumProfile::benchmark();
    let s = SourceProfile::benchmark();
    let helm = solve_problem(grid, &m, &s).unwrap();
    let cfg = WaveConfig::new(grid, m, 0.02, 0.1).with_forcing(Forcing::TimeHarmonic(s.clone()));
    let (series, _) = diff_series(&cfg, &helm, 5.0, None, 1).unwrap();
    let u_norm = l2_norm_ball(&helm.u, 5.0).unwrap();
    let want = (u_norm * u_norm * (1.0 + s.omega * s.omega)).sqrt();
    assert!((series.e[0] - want).abs() < 1e-12 * want);
}

fn small_problem(d: usize) -> (RadialGrid, MediumProfile, SourceProfile) {
    (
        RadialGrid::with_spacing(12.0, 0.1, d).unwrap(),
        MediumProfile::benchmark(),
        SourceProfile::benchmark(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn error_functional_is_phase_invariant(theta in 0.0f64..TAU, d in 1usize..=3, t in 0.0f64..20.0) {
        let (grid, m, s) = small_problem(d);
        let helm = solve_problem(grid, &m, &s).unwrap();
        let u: Vec<Complex64> = grid.nodes().map(|r| Complex64::new(r.cos(), 0.3 * r)).collect();
        let ut: Vec<Complex64> = grid.nodes().map(|r| Complex64::new(0.1, r.sin())).collect();
        let ui = if d == 1 { Complex64::new(0.0, -3.0) } else { Complex64::new(0.0, 0.0) };
        let rot = Complex64::from_polar(1.0, theta);
        let mut rotated = helm.clone();
        rotated.u = helm.u.scale(rot);
        let ru: Vec<Complex64> = u.iter().map(|v| v * rot).collect();
        let rut: Vec<Complex64> = ut.iter().map(|v| v * rot).collect();
        let a = diff_norms(&helm, t, &u, &ut, ui, 5.0).unwrap();
        let b = diff_norms(&rotated, t, &ru, &rut, ui * rot, 5.0).unwrap();
        prop_assert!((a.0 - b.0).abs() <= 1e-12 * a.0.max(1.0));
        prop_assert!((a.1 - b.1).abs() <= 1e-12 * a.1.max(1.0));
    }

    #[test]
    fn error_functional_scales_with_source(re in -2.0f64..2.0, im in -2.0f64..2.0, d in 2usize..=3) {
        prop_assume!(re.hypot(im) > 1e-3);
        let c = Complex64::new(re, im);
        let (grid, m, s) = small_problem(d);
        let run_e = |src: &SourceProfile| {
            let helm = solve_problem(grid, &m, src).unwrap();
            let cfg = WaveConfig::new(grid, m.clone(), 0.03, 3.0).with_forcing(Forcing::TimeHarmonic(src.clone()));
            diff_series(&cfg, &helm, 5.0, None, 10).unwrap().0
        };
        let a = run_e(&s);
        let b = run_e(&s.scaled(c));
        for (x, y) in a.e.iter().zip(&b.e) {
            prop_assert!((x * c.norm() - y).abs() <= 1e-10 * y.max(1e-300));
        }
    }

    #[test]
    fn wave_solution_is_linear_in_data(re in -3.0f64..3.0, im in -3.0f64..3.0, center in 0.0f64..4.0) {
        let c = Complex64::new(re, im);
        let grid = RadialGrid::with_spacing(12.0, 0.1, 3).unwrap();
        let g = gaussian(&grid, center, 1.0);
        let go = |u0: Field| run(&WaveConfig::new(grid, MediumProfile::benchmark(), 0.03, 3.0).with_initial_data(u0, grid.zeros())).unwrap();
        let a = go(g.clone()).final_state.u_curr;
        let b = go(g.scale(c)).final_state.u_curr;
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((x * c - y).norm() <= 1e-12 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn helmholtz_residual_is_small(omega in 0.2f64..2.0, d in 1usize..=3) {
        let (grid, m, s) = small_problem(d);
        let sys = assemble(grid, &m, &s, omega).unwrap();
        let sol = solve(&sys).unwrap();
        prop_assert!(sol.residual_norm <= 1e-10 * 20.0, "{}", sol.residual_norm);
    }

    #[test]
    fn rays_conserve_hamiltonian_and_angular_momentum(r in 0.0f64..7.0, phi in 0.0f64..TAU, th in 0.0f64..TAU) {
        let m = MediumProfile::benchmark();
        let q0 = [r * phi.cos(), r * phi.sin()];
        let p0 = rays::normalize_momentum(&m, q0, [th.cos(), th.sin()]);
        let tr = rays::trace(&m, q0, p0, &TraceConfig::new(1e-3, 20.0, 10.0)).unwrap();
        prop_assert!(tr.h_drift <= 1e-8, "{}", tr.h_drift);
        prop_assert!(tr.l_drift <= 1e-8, "{}", tr.l_drift);
    }

    #[test]
    fn rays_retrace_under_time_reversal(x in -5.0f64..5.0, y in -5.0f64..5.0, th in 0.0f64..TAU) {
        let m = rays::smooth_fixture();
        let q0 = [x, y];
        let p0 = rays::normalize_momentum(&m, q0, [th.cos(), th.sin()]);
        let cfg = TraceConfig::new(1e-3, 5.0, f64::INFINITY);
        let end = *rays::trace(&m, q0, p0, &cfg).unwrap().last();
        let back = rays::trace(&m, end.q, [-end.p[0], -end.p[1]], &cfg).unwrap();
        let q = back.last().q;
        prop_assert!((q[0] - q0[0]).hypot(q[1] - q0[1]) < 1e-6);
    }
}
