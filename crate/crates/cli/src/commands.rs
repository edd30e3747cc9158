//! Subcommand implementations.

use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use lapsim::experiments::{
    self, Check, CrossValidationParams, FigureBParams, HelmholtzValidationParams, IcDecayParams, SlowDecayParams,
};
use lapsim::helmholtz::{assemble, solve, sommerfeld_defect, write_defect_csv};
use lapsim::lap::u_infty_1d;
use lapsim::rays::{self, Sampling, ScanConfig, TraceConfig};
use lapsim::special::{hankel_h1_0, H0_REFERENCE};
use lapsim::wave::{run, write_snapshots, Forcing, WaveConfig};
use lapsim::{par, Execution, MediumProfile, RadialGrid, SourceProfile};
use num_complex::Complex64;
use serde::Serialize;

use crate::config::{self, pick, positive, ConfigFile};
use crate::output::{write_medium_csv, Output};
use crate::{
    Cli, Command, DecayArgs, DecayMode, Failure, Family, FigureBArgs, Fixture, ForcingKind, HelmholtzArgs, RaytraceArgs,
    ValidateArgs, WaveArgs,
};

struct Context<'a> {
    cfg: ConfigFile,
    config_path: Option<&'a Path>,
    exec: Execution,
    out: Output,
}

pub fn dispatch(cli: Cli) -> Result<std::path::PathBuf, Failure> {
    let config_path = cli.common.config.as_deref();
    let cfg = ConfigFile::load(config_path)?;
    let exec = if cli.common.sequential || cfg.sequential == Some(true) {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let out = Output::create(cli.common.out.clone(), cfg.out_dir.clone())?;
    let ctx = Context {
        cfg,
        config_path,
        exec,
        out,
    };
    match cli.command {
        Command::FigureB(a) => figure_b(ctx, a),
        Command::Validate(a) => validate(ctx, a),
        Command::Raytrace(a) => raytrace(ctx, a),
        Command::Decay(a) => decay(ctx, a),
        Command::Helmholtz(a) => helmholtz(ctx, a),
        Command::Wave(a) => wave(ctx, a),
    }
}

fn parse_enum<T: ValueEnum>(key: &str, value: Option<&String>) -> Result<Option<T>, Failure> {
    value
        .map(|s| T::from_str(s, true).map_err(|e| Failure::Config(format!("{key}: {e}"))))
        .transpose()
}

fn print_checks(checks: &[Check]) {
    for c in checks {
        println!("  {c}");
    }
}

/// Fails with exit code 1 when any check failed, after the artifacts exist.
fn finish<T: Serialize>(ctx: Context, command: &str, parameters: &T, checks: &[Check]) -> Result<std::path::PathBuf, Failure> {
    let dir = ctx.out.finish(command, ctx.config_path, parameters)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if failed.is_empty() {
        Ok(dir)
    } else {
        Err(Failure::Threshold(format!(
            "{} (artifacts in {})",
            failed.join("; "),
            dir.display()
        )))
    }
}

fn checked_medium(ctx: &Context, r_max: f64) -> Result<(MediumProfile, SourceProfile), Failure> {
    let (m, s) = (ctx.cfg.medium(), ctx.cfg.source());
    let report = lapsim::medium::validate(&m, &s, r_max, 4001).map_err(Failure::solver("medium validation"))?;
    if let Some(v) = report.violations.first() {
        return Err(Failure::Config(format!(
            "medium violates {:?} ({} samples, first at r = {}, worst {:e})",
            v.check, v.count, v.first_r, v.worst
        )));
    }
    Ok((m, s))
}

fn figure_b(mut ctx: Context, a: FigureBArgs) -> Result<std::path::PathBuf, Failure> {
    let f = &ctx.cfg.figure_b;
    let def = FigureBParams::default();
    let params = FigureBParams {
        r0: positive("r0", pick(a.r0, f.r0, def.r0))?,
        r_max: positive("r_max", pick(a.r_max, f.r_max, def.r_max))?,
        dr: positive("dr", pick(a.dr, f.dr, def.dr))?,
        dt: positive("dt", pick(a.dt, f.dt, def.dt))?,
        t_final: positive("t_final", pick(a.t_final, f.t_final, def.t_final))?,
        every: pick(a.every, f.every, def.every).max(1),
        fast_window: config::window("fast_window", f.fast_window.unwrap_or(def.fast_window))?,
        slow_window: config::window("slow_window", f.slow_window.unwrap_or(def.slow_window))?,
        ratio_times: def.ratio_times,
    };
    let dims = config::dims(&pick(a.dims, f.dims.clone(), vec![1, 2, 3]))?;
    let (medium, source) = checked_medium(&ctx, params.r_max)?;

    let outcomes = experiments::figure_b_dims(&dims, &params, &medium, &source, ctx.exec);
    let mut summary = Vec::new();
    let mut checks = Vec::new();
    for (d, res) in dims.iter().zip(outcomes) {
        let out = res.map_err(Failure::solver(format!("figure-b d={d}")))?;
        ctx.out.write(&format!("E_d{d}.csv"), |w| out.series.write_csv(w))?;
        ctx.out.write(&format!("fit_d{d}.txt"), |w| {
            writeln!(w, "d = {d}")?;
            writeln!(w, "dt = {:e}", out.dt)?;
            writeln!(w, "steps = {}", out.steps)?;
            for fit in &out.fits {
                writeln!(w, "\n{fit}")?;
            }
            for e in &out.fit_errors {
                writeln!(w, "\n{e}")?;
            }
            writeln!(w)?;
            for c in &out.checks {
                writeln!(w, "{c}")?;
            }
            Ok(())
        })?;
        println!("d = {d}: dt = {:e}, steps = {}, CFL {:.3}", out.dt, out.steps, out.cfl.ratio);
        for fit in &out.fits {
            println!(
                "  {} fit: rate {:.6e}, R^2 {:.6}, floor {:?}",
                fit.model, fit.rate, fit.residual, fit.floor
            );
        }
        for e in &out.fit_errors {
            println!("  {e}");
            checks.push(Check::new(format!("d={d} {e}"), f64::NAN, "fit succeeds", false));
        }
        print_checks(&out.checks);
        checks.extend(out.checks.iter().map(|c| Check {
            name: format!("d={d} {}", c.name),
            ..c.clone()
        }));
        summary.push(out);
    }
    ctx.out
        .write("medium.csv", |w| write_medium_csv(&medium, &source, params.r_max, 2000, w))?;
    ctx.out.json("summary.json", &summary)?;

    #[derive(Serialize)]
    struct Realized {
        d: usize,
        dt: f64,
        steps: usize,
    }
    #[derive(Serialize)]
    struct Params<'a> {
        dims: &'a [usize],
        requested: &'a FigureBParams,
        realized: Vec<Realized>,
        medium: String,
    }
    let p = Params {
        dims: &dims,
        requested: &params,
        realized: summary
            .iter()
            .map(|o| Realized {
                d: o.d,
                dt: o.dt,
                steps: o.steps,
            })
            .collect(),
        medium: medium.to_toml_string(),
    };
    finish(ctx, "figure-b", &p, &checks)
}

#[derive(Serialize)]
struct Tolerances {
    wave: f64,
    helmholtz: f64,
    oscillatory: f64,
    hankel: f64,
    rays: f64,
}

fn validate(mut ctx: Context, a: ValidateArgs) -> Result<std::path::PathBuf, Failure> {
    let v = &ctx.cfg.validate;
    let families = if !a.only.is_empty() {
        a.only
    } else if let Some(names) = &v.only {
        names
            .iter()
            .map(|s| parse_enum::<Family>("validate.only", Some(s)).map(Option::unwrap))
            .collect::<Result<_, _>>()?
    } else {
        Family::value_variants().to_vec()
    };
    let tol = Tolerances {
        wave: v.wave_tolerance.unwrap_or(0.02),
        helmholtz: v.helmholtz_tolerance.unwrap_or(0.02),
        oscillatory: v.oscillatory_bound.unwrap_or(1.1),
        hankel: v.hankel_tolerance.unwrap_or(1e-10),
        rays: v.ray_tolerance.unwrap_or(1e-8),
    };
    for (k, t) in [
        ("wave_tolerance", tol.wave),
        ("helmholtz_tolerance", tol.helmholtz),
        ("oscillatory_bound", tol.oscillatory),
        ("hankel_tolerance", tol.hankel),
        ("ray_tolerance", tol.rays),
    ] {
        if !(t >= 0.0) {
            return Err(Failure::Config(format!("{k} must be non-negative (got {t})")));
        }
    }

    let exec = ctx.exec;
    let mut rows: Vec<(Family, Check)> = Vec::new();
    for fam in &families {
        let stage = format!("validate {}", fam.to_possible_value().unwrap().get_name());
        let err = Failure::solver(stage.clone());
        let checks = match fam {
            Family::Wave => validate_wave(tol.wave, exec),
            Family::Helmholtz => validate_helmholtz(tol.helmholtz, exec),
            Family::Oscillatory => validate_oscillatory(tol.oscillatory),
            Family::Hankel => validate_hankel(tol.hankel),
            Family::Rays => validate_rays(tol.rays, exec),
        }
        .map_err(err)?;
        rows.extend(checks.into_iter().map(|c| (*fam, c)));
    }

    println!("{:<12} {:<6} {:<48} {:>14}  threshold", "family", "status", "check", "value");
    for (fam, c) in &rows {
        let name = fam.to_possible_value().unwrap().get_name().to_string();
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("{name:<12} {status:<6} {:<48} {:>14.6e}  {}", c.name, c.value, c.threshold);
    }
    let checks: Vec<Check> = rows.iter().map(|(_, c)| c.clone()).collect();
    #[derive(Serialize)]
    struct Row<'a> {
        family: Family,
        #[serde(flatten)]
        check: &'a Check,
    }
    let table: Vec<Row> = rows.iter().map(|(f, c)| Row { family: *f, check: c }).collect();
    ctx.out.json("validate.json", &table)?;

    #[derive(Serialize)]
    struct Params<'a> {
        families: &'a [Family],
        tolerances: &'a Tolerances,
    }
    finish(
        ctx,
        "validate",
        &Params {
            families: &families,
            tolerances: &tol,
        },
        &checks,
    )
}

fn validate_wave(tol: f64, exec: Execution) -> lapsim::Result<Vec<Check>> {
    let p = CrossValidationParams::default();
    let mut checks = Vec::new();
    for d in [1, 3] {
        checks.extend(experiments::wave_convergence(d, 0.02, &p, exec)?.checks(tol, (3.5, 4.5)));
    }
    Ok(checks)
}

fn validate_helmholtz(tol: f64, exec: Execution) -> lapsim::Result<Vec<Check>> {
    let p = HelmholtzValidationParams::default();
    let mut checks = Vec::new();
    for d in [1, 3] {
        checks.extend(experiments::helmholtz_convergence(d, 0.06, &p, exec)?.checks(tol, (3.5, 4.5)));
    }
    let (_, sol) = experiments::helmholtz_vs_green(1, 0.06, &p, exec)?;
    checks.push(Check::at_most(
        format!("d=1 |U| flatness on [{}, {}]", p.flat_interval.0, p.flat_interval.1),
        experiments::amplitude_flatness(&sol, p.flat_interval),
        1e-3,
    ));
    Ok(checks)
}

fn validate_oscillatory(bound: f64) -> lapsim::Result<Vec<Check>> {
    Ok(experiments::oscillatory_table(1.0, &[100.0, 400.0, 1600.0])?
        .into_iter()
        .map(|r| Check::at_most(format!("t * remainder at t = {}", r.t), r.scaled_defect, bound))
        .collect())
}

fn validate_hankel(tol: f64) -> lapsim::Result<Vec<Check>> {
    H0_REFERENCE
        .iter()
        .map(|&(x, j, y)| {
            let exact = Complex64::new(j, y);
            let rel = (hankel_h1_0(x)? - exact).norm() / exact.norm();
            Ok(Check::at_most(format!("H0(1)({x}) relative error"), rel, tol))
        })
        .collect()
}

fn validate_rays(tol: f64, exec: Execution) -> lapsim::Result<Vec<Check>> {
    let scan = rays::nontrapping_scan(
        &MediumProfile::benchmark(),
        &ScanConfig {
            n_positions: 6,
            n_directions: 6,
            trace: TraceConfig::new(1e-3, 50.0, f64::INFINITY),
            sampling: Sampling::Grid,
        },
        exec,
    )?;
    let coarse = experiments::smooth_fixture_drift(0.1, 200.0)?;
    let fine = experiments::smooth_fixture_drift(0.05, 200.0)?;
    Ok(vec![
        Check::at_most("max |H| drift", scan.max_h_drift, tol),
        Check::at_most("max angular momentum drift", scan.max_l_drift, tol),
        Check::at_least("RK4 drift reduction under dt halving", coarse / fine, 12.0),
    ])
}

fn raytrace(mut ctx: Context, a: RaytraceArgs) -> Result<std::path::PathBuf, Failure> {
    let r = &ctx.cfg.raytrace;
    let fixture = match a.fixture {
        Some(f) => f,
        None => parse_enum::<Fixture>("raytrace.fixture", r.fixture.as_ref())?.unwrap_or(Fixture::Medium),
    };
    let medium = match fixture {
        Fixture::Medium => ctx.cfg.medium(),
        Fixture::Trapping => rays::trapping_fixture(),
        Fixture::Smooth => rays::smooth_fixture(),
    };
    let dt = positive("dt", pick(a.dt, r.dt, 1e-3))?;
    let t_final = positive("t_final", pick(a.t_final, r.t_final, 40.0))?;
    let r_escape = positive("r_escape", pick(a.r_escape, r.r_escape, medium.r_inhom + 3.0))?;
    if r_escape <= medium.r_inhom {
        return Err(Failure::Config(format!(
            "r_escape {r_escape} must exceed the inhomogeneity radius {}",
            medium.r_inhom
        )));
    }
    let trace_cfg = TraceConfig::new(dt, t_final, r_escape);

    if let Some(s) = a.single {
        let q0 = [s[0], s[1]];
        let mut p0 = [s[2], s[3]];
        if a.normalize {
            p0 = rays::normalize_momentum(&medium, q0, p0);
        }
        let every = pick(a.record_every, r.record_every, 10).max(1);
        let tr = rays::trace(&medium, q0, p0, &trace_cfg.recording(every)).map_err(Failure::solver("raytrace --single"))?;
        ctx.out.write("trajectory.csv", |w| tr.write_csv(w))?;
        let end = tr.last();
        println!("escaped = {}", tr.escaped);
        match tr.t_escape {
            Some(t) => println!("t_escape = {t:e}"),
            None => println!("t_escape = none"),
        }
        println!("final q = ({:e}, {:e})", end.q[0], end.q[1]);
        println!("h_drift = {:e}", tr.h_drift);
        println!("l_drift = {:e}", tr.l_drift);
        #[derive(Serialize)]
        struct Params {
            fixture: Fixture,
            q0: [f64; 2],
            p0: [f64; 2],
            trace: TraceConfig,
            escaped: bool,
            t_escape: Option<f64>,
        }
        let p = Params {
            fixture,
            q0,
            p0,
            trace: trace_cfg.recording(every),
            escaped: tr.escaped,
            t_escape: tr.t_escape,
        };
        return finish(ctx, "raytrace", &p, &[]);
    }

    let n_positions = pick(a.positions, r.positions, 10);
    let n_directions = pick(a.directions, r.directions, 10);
    let sampling = match a.seed.or(r.seed) {
        Some(seed) => Sampling::Seeded(seed),
        None => Sampling::Grid,
    };
    let scan_cfg = ScanConfig {
        n_positions,
        n_directions,
        trace: trace_cfg,
        sampling,
    };
    let report = rays::nontrapping_scan(&medium, &scan_cfg, ctx.exec).map_err(Failure::solver("raytrace scan"))?;
    ctx.out.text("scan.txt", &report.to_string())?;
    ctx.out.write("scan.csv", |w| {
        writeln!(w, "qx,qy,px,py,escaped,t_escape,h_drift,l_drift,final_radius")?;
        for o in &report.rays {
            writeln!(
                w,
                "{:e},{:e},{:e},{:e},{},{:e},{:e},{:e},{:e}",
                o.q0[0],
                o.q0[1],
                o.p0[0],
                o.p0[1],
                u8::from(o.escaped),
                o.t_escape.unwrap_or(f64::NAN),
                o.h_drift,
                o.l_drift,
                o.final_radius
            )?;
        }
        Ok(())
    })?;
    println!("{report}");
    if report.all_escaped {
        println!("all escaped");
    }
    let trapped = report.trapped().count();
    let check = Check::new("rays not escaped", trapped as f64, "= 0", trapped == 0);
    #[derive(Serialize)]
    struct Params<'a> {
        fixture: Fixture,
        scan: &'a ScanConfig,
    }
    let first = report.trapped().next().copied();
    let res = finish(
        ctx,
        "raytrace",
        &Params {
            fixture,
            scan: &scan_cfg,
        },
        &[check],
    );
    match (res, first) {
        (Err(Failure::Threshold(_)), Some(o)) => Err(Failure::Threshold(format!(
            "{trapped} ray(s) did not escape |q| > {r_escape} by t = {t_final}; first: q0 = ({:e}, {:e}), p0 = ({:e}, {:e})",
            o.q0[0], o.q0[1], o.p0[0], o.p0[1]
        ))),
        (res, _) => res,
    }
}

fn decay(mut ctx: Context, a: DecayArgs) -> Result<std::path::PathBuf, Failure> {
    let c = &ctx.cfg.decay;
    let mode = match a.mode {
        Some(m) => m,
        None => parse_enum::<DecayMode>("decay.mode", c.mode.as_ref())?.unwrap_or(DecayMode::Ic),
    };
    let default_dims = match mode {
        DecayMode::Forced => vec![3],
        DecayMode::Ic | DecayMode::Lemma => vec![2, 3],
    };
    let dims = config::dims(&pick(a.dims, c.dims.clone(), default_dims))?;
    let mut checks = Vec::new();

    if mode == DecayMode::Lemma {
        let def = SlowDecayParams::default();
        let params = SlowDecayParams {
            samples: pick(a.samples, c.samples, def.samples).max(2),
            ..def
        };
        if dims.contains(&1) {
            return Err(Failure::Config("the slow-decay sweep is defined for d = 2, 3".into()));
        }
        let mut rows = Vec::new();
        for &d in &dims {
            for r in [0.0, 1.0] {
                let row = experiments::slow_decay_sweep(d, r, &params, ctx.exec)
                    .map_err(Failure::solver(format!("decay lemma d={d}")))?;
                println!(
                    "d = {d}, r = {r}: sup t|v| = {:.6e} (early {:.6e}, late {:.6e}), slope {:.4}",
                    row.sup(),
                    row.sup_early,
                    row.sup_late,
                    row.slope
                );
                let rc = row.checks();
                print_checks(&rc);
                checks.extend(rc);
                rows.push(row);
            }
        }
        ctx.out.write("lemma.csv", |w| {
            writeln!(w, "d,r,t,v,t_v")?;
            for row in &rows {
                for (t, v) in row.times.iter().zip(&row.magnitudes) {
                    writeln!(w, "{},{:e},{:e},{:e},{:e}", row.d, row.r, t, v, t * v)?;
                }
            }
            Ok(())
        })?;
        #[derive(Serialize)]
        struct Summary<'a> {
            d: usize,
            r: f64,
            slope: f64,
            sup_early: f64,
            sup_late: f64,
            checks: &'a [Check],
        }
        let summary: Vec<Summary> = rows
            .iter()
            .zip(checks.chunks(2))
            .map(|(r, c)| Summary {
                d: r.d,
                r: r.r,
                slope: r.slope,
                sup_early: r.sup_early,
                sup_late: r.sup_late,
                checks: c,
            })
            .collect();
        ctx.out.json("summary.json", &summary)?;
        #[derive(Serialize)]
        struct Params<'a> {
            mode: DecayMode,
            dims: &'a [usize],
            sweep: &'a SlowDecayParams,
        }
        return finish(
            ctx,
            "decay",
            &Params {
                mode,
                dims: &dims,
                sweep: &params,
            },
            &checks,
        );
    }

    let mut all = Vec::new();
    for &d in &dims {
        let def = IcDecayParams::new(d);
        let window = match c.window {
            Some(w) => config::window("window", w)?,
            None => def.window,
        };
        let amplitude = pick(a.amplitude, c.amplitude, def.amplitude);
        if !amplitude.is_finite() {
            return Err(Failure::Config(format!("amplitude must be finite (got {amplitude})")));
        }
        all.push(IcDecayParams {
            d,
            r_max: positive("r_max", pick(a.r_max, c.r_max, def.r_max))?,
            dr: positive("dr", pick(a.dr, c.dr, def.dr))?,
            dt: positive("dt", pick(a.dt, c.dt, def.dt))?,
            t_final: positive("t_final", pick(a.t_final, c.t_final, def.t_final))?,
            r0: positive("r0", pick(a.r0, c.r0, def.r0))?,
            amplitude,
            width: positive("width", pick(a.width, c.width, def.width))?,
            window,
            forcing_p: match mode {
                DecayMode::Forced => Some(positive("p", pick(a.p, c.p, 3.0))?),
                _ => None,
            },
            ..def
        });
    }
    let outcomes = par::map(ctx.exec, &all, experiments::ic_decay);
    let mut summary = Vec::new();
    for (p, res) in all.iter().zip(outcomes) {
        let d = p.d;
        let out = res.map_err(Failure::solver(format!("decay d={d}")))?;
        ctx.out.write(&format!("decay_d{d}.csv"), |w| out.series.write_csv(w))?;
        let check = (mode == DecayMode::Ic).then(|| out.check(0.4));
        ctx.out.write(&format!("decay_fit_d{d}.txt"), |w| {
            writeln!(w, "d = {d}")?;
            match (&out.fit, &out.fit_error) {
                (Some(f), _) => writeln!(w, "{f}")?,
                (None, Some(e)) => writeln!(w, "notice = {e}")?,
                (None, None) => {}
            }
            writeln!(w, "reference_slope = {:e}", out.reference_slope)?;
            if let Some(c) = &check {
                writeln!(w, "{c}")?;
            }
            Ok(())
        })?;
        match (&out.fit, &out.fit_error) {
            (Some(f), _) => println!(
                "d = {d}: log-log slope {:.4} (R^2 {:.4}, reference {})",
                f.rate, f.residual, out.reference_slope
            ),
            (None, Some(e)) => println!("d = {d}: notice: {e}"),
            (None, None) => {}
        }
        let zero = out.series.e.iter().all(|&e| e == 0.0);
        if let Some(c) = check {
            if !zero {
                println!("  {c}");
                checks.push(c);
            }
        }
        summary.push(out);
    }
    ctx.out.json("summary.json", &summary)?;
    #[derive(Serialize)]
    struct Params<'a> {
        mode: DecayMode,
        runs: &'a [IcDecayParams],
    }
    finish(ctx, "decay", &Params { mode, runs: &all }, &checks)
}

fn helmholtz(mut ctx: Context, a: HelmholtzArgs) -> Result<std::path::PathBuf, Failure> {
    let h = &ctx.cfg.helmholtz;
    let d = config::dims(&[pick(a.d, h.d, 3)])?[0];
    let r_max = positive("r_max", pick(a.r_max, h.r_max, 120.0))?;
    let dr = positive("dr", pick(a.dr, h.dr, 6e-2))?;
    let (medium, source) = checked_medium(&ctx, r_max)?;
    let omega = positive("omega", pick(a.omega, h.omega, source.omega))?;
    let grid = RadialGrid::with_spacing(r_max, dr, d).map_err(Failure::solver("helmholtz grid"))?;
    let sol = assemble(grid, &medium, &source, omega)
        .and_then(|sys| solve(&sys))
        .map_err(Failure::solver("helmholtz solve"))?;
    let defect = sommerfeld_defect(&sol, &medium);
    ctx.out.write(&format!("U_d{d}.csv"), |w| sol.u.write_csv(w))?;
    ctx.out
        .write(&format!("sommerfeld_d{d}.csv"), |w| write_defect_csv(&defect, w))?;
    println!("d = {d}, omega = {omega:e}, nodes = {}", grid.len());
    println!("residual = {:e}", sol.residual_norm);
    let u_infty = if d == 1 && omega == source.omega {
        let u = u_infty_1d(&medium, &source).map_err(Failure::solver("helmholtz U_inf"))?;
        println!("U_inf = {:e} {:+e}i", u.re, u.im);
        Some([u.re, u.im])
    } else {
        None
    };
    if let Some(&(r, v)) = defect.last() {
        println!("sommerfeld defect at r = {r}: {v:e}");
    }
    #[derive(Serialize)]
    struct Params {
        d: usize,
        r_max: f64,
        dr: f64,
        omega: f64,
        nodes: usize,
        residual: f64,
        u_infty: Option<[f64; 2]>,
        medium: String,
    }
    let p = Params {
        d,
        r_max,
        dr: grid.dr(),
        omega,
        nodes: grid.len(),
        residual: sol.residual_norm,
        u_infty,
        medium: medium.to_toml_string(),
    };
    finish(ctx, "helmholtz", &p, &[])
}

fn wave(mut ctx: Context, a: WaveArgs) -> Result<std::path::PathBuf, Failure> {
    let w = &ctx.cfg.wave;
    let d = config::dims(&[pick(a.d, w.d, 3)])?[0];
    let r_max = positive("r_max", pick(a.r_max, w.r_max, 120.0))?;
    let dr = positive("dr", pick(a.dr, w.dr, 6e-2))?;
    let dt = positive("dt", pick(a.dt, w.dt, 1.33e-2))?;
    let t_final = positive("t_final", pick(a.t_final, w.t_final, 10.0))?;
    let forcing = match a.forcing {
        Some(f) => f,
        None => parse_enum::<ForcingKind>("wave.forcing", w.forcing.as_ref())?.unwrap_or(ForcingKind::Harmonic),
    };
    let snapshots = pick(a.snapshots, w.snapshots.clone(), vec![t_final]);
    if let Some(t) = snapshots.iter().find(|t| !(0.0..=t_final).contains(*t)) {
        return Err(Failure::Config(format!("snapshot time {t} outside [0, {t_final}]")));
    }
    let (medium, source) = checked_medium(&ctx, r_max)?;
    let grid = RadialGrid::with_spacing(r_max, dr, d).map_err(Failure::solver("wave grid"))?;
    let mut cfg = WaveConfig::new(grid, medium, dt, t_final).with_snapshots(snapshots.clone());
    cfg = match forcing {
        ForcingKind::Harmonic => cfg.with_forcing(Forcing::TimeHarmonic(source)),
        ForcingKind::None => {
            let g = grid.sample(|r| Complex64::new((-(r * r)).exp(), 0.0));
            cfg.with_initial_data(g, grid.zeros())
        }
    };
    let cfl = lapsim::wave::cfl_check(&grid, &cfg.medium, cfg.realized_dt());
    println!(
        "CFL ratio {:.4} (limit {:.4}), stable = {}",
        cfl.ratio, cfl.ratio_max, cfl.stable
    );
    let out = run(&cfg).map_err(Failure::solver("wave run"))?;
    ctx.out
        .write(&format!("snapshots_d{d}.csv"), |wr| write_snapshots(&out.snapshots, wr))?;
    println!("dt = {:e}, steps = {}, max |u| = {:e}", out.dt, out.steps, out.max_abs);
    #[derive(Serialize)]
    struct Params<'a> {
        d: usize,
        r_max: f64,
        dr: f64,
        requested_dt: f64,
        realized_dt: f64,
        steps: usize,
        t_final: f64,
        forcing: ForcingKind,
        snapshots: &'a [f64],
        cfl: lapsim::wave::CflReport,
        max_abs: f64,
    }
    let p = Params {
        d,
        r_max,
        dr: grid.dr(),
        requested_dt: dt,
        realized_dt: out.dt,
        steps: out.steps,
        t_final,
        forcing,
        snapshots: &snapshots,
        cfl: out.cfl,
        max_abs: out.max_abs,
    };
    finish(ctx, "wave", &p, &[])
}
