use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lapsim(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lapsim"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("LAPSIM_OUT")
        .output()
        .unwrap()
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

const SHORT_FIGURE_B: &str = "[figure_b]\nr_max = 30.0\nt_final = 24.0\nfast_window = [2.0, 20.0]\nslow_window = [4.0, 24.0]\n";

#[test]
fn figure_b_single_dimension_writes_only_its_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SHORT_FIGURE_B).unwrap();
    let out = dir.path().join("out");
    let o = lapsim(&out, &["--config", cfg.to_str().unwrap(), "figure-b", "--dims", "1"]);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 1, "{}", text(&o));
    let csv = fs::read_to_string(out.join("E_d1.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,E,E_u,E_ut"));
    assert!(csv.ends_with('\n'));
    assert!(!out.join("E_d2.csv").exists() && !out.join("E_d3.csv").exists());
    assert_eq!(
        fs::read_to_string(out.join("medium.csv")).unwrap().lines().next(),
        Some("r,alpha,beta,F")
    );
    let manifest = fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("\"realized\"") && manifest.contains("\"steps\""));
    assert!(out.join("fit_d1.txt").exists() && out.join("summary.json").exists());
}

#[test]
fn unwritable_output_directory_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = lapsim(&blocker.join("sub"), &["figure-b", "--dims", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("cannot create output directory"));
}

#[test]
fn output_root_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_lapsim"))
        .args(["helmholtz", "--d", "3", "--r-max", "20"])
        .env("LAPSIM_OUT", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", text(&o));
    assert!(dir.path().join("U_d3.csv").exists());
}

#[test]
fn trapping_fixture_exits_one_with_initial_condition() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(
        dir.path(),
        &["raytrace", "--fixture", "trapping", "--positions", "4", "--directions", "4"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("q0 = ("));
    assert!(fs::read_to_string(dir.path().join("scan.txt"))
        .unwrap()
        .contains("not_escaped"));
}

#[test]
fn smooth_fixture_rays_all_escape() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(
        dir.path(),
        &[
            "raytrace",
            "--fixture",
            "smooth",
            "--positions",
            "3",
            "--directions",
            "4",
            "--t-final",
            "200",
        ],
    );
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("all escaped"));
}

#[test]
fn single_ray_writes_one_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(dir.path(), &["raytrace", "--single", "1", "0", "0", "-1", "--normalize"]);
    assert!(o.status.success(), "{}", text(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,qx,qy,px,py,H"));
    assert!(csv.lines().count() > 10);
    let off = lapsim(dir.path(), &["raytrace", "--single", "1", "0", "0", "5"]);
    assert_eq!(off.status.code(), Some(2));
}

#[test]
fn validate_runs_one_family() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(dir.path(), &["validate", "--only", "helmholtz"]);
    assert!(o.status.success(), "{}", text(&o));
    let json = fs::read_to_string(dir.path().join("validate.json")).unwrap();
    assert!(json.contains("\"helmholtz\"") && !json.contains("\"hankel\""));
}

#[test]
fn zero_tolerance_is_reported_as_failing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("v.toml");
    fs::write(&cfg, "[validate]\nhankel_tolerance = 0.0\n").unwrap();
    let o = lapsim(
        dir.path(),
        &["--config", cfg.to_str().unwrap(), "validate", "--only", "hankel"],
    );
    assert_eq!(o.status.code(), Some(1));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().any(|l| l.contains("FAIL") && l.contains("e-")), "{out}");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[wave]\nbogus = 1\n").unwrap();
    let o = lapsim(dir.path(), &["--config", cfg.to_str().unwrap(), "wave"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unstable_step_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(dir.path(), &["wave", "--d", "3", "--r-max", "20", "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("CFL"));
}

#[test]
fn wave_snapshots_and_realized_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(
        dir.path(),
        &["wave", "--d", "2", "--r-max", "20", "--t-final", "2", "--snapshots", "1,2"],
    );
    assert!(o.status.success(), "{}", text(&o));
    let snaps = fs::read_to_string(dir.path().join("snapshots_d2.csv")).unwrap();
    assert_eq!(snaps.lines().filter(|l| l.starts_with("# t=")).count(), 2);
    assert!(fs::read_to_string(dir.path().join("manifest.json"))
        .unwrap()
        .contains("\"realized_dt\""));
}

#[test]
fn zero_initial_data_skip_the_fit_with_notice() {
    let dir = tempfile::tempdir().unwrap();
    let o = lapsim(
        dir.path(),
        &[
            "decay",
            "--mode",
            "ic",
            "--dims",
            "3",
            "--amplitude",
            "0",
            "--r-max",
            "20",
            "--t-final",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("fit skipped"));
    let csv = fs::read_to_string(dir.path().join("decay_d3.csv")).unwrap();
    assert!(csv
        .lines()
        .skip(1)
        .all(|l| l.split(',').skip(1).all(|v| v.parse::<f64>().unwrap() == 0.0)));
}

#[test]
fn identical_configuration_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, SHORT_FIGURE_B).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let c = cfg.to_str().unwrap();
    lapsim(&a, &["--config", c, "figure-b", "--dims", "2,3"]);
    lapsim(&b, &["--config", c, "--sequential", "figure-b", "--dims", "2,3"]);
    for f in ["E_d2.csv", "E_d3.csv", "medium.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    lapsim(
        &a,
        &[
            "raytrace",
            "--seed",
            "7",
            "--positions",
            "3",
            "--directions",
            "3",
            "--t-final",
            "5",
        ],
    );
    lapsim(
        &b,
        &[
            "raytrace",
            "--seed",
            "7",
            "--positions",
            "3",
            "--directions",
            "3",
            "--t-final",
            "5",
        ],
    );
    assert_eq!(fs::read(a.join("scan.csv")).unwrap(), fs::read(b.join("scan.csv")).unwrap());
}
