//! End-to-end CLI tests against the built binary.

use std::fs;
use std::process::{Command, Output};

fn gelfand(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gelfand"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn params_khessian_reports_derived_values() {
    let out = gelfand(&["params", "--khessian", "3", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theta = 2"), "{text}");
    assert!(text.contains("lambda_star (identity nonlinearity) = 2"), "{text}");
    assert!(text.contains("regime = Oscillatory"), "{text}");
}

#[test]
fn params_rejects_bad_dimension_with_exit_two() {
    let out = gelfand(&["params", "--khessian", "1", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("d > 2k"));
}

#[test]
fn params_plaplacian_example() {
    let out = gelfand(&["params", "--plaplacian", "5", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("theta = 3"), "{text}");
    assert!(text.contains("= 18"), "{text}");
}

#[test]
fn solve_writes_csv_with_header() {
    let dir = std::env::temp_dir().join("gelfand-cli-solve");
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join("traj.csv");
    let out = gelfand(&[
        "solve", "--khessian", "3", "1", "--f", "identity", "--rho", "1.0",
        "--r-max", "2.0", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("r,u,uprime\n"));
    assert!(csv.lines().count() > 10);
    assert!(stderr(&out).contains("lambda"));
}

#[test]
fn bifurcate_summary_and_determinism() {
    let dir = std::env::temp_dir().join("gelfand-cli-bif");
    fs::create_dir_all(&dir).unwrap();
    let (p1, p2) = (dir.join("a.csv"), dir.join("b.csv"));
    let args = [
        "bifurcate", "--khessian", "3", "1", "--f", "identity",
        "--rho", "0.5:10:32", "--log", "--tol", "1e-9",
    ];
    let out1 = gelfand(&[&args[..], &["--out", p1.to_str().unwrap()]].concat());
    let out2 = gelfand(&[&args[..], &["--out", p2.to_str().unwrap()]].concat());
    assert!(out1.status.success(), "{}", stderr(&out1));
    assert!(stderr(&out1).contains("lambda_star = 2.000000"));
    // Identical config ⇒ byte-identical output.
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
    let csv = fs::read_to_string(&p1).unwrap();
    assert!(csv.starts_with("rho,lambda\n"));
    assert_eq!(csv.lines().count(), 33);
}

#[test]
fn intersect_node_regime_counts_zero() {
    let out = gelfand(&[
        "intersect", "--khessian", "11", "1", "--f", "identity", "--rho", "10",
        "--r-lo", "1e-6", "--out", "/dev/null",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("count=0"), "{}", stderr(&out));
}

#[test]
fn config_file_equivalent_to_flags_and_overridable() {
    let dir = std::env::temp_dir().join("gelfand-cli-cfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    fs::write(
        &cfg,
        r#"{
            "operator": {"alpha": 2.0, "beta": 0.0, "gamma": 2.0},
            "nonlinearity": {"family": "identity"},
            "rho": 1.0,
            "r_max": 2.0,
            "tol": 1e-9
        }"#,
    )
    .unwrap();
    let a = dir.join("from-config.csv");
    let out = gelfand(&["solve", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let b = dir.join("from-flags.csv");
    let out = gelfand(&[
        "solve", "--khessian", "3", "1", "--f", "identity", "--rho", "1.0",
        "--r-max", "2.0", "--tol", "1e-9", "--out", b.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    // A flag overrides the config value.
    let c = dir.join("override.csv");
    let out = gelfand(&[
        "solve", "--config", cfg.to_str().unwrap(), "--rho", "2.0",
        "--out", c.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
}

#[test]
fn bad_config_is_exit_two() {
    let dir = std::env::temp_dir().join("gelfand-cli-badcfg");
    fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.json");
    fs::write(&cfg, r#"{"operator": {"alpha": 1.0, "beta": 0.0, "gamma": 2.0}}"#).unwrap();
    let out = gelfand(&["solve", "--config", cfg.to_str().unwrap(), "--rho", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_passes_on_default_matrix() {
    let out = gelfand(&["check"]);
    assert!(out.status.success(), "{}\n{}", stdout(&out), stderr(&out));
    assert!(stdout(&out).contains("all checks passed"));
}

#[test]
fn phase_orbit_csv() {
    let out = gelfand(&[
        "phase", "--khessian", "3", "1", "--x0", "1e-6", "--y0", "0",
        "--t0", "0", "--t1", "-10",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("t,x,y\n"));
    assert!(stderr(&out).contains("UnstableFocus"));
}
