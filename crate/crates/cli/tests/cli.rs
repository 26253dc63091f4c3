//! The binary end to end: exit codes, artifacts, manifest replay.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn elastolbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elastolbm")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn report_value(dir: &Path, field: &str, norm: &str) -> f64 {
    let text = fs::read_to_string(dir.join("error_report.csv")).unwrap();
    let line = text.lines().find(|l| l.starts_with(&format!("{field},{norm},"))).unwrap();
    line.rsplit(',').next().unwrap().parse().unwrap()
}

const SMALL: [&str; 8] = ["--set", "dx=1/20", "--set", "dt=1/50", "--set", "t_final=0.2", "--set", "mode=dirichlet"];

#[test]
fn presets_are_listed() {
    let out = elastolbm(&["presets"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["wave52", "norm-conservation", "stable-long", "unstable", "converge-dirichlet"] {
        assert!(text.contains(name), "{name}");
    }
}

#[test]
fn invalid_configuration_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(code(&elastolbm(&["run", "--set", "bogus=1", "--out", out])), 2);
    assert_eq!(code(&elastolbm(&["run", "--set", "omega=3", "--out", out])), 2);
    assert_eq!(code(&elastolbm(&["run", "--preset", "nope", "--out", out])), 2);
    assert_eq!(code(&elastolbm(&["run", "--preset", "converge-periodic", "--out", out])), 2);
    assert_eq!(code(&elastolbm(&["run", "--config", "/nonexistent/file", "--out", out])), 2);
}

#[test]
fn unwritable_output_exits_with_five() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("plain");
    fs::write(&file, "x").unwrap();
    let under_file = file.join("run");
    assert_eq!(code(&elastolbm(&["run", "--out", under_file.to_str().unwrap()])), 5);
}

#[test]
fn cfl_violation_exits_with_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    assert_eq!(code(&elastolbm(&["run", "--set", "cK2=1.2", "--out", out])), 3);
    assert_eq!(code(&elastolbm(&["check", "--set", "cK2=1.2"])), 3);
    assert_eq!(code(&elastolbm(&["check"])), 0);
}

#[test]
fn divergence_exits_with_four_and_reports_unstable() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let res = elastolbm(&["stability", "--preset", "unstable", "--out", out]);
    assert_eq!(code(&res), 4);
    let summary = fs::read_to_string(tmp.path().join("summary.txt")).unwrap();
    assert!(summary.contains("status = unstable"));
    let step: u64 = summary
        .lines()
        .find_map(|l| l.strip_prefix("diverged_at = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(step < 1000, "diverged at {step}");
    assert!(tmp.path().join("norm_trace.csv").exists());
}

#[test]
fn manifest_replays_to_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut args = vec!["run", "--out", a.to_str().unwrap(), "--set", "snapshot_stride=5"];
    args.extend(SMALL);
    assert_eq!(code(&elastolbm(&args)), 0);
    let manifest = a.join("manifest.txt");
    let text = fs::read_to_string(&manifest).unwrap();
    assert!(text.starts_with("# elastolbm "));
    assert!(text.contains("mode = dirichlet"));
    let replay = elastolbm(&["run", "--config", manifest.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(code(&replay), 0);
    let mut compared = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.txt" {
            continue;
        }
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
        compared += 1;
    }
    // norm trace, error trace, error report, summary and snapshots
    assert!(compared >= 6, "{compared} files");
}

#[test]
fn study_writes_order_table_and_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let res = elastolbm(&[
        "converge",
        "--out",
        out,
        "--set",
        "grids=1/10:1/25, 1/20:1/50",
        "--set",
        "materials=1.1:0.4",
        "--set",
        "t_final=0.2",
    ]);
    assert!(matches!(code(&res), 0 | 1));
    let table = fs::read_to_string(tmp.path().join("order_table.csv")).unwrap();
    assert!(table.starts_with("case,mode,cK2,cmu2,dx,dt,field,norm,error,observed_order"));
    let verdicts = fs::read_to_string(tmp.path().join("verdicts.csv")).unwrap();
    assert!(verdicts.lines().count() > 1);
    assert!(tmp.path().join("manifest.txt").exists());
}

/// Default wave run at the middle resolution of the periodic study.
#[test]
fn default_wave_run_error_is_in_the_expected_range() {
    let tmp = tempfile::tempdir().unwrap();
    let res = elastolbm(&["run", "--preset", "wave52", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let e = report_value(tmp.path(), "u", "L2rel");
    assert!(e.is_finite() && (1e-4..=1e-1).contains(&e), "L2rel(u) = {e:e}");
    let s = report_value(tmp.path(), "sigma", "L2rel");
    assert!(s.is_finite() && s < 1e-1, "L2rel(sigma) = {s:e}");
}
