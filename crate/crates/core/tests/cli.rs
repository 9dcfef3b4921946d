use std::path::Path;
use std::process::Command;

use dpbandits::cli::run_with_output;
use dpbandits::io::read_traces;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("dpbandits").chain(args.iter().copied());
    let code = run_with_output(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn manifest(path: &Path) -> serde_json::Map<String, serde_json::Value> {
    let text = std::fs::read_to_string(path).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn list_settings_prints_all_three() {
    let (code, out, _) = run(&["list-settings"]);
    assert_eq!(code, 0);
    assert!(
        out.contains("setting 1: 0.75, 0.70, 0.70, 0.70, 0.70"),
        "{out}"
    );
    assert!(
        out.contains("setting 2: 0.75, 0.625, 0.50, 0.375, 0.25"),
        "{out}"
    );
    assert!(
        out.contains("setting 3: 0.75, 0.15, 0.15, 0.15, 0.15"),
        "{out}"
    );
    assert!(out.contains("4194304"));
}

#[test]
fn dpse_without_horizon_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "run",
        "--setting",
        "1",
        "--algos",
        "alucb,dpse",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("horizon"), "{err}");
    assert!(!dir.path().join("traces.csv").exists());
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["run", "--setting", "4"],
        vec!["run", "--means", "0.5,1.5", "--horizon", "10"],
        vec!["run", "--means", "0.5", "--horizon", "10"],
        vec!["run", "--algos", "thompson", "--horizon", "10"],
        vec!["run", "--eps", "0", "--horizon", "10", "--algos", "alucb"],
        vec!["run", "--setting", "1", "--means", "0.1,0.2"],
        vec!["run", "--bogus"],
        vec!["reproduce", "--figure", "13"],
        vec!["reproduce", "--figure", "fig1"],
        vec!["reproduce", "--figure", "1", "--scale", "0.5"],
        vec!["frobnicate"],
    ] {
        let dir = tempfile::tempdir().unwrap();
        let mut full = args.clone();
        if args[0] != "frobnicate" && !args.contains(&"--bogus") {
            full.extend(["--out", dir.path().to_str().unwrap()]);
        }
        let (code, _, err) = run(&full);
        assert_eq!(code, 1, "{args:?}: {err}");
        assert!(!err.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("reproduce"));
}

#[test]
fn run_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("nested/out");
    let (code, out, err) = run(&[
        "run",
        "--setting",
        "2",
        "--algos",
        "alucb,ftnl",
        "--eps",
        "1,8",
        "--horizon",
        "256",
        "--reps",
        "2",
        "--seed",
        "5",
        "--workers",
        "2",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.lines().count(), 4);
    for f in [
        "traces.csv",
        "summary.csv",
        "manifest.json",
        "regret_eps_1.svg",
        "regret_eps_8.svg",
        "final_regret.svg",
    ] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let rows = read_traces(out_dir.join("traces.csv")).unwrap();
    // 2 algorithms x 2 epsilons x 2 runs x checkpoints 1, 2, 4, ..., 256
    assert_eq!(rows.len(), 2 * 2 * 2 * 9);
    let m = manifest(&out_dir.join("manifest.json"));
    assert_eq!(m["means"], "0.75,0.625,0.5,0.375,0.25");
    assert_eq!(m["horizon"], 256);
    assert_eq!(m["horizon_known"], true);
    assert_eq!(m["seed"], 5);
    assert_eq!(m["algorithms"], "alucb,ftnl");
    assert!(m.values().all(|v| !v.is_object() && !v.is_array()));
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let (code, _, err) = run(&[
            "run",
            "--means",
            "0.9,0.5,0.4",
            "--algos",
            "hybrid,dpse,ucb1",
            "--eps",
            "0.5",
            "--horizon",
            "500",
            "--reps",
            "3",
            "--seed",
            "77",
            "--workers",
            workers,
            "--checkpoints",
            "100,250,500",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "{err}");
    }
    for f in [
        "traces.csv",
        "summary.csv",
        "regret_eps_0p5.svg",
        "final_regret.svg",
    ] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn anytime_run_uses_default_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "run",
        "--setting",
        "3",
        "--algos",
        "alucb",
        "--eps",
        "64",
        "--reps",
        "1",
        "--checkpoints",
        "1024",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let m = manifest(&dir.path().join("manifest.json"));
    assert_eq!(m["horizon"], 4_194_304);
    assert_eq!(m["horizon_known"], false);
}

#[test]
fn reproduce_scaled_figure() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = run(&[
        "reproduce",
        "--figure",
        "1",
        "--scale",
        "256",
        "--reps",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("fig1.svg"));
    assert!(dir.path().join("fig1.svg").exists());
    let m = manifest(&dir.path().join("manifest_setting1.json"));
    assert_eq!(m["horizon"], 16_384);
    assert_eq!(m["epsilons"], "0.5");
    assert_eq!(m["algorithms"], "alucb,hybrid,dpse");
    assert_eq!(m["means"], "0.75,0.7,0.7,0.7,0.7");
    let rows = read_traces(dir.path().join("traces_setting1.csv")).unwrap();
    assert_eq!(rows.iter().filter(|r| r.t == 16_384).count(), 3 * 2);
    assert!(!dir.path().join("traces_setting2.csv").exists());
}

#[test]
fn binary_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_dpbandits");
    let status = Command::new(exe)
        .args(["run", "--algos", "dpse"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&status.stderr).contains("horizon"));
    let ok = Command::new(exe).arg("list-settings").output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn runtime_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let (code, _, err) = run(&[
        "run",
        "--algos",
        "ucb1",
        "--eps",
        "1",
        "--horizon",
        "16",
        "--reps",
        "1",
        "--out",
        blocker.join("sub").to_str().unwrap(),
    ]);
    assert_eq!(code, 2, "{err}");
}
