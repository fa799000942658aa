use std::path::Path;
use std::process::{Command, Output};

fn torus_mhd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_torus-mhd")).args(args).output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn resonant_vector_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = torus_mhd(&["check-diophantine", "--out", &out_arg(dir.path()), "--override", "physics.w=1 2 3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("not Diophantine in band"));
    assert!(dir.path().join("margins.csv").exists());
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(torus_mhd(&["linear-spectrum", "--out", &out, "--override", "grid.n=x"]).status.code(), Some(2));
    assert_eq!(torus_mhd(&["simulate", "--out", &out, "--scenario", "nope"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "grid.n = 16\ngrid.n = 8\n").unwrap();
    let o = torus_mhd(&["identity-check", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn missing_files_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.cfg");
    let o = torus_mhd(&["linear-spectrum", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.cfg"));
}

#[test]
fn run_failures_exit_three_and_still_write_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = torus_mhd(&[
        "simulate",
        "--out",
        &out_arg(dir.path()),
        "--override",
        "grid.n=8",
        "--override",
        "time.dt=0.5",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let report = std::fs::read_to_string(dir.path().join("report.txt")).unwrap();
    assert!(report.contains("status: run-failed"));
    assert!(report.contains("last_valid_time: 0"));
    assert!(dir.path().join("timeseries.csv").exists());
}

#[test]
fn identical_seeds_give_identical_files_and_fit_reads_them_back() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = torus_mhd(&[
            "simulate",
            "--out",
            &out_arg(dir.path()),
            "--seed",
            "11",
            "--override",
            "grid.n=8",
            "--override",
            "time.t_end=0.3",
            "--override",
            "output.cadence=2",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    }
    for name in ["timeseries.csv", "energy.csv", "decay_fit.txt", "final.mhdt"] {
        let same = std::fs::read(a.path().join(name)).unwrap() == std::fs::read(b.path().join(name)).unwrap();
        assert!(same, "{name} differs");
    }
    // the reports differ only in the echoed output directory
    let report = |dir: &Path| {
        let text = std::fs::read_to_string(dir.join("report.txt")).unwrap();
        text.lines().filter(|l| !l.starts_with("output.dir")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(report(a.path()), report(b.path()));
    assert!(report(a.path()).contains("init.seed = 11"));

    let fit_dir = tempfile::tempdir().unwrap();
    let input = a.path().join("timeseries.csv");
    let o = torus_mhd(&["decay-fit", "--input", input.to_str().unwrap(), "--out", &out_arg(fit_dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let fit = std::fs::read_to_string(fit_dir.path().join("decay_fit.txt")).unwrap();
    assert!(fit.contains("\np: "));
    let bad = torus_mhd(&["decay-fit", "--input", input.to_str().unwrap(), "--column", "nothing"]);
    assert_eq!(bad.status.code(), Some(2));
}
