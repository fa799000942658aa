use torus_mhd::io::{decode_checkpoint, RunConfig, Table};
use torus_mhd::scenario::{check_diophantine, run_scenario, write_outcome, Outcome, Scenario, Status};
use torus_mhd::solver::{InitialData, TimeStep};

fn small(t_end: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.solver.n = 16;
    cfg.solver.t_end = t_end;
    cfg.solver.cadence = 4;
    cfg
}

fn file<'a>(out: &'a Outcome, name: &str) -> &'a [u8] {
    &out.files.iter().find(|(n, _)| n == name).unwrap_or_else(|| panic!("no {name}")).1
}

fn table(out: &Outcome, name: &str) -> Table {
    Table::parse(std::str::from_utf8(file(out, name)).unwrap()).unwrap()
}

#[test]
fn scenario_names_parse() {
    for s in Scenario::ALL {
        assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
    }
    assert!("decay".parse::<Scenario>().is_err());
}

#[test]
fn identity_check_on_zero_data_gives_zeros() {
    let mut cfg = small(0.1);
    cfg.solver.init = InitialData::Zero;
    let out = run_scenario(Scenario::IdentityCheck, &cfg).unwrap();
    assert_eq!(out.status, Status::Success);
    let id = table(&out, "identity.csv");
    assert!(id.rows.len() > 10);
    assert!(id.rows.iter().all(|r| r[1..].iter().all(|v| *v == 0.0)));
}

#[test]
fn resonant_w_is_a_finding_not_an_error() {
    let mut cfg = RunConfig::default();
    cfg.solver.w = [1.0, 2.0, 3.0];
    let out = run_scenario(Scenario::InequalityCert, &cfg).unwrap();
    assert_eq!(out.status, Status::Success);
    assert!(out.summary.contains("diophantine: not Diophantine in band"));
    assert!(out.summary.contains("dot_argmin: [1, 1, -1]"));
    assert!(out.summary.contains("constants: unavailable"));
    let margins = table(&out, "margins.csv");
    assert_eq!(margins.header, ["k1", "k2", "k3", "norm", "dot_margin", "cross_margin"]);
}

#[test]
fn irrational_w_is_certified() {
    let mut cfg = RunConfig::default();
    cfg.dio_band = 6;
    cfg.dio_samples = 20;
    let out = run_scenario(Scenario::InequalityCert, &cfg).unwrap();
    assert_eq!(out.status, Status::Success);
    assert!(out.summary.contains("diophantine: in band"));
    for k in ["K1", "K2", "K3"] {
        assert!(out.summary.contains(&format!("{k}_violations: 0")), "{}", out.summary);
    }
    let margins_only = check_diophantine(&cfg).unwrap();
    assert!(!margins_only.summary.contains("K1:"));
}

#[test]
fn linear_sweep_writes_the_spectrum() {
    let mut cfg = RunConfig::default();
    cfg.linear_band = 3;
    let out = run_scenario(Scenario::LinearSweep, &cfg).unwrap();
    let spectrum = table(&out, "spectrum.csv");
    assert_eq!(spectrum.header, ["k1", "k2", "k3", "re_max", "im_at_max", "neutral_count"]);
    assert!(!spectrum.rows.is_empty());
    assert!(spectrum.rows.iter().all(|r| r[3] < 0.0 && r[5] == 0.0));
}

#[test]
fn decay_run_produces_a_reproducible_artifact_set() {
    let cfg = small(0.5);
    let out = run_scenario(Scenario::DecayRun, &cfg).unwrap();
    assert_eq!(out.status, Status::Success, "{}", out.summary);
    let mut names: Vec<&str> = out.files.iter().map(|(n, _)| n.as_str()).collect();
    names.sort_unstable();
    assert_eq!(
        names,
        ["decay_fit.txt", "energy.csv", "final.mhdt", "report.txt", "timeseries.csv"]
    );

    let ts = table(&out, "timeseries.csv");
    let e = ts.column("E_phys").unwrap();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(ts.column("t").unwrap().last(), Some(&0.5));
    let fit = std::str::from_utf8(file(&out, "decay_fit.txt")).unwrap();
    let p: f64 = fit.lines().find_map(|l| l.strip_prefix("p: ")).unwrap().parse().unwrap();
    assert!(p > 0.0);
    assert!(out.summary.contains("init.seed = 0"));
    assert!(out.summary.contains("monitor_violations: 0"), "{}", out.summary);
    assert_eq!(decode_checkpoint(file(&out, "final.mhdt")).unwrap().time, 0.5);

    let again = run_scenario(Scenario::DecayRun, &cfg).unwrap();
    assert_eq!(again, out);

    let dir = tempfile::tempdir().unwrap();
    write_outcome(&out, dir.path()).unwrap();
    assert_eq!(std::fs::read(dir.path().join("timeseries.csv")).unwrap(), file(&out, "timeseries.csv"));
}

#[test]
fn failed_run_reports_reason_and_last_valid_time() {
    let mut cfg = small(1.0);
    cfg.solver.dt = TimeStep::Fixed(0.5);
    let out = run_scenario(Scenario::DecayRun, &cfg).unwrap();
    match &out.status {
        Status::RunFailed { reason, last_valid_time } => {
            assert!(reason.starts_with("cfl"), "{reason}");
            assert_eq!(*last_valid_time, 0.0);
        }
        other => panic!("{other:?}"),
    }
    assert!(out.summary.contains("status: run-failed"));
    assert!(out.summary.contains("last_valid_time: 0"));
    assert_eq!(table(&out, "timeseries.csv").rows.len(), 1);
}

#[test]
fn euler_compare_pairs_the_runs() {
    let mut cfg = small(0.2);
    cfg.solver.n = 8;
    let out = run_scenario(Scenario::EulerCompare, &cfg).unwrap();
    assert_eq!(out.status, Status::Success);
    let cmp = table(&out, "comparison.csv");
    assert_eq!(cmp.column("w_zero").unwrap(), [0.0, 1.0]);
    let magnetic = cmp.column("magnetic_change").unwrap();
    assert!(magnetic[0] < 0.0 && magnetic[1] < 0.0);
    assert!(out.summary.contains("w0.E_phys"));
}

#[test]
fn invalid_configs_are_errors() {
    let mut cfg = small(0.1);
    cfg.solver.n = 0;
    assert!(run_scenario(Scenario::DecayRun, &cfg).is_err());
    let mut cfg = RunConfig::default();
    cfg.dio_band = 0;
    assert!(run_scenario(Scenario::InequalityCert, &cfg).is_err());
}
