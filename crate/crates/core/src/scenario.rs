//! Preset experiments producing deterministic artifact sets.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{
    decay_fit, dissipation, dissipation_monitor, energy_identity, energy_report, physical_energy, shrink_delta,
    DecayFit, DifferenceOrder, DissipationMonitor, EnergyIdentity, EnergyReport, ReportSettings,
};
use crate::diophantine::{certify, empirical_constants, margin_report, margin_rows, tilde_inequality_check, BandConstants, DioVector};
use crate::error::{Error, Result};
use crate::io::{encode_checkpoint, fmt_float, time_series_csv, RunConfig, Table};
use crate::linear::band_spectrum_scan;
use crate::pressure::PressureLaw;
use crate::solver::{initial_state, run, RunSummary, SolverConfig};
use crate::state::PerturbationState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    DecayRun,
    EulerCompare,
    InequalityCert,
    LinearSweep,
    IdentityCheck,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::DecayRun,
        Scenario::EulerCompare,
        Scenario::InequalityCert,
        Scenario::LinearSweep,
        Scenario::IdentityCheck,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::DecayRun => "decay-run",
            Scenario::EulerCompare => "euler-compare",
            Scenario::InequalityCert => "inequality-cert",
            Scenario::LinearSweep => "linear-sweep",
            Scenario::IdentityCheck => "identity-check",
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario {s:?}")))
    }
}

/// Energy bookkeeping of one state, cheap enough for every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    pub e_phys: f64,
    /// `nu ||grad h||^2`.
    pub dissipation: f64,
    /// `||h||^2 / 2`.
    pub magnetic: f64,
    /// `E_phys - ||h||^2 / 2`, the kinetic and compressive part.
    pub fluid: f64,
}

pub fn energy_sample(state: &PerturbationState, pressure: &PressureLaw, nu: f64) -> Result<EnergySample> {
    let e_phys = physical_energy(state, pressure)?;
    let magnetic = 0.5 * state.h.l2_norm_sq();
    Ok(EnergySample {
        time: state.time,
        e_phys,
        dissipation: dissipation(state, nu),
        magnetic,
        fluid: e_phys - magnetic,
    })
}

/// Largest constraint residuals seen at the sampled states.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintDrift {
    pub mass: f64,
    pub momentum: f64,
    pub mean_h: f64,
    pub div_h: f64,
}

/// A run with energy samples at every step and full reports at the output cadence.
#[derive(Debug, Clone)]
pub struct Trace {
    pub samples: Vec<EnergySample>,
    /// Reports sharing one `delta_*`, shrunk so the bracket holds at every report.
    pub reports: Vec<EnergyReport>,
    /// Leading reports taken on the cadence; a final off-cadence report may follow.
    pub on_cadence: usize,
    pub summary: RunSummary,
    pub delta_star: f64,
    pub settings: ReportSettings,
}

/// Runs `cfg` from `initial`, recording diagnostics along the way.
pub fn trace_run(cfg: &RunConfig, initial: PerturbationState) -> Result<Trace> {
    let solver = &cfg.solver;
    let mut settings = ReportSettings::new(solver, cfg.orders);
    settings.delta_star = cfg.delta_star;
    settings.cross_weights = cfg.cross_weights;
    let mut samples = Vec::new();
    let mut reports = Vec::new();
    let mut failure = None;
    let every_step = SolverConfig { cadence: 1, ..solver.clone() };
    let summary = run(&every_step, initial, &mut |n, state| {
        if failure.is_some() {
            return;
        }
        let sample = energy_sample(state, &solver.pressure, solver.nu);
        let report = (n % solver.cadence == 0).then(|| energy_report(state, &settings)).transpose();
        match (sample, report) {
            (Ok(s), Ok(r)) => {
                samples.push(s);
                reports.extend(r);
            }
            (Err(e), _) | (_, Err(e)) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let on_cadence = reports.len();
    let last = &summary.final_state;
    if reports.last().is_some_and(|r: &EnergyReport| r.time < last.time) {
        reports.push(energy_report(last, &settings)?);
    }
    let composites: Vec<_> = reports.iter().map(|r| r.composite).collect();
    let delta_star = if cfg.delta_star > 0.0 {
        shrink_delta(&composites, cfg.delta_star)?
    } else {
        0.0
    };
    for r in &mut reports {
        r.composite = r.composite.with_delta(delta_star);
    }
    Ok(Trace {
        samples,
        reports,
        on_cadence,
        summary,
        delta_star,
        settings,
    })
}

impl Trace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.time).collect()
    }

    pub fn identity(&self, order: DifferenceOrder) -> Result<EnergyIdentity> {
        let e: Vec<f64> = self.samples.iter().map(|s| s.e_phys).collect();
        let d: Vec<f64> = self.samples.iter().map(|s| s.dissipation).collect();
        energy_identity(&self.times(), &e, &d, order)
    }

    /// Dissipation monitor of `X` on the uniformly spaced report samples; `skip`
    /// leading interior samples are a transient.
    pub fn monitor(&self, margin: f64, skip: usize) -> Result<DissipationMonitor> {
        let reports = &self.reports[..self.on_cadence];
        let t: Vec<f64> = reports.iter().map(|r| r.time).collect();
        let x: Vec<f64> = reports.iter().map(|r| r.composite.x).collect();
        let low: Vec<f64> = reports.iter().map(|r| r.e_low).collect();
        dissipation_monitor(&t, &x, &low, margin, DifferenceOrder::Sixth, skip)
    }

    /// Fit of `E_phys` over the report samples.
    pub fn energy_fit(&self) -> Result<DecayFit> {
        let t: Vec<f64> = self.reports.iter().map(|r| r.time).collect();
        let e: Vec<f64> = self.reports.iter().map(|r| r.e_phys).collect();
        decay_fit(&t, &e)
    }

    pub fn drift(&self) -> ConstraintDrift {
        self.reports.iter().fold(ConstraintDrift::default(), |d, r| {
            let res = &r.residuals;
            let max3 = |v: [f64; 3]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            ConstraintDrift {
                mass: d.mass.max(res.mass.abs()),
                momentum: d.momentum.max(max3(res.momentum)),
                mean_h: d.mean_h.max(max3(res.mean_h)),
                div_h: d.div_h.max(res.div_h),
            }
        })
    }

    /// Whether `E_phys` never increases from one step to the next.
    pub fn energy_is_monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].e_phys <= w[0].e_phys)
    }

    pub fn energy_table(&self) -> Table {
        let mut t = Table::new(["t", "E_phys", "dissipation", "magnetic", "fluid"]);
        for s in &self.samples {
            t.push(vec![s.time, s.e_phys, s.dissipation, s.magnetic, s.fluid]);
        }
        t
    }

    pub fn time_series(&self) -> Table {
        time_series_csv(&self.reports, &self.settings.energy_orders)
    }
}

/// How a scenario ended.
#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Success,
    /// The solver stopped early; partial artifacts are still produced.
    RunFailed { reason: String, last_valid_time: f64 },
    /// A checked property did not hold.
    CheckFailed(String),
}

/// Named output files plus a structured text summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub scenario: Scenario,
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: String,
    pub status: Status,
}

impl Outcome {
    fn new(scenario: Scenario) -> Self {
        Outcome {
            scenario,
            files: Vec::new(),
            summary: String::new(),
            status: Status::Success,
        }
    }

    fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        writeln!(self.summary, "{key}: {value}").expect("writing to a string");
    }

    fn fail_check(&mut self, why: String) {
        if self.status == Status::Success {
            self.status = Status::CheckFailed(why);
        }
    }

    fn finish(mut self, cfg: &RunConfig) -> Self {
        let mut text = format!("scenario: {}\n", self.scenario.name());
        match &self.status {
            Status::Success => text.push_str("status: success\n"),
            Status::RunFailed { reason, last_valid_time } => {
                let _ = writeln!(text, "status: run-failed\nfailure: {reason}\nlast_valid_time: {}", fmt_float(*last_valid_time));
            }
            Status::CheckFailed(why) => {
                let _ = writeln!(text, "status: check-failed\nfailure: {why}");
            }
        }
        text.push_str(&self.summary);
        text.push_str("\n[config]\n");
        text.push_str(&cfg.to_text());
        self.summary = text;
        let summary = self.summary.clone();
        self.add("report.txt", summary);
        self
    }
}

/// Identity tolerance, relative to the dissipation.
pub const IDENTITY_TOLERANCE: f64 = 1e-4;

fn run_status(summary: &RunSummary) -> Status {
    match &summary.failure {
        None => Status::Success,
        Some(f) => Status::RunFailed {
            reason: format!("{}: {}", f.kind.as_str(), f.message),
            last_valid_time: f.last_valid_time,
        },
    }
}

fn describe_run(out: &mut Outcome, prefix: &str, trace: &Trace) {
    let s = &trace.summary;
    out.line(&format!("{prefix}steps"), format!("{} of {}", s.steps_taken, s.steps_planned));
    out.line(&format!("{prefix}dt"), fmt_float(s.dt));
    out.line(&format!("{prefix}final_time"), fmt_float(s.final_state.time));
    if let Some(f) = &s.failure {
        out.line(&format!("{prefix}failure"), format!("{} at step {}: {}", f.kind.as_str(), f.step, f.message));
    }
    if let (Some(first), Some(last)) = (trace.samples.first(), trace.samples.last()) {
        out.line(&format!("{prefix}E_phys"), format!("{} -> {}", fmt_float(first.e_phys), fmt_float(last.e_phys)));
        out.line(&format!("{prefix}magnetic"), format!("{} -> {}", fmt_float(first.magnetic), fmt_float(last.magnetic)));
        out.line(&format!("{prefix}fluid"), format!("{} -> {}", fmt_float(first.fluid), fmt_float(last.fluid)));
    }
}

fn describe_fit(out: &mut Outcome, prefix: &str, fit: &Result<DecayFit>) {
    match fit {
        Ok(f) => {
            out.line(&format!("{prefix}fit_C"), fmt_float(f.c));
            out.line(&format!("{prefix}fit_alpha"), fmt_float(f.alpha));
            out.line(&format!("{prefix}fit_p"), fmt_float(f.p));
            out.line(&format!("{prefix}fit_residual"), fmt_float(f.residual));
            out.line(&format!("{prefix}fit_window"), format!("{} {}", fmt_float(f.window.0), fmt_float(f.window.1)));
            out.line(&format!("{prefix}fit_degenerate"), f.degenerate);
        }
        Err(e) => out.line(&format!("{prefix}fit"), format!("unavailable ({e})")),
    }
}

/// Structured text form of a decay fit.
pub fn fit_report(fit: &DecayFit, source: &str) -> String {
    format!(
        "model: E(t) = C (1 + alpha t)^(-p)\nsource: {source}\nC: {}\nalpha: {}\np: {}\nresidual: {}\nwindow: {} {}\nsamples: {}\ndegenerate: {}\n",
        fmt_float(fit.c),
        fmt_float(fit.alpha),
        fmt_float(fit.p),
        fmt_float(fit.residual),
        fmt_float(fit.window.0),
        fmt_float(fit.window.1),
        fit.samples,
        fit.degenerate
    )
}

fn decay_run(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Scenario::DecayRun);
    let trace = trace_run(cfg, initial_state(&cfg.solver)?)?;
    out.status = run_status(&trace.summary);
    describe_run(&mut out, "", &trace);
    out.line("energy_monotone", trace.energy_is_monotone());
    let drift = trace.drift();
    out.line("drift_mass", fmt_float(drift.mass));
    out.line("drift_momentum", fmt_float(drift.momentum));
    out.line("drift_mean_h", fmt_float(drift.mean_h));
    out.line("max_div_h", fmt_float(drift.div_h));
    if let Ok(id) = trace.identity(DifferenceOrder::Sixth) {
        out.line("identity_max_relative", fmt_float(id.max_relative()));
    }
    out.line("orders", describe_orders(cfg));
    out.line("delta_star", fmt_float(trace.delta_star));
    let weighted = trace.reports.iter().all(|r| r.composite.weighted_bracket_holds());
    let bracket = trace.reports.iter().all(|r| r.composite.bracket_holds());
    out.line("weighted_bracket", weighted);
    out.line("composite_bracket", bracket);
    if let Ok(m) = trace.monitor(0.0, 0) {
        out.line("monitor_violations", m.violations);
        out.line("monitor_empirical_margin", m.empirical_margin.map_or("none".into(), fmt_float));
    }
    let fit = trace.energy_fit();
    describe_fit(&mut out, "", &fit);
    if let Ok(f) = &fit {
        out.add("decay_fit.txt", fit_report(f, "timeseries.csv E_phys"));
    }
    if !(weighted && bracket) {
        out.fail_check("energy bracket violated".into());
    }
    out.add("timeseries.csv", trace.time_series().to_csv());
    out.add("energy.csv", trace.energy_table().to_csv());
    out.add("final.mhdt", encode_checkpoint(&trace.summary.final_state));
    Ok(out.finish(cfg))
}

fn describe_orders(cfg: &RunConfig) -> String {
    let o = &cfg.orders;
    format!(
        "L={} M={} N={} d={} r={} ({})",
        o.l(),
        o.m(),
        o.n(),
        o.d(),
        fmt_float(o.r()),
        if o.is_paper_regime() { "paper regime" } else { "relaxed, outside the paper regime" }
    )
}

fn identity_check(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Scenario::IdentityCheck);
    let trace = trace_run(cfg, initial_state(&cfg.solver)?)?;
    out.status = run_status(&trace.summary);
    describe_run(&mut out, "", &trace);
    let mut table = Table::new(["t", "dEdt", "dissipation", "residual", "relative"]);
    match trace.identity(DifferenceOrder::Sixth) {
        Ok(id) => {
            for (i, rel) in id.relative().into_iter().enumerate() {
                table.push(vec![id.times[i], id.rate[i], id.dissipation[i], id.residual[i], rel]);
            }
            let worst = id.max_relative();
            out.line("identity_max_relative", fmt_float(worst));
            out.line("identity_max_abs", fmt_float(id.max_abs()));
            out.line("tolerance", fmt_float(IDENTITY_TOLERANCE));
            if !(worst <= IDENTITY_TOLERANCE) {
                out.fail_check(format!("energy identity residual {worst:e} exceeds {IDENTITY_TOLERANCE:e}"));
            }
        }
        Err(e) => out.line("identity", format!("unavailable ({e})")),
    }
    out.add("identity.csv", table.to_csv());
    out.add("energy.csv", trace.energy_table().to_csv());
    Ok(out.finish(cfg))
}

/// Relative change `(last - first) / first` of a sampled quantity.
pub fn relative_change(samples: &[EnergySample], pick: impl Fn(&EnergySample) -> f64) -> Option<f64> {
    let first = pick(samples.first()?);
    let last = pick(samples.last()?);
    (first > 0.0).then(|| (last - first) / first)
}

/// The magnetised run and its `w = 0` counterpart from the same initial data.
pub fn euler_pair(cfg: &RunConfig) -> Result<(Trace, Trace)> {
    let initial = initial_state(&cfg.solver)?;
    let magnetised = trace_run(cfg, initial.clone())?;
    let mut plain = cfg.clone();
    plain.solver.w = [0.0; 3];
    let unmagnetised = trace_run(&plain, initial)?;
    Ok((magnetised, unmagnetised))
}

fn euler_compare(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Scenario::EulerCompare);
    let (with_w, without) = euler_pair(cfg)?;
    out.status = run_status(&with_w.summary);
    let mut table = Table::new(["w_zero", "completed", "final_time", "E_phys_change", "magnetic_change", "fluid_change", "fit_p"]);
    for (prefix, trace, flag) in [("w.", &with_w, 0.0), ("w0.", &without, 1.0)] {
        describe_run(&mut out, prefix, trace);
        let fit = trace.energy_fit();
        describe_fit(&mut out, prefix, &fit);
        let change = |pick: fn(&EnergySample) -> f64| relative_change(&trace.samples, pick).unwrap_or(f64::NAN);
        table.push(vec![
            flag,
            if trace.summary.completed() { 1.0 } else { 0.0 },
            trace.summary.final_state.time,
            change(|s| s.e_phys),
            change(|s| s.magnetic),
            change(|s| s.fluid),
            fit.map_or(f64::NAN, |f| f.p),
        ]);
    }
    out.add("comparison.csv", table.to_csv());
    out.add("magnetised.csv", with_w.energy_table().to_csv());
    out.add("unmagnetised.csv", without.energy_table().to_csv());
    Ok(out.finish(cfg))
}

fn inequality_cert(cfg: &RunConfig, with_constants: bool) -> Result<Outcome> {
    let mut out = Outcome::new(Scenario::InequalityCert);
    let w = cfg.solver.w;
    let (r, band, s) = (cfg.dio_r, cfg.dio_band, cfg.dio_s);
    if w.iter().all(|c| *c == 0.0) {
        out.line("diophantine", "w = 0 is resonant with every mode");
        return Ok(out.finish(cfg));
    }
    let dio = DioVector::new(w, r)?;
    let margins = margin_report(&dio, band)?;
    out.line("w", w.map(fmt_float).join(" "));
    out.line("r", fmt_float(r));
    out.line("band", band);
    out.line("dot_margin", fmt_float(margins.dot.value));
    out.line("dot_argmin", format!("{:?}", margins.dot.argmin));
    out.line("cross_margin", fmt_float(margins.cross.value));
    out.line("cross_argmin", format!("{:?}", margins.cross.argmin));
    out.line(
        "diophantine",
        if margins.is_diophantine_in_band() { "in band" } else { "not Diophantine in band" },
    );
    let tilde = tilde_inequality_check(w, band)?;
    out.line("tilde_checked", tilde.checked);
    out.line("tilde_violations", tilde.violations.len());
    if !tilde.passed() {
        out.fail_check(format!("tilde inequality fails at {} modes", tilde.violations.len()));
    }
    let constants = if with_constants { Some(empirical_constants(w, s, r, band)?) } else { None };
    match constants {
        None => {}
        Some(BandConstants::NotDiophantineInBand { resonant }) => {
            out.line("constants", format!("unavailable, resonant mode {resonant:?}"));
        }
        Some(BandConstants::Finite(c)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
            let cert = certify(&c, w, cfg.dio_samples, &mut rng)?;
            for (name, value, mode, cc) in [
                ("K1", c.k1, c.k1_mode, cert.k1),
                ("K2", c.k2, c.k2_mode, cert.k2),
                ("K3", c.k3, c.k3_mode, cert.k3),
            ] {
                out.line(name, format!("{} at {:?}", fmt_float(value), mode));
                out.line(&format!("{name}_observed_max"), fmt_float(cc.observed_max));
                out.line(&format!("{name}_violations"), cc.violations);
            }
            if !cert.holds() {
                out.fail_check("an empirical constant was exceeded".into());
            }
        }
    }
    let mut table = Table::new(["k1", "k2", "k3", "norm", "dot_margin", "cross_margin"]);
    for row in margin_rows(&dio, band)? {
        table.push(vec![
            row.k[0] as f64,
            row.k[1] as f64,
            row.k[2] as f64,
            row.norm,
            row.dot_value,
            row.cross_value,
        ]);
    }
    out.add("margins.csv", table.to_csv());
    Ok(out.finish(cfg))
}

fn linear_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::new(Scenario::LinearSweep);
    let scan = band_spectrum_scan(cfg.solver.linear_params(), cfg.linear_band)?;
    out.line("band", scan.band);
    out.line("spectral_abscissa", fmt_float(scan.spectral_abscissa));
    out.line("attaining_k", format!("{:?}", scan.attaining_k));
    out.line("neutral_modes", scan.neutral_modes().count());
    out.line("max_eigen_residual", fmt_float(scan.max_residual));
    let mut table = Table::new(["k1", "k2", "k3", "re_max", "im_at_max", "neutral_count"]);
    for row in &scan.rows {
        table.push(vec![
            row.k[0] as f64,
            row.k[1] as f64,
            row.k[2] as f64,
            row.re_max,
            row.im_at_max,
            row.neutral_count as f64,
        ]);
    }
    out.add("spectrum.csv", table.to_csv());
    Ok(out.finish(cfg))
}

/// Runs a scenario. Configuration problems are errors; solver failures and failed
/// checks are reported in the outcome.
pub fn run_scenario(scenario: Scenario, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    match scenario {
        Scenario::DecayRun => decay_run(cfg),
        Scenario::EulerCompare => euler_compare(cfg),
        Scenario::InequalityCert => inequality_cert(cfg, true),
        Scenario::LinearSweep => linear_sweep(cfg),
        Scenario::IdentityCheck => identity_check(cfg),
    }
}

/// Diophantine margins and the tilde check only, without certifying constants.
pub fn check_diophantine(cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate()?;
    inequality_cert(cfg, false)
}

/// Writes every artifact of `outcome` into `dir`, creating it if needed.
pub fn write_outcome(outcome: &Outcome, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, contents) in &outcome.files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

