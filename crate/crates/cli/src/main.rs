use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use torus_mhd::diagnostics::decay_fit;
use torus_mhd::io::{RunConfig, Table};
use torus_mhd::scenario::{check_diophantine, fit_report, run_scenario, write_outcome, Outcome, Scenario, Status};
use torus_mhd::Error;

/// Perturbation experiments for isentropic compressible MHD on the periodic unit torus.
#[derive(Parser)]
#[command(name = "torus-mhd", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed; overrides `init.seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Single configuration override, applied after the file.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Diophantine margins of `physics.w` over the band.
    CheckDiophantine(Common),
    /// Margins plus empirical Poincare-type constants and their certification.
    VerifyInequalities(Common),
    /// Spectrum of the linearised mode matrices over `linear.band`.
    LinearSpectrum(Common),
    /// Nonlinear run with diagnostics (the decay-run scenario unless `--scenario` is given).
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NAME", default_value = "decay-run")]
        scenario: String,
    },
    /// Fits `C (1 + alpha t)^(-p)` to a CSV column.
    DecayFit {
        #[command(flatten)]
        common: Common,
        /// Input CSV with a header line.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
        #[arg(long, default_value = "E_phys")]
        column: String,
        #[arg(long, default_value = "t")]
        time_column: String,
    },
    /// Energy identity residual along a run.
    IdentityCheck(Common),
    /// The configured run against its `w = 0` counterpart.
    EulerCompare(Common),
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUN: u8 = 3;
const EXIT_CHECK: u8 = 4;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::InvalidOrders(_) | Error::InvalidInput(_) | Error::InvalidGrid(_) => EXIT_CONFIG,
        _ => EXIT_IO,
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    for o in &common.overrides {
        cfg.apply_override(o)?;
    }
    if let Some(seed) = common.seed {
        cfg.solver.seed = seed;
    }
    if let Some(dir) = &common.out {
        cfg.output_dir = dir.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(outcome: &Outcome, dir: &Path) -> Result<u8, Error> {
    write_outcome(outcome, dir)?;
    print!("{}", outcome.summary);
    Ok(match outcome.status {
        Status::Success => 0,
        Status::RunFailed { .. } => EXIT_RUN,
        Status::CheckFailed(_) => EXIT_CHECK,
    })
}

fn fit_file(common: &Common, input: &Path, column: &str, time_column: &str) -> Result<u8, Error> {
    let cfg = load(common)?;
    let table = Table::read(input)?;
    let fit = decay_fit(&table.column(time_column)?, &table.column(column)?)?;
    let text = fit_report(&fit, &format!("{} {column}", input.display()));
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let path = dir.join("decay_fit.txt");
    std::fs::write(&path, &text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    print!("{text}");
    Ok(0)
}

fn scenario(common: &Common, scenario: Scenario) -> Result<u8, Error> {
    let cfg = load(common)?;
    emit(&run_scenario(scenario, &cfg)?, &cfg.output_dir)
}

fn dispatch(command: Command) -> Result<u8, Error> {
    match command {
        Command::CheckDiophantine(c) => {
            let cfg = load(&c)?;
            emit(&check_diophantine(&cfg)?, &cfg.output_dir)
        }
        Command::VerifyInequalities(c) => scenario(&c, Scenario::InequalityCert),
        Command::LinearSpectrum(c) => scenario(&c, Scenario::LinearSweep),
        Command::Simulate { common, scenario: name } => scenario(&common, name.parse()?),
        Command::DecayFit {
            common,
            input,
            column,
            time_column,
        } => fit_file(&common, &input, &column, &time_column),
        Command::IdentityCheck(c) => scenario(&c, Scenario::IdentityCheck),
        Command::EulerCompare(c) => scenario(&c, Scenario::EulerCompare),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}
