//! Flat `key = value` run configuration.
//!
//! ```text
//! # comments and blank lines are ignored
//! grid.n = 32
//! time.dt = auto            # or a positive step
//! time.t_end = 10
//! time.cfl = 0.4
//! physics.nu = 1
//! physics.gamma = 1.4
//! physics.w = 2, 2.8284271247461903, 3.4641016151377544
//! init.kind = random        # zero | random | magnetic-mode | acoustic-mode
//! init.amplitude = 0.01
//! init.kmax = 1             # random data
//! init.k = 1 0 0            # single-mode data
//! init.seed = 0
//! output.cadence = 10
//! output.dir = out
//! diagnostics.orders = 1 2 3 7 1      # L M N d r
//! diagnostics.delta_star = 1
//! diagnostics.cross_weights = 1 1 1
//! diagnostics.regime = relaxed          # or paper
//! diophantine.r = 3
//! diophantine.s = 3
//! diophantine.band = 20
//! diophantine.samples = 100
//! linear.band = 8
//! ```
//!
//! Keys may appear at most once. `physics.w` also accepts `default`, the vector
//! `2 (1, sqrt 2, sqrt 3)`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::diagnostics::{OrderParams, DEFAULT_CROSS_WEIGHTS, DEFAULT_DELTA_STAR};
use crate::diophantine::default_w;
use crate::error::{Error, Result};
use crate::pressure::PressureLaw;
use crate::solver::{InitialData, SolverConfig, TimeStep};

use super::fmt_float;

/// Everything a run needs besides the initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    pub orders: OrderParams,
    pub delta_star: f64,
    pub cross_weights: [f64; 3],
    /// Exponent `r` of the non-resonance condition.
    pub dio_r: f64,
    /// Sobolev index of the certified inequalities.
    pub dio_s: f64,
    /// Band `|k| <= band` for margins and constants.
    pub dio_band: i64,
    /// Random fields per certified constant.
    pub dio_samples: usize,
    /// Band of the linear spectrum scan.
    pub linear_band: i64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            solver: SolverConfig::default(),
            output_dir: PathBuf::from("out"),
            orders: OrderParams::desk(),
            delta_star: DEFAULT_DELTA_STAR,
            cross_weights: DEFAULT_CROSS_WEIGHTS,
            dio_r: 3.0,
            dio_s: 3.0,
            dio_band: 20,
            dio_samples: 100,
            linear_band: 8,
        }
    }
}

/// Every recognised key, in echo order.
pub const KEYS: [&str; 23] = [
    "grid.n",
    "time.dt",
    "time.t_end",
    "time.cfl",
    "physics.nu",
    "physics.gamma",
    "physics.w",
    "init.kind",
    "init.amplitude",
    "init.kmax",
    "init.k",
    "init.seed",
    "output.cadence",
    "output.dir",
    "diagnostics.orders",
    "diagnostics.delta_star",
    "diagnostics.cross_weights",
    "diagnostics.regime",
    "diophantine.r",
    "diophantine.s",
    "diophantine.band",
    "diophantine.samples",
    "linear.band",
];

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key} = {value:?}: {why}"))
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| bad(key, value, e))
}

fn parse_list<T: std::str::FromStr + Copy, const N: usize>(key: &str, value: &str) -> Result<[T; N]>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect::<Result<_>>()?;
    items
        .try_into()
        .map_err(|v: Vec<T>| bad(key, value, format!("expected {N} values, got {}", v.len())))
}

/// The init fields that the kind-specific keys feed.
#[derive(Debug, Clone, Copy)]
struct InitParts {
    amplitude: f64,
    kmax: i64,
    k: [i64; 3],
}

fn init_parts(init: InitialData) -> InitParts {
    let defaults = InitParts {
        amplitude: 1e-2,
        kmax: 1,
        k: [1, 0, 0],
    };
    match init {
        InitialData::Zero => defaults,
        InitialData::Random { amplitude, kmax } => InitParts {
            amplitude,
            kmax,
            ..defaults
        },
        InitialData::MagneticMode { k, amplitude } | InitialData::AcousticMode { k, amplitude } => InitParts {
            amplitude,
            k,
            ..defaults
        },
    }
}

fn with_parts(init: InitialData, p: InitParts) -> InitialData {
    match init {
        InitialData::Zero => InitialData::Zero,
        InitialData::Random { .. } => InitialData::Random {
            amplitude: p.amplitude,
            kmax: p.kmax,
        },
        InitialData::MagneticMode { .. } => InitialData::MagneticMode {
            k: p.k,
            amplitude: p.amplitude,
        },
        InitialData::AcousticMode { .. } => InitialData::AcousticMode {
            k: p.k,
            amplitude: p.amplitude,
        },
    }
}

pub fn init_kind_name(init: &InitialData) -> &'static str {
    match init {
        InitialData::Zero => "zero",
        InitialData::Random { .. } => "random",
        InitialData::MagneticMode { .. } => "magnetic-mode",
        InitialData::AcousticMode { .. } => "acoustic-mode",
    }
}

impl RunConfig {
    /// Sets one key. Values of the kind-specific init keys survive a later change
    /// of `init.kind`.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let s = &mut self.solver;
        let mut parts = init_parts(s.init);
        match key {
            "grid.n" => s.n = parse_num(key, value)?,
            "time.dt" => {
                s.dt = if value == "auto" {
                    TimeStep::Auto
                } else {
                    TimeStep::Fixed(parse_num(key, value)?)
                }
            }
            "time.t_end" => s.t_end = parse_num(key, value)?,
            "time.cfl" => s.cfl_number = parse_num(key, value)?,
            "physics.nu" => s.nu = parse_num(key, value)?,
            "physics.gamma" => {
                let gamma: f64 = parse_num(key, value)?;
                s.pressure = PressureLaw::with_window(gamma, s.positivity_window, s.pressure.q_order)
                    .map_err(|e| bad(key, value, e))?;
            }
            "physics.w" => {
                s.w = if value == "default" {
                    default_w(2.0)
                } else {
                    parse_list(key, value)?
                }
            }
            "init.kind" => {
                let kind = match value {
                    "zero" => InitialData::Zero,
                    "random" => InitialData::Random {
                        amplitude: 0.0,
                        kmax: 0,
                    },
                    "magnetic-mode" => InitialData::MagneticMode {
                        k: [0; 3],
                        amplitude: 0.0,
                    },
                    "acoustic-mode" => InitialData::AcousticMode {
                        k: [0; 3],
                        amplitude: 0.0,
                    },
                    _ => return Err(bad(key, value, "expected zero, random, magnetic-mode or acoustic-mode")),
                };
                s.init = with_parts(kind, parts);
                return Ok(());
            }
            "init.amplitude" => parts.amplitude = parse_num(key, value)?,
            "init.kmax" => parts.kmax = parse_num(key, value)?,
            "init.k" => parts.k = parse_list(key, value)?,
            "init.seed" => s.seed = parse_num(key, value)?,
            "output.cadence" => s.cadence = parse_num(key, value)?,
            "output.dir" => {
                if value.is_empty() {
                    return Err(bad(key, value, "empty path"));
                }
                self.output_dir = PathBuf::from(value);
            }
            "diagnostics.orders" => {
                let [l, m, n, d, r]: [f64; 5] = parse_list(key, value)?;
                let ints = [l, m, n, d];
                if ints.iter().any(|v| v.fract() != 0.0 || *v < 0.0 || *v > u32::MAX as f64) {
                    return Err(bad(key, value, "L, M, N and d must be nonnegative integers"));
                }
                let paper = self.orders.is_paper_regime();
                let make = if paper { OrderParams::new } else { OrderParams::relaxed };
                self.orders = make(l as u32, m as u32, n as u32, d as u32, r).map_err(|e| bad(key, value, e))?;
            }
            "diagnostics.regime" => {
                let o = self.orders;
                self.orders = match value {
                    "paper" => OrderParams::new(o.l(), o.m(), o.n(), o.d(), o.r()),
                    "relaxed" => OrderParams::relaxed(o.l(), o.m(), o.n(), o.d(), o.r()),
                    _ => return Err(bad(key, value, "expected paper or relaxed")),
                }
                .map_err(|e| bad(key, value, e))?;
            }
            "diagnostics.delta_star" => {
                let d: f64 = parse_num(key, value)?;
                if !(d >= 0.0 && d.is_finite()) {
                    return Err(bad(key, value, "must be nonnegative"));
                }
                self.delta_star = d;
            }
            "diagnostics.cross_weights" => self.cross_weights = parse_list(key, value)?,
            "diophantine.r" => self.dio_r = parse_num(key, value)?,
            "diophantine.s" => self.dio_s = parse_num(key, value)?,
            "diophantine.band" => self.dio_band = parse_num(key, value)?,
            "diophantine.samples" => self.dio_samples = parse_num(key, value)?,
            "linear.band" => self.linear_band = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        self.solver.init = with_parts(self.solver.init, parts);
        Ok(())
    }

    /// Applies a `KEY=VALUE` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not KEY=VALUE")))?;
        self.apply(key.trim(), value)
    }

    /// Parses a configuration on top of the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeSet::new();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected KEY = VALUE, got {raw:?}", number + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key {key:?}", number + 1)));
            }
            cfg.apply(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", number + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if !(self.dio_r.is_finite() && self.dio_r >= 0.0 && self.dio_s.is_finite()) {
            return Err(Error::Config("diophantine.r must be nonnegative and diophantine.s finite".into()));
        }
        if self.dio_band < 1 || self.linear_band < 1 {
            return Err(Error::Config("diophantine.band and linear.band must be positive".into()));
        }
        if !self.cross_weights.iter().all(|c| c.is_finite()) {
            return Err(Error::Config("diagnostics.cross_weights must be finite".into()));
        }
        Ok(())
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let s = &self.solver;
        let parts = init_parts(s.init);
        let list = |v: &[f64]| v.iter().map(|x| fmt_float(*x)).collect::<Vec<_>>().join(" ");
        let o = &self.orders;
        let values = [
            s.n.to_string(),
            match s.dt {
                TimeStep::Auto => "auto".into(),
                TimeStep::Fixed(dt) => fmt_float(dt),
            },
            fmt_float(s.t_end),
            fmt_float(s.cfl_number),
            fmt_float(s.nu),
            fmt_float(s.pressure.gamma()),
            list(&s.w),
            init_kind_name(&s.init).into(),
            fmt_float(parts.amplitude),
            parts.kmax.to_string(),
            parts.k.map(|c| c.to_string()).join(" "),
            s.seed.to_string(),
            s.cadence.to_string(),
            self.output_dir.display().to_string(),
            format!("{} {} {} {} {}", o.l(), o.m(), o.n(), o.d(), fmt_float(o.r())),
            fmt_float(self.delta_star),
            list(&self.cross_weights),
            if o.is_paper_regime() { "paper" } else { "relaxed" }.into(),
            fmt_float(self.dio_r),
            fmt_float(self.dio_s),
            self.dio_band.to_string(),
            self.dio_samples.to_string(),
            self.linear_band.to_string(),
        ];
        KEYS.iter()
            .zip(values)
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }
}
