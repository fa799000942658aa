//! Pseudo-spectral integration of the compressible resistive MHD perturbation system.
//!
//! The resistive term is integrated exactly through the factor
//! `exp(-nu 4 pi^2 |k|^2 t)`; everything else is advanced by the classical
//! fourth-order Runge-Kutta scheme in the rotated variables (Lawson's method).

mod config;
mod init;
mod remainder;
mod rhs;

use crate::error::{Error, Result};
use num_complex::Complex64;

use crate::spectral::Grid3;
use crate::state::PerturbationState;

pub use config::{InitialData, SolverConfig, TimeStep};
pub use init::{generate_raw, initial_state, prepare_initial_data, RawFields};
pub use remainder::{remainders, Remainders};
pub use rhs::{rhs, Tendency};

pub(crate) use init::window_error;
use rhs::{diffusion_factors, transport};

/// Largest wave speed bound `max|u| + max sqrt(p'(rho)) + max|w + h|` on the grid.
pub fn max_signal_speed(state: &PerturbationState, config: &SolverConfig) -> f64 {
    let [u0, u1, u2] = state.u.components();
    let [h0, h1, h2] = state.h.components();
    let g = crate::spectral::samples_of(&[&state.a, u0, u1, u2, h0, h1, h2]);
    let w = config.w;
    let mut umax: f64 = 0.0;
    let mut cmax: f64 = 0.0;
    let mut hmax: f64 = 0.0;
    for x in 0..g[0].len() {
        let rho = 1.0 + g[0][x];
        umax = umax.max((g[1][x] * g[1][x] + g[2][x] * g[2][x] + g[3][x] * g[3][x]).sqrt());
        cmax = cmax.max(config.pressure.dp(rho).max(0.0).sqrt());
        let big_h = [w[0] + g[4][x], w[1] + g[5][x], w[2] + g[6][x]];
        hmax = hmax.max((big_h[0] * big_h[0] + big_h[1] * big_h[1] + big_h[2] * big_h[2]).sqrt());
    }
    umax + cmax + hmax
}

/// `cfl_number * dx / max_signal_speed`, with `dx = 1/n`.
pub fn cfl_dt(state: &PerturbationState, config: &SolverConfig) -> f64 {
    let speed = max_signal_speed(state, config);
    let dx = state.grid().spacing();
    if speed > 0.0 && speed.is_finite() {
        config.cfl_number * dx / speed
    } else if speed == 0.0 {
        config.cfl_number * dx
    } else {
        f64::MIN_POSITIVE
    }
}

/// Fixed-step integrating-factor Runge-Kutta stepper.
#[derive(Debug, Clone)]
pub struct Stepper {
    config: SolverConfig,
    dt: f64,
    /// Retained storage indices with their full- and half-step resistive factors.
    modes: Vec<(usize, f64, f64)>,
}

fn tag_stage(err: Error, stage: usize) -> Error {
    match err {
        Error::Positivity { min, max, lo, hi, .. } => Error::Positivity {
            min,
            max,
            lo,
            hi,
            stage: Some(stage),
        },
        other => other,
    }
}

const H_FIELDS: usize = 4;

impl Stepper {
    pub fn new(config: &SolverConfig, dt: f64) -> Result<Self> {
        config.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        let grid = config.grid()?;
        let full = diffusion_factors(grid, config.nu, dt);
        let half = diffusion_factors(grid, config.nu, 0.5 * dt);
        let modes = rhs::retained_modes(grid).map(|(idx, _)| (idx, full[idx], half[idx])).collect();
        Ok(Stepper {
            config: config.clone(),
            dt,
            modes,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> Grid3 {
        Grid3::new(self.config.n).expect("validated at construction")
    }

    fn stage(&self, state: &PerturbationState, stage: usize) -> Result<PerturbationState> {
        transport(state, &self.config)
            .map(|t| t.as_state(state.time))
            .map_err(|e| tag_stage(e, stage))
    }

    /// `out <- f(y, k, full, half)` on every retained mode of every field, where the
    /// factors are 1 for the density and velocity fields.
    fn combine(
        &self,
        out: &mut PerturbationState,
        y: &PerturbationState,
        k: [&PerturbationState; 4],
        f: impl Fn(Complex64, [Complex64; 4], f64, f64) -> Complex64,
    ) {
        let ys = y.fields();
        let ks = k.map(|s| s.fields());
        for (field, target) in out.fields_mut().into_iter().enumerate() {
            let yc = ys[field].coeffs();
            let kc = ks.map(|s| s[field].coeffs());
            let resistive = field >= H_FIELDS;
            let target = target.coeffs_mut();
            for &(idx, full, half) in &self.modes {
                let (e, e2) = if resistive { (full, half) } else { (1.0, 1.0) };
                target[idx] = f(yc[idx], kc.map(|c| c[idx]), e, e2);
            }
        }
    }

    /// Advances `state` by one step of size `dt`; the result is truncated to the
    /// retained band.
    pub fn step(&self, state: &PerturbationState) -> Result<PerturbationState> {
        self.grid().check_same(&state.grid())?;
        let dt = self.dt;
        let y = state;
        let mut work = PerturbationState::zeros(y.grid());
        work.time = y.time;

        let k1 = self.stage(y, 1)?;
        self.combine(&mut work, y, [&k1; 4], |y, k, _, e2| e2 * (y + 0.5 * dt * k[0]));
        let k2 = self.stage(&work, 2)?;
        self.combine(&mut work, y, [&k2; 4], |y, k, _, e2| e2 * y + 0.5 * dt * k[0]);
        let k3 = self.stage(&work, 3)?;
        self.combine(&mut work, y, [&k3; 4], |y, k, e, e2| e * y + dt * e2 * k[0]);
        let k4 = self.stage(&work, 4)?;
        self.combine(&mut work, y, [&k1, &k2, &k3, &k4], |y, k, e, e2| {
            e * y + dt / 6.0 * (e * k[0] + 2.0 * e2 * (k[1] + k[2]) + k[3])
        });
        work.h.leray_project_mut();
        restore_momentum(&mut work, momentum(y));
        work.time = y.time + dt;
        if !work.is_finite() {
            return Err(Error::Constraint(format!("non-finite state after step at t={}", work.time)));
        }
        Ok(work)
    }
}

/// `int rho u` from the spectral coefficients; exact for band-limited fields.
fn momentum(state: &PerturbationState) -> [f64; 3] {
    std::array::from_fn(|i| {
        let u = state.u.component(i);
        u.mean() + state.a.inner(u).expect("fields of one state share a grid")
    })
}

/// Shifts the mean velocity so that `int rho u` equals `target`. Runge-Kutta methods
/// keep linear invariants but not quadratic ones; this removes the per-step defect.
fn restore_momentum(state: &mut PerturbationState, target: [f64; 3]) {
    let mass = 1.0 + state.a.mean();
    let current = momentum(state);
    for (i, comp) in state.u.components_mut().iter_mut().enumerate() {
        comp.coeffs_mut()[0] -= (current[i] - target[i]) / mass;
    }
}

/// One step with a fresh stepper; prefer [`Stepper`] inside loops.
pub fn step(state: &PerturbationState, dt: f64, config: &SolverConfig) -> Result<PerturbationState> {
    Stepper::new(config, dt)?.step(state)
}

/// Why a run stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Positivity,
    Cfl,
    NonFinite,
}

impl FailureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureKind::Positivity => "positivity",
            FailureKind::Cfl => "cfl",
            FailureKind::NonFinite => "non-finite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub kind: FailureKind,
    pub message: String,
    /// Time of the last accepted state.
    pub last_valid_time: f64,
    pub step: usize,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: PerturbationState,
    pub dt: f64,
    pub steps_taken: usize,
    pub steps_planned: usize,
    pub failure: Option<RunFailure>,
}

impl RunSummary {
    pub fn completed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Courant number above which a run is stopped.
pub const COURANT_LIMIT: f64 = 1.0;

/// Step size and step count used for a run from `initial`.
pub fn plan_steps(initial: &PerturbationState, config: &SolverConfig) -> (f64, usize) {
    let target = match config.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => cfl_dt(initial, config),
    };
    let steps = ((config.t_end / target) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (config.t_end / steps as f64, steps)
}

/// Integrates from `initial` to `config.t_end`.
///
/// `observer` sees the initial state and every `config.cadence`-th step. Positivity,
/// CFL and non-finite failures end the run and are reported in the summary.
pub fn run(
    config: &SolverConfig,
    initial: PerturbationState,
    observer: &mut dyn FnMut(usize, &PerturbationState),
) -> Result<RunSummary> {
    config.validate()?;
    let (dt, steps) = plan_steps(&initial, config);
    let stepper = Stepper::new(config, dt)?;
    let t0 = initial.time;
    let mut state = initial;
    observer(0, &state);
    let dx = state.grid().spacing();
    let mut failure = None;
    let mut taken = 0;
    for n in 1..=steps {
        let courant = dt * max_signal_speed(&state, config) / dx;
        if !(courant <= COURANT_LIMIT) {
            failure = Some(RunFailure {
                kind: FailureKind::Cfl,
                message: format!("Courant number {courant:.4} exceeds {COURANT_LIMIT}"),
                last_valid_time: state.time,
                step: n,
            });
            break;
        }
        match stepper.step(&state) {
            Ok(mut next) => {
                next.time = t0 + n as f64 * dt;
                state = next;
                taken = n;
                if n % config.cadence == 0 {
                    observer(n, &state);
                }
            }
            Err(err) => {
                let kind = match err {
                    Error::Positivity { .. } => FailureKind::Positivity,
                    _ => FailureKind::NonFinite,
                };
                failure = Some(RunFailure {
                    kind,
                    message: err.to_string(),
                    last_valid_time: state.time,
                    step: n,
                });
                break;
            }
        }
    }
    Ok(RunSummary {
        final_state: state,
        dt,
        steps_taken: taken,
        steps_planned: steps,
        failure,
    })
}
