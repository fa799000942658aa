use crate::diophantine::default_w;
use crate::error::{Error, Result};
use crate::linear::LinearParams;
use crate::pressure::{PressureLaw, DEFAULT_GAMMA, DEFAULT_WINDOW};
use crate::spectral::Grid3;

/// Time step selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    /// CFL step from the initial state, shortened so that `t_end` is a whole number of steps.
    Auto,
    Fixed(f64),
}

/// Initial perturbation before constraint preparation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    Zero,
    /// Independent random fields on `0 < |k|_inf <= kmax`; `amplitude` is the RMS of each
    /// scalar component.
    Random { amplitude: f64, kmax: i64 },
    /// `h = amplitude * e cos(2 pi k.x)` with `e` a unit vector orthogonal to `k`.
    MagneticMode { k: [i64; 3], amplitude: f64 },
    /// Acoustic wave `a = amplitude cos(2 pi k.x)`, `u` along `k` in phase.
    AcousticMode { k: [i64; 3], amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Modes per axis.
    pub n: usize,
    pub dt: TimeStep,
    pub t_end: f64,
    /// Resistivity.
    pub nu: f64,
    pub pressure: PressureLaw,
    /// Background magnetic field.
    pub w: [f64; 3],
    pub cfl_number: f64,
    /// Open density interval outside which a run is aborted.
    pub positivity_window: (f64, f64),
    pub seed: u64,
    /// Observer cadence in steps.
    pub cadence: usize,
    pub init: InitialData,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n: 32,
            dt: TimeStep::Auto,
            t_end: 10.0,
            nu: 1.0,
            pressure: PressureLaw::polytropic(DEFAULT_GAMMA).expect("default gamma is valid"),
            w: default_w(2.0),
            cfl_number: 0.4,
            positivity_window: DEFAULT_WINDOW,
            seed: 0,
            cadence: 10,
            init: InitialData::Random {
                amplitude: 1e-2,
                kmax: 1,
            },
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        Grid3::new(self.n)?;
        if let TimeStep::Fixed(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Config(format!("time.dt must be positive, got {dt}")));
            }
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Config(format!("time.t_end must be positive, got {}", self.t_end)));
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("physics.nu must be positive, got {}", self.nu)));
        }
        if !(self.cfl_number > 0.0 && self.cfl_number < 1.0) {
            return Err(Error::Config(format!(
                "physics.cfl must lie in (0, 1), got {}",
                self.cfl_number
            )));
        }
        if self.w.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config(format!("physics.w must be finite, got {:?}", self.w)));
        }
        let (lo, hi) = self.positivity_window;
        if !(0.0 <= lo && lo < 1.0 && 1.0 < hi) {
            return Err(Error::Config(format!("positivity window ({lo}, {hi}) must contain 1")));
        }
        if self.cadence == 0 {
            return Err(Error::Config("output.cadence must be at least 1".into()));
        }
        match self.init {
            InitialData::Random { amplitude, kmax } => {
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::Config(format!("init.amplitude must be nonnegative, got {amplitude}")));
                }
                let grid = self.grid()?;
                if kmax < 1 || kmax > grid.cutoff() {
                    return Err(Error::Config(format!(
                        "init.kmax must lie in [1, {}] for n = {}, got {kmax}",
                        grid.cutoff(),
                        self.n
                    )));
                }
            }
            InitialData::MagneticMode { k, amplitude } | InitialData::AcousticMode { k, amplitude } => {
                if k == [0, 0, 0] || !self.grid()?.is_retained(k) {
                    return Err(Error::Config(format!("init mode {k:?} must be nonzero and retained")));
                }
                if !amplitude.is_finite() {
                    return Err(Error::Config("init.amplitude must be finite".into()));
                }
            }
            InitialData::Zero => {}
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.n)
    }

    pub fn linear_params(&self) -> LinearParams {
        LinearParams {
            w: self.w,
            beta: self.pressure.beta,
            nu: self.nu,
        }
    }
}
