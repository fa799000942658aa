//! Energy-method diagnostics: physical and Sobolev energies, the weighted energy,
//! cross functionals and the composite functional, the dissipation monitor, the
//! interpolation check, remainder ratios and algebraic decay fits.

mod energy;
mod fit;
mod functional;
mod remainder;

pub use energy::{
    centered_derivative, dissipation, energy_identity, physical_energy, physical_energy_and_identity, sobolev_energy,
    weighted_energy, DifferenceOrder, EnergyIdentity,
};
pub use fit::{decay_fit, DecayFit, MAX_EXPONENT, MIN_FIT_SAMPLES};
pub use functional::{
    composite_x, composite_x_auto, cross_functionals, dissipation_monitor, interpolation_ratio, shrink_delta,
    Composite, DissipationMonitor, OrderParams, DEFAULT_CROSS_WEIGHTS,
};
pub use remainder::{remainder_ratios, remainder_sweep, RemainderRatios, RemainderSweep};

use crate::error::Result;
use crate::pressure::PressureLaw;
use crate::solver::SolverConfig;
use crate::state::{ConstraintResiduals, PerturbationState};

/// What an [`EnergyReport`] evaluates.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSettings {
    pub pressure: PressureLaw,
    pub nu: f64,
    pub w: [f64; 3],
    pub orders: OrderParams,
    /// Orders `j` of the reported `E_j`.
    pub energy_orders: Vec<u32>,
    pub delta_star: f64,
    pub cross_weights: [f64; 3],
}

/// Starting value of `delta_*` before any shrinking.
pub const DEFAULT_DELTA_STAR: f64 = 1.0;

impl ReportSettings {
    pub fn new(config: &SolverConfig, orders: OrderParams) -> Self {
        ReportSettings {
            pressure: config.pressure,
            nu: config.nu,
            w: config.w,
            orders,
            energy_orders: vec![0, 1, 3],
            delta_star: DEFAULT_DELTA_STAR,
            cross_weights: DEFAULT_CROSS_WEIGHTS,
        }
    }
}

/// Every diagnostic of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub time: f64,
    pub e_phys: f64,
    /// `nu ||grad h||_0^2`.
    pub dissipation: f64,
    /// `E_j` for the configured orders, in order.
    pub energies: Vec<f64>,
    /// `E_{L-r}`.
    pub e_low: f64,
    pub composite: Composite,
    pub residuals: ConstraintResiduals,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl EnergyReport {
    /// `E_N` of the configured orders.
    pub fn e_n(&self) -> f64 {
        self.composite.e_n
    }
}

pub fn energy_report(state: &PerturbationState, settings: &ReportSettings) -> Result<EnergyReport> {
    let (rho_min, rho_max) = state.rho_extrema();
    Ok(EnergyReport {
        time: state.time,
        e_phys: physical_energy(state, &settings.pressure)?,
        dissipation: dissipation(state, settings.nu),
        energies: settings
            .energy_orders
            .iter()
            .map(|&j| sobolev_energy(state, j as f64))
            .collect(),
        e_low: sobolev_energy(state, settings.orders.low()),
        composite: composite_x(
            state,
            &settings.pressure,
            settings.w,
            &settings.orders,
            settings.delta_star,
            settings.cross_weights,
        )?,
        residuals: state.constraint_residuals(),
        rho_min,
        rho_max,
    })
}
