use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{InitialData, SolverConfig};
use crate::error::{Error, Result};
use crate::linear::transverse_basis;
use crate::spectral::{Grid3, SpectralField, VectorField};
use crate::state::PerturbationState;

/// Unconstrained initial fields.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFields {
    pub a: SpectralField,
    pub u: VectorField,
    pub h: VectorField,
}

fn scaled_to_rms(v: VectorField, rms: f64) -> VectorField {
    let norm = v.l2_norm();
    if norm > 0.0 {
        v.scale(rms * 3f64.sqrt() / norm)
    } else {
        v
    }
}

/// Draws the raw fields described by `init`; random data is seeded by `seed`.
pub fn generate_raw(grid: Grid3, init: InitialData, seed: u64) -> Result<RawFields> {
    let zeros = RawFields {
        a: SpectralField::zeros(grid),
        u: VectorField::zeros(grid),
        h: VectorField::zeros(grid),
    };
    match init {
        InitialData::Zero => Ok(zeros),
        InitialData::Random { amplitude, kmax } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut draw = || SpectralField::random_band_limited(grid, kmax, amplitude, &mut rng);
            let a = draw();
            let u = VectorField::new([draw(), draw(), draw()]);
            let h = VectorField::new([draw(), draw(), draw()]).leray_project();
            Ok(RawFields {
                a,
                u,
                h: scaled_to_rms(h, amplitude),
            })
        }
        InitialData::MagneticMode { k, amplitude } => {
            let (e, _) = transverse_basis(k);
            let comps = std::array::from_fn(|i| {
                SpectralField::from_modes(grid, &[(k, (0.5 * amplitude * e[i]).into())])
            });
            let [x, y, z] = comps;
            Ok(RawFields {
                h: VectorField::new([x?, y?, z?]),
                ..zeros
            })
        }
        InitialData::AcousticMode { k, amplitude } => {
            let a = SpectralField::from_modes(grid, &[(k, (0.5 * amplitude).into())])?;
            let kn = (k.iter().map(|c| (c * c) as f64).sum::<f64>()).sqrt();
            let u = VectorField::new(std::array::from_fn(|i| a.scale(k[i] as f64 / kn)));
            Ok(RawFields { a, u, ..zeros })
        }
    }
}

/// Enforces the admissibility constraints on raw data:
/// `int rho = 1`, `int h = 0`, `div h = 0`, `int rho u = 0`, band-limited fields,
/// and `rho` inside the positivity window.
pub fn prepare_initial_data(raw: RawFields, window: (f64, f64)) -> Result<PerturbationState> {
    let grid = raw.a.grid();
    grid.check_same(&raw.u.grid())?;
    grid.check_same(&raw.h.grid())?;
    let (_, mut a) = raw.a.mean_and_center();
    a.truncate_mut();
    let mut h = raw.h.map(|c| c.mean_and_center().1);
    h.truncate_mut();
    h.leray_project_mut();
    let mut u = raw.u;
    u.truncate_mut();
    let mut state = PerturbationState::new(a, u, h, 0.0)?;
    let momentum = state.constraint_residuals().momentum;
    for (i, comp) in state.u.components_mut().iter_mut().enumerate() {
        let mut shift = comp.coeffs()[0];
        shift.re -= momentum[i];
        comp.coeffs_mut()[0] = shift;
    }
    check_window(&state, window, None)?;
    Ok(state)
}

/// Raw generation followed by preparation, as configured.
pub fn initial_state(config: &SolverConfig) -> Result<PerturbationState> {
    config.validate()?;
    let raw = generate_raw(config.grid()?, config.init, config.seed)?;
    prepare_initial_data(raw, config.positivity_window)
}

pub(crate) fn check_window(state: &PerturbationState, window: (f64, f64), stage: Option<usize>) -> Result<()> {
    let (min, max) = state.rho_extrema();
    window_error(min, max, window, stage)
}

pub(crate) fn window_error(min: f64, max: f64, window: (f64, f64), stage: Option<usize>) -> Result<()> {
    let (lo, hi) = window;
    if min > lo && max < hi && min.is_finite() && max.is_finite() {
        Ok(())
    } else {
        Err(Error::Positivity {
            min,
            max,
            lo,
            hi,
            stage,
        })
    }
}
