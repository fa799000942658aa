use crate::error::{Error, Result};
use crate::linear::check_uniform;
use crate::pressure::PressureLaw;
use crate::solver::window_error;
use crate::spectral::samples_of;
use crate::state::PerturbationState;

/// `E_j = ||a||_j^2 + ||u||_j^2 + ||h||_j^2` with the inhomogeneous multiplier
/// `(1 + 4 pi^2 |k|^2)^j`.
pub fn sobolev_energy(state: &PerturbationState, j: f64) -> f64 {
    state.fields().iter().map(|f| f.sobolev_norm_sq(j)).sum()
}

/// `1/2 int (rho |u|^2 + |h|^2 + e(rho))`, integrated on the physical grid.
///
/// The cubic term `rho |u|^2` is integrated exactly on a dealiased grid.
pub fn physical_energy(state: &PerturbationState, pressure: &PressureLaw) -> Result<f64> {
    let [u0, u1, u2] = state.u.components();
    let g = samples_of(&[&state.a, u0, u1, u2]);
    let len = g[0].len() as f64;
    let mut kinetic = 0.0;
    let mut potential = 0.0;
    let mut min = f64::INFINITY;
    for x in 0..g[0].len() {
        let rho = 1.0 + g[0][x];
        min = min.min(rho);
        kinetic += rho * (g[1][x] * g[1][x] + g[2][x] * g[2][x] + g[3][x] * g[3][x]);
        potential += pressure.potential(rho);
    }
    if !(min > 0.0) {
        return Err(Error::Positivity {
            min,
            max: f64::NAN,
            lo: 0.0,
            hi: f64::INFINITY,
            stage: None,
        });
    }
    Ok(0.5 * ((kinetic + potential) / len + state.h.l2_norm_sq()))
}

/// Resistive dissipation `nu ||grad h||_0^2`.
pub fn dissipation(state: &PerturbationState, nu: f64) -> f64 {
    nu * state.h.components().iter().map(|c| c.lambda(1.0).l2_norm_sq()).sum::<f64>()
}

/// The weighted energy
///
/// ```text
/// int e(rho) + sum_{s=1..N} ||sqrt(p'/rho) Lambda^s a||^2
///            + sum_{s=0..N} (||sqrt(rho) Lambda^s u||^2 + ||Lambda^s h||^2)
/// ```
///
/// with the weights evaluated pointwise on the grid. With order `N + d` this is `Y`.
pub fn weighted_energy(state: &PerturbationState, pressure: &PressureLaw, order: u32) -> Result<f64> {
    let rho: Vec<f64> = state.rho_samples();
    let (min, max) = rho
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    window_error(min, max, pressure.window(), None)?;
    let len = rho.len() as f64;
    let sound: Vec<f64> = rho.iter().map(|&r| pressure.dp(r) / r).collect();
    let weighted = |f: &[f64], w: &[f64]| f.iter().zip(w).map(|(v, c)| c * v * v).sum::<f64>() / len;

    let mut total = rho.iter().map(|&r| pressure.potential(r)).sum::<f64>() / len;
    for s in 1..=order {
        let a = state.a.lambda(s as f64);
        total += weighted(&samples_of(&[&a])[0], &sound);
    }
    for s in 0..=order {
        let lifted: Vec<_> = state.u.components().iter().map(|c| c.lambda(s as f64)).collect();
        let g = samples_of(&lifted.iter().collect::<Vec<_>>());
        total += g.iter().map(|c| weighted(c, &rho)).sum::<f64>();
        total += state.h.components().iter().map(|c| c.lambda(s as f64).l2_norm_sq()).sum::<f64>();
    }
    Ok(total)
}

/// Stencil of a centered first-derivative approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DifferenceOrder {
    Second,
    Fourth,
    #[default]
    Sixth,
}

impl DifferenceOrder {
    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(DifferenceOrder::Second),
            4 => Ok(DifferenceOrder::Fourth),
            6 => Ok(DifferenceOrder::Sixth),
            other => Err(Error::InvalidInput(format!("difference order must be 2, 4 or 6, got {other}"))),
        }
    }

    /// Samples on each side of the center.
    pub fn half_width(self) -> usize {
        self.weights().len()
    }

    /// Weights of `f(t + j dt) - f(t - j dt)` for `j = 1, 2, ...`.
    fn weights(self) -> &'static [f64] {
        match self {
            DifferenceOrder::Second => &[0.5],
            DifferenceOrder::Fourth => &[2.0 / 3.0, -1.0 / 12.0],
            DifferenceOrder::Sixth => &[3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0],
        }
    }
}

/// Centered time derivative of a uniformly sampled series at its interior samples
/// `half_width..len - half_width`.
pub fn centered_derivative(values: &[f64], dt: f64, order: DifferenceOrder) -> Vec<f64> {
    let h = order.half_width();
    if values.len() <= 2 * h {
        return Vec::new();
    }
    (h..values.len() - h)
        .map(|i| {
            order
                .weights()
                .iter()
                .enumerate()
                .map(|(j, c)| c * (values[i + j + 1] - values[i - j - 1]))
                .sum::<f64>()
                / dt
        })
        .collect()
}

/// Residual of `dE/dt + D = 0` at the interior samples of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyIdentity {
    pub times: Vec<f64>,
    pub rate: Vec<f64>,
    pub dissipation: Vec<f64>,
    /// `dE/dt + D`.
    pub residual: Vec<f64>,
    /// Round-off level of the difference quotient; smaller residuals are
    /// indistinguishable from zero.
    pub noise: f64,
}

impl EnergyIdentity {
    /// `|dE/dt + D| / D` pointwise; zero where the residual is at round-off level.
    pub fn relative(&self) -> Vec<f64> {
        self.residual
            .iter()
            .zip(&self.dissipation)
            .map(|(&r, &d)| {
                if r.abs() <= self.noise {
                    0.0
                } else if d > 0.0 {
                    r.abs() / d
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }

    pub fn max_relative(&self) -> f64 {
        self.relative().into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Checks the energy identity on a uniformly sampled series of energies and
/// dissipation rates.
pub fn energy_identity(
    times: &[f64],
    energy: &[f64],
    dissipation: &[f64],
    order: DifferenceOrder,
) -> Result<EnergyIdentity> {
    if energy.len() != times.len() || dissipation.len() != times.len() {
        return Err(Error::InvalidInput("series lengths differ".into()));
    }
    let h = order.half_width();
    let dt = check_uniform(times, (2 * h + 1).max(3))?;
    let rate = centered_derivative(energy, dt, order);
    let interior = h..times.len() - h;
    let dissipation = dissipation[interior.clone()].to_vec();
    let residual = rate.iter().zip(&dissipation).map(|(r, d)| r + d).collect();
    let peak = energy.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let stencil: f64 = order.weights().iter().map(|c| 2.0 * c.abs()).sum();
    Ok(EnergyIdentity {
        times: times[interior].to_vec(),
        rate,
        dissipation,
        residual,
        noise: 4.0 * f64::EPSILON * stencil * peak / dt,
    })
}

/// Physical energy along a trajectory together with the identity residual.
pub fn physical_energy_and_identity(
    trajectory: &[PerturbationState],
    pressure: &PressureLaw,
    nu: f64,
    order: DifferenceOrder,
) -> Result<(Vec<f64>, EnergyIdentity)> {
    let times: Vec<f64> = trajectory.iter().map(|s| s.time).collect();
    let energy = trajectory
        .iter()
        .map(|s| physical_energy(s, pressure))
        .collect::<Result<Vec<_>>>()?;
    let dissipation: Vec<f64> = trajectory.iter().map(|s| self::dissipation(s, nu)).collect();
    let identity = energy_identity(&times, &energy, &dissipation, order)?;
    Ok((energy, identity))
}
