use std::f64::consts::PI;

use num_complex::Complex64;

use super::config::SolverConfig;
use super::init::window_error;
use crate::error::Result;
use crate::spectral::{fields_from_samples, samples_of, Grid3, SpectralField, VectorField};
use crate::state::PerturbationState;

const TWO_PI: f64 = 2.0 * PI;

/// Time derivative of a perturbation state.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub da: SpectralField,
    pub du: VectorField,
    pub dh: VectorField,
}

impl Tendency {
    pub fn as_state(&self, time: f64) -> PerturbationState {
        PerturbationState {
            a: self.da.clone(),
            u: self.du.clone(),
            h: self.dh.clone(),
            time,
        }
    }
}

/// Tendency without the resistive term `nu Delta h`.
///
/// Mass and momentum are advanced in conservative form:
///
/// ```text
/// rho_t = -div m,                     m = rho u
/// m_t   = -div(rho u u - h h) - grad(p + |h|^2/2 + w.h) + (w.grad) h
/// u_t   = (m_t - rho_t u) / rho       (pointwise on the grid)
/// h_t   = P curl(u x (w + h))          (P the Leray projector)
/// ```
///
/// Every product is formed from band-limited inputs and truncated afterwards, so
/// mass and the mean magnetic field are conserved exactly by the semi-discrete
/// system. The truncation of `u_t` is followed by a uniform correction of its mean
/// that keeps `d/dt int rho u = 0` exactly as well.
pub(crate) fn transport(state: &PerturbationState, config: &SolverConfig) -> Result<Tendency> {
    let grid = state.grid();
    let w = config.w;
    let [u0, u1, u2] = state.u.components();
    let [h0, h1, h2] = state.h.components();
    let g = samples_of(&[&state.a, u0, u1, u2, h0, h1, h2]);
    let (a, u, h) = (&g[0], [&g[1], &g[2], &g[3]], [&g[4], &g[5], &g[6]]);
    let len = grid.len();

    let rho: Vec<f64> = a.iter().map(|v| 1.0 + v).collect();
    let (min, max) = rho
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    window_error(min, max, config.positivity_window, None)?;

    // Grid products: momentum m (3), symmetric flux (6), total pressure (1), emf u x H (3).
    let mut products: Vec<Vec<f64>> = vec![vec![0.0; len]; 13];
    for x in 0..len {
        let r = rho[x];
        let v = [u[0][x], u[1][x], u[2][x]];
        let b = [h[0][x], h[1][x], h[2][x]];
        let big_h = [w[0] + b[0], w[1] + b[1], w[2] + b[2]];
        for i in 0..3 {
            products[i][x] = r * v[i];
        }
        for (slot, &(i, j)) in PAIRS.iter().enumerate() {
            products[3 + slot][x] = r * v[i] * v[j] - b[i] * b[j];
        }
        products[9][x] = config.pressure.p(r) + 0.5 * (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]);
        products[10][x] = v[1] * big_h[2] - v[2] * big_h[1];
        products[11][x] = v[2] * big_h[0] - v[0] * big_h[2];
        products[12][x] = v[0] * big_h[1] - v[1] * big_h[0];
    }
    let refs: Vec<&[f64]> = products.iter().map(Vec::as_slice).collect();
    let hat = fields_from_samples(grid, &refs, true);
    drop(products);
    let coeff = |f: usize, idx: usize| hat[f].coeffs()[idx];
    let flux = |i: usize, j: usize, idx: usize| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        coeff(3 + SLOT[i][j - i], idx)
    };

    let ci = Complex64::new(0.0, TWO_PI);
    let hc = [h0.coeffs(), h1.coeffs(), h2.coeffs()];
    let zero = || vec![Complex64::default(); len];
    let mut rho_t = zero();
    let mut mt = [zero(), zero(), zero()];
    let mut dh = [zero(), zero(), zero()];
    for (idx, kd) in retained_modes(grid) {
        let wk = w[0] * kd[0] + w[1] * kd[1] + w[2] * kd[2];
        let wh = w[0] * hc[0][idx] + w[1] * hc[1][idx] + w[2] * hc[2][idx];
        let pressure = coeff(9, idx) + wh;
        rho_t[idx] = -ci * (kd[0] * coeff(0, idx) + kd[1] * coeff(1, idx) + kd[2] * coeff(2, idx));
        let emf = [coeff(10, idx), coeff(11, idx), coeff(12, idx)];
        for i in 0..3 {
            let div = kd[0] * flux(i, 0, idx) + kd[1] * flux(i, 1, idx) + kd[2] * flux(i, 2, idx);
            mt[i][idx] = -ci * (div + kd[i] * pressure) + ci * wk * hc[i][idx];
            let (j, l) = ((i + 1) % 3, (i + 2) % 3);
            // a curl is divergence free, so no projection is needed
            dh[i][idx] = ci * (kd[j] * emf[l] - kd[l] * emf[j]);
        }
    }
    drop(hat);
    let [m0, m1, m2] = mt.map(|c| SpectralField::from_coeffs(grid, c));
    let da = SpectralField::from_coeffs(grid, rho_t);

    let back = samples_of(&[&da, &m0, &m1, &m2]);
    let rho_t = &back[0];
    let mut accel: Vec<Vec<f64>> = vec![vec![0.0; len]; 3];
    for x in 0..len {
        let inv = 1.0 / rho[x];
        for i in 0..3 {
            accel[i][x] = (back[1 + i][x] - rho_t[x] * u[i][x]) * inv;
        }
    }
    let du = fields_from_samples(grid, &[&accel[0], &accel[1], &accel[2]], true);
    let mut du: [SpectralField; 3] = du.try_into().expect("three components");
    // Truncating u_t perturbs d/dt int rho u; a uniform acceleration restores it.
    let mass = 1.0 + state.a.mean();
    for (i, d) in du.iter_mut().enumerate() {
        let drift = d.mean() + state.a.inner(d)? + da.inner(state.u.component(i))?;
        d.coeffs_mut()[0] -= drift / mass;
    }
    let [d0, d1, d2] = du;
    Ok(Tendency {
        da,
        du: VectorField::new([d0, d1, d2]),
        dh: VectorField::new(dh.map(|c| SpectralField::from_coeffs(grid, c))),
    })
}

const PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
/// `SLOT[i][j - i]` is the position of `(i, j)` in `PAIRS` for `i <= j`.
const SLOT: [[usize; 3]; 3] = [[0, 1, 2], [3, 4, 0], [5, 0, 0]];

/// Storage index and derivative wave vector of every retained mode.
pub(crate) fn retained_modes(grid: Grid3) -> impl Iterator<Item = (usize, [f64; 3])> {
    let n = grid.n();
    let kept: Vec<usize> = grid
        .axis_mask()
        .iter()
        .enumerate()
        .filter_map(|(i, &k)| k.then_some(i))
        .collect();
    let kd: Vec<f64> = (0..n).map(|i| grid.derivative_wavenumber(i) as f64).collect();
    let mut out = Vec::with_capacity(kept.len().pow(3));
    for &i0 in &kept {
        for &i1 in &kept {
            for &i2 in &kept {
                out.push((grid.flat(i0, i1, i2), [kd[i0], kd[i1], kd[i2]]));
            }
        }
    }
    out.into_iter()
}

/// Full right-hand side including resistive diffusion.
pub fn rhs(state: &PerturbationState, config: &SolverConfig) -> Result<Tendency> {
    let mut t = transport(state, config)?;
    let nu = config.nu;
    for (d, h) in t.dh.components_mut().iter_mut().zip(state.h.components()) {
        d.axpy(nu, &h.laplacian());
    }
    Ok(t)
}

/// Resistive integrating factors `exp(-nu 4 pi^2 |k|^2 tau)` for every stored mode.
pub(crate) fn diffusion_factors(grid: Grid3, nu: f64, tau: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|idx| {
            let k = grid.mode(idx);
            let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
            (-nu * TWO_PI * TWO_PI * k2 * tau).exp()
        })
        .collect()
}
