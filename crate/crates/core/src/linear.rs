//! Mode-by-mode analysis of the linearization about `(1, 0, w)`:
//!
//! ```text
//! a_t + div u = 0
//! u_t + beta grad a - (w . grad) h + grad (w . h) = 0
//! h_t - nu Delta h - (w . grad) u + w div u = 0
//! ```
//!
//! For a wave vector `k` the state is reduced to six components
//! `(a, u, eta_1, eta_2)` where `h = eta_1 e_1 + eta_2 e_2` in an orthonormal
//! frame of the plane orthogonal to `k`.

use std::f64::consts::PI;

use nalgebra::{Matrix6, SMatrix, Vector6, SVD};
use num_complex::Complex64;

use crate::diophantine::{check_band, half_band_modes};
use crate::error::{Error, Result};
use crate::spectral::{Grid3, SpectralField};
use crate::state::PerturbationState;

const TWO_PI: f64 = 2.0 * PI;

/// Eigenvalues with `|Re lambda|` at most this are classified as neutral.
pub const NEUTRAL_TOL: f64 = 1e-10;

pub type Matrix7c = SMatrix<Complex64, 7, 7>;
pub type Vector7c = SMatrix<Complex64, 7, 1>;

/// Physical parameters of the linearized system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    pub w: [f64; 3],
    /// Squared sound speed `p'(1)`.
    pub beta: f64,
    /// Resistivity.
    pub nu: f64,
}

impl LinearParams {
    pub fn new(w: [f64; 3], beta: f64, nu: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidInput(format!("nu must be positive, got {nu}")));
        }
        if w.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("w must be finite, got {w:?}")));
        }
        Ok(LinearParams { w, beta, nu })
    }
}

/// Linear dynamics of a single Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSystem {
    k: [i64; 3],
    params: LinearParams,
    e1: [f64; 3],
    e2: [f64; 3],
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Orthonormal pair spanning the plane orthogonal to `k`, identical for `k` and `-k`.
pub fn transverse_basis(k: [i64; 3]) -> ([f64; 3], [f64; 3]) {
    let sign = if k.iter().copied().find(|&c| c != 0).unwrap_or(1) > 0 { 1.0 } else { -1.0 };
    let n = unit([sign * k[0] as f64, sign * k[1] as f64, sign * k[2] as f64]);
    let mut axis = 0;
    for i in 1..3 {
        if n[i].abs() < n[axis].abs() {
            axis = i;
        }
    }
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let proj = n[axis];
    let e1 = unit([e[0] - proj * n[0], e[1] - proj * n[1], e[2] - proj * n[2]]);
    let e2 = cross3(n, e1);
    (e1, e2)
}

impl ModeSystem {
    pub fn new(k: [i64; 3], params: LinearParams) -> Result<Self> {
        if k == [0, 0, 0] {
            return Err(Error::InvalidInput("mode system needs k != 0".into()));
        }
        let (e1, e2) = transverse_basis(k);
        Ok(ModeSystem { k, params, e1, e2 })
    }

    pub fn k(&self) -> [i64; 3] {
        self.k
    }

    pub fn params(&self) -> LinearParams {
        self.params
    }

    pub fn basis(&self) -> ([f64; 3], [f64; 3]) {
        (self.e1, self.e2)
    }

    fn kappa(&self) -> [f64; 3] {
        self.k.map(|c| TWO_PI * c as f64)
    }

    /// Real matrix acting on `(a, v, eta_1, eta_2)` with `v = i u`.
    pub fn real_matrix(&self) -> Matrix6<f64> {
        let LinearParams { w, beta, nu } = self.params;
        let kappa = self.kappa();
        let wk = dot3(w, kappa);
        let k2 = dot3(kappa, kappa);
        let basis = [self.e1, self.e2];
        let mut m = Matrix6::zeros();
        for i in 0..3 {
            m[(0, 1 + i)] = -kappa[i];
            m[(1 + i, 0)] = beta * kappa[i];
            for (j, e) in basis.iter().enumerate() {
                m[(1 + i, 4 + j)] = -wk * e[i] + kappa[i] * dot3(w, *e);
                m[(4 + j, 1 + i)] = wk * e[i] - dot3(*e, w) * kappa[i];
            }
        }
        m[(4, 4)] = -nu * k2;
        m[(5, 5)] = -nu * k2;
        m
    }

    /// Complex matrix acting on the Fourier amplitudes `(a, u, eta_1, eta_2)`.
    pub fn matrix(&self) -> Matrix6<Complex64> {
        let d = Self::velocity_phase();
        let r = self.real_matrix();
        Matrix6::from_fn(|p, q| r[(p, q)] * d[q] / d[p])
    }

    fn velocity_phase() -> [Complex64; 6] {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        [one, i, i, i, one, one]
    }

    /// Unreduced action on `(a, u, h)` with all three components of `h`.
    pub fn full_matrix(&self) -> Matrix7c {
        let LinearParams { w, beta, nu } = self.params;
        let kappa = self.kappa();
        let wk = dot3(w, kappa);
        let k2 = dot3(kappa, kappa);
        let i = Complex64::new(0.0, 1.0);
        let mut m = Matrix7c::zeros();
        for p in 0..3 {
            m[(0, 1 + p)] = -i * kappa[p];
            m[(1 + p, 0)] = -i * beta * kappa[p];
            m[(1 + p, 4 + p)] += i * wk;
            m[(4 + p, 1 + p)] += i * wk;
            m[(4 + p, 4 + p)] += Complex64::from(-nu * k2);
            for q in 0..3 {
                m[(1 + p, 4 + q)] -= i * kappa[p] * w[q];
                m[(4 + p, 1 + q)] -= i * w[p] * kappa[q];
            }
        }
        m
    }

    /// Embeds a reduced vector into `(a, u, h)`.
    pub fn lift(&self, y: &Vector6<Complex64>) -> Vector7c {
        let mut x = Vector7c::zeros();
        for p in 0..4 {
            x[p] = y[p];
        }
        for p in 0..3 {
            x[4 + p] = y[4] * self.e1[p] + y[5] * self.e2[p];
        }
        x
    }

    /// Projects `(a, u, h)` onto the reduced coordinates, dropping `h` parallel to `k`.
    pub fn reduce(&self, x: &Vector7c) -> Vector6<Complex64> {
        let h = [x[4], x[5], x[6]];
        let proj = |e: [f64; 3]| h[0] * e[0] + h[1] * e[1] + h[2] * e[2];
        Vector6::new(x[0], x[1], x[2], x[3], proj(self.e1), proj(self.e2))
    }
}

/// One eigenpair of the complex mode matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    /// Unit eigenvector in `(a, u, eta_1, eta_2)` coordinates.
    pub vector: Vector6<Complex64>,
    /// `||A v - lambda v||`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub k: [i64; 3],
    /// Sorted by real part, then imaginary part.
    pub pairs: Vec<EigenPair>,
    pub spectral_abscissa: f64,
    /// Indices into `pairs` with `|Re lambda| <= NEUTRAL_TOL`.
    pub neutral: Vec<usize>,
}

impl SpectrumReport {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn neutral_count(&self) -> usize {
        self.neutral.len()
    }

    pub fn max_residual(&self) -> f64 {
        self.pairs.iter().map(|p| p.residual).fold(0.0, f64::max)
    }

    /// Eigenvalue with the largest real part.
    pub fn leading(&self) -> Complex64 {
        self.pairs.last().map(|p| p.value).unwrap_or_default()
    }
}

/// Eigen-decomposition of the mode matrix.
///
/// Eigenvalues come from the real Schur form of the similar real matrix;
/// eigenvectors are the right singular vectors of `A - lambda I` for each cluster of
/// (numerically) equal eigenvalues.
pub fn mode_spectrum(ms: &ModeSystem) -> Result<SpectrumReport> {
    let real = ms.real_matrix();
    let scale = real.abs().max().max(1.0);
    let schur = nalgebra::Schur::try_new(real, f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Eigen(format!("Schur iteration did not converge at k={:?}", ms.k)))?;
    let mut values: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Eigen(format!("non-finite eigenvalue at k={:?}", ms.k)));
    }
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let a = ms.matrix();
    let cluster_tol = 1e-7 * scale;
    let mut pairs = Vec::with_capacity(6);
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).norm() <= cluster_tol {
            end += 1;
        }
        let mean = values[start..end].iter().sum::<Complex64>() / (end - start) as f64;
        let shifted = a - Matrix6::<Complex64>::identity() * mean;
        let svd = SVD::try_new(shifted, false, true, f64::EPSILON, 100_000)
            .ok_or_else(|| Error::Eigen(format!("SVD did not converge at k={:?}", ms.k)))?;
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::Eigen("SVD returned no right singular vectors".into()))?;
        let mut order: Vec<usize> = (0..6).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        for (slot, &value) in values[start..end].iter().enumerate() {
            let row = order[slot];
            let vector = Vector6::from_fn(|p, _| v_t[(row, p)].conj());
            let residual = (a * vector - vector * value).norm();
            pairs.push(EigenPair {
                value,
                vector,
                residual,
            });
        }
        start = end;
    }

    let spectral_abscissa = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let neutral = pairs
        .iter()
        .enumerate()
        .filter(|(_, p)| p.value.re.abs() <= NEUTRAL_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(SpectrumReport {
        k: ms.k,
        pairs,
        spectral_abscissa,
        neutral,
    })
}

/// Summary line of one mode in a band scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub k: [i64; 3],
    pub re_max: f64,
    pub im_at_max: f64,
    pub neutral_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandScan {
    pub band: i64,
    pub spectral_abscissa: f64,
    pub attaining_k: [i64; 3],
    /// One row per `{k, -k}` pair (the representative with positive leading component);
    /// the spectrum at `-k` is the complex conjugate.
    pub rows: Vec<ScanRow>,
    pub max_residual: f64,
}

impl BandScan {
    pub fn neutral_modes(&self) -> impl Iterator<Item = &ScanRow> {
        self.rows.iter().filter(|r| r.neutral_count > 0)
    }
}

/// Spectra of every mode with `0 < |k| <= band`.
pub fn band_spectrum_scan(params: LinearParams, band: i64) -> Result<BandScan> {
    check_band(band, crate::diophantine::DEFAULT_SCAN_BUDGET)?;
    let mut rows = Vec::new();
    let mut abscissa = f64::NEG_INFINITY;
    let mut attaining = [0; 3];
    let mut max_residual: f64 = 0.0;
    for k in half_band_modes(band) {
        let report = mode_spectrum(&ModeSystem::new(k, params)?)?;
        let lead = report.leading();
        if report.spectral_abscissa > abscissa {
            abscissa = report.spectral_abscissa;
            attaining = k;
        }
        max_residual = max_residual.max(report.max_residual());
        rows.push(ScanRow {
            k,
            re_max: lead.re,
            im_at_max: lead.im,
            neutral_count: report.neutral_count(),
        });
    }
    Ok(BandScan {
        band,
        spectral_abscissa: abscissa,
        attaining_k: attaining,
        rows,
        max_residual,
    })
}

/// Exact per-mode propagator `exp(A dt)` of the linear system on a grid.
#[derive(Debug, Clone)]
pub struct LinearPropagator {
    grid: Grid3,
    dt: f64,
    modes: Vec<(usize, ModeSystem, Matrix6<f64>)>,
}

fn has_nyquist(grid: Grid3, k: [i64; 3]) -> bool {
    let half = (grid.n() / 2) as i64;
    k.iter().any(|&c| c == -half)
}

fn is_canonical(k: [i64; 3]) -> bool {
    k.iter().copied().find(|&c| c != 0).is_some_and(|c| c > 0)
}

impl LinearPropagator {
    pub fn new(grid: Grid3, params: LinearParams, dt: f64) -> Result<Self> {
        let mut modes = Vec::new();
        for idx in 0..grid.len() {
            let k = grid.mode(idx);
            if !is_canonical(k) || has_nyquist(grid, k) {
                continue;
            }
            let ms = ModeSystem::new(k, params)?;
            let exp = (ms.real_matrix() * dt).exp();
            modes.push((idx, ms, exp));
        }
        Ok(LinearPropagator { grid, dt, modes })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by `dt`; components of `h` parallel to `k` are dropped.
    pub fn apply(&self, state: &PerturbationState) -> Result<PerturbationState> {
        self.grid.check_same(&state.grid())?;
        let i = Complex64::new(0.0, 1.0);
        let mut out = PerturbationState::zeros(self.grid);
        out.time = state.time + self.dt;
        let src = state.fields();
        let mut coeffs: Vec<Vec<Complex64>> = src.iter().map(|f| f.coeffs().to_vec()).collect();
        for &(idx, ref ms, ref exp) in &self.modes {
            let (e1, e2) = ms.basis();
            let h = [src[4].coeffs()[idx], src[5].coeffs()[idx], src[6].coeffs()[idx]];
            let proj = |e: [f64; 3]| h[0] * e[0] + h[1] * e[1] + h[2] * e[2];
            let y = Vector6::new(
                src[0].coeffs()[idx],
                i * src[1].coeffs()[idx],
                i * src[2].coeffs()[idx],
                i * src[3].coeffs()[idx],
                proj(e1),
                proj(e2),
            );
            let z = exp.map(Complex64::from) * y;
            let mirror = self.grid.mirror(idx);
            let mut put = |field: usize, value: Complex64| {
                coeffs[field][idx] = value;
                coeffs[field][mirror] = value.conj();
            };
            put(0, z[0]);
            for p in 0..3 {
                put(1 + p, -i * z[1 + p]);
                put(4 + p, z[4] * e1[p] + z[5] * e2[p]);
            }
        }
        for (dst, c) in out.fields_mut().into_iter().zip(coeffs) {
            *dst = SpectralField::from_coeffs(self.grid, c);
        }
        Ok(out)
    }
}

fn check_linear_input(state: &PerturbationState) -> Result<()> {
    let grid = state.grid();
    let scale = 1.0 + state.l2_norm_sq().sqrt();
    let div = state.h.divergence().l2_norm();
    if div > 1e-10 * (1.0 + state.h.sobolev_norm(1.0)) {
        return Err(Error::Constraint(format!("div h = {div:e} is not zero")));
    }
    for (name, f) in ["a", "u1", "u2", "u3", "h1", "h2", "h3"].iter().zip(state.fields()) {
        if f.mean().abs() > 1e-12 * scale {
            return Err(Error::Constraint(format!("mean of {name} is {:e}, expected 0", f.mean())));
        }
        for idx in 0..grid.len() {
            if has_nyquist(grid, grid.mode(idx)) && f.coeffs()[idx].norm() > 0.0 {
                return Err(Error::InvalidInput(format!(
                    "{name} carries energy on the Nyquist plane; band-limit the data first"
                )));
            }
        }
    }
    Ok(())
}

/// Exact solution of the linear system at time `initial.time + t`.
pub fn evolve_linear(initial: &PerturbationState, params: LinearParams, t: f64) -> Result<PerturbationState> {
    check_linear_input(initial)?;
    LinearPropagator::new(initial.grid(), params, t)?.apply(initial)
}

/// `steps + 1` exact samples spaced by `dt`, starting with `initial`.
pub fn linear_trajectory(
    initial: &PerturbationState,
    params: LinearParams,
    dt: f64,
    steps: usize,
) -> Result<Vec<PerturbationState>> {
    check_linear_input(initial)?;
    let prop = LinearPropagator::new(initial.grid(), params, dt)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(initial.clone());
    for _ in 0..steps {
        let next = prop.apply(out.last().expect("trajectory is nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

/// Quadratic energy `1/2 (beta ||a||^2 + ||u||^2 + ||h||^2)` and dissipation
/// `nu ||grad h||^2` of a linear state.
pub fn linear_energy(state: &PerturbationState, params: LinearParams) -> (f64, f64) {
    let energy = 0.5 * (params.beta * state.a.l2_norm_sq() + state.u.l2_norm_sq() + state.h.l2_norm_sq());
    let grad2: f64 = state
        .h
        .components()
        .iter()
        .map(|c| c.lambda(1.0).l2_norm_sq())
        .sum();
    (energy, params.nu * grad2)
}

/// Residual of the wave identity at one interior sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveResidual {
    pub time: f64,
    /// `||phi_tt - nu Delta phi_t - |w|^2 Delta phi - beta Delta_w a||_0` with `phi = h . w`.
    pub residual: f64,
    /// Largest `L2` norm among the four terms, for relative comparisons.
    pub scale: f64,
}

impl WaveResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            0.0
        }
    }
}

pub(crate) fn check_uniform(times: &[f64], min_samples: usize) -> Result<f64> {
    if times.len() < min_samples {
        return Err(Error::InvalidInput(format!(
            "need at least {min_samples} samples, got {}",
            times.len()
        )));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("sample times must increase".into()));
    }
    for pair in times.windows(2) {
        if ((pair[1] - pair[0]) - dt).abs() > 1e-6 * dt {
            return Err(Error::InvalidInput("samples are not uniformly spaced".into()));
        }
    }
    Ok(dt)
}

/// Evaluates the second-order wave identity for `phi = h . w` along a uniformly
/// sampled trajectory using centered differences in time.
pub fn wave_identity_residual(
    trajectory: &[PerturbationState],
    params: LinearParams,
) -> Result<Vec<WaveResidual>> {
    let times: Vec<f64> = trajectory.iter().map(|s| s.time).collect();
    let dt = check_uniform(&times, 3)?;
    let LinearParams { w, beta, nu } = params;
    let w2 = dot3(w, w);
    let phis: Vec<SpectralField> = trajectory.iter().map(|s| s.h.dot_const(w)).collect();
    let w_nonzero = w.iter().any(|&c| c != 0.0);
    let mut out = Vec::with_capacity(trajectory.len() - 2);
    for n in 1..trajectory.len() - 1 {
        let mut phi_tt = phis[n + 1].add(&phis[n - 1]);
        phi_tt.axpy(-2.0, &phis[n]);
        phi_tt.scale_mut(1.0 / (dt * dt));
        let phi_t = phis[n + 1].sub(&phis[n - 1]).scale(0.5 / dt);
        let diffusion = phi_t.laplacian().scale(nu);
        let wave = phis[n].laplacian().scale(w2);
        let coupling = if w_nonzero {
            trajectory[n].a.laplacian_w(w).scale(beta)
        } else {
            SpectralField::zeros(trajectory[n].grid())
        };
        let scale = [&phi_tt, &diffusion, &wave, &coupling]
            .iter()
            .map(|f| f.l2_norm())
            .fold(0.0, f64::max);
        let mut res = phi_tt;
        res.axpy(-1.0, &diffusion);
        res.axpy(-1.0, &wave);
        res.axpy(-1.0, &coupling);
        out.push(WaveResidual {
            time: times[n],
            residual: res.l2_norm(),
            scale,
        });
    }
    Ok(out)
}

/// Applies the complex mode matrices to every retained mode of `state`, giving the
/// linear part of the tendency.
pub fn linear_tendency(state: &PerturbationState, params: LinearParams) -> Result<PerturbationState> {
    let grid = state.grid();
    let mut out = PerturbationState::zeros(grid);
    out.time = state.time;
    let src = state.fields();
    let mut coeffs: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); grid.len()]; 7];
    for idx in 0..grid.len() {
        let k = grid.mode(idx);
        if !is_canonical(k) || has_nyquist(grid, k) {
            continue;
        }
        let m = ModeSystem::new(k, params)?.full_matrix();
        let x = Vector7c::from_fn(|p, _| src[p].coeffs()[idx]);
        let y = m * x;
        let mirror = grid.mirror(idx);
        for p in 0..7 {
            coeffs[p][idx] = y[p];
            coeffs[p][mirror] = y[p].conj();
        }
    }
    for (dst, c) in out.fields_mut().into_iter().zip(coeffs) {
        *dst = SpectralField::from_coeffs(grid, c);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(w: [f64; 3], beta: f64, nu: f64) -> LinearParams {
        LinearParams::new(w, beta, nu).unwrap()
    }

    #[test]
    fn basis_is_orthonormal_and_sign_invariant() {
        for k in [[1, 0, 0], [0, -2, 3], [1, 1, 1], [-3, 2, -1]] {
            let (e1, e2) = transverse_basis(k);
            let kf = k.map(|c| c as f64);
            assert!(dot3(e1, kf).abs() < 1e-14 && dot3(e2, kf).abs() < 1e-14);
            assert!((dot3(e1, e1) - 1.0).abs() < 1e-14 && dot3(e1, e2).abs() < 1e-14);
            assert_eq!(transverse_basis(k.map(|c| -c)), (e1, e2));
        }
    }

    #[test]
    fn decoupled_spectrum_without_background_field() {
        let ms = ModeSystem::new([1, 0, 0], params([0.0; 3], 1.0, 1.0)).unwrap();
        let rep = mode_spectrum(&ms).unwrap();
        let expected = [
            Complex64::new(-4.0 * PI * PI, 0.0),
            Complex64::new(-4.0 * PI * PI, 0.0),
            Complex64::new(0.0, -TWO_PI),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, TWO_PI),
        ];
        for (got, want) in rep.eigenvalues().iter().zip(expected) {
            assert!((got - want).norm() < 1e-10, "{got} vs {want}");
        }
        assert!(rep.max_residual() < 1e-10);
        assert_eq!(rep.neutral_count(), 4);
    }

    #[test]
    fn reduced_matrix_agrees_with_full_action() {
        let ms = ModeSystem::new([1, -2, 1], params([1.0, 2f64.sqrt(), 3f64.sqrt()], 1.3, 0.7)).unwrap();
        let a = ms.matrix();
        let full = ms.full_matrix();
        for col in 0..6 {
            let mut y = Vector6::<Complex64>::zeros();
            y[col] = Complex64::new(0.3, -1.1);
            let via_full = ms.reduce(&(full * ms.lift(&y)));
            assert!((via_full - a * y).norm() < 1e-12);
            let h_out = full * ms.lift(&y);
            let kf = ms.k().map(|c| c as f64);
            let kh = h_out[4] * kf[0] + h_out[5] * kf[1] + h_out[6] * kf[2];
            assert!(kh.norm() < 1e-10, "constraint leaked: {kh}");
        }
    }

    #[test]
    fn resonant_mode_has_neutral_transverse_velocity() {
        let ms = ModeSystem::new([0, 1, 0], params([1.0, 0.0, 0.0], 1.0, 1.0)).unwrap();
        let a = ms.matrix();
        let mut y = Vector6::<Complex64>::zeros();
        y[3] = Complex64::new(1.0, 0.0);
        assert!((a * y).norm() < 1e-14);
        assert!(mode_spectrum(&ms).unwrap().neutral_count() >= 1);
    }

    #[test]
    fn scan_and_propagator_are_consistent_with_norms() {
        let p = params([1.0, 2f64.sqrt(), 3f64.sqrt()], 1.0, 1.0);
        let scan = band_spectrum_scan(p, 2).unwrap();
        assert!(scan.spectral_abscissa < 0.0);
        assert_eq!(scan.neutral_modes().count(), 0);
    }
}
