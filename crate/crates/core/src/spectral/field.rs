use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use super::fft;
use super::grid::Grid3;
use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Real scalar field on the 3-torus stored as Fourier coefficients of
/// `f(x) = sum_k f_k e^{2 pi i k.x}`.
///
/// Coefficients are normalized so that a constant field `c` has `f_0 = c`; the grid
/// mean square of the samples then equals `sum_k |f_k|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid3,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid3) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: Grid3, value: f64) -> Self {
        let mut f = Self::zeros(grid);
        f.coeffs[0] = Complex64::new(value, 0.0);
        f
    }

    /// Forward transform of physical samples laid out in the grid's row-major order.
    pub fn from_samples(grid: Grid3, samples: &[f64]) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::SampleCount {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        let mut coeffs: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft::plan(grid.n()).forward(&mut coeffs);
        let norm = 1.0 / grid.len() as f64;
        coeffs.iter_mut().for_each(|c| *c *= norm);
        Ok(SpectralField { grid, coeffs })
    }

    /// Samples `f` at the grid points `x = (i0, i1, i2) / n`.
    pub fn from_fn(grid: Grid3, f: impl Fn([f64; 3]) -> f64) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut samples = Vec::with_capacity(grid.len());
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    samples.push(f([i0 as f64 * h, i1 as f64 * h, i2 as f64 * h]));
                }
            }
        }
        Self::from_samples(grid, &samples).expect("sample count matches grid")
    }

    /// Field with the listed coefficients and their Hermitian partners.
    ///
    /// Each `(k, c)` sets `f_k = c` and `f_{-k} = conj(c)`; a `k = 0` entry must be real.
    pub fn from_modes(grid: Grid3, modes: &[([i64; 3], Complex64)]) -> Result<Self> {
        let mut f = Self::zeros(grid);
        for &(k, c) in modes {
            let idx = grid
                .index_of(k)
                .ok_or_else(|| Error::InvalidInput(format!("mode {k:?} not on an n={} grid", grid.n())))?;
            let mirror = grid.mirror(idx);
            if mirror == idx {
                f.coeffs[idx] = Complex64::new(c.re, 0.0);
            } else {
                f.coeffs[idx] = c;
                f.coeffs[mirror] = c.conj();
            }
        }
        Ok(f)
    }

    /// Real field with independent random coefficients on `0 < |k|_inf <= kmax`,
    /// scaled to the requested L2 norm.
    pub fn random_band_limited<R: Rng + ?Sized>(grid: Grid3, kmax: i64, l2: f64, rng: &mut R) -> Self {
        Self::random_on(grid, rng, l2, |k| {
            let m = k.iter().map(|c| c.abs()).max().unwrap_or(0);
            m > 0 && m <= kmax
        })
    }

    /// Real random field supported on the modes selected by `keep`, scaled to L2 norm `l2`.
    pub fn random_on<R: Rng + ?Sized>(
        grid: Grid3,
        rng: &mut R,
        l2: f64,
        keep: impl Fn([i64; 3]) -> bool,
    ) -> Self {
        let mut f = Self::zeros(grid);
        for idx in 0..grid.len() {
            let mirror = grid.mirror(idx);
            if mirror < idx {
                continue;
            }
            let k = grid.mode(idx);
            if !keep(k) {
                continue;
            }
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = if mirror == idx { 0.0 } else { rng.gen_range(-1.0..1.0) };
            f.coeffs[idx] = Complex64::new(re, im);
            f.coeffs[mirror] = Complex64::new(re, -im);
        }
        let norm = f.l2_norm();
        if norm > 0.0 {
            f.scale_mut(l2 / norm);
        }
        f
    }

    #[inline]
    pub fn grid(&self) -> Grid3 {
        self.grid
    }

    #[inline]
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of wave vector `k` (zero if `k` is not representable).
    pub fn coeff(&self, k: [i64; 3]) -> Complex64 {
        self.grid
            .index_of(k)
            .map(|i| self.coeffs[i])
            .unwrap_or_default()
    }

    /// Physical samples (real part of the inverse transform).
    pub fn to_samples(&self) -> Vec<f64> {
        self.to_complex_samples().into_iter().map(|c| c.re).collect()
    }

    /// Full complex inverse transform; the imaginary parts vanish for Hermitian fields.
    pub fn to_complex_samples(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        fft::plan(self.grid.n()).inverse(&mut data);
        data
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Mean value and the field with its mean removed.
    pub fn mean_and_center(&self) -> (f64, SpectralField) {
        let mut centered = self.clone();
        centered.coeffs[0] = Complex64::default();
        (self.mean(), centered)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// `sum_k (1 + 4 pi^2 |k|^2)^s |f_k|^2`.
    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        let g = self.grid;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() > 0.0)
            .map(|(idx, c)| sobolev_weight(g.mode(idx), s) * c.norm_sqr())
            .sum()
    }

    /// Inhomogeneous Sobolev norm with multiplier `(1 + 4 pi^2 |k|^2)^{s/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    /// `int f g dx` for real fields.
    pub fn inner(&self, other: &SpectralField) -> Result<f64> {
        self.grid.check_same(&other.grid)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * b.conj()).re)
            .sum())
    }

    /// Largest violation of `f_{-k} = conj(f_k)` over the stored lattice.
    pub fn hermitian_defect(&self) -> f64 {
        let g = self.grid;
        (0..g.len())
            .map(|i| (self.coeffs[g.mirror(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Applies a Fourier multiplier `m(k, k_d)`; `k_d` is the derivative wave vector.
    pub fn map_modes(&self, m: impl Fn([i64; 3], [i64; 3]) -> Complex64) -> SpectralField {
        let g = self.grid;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(idx, &c)| {
                if c == Complex64::default() {
                    c
                } else {
                    c * m(g.mode(idx), g.derivative_mode(idx))
                }
            })
            .collect();
        SpectralField { grid: g, coeffs }
    }

    /// Zeroes every coefficient outside the dealiasing band.
    pub fn truncate_mut(&mut self) {
        let n = self.grid.n();
        let mask = self.grid.axis_mask();
        for (idx, c) in self.coeffs.iter_mut().enumerate() {
            if !(mask[idx / (n * n)] && mask[(idx / n) % n] && mask[idx % n]) {
                *c = Complex64::default();
            }
        }
    }

    pub fn truncated(&self) -> SpectralField {
        let mut f = self.clone();
        f.truncate_mut();
        f
    }

    pub fn is_band_limited(&self) -> bool {
        let g = self.grid;
        self.coeffs
            .iter()
            .enumerate()
            .all(|(idx, c)| g.is_retained(g.mode(idx)) || c.norm_sqr() == 0.0)
    }

    /// `Lambda^s = (-Delta)^{s/2}`, multiplier `(2 pi |k|)^s`.
    pub fn lambda(&self, s: f64) -> SpectralField {
        if s == 0.0 {
            return self.clone();
        }
        self.map_modes(|k, _| {
            let k2 = norm_sq(k);
            if k2 == 0 {
                Complex64::default()
            } else {
                Complex64::new((TWO_PI * (k2 as f64).sqrt()).powf(s), 0.0)
            }
        })
    }

    pub fn laplacian(&self) -> SpectralField {
        self.map_modes(|k, _| Complex64::new(-TWO_PI * TWO_PI * norm_sq(k) as f64, 0.0))
    }

    pub fn gradient(&self) -> VectorField {
        VectorField::new(std::array::from_fn(|j| {
            self.map_modes(|_, kd| Complex64::new(0.0, TWO_PI * kd[j] as f64))
        }))
    }

    /// Partial derivative along axis `j`.
    pub fn partial(&self, j: usize) -> SpectralField {
        self.map_modes(|_, kd| Complex64::new(0.0, TWO_PI * kd[j] as f64))
    }

    /// `(w . grad) f`, multiplier `i 2 pi (w . k)`.
    pub fn w_dot_grad(&self, w: [f64; 3]) -> SpectralField {
        self.map_modes(|_, kd| Complex64::new(0.0, TWO_PI * dot(w, kd)))
    }

    /// `(w x grad) f`, multiplier `i 2 pi (w x k)`.
    pub fn w_cross_grad(&self, w: [f64; 3]) -> VectorField {
        VectorField::new(std::array::from_fn(|j| {
            self.map_modes(|_, kd| Complex64::new(0.0, TWO_PI * cross(w, kd)[j]))
        }))
    }

    /// `Delta_w f = div_w (w x grad) f`, multiplier `-4 pi^2 |w x k|^2`.
    pub fn laplacian_w(&self, w: [f64; 3]) -> SpectralField {
        self.map_modes(|_, kd| {
            let c = cross(w, kd);
            Complex64::new(-TWO_PI * TWO_PI * (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]), 0.0)
        })
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        let mut f = self.clone();
        f.scale_mut(alpha);
        f
    }

    pub fn scale_mut(&mut self, alpha: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= alpha);
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        assert_eq!(self.grid, other.grid, "axpy on mismatched grids");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut f = self.clone();
        f.axpy(1.0, other);
        f
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut f = self.clone();
        f.axpy(-1.0, other);
        f
    }

    /// Pointwise product with 2/3-rule truncation of both inputs and the output.
    pub fn dealiased_product(&self, other: &SpectralField) -> Result<SpectralField> {
        self.grid.check_same(&other.grid)?;
        let a = self.truncated().to_samples();
        let b = other.truncated().to_samples();
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let mut out = SpectralField::from_samples(self.grid, &prod)?;
        out.truncate_mut();
        Ok(out)
    }

    pub(crate) fn from_coeffs(grid: Grid3, coeffs: Vec<Complex64>) -> SpectralField {
        debug_assert_eq!(coeffs.len(), grid.len());
        SpectralField { grid, coeffs }
    }
}

/// Physical samples of several fields on one grid, transforming two at a time.
pub(crate) fn samples_of(fields: &[&SpectralField]) -> Vec<Vec<f64>> {
    let Some(first) = fields.first() else {
        return Vec::new();
    };
    let plan = fft::plan(first.grid.n());
    let mut out = Vec::with_capacity(fields.len());
    for pair in fields.chunks(2) {
        let (f, g) = plan.inverse_pair(&pair[0].coeffs, pair.get(1).map(|g| g.coeffs.as_slice()));
        out.push(f);
        out.extend(g);
    }
    out
}

/// Forward transforms of several sample sets, optionally truncated to the dealiasing band.
pub(crate) fn fields_from_samples(grid: Grid3, samples: &[&[f64]], truncate: bool) -> Vec<SpectralField> {
    let plan = fft::plan(grid.n());
    let mask = truncate.then(|| grid.axis_mask());
    let mut out = Vec::with_capacity(samples.len());
    for pair in samples.chunks(2) {
        let (f, g) = plan.forward_pair(pair[0], pair.get(1).copied(), mask.as_deref());
        out.extend(std::iter::once(f).chain(g).map(|coeffs| SpectralField { grid, coeffs }));
    }
    out
}

/// Three scalar fields on one shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: [SpectralField; 3],
}

impl VectorField {
    /// Panics if the components live on different grids.
    pub fn new(comps: [SpectralField; 3]) -> Self {
        assert!(
            comps[0].grid == comps[1].grid && comps[1].grid == comps[2].grid,
            "vector components must share one grid"
        );
        VectorField { comps }
    }

    pub fn try_new(comps: [SpectralField; 3]) -> Result<Self> {
        comps[0].grid.check_same(&comps[1].grid)?;
        comps[1].grid.check_same(&comps[2].grid)?;
        Ok(VectorField { comps })
    }

    pub fn zeros(grid: Grid3) -> Self {
        VectorField {
            comps: std::array::from_fn(|_| SpectralField::zeros(grid)),
        }
    }

    pub fn grid(&self) -> Grid3 {
        self.comps[0].grid
    }

    pub fn components(&self) -> &[SpectralField; 3] {
        &self.comps
    }

    pub fn components_mut(&mut self) -> &mut [SpectralField; 3] {
        &mut self.comps
    }

    pub fn into_components(self) -> [SpectralField; 3] {
        self.comps
    }

    pub fn component(&self, i: usize) -> &SpectralField {
        &self.comps[i]
    }

    pub fn map(&self, f: impl Fn(&SpectralField) -> SpectralField) -> VectorField {
        VectorField {
            comps: std::array::from_fn(|i| f(&self.comps[i])),
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.comps[i].mean())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.comps.iter().map(SpectralField::l2_norm_sq).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn sobolev_norm_sq(&self, s: f64) -> f64 {
        self.comps.iter().map(|c| c.sobolev_norm_sq(s)).sum()
    }

    /// Root of the summed squared component norms.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.sobolev_norm_sq(s).sqrt()
    }

    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..3 {
            acc += self.comps[i].inner(&other.comps[i])?;
        }
        Ok(acc)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.comps
            .iter()
            .map(SpectralField::hermitian_defect)
            .fold(0.0, f64::max)
    }

    pub fn divergence(&self) -> SpectralField {
        let g = self.grid();
        let coeffs = (0..g.len())
            .map(|idx| {
                let kd = g.derivative_mode(idx);
                let mut acc = Complex64::default();
                for j in 0..3 {
                    acc += self.comps[j].coeffs[idx] * kd[j] as f64;
                }
                Complex64::new(0.0, TWO_PI) * acc
            })
            .collect();
        SpectralField::from_coeffs(g, coeffs)
    }

    pub fn curl(&self) -> VectorField {
        let d = |i: usize, j: usize| self.comps[j].partial(i);
        VectorField::new([
            d(1, 2).sub(&d(2, 1)),
            d(2, 0).sub(&d(0, 2)),
            d(0, 1).sub(&d(1, 0)),
        ])
    }

    /// `div_w F = (w x grad) . F`.
    pub fn div_w(&self, w: [f64; 3]) -> SpectralField {
        let g = self.grid();
        let coeffs = (0..g.len())
            .map(|idx| {
                let c = cross(w, g.derivative_mode(idx));
                let mut acc = Complex64::default();
                for j in 0..3 {
                    acc += self.comps[j].coeffs[idx] * c[j];
                }
                Complex64::new(0.0, TWO_PI) * acc
            })
            .collect();
        SpectralField::from_coeffs(g, coeffs)
    }

    /// Removes the component parallel to `k` from every mode; `k = 0` is left unchanged.
    pub fn leray_project(&self) -> VectorField {
        let mut out = self.clone();
        out.leray_project_mut();
        out
    }

    pub fn leray_project_mut(&mut self) {
        let g = self.grid();
        for idx in 0..g.len() {
            let kd = g.derivative_mode(idx);
            let k2 = norm_sq(kd);
            if k2 == 0 {
                continue;
            }
            let mut kv = Complex64::default();
            for j in 0..3 {
                kv += self.comps[j].coeffs[idx] * kd[j] as f64;
            }
            let factor = kv / k2 as f64;
            for j in 0..3 {
                self.comps[j].coeffs[idx] -= factor * kd[j] as f64;
            }
        }
    }

    /// `u x c` for a constant vector `c`.
    pub fn cross_const(&self, c: [f64; 3]) -> VectorField {
        let [x, y, z] = &self.comps;
        VectorField::new([
            y.scale(c[2]).sub(&z.scale(c[1])),
            z.scale(c[0]).sub(&x.scale(c[2])),
            x.scale(c[1]).sub(&y.scale(c[0])),
        ])
    }

    /// `c . u` for a constant vector `c`.
    pub fn dot_const(&self, c: [f64; 3]) -> SpectralField {
        let mut acc = self.comps[0].scale(c[0]);
        acc.axpy(c[1], &self.comps[1]);
        acc.axpy(c[2], &self.comps[2]);
        acc
    }

    pub fn truncate_mut(&mut self) {
        self.comps.iter_mut().for_each(SpectralField::truncate_mut);
    }

    pub fn scale(&self, alpha: f64) -> VectorField {
        self.map(|c| c.scale(alpha))
    }

    pub fn axpy(&mut self, alpha: f64, other: &VectorField) {
        for i in 0..3 {
            self.comps[i].axpy(alpha, &other.comps[i]);
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        let mut v = self.clone();
        v.axpy(1.0, other);
        v
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        let mut v = self.clone();
        v.axpy(-1.0, other);
        v
    }
}

#[inline]
pub(crate) fn norm_sq(k: [i64; 3]) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

#[inline]
pub(crate) fn dot(w: [f64; 3], k: [i64; 3]) -> f64 {
    w[0] * k[0] as f64 + w[1] * k[1] as f64 + w[2] * k[2] as f64
}

#[inline]
pub(crate) fn cross(w: [f64; 3], k: [i64; 3]) -> [f64; 3] {
    let k = [k[0] as f64, k[1] as f64, k[2] as f64];
    [
        w[1] * k[2] - w[2] * k[1],
        w[2] * k[0] - w[0] * k[2],
        w[0] * k[1] - w[1] * k[0],
    ]
}

/// `(1 + 4 pi^2 |k|^2)^s`, the squared inhomogeneous Sobolev multiplier.
#[inline]
pub fn sobolev_weight(k: [i64; 3], s: f64) -> f64 {
    if s == 0.0 {
        return 1.0;
    }
    (1.0 + TWO_PI * TWO_PI * norm_sq(k) as f64).powf(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Grid3 {
        Grid3::new(n).unwrap()
    }

    #[test]
    fn constant_field_is_a_single_mean_mode() {
        let f = SpectralField::from_fn(grid(8), |_| 3.5);
        assert!((f.coeff([0, 0, 0]).re - 3.5).abs() < 1e-15);
        let rest: f64 = f.coeffs()[1..].iter().map(|c| c.norm()).sum();
        assert!(rest < 1e-14);
    }

    #[test]
    fn single_cosine_has_two_half_coefficients() {
        let f = SpectralField::from_fn(grid(8), |x| (TWO_PI * x[0]).cos());
        for idx in 0..f.grid().len() {
            let k = f.grid().mode(idx);
            let expected = if k == [1, 0, 0] || k == [-1, 0, 0] { 0.5 } else { 0.0 };
            assert!((f.coeffs()[idx] - Complex64::new(expected, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn roundtrip_random_samples() {
        let g = grid(16);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::from_samples(g, &samples).unwrap();
        let back = f.to_complex_samples();
        let err = back
            .iter()
            .zip(&samples)
            .map(|(b, s)| (b.re - s).abs().max(b.im.abs()))
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "roundtrip error {err}");
        assert!(f.hermitian_defect() < 1e-15);
    }

    #[test]
    fn wrong_sample_count_is_rejected() {
        assert!(matches!(
            SpectralField::from_samples(grid(4), &[0.0; 10]),
            Err(Error::SampleCount { expected: 64, got: 10 })
        ));
    }

    #[test]
    fn sobolev_norm_of_cosine() {
        let f = SpectralField::from_fn(grid(8), |x| (TWO_PI * x[0]).cos());
        assert!((f.sobolev_norm(0.0) - 0.5f64.sqrt()).abs() < 1e-14);
        let expected = ((1.0 + 4.0 * PI * PI) / 2.0).sqrt();
        assert!((f.sobolev_norm(1.0) - expected).abs() < 1e-12);
        let c = SpectralField::constant(grid(8), -2.0);
        for s in [0.0, 0.5, 3.0] {
            assert!((c.sobolev_norm(s) - 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn product_of_cosines_is_exact() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x| (TWO_PI * x[0]).cos());
        let p = f.dealiased_product(&f).unwrap();
        let expected = SpectralField::from_fn(g, |x| 0.5 + 0.5 * (2.0 * TWO_PI * x[0]).cos());
        assert!(p.sub(&expected).l2_norm() < 1e-14);
    }

    #[test]
    fn product_with_one_truncates() {
        let g = grid(12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let samples: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SpectralField::from_samples(g, &samples).unwrap();
        let one = SpectralField::constant(g, 1.0);
        let p = one.dealiased_product(&f).unwrap();
        assert!(p.sub(&f.truncated()).l2_norm() < 1e-14);
    }

    #[test]
    fn product_matches_oversampled_quadrature() {
        // Oracle: evaluate both band-limited fields on a 3x finer grid, multiply,
        // transform there, and read off the retained coefficients.
        let g = grid(12);
        let fine = grid(36);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SpectralField::random_on(g, &mut rng, 1.0, |k| g.is_retained(k));
        let h = SpectralField::random_on(g, &mut rng, 1.0, |k| g.is_retained(k));
        let lift = |s: &SpectralField| {
            let mut modes = Vec::new();
            for idx in 0..g.len() {
                let c = s.coeffs()[idx];
                if c.norm() > 0.0 {
                    modes.push((g.mode(idx), c));
                }
            }
            let mut out = SpectralField::zeros(fine);
            for (k, c) in modes {
                let i = fine.index_of(k).unwrap();
                out.coeffs_mut()[i] = c;
            }
            out
        };
        let (ff, hf) = (lift(&f).to_samples(), lift(&h).to_samples());
        let prod: Vec<f64> = ff.iter().zip(&hf).map(|(a, b)| a * b).collect();
        let oracle = SpectralField::from_samples(fine, &prod).unwrap();
        let p = f.dealiased_product(&h).unwrap();
        let mut err: f64 = 0.0;
        for idx in 0..g.len() {
            let k = g.mode(idx);
            if g.is_retained(k) {
                err = err.max((p.coeffs()[idx] - oracle.coeff(k)).norm());
            } else {
                assert_eq!(p.coeffs()[idx], Complex64::default());
            }
        }
        assert!(err < 1e-10, "product error {err}");
    }

    #[test]
    fn leray_kills_gradients_and_keeps_solenoidal_fields() {
        let g = grid(8);
        let phi = SpectralField::from_fn(g, |x| (TWO_PI * x[0]).sin() * (TWO_PI * x[2]).cos());
        assert!(phi.gradient().leray_project().l2_norm() < 1e-14);
        let v = VectorField::new([
            SpectralField::zeros(g),
            SpectralField::zeros(g),
            SpectralField::from_fn(g, |x| (TWO_PI * x[0]).cos()),
        ]);
        assert!(v.leray_project().sub(&v).l2_norm() < 1e-15);
    }

    #[test]
    fn mean_and_center_splits_the_mean() {
        let g = grid(8);
        let f = SpectralField::from_fn(g, |x| 2.0 + (TWO_PI * x[2]).sin());
        let (m, c) = f.mean_and_center();
        assert!((m - 2.0).abs() < 1e-14);
        let s = SpectralField::from_fn(g, |x| (TWO_PI * x[2]).sin());
        assert!(c.sub(&s).l2_norm() < 1e-14);
        let (m5, z) = SpectralField::constant(g, 5.0).mean_and_center();
        assert_eq!(m5, 5.0);
        assert_eq!(z.l2_norm(), 0.0);
    }
}
