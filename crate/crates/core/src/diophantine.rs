//! Lattice margins of a background vector and band-sharp Poincaré constants.
//!
//! A vector `w` is Diophantine with exponent `r` when `|w . k| >= c |k|^{-r}` for every
//! nonzero integer `k`. Only finite bands `0 < |k| <= K` can be scanned, so every
//! quantity here carries its band explicitly.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::spectral::{cross, dot, norm_sq, Grid3, SpectralField, VectorField};

const TWO_PI: f64 = 2.0 * PI;

/// Default cap on the number of lattice points a single scan may visit.
pub const DEFAULT_SCAN_BUDGET: u64 = 50_000_000;

/// Background field together with the exponent it is tested against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DioVector {
    pub w: [f64; 3],
    pub r: f64,
    pub claimed_c: Option<f64>,
}

impl DioVector {
    pub fn new(w: [f64; 3], r: f64) -> Result<Self> {
        if w.iter().any(|c| !c.is_finite()) || w.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidInput(format!("w must be finite and nonzero, got {w:?}")));
        }
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::InvalidInput(format!("exponent r must be positive, got {r}")));
        }
        Ok(DioVector { w, r, claimed_c: None })
    }

    /// `scale * (1, sqrt 2, sqrt 3)`.
    pub fn default_irrational(scale: f64, r: f64) -> Result<Self> {
        Self::new(default_w(scale), r)
    }

    pub fn with_claimed_c(mut self, c: f64) -> Self {
        self.claimed_c = Some(c);
        self
    }

    /// Whether `r > 2`, the range the decay theory needs. Smaller exponents are
    /// accepted for exploratory scans.
    pub fn in_paper_regime(&self) -> bool {
        self.r > 2.0
    }
}

/// `scale * (1, sqrt 2, sqrt 3)`.
pub fn default_w(scale: f64) -> [f64; 3] {
    [scale, scale * 2f64.sqrt(), scale * 3f64.sqrt()]
}

/// Minimum of a lattice function over the band and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginEntry {
    pub value: f64,
    pub argmin: [i64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginReport {
    pub band: i64,
    pub r: f64,
    /// `min |w . k| |k|^r`.
    pub dot: MarginEntry,
    /// `min |w x k| |k|^r`.
    pub cross: MarginEntry,
}

impl MarginReport {
    pub fn is_diophantine_in_band(&self) -> bool {
        self.dot.value > 0.0
    }
}

pub(crate) fn check_band(band: i64, budget: u64) -> Result<()> {
    if band < 1 {
        return Err(Error::InvalidInput(format!("band limit must be at least 1, got {band}")));
    }
    let side = 2 * band as u64 + 1;
    let points = side.saturating_mul(side).saturating_mul(side);
    if points > budget {
        return Err(Error::BudgetExceeded { points, budget });
    }
    Ok(())
}

/// Visits one representative of each `{k, -k}` pair with `0 < |k| <= band`
/// (first nonzero component positive), in lexicographic order.
fn for_each_half_lattice(band: i64, mut f: impl FnMut([i64; 3])) {
    let b2 = band * band;
    for k0 in 0..=band {
        for k1 in -band..=band {
            for k2 in -band..=band {
                let k = [k0, k1, k2];
                let n2 = norm_sq(k);
                if n2 == 0 || n2 > b2 {
                    continue;
                }
                let first = k.iter().copied().find(|&c| c != 0).unwrap_or(0);
                if first > 0 {
                    f(k);
                }
            }
        }
    }
}

/// One representative per `{k, -k}` pair in `0 < |k| <= band`, in lexicographic order.
pub fn half_band_modes(band: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for_each_half_lattice(band, |k| out.push(k));
    out
}

/// Every `k` with `0 < |k| <= band`, in lexicographic order.
pub fn band_modes(band: i64) -> Vec<[i64; 3]> {
    let b2 = band * band;
    let mut out = Vec::new();
    for k0 in -band..=band {
        for k1 in -band..=band {
            for k2 in -band..=band {
                let k = [k0, k1, k2];
                let n2 = norm_sq(k);
                if n2 > 0 && n2 <= b2 {
                    out.push(k);
                }
            }
        }
    }
    out
}

fn scan_min(band: i64, r: f64, budget: u64, value: impl Fn([i64; 3]) -> f64) -> Result<MarginEntry> {
    check_band(band, budget)?;
    let mut best: Option<(f64, i64, [i64; 3])> = None;
    for_each_half_lattice(band, |k| {
        let n2 = norm_sq(k);
        let v = value(k) * (n2 as f64).sqrt().powf(r);
        let better = match best {
            None => true,
            Some((bv, bn, bk)) => v < bv || (v == bv && (n2 < bn || (n2 == bn && k > bk))),
        };
        if better {
            best = Some((v, n2, k));
        }
    });
    let (value, _, argmin) = best.expect("band >= 1 contains lattice points");
    Ok(MarginEntry { value, argmin })
}

/// `min |w . k| |k|^r` over `0 < |k| <= band`.
///
/// Ties are broken towards the shortest `k`, then the lexicographically largest
/// representative with positive leading component.
pub fn dot_margin(w: [f64; 3], r: f64, band: i64) -> Result<MarginEntry> {
    dot_margin_with_budget(w, r, band, DEFAULT_SCAN_BUDGET)
}

pub fn dot_margin_with_budget(w: [f64; 3], r: f64, band: i64, budget: u64) -> Result<MarginEntry> {
    check_nonzero(w)?;
    scan_min(band, r, budget, |k| dot(w, k).abs())
}

/// `min |w x k| |k|^r` over `0 < |k| <= band`.
pub fn cross_margin(w: [f64; 3], r: f64, band: i64) -> Result<MarginEntry> {
    cross_margin_with_budget(w, r, band, DEFAULT_SCAN_BUDGET)
}

pub fn cross_margin_with_budget(w: [f64; 3], r: f64, band: i64, budget: u64) -> Result<MarginEntry> {
    check_nonzero(w)?;
    scan_min(band, r, budget, |k| norm3(cross(w, k)))
}

pub fn margin_report(dio: &DioVector, band: i64) -> Result<MarginReport> {
    Ok(MarginReport {
        band,
        r: dio.r,
        dot: dot_margin(dio.w, dio.r, band)?,
        cross: cross_margin(dio.w, dio.r, band)?,
    })
}

fn check_nonzero(w: [f64; 3]) -> Result<()> {
    if w.iter().all(|&c| c == 0.0) {
        Err(Error::InvalidInput("w must be nonzero".into()))
    } else {
        Ok(())
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Companion lattice vector `k~` with `w . k~` equal to a component of `w x k`.
///
/// Uses `(0, -k3, k2)` when `k3 != 0`, otherwise the analogous rotation built from
/// the next nonzero coordinate.
pub fn tilde(k: [i64; 3]) -> [i64; 3] {
    if k[2] != 0 {
        [0, -k[2], k[1]]
    } else if k[1] != 0 {
        [-k[1], k[0], 0]
    } else {
        [k[2], 0, -k[0]]
    }
}

/// One `k` for which `|w . k~| <= |w x k|` failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TildeViolation {
    pub k: [i64; 3],
    pub tilde: [i64; 3],
    pub dot_tilde: f64,
    pub cross_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TildeCheck {
    pub checked: usize,
    pub violations: Vec<TildeViolation>,
}

impl TildeCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `|w . k~| <= |w x k|` and `|k~| <= |k|` over `0 < |k| <= band`.
///
/// The comparison allows a relative slack of a few ulps because equality is
/// attained whenever the dropped components of `w x k` vanish.
pub fn tilde_inequality_check(w: [f64; 3], band: i64) -> Result<TildeCheck> {
    check_nonzero(w)?;
    check_band(band, DEFAULT_SCAN_BUDGET)?;
    let mut violations = Vec::new();
    let modes = band_modes(band);
    for &k in &modes {
        let kt = tilde(k);
        let lhs = dot(w, kt).abs();
        let rhs = norm3(cross(w, k));
        let scale = norm3(w) * (norm_sq(k) as f64).sqrt();
        if lhs > rhs + 4.0 * f64::EPSILON * scale || norm_sq(kt) > norm_sq(k) {
            violations.push(TildeViolation {
                k,
                tilde: kt,
                dot_tilde: lhs,
                cross_norm: rhs,
            });
        }
    }
    Ok(TildeCheck {
        checked: modes.len(),
        violations,
    })
}

/// Row of the per-mode margin table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginRow {
    pub k: [i64; 3],
    pub norm: f64,
    pub dot_value: f64,
    pub cross_value: f64,
}

/// `|w . k| |k|^r` and `|w x k| |k|^r` for every mode in the band.
pub fn margin_rows(dio: &DioVector, band: i64) -> Result<Vec<MarginRow>> {
    check_band(band, DEFAULT_SCAN_BUDGET)?;
    Ok(band_modes(band)
        .into_iter()
        .map(|k| {
            let norm = (norm_sq(k) as f64).sqrt();
            let weight = norm.powf(dio.r);
            MarginRow {
                k,
                norm,
                dot_value: dot(dio.w, k).abs() * weight,
                cross_value: norm3(cross(dio.w, k)) * weight,
            }
        })
        .collect())
}

/// Mode-wise sharp constants of the three Poincaré-type inequalities on a band.
///
/// * `k1`: `||Lambda^{s-r} f||_0 <= k1 ||w . grad Lambda^s f||_0`
/// * `k2`: `||f||_{s-r} <= k2 ||w x grad Lambda^s f||_0` for mean-zero `f`
/// * `k3`: both right-hand sides control `||f||_{s-r}` with constant `k3`
///
/// `k3` is stated as an upper constant; the lower-bound form `K ||f|| <= ||...||`
/// uses its reciprocal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k1_mode: [i64; 3],
    pub k2_mode: [i64; 3],
    pub k3_mode: [i64; 3],
    pub s: f64,
    pub r: f64,
    pub band: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandConstants {
    Finite(EmpiricalConstants),
    /// Some mode in the band makes a right-hand side vanish.
    NotDiophantineInBand { resonant: [i64; 3] },
}

impl BandConstants {
    pub fn finite(&self) -> Option<&EmpiricalConstants> {
        match self {
            BandConstants::Finite(c) => Some(c),
            BandConstants::NotDiophantineInBand { .. } => None,
        }
    }
}

/// Per-mode inequality ratios for `k != 0`: `(k1, k2, dot-side k3)`.
fn mode_ratios(w: [f64; 3], s: f64, r: f64, k: [i64; 3]) -> (f64, f64, f64) {
    let kn = TWO_PI * (norm_sq(k) as f64).sqrt();
    let lam_s = kn.powf(s);
    let dot_side = lam_s * TWO_PI * dot(w, k).abs();
    let cross_side = lam_s * TWO_PI * norm3(cross(w, k));
    let homogeneous = kn.powf(s - r);
    let inhomogeneous = (1.0 + kn * kn).powf(0.5 * (s - r));
    (
        homogeneous / dot_side,
        inhomogeneous / cross_side,
        inhomogeneous / dot_side,
    )
}

/// Exact suprema of the inequality ratios over band-limited fields.
pub fn empirical_constants(w: [f64; 3], s: f64, r: f64, band: i64) -> Result<BandConstants> {
    check_nonzero(w)?;
    if !(s >= r) {
        return Err(Error::InvalidInput(format!("need s >= r, got s={s}, r={r}")));
    }
    for margin in [dot_margin(w, r, band)?, cross_margin(w, r, band)?] {
        if margin.value == 0.0 {
            return Ok(BandConstants::NotDiophantineInBand {
                resonant: margin.argmin,
            });
        }
    }
    let mut best = [(0.0f64, [0i64; 3]); 3];
    for_each_half_lattice(band, |k| {
        let (r1, r2, r3dot) = mode_ratios(w, s, r, k);
        let r3 = r2.max(r3dot);
        for (slot, v) in best.iter_mut().zip([r1, r2, r3]) {
            if v > slot.0 {
                *slot = (v, k);
            }
        }
    });
    Ok(BandConstants::Finite(EmpiricalConstants {
        k1: best[0].0,
        k2: best[1].0,
        k3: best[2].0,
        k1_mode: best[0].1,
        k2_mode: best[1].1,
        k3_mode: best[2].1,
        s,
        r,
        band,
    }))
}

/// Measured inequality ratios for a single field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityRatios {
    /// `||Lambda^{s-r} f||_0 / ||w . grad Lambda^s f||_0`.
    pub dot_homogeneous: f64,
    /// `||f||_{s-r} / ||w x grad Lambda^s f||_0`.
    pub cross_inhomogeneous: f64,
    /// `||f||_{s-r} / ||w . grad Lambda^s f||_0`.
    pub dot_inhomogeneous: f64,
}

/// Evaluates the three inequality ratios on `f` through its Fourier multipliers.
pub fn inequality_ratios(f: &SpectralField, w: [f64; 3], s: f64, r: f64) -> InequalityRatios {
    let lam = f.lambda(s);
    let dot_side = lam.w_dot_grad(w).l2_norm();
    let cross_side = cross_gradient(&lam, w).l2_norm();
    let lhs_hom = f.lambda(s - r).l2_norm();
    let lhs_inh = f.sobolev_norm(s - r);
    InequalityRatios {
        dot_homogeneous: lhs_hom / dot_side,
        cross_inhomogeneous: lhs_inh / cross_side,
        dot_inhomogeneous: lhs_inh / dot_side,
    }
}

/// `w x grad f`, the vector whose norm is the cross-side of the inequalities.
fn cross_gradient(f: &SpectralField, w: [f64; 3]) -> VectorField {
    f.w_cross_grad(w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantCertificate {
    pub constant: f64,
    /// Ratio on the single attaining mode.
    pub worst_mode_ratio: f64,
    /// Largest ratio over the random samples.
    pub random_max: f64,
    /// Largest ratio over the random samples and the attaining mode.
    pub observed_max: f64,
    /// Number of samples whose ratio exceeded the constant by more than `1e-12` relative.
    pub violations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certification {
    pub constants: EmpiricalConstants,
    pub k1: ConstantCertificate,
    pub k2: ConstantCertificate,
    pub k3: ConstantCertificate,
    pub samples: usize,
}

impl Certification {
    pub fn holds(&self) -> bool {
        [self.k1, self.k2, self.k3].iter().all(|c| c.violations == 0)
    }
}

/// Smallest even grid that represents every mode with `|k| <= band`.
pub fn band_grid(band: i64) -> Result<Grid3> {
    Grid3::new((2 * band as usize + 2).max(4))
}

/// Random real mean-zero field supported on `0 < |k| <= band`.
pub fn random_band_field<R: Rng + ?Sized>(grid: Grid3, band: i64, rng: &mut R) -> SpectralField {
    let b2 = band * band;
    SpectralField::random_on(grid, rng, 1.0, |k| {
        let n2 = norm_sq(k);
        n2 > 0 && n2 <= b2
    })
}

/// Checks the three inequalities with their band constants on the attaining modes
/// and on `samples` random band-limited mean-zero fields.
pub fn certify<R: Rng + ?Sized>(
    constants: &EmpiricalConstants,
    w: [f64; 3],
    samples: usize,
    rng: &mut R,
) -> Result<Certification> {
    let (s, r, band) = (constants.s, constants.r, constants.band);
    let grid = band_grid(band)?;
    let single = |k: [i64; 3]| -> Result<InequalityRatios> {
        let f = SpectralField::from_modes(grid, &[(k, 1.0.into())])?;
        Ok(inequality_ratios(&f, w, s, r))
    };
    let m1 = single(constants.k1_mode)?;
    let m2 = single(constants.k2_mode)?;
    let m3 = single(constants.k3_mode)?;

    let mut random = Vec::with_capacity(samples);
    for _ in 0..samples {
        let f = random_band_field(grid, band, rng);
        random.push(inequality_ratios(&f, w, s, r));
    }
    let cert = |constant: f64, worst: f64, pick: &dyn Fn(&InequalityRatios) -> f64| {
        let random_max = random.iter().map(pick).fold(0.0, f64::max);
        let violations = random
            .iter()
            .map(pick)
            .chain(std::iter::once(worst))
            .filter(|&v| v > constant * (1.0 + 1e-12))
            .count();
        ConstantCertificate {
            constant,
            worst_mode_ratio: worst,
            random_max,
            observed_max: random_max.max(worst),
            violations,
        }
    };
    let k3_pick = |x: &InequalityRatios| x.cross_inhomogeneous.max(x.dot_inhomogeneous);
    Ok(Certification {
        constants: *constants,
        k1: cert(constants.k1, m1.dot_homogeneous, &|x| x.dot_homogeneous),
        k2: cert(constants.k2, m2.cross_inhomogeneous, &|x| x.cross_inhomogeneous),
        k3: cert(constants.k3, k3_pick(&m3), &k3_pick),
        samples,
    })
}

/// Summary of a family of measured ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioStats {
    pub count: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl RatioStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        let (min, max, sum) = values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, 0.0),
            |(lo, hi, s), &v| (lo.min(v), hi.max(v), s + v),
        );
        RatioStats {
            count,
            min,
            max,
            mean: if count > 0 { sum / count as f64 } else { f64::NAN },
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.count > 0 && self.max.is_finite()
    }
}

/// Ratios of the standard product, commutator and composition estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalculusRatios {
    /// `||fg||_s / (||f||_inf ||g||_s + ||g||_inf ||f||_s)`.
    pub product: RatioStats,
    /// `||[Lambda^s, f] g||_0 / (||Df||_inf ||Lambda^{s-1} g||_0 + ||g||_inf ||Lambda^s f||_0)`.
    pub commutator: RatioStats,
    /// `||F(f)||_s / ((1 + ||f||_inf)^{[s]+1} ||f||_s)` with `F(x) = e^x - 1`.
    pub composition: RatioStats,
    pub s: f64,
}

fn sup_norm(f: &SpectralField) -> f64 {
    f.to_samples().into_iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn gradient_sup(f: &SpectralField) -> f64 {
    let g = f.gradient();
    let [x, y, z] = g.components().clone().map(|c| c.to_samples());
    x.iter()
        .zip(&y)
        .zip(&z)
        .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
        .fold(0.0, f64::max)
}

/// Measures the calculus-inequality ratios on `samples` random pairs of fields
/// supported on `|k|_inf <= kmax` (half the dealiasing cutoff, so products are exact).
pub fn calculus_ratios<R: Rng + ?Sized>(
    grid: Grid3,
    s: f64,
    samples: usize,
    rng: &mut R,
) -> Result<CalculusRatios> {
    if !(s > 0.0) {
        return Err(Error::InvalidInput(format!("need s > 0, got {s}")));
    }
    let kmax = (grid.cutoff() / 2).max(1);
    let mut product = Vec::with_capacity(samples);
    let mut commutator = Vec::with_capacity(samples);
    let mut composition = Vec::with_capacity(samples);
    for _ in 0..samples {
        let f = SpectralField::random_band_limited(grid, kmax, 0.5, rng);
        let g = SpectralField::random_band_limited(grid, kmax, 0.5, rng);
        let (f_inf, g_inf) = (sup_norm(&f), sup_norm(&g));

        let fg = f.dealiased_product(&g)?;
        product.push(fg.sobolev_norm(s) / (f_inf * g.sobolev_norm(s) + g_inf * f.sobolev_norm(s)));

        let comm = fg.lambda(s).sub(&f.dealiased_product(&g.lambda(s))?);
        let denom = gradient_sup(&f) * g.lambda(s - 1.0).l2_norm() + g_inf * f.lambda(s).l2_norm();
        commutator.push(comm.l2_norm() / denom);

        let composed: Vec<f64> = f.to_samples().into_iter().map(f64::exp_m1).collect();
        let big_f = SpectralField::from_samples(grid, &composed)?;
        let power = s.floor() as i32 + 1;
        composition.push(big_f.sobolev_norm(s) / ((1.0 + f_inf).powi(power) * f.sobolev_norm(s)));
    }
    Ok(CalculusRatios {
        product: RatioStats::from_values(&product),
        commutator: RatioStats::from_values(&commutator),
        composition: RatioStats::from_values(&composition),
        s,
    })
}
