use crate::error::Result;
use crate::spectral::{Grid3, SpectralField, VectorField};

/// Perturbation `(a, u, h)` of the equilibrium `(rho, u, H) = (1, 0, w)` with `a = rho - 1`
/// and `h = H - w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationState {
    pub a: SpectralField,
    pub u: VectorField,
    pub h: VectorField,
    pub time: f64,
}

/// Constraint integrals of a state; each vanishes for admissible data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintResiduals {
    /// `int rho - 1`.
    pub mass: f64,
    /// `int rho u`.
    pub momentum: [f64; 3],
    /// `int h`.
    pub mean_h: [f64; 3],
    /// `||div h||_0`.
    pub div_h: f64,
}

impl ConstraintResiduals {
    /// Largest absolute entry among the integral constraints (excluding `div h`).
    pub fn max_integral(&self) -> f64 {
        std::iter::once(self.mass)
            .chain(self.momentum)
            .chain(self.mean_h)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl PerturbationState {
    pub fn zeros(grid: Grid3) -> Self {
        PerturbationState {
            a: SpectralField::zeros(grid),
            u: VectorField::zeros(grid),
            h: VectorField::zeros(grid),
            time: 0.0,
        }
    }

    pub fn new(a: SpectralField, u: VectorField, h: VectorField, time: f64) -> Result<Self> {
        a.grid().check_same(&u.grid())?;
        a.grid().check_same(&h.grid())?;
        Ok(PerturbationState { a, u, h, time })
    }

    pub fn grid(&self) -> Grid3 {
        self.a.grid()
    }

    /// Scalar fields in the fixed order `a, u1, u2, u3, h1, h2, h3`.
    pub fn fields(&self) -> [&SpectralField; 7] {
        let [u1, u2, u3] = self.u.components();
        let [h1, h2, h3] = self.h.components();
        [&self.a, u1, u2, u3, h1, h2, h3]
    }

    pub fn fields_mut(&mut self) -> [&mut SpectralField; 7] {
        let [u1, u2, u3] = self.u.components_mut();
        let [h1, h2, h3] = self.h.components_mut();
        [&mut self.a, u1, u2, u3, h1, h2, h3]
    }

    /// Density samples `1 + a` on the physical grid.
    pub fn rho_samples(&self) -> Vec<f64> {
        self.a.to_samples().into_iter().map(|v| 1.0 + v).collect()
    }

    pub fn rho_extrema(&self) -> (f64, f64) {
        self.rho_samples()
            .into_iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    pub fn constraint_residuals(&self) -> ConstraintResiduals {
        let rho = self.rho_samples();
        let len = rho.len() as f64;
        let momentum = std::array::from_fn(|i| {
            let ui = self.u.component(i).to_samples();
            rho.iter().zip(&ui).map(|(r, v)| r * v).sum::<f64>() / len
        });
        ConstraintResiduals {
            mass: self.a.mean(),
            momentum,
            mean_h: self.h.mean(),
            div_h: self.h.divergence().l2_norm(),
        }
    }

    /// `sum_j ||f_j||_0^2` over all seven scalar fields.
    pub fn l2_norm_sq(&self) -> f64 {
        self.fields().iter().map(|f| f.l2_norm_sq()).sum()
    }

    pub fn scale(&self, alpha: f64) -> Self {
        PerturbationState {
            a: self.a.scale(alpha),
            u: self.u.scale(alpha),
            h: self.h.scale(alpha),
            time: self.time,
        }
    }

    /// `self += alpha * other` on the fields; time is untouched.
    pub fn axpy(&mut self, alpha: f64, other: &PerturbationState) {
        self.a.axpy(alpha, &other.a);
        self.u.axpy(alpha, &other.u);
        self.h.axpy(alpha, &other.h);
    }

    /// `||self - other||_0`, the L2 distance over all seven fields.
    pub fn distance(&self, other: &PerturbationState) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.l2_norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.fields()
            .iter()
            .all(|f| f.coeffs().iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}
