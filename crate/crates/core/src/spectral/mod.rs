//! Fourier representation of real fields on the unit 3-torus.
//!
//! Fields are expanded as `f(x) = sum_k f_k e^{2 pi i k.x}`, so every derivative
//! becomes multiplication by `i 2 pi k`. Nonlinear products are evaluated on the
//! physical grid with 2/3-rule truncation.

mod fft;
mod field;
mod grid;
mod operator;

pub use field::{sobolev_weight, SpectralField, VectorField};
pub use grid::Grid3;
pub use operator::{Field, Operator};

pub(crate) use field::{cross, dot, fields_from_samples, norm_sq, samples_of};
