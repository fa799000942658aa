use super::field::{SpectralField, VectorField};
use crate::error::{Error, Result};

/// Fourier multiplier operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// `Lambda^s = (-Delta)^{s/2}`, `s >= 0`.
    Lambda(f64),
    Gradient,
    Divergence,
    Curl,
    Laplacian,
    /// `w . grad`.
    WDotGrad([f64; 3]),
    /// `w x grad`, scalar to vector.
    WCrossGrad([f64; 3]),
    /// `(w x grad) . (w x grad)`.
    LaplacianW([f64; 3]),
    /// `(w x grad) . F`, vector to scalar.
    DivW([f64; 3]),
}

/// Operand or result of [`Operator::apply`].
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Scalar(SpectralField),
    Vector(VectorField),
}

impl Field {
    pub fn into_scalar(self) -> Option<SpectralField> {
        match self {
            Field::Scalar(f) => Some(f),
            Field::Vector(_) => None,
        }
    }

    pub fn into_vector(self) -> Option<VectorField> {
        match self {
            Field::Vector(v) => Some(v),
            Field::Scalar(_) => None,
        }
    }
}

impl From<SpectralField> for Field {
    fn from(f: SpectralField) -> Self {
        Field::Scalar(f)
    }
}

impl From<VectorField> for Field {
    fn from(v: VectorField) -> Self {
        Field::Vector(v)
    }
}

impl Operator {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Operator::Lambda(s) if !(s >= 0.0 && s.is_finite()) => Err(Error::InvalidOperator(
                format!("lambda order must be finite and nonnegative, got {s}"),
            )),
            Operator::WDotGrad(w)
            | Operator::WCrossGrad(w)
            | Operator::LaplacianW(w)
            | Operator::DivW(w)
                if w.iter().all(|&c| c == 0.0) || w.iter().any(|c| !c.is_finite()) =>
            {
                Err(Error::InvalidOperator(format!(
                    "background vector must be finite and nonzero, got {w:?}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Applies the operator; scalar operators act componentwise on vector input.
    pub fn apply(&self, input: &Field) -> Result<Field> {
        self.validate()?;
        let out = match (*self, input) {
            (Operator::Lambda(s), Field::Scalar(f)) => f.lambda(s).into(),
            (Operator::Lambda(s), Field::Vector(v)) => v.map(|c| c.lambda(s)).into(),
            (Operator::Laplacian, Field::Scalar(f)) => f.laplacian().into(),
            (Operator::Laplacian, Field::Vector(v)) => v.map(SpectralField::laplacian).into(),
            (Operator::WDotGrad(w), Field::Scalar(f)) => f.w_dot_grad(w).into(),
            (Operator::WDotGrad(w), Field::Vector(v)) => v.map(|c| c.w_dot_grad(w)).into(),
            (Operator::LaplacianW(w), Field::Scalar(f)) => f.laplacian_w(w).into(),
            (Operator::LaplacianW(w), Field::Vector(v)) => v.map(|c| c.laplacian_w(w)).into(),
            (Operator::Gradient, Field::Scalar(f)) => f.gradient().into(),
            (Operator::WCrossGrad(w), Field::Scalar(f)) => f.w_cross_grad(w).into(),
            (Operator::Divergence, Field::Vector(v)) => v.divergence().into(),
            (Operator::Curl, Field::Vector(v)) => v.curl().into(),
            (Operator::DivW(w), Field::Vector(v)) => v.div_w(w).into(),
            (op, f) => {
                let rank = match f {
                    Field::Scalar(_) => "scalar",
                    Field::Vector(_) => "vector",
                };
                return Err(Error::InvalidOperator(format!("{op:?} does not act on a {rank} field")));
            }
        };
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid3;
    use std::f64::consts::PI;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn lambda_annihilates_constants() {
        let g = Grid3::new(8).unwrap();
        let c = SpectralField::constant(g, 3.0);
        let out = Operator::Lambda(1.5).apply(&c.into()).unwrap().into_scalar().unwrap();
        assert_eq!(out.l2_norm(), 0.0);
    }

    #[test]
    fn transverse_derivative_vanishes() {
        let g = Grid3::new(8).unwrap();
        let f = SpectralField::from_fn(g, |x| (TWO_PI * x[1]).sin());
        let out = Operator::WDotGrad([1.0, 0.0, 0.0]).apply(&f.into()).unwrap();
        assert_eq!(out.into_scalar().unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn laplacian_w_on_transverse_cosine() {
        let g = Grid3::new(8).unwrap();
        let f = SpectralField::from_fn(g, |x| (TWO_PI * x[2]).cos());
        let out = Operator::LaplacianW([1.0, 0.0, 0.0])
            .apply(&f.clone().into())
            .unwrap()
            .into_scalar()
            .unwrap();
        assert!(out.sub(&f.scale(-4.0 * PI * PI)).l2_norm() < 1e-13);
    }

    #[test]
    fn invalid_parameters_and_ranks_are_rejected() {
        let g = Grid3::new(4).unwrap();
        let f: Field = SpectralField::zeros(g).into();
        assert!(Operator::Lambda(-1.0).apply(&f).is_err());
        assert!(Operator::WDotGrad([0.0; 3]).apply(&f).is_err());
        assert!(Operator::Divergence.apply(&f).is_err());
        assert!(Operator::Curl.apply(&f).is_err());
    }
}
