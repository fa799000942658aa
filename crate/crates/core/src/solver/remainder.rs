use super::config::SolverConfig;
use super::rhs::transport;
use crate::error::Result;
use crate::spectral::{fields_from_samples, samples_of, SpectralField, VectorField};
use crate::state::PerturbationState;

/// Nonlinear remainders of the perturbation system
///
/// ```text
/// a_t + div u               = R1
/// u_t + beta grad a         = (w.grad) h - grad(w.h) + R2
/// h_t - nu Delta h          = (w.grad) u - w div u + R3
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct Remainders {
    /// `-div(a u)`.
    pub r1: SpectralField,
    /// `-a u_t - (p'(rho) - p'(1)) grad a - rho (u.grad) u + (h.grad) h - grad |h|^2/2`.
    pub r2: VectorField,
    /// `-(u.grad) h + (h.grad) u - h div u`.
    pub r3: VectorField,
    /// Velocity tendency from the full momentum equation.
    pub u_t: VectorField,
}

fn gradients(v: &VectorField) -> [[SpectralField; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| v.component(i).partial(j)))
}

pub fn remainders(state: &PerturbationState, config: &SolverConfig) -> Result<Remainders> {
    let grid = state.grid();
    let len = grid.len();
    let u_t = transport(state, config)?.du;
    let beta = config.pressure.beta;

    let grad_a: [SpectralField; 3] = std::array::from_fn(|j| state.a.partial(j));
    let du = gradients(&state.u);
    let dh = gradients(&state.h);

    let mut inputs: Vec<&SpectralField> = vec![&state.a];
    inputs.extend(state.u.components());
    inputs.extend(state.h.components());
    inputs.extend(u_t.components());
    inputs.extend(grad_a.iter());
    inputs.extend(du.iter().flatten());
    inputs.extend(dh.iter().flatten());
    let g = samples_of(&inputs);
    let a = &g[0];
    let u = &g[1..4];
    let h = &g[4..7];
    let ut = &g[7..10];
    let ga = &g[10..13];
    let gu = |i: usize, j: usize| &g[13 + 3 * i + j];
    let gh = |i: usize, j: usize| &g[22 + 3 * i + j];

    let mut au: Vec<Vec<f64>> = vec![vec![0.0; len]; 3];
    let mut r2: Vec<Vec<f64>> = vec![vec![0.0; len]; 3];
    let mut r3: Vec<Vec<f64>> = vec![vec![0.0; len]; 3];
    let mut magnetic_pressure = vec![0.0; len];
    for x in 0..len {
        let rho = 1.0 + a[x];
        let slope = config.pressure.dp(rho) - beta;
        let div_u = gu(0, 0)[x] + gu(1, 1)[x] + gu(2, 2)[x];
        magnetic_pressure[x] = 0.5 * (h[0][x] * h[0][x] + h[1][x] * h[1][x] + h[2][x] * h[2][x]);
        for i in 0..3 {
            au[i][x] = a[x] * u[i][x];
            let mut u_adv = 0.0;
            let mut h_adv_h = 0.0;
            let mut u_adv_h = 0.0;
            let mut h_adv_u = 0.0;
            for j in 0..3 {
                u_adv += u[j][x] * gu(i, j)[x];
                h_adv_h += h[j][x] * gh(i, j)[x];
                u_adv_h += u[j][x] * gh(i, j)[x];
                h_adv_u += h[j][x] * gu(i, j)[x];
            }
            r2[i][x] = -a[x] * ut[i][x] - slope * ga[i][x] - rho * u_adv + h_adv_h;
            r3[i][x] = -u_adv_h + h_adv_u - h[i][x] * div_u;
        }
    }
    let out = fields_from_samples(
        grid,
        &[
            &au[0], &au[1], &au[2], &r2[0], &r2[1], &r2[2], &r3[0], &r3[1], &r3[2], &magnetic_pressure,
        ],
        true,
    );
    let mut it = out.into_iter();
    let mut next3 = || -> VectorField {
        let c: [SpectralField; 3] = std::array::from_fn(|_| it.next().expect("field count"));
        VectorField::new(c)
    };
    let flux = next3();
    let mut r2 = next3();
    let r3 = next3();
    let pm = it.next().expect("field count");
    r2.axpy(-1.0, &pm.gradient());
    Ok(Remainders {
        r1: flux.divergence().scale(-1.0),
        r2,
        r3,
        u_t,
    })
}
