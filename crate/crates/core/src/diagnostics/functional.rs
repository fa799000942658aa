use std::f64::consts::PI;

use num_complex::Complex64;

use super::energy::{centered_derivative, sobolev_energy, weighted_energy, DifferenceOrder};
use crate::error::{Error, Result};
use crate::linear::check_uniform;
use crate::pressure::PressureLaw;
use crate::state::PerturbationState;

const TWO_PI: f64 = 2.0 * PI;

/// Regularity indices `L, M, N, d` and the Diophantine exponent `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderParams {
    l: u32,
    m: u32,
    n: u32,
    d: u32,
    r: f64,
    paper_regime: bool,
}

impl OrderParams {
    /// Orders in the regime of the decay theorem:
    /// `r + 3 <= L <= M - r - 1`, `M <= N - r - 2` and `d > 2 (N + r - L)`.
    pub fn new(l: u32, m: u32, n: u32, d: u32, r: f64) -> Result<Self> {
        let mut orders = Self::relaxed(l, m, n, d, r)?;
        let (lf, mf, nf, df) = (l as f64, m as f64, n as f64, d as f64);
        let mut broken = Vec::new();
        if r + 3.0 > lf {
            broken.push("r + 3 <= L");
        }
        if lf > mf - r - 1.0 {
            broken.push("L <= M - r - 1");
        }
        if mf > nf - r - 2.0 {
            broken.push("M <= N - r - 2");
        }
        if df <= 2.0 * (nf + r - lf) {
            broken.push("d > 2 (N + r - L)");
        }
        if !broken.is_empty() {
            return Err(Error::InvalidOrders(format!(
                "(L, M, N, d, r) = ({l}, {m}, {n}, {d}, {r}) violates {}",
                broken.join(", ")
            )));
        }
        orders.paper_regime = true;
        Ok(orders)
    }

    /// Small orders for exercising the functionals at modest resolution. Only
    /// requires positive indices, `r >= 0`, `L >= r`, `M >= r + 1` and `N >= M`.
    pub fn relaxed(l: u32, m: u32, n: u32, d: u32, r: f64) -> Result<Self> {
        let fail = |why: &str| Err(Error::InvalidOrders(format!("(L, M, N, d, r) = ({l}, {m}, {n}, {d}, {r}): {why}")));
        if l == 0 || m == 0 || n == 0 || d == 0 {
            return fail("L, M, N and d must be positive");
        }
        if !(r >= 0.0 && r.is_finite()) {
            return fail("r must be finite and nonnegative");
        }
        if (l as f64) < r || (m as f64) < r + 1.0 || n < m {
            return fail("need L >= r, M >= r + 1 and N >= M");
        }
        Ok(OrderParams {
            l,
            m,
            n,
            d,
            r,
            paper_regime: false,
        })
    }

    /// `(L, M, N, d, r) = (1, 2, 3, 7, 1)`.
    pub fn desk() -> Self {
        Self::relaxed(1, 2, 3, 7, 1.0).expect("valid relaxed orders")
    }

    /// Smallest admissible orders of the decay theorem for a given `r`.
    pub fn smallest(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidOrders(format!("r must be positive, got {r}")));
        }
        let l = (r + 3.0).ceil();
        let m = (l + r + 1.0).ceil();
        let n = (m + r + 2.0).ceil();
        let d = (2.0 * (n + r - l)).floor() + 1.0;
        Self::new(l as u32, m as u32, n as u32, d as u32, r)
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn is_paper_regime(&self) -> bool {
        self.paper_regime
    }

    /// Order `L - r` of the dissipated energy.
    pub fn low(&self) -> f64 {
        self.l as f64 - self.r
    }

    /// Predicted algebraic decay exponent `d / (N + r - L)`.
    pub fn decay_exponent(&self) -> f64 {
        self.d as f64 / (self.n as f64 + self.r - self.l as f64)
    }

    /// Exponent `theta = d / (N + d + r - L)` of the interpolation between `L - r` and `N + d`.
    pub fn interpolation_theta(&self) -> f64 {
        self.d as f64 / (self.n as f64 + self.d as f64 + self.r - self.l as f64)
    }
}

/// Weights of the three cross terms in the composite functional.
pub const DEFAULT_CROSS_WEIGHTS: [f64; 3] = [1.0, 1.0, 1.0];

/// `(2 pi |k|)^(2 s)`, with `Lambda^0` the identity.
fn lambda_sq(k2: f64, s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else if k2 == 0.0 {
        0.0
    } else {
        (TWO_PI * TWO_PI * k2).powf(s)
    }
}

/// The cross terms
///
/// ```text
/// cross1 = int Lambda^{M-r-1} div u  Lambda^{M-r-1} a
/// cross2 = int (w.grad) Lambda^L h . Lambda^L u
/// cross3 = int div_w Lambda^M (u x w) Lambda^M a + Lambda^M (h.w) div Lambda^M u
/// ```
///
/// evaluated mode by mode, with `div_w F = (w x grad) . F`.
pub fn cross_functionals(state: &PerturbationState, w: [f64; 3], orders: &OrderParams) -> [f64; 3] {
    let grid = state.grid();
    let sigma = orders.m as f64 - orders.r - 1.0;
    let (l, m) = (orders.l as f64, orders.m as f64);
    let ci = Complex64::new(0.0, TWO_PI);
    let a = state.a.coeffs();
    let u = state.u.components().clone().map(|c| c.coeffs().to_vec());
    let h = state.h.components().clone().map(|c| c.coeffs().to_vec());
    let mut out = [0.0; 3];
    for idx in 0..grid.len() {
        let k = grid.mode(idx);
        let k2 = (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64;
        let kd = grid.derivative_mode(idx).map(|c| c as f64);
        let uk = [u[0][idx], u[1][idx], u[2][idx]];
        let hk = [h[0][idx], h[1][idx], h[2][idx]];
        let div_u = ci * (kd[0] * uk[0] + kd[1] * uk[1] + kd[2] * uk[2]);
        out[0] += lambda_sq(k2, sigma) * (div_u * a[idx].conj()).re;

        let wk = w[0] * kd[0] + w[1] * kd[1] + w[2] * kd[2];
        let hu: Complex64 = (0..3).map(|i| hk[i] * uk[i].conj()).sum();
        out[1] += lambda_sq(k2, l) * (ci * wk * hu).re;

        let uxw = [
            uk[1] * w[2] - uk[2] * w[1],
            uk[2] * w[0] - uk[0] * w[2],
            uk[0] * w[1] - uk[1] * w[0],
        ];
        let wxk = [
            w[1] * kd[2] - w[2] * kd[1],
            w[2] * kd[0] - w[0] * kd[2],
            w[0] * kd[1] - w[1] * kd[0],
        ];
        let div_w = ci * (wxk[0] * uxw[0] + wxk[1] * uxw[1] + wxk[2] * uxw[2]);
        let hw = w[0] * hk[0] + w[1] * hk[1] + w[2] * hk[2];
        out[2] += lambda_sq(k2, m) * ((div_w * a[idx].conj()).re + (hw * div_u.conj()).re);
    }
    out
}

/// `X = X~ + delta_* (w1 cross1 + w2 cross2 + w3 cross3)` with the quantities it is
/// compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Composite {
    pub x_tilde: f64,
    pub cross: [f64; 3],
    pub weights: [f64; 3],
    pub delta_star: f64,
    pub x: f64,
    /// `E_N`.
    pub e_n: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Relative slack granted to bracket comparisons for rounding.
const BRACKET_SLACK: f64 = 1e-12;

impl Composite {
    pub fn cross_sum(&self) -> f64 {
        self.cross.iter().zip(&self.weights).map(|(c, w)| c * w).sum()
    }

    /// The same functional with another `delta_*`.
    pub fn with_delta(&self, delta_star: f64) -> Composite {
        Composite {
            delta_star,
            x: self.x_tilde + delta_star * self.cross_sum(),
            ..*self
        }
    }

    /// `alpha1 E_N <= X~ <= alpha2 E_N`.
    pub fn weighted_bracket_holds(&self) -> bool {
        let tol = BRACKET_SLACK * self.e_n;
        self.alpha1 * self.e_n <= self.x_tilde + tol && self.x_tilde <= self.alpha2 * self.e_n + tol
    }

    /// `alpha1 E_N / 2 <= X <= 2 alpha2 E_N`.
    pub fn bracket_holds(&self) -> bool {
        let tol = BRACKET_SLACK * self.e_n;
        0.5 * self.alpha1 * self.e_n <= self.x + tol && self.x <= 2.0 * self.alpha2 * self.e_n + tol
    }
}

/// Evaluates the composite functional at a fixed `delta_*`.
pub fn composite_x(
    state: &PerturbationState,
    pressure: &PressureLaw,
    w: [f64; 3],
    orders: &OrderParams,
    delta_star: f64,
    weights: [f64; 3],
) -> Result<Composite> {
    if !(delta_star >= 0.0 && delta_star.is_finite()) {
        return Err(Error::InvalidInput(format!("delta_* must be nonnegative, got {delta_star}")));
    }
    let x_tilde = weighted_energy(state, pressure, orders.n)?;
    let cross = cross_functionals(state, w, orders);
    let base = Composite {
        x_tilde,
        cross,
        weights,
        delta_star,
        x: x_tilde,
        e_n: sobolev_energy(state, orders.n as f64),
        alpha1: pressure.alpha1,
        alpha2: pressure.alpha2,
    };
    Ok(base.with_delta(delta_star))
}

const MAX_HALVINGS: u32 = 200;

/// Largest `delta_0 / 2^j` for which every sample satisfies the bracket.
pub fn shrink_delta(samples: &[Composite], delta0: f64) -> Result<f64> {
    if !(delta0 > 0.0 && delta0.is_finite()) {
        return Err(Error::InvalidInput(format!("delta_* must be positive, got {delta0}")));
    }
    let mut delta = delta0;
    for _ in 0..=MAX_HALVINGS {
        if samples.iter().all(|s| s.with_delta(delta).bracket_holds()) {
            return Ok(delta);
        }
        delta *= 0.5;
    }
    Err(Error::Constraint(format!(
        "bracket alpha1 E_N / 2 <= X <= 2 alpha2 E_N unreachable after {MAX_HALVINGS} halvings of delta_*"
    )))
}

/// Composite functional with `delta_*` halved from `delta0` until the bracket holds.
pub fn composite_x_auto(
    state: &PerturbationState,
    pressure: &PressureLaw,
    w: [f64; 3],
    orders: &OrderParams,
    delta0: f64,
    weights: [f64; 3],
) -> Result<Composite> {
    let c = composite_x(state, pressure, w, orders, delta0, weights)?;
    let delta = shrink_delta(&[c], delta0)?;
    Ok(c.with_delta(delta))
}

/// Sign monitor of `dX/dt + margin E_{L-r}` along a uniformly sampled series.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationMonitor {
    /// Interior sample times.
    pub times: Vec<f64>,
    /// Centered `dX/dt`.
    pub rate: Vec<f64>,
    /// `dX/dt + margin E_{L-r}`.
    pub series: Vec<f64>,
    pub margin: f64,
    /// Samples (after the skipped transient) with a positive series value.
    pub violations: usize,
    /// `min (-dX/dt / E_{L-r})` after the transient; `None` without informative samples.
    pub empirical_margin: Option<f64>,
}

/// `skip` leading interior samples are treated as a transient and excluded from
/// the violation count and the empirical margin.
pub fn dissipation_monitor(
    times: &[f64],
    x: &[f64],
    e_low: &[f64],
    margin: f64,
    order: DifferenceOrder,
    skip: usize,
) -> Result<DissipationMonitor> {
    if x.len() != times.len() || e_low.len() != times.len() {
        return Err(Error::InvalidInput("series lengths differ".into()));
    }
    let h = order.half_width();
    let dt = check_uniform(times, (2 * h + 1).max(3))?;
    let rate = centered_derivative(x, dt, order);
    let e = &e_low[h..times.len() - h];
    let series: Vec<f64> = rate.iter().zip(e).map(|(r, e)| r + margin * e).collect();
    let violations = series.iter().skip(skip).filter(|v| **v > 0.0).count();
    let empirical_margin = rate
        .iter()
        .zip(e)
        .skip(skip)
        .filter(|(_, e)| **e > 0.0)
        .map(|(r, e)| -r / e)
        .reduce(f64::min);
    Ok(DissipationMonitor {
        times: times[h..times.len() - h].to_vec(),
        rate,
        series,
        margin,
        violations,
        empirical_margin,
    })
}

/// `E_N / (E_{L-r}^theta E_{N+d}^{1-theta})`; at most one by Hölder in multiplier
/// space, with equality for single-mode states. Zero for the zero state.
pub fn interpolation_ratio(state: &PerturbationState, orders: &OrderParams) -> f64 {
    let theta = orders.interpolation_theta();
    let e_n = sobolev_energy(state, orders.n as f64);
    if e_n == 0.0 {
        return 0.0;
    }
    let low = sobolev_energy(state, orders.low());
    let high = sobolev_energy(state, (orders.n + orders.d) as f64);
    e_n / (low.powf(theta) * high.powf(1.0 - theta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_paper_orders() {
        let o = OrderParams::smallest(2.5).unwrap();
        assert_eq!((o.l(), o.m(), o.n(), o.d()), (6, 10, 15, 24));
        assert!(o.is_paper_regime());
        assert!(OrderParams::new(1, 2, 3, 7, 1.0).is_err());
        assert!(!OrderParams::desk().is_paper_regime());
    }
}
