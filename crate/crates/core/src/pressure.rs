//! Polytropic pressure law `p(rho) = rho^gamma` and the constants derived from it.

use crate::error::{Error, Result};

/// Density window in which the energy estimates are carried out.
pub const DEFAULT_WINDOW: (f64, f64) = (0.5, 1.5);

/// Default adiabatic exponent.
pub const DEFAULT_GAMMA: f64 = 1.4;

const WINDOW_SAMPLES: usize = 20_001;

/// Pressure law with its derived constants.
///
/// * `beta = p'(1)`
/// * `alpha1 = min(inf p'(s)/s, 1/2)` and `alpha2 = max(sup p'(s)/s, 3/2)` over the window
/// * `q = sup |p^(j)(s)|` for `0 <= j <= q_order` over the window
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureLaw {
    gamma: f64,
    window: (f64, f64),
    pub beta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub q: f64,
    pub q_order: usize,
}

impl PressureLaw {
    /// `p = rho^gamma` on the default window with derivative bound up to order 3.
    pub fn polytropic(gamma: f64) -> Result<Self> {
        Self::with_window(gamma, DEFAULT_WINDOW, 3)
    }

    /// `q_order` is the highest derivative entering `q`; the decay theorem uses `N + d + 3`.
    pub fn with_window(gamma: f64, window: (f64, f64), q_order: usize) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "p'(rho) = gamma rho^(gamma-1) must be positive; got gamma = {gamma}"
            )));
        }
        let (lo, hi) = window;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("invalid density window ({lo}, {hi})")));
        }
        let mut law = PressureLaw {
            gamma,
            window,
            beta: 0.0,
            alpha1: 0.0,
            alpha2: 0.0,
            q: 0.0,
            q_order,
        };
        let samples: Vec<f64> = (0..WINDOW_SAMPLES)
            .map(|i| lo + (hi - lo) * i as f64 / (WINDOW_SAMPLES - 1) as f64)
            .collect();
        let mut inf = f64::INFINITY;
        let mut sup = f64::NEG_INFINITY;
        for &s in &samples {
            let slope = law.dp(s);
            if !(slope > 0.0) {
                return Err(Error::InvalidInput(format!("p'({s}) = {slope} is not positive")));
            }
            inf = inf.min(slope / s);
            sup = sup.max(slope / s);
        }
        law.beta = law.dp(1.0);
        law.alpha1 = inf.min(0.5);
        law.alpha2 = sup.max(1.5);
        law.q = (0..=q_order)
            .flat_map(|j| samples.iter().map(move |&s| (j, s)))
            .map(|(j, s)| law.derivative(j, s).abs())
            .fold(0.0, f64::max);
        Ok(law)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn p(&self, rho: f64) -> f64 {
        rho.powf(self.gamma)
    }

    pub fn dp(&self, rho: f64) -> f64 {
        self.gamma * rho.powf(self.gamma - 1.0)
    }

    /// `j`-th derivative of `p`.
    pub fn derivative(&self, j: usize, rho: f64) -> f64 {
        let mut coef = 1.0;
        for i in 0..j {
            coef *= self.gamma - i as f64;
        }
        if coef == 0.0 {
            0.0
        } else {
            coef * rho.powf(self.gamma - j as f64)
        }
    }

    /// Potential energy density `e(rho) = 2 rho int_1^rho (p(s) - p(1)) / s^2 ds`.
    pub fn potential(&self, rho: f64) -> f64 {
        let g = self.gamma;
        let integral = if (g - 1.0).abs() < 1e-12 {
            rho.ln() + 1.0 / rho - 1.0
        } else {
            (rho.powf(g - 1.0) - 1.0) / (g - 1.0) + 1.0 / rho - 1.0
        };
        2.0 * rho * integral
    }

    /// The same integral evaluated by adaptive Simpson quadrature.
    pub fn potential_by_quadrature(&self, rho: f64, tol: f64) -> f64 {
        let p1 = self.p(1.0);
        let f = |s: f64| (self.p(s) - p1) / (s * s);
        2.0 * rho * adaptive_simpson(&f, 1.0, rho, tol)
    }

    /// `e'(rho)`, used for the energy flux.
    pub fn potential_slope(&self, rho: f64) -> f64 {
        let g = self.gamma;
        let integral = if (g - 1.0).abs() < 1e-12 {
            rho.ln() + 1.0 / rho - 1.0
        } else {
            (rho.powf(g - 1.0) - 1.0) / (g - 1.0) + 1.0 / rho - 1.0
        };
        2.0 * integral + 2.0 * (self.p(rho) - self.p(1.0)) / rho
    }
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` (either orientation).
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 50)
}
