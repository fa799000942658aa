use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Least-squares fit of `E(t) = C (1 + alpha t)^(-p)` in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub c: f64,
    pub alpha: f64,
    pub p: f64,
    /// Root-mean-square residual of `ln E`.
    pub residual: f64,
    /// First and last fitted sample times.
    pub window: (f64, f64),
    pub samples: usize,
    /// The series is constant; `alpha` and `p` are then set to zero.
    pub degenerate: bool,
}

impl DecayFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.c * (1.0 + self.alpha * t).powf(-self.p)
    }
}

/// Upper bound on the fitted exponent. Without it an exponential series is fitted
/// perfectly in the limit `alpha -> 0`, `p alpha` fixed.
pub const MAX_EXPONENT: f64 = 50.0;

/// Minimum number of samples accepted by [`decay_fit`].
pub const MIN_FIT_SAMPLES: usize = 8;

/// Best `(ln C, p)` for fixed `alpha` with `p >= 0`, and the residual sum of squares.
fn profile(t: &[f64], y: &[f64], alpha: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = t.iter().map(|&t| (alpha * t).ln_1p()).collect();
    let n = t.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = if sxx > 0.0 { -sxy / sxx } else { 0.0 };
    let p = p.clamp(0.0, MAX_EXPONENT);
    let lc = my + p * mx;
    let rss = x.iter().zip(y).map(|(x, y)| (lc - p * x - y).powi(2)).sum();
    (lc, p, rss)
}

fn rss_at(t: &[f64], y: &[f64], ln_c: f64, alpha: f64, p: f64) -> f64 {
    t.iter()
        .zip(y)
        .map(|(&t, &y)| (ln_c - p * (alpha * t).ln_1p() - y).powi(2))
        .sum()
}

/// `alpha` from the logarithmic slopes at both ends: for the model,
/// `d ln E/dt = -p alpha / (1 + alpha t)`.
fn endpoint_alpha(t: &[f64], y: &[f64]) -> Option<f64> {
    let n = t.len();
    let s0 = (y[1] - y[0]) / (t[1] - t[0]);
    let s1 = (y[n - 1] - y[n - 2]) / (t[n - 1] - t[n - 2]);
    let (ta, tb) = (0.5 * (t[0] + t[1]), 0.5 * (t[n - 2] + t[n - 1]));
    if s0 < 0.0 && s1 < 0.0 {
        let q = s0 / s1;
        let alpha = (q - 1.0) / (tb - q * ta);
        (alpha > 0.0 && alpha.is_finite()).then_some(alpha)
    } else {
        None
    }
}

/// Fits `E(t) = C (1 + alpha t)^(-p)` with `C > 0`, `alpha >= 0` and
/// `0 <= p <= MAX_EXPONENT`.
///
/// `alpha` is found by a profile search in `ln alpha` (coarse scan around the
/// endpoint-slope estimate, golden section, then Gauss-Newton polishing); `C` and
/// `p` solve a linear least-squares problem for each `alpha`. A constant series
/// yields `p = 0` and the degeneracy flag.
pub fn decay_fit(times: &[f64], values: &[f64]) -> Result<DecayFit> {
    if times.len() != values.len() {
        return Err(Error::InvalidInput("series lengths differ".into()));
    }
    if times.len() < MIN_FIT_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "decay fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            times.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidInput(format!("decay fit needs positive values, got {v}")));
    }
    if times[0] < 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("times must be nonnegative and increasing".into()));
    }
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let window = (times[0], times[times.len() - 1]);
    let samples = times.len();
    let finish = |ln_c: f64, alpha: f64, p: f64, degenerate: bool| DecayFit {
        c: ln_c.exp(),
        alpha,
        p,
        residual: (rss_at(times, &y, ln_c, alpha, p) / samples as f64).sqrt(),
        window,
        samples,
        degenerate,
    };

    let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-14 * hi.abs().max(1.0) {
        let ln_c = y.iter().sum::<f64>() / samples as f64;
        return Ok(finish(ln_c, 0.0, 0.0, true));
    }

    let span = window.1.max(f64::MIN_POSITIVE);
    let centre = endpoint_alpha(times, &y).map_or(1.0 / span, |a| a.clamp(1e-8 / span, 1e8 / span));
    let objective = |s: f64| profile(times, &y, s.exp()).2;
    // coarse scan over twelve decades around the estimate
    let steps = 97;
    let grid: Vec<f64> = (0..steps).map(|i| centre.ln() + (i as f64 - 48.0) * 0.125 * 10f64.ln()).collect();
    let values_on_grid: Vec<f64> = grid.iter().map(|&s| objective(s)).collect();
    let best = (0..steps)
        .min_by(|&i, &j| values_on_grid[i].total_cmp(&values_on_grid[j]))
        .expect("nonempty scan");
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(steps - 1)]);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = objective(d);
        }
    }
    let s = 0.5 * (a + b);
    let (mut ln_c, mut p, mut rss) = profile(times, &y, s.exp());
    let mut alpha = s.exp();

    // Gauss-Newton polish in (ln C, ln alpha, p)
    for _ in 0..20 {
        if p == 0.0 {
            break;
        }
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&t, &yv) in times.iter().zip(&y) {
            let x = (alpha * t).ln_1p();
            let r = ln_c - p * x - yv;
            let j = Vector3::new(1.0, -p * alpha * t / (1.0 + alpha * t), -x);
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let Some(delta) = jtj.lu().solve(&(-jtr)) else { break };
        let (nc, na, np) = (ln_c + delta[0], alpha * delta[1].exp(), p + delta[2]);
        let next = rss_at(times, &y, nc, na, np);
        if !((0.0..=MAX_EXPONENT).contains(&np) && next < rss) {
            break;
        }
        (ln_c, alpha, p, rss) = (nc, na, np, next);
    }
    Ok(finish(ln_c, alpha, p, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_estimate_is_exact_for_the_model() {
        let t: Vec<f64> = (0..1000).map(|i| i as f64 * 0.01).collect();
        let y: Vec<f64> = t.iter().map(|t| -3.0 * (0.5 * t).ln_1p()).collect();
        let a = endpoint_alpha(&t, &y).unwrap();
        assert!((a - 0.5).abs() < 1e-3, "{a}");
    }
}
