use crate::diophantine::RatioStats;
use crate::error::{Error, Result};
use crate::solver::{initial_state, remainders, InitialData, SolverConfig};
use crate::spectral::SpectralField;
use crate::state::PerturbationState;

/// Measured remainder ratios of one state at order `l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderRatios {
    /// `||R1||_l / (||a,u||_2 ||a,u||_{l+1})`, `||R2||_l / ((1 + ||a,u,h||_3^2) ||a,u,h||_3 ||a,u,h||_{l+1})`
    /// and `||R3||_l / (||u,h||_3 ||u,h||_{l+1})`.
    pub bound: [f64; 3],
    /// `||R_i||_l / ||a,u,h||_{l+1}`, which is linear in the amplitude.
    pub scaled: [f64; 3],
}

fn joint_norm(fields: &[&SpectralField], s: f64) -> f64 {
    fields.iter().map(|f| f.sobolev_norm_sq(s)).sum::<f64>().sqrt()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

pub fn remainder_ratios(state: &PerturbationState, config: &SolverConfig, l: f64) -> Result<RemainderRatios> {
    let rem = remainders(state, config)?;
    let [u0, u1, u2] = state.u.components();
    let [h0, h1, h2] = state.h.components();
    let au = [&state.a, u0, u1, u2];
    let uh = [u0, u1, u2, h0, h1, h2];
    let all = state.fields();
    let r1 = rem.r1.sobolev_norm(l);
    let r2 = rem.r2.sobolev_norm(l);
    let r3 = rem.r3.sobolev_norm(l);
    let all3 = joint_norm(&all, 3.0);
    let all_l = joint_norm(&all, l + 1.0);
    Ok(RemainderRatios {
        bound: [
            ratio(r1, joint_norm(&au, 2.0) * joint_norm(&au, l + 1.0)),
            ratio(r2, (1.0 + all3 * all3) * all3 * all_l),
            ratio(r3, joint_norm(&uh, 3.0) * joint_norm(&uh, l + 1.0)),
        ],
        scaled: [ratio(r1, all_l), ratio(r2, all_l), ratio(r3, all_l)],
    })
}

/// Ratio statistics over a sweep of random initial states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderSweep {
    pub amplitude: f64,
    pub l: f64,
    pub bound: [RatioStats; 3],
    pub scaled: [RatioStats; 3],
}

impl RemainderSweep {
    /// Ratio of mean scaled ratios, `self / other`, per remainder.
    pub fn scaled_mean_ratio(&self, other: &RemainderSweep) -> [f64; 3] {
        std::array::from_fn(|i| self.scaled[i].mean / other.scaled[i].mean)
    }

    /// Ratio of mean bound ratios, `self / other`, per remainder.
    pub fn bound_mean_ratio(&self, other: &RemainderSweep) -> [f64; 3] {
        std::array::from_fn(|i| self.bound[i].mean / other.bound[i].mean)
    }
}

/// Draws `samples` random states with seeds `config.seed, config.seed + 1, ...`
/// at the given amplitude; `config.init` must be random data.
pub fn remainder_sweep(config: &SolverConfig, amplitude: f64, samples: usize, l: f64) -> Result<RemainderSweep> {
    let InitialData::Random { kmax, .. } = config.init else {
        return Err(Error::InvalidInput("remainder sweeps need random initial data".into()));
    };
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples as u64 {
        let cfg = SolverConfig {
            seed: config.seed.wrapping_add(i),
            init: InitialData::Random { amplitude, kmax },
            ..config.clone()
        };
        rows.push(remainder_ratios(&initial_state(&cfg)?, &cfg, l)?);
    }
    let stats = |f: &dyn Fn(&RemainderRatios) -> f64| RatioStats::from_values(&rows.iter().map(f).collect::<Vec<_>>());
    Ok(RemainderSweep {
        amplitude,
        l,
        bound: std::array::from_fn(|i| stats(&|r| r.bound[i])),
        scaled: std::array::from_fn(|i| stats(&|r| r.scaled[i])),
    })
}
