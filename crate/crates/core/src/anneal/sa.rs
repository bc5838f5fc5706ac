//! Classical simulated annealing: single-spin Metropolis with geometric
//! cooling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ising::{IsingModel, Spin};
use crate::{Error, Result};

pub const SA_MAX_SPINS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub t_start: f64,
    pub t_end: f64,
    pub sweeps: usize,
}

impl SaSchedule {
    /// Starts hot enough to flip any spin (twice the largest local field
    /// bound) and ends at a hundredth of the weakest nonzero coupling or field.
    pub fn for_model(model: &IsingModel, sweeps: usize) -> Self {
        let mut bound = model.fields().iter().map(|h| h.abs()).collect::<Vec<_>>();
        for (&(i, j), &v) in model.couplings() {
            bound[i] += v.abs();
            bound[j] += v.abs();
        }
        let hot = bound.iter().copied().fold(0.0, f64::max).max(1e-12) * 2.0;
        let weakest = model
            .couplings()
            .values()
            .chain(model.fields())
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min);
        let cold = if weakest.is_finite() { weakest * 0.01 } else { hot * 1e-3 };
        SaSchedule { t_start: hot, t_end: cold.min(hot), sweeps }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaResult {
    pub spins: Vec<Spin>,
    pub energy: f64,
}

/// Runs `sweeps` Metropolis sweeps (one attempted flip per spin, in index
/// order) with temperature `t_start (t_end/t_start)^{k/(sweeps−1)}`.
/// Returns the lowest-energy configuration visited.
pub fn simulated_annealing_baseline(model: &IsingModel, sched: &SaSchedule, seed: u64) -> Result<SaResult> {
    let n = model.n();
    if n > SA_MAX_SPINS {
        return Err(Error::Scale { what: "spins for simulated annealing", got: n, limit: SA_MAX_SPINS });
    }
    if !(sched.t_start > 0.0 && sched.t_end > 0.0 && sched.t_end <= sched.t_start) || sched.sweeps == 0 {
        return Err(Error::InvalidParameter(format!("bad annealing schedule {sched:?}")));
    }
    let adj = model.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spins: Vec<Spin> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    let mut energy = model.energy(&spins)?;
    let mut best = SaResult { spins: spins.clone(), energy };
    let ratio = sched.t_end / sched.t_start;
    for k in 0..sched.sweeps {
        let frac = if sched.sweeps == 1 { 1.0 } else { k as f64 / (sched.sweeps - 1) as f64 };
        let beta = 1.0 / (sched.t_start * ratio.powf(frac));
        for i in 0..n {
            let local: f64 = model.field(i) + adj[i].iter().map(|&(j, v)| v * spins[j] as f64).sum::<f64>();
            let delta = -2.0 * spins[i] as f64 * local;
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                spins[i] = -spins[i];
                energy += delta;
                if energy < best.energy - 1e-12 {
                    best = SaResult { spins: spins.clone(), energy };
                }
            }
        }
    }
    best.energy = model.energy(&best.spins)?;
    Ok(best)
}
