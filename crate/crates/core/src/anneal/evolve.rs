//! State-vector evolution under `H(s) = A(s) Σ Δ_i σx_i + B(s) H_Ising`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::Schedule;
use crate::ising::{index_from_spins, spins_from_index, IsingModel, QubitParams, Spin};
use crate::units::seconds_to_internal;
use crate::{Error, Result};

/// Largest qubit count evolved as a state vector.
pub const EVOLVE_MAX_QUBITS: usize = 14;
pub const DEFAULT_SHOTS: usize = 1024;
/// Phenomenological dephasing time (s).
pub const DEFAULT_T2_SECONDS: f64 = 4.8e-7;

/// Pure dephasing by random `σz` flips on each qubit at rate `1/T2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dephasing {
    pub t2_seconds: f64,
    /// The model's energy unit in eV; sets the internal time unit ħ/E.
    pub energy_unit_ev: f64,
    pub trajectories: usize,
}

impl Dephasing {
    pub fn t2_internal(&self) -> f64 {
        seconds_to_internal(self.t2_seconds, self.energy_unit_ev)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub shots: usize,
    pub seed: u64,
    pub dephasing: Option<Dephasing>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions { shots: DEFAULT_SHOTS, seed: 0, dephasing: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    pub n: usize,
    /// Probability of each basis state (bit `i` set ⇔ qubit `i` is +1);
    /// averaged over trajectories when dephasing is on.
    pub probabilities: Vec<f64>,
    /// Final amplitudes of a closed run.
    #[serde(skip)]
    pub final_state: Option<Vec<Complex64>>,
    /// Measured samples keyed by spin string (`+`/`-`, qubit 0 first).
    pub histogram: BTreeMap<String, usize>,
    pub shots: usize,
    /// Largest `|‖ψ‖² − 1|` over the run (and over trajectories).
    pub norm_drift: f64,
    pub schedule: Schedule,
    pub trajectories: usize,
    pub t2_internal: Option<f64>,
    pub most_probable: Vec<Spin>,
}

impl AnnealResult {
    pub fn probability_of(&self, spins: &[Spin]) -> f64 {
        self.probabilities[index_from_spins(spins)]
    }
}

pub fn spin_string(spins: &[Spin]) -> String {
    spins.iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
}

/// Ground state of `+A Σ Δ σx`: every qubit in `|−⟩`, amplitude
/// `(−1)^{popcount}/√2ⁿ`.
pub fn initial_state(n: usize) -> Vec<Complex64> {
    let norm = (0.5f64).powf(n as f64 / 2.0);
    (0..1usize << n)
        .map(|x| Complex64::new(if x.count_ones() % 2 == 0 { norm } else { -norm }, 0.0))
        .collect()
}

fn apply_diagonal(psi: &mut [Complex64], diag: &[f64], factor: f64) {
    psi.iter_mut().zip(diag).for_each(|(a, &e)| *a *= Complex64::from_polar(1.0, -factor * e));
}

/// `exp(−i θ σx)` on one qubit.
fn apply_x_rotation(psi: &mut [Complex64], qubit: usize, theta: f64) {
    let (c, s) = (theta.cos(), theta.sin());
    let bit = 1usize << qubit;
    let mis = Complex64::new(0.0, -s);
    for x in 0..psi.len() {
        if x & bit == 0 {
            let (a, b) = (psi[x], psi[x | bit]);
            psi[x] = a * c + b * mis;
            psi[x | bit] = b * c + a * mis;
        }
    }
}

fn norm_sqr(psi: &[Complex64]) -> f64 {
    psi.iter().map(|a| a.norm_sqr()).sum()
}

/// Problem diagonal: Ising energy plus the per-qubit extra fields.
fn problem_diagonal(model: &IsingModel, qubits: &QubitParams) -> Vec<f64> {
    let mut diag = model.diagonal();
    for (x, e) in diag.iter_mut().enumerate() {
        for (i, &h) in qubits.h.iter().enumerate() {
            *e += if x >> i & 1 == 1 { h } else { -h };
        }
    }
    diag
}

fn check_inputs(model: &IsingModel, qubits: &QubitParams, sched: &Schedule) -> Result<()> {
    if model.n() > EVOLVE_MAX_QUBITS {
        return Err(Error::Scale { what: "qubits for state-vector evolution", got: model.n(), limit: EVOLVE_MAX_QUBITS });
    }
    qubits.validate()?;
    if qubits.len() != model.n() {
        return Err(Error::SizeMismatch { expected: model.n(), got: qubits.len() });
    }
    sched.validate()
}

/// Symmetric split step: half diagonal, X rotations, half diagonal, with the
/// schedule evaluated at the step midpoint. `jump` is called after each step.
fn run(
    diag: &[f64],
    delta: &[f64],
    sched: &Schedule,
    mut jump: impl FnMut(&mut [Complex64]),
) -> (Vec<Complex64>, f64) {
    let n = delta.len();
    let mut psi = initial_state(n);
    let dt = sched.dt();
    let mut drift: f64 = 0.0;
    for k in 0..sched.steps {
        let s = (k as f64 + 0.5) / sched.steps as f64;
        let (a, b) = (sched.a(s), sched.b(s));
        apply_diagonal(&mut psi, diag, b * dt / 2.0);
        for (q, &d) in delta.iter().enumerate() {
            apply_x_rotation(&mut psi, q, a * d * dt);
        }
        apply_diagonal(&mut psi, diag, b * dt / 2.0);
        jump(&mut psi);
        drift = drift.max((norm_sqr(&psi) - 1.0).abs());
    }
    (psi, drift)
}

fn sample_histogram(probabilities: &[f64], n: usize, shots: usize, seed: u64) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    if shots == 0 {
        return hist;
    }
    let dist = WeightedIndex::new(probabilities.iter().map(|p| p.max(0.0))).expect("probabilities are normalised");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..shots {
        *hist.entry(spin_string(&spins_from_index(dist.sample(&mut rng), n))).or_insert(0) += 1;
    }
    hist
}

/// Anneals from the transverse ground state to the problem Hamiltonian.
///
/// Without dephasing the run is a closed evolution; with it, independent
/// quantum trajectories (each with its own random stream derived from the
/// seed) are averaged. Samples are drawn from the resulting distribution.
pub fn evolve(model: &IsingModel, qubits: &QubitParams, sched: &Schedule, opts: &EvolveOptions) -> Result<AnnealResult> {
    check_inputs(model, qubits, sched)?;
    let n = model.n();
    let diag = problem_diagonal(model, qubits);
    let (probabilities, final_state, drift, trajectories, t2) = match opts.dephasing {
        None => {
            let (psi, drift) = run(&diag, &qubits.delta, sched, |_| {});
            let p: Vec<f64> = psi.iter().map(|a| a.norm_sqr()).collect();
            (p, Some(psi), drift, 0, None)
        }
        Some(d) => {
            let t2 = d.t2_internal();
            if !(t2.is_finite() && t2 > 0.0) {
                return Err(Error::InvalidParameter(format!("T2 must be positive, got {} s", d.t2_seconds)));
            }
            if d.trajectories == 0 {
                return Err(Error::InvalidParameter("at least one trajectory is required".into()));
            }
            let flip = 1.0 - (-sched.dt() / t2).exp();
            let runs: Vec<(Vec<f64>, f64)> = (0..d.trajectories)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                    rng.set_stream(t as u64 + 1);
                    let (psi, drift) = run(&diag, &qubits.delta, sched, |psi| {
                        for q in 0..n {
                            if rng.gen::<f64>() < flip {
                                let bit = 1usize << q;
                                psi.iter_mut().enumerate().filter(|(x, _)| x & bit != 0).for_each(|(_, a)| *a = -*a);
                            }
                        }
                    });
                    (psi.iter().map(|a| a.norm_sqr()).collect(), drift)
                })
                .collect();
            let mut p = vec![0.0; 1 << n];
            let mut drift: f64 = 0.0;
            for (probs, dr) in &runs {
                p.iter_mut().zip(probs).for_each(|(acc, v)| *acc += v);
                drift = drift.max(*dr);
            }
            let w = 1.0 / d.trajectories as f64;
            p.iter_mut().for_each(|v| *v *= w);
            (p, None, drift, d.trajectories, Some(t2))
        }
    };
    let best = probabilities
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &p)| if p > acc.1 { (i, p) } else { acc })
        .0;
    Ok(AnnealResult {
        n,
        histogram: sample_histogram(&probabilities, n, opts.shots, opts.seed),
        probabilities,
        final_state,
        shots: opts.shots,
        norm_drift: drift,
        schedule: sched.clone(),
        trajectories,
        t2_internal: t2,
        most_probable: spins_from_index(best, n),
    })
}

/// Total probability of the target spin configurations.
pub fn success_probability(result: &AnnealResult, targets: &[Vec<Spin>]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::InvalidParameter("target set is empty".into()));
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut p = 0.0;
    for t in targets {
        if t.len() != result.n {
            return Err(Error::SizeMismatch { expected: result.n, got: t.len() });
        }
        if seen.insert(t.clone()) {
            p += result.probability_of(t);
        }
    }
    Ok(p.min(1.0))
}

/// Fraction of recorded shots that hit the targets.
pub fn empirical_success(result: &AnnealResult, targets: &[Vec<Spin>]) -> Result<f64> {
    if result.shots == 0 {
        return Err(Error::InvalidParameter("result holds no samples".into()));
    }
    let keys: std::collections::BTreeSet<String> = targets.iter().map(|t| spin_string(t)).collect();
    let hits: usize = result.histogram.iter().filter(|(k, _)| keys.contains(*k)).map(|(_, v)| v).sum();
    Ok(hits as f64 / result.shots as f64)
}

/// Total-variation distance between two distributions of equal length.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}
