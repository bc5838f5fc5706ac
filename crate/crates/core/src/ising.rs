//! Ising problems: representation, energies, exact ground states, and the
//! reduction of a coupled-quantum-dot qubit to annealing parameters.
//!
//! Spin convention: `+1` is the charge state with one extra electron
//! (`|n+1⟩`), `-1` is `|n⟩`. In basis-state indices, bit `i` set means
//! qubit `i` is `+1`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Spin = i8;

/// Largest model handled by exhaustive enumeration.
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EnergyUnit {
    #[default]
    ElectronVolt,
    /// Dimensionless units used for schedule studies.
    Algorithmic,
}

/// `H = Σ_{i<j} J_ij s_i s_j + Σ_i h_i s_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProblemFile", into = "ProblemFile")]
pub struct IsingModel {
    n: usize,
    couplings: BTreeMap<(usize, usize), f64>,
    fields: Vec<f64>,
    unit: EnergyUnit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EdgeRecord {
    i: usize,
    j: usize,
    #[serde(rename = "J_eV")]
    j_ev: f64,
}

/// On-disk form: `{n, edges: [{i, j, J_eV}], fields: [h_eV], unit}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProblemFile {
    n: usize,
    #[serde(default)]
    edges: Vec<EdgeRecord>,
    #[serde(default)]
    fields: Vec<f64>,
    #[serde(default)]
    unit: EnergyUnit,
}

impl TryFrom<ProblemFile> for IsingModel {
    type Error = Error;

    fn try_from(p: ProblemFile) -> Result<Self> {
        let mut m = IsingModel::new(p.n).with_unit(p.unit);
        if !p.fields.is_empty() {
            if p.fields.len() != p.n {
                return Err(Error::SizeMismatch { expected: p.n, got: p.fields.len() });
            }
            for (i, &h) in p.fields.iter().enumerate() {
                m.set_field(i, h)?;
            }
        }
        for e in p.edges {
            m.add_coupling(e.i, e.j, e.j_ev)?;
        }
        Ok(m)
    }
}

impl From<IsingModel> for ProblemFile {
    fn from(m: IsingModel) -> Self {
        ProblemFile {
            n: m.n,
            edges: m
                .couplings
                .iter()
                .map(|(&(i, j), &v)| EdgeRecord { i, j, j_ev: v })
                .collect(),
            fields: m.fields,
            unit: m.unit,
        }
    }
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        IsingModel { n, couplings: BTreeMap::new(), fields: vec![0.0; n], unit: EnergyUnit::default() }
    }

    pub fn with_unit(mut self, unit: EnergyUnit) -> Self {
        self.unit = unit;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn unit(&self) -> EnergyUnit {
        self.unit
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    /// Couplings keyed by `(i, j)` with `i < j`.
    pub fn couplings(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.couplings
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        let key = if i < j { (i, j) } else { (j, i) };
        self.couplings.get(&key).copied().unwrap_or(0.0)
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidParameter(format!("qubit index {i} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    pub fn set_field(&mut self, i: usize, h: f64) -> Result<()> {
        self.check_index(i)?;
        if !h.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite field on qubit {i}")));
        }
        self.fields[i] = h;
        Ok(())
    }

    /// Sets `J_ij`, replacing any previous value. Zero removes the entry.
    pub fn set_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        self.check_index(i)?;
        self.check_index(j)?;
        if i == j {
            return Err(Error::InvalidParameter(format!("self-coupling on qubit {i}")));
        }
        if !value.is_finite() {
            return Err(Error::InvalidParameter(format!("non-finite coupling ({i}, {j})")));
        }
        let key = (i.min(j), i.max(j));
        if value == 0.0 {
            self.couplings.remove(&key);
        } else {
            self.couplings.insert(key, value);
        }
        Ok(())
    }

    /// Adds to `J_ij`.
    pub fn add_coupling(&mut self, i: usize, j: usize, value: f64) -> Result<()> {
        let cur = if i != j { self.coupling(i, j) } else { 0.0 };
        self.set_coupling(i, j, cur + value)
    }

    /// Neighbour lists `(j, J_ij)` for every qubit.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (&(i, j), &v) in &self.couplings {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    /// `Σ|J| + Σ|h|`, a scale for tolerances.
    pub fn magnitude(&self) -> f64 {
        self.couplings.values().map(|v| v.abs()).sum::<f64>() + self.fields.iter().map(|h| h.abs()).sum::<f64>()
    }

    pub fn energy(&self, spins: &[Spin]) -> Result<f64> {
        if spins.len() != self.n {
            return Err(Error::SizeMismatch { expected: self.n, got: spins.len() });
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("spin value {bad} is not ±1")));
        }
        Ok(self.energy_unchecked(spins))
    }

    pub(crate) fn energy_unchecked(&self, spins: &[Spin]) -> f64 {
        let pair: f64 = self
            .couplings
            .iter()
            .map(|(&(i, j), &v)| v * f64::from(spins[i]) * f64::from(spins[j]))
            .sum();
        let field: f64 = self.fields.iter().zip(spins).map(|(h, &s)| h * f64::from(s)).sum();
        pair + field
    }

    /// Energy of basis state `index` (bit `i` set ⇔ `s_i = +1`).
    pub fn energy_of_index(&self, index: usize) -> f64 {
        let s = |i: usize| if index >> i & 1 == 1 { 1.0 } else { -1.0 };
        let pair: f64 = self.couplings.iter().map(|(&(i, j), &v)| v * s(i) * s(j)).sum();
        let field: f64 = self.fields.iter().enumerate().map(|(i, h)| h * s(i)).sum();
        pair + field
    }

    /// Diagonal of the Ising Hamiltonian over all `2^n` basis states.
    pub fn diagonal(&self) -> Vec<f64> {
        let adj = self.adjacency();
        let dim = 1usize << self.n;
        let mut out = vec![0.0; dim];
        // Gray-code walk with single-flip energy updates.
        let mut spins = vec![-1i8; self.n];
        let mut e = self.energy_unchecked(&spins);
        out[0] = e;
        for step in 1..dim {
            let k = step.trailing_zeros() as usize;
            let local: f64 = self.fields[k] + adj[k].iter().map(|&(j, v)| v * f64::from(spins[j])).sum::<f64>();
            e -= 2.0 * f64::from(spins[k]) * local;
            spins[k] = -spins[k];
            let gray = step ^ (step >> 1);
            out[gray] = e;
        }
        out
    }
}

pub fn spins_from_index(index: usize, n: usize) -> Vec<Spin> {
    (0..n).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn index_from_spins(spins: &[Spin]) -> usize {
    spins.iter().enumerate().filter(|(_, &s)| s > 0).fold(0, |acc, (i, _)| acc | 1 << i)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStates {
    pub energy: f64,
    /// Every minimiser, in lexicographic order (`-1 < +1`, qubit 0 first).
    pub states: Vec<Vec<Spin>>,
}

/// Degeneracy tolerance used when collecting minimisers.
pub fn degeneracy_tolerance(model: &IsingModel) -> f64 {
    1e-9 * (1.0 + model.magnitude())
}

/// Exhaustive enumeration of all `2^n` configurations.
pub fn ground_states_bruteforce(model: &IsingModel) -> Result<GroundStates> {
    if model.n() > BRUTE_FORCE_LIMIT {
        return Err(Error::Scale { what: "spin count", got: model.n(), limit: BRUTE_FORCE_LIMIT });
    }
    let diag = model.diagonal();
    let tol = degeneracy_tolerance(model);
    let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let mut states: Vec<Vec<Spin>> = diag
        .iter()
        .enumerate()
        .filter(|(_, &e)| e <= min + tol)
        .map(|(idx, _)| spins_from_index(idx, model.n()))
        .collect();
    states.sort();
    Ok(GroundStates { energy: min, states })
}

/// Per-qubit annealing parameters: transverse amplitude and extra field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub delta: Vec<f64>,
    pub h: Vec<f64>,
}

impl QubitParams {
    pub fn uniform(n: usize, delta: f64) -> Self {
        QubitParams { delta: vec![delta; n], h: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.delta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delta.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta.len() != self.h.len() {
            return Err(Error::SizeMismatch { expected: self.delta.len(), got: self.h.len() });
        }
        if let Some(d) = self.delta.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(Error::InvalidParameter(format!("transverse amplitude {d} must be finite and >= 0")));
        }
        Ok(())
    }
}

/// Single-electron double dot `t a†b + t* b†a + ε_α a†a + ε_β b†b`.
///
/// Mapped to `Δ σ_x + h σ_z` plus a discarded offset `(ε_α + ε_β)/2`, with
/// the upper dot (`a`) as `σ_z = +1`. The phase of `t` is absorbed into the
/// basis, so `Δ = |t|`.
pub fn cqd_qubit_params(t: Complex64, eps_alpha: f64, eps_beta: f64) -> Result<QubitParams> {
    if !(t.re.is_finite() && t.im.is_finite() && eps_alpha.is_finite() && eps_beta.is_finite()) {
        return Err(Error::InvalidParameter("non-finite double-dot parameter".into()));
    }
    Ok(QubitParams { delta: vec![t.norm()], h: vec![(eps_alpha - eps_beta) / 2.0] })
}
