//! Instantaneous spectral gap of the annealing Hamiltonian by dense
//! diagonalisation.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schedule::Shape;
use crate::ising::{IsingModel, QubitParams};
use crate::{Error, Result};

pub const GAP_MAX_QUBITS: usize = 12;
pub const DEFAULT_GRID: usize = 201;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResult {
    pub min_gap: f64,
    pub s_at_min: f64,
    /// `(s, E₁ − E₀)` at every grid point.
    pub curve: Vec<(f64, f64)>,
}

/// Dense `A Σ Δ_i σx_i + B (H_Ising + Σ h_i σz_i)`.
pub fn hamiltonian(model: &IsingModel, qubits: &QubitParams, a: f64, b: f64) -> DMatrix<f64> {
    let n = model.n();
    let dim = 1usize << n;
    let diag = model.diagonal();
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        let extra: f64 = qubits.h.iter().enumerate().map(|(i, &f)| if x >> i & 1 == 1 { f } else { -f }).sum();
        h[(x, x)] = b * (diag[x] + extra);
        for (q, &d) in qubits.delta.iter().enumerate() {
            h[(x, x ^ (1 << q))] += a * d;
        }
    }
    h
}

/// Lowest two eigenvalues of `H(s)`.
pub fn lowest_pair(model: &IsingModel, qubits: &QubitParams, a: f64, b: f64) -> (f64, f64) {
    let mut ev: Vec<f64> = SymmetricEigen::new(hamiltonian(model, qubits, a, b)).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    (ev[0], ev.get(1).copied().unwrap_or(f64::INFINITY))
}

/// Minimum of `E₁ − E₀` over `grid` equally spaced points of `s ∈ [0, 1]`.
pub fn spectral_gap(model: &IsingModel, qubits: &QubitParams, shape: &Shape, grid: usize) -> Result<GapResult> {
    if model.n() > GAP_MAX_QUBITS {
        return Err(Error::Scale { what: "qubits for dense diagonalisation", got: model.n(), limit: GAP_MAX_QUBITS });
    }
    if qubits.len() != model.n() {
        return Err(Error::SizeMismatch { expected: model.n(), got: qubits.len() });
    }
    qubits.validate()?;
    shape.validate()?;
    if grid < 2 {
        return Err(Error::InvalidParameter(format!("grid needs at least 2 points, got {grid}")));
    }
    let curve: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|k| {
            let s = k as f64 / (grid - 1) as f64;
            let (e0, e1) = lowest_pair(model, qubits, shape.a(s), shape.b(s));
            (s, e1 - e0)
        })
        .collect();
    let &(s_at_min, min_gap) = curve.iter().min_by(|x, y| x.1.total_cmp(&y.1)).expect("grid is non-empty");
    Ok(GapResult { min_gap, s_at_min, curve })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_qubit_gap_is_twice_a() {
        let m = IsingModel::new(1);
        let r = spectral_gap(&m, &QubitParams::uniform(1, 1.0), &Shape::Linear, 11).unwrap();
        for &(s, g) in &r.curve {
            assert!((g - 2.0 * (1.0 - s)).abs() < 1e-12);
        }
        assert!(r.min_gap.abs() < 1e-12);
        assert_eq!(r.s_at_min, 1.0);
    }

    #[test]
    fn biased_qubit_matches_closed_form() {
        let mut m = IsingModel::new(1);
        m.set_field(0, 1.0).unwrap();
        let grid = 201;
        let r = spectral_gap(&m, &QubitParams::uniform(1, 1.0), &Shape::Linear, grid).unwrap();
        let want = (0..grid)
            .map(|k| {
                let s = k as f64 / (grid - 1) as f64;
                2.0 * ((1.0 - s).powi(2) + s * s).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.min_gap - want).abs() < 1e-12);
        assert!((r.min_gap - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn af_pair_closes_at_the_end() {
        let mut m = IsingModel::new(2);
        m.set_coupling(0, 1, 1.0).unwrap();
        let r = spectral_gap(&m, &QubitParams::uniform(2, 1.0), &Shape::Linear, 51).unwrap();
        assert!(r.min_gap < 1e-12);
        assert_eq!(r.s_at_min, 1.0);
    }

    #[test]
    fn too_many_qubits() {
        let m = IsingModel::new(13);
        assert!(matches!(spectral_gap(&m, &QubitParams::uniform(13, 1.0), &Shape::Linear, 3), Err(Error::Scale { .. })));
    }
}
