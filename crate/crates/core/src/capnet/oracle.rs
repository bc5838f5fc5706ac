//! Brute-force electrostatics: minimise the stored energy minus battery work
//! over every capacitor charge, with one charge constraint per floating gate,
//! by solving the stationarity (KKT) system directly.
//!
//! Internally capacitances are in aF and charges in e, so energies come out in
//! e²/aF and are converted to eV on the way out.

use nalgebra::{DMatrix, DVector};

use super::caps::{build_capacitances, CapacitanceSet};
use super::lattice::{CellBias, LatticeSpec};
use crate::ising::IsingModel;
use crate::units::{AF, E_CHARGE};
use crate::{Error, Result};

/// Largest lattice the energy oracle accepts (5×5).
pub const ORACLE_MAX_CELLS: usize = 25;
/// Largest lattice for Walsh extraction (2^16 energy evaluations).
pub const WALSH_MAX_CELLS: usize = 16;

const E2_PER_AF_TO_EV: f64 = E_CHARGE / AF;

#[derive(Debug, Clone, Copy)]
enum Plate {
    Island(usize),
    Electrode(f64),
}

#[derive(Debug, Clone, Copy)]
struct Capacitor {
    c_af: f64,
    first: Plate,
    second: Plate,
}

/// Factored stationarity system of one lattice at fixed bias. The solution is
/// affine in the occupations, so it is stored as a base solution plus one
/// column per island.
#[derive(Debug, Clone)]
pub struct ChargingOracle {
    islands: usize,
    caps: Vec<Capacitor>,
    base: DVector<f64>,
    per_island: Vec<DVector<f64>>,
}

fn volts_to_e_per_af(v: f64) -> f64 {
    v * AF / E_CHARGE
}

fn capacitor_list(caps: &CapacitanceSet, biases: &[CellBias]) -> Vec<Capacitor> {
    let (rows, cols) = (caps.rows(), caps.cols());
    let id = |i: usize, j: usize| i * cols + j;
    let mut out = Vec::new();
    let mut push = |c: f64, first: Plate, second: Plate| {
        if c > 0.0 {
            out.push(Capacitor { c_af: c / AF, first, second });
        }
    };
    for i in 0..rows {
        for j in 0..cols {
            let c = caps.get(i, j);
            let me = Plate::Island(id(i, j));
            let b = biases[id(i, j)];
            push(c.a, me, Plate::Electrode(b.v_cg));
            push(c.b, me, Plate::Electrode(b.v_sub));
            push(c.h, me, Plate::Electrode(b.v_s));
            push(c.i, me, Plate::Electrode(b.v_d));
            if j + 1 < cols {
                push(c.d, me, Plate::Island(id(i, j + 1)));
                push(c.e, Plate::Electrode(b.v_cg), Plate::Island(id(i, j + 1)));
                push(c.f, me, Plate::Electrode(biases[id(i, j + 1)].v_cg));
            }
            if i + 1 < rows {
                push(c.l, me, Plate::Island(id(i + 1, j)));
                push(c.m, Plate::Electrode(b.v_cg), Plate::Island(id(i + 1, j)));
                push(c.n, me, Plate::Electrode(biases[id(i + 1, j)].v_cg));
            }
            if i + 1 < rows && j + 1 < cols {
                push(c.j, me, Plate::Island(id(i + 1, j + 1)));
                push(c.k, Plate::Island(id(i + 1, j)), Plate::Island(id(i, j + 1)));
            }
        }
    }
    out
}

impl ChargingOracle {
    pub fn new(caps: &CapacitanceSet, biases: &[CellBias]) -> Result<Self> {
        let islands = caps.rows() * caps.cols();
        if islands > ORACLE_MAX_CELLS {
            return Err(Error::Scale { what: "oracle cells", got: islands, limit: ORACLE_MAX_CELLS });
        }
        if biases.len() != islands {
            return Err(Error::SizeMismatch { expected: islands, got: biases.len() });
        }
        let list = capacitor_list(caps, biases);
        let m = list.len();
        let dim = m + islands;
        let mut kkt = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (k, cap) in list.iter().enumerate() {
            kkt[(k, k)] = 1.0 / cap.c_af;
            let mut w = 0.0;
            if let Plate::Island(p) = cap.first {
                kkt[(m + p, k)] += 1.0;
                kkt[(k, m + p)] += 1.0;
            }
            if let Plate::Island(p) = cap.second {
                kkt[(m + p, k)] -= 1.0;
                kkt[(k, m + p)] -= 1.0;
            }
            if let Plate::Electrode(v) = cap.first {
                w += volts_to_e_per_af(v);
            }
            if let Plate::Electrode(v) = cap.second {
                w -= volts_to_e_per_af(v);
            }
            rhs[k] = w;
        }
        let lu = kkt.lu();
        let singular = || Error::OracleFailure("stationarity system is singular".into());
        let base = lu.solve(&rhs).ok_or_else(singular)?;
        let mut per_island = Vec::with_capacity(islands);
        for p in 0..islands {
            let mut e = DVector::<f64>::zeros(dim);
            e[m + p] = 1.0;
            per_island.push(lu.solve(&e).ok_or_else(singular)?);
        }
        let all_finite = base.iter().chain(per_island.iter().flat_map(|v| v.iter())).all(|x| x.is_finite());
        if !all_finite {
            return Err(singular());
        }
        Ok(ChargingOracle { islands, caps: list, base, per_island })
    }

    pub fn islands(&self) -> usize {
        self.islands
    }

    /// Minimum of stored energy minus battery work (eV) at the given island
    /// charges (units of e, real-valued).
    pub fn energy_at_charge(&self, charge: &[f64]) -> Result<f64> {
        if charge.len() != self.islands {
            return Err(Error::SizeMismatch { expected: self.islands, got: charge.len() });
        }
        let mut u = 0.0;
        for (k, cap) in self.caps.iter().enumerate() {
            let q = self.base[k] + charge.iter().zip(&self.per_island).map(|(n, col)| n * col[k]).sum::<f64>();
            let mut w = 0.0;
            if let Plate::Electrode(v) = cap.first {
                w += volts_to_e_per_af(v);
            }
            if let Plate::Electrode(v) = cap.second {
                w -= volts_to_e_per_af(v);
            }
            u += q * q / (2.0 * cap.c_af) - w * q;
        }
        Ok(u * E2_PER_AF_TO_EV)
    }

    pub fn energy(&self, occupation: &[i64]) -> Result<f64> {
        let charge: Vec<f64> = occupation.iter().map(|&n| n as f64).collect();
        self.energy_at_charge(&charge)
    }

    /// Walsh coefficients of the energy over occupations `n0 + b`, with spin
    /// `+1` for `b = 1`. Couplings below `1e-12` of the largest energy
    /// magnitude are treated as numerically zero.
    pub fn walsh_ising(&self, n0: &[i64]) -> Result<IsingModel> {
        let cells = self.islands;
        if cells > WALSH_MAX_CELLS {
            return Err(Error::Scale { what: "Walsh extraction cells", got: cells, limit: WALSH_MAX_CELLS });
        }
        if n0.len() != cells {
            return Err(Error::SizeMismatch { expected: cells, got: n0.len() });
        }
        let states = 1usize << cells;
        let mut table = Vec::with_capacity(states);
        let mut occ = vec![0i64; cells];
        for s in 0..states {
            for (c, o) in occ.iter_mut().enumerate() {
                *o = n0[c] + ((s >> c) & 1) as i64;
            }
            table.push(self.energy(&occ)?);
        }
        let spin = |s: usize, c: usize| if (s >> c) & 1 == 1 { 1.0 } else { -1.0 };
        let norm = 1.0 / states as f64;
        let scale = table.iter().fold(0.0f64, |m, u| m.max(u.abs()));
        let mut model = IsingModel::new(cells);
        for a in 0..cells {
            let h: f64 = table.iter().enumerate().map(|(s, u)| u * spin(s, a)).sum::<f64>() * norm;
            model.set_field(a, h)?;
            for b in a + 1..cells {
                let j: f64 = table.iter().enumerate().map(|(s, u)| u * spin(s, a) * spin(s, b)).sum::<f64>() * norm;
                if j.abs() > 1e-12 * scale {
                    model.set_coupling(a, b, j)?;
                }
            }
        }
        Ok(model)
    }
}

/// Oracle energy (eV) of a lattice at the given occupations, biased by the
/// spec voltages. Explicit `n_G` values in the spec are not consulted.
pub fn oracle_charging_energy(spec: &LatticeSpec, occupation: &[i64]) -> Result<f64> {
    let caps = build_capacitances(spec)?;
    ChargingOracle::new(&caps, &spec.biases())?.energy(occupation)
}

/// Ising coefficients (eV) of the exact charging energy over `{n0, n0+1}` per cell.
pub fn oracle_ising_extract(spec: &LatticeSpec) -> Result<IsingModel> {
    if spec.cell_count() > WALSH_MAX_CELLS {
        return Err(Error::Scale { what: "Walsh extraction cells", got: spec.cell_count(), limit: WALSH_MAX_CELLS });
    }
    let caps = build_capacitances(spec)?;
    oracle_ising_from_caps(&caps, &spec.biases(), &spec.base_occupation())
}

pub fn oracle_ising_from_caps(caps: &CapacitanceSet, biases: &[CellBias], n0: &[i64]) -> Result<IsingModel> {
    ChargingOracle::new(caps, biases)?.walsh_ising(n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capnet::caps::CellCaps;
    use crate::capnet::lattice::CellGeometry;

    fn isolated(a_af: f64, b_af: f64) -> CapacitanceSet {
        CapacitanceSet::from_cells(1, 1, vec![CellCaps { a: a_af * AF, b: b_af * AF, ..Default::default() }]).unwrap()
    }

    #[test]
    fn zero_bias_zero_charge_is_zero() {
        let spec = LatticeSpec::new(1, 1, CellGeometry::default());
        assert_eq!(oracle_charging_energy(&spec, &[0]).unwrap(), 0.0);
    }

    #[test]
    fn single_island_parabola() {
        let caps = isolated(0.416, 0.971);
        let v = 0.05;
        let bias = [CellBias { v_cg: v, ..Default::default() }];
        let oracle = ChargingOracle::new(&caps, &bias).unwrap();
        let q0 = 0.416 * AF * v / E_CHARGE;
        let c = 1.387 * AF;
        // (n + Q0)^2 e^2 / 2C up to an n-independent constant
        let want = |n: f64| (n + q0).powi(2) * E_CHARGE / (2.0 * c);
        let shift = oracle.energy(&[0]).unwrap() - want(0.0);
        for n in -3..=3 {
            let got = oracle.energy(&[n]).unwrap() - shift;
            assert!((got - want(n as f64)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn decoupled_cells_have_no_couplings() {
        let cell = CellCaps { a: 0.4 * AF, b: 1.0 * AF, ..Default::default() };
        let caps = CapacitanceSet::from_cells(2, 2, vec![cell; 4]).unwrap();
        let m = oracle_ising_from_caps(&caps, &[CellBias::default(); 4], &[0; 4]).unwrap();
        assert!(m.couplings().is_empty());
    }

    #[test]
    fn walsh_matches_inverse_capacitance_matrix() {
        // J_km = (C^-1)_km / 4, h_k = 1/2 sum_m (C^-1)_km n_G,m with the Maxwell matrix.
        let c0 = CellCaps { a: 0.4 * AF, b: 1.0 * AF, d: 0.1 * AF, ..Default::default() };
        let c1 = CellCaps { a: 0.5 * AF, b: 0.9 * AF, ..Default::default() };
        let caps = CapacitanceSet::from_cells(1, 2, vec![c0, c1]).unwrap();
        let bias = [CellBias { v_cg: 0.02, ..Default::default() }, CellBias { v_cg: -0.03, ..Default::default() }];
        let m = oracle_ising_from_caps(&caps, &bias, &[0, 0]).unwrap();
        let maxwell = DMatrix::from_row_slice(2, 2, &[1.5, -0.1, -0.1, 1.5]);
        let inv = maxwell.try_inverse().unwrap();
        let q0 = [0.4 * AF * 0.02 / E_CHARGE, 0.5 * AF * -0.03 / E_CHARGE];
        let ng = [q0[0] + 0.5, q0[1] + 0.5];
        let j = inv[(0, 1)] / 4.0 * E2_PER_AF_TO_EV;
        assert!((m.coupling(0, 1) - j).abs() < 1e-12 * j.abs());
        for k in 0..2 {
            let h = 0.5 * (inv[(k, 0)] * ng[0] + inv[(k, 1)] * ng[1]) * E2_PER_AF_TO_EV;
            assert!((m.field(k) - h).abs() < 1e-10 * h.abs(), "{} vs {h}", m.field(k));
        }
    }

    #[test]
    fn rejects_oversized_lattices() {
        let spec = LatticeSpec::new(4, 5, CellGeometry::default());
        assert!(matches!(oracle_ising_extract(&spec), Err(Error::Scale { .. })));
        let spec = LatticeSpec::new(6, 5, CellGeometry::default());
        assert!(matches!(oracle_charging_energy(&spec, &[0; 30]), Err(Error::Scale { .. })));
    }

    #[test]
    fn floating_island_is_singular() {
        let caps = CapacitanceSet::from_cells(1, 2, vec![CellCaps { a: AF, ..Default::default() }, CellCaps::default()]).unwrap();
        assert!(matches!(ChargingOracle::new(&caps, &[CellBias::default(); 2]), Err(Error::OracleFailure(_))));
    }
}
