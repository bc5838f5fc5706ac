//! Capacitance network of a 2D FG array and its reduction to Ising parameters.

pub mod caps;
pub mod lattice;
pub mod network;
pub mod oracle;

pub use caps::{build_capacitances, CapacitanceSet, CellCaps};
pub use lattice::{
    CellBias, CellGeometry, Gap, GapAssignment, GapKind, GapMap, GapMaterial, GeometryOverride, LatticeSpec, Site,
    Voltages,
};
pub use network::{
    extract, gate_offset, ising_couplings, local_fields, reduce_network, single_electron_scale, EffectiveNetwork,
    Extraction, GateOffsets, ReducedCell,
};
pub use oracle::{oracle_charging_energy, oracle_ising_extract, oracle_ising_from_caps, ChargingOracle};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Result;

/// Side of the lattice used for `U_h` sweeps; the centre cell has a full
/// next-nearest neighbourhood.
pub const SWEEP_LATTICE: usize = 5;

/// `U_h` of the centre cell with oxide and with air diagonal gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UhSweepPoint {
    pub l_nm: f64,
    pub z_nm: f64,
    pub d_ox_nm: f64,
    pub u_h_oxide_ev: f64,
    pub u_h_air_ev: f64,
}

impl UhSweepPoint {
    pub fn ratio(&self) -> f64 {
        self.u_h_air_ev / self.u_h_oxide_ev
    }

    /// Relative increase of `U_h` from air diagonals, `air/oxide − 1`.
    pub fn increase(&self) -> f64 {
        self.ratio() - 1.0
    }
}

fn centre_u_h(geometry: CellGeometry, diagonal: GapMaterial) -> Result<f64> {
    let n = SWEEP_LATTICE;
    let spec = LatticeSpec::new(n, n, geometry).with_gap_map(GapMap::uniform(GapMaterial::Oxide, diagonal));
    let caps = build_capacitances(&spec)?;
    Ok(single_electron_scale(&caps)[(n / 2) * n + n / 2])
}

/// One point of the air-gap comparison: square cells of side `l_nm`.
pub fn uh_point(base: &CellGeometry, l_nm: f64, z_nm: f64, d_ox_nm: f64) -> Result<UhSweepPoint> {
    let g = CellGeometry { length_nm: l_nm, width_nm: l_nm, height_nm: z_nm, d_ox_nm, ..*base };
    Ok(UhSweepPoint {
        l_nm,
        z_nm,
        d_ox_nm,
        u_h_oxide_ev: centre_u_h(g, GapMaterial::Oxide)?,
        u_h_air_ev: centre_u_h(g, GapMaterial::Air)?,
    })
}

/// Cartesian sweep ordered by `d_ox`, then `Z`, then `L`.
pub fn uh_sweep(base: &CellGeometry, ls: &[f64], zs: &[f64], d_oxs: &[f64]) -> Result<Vec<UhSweepPoint>> {
    let grid: Vec<(f64, f64, f64)> =
        d_oxs.iter().flat_map(|&d| zs.iter().flat_map(move |&z| ls.iter().map(move |&l| (l, z, d)))).collect();
    grid.into_par_iter().map(|(l, z, d)| uh_point(base, l, z, d)).collect()
}

/// `L = 5..=30` nm in 1 nm steps, `Z_FG ∈ {10, 100}` nm, `d_ox ∈ {2, 4, 8}` nm.
pub fn default_uh_grid() -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    ((5..=30).map(f64::from).collect(), vec![10.0, 100.0], vec![2.0, 4.0, 8.0])
}
