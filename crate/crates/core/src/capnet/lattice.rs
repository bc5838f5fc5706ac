//! Geometry, gap materials and the lattice description of an FG array.

use serde::{Deserialize, Serialize};

use crate::units::{AF, NM};
use crate::{Error, Result};

/// A lattice position `(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub row: usize,
    pub col: usize,
}

impl Site {
    pub fn new(row: usize, col: usize) -> Self {
        Site { row, col }
    }

    /// King-move adjacency: lateral or diagonal neighbours.
    pub fn is_adjacent(&self, other: &Site) -> bool {
        self != other && self.row.abs_diff(other.row) <= 1 && self.col.abs_diff(other.col) <= 1
    }
}

/// The four inter-cell gap orientations, anchored at cell `(i, j)`:
///
/// | kind | conductors                  |
/// |------|-----------------------------|
/// | `D`  | FG(i,j) – FG(i,j+1)         |
/// | `L`  | FG(i,j) – FG(i+1,j)         |
/// | `J`  | FG(i,j) – FG(i+1,j+1)       |
/// | `K`  | FG(i+1,j) – FG(i,j+1)       |
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GapKind {
    D,
    L,
    J,
    K,
}

impl GapKind {
    pub fn is_diagonal(self) -> bool {
        matches!(self, GapKind::J | GapKind::K)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Gap {
    pub kind: GapKind,
    pub row: usize,
    pub col: usize,
}

impl Gap {
    pub fn new(kind: GapKind, row: usize, col: usize) -> Self {
        Gap { kind, row, col }
    }

    /// The two cells joined by this gap.
    pub fn endpoints(&self) -> (Site, Site) {
        let (i, j) = (self.row, self.col);
        match self.kind {
            GapKind::D => (Site::new(i, j), Site::new(i, j + 1)),
            GapKind::L => (Site::new(i, j), Site::new(i + 1, j)),
            GapKind::J => (Site::new(i, j), Site::new(i + 1, j + 1)),
            GapKind::K => (Site::new(i + 1, j), Site::new(i, j + 1)),
        }
    }

    /// The gap joining two adjacent cells, if any.
    pub fn between(a: Site, b: Site) -> Option<Gap> {
        if !a.is_adjacent(&b) {
            return None;
        }
        let (p, q) = if a < b { (a, b) } else { (b, a) };
        // p precedes q in raster order.
        Some(if p.row == q.row {
            Gap::new(GapKind::D, p.row, p.col)
        } else if p.col == q.col {
            Gap::new(GapKind::L, p.row, p.col)
        } else if q.col == p.col + 1 {
            Gap::new(GapKind::J, p.row, p.col)
        } else {
            Gap::new(GapKind::K, p.row, q.col)
        })
    }

    pub fn in_lattice(&self, rows: usize, cols: usize) -> bool {
        let (a, b) = self.endpoints();
        a.row < rows && b.row < rows && a.col < cols && b.col < cols
    }

    /// Every gap of a `rows × cols` lattice, in a fixed order.
    pub fn all(rows: usize, cols: usize) -> Vec<Gap> {
        let mut out = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                for kind in [GapKind::D, GapKind::L, GapKind::J, GapKind::K] {
                    let g = Gap::new(kind, i, j);
                    if g.in_lattice(rows, cols) {
                        out.push(g);
                    }
                }
            }
        }
        out
    }
}

/// Dielectric filling of an inter-cell gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMaterial {
    /// Tunnel-oxide permittivity. Control-qubit gaps sit in oxide.
    #[serde(alias = "control_qubit")]
    Oxide,
    /// ε = 1.
    #[serde(alias = "air_gap")]
    Air,
    /// No capacitance at all.
    Absent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapAssignment {
    pub kind: GapKind,
    pub row: usize,
    pub col: usize,
    #[serde(alias = "directive")]
    pub material: GapMaterial,
}

/// Per-gap material: a default for lateral (`D`, `L`) and diagonal (`J`, `K`)
/// gaps plus explicit overrides. A layout mask emitted by the embedder
/// deserializes directly into this type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMap {
    #[serde(default = "oxide")]
    pub lateral: GapMaterial,
    #[serde(default = "oxide")]
    pub diagonal: GapMaterial,
    #[serde(default)]
    pub gaps: Vec<GapAssignment>,
}

fn oxide() -> GapMaterial {
    GapMaterial::Oxide
}

impl Default for GapMap {
    fn default() -> Self {
        GapMap::uniform(GapMaterial::Oxide, GapMaterial::Oxide)
    }
}

impl GapMap {
    pub fn uniform(lateral: GapMaterial, diagonal: GapMaterial) -> Self {
        GapMap { lateral, diagonal, gaps: Vec::new() }
    }

    pub fn material(&self, gap: Gap) -> GapMaterial {
        self.gaps
            .iter()
            .find(|a| a.kind == gap.kind && a.row == gap.row && a.col == gap.col)
            .map(|a| a.material)
            .unwrap_or(if gap.kind.is_diagonal() { self.diagonal } else { self.lateral })
    }

    fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for a in &self.gaps {
            let g = Gap::new(a.kind, a.row, a.col);
            if !g.in_lattice(rows, cols) {
                return Err(Error::InvalidLattice(format!("gap {g:?} lies outside the {rows}x{cols} lattice")));
            }
            if !seen.insert(g) {
                return Err(Error::InvalidLattice(format!("gap {g:?} assigned more than once")));
            }
        }
        Ok(())
    }
}

/// Geometry of one FG cell. Lengths in nm, capacitances in aF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGeometry {
    /// FG lateral size along the column direction `j`.
    #[serde(rename = "L_nm")]
    pub length_nm: f64,
    /// FG lateral size along the row direction `i`.
    #[serde(rename = "W_nm")]
    pub width_nm: f64,
    #[serde(rename = "Z_nm")]
    pub height_nm: f64,
    /// Tunnel-oxide thickness.
    pub d_ox_nm: f64,
    #[serde(rename = "CR")]
    pub coupling_ratio: f64,
    #[serde(default = "default_eps")]
    pub eps_oxide: f64,
    #[serde(rename = "C_H_aF", default)]
    pub c_source_af: f64,
    #[serde(rename = "C_I_aF", default)]
    pub c_drain_af: f64,
    /// FG to neighbouring-CG capacitance, used for `C_E`, `C_F`, `C_M`, `C_N`.
    #[serde(rename = "C_cross_aF", default)]
    pub c_cross_af: f64,
}

fn default_eps() -> f64 {
    3.9
}

impl Default for CellGeometry {
    fn default() -> Self {
        CellGeometry {
            length_nm: 15.0,
            width_nm: 15.0,
            height_nm: 10.0,
            d_ox_nm: 8.0,
            coupling_ratio: 0.3,
            eps_oxide: 3.9,
            c_source_af: 0.0,
            c_drain_af: 0.0,
            c_cross_af: 0.0,
        }
    }
}

impl CellGeometry {
    pub fn square(size_nm: f64, height_nm: f64, d_ox_nm: f64) -> Self {
        CellGeometry { length_nm: size_nm, width_nm: size_nm, height_nm, d_ox_nm, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("L", self.length_nm),
            ("W", self.width_nm),
            ("Z_FG", self.height_nm),
            ("d_ox", self.d_ox_nm),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.coupling_ratio > 0.0 && self.coupling_ratio < 1.0) {
            return Err(Error::InvalidGeometry(format!("CR must lie in (0, 1), got {}", self.coupling_ratio)));
        }
        if !(self.eps_oxide >= 1.0) {
            return Err(Error::InvalidGeometry(format!("eps_oxide must be >= 1, got {}", self.eps_oxide)));
        }
        for (name, v) in [("C_H", self.c_source_af), ("C_I", self.c_drain_af), ("C_cross", self.c_cross_af)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// FG–CG insulator thickness `d_A = d_ox (1 − CR)/CR`, in metres.
    pub fn d_a(&self) -> f64 {
        self.d_ox_nm * NM * (1.0 - self.coupling_ratio) / self.coupling_ratio
    }

    pub(crate) fn c_source(&self) -> f64 {
        self.c_source_af * AF
    }

    pub(crate) fn c_drain(&self) -> f64 {
        self.c_drain_af * AF
    }

    pub(crate) fn c_cross(&self) -> f64 {
        self.c_cross_af * AF
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryOverride {
    pub row: usize,
    pub col: usize,
    pub geometry: CellGeometry,
}

/// Electrode voltages of one cell, in volts.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellBias {
    pub v_cg: f64,
    pub v_sub: f64,
    pub v_s: f64,
    pub v_d: f64,
}

/// Row-major per-cell voltage arrays; omitted arrays are zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Voltages {
    #[serde(rename = "V_CG", default)]
    pub v_cg: Vec<f64>,
    #[serde(rename = "V_sub", default)]
    pub v_sub: Vec<f64>,
    #[serde(rename = "V_s", default)]
    pub v_s: Vec<f64>,
    #[serde(rename = "V_d", default)]
    pub v_d: Vec<f64>,
}

/// Everything needed to build the capacitance network of an `M × N` array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub geometry: CellGeometry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub geometry_overrides: Vec<GeometryOverride>,
    #[serde(default)]
    pub gap_map: GapMap,
    #[serde(default)]
    pub voltages: Voltages,
    /// Base electron occupation per cell.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n0: Vec<i64>,
    /// Explicit effective gate charges; derived from the voltages when absent.
    #[serde(rename = "n_G", default, skip_serializing_if = "Option::is_none")]
    pub n_g: Option<Vec<f64>>,
}

impl LatticeSpec {
    pub fn new(rows: usize, cols: usize, geometry: CellGeometry) -> Self {
        LatticeSpec {
            rows,
            cols,
            geometry,
            geometry_overrides: Vec::new(),
            gap_map: GapMap::default(),
            voltages: Voltages::default(),
            n0: Vec::new(),
            n_g: None,
        }
    }

    pub fn with_gap_map(mut self, gap_map: GapMap) -> Self {
        self.gap_map = gap_map;
        self
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn geometry_at(&self, row: usize, col: usize) -> &CellGeometry {
        self.geometry_overrides
            .iter()
            .find(|o| o.row == row && o.col == col)
            .map(|o| &o.geometry)
            .unwrap_or(&self.geometry)
    }

    pub fn bias(&self, row: usize, col: usize) -> CellBias {
        let k = self.index(row, col);
        let get = |v: &Vec<f64>| v.get(k).copied().unwrap_or(0.0);
        CellBias {
            v_cg: get(&self.voltages.v_cg),
            v_sub: get(&self.voltages.v_sub),
            v_s: get(&self.voltages.v_s),
            v_d: get(&self.voltages.v_d),
        }
    }

    pub fn biases(&self) -> Vec<CellBias> {
        (0..self.rows).flat_map(|i| (0..self.cols).map(move |j| (i, j))).map(|(i, j)| self.bias(i, j)).collect()
    }

    pub fn base_occupation(&self) -> Vec<i64> {
        if self.n0.is_empty() {
            vec![0; self.cell_count()]
        } else {
            self.n0.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidLattice(format!("lattice must be at least 1x1, got {}x{}", self.rows, self.cols)));
        }
        self.geometry.validate()?;
        for o in &self.geometry_overrides {
            if o.row >= self.rows || o.col >= self.cols {
                return Err(Error::InvalidLattice(format!("geometry override at ({}, {}) outside lattice", o.row, o.col)));
            }
            o.geometry.validate()?;
        }
        self.gap_map.validate(self.rows, self.cols)?;
        let n = self.cell_count();
        let v = &self.voltages;
        for (name, arr) in [("V_CG", &v.v_cg), ("V_sub", &v.v_sub), ("V_s", &v.v_s), ("V_d", &v.v_d)] {
            if !arr.is_empty() && arr.len() != n {
                return Err(Error::InvalidLattice(format!("{name} has {} entries, expected {n}", arr.len())));
            }
            if arr.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidLattice(format!("{name} contains a non-finite voltage")));
            }
        }
        if !self.n0.is_empty() && self.n0.len() != n {
            return Err(Error::InvalidLattice(format!("n0 has {} entries, expected {n}", self.n0.len())));
        }
        if let Some(ng) = &self.n_g {
            if ng.len() != n {
                return Err(Error::InvalidLattice(format!("n_G has {} entries, expected {n}", ng.len())));
            }
            if let Some(bad) = ng.iter().find(|x| !(x.abs() < 0.5)) {
                return Err(Error::InvalidLattice(format!("|n_G| must be < 1/2, got {bad}")));
            }
        }
        Ok(())
    }
}
