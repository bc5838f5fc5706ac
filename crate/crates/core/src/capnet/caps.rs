//! Capacitances of the FG network, in farads.

use serde::{Deserialize, Serialize};

use super::lattice::{Gap, GapKind, GapMaterial, LatticeSpec};
use crate::units::{EPS0, NM};
use crate::{Error, Result};

/// Capacitances attached to cell `(i, j)`.
///
/// | field | conductors             |
/// |-------|------------------------|
/// | `a`   | FG(i,j) – CG(i,j)      |
/// | `b`   | FG(i,j) – substrate    |
/// | `h`   | FG(i,j) – source       |
/// | `i`   | FG(i,j) – drain        |
/// | `d`   | FG(i,j) – FG(i,j+1)    |
/// | `l`   | FG(i,j) – FG(i+1,j)    |
/// | `j`   | FG(i,j) – FG(i+1,j+1)  |
/// | `k`   | FG(i+1,j) – FG(i,j+1)  |
/// | `e`   | CG(i,j) – FG(i,j+1)    |
/// | `f`   | FG(i,j) – CG(i,j+1)    |
/// | `m`   | CG(i,j) – FG(i+1,j)    |
/// | `n`   | FG(i,j) – CG(i+1,j)    |
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CellCaps {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub i: f64,
    pub d: f64,
    pub l: f64,
    pub j: f64,
    pub k: f64,
    pub e: f64,
    pub f: f64,
    pub m: f64,
    pub n: f64,
}

impl CellCaps {
    fn values(&self) -> [f64; 12] {
        [self.a, self.b, self.h, self.i, self.d, self.l, self.j, self.k, self.e, self.f, self.m, self.n]
    }

    /// Scales every FG–FG and FG–neighbour-CG capacitance by `factor`.
    pub fn scale_inter_cell(&mut self, factor: f64) {
        for c in [&mut self.d, &mut self.l, &mut self.j, &mut self.k, &mut self.e, &mut self.f, &mut self.m, &mut self.n] {
            *c *= factor;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceSet {
    rows: usize,
    cols: usize,
    cells: Vec<CellCaps>,
}

impl CapacitanceSet {
    /// Validates non-negativity and that no entry reaches outside the lattice.
    pub fn from_cells(rows: usize, cols: usize, cells: Vec<CellCaps>) -> Result<Self> {
        if rows == 0 || cols == 0 || cells.len() != rows * cols {
            return Err(Error::InvalidLattice(format!("{} cells do not form a {rows}x{cols} lattice", cells.len())));
        }
        for (idx, c) in cells.iter().enumerate() {
            let (r, col) = (idx / cols, idx % cols);
            if c.values().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidGeometry(format!("negative or non-finite capacitance at ({r}, {col})")));
            }
            let right = col + 1 < cols;
            let down = r + 1 < rows;
            let outside = (!right && (c.d > 0.0 || c.e > 0.0 || c.f > 0.0))
                || (!down && (c.l > 0.0 || c.m > 0.0 || c.n > 0.0))
                || (!(right && down) && (c.j > 0.0 || c.k > 0.0));
            if outside {
                return Err(Error::InvalidLattice(format!("capacitance at ({r}, {col}) references a cell outside the lattice")));
            }
        }
        Ok(CapacitanceSet { rows, cols, cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn cells(&self) -> &[CellCaps] {
        &self.cells
    }

    /// Cell capacitances; out-of-lattice positions read as all zero.
    pub fn at(&self, i: isize, j: isize) -> CellCaps {
        if i < 0 || j < 0 || i as usize >= self.rows || j as usize >= self.cols {
            CellCaps::default()
        } else {
            self.cells[i as usize * self.cols + j as usize]
        }
    }

    pub fn get(&self, i: usize, j: usize) -> &CellCaps {
        &self.cells[i * self.cols + j]
    }

    /// Total capacitance `C_a` of FG(i,j): every capacitor with a plate on it.
    pub fn total(&self, i: usize, j: usize) -> f64 {
        let (i, j) = (i as isize, j as isize);
        let c = self.at(i, j);
        let left = self.at(i, j - 1);
        let up = self.at(i - 1, j);
        c.a + c.b + c.h + c.i
            + (c.d + c.f)
            + (c.l + c.n)
            + c.j
            + left.d + left.e + left.k
            + up.k + up.l + up.m
            + self.at(i - 1, j - 1).j
    }

    /// The same network with every inter-cell capacitance scaled by `factor`.
    pub fn scaled_inter_cell(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.cells.iter_mut().for_each(|c| c.scale_inter_cell(factor));
        out
    }
}

/// Parallel-plate and fringe estimates for every capacitor of the lattice.
///
/// `C_A = ε ε₀ L W / d_A`, `C_B = ε ε₀ L W / d_ox`, `C_D = ε_gap ε₀ Z W / L`,
/// `C_L = ε_gap ε₀ Z L / W`, and diagonals `ε_gap ε₀ Z W / (L √2)` where
/// `ε_gap` is the oxide permittivity, 1 for air, and the capacitor vanishes for
/// absent gaps.
pub fn build_capacitances(spec: &LatticeSpec) -> Result<CapacitanceSet> {
    spec.validate()?;
    let (rows, cols) = (spec.rows, spec.cols);
    let mut cells = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let g = spec.geometry_at(i, j);
            let (l, w, z) = (g.length_nm * NM, g.width_nm * NM, g.height_nm * NM);
            let eps_gap = |kind: GapKind| -> f64 {
                match spec.gap_map.material(Gap::new(kind, i, j)) {
                    GapMaterial::Oxide => g.eps_oxide,
                    GapMaterial::Air => 1.0,
                    GapMaterial::Absent => 0.0,
                }
            };
            let right = j + 1 < cols;
            let down = i + 1 < rows;
            let mut c = CellCaps {
                a: g.eps_oxide * EPS0 * l * w / g.d_a(),
                b: g.eps_oxide * EPS0 * l * w / (g.d_ox_nm * NM),
                h: g.c_source(),
                i: g.c_drain(),
                ..Default::default()
            };
            if right {
                c.d = eps_gap(GapKind::D) * EPS0 * z * w / l;
                c.e = g.c_cross();
                c.f = g.c_cross();
            }
            if down {
                c.l = eps_gap(GapKind::L) * EPS0 * z * l / w;
                c.m = g.c_cross();
                c.n = g.c_cross();
            }
            if right && down {
                let diag = EPS0 * z * w / (l * std::f64::consts::SQRT_2);
                c.j = eps_gap(GapKind::J) * diag;
                c.k = eps_gap(GapKind::K) * diag;
            }
            cells.push(c);
        }
    }
    CapacitanceSet::from_cells(rows, cols, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capnet::lattice::{CellGeometry, GapMap};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn substrate_capacitance_hand_value() {
        // 3.9 * 8.854e-12 * (15e-9)^2 / 8e-9
        let caps = build_capacitances(&LatticeSpec::new(1, 1, CellGeometry::default())).unwrap();
        assert!(rel(caps.get(0, 0).b, 9.712e-19) < 1e-3);
    }

    #[test]
    fn coupling_ratio_identity() {
        let g = CellGeometry::default();
        assert!(rel(g.d_a(), 18.6667e-9) < 1e-4);
        let caps = build_capacitances(&LatticeSpec::new(1, 1, g)).unwrap();
        let c = caps.get(0, 0);
        assert!((c.a / (c.a + c.b) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn lateral_and_air_diagonal_hand_values() {
        let spec = LatticeSpec::new(2, 2, CellGeometry::default())
            .with_gap_map(GapMap::uniform(GapMaterial::Oxide, GapMaterial::Air));
        let caps = build_capacitances(&spec).unwrap();
        let c = caps.get(0, 0);
        // 3.9 * 8.854e-12 * 10e-9 = 3.4531e-19; air diagonal 8.854e-20 / sqrt 2
        assert!(rel(c.d, 3.4531e-19) < 1e-4);
        assert!(rel(c.l, c.d) < 1e-15);
        assert!(rel(c.j, 6.2607e-20) < 1e-4);
        assert_eq!(c.j, c.k);
        assert_eq!(caps.get(0, 1).d, 0.0);
        assert_eq!(caps.get(1, 1).j, 0.0);
    }

    #[test]
    fn oxide_diagonal_is_lateral_over_sqrt2() {
        let caps = build_capacitances(&LatticeSpec::new(2, 2, CellGeometry::default())).unwrap();
        let c = caps.get(0, 0);
        assert!(rel(c.j, c.d / std::f64::consts::SQRT_2) < 1e-14);
    }

    #[test]
    fn rejects_bad_geometry_and_boundary_leaks() {
        let mut g = CellGeometry::default();
        g.length_nm = -1.0;
        assert!(matches!(build_capacitances(&LatticeSpec::new(1, 1, g)), Err(Error::InvalidGeometry(_))));
        let leak = CellCaps { a: 1e-18, d: 1e-19, ..Default::default() };
        assert!(CapacitanceSet::from_cells(1, 1, vec![leak]).is_err());
    }

    #[test]
    fn total_counts_every_attached_capacitor() {
        let c = CellCaps { a: 1.0, b: 2.0, d: 0.1, l: 0.2, j: 0.3, k: 0.4, ..Default::default() };
        let set = CapacitanceSet::from_cells(
            2,
            2,
            vec![c, CellCaps { a: 1.0, b: 2.0, l: 0.5, ..Default::default() }, CellCaps { a: 1.0, b: 2.0, d: 0.6, ..Default::default() }, CellCaps { a: 1.0, b: 2.0, ..Default::default() }],
        )
        .unwrap();
        assert!((set.total(0, 0) - (3.0 + 0.1 + 0.2 + 0.3)).abs() < 1e-15);
        // (0,1): own L 0.5, left D 0.1, K of (0,0) 0.4
        assert!((set.total(0, 1) - (3.0 + 0.5 + 0.1 + 0.4)).abs() < 1e-15);
        // (1,1): up L 0.5, left D 0.6, diag J 0.3
        assert!((set.total(1, 1) - (3.0 + 0.5 + 0.6 + 0.3)).abs() < 1e-15);
    }
}
