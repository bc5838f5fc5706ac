//! Physical constants and unit conversions.
//!
//! Internal energies of the capacitance network are kept in e²/F (charges in
//! units of e, capacitances in farads). Multiplying by [`E_CHARGE`] gives eV.

/// Elementary charge (C).
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Vacuum permittivity (F/m), at the precision used for the FG capacitances.
pub const EPS0: f64 = 8.854e-12;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Free-electron mass (kg).
pub const M0: f64 = 9.109_383_701_5e-31;
/// Bohr radius (m), as used in the WKB prefactor.
pub const BOHR_RADIUS: f64 = 0.0529e-9;
/// Rydberg energy (eV), as used in the WKB prefactor.
pub const RYDBERG_EV: f64 = 13.6;
/// ħ/(1 eV) in seconds: the internal time unit when energies are in eV.
pub const HBAR_OVER_EV_S: f64 = 6.582_119_569_509_066e-16;

pub const NM: f64 = 1e-9;
pub const AF: f64 = 1e-18;

/// e²/F to eV.
pub fn e2_per_farad_to_ev(x: f64) -> f64 {
    x * E_CHARGE
}

/// Seconds to internal time units ħ/E, where `energy_unit_ev` is the energy
/// unit of the Hamiltonian expressed in eV.
pub fn seconds_to_internal(t_s: f64, energy_unit_ev: f64) -> f64 {
    t_s * energy_unit_ev / HBAR_OVER_EV_S
}
