//! WKB tunneling amplitude of an FG qubit through its tunnel oxide.

use serde::{Deserialize, Serialize};

use crate::units::{BOHR_RADIUS, E_CHARGE, HBAR, M0, NM, RYDBERG_EV};
use crate::{Error, Result};

/// Barrier and confinement parameters. Lengths in nm, energies in eV,
/// doping in cm⁻³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BarrierParams {
    pub d_ox_nm: f64,
    pub v_ox_ev: f64,
    pub m_ox_ratio: f64,
    pub m_si_ratio: f64,
    /// Confinement length `L` of the FG.
    pub length_nm: f64,
    pub n_l: f64,
    pub n_r: f64,
    pub doping_cm3: f64,
}

impl Default for BarrierParams {
    fn default() -> Self {
        BarrierParams {
            d_ox_nm: 2.0,
            v_ox_ev: 3.0,
            m_ox_ratio: 0.5,
            m_si_ratio: 0.19,
            length_nm: 15.0,
            n_l: 1.0,
            n_r: 1.0,
            doping_cm3: 5e18,
        }
    }
}

impl BarrierParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_ox", self.d_ox_nm),
            ("V_ox", self.v_ox_ev),
            ("m_ox", self.m_ox_ratio),
            ("m_si", self.m_si_ratio),
            ("L", self.length_nm),
            ("N_L", self.n_l),
            ("N_R", self.n_r),
            ("doping", self.doping_cm3),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, m) in [("m_ox", self.m_ox_ratio), ("m_si", self.m_si_ratio)] {
            if !(0.01..2.0).contains(&m) {
                log::warn!("{name}/m0 = {m} is outside the plausible range (0.01, 2)");
            }
        }
        Ok(())
    }
}

/// Free-electron-gas Fermi energy `ħ²(3π²n)^{2/3} / 2m*` in eV.
pub fn fermi_energy(doping_cm3: f64, m_ratio: f64) -> Result<f64> {
    if !(doping_cm3 > 0.0 && m_ratio > 0.0) {
        return Err(Error::InvalidParameter(format!("doping and mass must be positive, got {doping_cm3}, {m_ratio}")));
    }
    let n = doping_cm3 * 1e6;
    let k_f2 = (3.0 * std::f64::consts::PI.powi(2) * n).powf(2.0 / 3.0);
    Ok(HBAR * HBAR * k_f2 / (2.0 * m_ratio * M0) / E_CHARGE)
}

/// `exp[−(d_ox/a₀) √(m*_ox (V_ox − E′_F) / (m₀ R_y))]` for a barrier height
/// `barrier_ev = V_ox − E′_F` above the Fermi level.
pub fn barrier_factor(d_ox_nm: f64, m_ox_ratio: f64, barrier_ev: f64) -> f64 {
    (-(d_ox_nm * NM / BOHR_RADIUS) * (m_ox_ratio * barrier_ev / RYDBERG_EV).sqrt()).exp()
}

/// `N_L N_R (m₀ R_y / m*_si) (π a₀ / L)²` in eV.
pub fn attempt_prefactor(p: &BarrierParams) -> f64 {
    let geom = std::f64::consts::PI * BOHR_RADIUS / (p.length_nm * NM);
    p.n_l * p.n_r * RYDBERG_EV / p.m_si_ratio * geom * geom
}

/// Δ (eV) at a given shifted Fermi energy `E′_F` (eV).
pub fn wkb_delta_at(p: &BarrierParams, e_f_prime_ev: f64) -> Result<f64> {
    p.validate()?;
    if !e_f_prime_ev.is_finite() {
        return Err(Error::InvalidParameter(format!("non-finite Fermi energy {e_f_prime_ev}")));
    }
    if e_f_prime_ev >= p.v_ox_ev {
        return Err(Error::OverBarrier { fermi_ev: e_f_prime_ev, barrier_ev: p.v_ox_ev });
    }
    Ok(attempt_prefactor(p) * barrier_factor(p.d_ox_nm, p.m_ox_ratio, p.v_ox_ev - e_f_prime_ev))
}

/// `E′_F = E_F + V_CG`, with the gate voltage entering as eV per volt.
pub fn shifted_fermi(p: &BarrierParams, v_cg: f64) -> Result<f64> {
    Ok(fermi_energy(p.doping_cm3, p.m_si_ratio)? + v_cg)
}

/// Δ (eV) at control-gate voltage `v_cg` (V).
pub fn wkb_delta(p: &BarrierParams, v_cg: f64) -> Result<f64> {
    wkb_delta_at(p, shifted_fermi(p, v_cg)?)
}

/// Electrons in a volume (nm³) at a donor concentration (cm⁻³).
pub fn electron_count(volume_nm3: f64, doping_cm3: f64) -> Result<f64> {
    if !(volume_nm3 >= 0.0 && doping_cm3 >= 0.0) {
        return Err(Error::InvalidParameter(format!("volume and doping must be >= 0, got {volume_nm3}, {doping_cm3}")));
    }
    // 1 cm^3 = 1e21 nm^3
    Ok(doping_cm3 * volume_nm3 / 1e21)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fermi_energy_hand_value_and_scaling() {
        let ef = fermi_energy(5e18, 0.19).unwrap();
        // (1.0546e-34)^2 (3 pi^2 5e24)^(2/3) / (2 * 0.19 * 9.109e-31) / 1.602e-19
        assert!((ef - 0.0563).abs() < 1e-3, "{ef}");
        assert!((fermi_energy(40e18, 0.19).unwrap() / ef - 4.0).abs() < 1e-12);
        assert!((fermi_energy(5e18, 0.38).unwrap() / ef - 0.5).abs() < 1e-12);
    }

    #[test]
    fn barrier_factor_hand_value() {
        // 2 / 0.0529 * sqrt(0.5 * 3 / 13.6) = 12.556
        let f = barrier_factor(2.0, 0.5, 3.0);
        assert!((f.ln() + 12.556).abs() < 1e-3);
        assert!((f - 3.52e-6).abs() / 3.52e-6 < 0.01);
        assert_eq!(barrier_factor(0.0, 0.5, 3.0), 1.0);
    }

    #[test]
    fn delta_hand_value() {
        let p = BarrierParams::default();
        let d = wkb_delta_at(&p, 0.0).unwrap();
        assert!((d - 3.09e-8).abs() / 3.09e-8 < 0.01, "{d}");
    }

    #[test]
    fn over_barrier_is_an_error() {
        let p = BarrierParams::default();
        assert!(matches!(wkb_delta_at(&p, 3.0), Err(Error::OverBarrier { .. })));
        assert!(matches!(wkb_delta(&p, 3.5), Err(Error::OverBarrier { .. })));
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let p = BarrierParams { length_nm: 0.0, ..Default::default() };
        assert!(wkb_delta_at(&p, 0.0).is_err());
        assert!(fermi_energy(0.0, 0.19).is_err());
    }

    #[test]
    fn electron_count_examples() {
        assert_eq!(electron_count(10.0 * 10.0 * 30.0, 5e18).unwrap(), 15.0);
        assert_eq!(electron_count(0.0, 5e18).unwrap(), 0.0);
        assert_eq!(electron_count(3000.0, 1e19).unwrap(), 30.0);
    }

    #[test]
    fn delta_scales_with_counts_and_length() {
        let p = BarrierParams::default();
        let d = wkb_delta_at(&p, 0.5).unwrap();
        let counts = BarrierParams { n_l: 2.0, n_r: 3.0, ..p };
        assert!((wkb_delta_at(&counts, 0.5).unwrap() / d - 6.0).abs() < 1e-12);
        let longer = BarrierParams { length_nm: 30.0, ..p };
        assert!((wkb_delta_at(&longer, 0.5).unwrap() / d - 0.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn increasing_in_fermi_energy(a in 0.0f64..2.99, b in 0.0f64..2.99) {
            prop_assume!((a - b).abs() > 1e-9);
            let p = BarrierParams::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(wkb_delta_at(&p, lo).unwrap() < wkb_delta_at(&p, hi).unwrap());
        }

        #[test]
        fn decreasing_in_thickness_and_mass(d1 in 0.5f64..5.0, dd in 0.01f64..2.0, m1 in 0.1f64..1.0, dm in 0.01f64..0.5) {
            let base = BarrierParams { d_ox_nm: d1, m_ox_ratio: m1, ..Default::default() };
            let thick = BarrierParams { d_ox_nm: d1 + dd, ..base };
            let heavy = BarrierParams { m_ox_ratio: m1 + dm, ..base };
            let d0 = wkb_delta_at(&base, 0.2).unwrap();
            prop_assert!(d0 > 0.0);
            prop_assert!(wkb_delta_at(&thick, 0.2).unwrap() < d0);
            prop_assert!(wkb_delta_at(&heavy, 0.2).unwrap() < d0);
        }
    }
}
