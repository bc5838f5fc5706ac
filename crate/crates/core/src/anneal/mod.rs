//! Quantum annealing of small Ising models, plus diagnostics and a classical
//! baseline.

pub mod evolve;
pub mod gap;
pub mod sa;
pub mod schedule;

pub use evolve::{
    empirical_success, evolve, initial_state, spin_string, success_probability, total_variation, AnnealResult,
    Dephasing, EvolveOptions, DEFAULT_SHOTS, DEFAULT_T2_SECONDS, EVOLVE_MAX_QUBITS,
};
pub use gap::{spectral_gap, GapResult, DEFAULT_GRID, GAP_MAX_QUBITS};
pub use sa::{simulated_annealing_baseline, SaResult, SaSchedule};
pub use schedule::{Schedule, Shape};
