//! Floating-gate charge-qubit arrays as quantum annealers.
//!
//! The crate maps the geometry of a 2D floating-gate (FG) array onto an
//! effective transverse-field Ising model, compiles small logical Ising
//! problems onto the array with antiferromagnetic minor-embedding chains, and
//! simulates the anneal on a state vector.
//!
//! Module map:
//!
//! * [`capnet`]: capacitance network, recursive reduction, couplings, fields,
//!   charging-energy scale, and a brute-force electrostatics oracle.
//! * [`tunneling`]: WKB tunneling amplitude of an FG qubit.
//! * [`ising`]: Ising models, exact ground states, coupled-dot qubit parameters.
//! * [`embed`]: complete-graph minor embedding with alternating-sign chains.
//! * [`anneal`]: schedules, split-step evolution, dephasing trajectories,
//!   spectral gaps, and a simulated-annealing baseline.

pub mod anneal;
pub mod capnet;
pub mod embed;
mod error;
pub mod ising;
pub mod tunneling;
pub mod units;

pub use error::{Error, Result};
