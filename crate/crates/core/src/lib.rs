//! Design and simulation of frequency-robust Mølmer–Sørensen gates on linear
//! trapped-ion chains.
//!
//! The pipeline runs bottom-up:
//!
//! * [`chain`] finds the equilibrium of N ions in a harmonic axial well,
//! * [`modes`] diagonalizes the Coulomb-crystal Hessians and builds the
//!   Lamb–Dicke couplings of a target ion pair,
//! * [`pulse`] describes the Rabi-rate envelope Ω(t),
//! * [`trajectory`] integrates the phase-space displacement α_k and the
//!   geometric phase B_k of every mode in closed form (no Fock space),
//! * [`metrics`] turns trajectories into displacement / rotation errors,
//!   exact fidelity, the reduced two-qubit density matrix and parity scans,
//! * [`design`] solves for the balanced detuning dθ/dδ_c = 0, calibrates Ω0,
//!   and evaluates robustness against a symmetric frequency error δω,
//! * [`experiments`] drives the parameter sweeps, and [`oracle`] is an
//!   independent truncated-Fock Schrödinger integrator used for validation.
//!
//! Frequencies in configs and CSV output are ordinary frequencies (Hz); all
//! dynamics run on angular frequencies (rad/s) in SI units.

pub mod chain;
pub mod config;
pub mod design;
mod error;
pub mod experiments;
pub mod linalg;
pub mod metrics;
pub mod modes;
pub mod oracle;
pub mod pulse;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod spline;
pub mod trajectory;

pub use crate::error::{Error, Result};

pub use crate::chain::IonChain;
pub use crate::config::{angular_to_hz, hz_to_angular, load_config, SystemConfig};
pub use crate::design::{design_gate, GateDesign};
pub use crate::metrics::ErrorBreakdown;
pub use crate::modes::{Direction, GateCoupling, ModeStructure};
pub use crate::pulse::PulseShape;
pub use crate::trajectory::{DetuningContext, Quadrature, Trajectory};
