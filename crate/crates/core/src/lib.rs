//! Quantum multi-drone reinforcement learning at desk scale.
//!
//! * [`qsim`]: dense state-vector simulator (RX, RY, RZ, CNOT, CU3, Pauli-Z readout).
//! * [`qpolicy`]: data re-uploading Q-policy built on the simulator.
//! * [`env`]: multi-drone coverage world with malfunctions.
//! * [`training`]: independent Q-learning with target networks and
//!   difference-quotient gradients.
//! * [`baseline`]: classical MLP Q-network for comparison.
//! * [`harness`]: configs, seeded runs, on-disk artifacts, comparison and plots.

pub mod baseline;
pub mod env;
mod error;
pub mod harness;
pub mod qpolicy;
pub mod qsim;
pub mod training;

pub use error::{Error, Result};
