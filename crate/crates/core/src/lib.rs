//! Second-quantized simulation of linear-optics cluster-state schemes and
//! stabilizer analysis of measured coincidence counts.

pub mod counts;
pub mod elements;
pub mod error;
pub mod exec;
pub mod fock;
pub mod lhv;
pub mod pauli;
pub mod qubit;
pub mod schemes;
pub mod schmidt;
pub mod stabilizer;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Execution;
pub use fock::{FockState, ModeId, ModeTransform, Polarization};
pub use pauli::{Pauli, PauliString};
pub use qubit::QubitState;
