//! Simulation and analysis toolkit for electron-nuclear spin-pair quantum
//! computing. One module per concern; see the module docs.

pub mod constants;
pub mod endor_spect;
pub mod entanglement;
pub mod error;
pub mod pulse_engine;
pub mod quantum_state;
pub mod sdc;
pub mod spin_ensemble;
pub mod tensor_fit;

pub use error::{Error, Result};
pub use quantum_state::{CMatrix, CVector, DensityMatrix, Operator, PureState, Subsystem};
