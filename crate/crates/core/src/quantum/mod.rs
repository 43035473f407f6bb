//! Operator algebra on truncated tensor-product Fock spaces.
//!
//! Subsystems are ordered (transmon, mechanics) everywhere; a composite index
//! is `i_T · N_M + i_M`.

pub mod dense;
pub mod operator;
pub mod space;
pub mod sparse;
pub mod state;

use thiserror::Error;

pub use dense::CMat;
pub use operator::{Operator, Storage, DENSITY_THRESHOLD};
pub use space::{HilbertSpace, MECHANICS, TRANSMON};
pub use sparse::Csr;
pub use state::{coherent_state, fock_state, thermal_state, DensityMatrix, Ket};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("subsystem dimension {0} is too small (need >= 2)")]
    DimensionTooSmall(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },
    #[error("truncation at dimension {dim} is insufficient: {detail}")]
    Truncation { dim: usize, detail: String },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}
