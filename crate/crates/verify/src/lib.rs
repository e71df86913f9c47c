//! Dense complex-matrix evaluation of coherent information, the
//! Rényi–Bhattacharyya parameter and the split channels of a two-qubit
//! Clifford combiner, used to certify the combining identities numerically.
//!
//! All systems stay at dimension ≤ 32, so every routine is a direct
//! eigen-decomposition with no iterative optimization.

pub mod combine;
pub mod entropy;
pub mod error;
pub mod kraus;
pub mod lemmas;
pub mod linalg;
pub mod state;
pub mod unitary;

pub use error::{Result, VerifyError};
