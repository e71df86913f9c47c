//! Clifford-randomized polarization of Pauli channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`pauli`] and [`permutation`]: the quotient groups `P̄₁`, `P̄₂` and the
//!   linear pair permutations `Γ = (A, B)`.
//! * [`clifford`]: two-qubit Clifford actions, enumeration, coset classes and
//!   the built-in gate families.
//! * [`channel`]: Pauli channels, classical mixtures of them (CMP), the
//!   quaternary classical counterpart and Bhattacharyya functionals.
//! * [`polarization`]: recursive channel synthesis and polarization statistics.
//! * [`codec`]: encoder, successive-cancellation decoder, block-error harness
//!   and chaining.

pub mod channel;
pub mod clifford;
pub mod codec;
pub mod error;
pub mod pauli;
pub mod permutation;
pub mod polarization;
pub mod rng;

pub use error::{CoreError, Result};
pub use pauli::PauliSymbol;
pub use permutation::PairPermutation;
