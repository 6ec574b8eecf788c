//! Zero-knowledge proof system for the local Clifford-Hamiltonian problem.
//!
//! The crate compiles verification circuits into Clifford-Hamiltonian
//! instances, encodes witnesses with a concatenated Steane trap code, runs
//! the prover/verifier interaction and measures completeness, soundness and
//! zero-knowledge properties at small scale.

pub mod analysis;
pub mod bits;
pub mod encoding;
pub mod error;
pub mod lch;
pub mod mc;
pub mod pauli_clifford;
pub mod protocol;
pub mod sampler;
pub mod selftest;
pub mod steane;

pub use bits::BitString;
pub use error::{Error, Result};
