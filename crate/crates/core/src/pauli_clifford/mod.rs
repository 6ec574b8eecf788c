//! Pauli and Clifford algebra, a stabilizer tableau simulator and a dense
//! linear-algebra backend.

mod circuit;
pub mod dense;
mod pauli;
mod stabilizer;
mod tableau;

pub use circuit::{conjugate_pauli, CliffordCircuit, Gate};
pub use dense::{DenseGate, DenseOperator, DenseState, Ensemble};
pub use pauli::{pauli_multiply, PauliString};
pub use stabilizer::{apply_circuit, measure_z, StabilizerState};
pub use tableau::{random_clifford, CliffordTableau};
