use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("gate acts twice on qubit {0}")]
    RepeatedQubit(usize),

    #[error("dense simulation of {requested} qubits exceeds cap of {cap}")]
    CapExceeded { requested: usize, cap: usize },

    #[error("not a codeword")]
    NotCodeword,

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("protocol violation: {0}")]
    Protocol(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}
