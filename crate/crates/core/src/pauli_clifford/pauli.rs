use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_len, Result};

/// `i^phase · ⊗_j X^{x_j} Z^{z_j}`.
///
/// `Y` is therefore stored as `x = z = 1, phase = 1` (`Y = iXZ`). A Hermitian
/// Pauli has `phase ≡ |x ∧ z| (mod 2)`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    pub x: BitString,
    pub z: BitString,
    pub phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            x: BitString::zeros(n),
            z: BitString::zeros(n),
            phase: 0,
        }
    }

    pub fn new(x: BitString, z: BitString, phase: u8) -> Result<Self> {
        check_len(x.len(), z.len())?;
        Ok(PauliString { x, z, phase: phase % 4 })
    }

    /// Hermitian single-qubit operator `op ∈ {I, X, Y, Z}` on `qubit`.
    pub fn single(n: usize, qubit: usize, op: char) -> Self {
        let mut p = Self::identity(n);
        match op {
            'I' => {}
            'X' => p.x.set(qubit, true),
            'Z' => p.z.set(qubit, true),
            'Y' => {
                p.x.set(qubit, true);
                p.z.set(qubit, true);
                p.phase = 1;
            }
            other => panic!("unknown Pauli label {other}"),
        }
        p
    }

    /// Parse labels such as `"XIZ"` or `"-iYY"` into the Hermitian product of
    /// the listed factors times the given prefix scalar.
    pub fn from_label(label: &str) -> Result<Self> {
        let (mut phase, body) = if let Some(rest) = label.strip_prefix("-i") {
            (3u8, rest)
        } else if let Some(rest) = label.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = label.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = label.strip_prefix('+') {
            (0, rest)
        } else {
            (0, label)
        };
        let n = body.chars().count();
        let mut x = BitString::zeros(n);
        let mut z = BitString::zeros(n);
        for (j, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => x.set(j, true),
                'Z' => z.set(j, true),
                'Y' => {
                    x.set(j, true);
                    z.set(j, true);
                    phase += 1;
                }
                other => {
                    return Err(crate::Error::Parse(format!("bad Pauli label character {other:?}")))
                }
            }
        }
        Ok(PauliString { x, z, phase: phase % 4 })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn is_identity_up_to_phase(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Number of qubits on which both x and z are set.
    pub fn y_count(&self) -> usize {
        self.x
            .words()
            .iter()
            .zip(self.z.words())
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_hermitian(&self) -> bool {
        (self.phase as usize + self.y_count()).is_multiple_of(2)
    }

    /// Sign of a Hermitian Pauli relative to the product of its
    /// Hermitian single-qubit factors: `false` for `+`, `true` for `−`.
    pub fn hermitian_sign(&self) -> Option<bool> {
        if !self.is_hermitian() {
            return None;
        }
        let rel = (self.phase as usize + 4 - self.y_count() % 4) % 4;
        Some(rel == 2)
    }

    pub fn weight(&self) -> usize {
        (0..self.n()).filter(|&j| self.x.get(j) || self.z.get(j)).count()
    }

    /// Label of qubit `j`'s factor, ignoring the global phase.
    pub fn op_at(&self, j: usize) -> char {
        match (self.x.get(j), self.z.get(j)) {
            (false, false) => 'I',
            (true, false) => 'X',
            (false, true) => 'Z',
            (true, true) => 'Y',
        }
    }

    pub fn commutes_with(&self, other: &PauliString) -> Result<bool> {
        check_len(self.n(), other.n())?;
        Ok(self.x.dot(&other.z) == self.z.dot(&other.x))
    }

    /// Order convention: `self · other`.
    pub fn multiply(&self, other: &PauliString) -> Result<PauliString> {
        check_len(self.n(), other.n())?;
        // X^a Z^b X^c Z^d = (-1)^{b·c} X^{a+c} Z^{b+d}
        let swap = if self.z.dot(&other.x) { 2 } else { 0 };
        Ok(PauliString {
            x: &self.x ^ &other.x,
            z: &self.z ^ &other.z,
            phase: (self.phase + other.phase + swap) % 4,
        })
    }

    pub fn multiply_phase(&mut self, k: u8) {
        self.phase = (self.phase + k) % 4;
    }

    /// Restriction to the given qubits, phase kept as is.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        PauliString {
            x: BitString::from_bools(qubits.iter().map(|&q| self.x.get(q))),
            z: BitString::from_bools(qubits.iter().map(|&q| self.z.get(q))),
            phase: self.phase,
        }
    }
}

/// Group product with exact phase tracking.
pub fn pauli_multiply(p: &PauliString, q: &PauliString) -> Result<PauliString> {
    p.multiply(q)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // print as scalar times Hermitian factors
        let rel = (self.phase as usize + 4 - self.y_count() % 4) % 4;
        f.write_str(["+", "+i", "-", "-i"][rel])?;
        for j in 0..self.n() {
            write!(f, "{}", self.op_at(j))?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}
