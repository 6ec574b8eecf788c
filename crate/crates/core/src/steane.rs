//! The 7-qubit Steane code and its concatenations.
//!
//! Level-`t` codewords have length `N = 7^t` and are laid out block-major:
//! logical position `b` of the outer code occupies
//! `b·7^{t−1} .. (b+1)·7^{t−1}`.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::CliffordCircuit;

/// Logical-zero codewords of the 7-qubit code.
pub const D7_0: [&str; 8] = [
    "0000000", "0001111", "0110011", "0111100", "1010101", "1011010", "1100110", "1101001",
];

/// Logical-one codewords of the 7-qubit code.
pub const D7_1: [&str; 8] = [
    "0010110", "0011001", "0100101", "0101010", "1000011", "1001100", "1110000", "1111111",
];

/// `DECODE7[w]` is the logical bit of the 7-bit word `w` (first bit most
/// significant), or `None` when `w` is not a codeword.
static DECODE7: std::sync::LazyLock<[Option<bool>; 128]> = std::sync::LazyLock::new(|| {
    let mut table = [None; 128];
    for (bit, list) in [(false, &D7_0), (true, &D7_1)] {
        for w in list.iter() {
            table[u8::from_str_radix(w, 2).expect("binary literal") as usize] = Some(bit);
        }
    }
    table
});

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CodeParams {
    t: u32,
    n: usize,
}

impl CodeParams {
    pub fn new(t: u32) -> Result<Self> {
        if t == 0 || t > 6 {
            return Err(Error::InvalidParameters(format!("concatenation level {t} not in 1..=6")));
        }
        Ok(CodeParams { t, n: 7usize.pow(t) })
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.t
    }

    /// `N = 7^t`.
    #[inline]
    pub fn block_len(&self) -> usize {
        self.n
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteaneCode {
    params: CodeParams,
}

impl SteaneCode {
    pub fn new(t: u32) -> Result<Self> {
        Ok(SteaneCode { params: CodeParams::new(t)? })
    }

    pub fn params(&self) -> CodeParams {
        self.params
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.params.t
    }

    #[inline]
    pub fn block_len(&self) -> usize {
        self.params.n
    }

    pub fn base_codewords(bit: bool) -> Vec<BitString> {
        let list = if bit { &D7_1 } else { &D7_0 };
        list.iter().map(|w| w.parse().expect("binary literal")).collect()
    }

    /// Materialized `D_7^b`; only level 1 is supported.
    pub fn codewords(&self, bit: bool) -> Result<Vec<BitString>> {
        if self.level() != 1 {
            return Err(Error::InvalidParameters("codeword sets are only materialized at level 1".into()));
        }
        Ok(Self::base_codewords(bit))
    }

    fn decode_at(y: &BitString, start: usize, level: u32) -> Option<bool> {
        let inner = 7usize.pow(level - 1);
        let mut word = 0usize;
        for b in 0..7 {
            let bit = if level == 1 {
                y.get(start + b)
            } else {
                Self::decode_at(y, start + b * inner, level - 1)?
            };
            word = (word << 1) | bit as usize;
        }
        DECODE7[word]
    }

    /// Outer logical bit of `y`, or [`Error::NotCodeword`].
    pub fn logical_decode(&self, y: &BitString) -> Result<bool> {
        check_len(self.block_len(), y.len())?;
        Self::decode_at(y, 0, self.level()).ok_or(Error::NotCodeword)
    }

    pub fn is_codeword(&self, y: &BitString) -> Result<bool> {
        check_len(self.block_len(), y.len())?;
        Ok(Self::decode_at(y, 0, self.level()).is_some())
    }

    /// Logical distance `K = 3^t`: minimum weight of a word in `D_N^1`.
    pub fn min_distance(&self) -> usize {
        3usize.pow(self.level())
    }

    /// Minimum weight over all nonzero words of `D_N = D_N^0 ∪ D_N^1`.
    ///
    /// Equals `3^t` at `t = 1` only; from `t = 2` on a nonzero inner block
    /// under an all-zero outer word gives weight 4.
    pub fn min_nonzero_weight(&self) -> usize {
        let weights = |list: &[&str]| list.iter().map(|w| w.bytes().filter(|&b| b == b'1').count()).collect::<Vec<_>>();
        let w0 = weights(&D7_0);
        let w1 = weights(&D7_1);
        // (min nonzero weight of D^0, min weight of D^1) per level
        let mut m0 = *w0.iter().filter(|&&w| w > 0).min().expect("nonzero codewords");
        let mut m1 = *w1.iter().min().expect("nonempty list");
        let outer0 = m0;
        let outer1 = m1;
        for _ in 1..self.level() {
            let next0 = m0.min(outer0 * m1);
            let next1 = outer1 * m1;
            m0 = next0;
            m1 = next1;
        }
        m0.min(m1)
    }

    /// Uniform sample from `D_N^b`.
    pub fn sample_codeword<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> BitString {
        let mut out = BitString::zeros(self.block_len());
        Self::sample_into(&mut out, 0, self.level(), bit, rng);
        out
    }

    fn sample_into<R: Rng + ?Sized>(out: &mut BitString, start: usize, level: u32, bit: bool, rng: &mut R) {
        let list = if bit { &D7_1 } else { &D7_0 };
        let word = list[rng.gen_range(0..8)].as_bytes();
        let inner = 7usize.pow(level - 1);
        for (b, &ch) in word.iter().enumerate() {
            let v = ch == b'1';
            if level == 1 {
                out.set(start + b, v);
            } else {
                Self::sample_into(out, start + b * inner, level - 1, v, rng);
            }
        }
    }

    /// Encoder `U_N` on `N` qubits: maps `|b⟩|0^{N−1}⟩` to the uniform
    /// superposition over `D_N^b`.
    pub fn encoder_circuit(&self) -> CliffordCircuit {
        encoder_circuit(self.level())
    }

    /// Logical action of a transversally applied Clifford: the circuit
    /// itself at even levels, its entry-wise conjugate at odd levels.
    pub fn logical_action(&self, c: &CliffordCircuit) -> CliffordCircuit {
        if self.level().is_multiple_of(2) {
            c.clone()
        } else {
            c.conjugate()
        }
    }
}

/// Seven-qubit encoder `U_7`; logical input on qubit 0.
pub fn steane_encoder7() -> CliffordCircuit {
    CliffordCircuit::new(7)
        .h(4)
        .h(5)
        .h(6)
        .cnot(0, 1)
        .cnot(0, 2)
        .cnot(6, 3)
        .cnot(6, 1)
        .cnot(6, 0)
        .cnot(5, 3)
        .cnot(5, 2)
        .cnot(5, 0)
        .cnot(4, 3)
        .cnot(4, 2)
        .cnot(4, 1)
}

/// Concatenated encoder: outer `U_7` on the block heads, then a level
/// `t − 1` encoder inside each block.
pub fn encoder_circuit(t: u32) -> CliffordCircuit {
    assert!(t >= 1, "encoder level must be at least 1");
    let n = 7usize.pow(t);
    let u7 = steane_encoder7();
    if t == 1 {
        return u7;
    }
    let inner_len = n / 7;
    let heads: Vec<usize> = (0..7).map(|b| b * inner_len).collect();
    let mut c = u7.embed(n, &heads).expect("valid embedding");
    let inner = encoder_circuit(t - 1);
    for b in 0..7 {
        let map: Vec<usize> = (b * inner_len..(b + 1) * inner_len).collect();
        c = c.then(&inner.embed(n, &map).expect("valid embedding")).expect("same width");
    }
    c
}

/// Apply a `k`-qubit circuit position-wise across `k` blocks of length `len`:
/// the tuples are `(block_0[p], …, block_{k−1}[p])` for each `p`.
pub fn transversal(c: &CliffordCircuit, len: usize) -> CliffordCircuit {
    let k = c.n();
    let tuples: Vec<Vec<usize>> = (0..len).map(|p| (0..k).map(|i| i * len + p).collect()).collect();
    c.transversal(k * len, &tuples).expect("tuples in range")
}
