//! Prover-side witness encoding: concatenated Steane code, trap qubits, a
//! shared permutation and a Pauli one-time pad.
//!
//! Logical qubit `i` becomes block `i` of `2N` physical qubits
//! (`i·2N .. (i+1)·2N`). Before permutation a block holds `N` code qubits
//! followed by `N` traps; the permutation sends block position `j` to
//! `perm[j]`, and the pad `X^a Z^b` is applied to physical positions.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::analysis::xi_tensor_decode;
use crate::bits::BitString;
use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::dense::{c, DEFAULT_DENSE_CAP};
use crate::pauli_clifford::{CliffordCircuit, DenseOperator, DenseState, Ensemble, PauliString, StabilizerState};
use crate::steane::SteaneCode;

pub const SALT_LEN: usize = 16;

/// Largest physical register the tableau path will build.
pub const TABLEAU_QUBIT_BUDGET: usize = 4096;

/// Trap state `|0⟩`, `|+⟩` or `|↺⟩ = (|0⟩ − i|1⟩)/√2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrapState {
    Zero,
    Plus,
    Circ,
}

impl TrapState {
    pub const ALL: [TrapState; 3] = [TrapState::Zero, TrapState::Plus, TrapState::Circ];

    pub fn symbol(&self) -> char {
        match self {
            TrapState::Zero => '0',
            TrapState::Plus => '+',
            TrapState::Circ => 'r',
        }
    }

    pub fn from_symbol(ch: char) -> Result<Self> {
        match ch {
            '0' => Ok(TrapState::Zero),
            '+' => Ok(TrapState::Plus),
            'r' | '↺' => Ok(TrapState::Circ),
            other => Err(Error::Parse(format!("unknown trap symbol {other:?}"))),
        }
    }

    /// Preparation from `|0⟩` on qubit `q` of `circ`: `|↺⟩ = P³H|0⟩`.
    pub fn prepare(&self, circ: CliffordCircuit, q: usize) -> CliffordCircuit {
        match self {
            TrapState::Zero => circ,
            TrapState::Plus => circ.h(q),
            TrapState::Circ => circ.h(q).p_dag(q),
        }
    }

    pub fn index(&self) -> usize {
        match self {
            TrapState::Zero => 0,
            TrapState::Plus => 1,
            TrapState::Circ => 2,
        }
    }
}

/// Trap string of a column, as a product-state preparation on `k` qubits.
pub fn trap_preparation(col: &[TrapState]) -> CliffordCircuit {
    col.iter()
        .enumerate()
        .fold(CliffordCircuit::new(col.len()), |circ, (q, t)| t.prepare(circ, q))
}

pub fn trap_string_to_text(traps: &[TrapState]) -> String {
    traps.iter().map(TrapState::symbol).collect()
}

pub fn trap_string_from_text(s: &str) -> Result<Vec<TrapState>> {
    s.chars().map(TrapState::from_symbol).collect()
}

/// The prover's secret `(t, π, a, b)` plus the commitment salt.
#[derive(Clone, PartialEq, Eq)]
pub struct EncodingKey {
    n: usize,
    level: u32,
    block_len: usize,
    traps: Vec<TrapState>,
    perm: Vec<usize>,
    a: BitString,
    b: BitString,
    salt: Vec<u8>,
}

impl fmt::Debug for EncodingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep key material out of logs
        write!(f, "EncodingKey {{ n: {}, level: {}, .. }}", self.n, self.level)
    }
}

/// Committed part of the key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyOpening {
    pub perm: Vec<usize>,
    pub a: BitString,
    pub b: BitString,
}

impl KeyOpening {
    /// Canonical byte encoding fed to the commitment scheme.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("serializable")
    }
}

impl EncodingKey {
    pub fn new(
        n: usize,
        code: &SteaneCode,
        traps: Vec<TrapState>,
        perm: Vec<usize>,
        a: BitString,
        b: BitString,
        salt: Vec<u8>,
    ) -> Result<Self> {
        let nn = code.block_len();
        check_len(n * nn, traps.len())?;
        check_len(2 * nn, perm.len())?;
        check_len(2 * n * nn, a.len())?;
        check_len(2 * n * nn, b.len())?;
        if salt.len() != SALT_LEN {
            return Err(Error::InvalidParameters(format!("salt must be {SALT_LEN} bytes")));
        }
        let mut seen = vec![false; 2 * nn];
        for &p in &perm {
            if p >= 2 * nn || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameters("perm is not a bijection".into()));
            }
        }
        Ok(EncodingKey { n, level: code.level(), block_len: nn, traps, perm, a, b, salt })
    }

    /// All randomness disabled: identity permutation, zero pads, `|0⟩` traps.
    pub fn trivial(n: usize, code: &SteaneCode) -> Self {
        let nn = code.block_len();
        EncodingKey {
            n,
            level: code.level(),
            block_len: nn,
            traps: vec![TrapState::Zero; n * nn],
            perm: (0..2 * nn).collect(),
            a: BitString::zeros(2 * n * nn),
            b: BitString::zeros(2 * n * nn),
            salt: vec![0; SALT_LEN],
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn code(&self) -> SteaneCode {
        SteaneCode::new(self.level).expect("validated level")
    }

    /// `N`.
    #[inline]
    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn traps(&self) -> &[TrapState] {
        &self.traps
    }

    pub fn block_traps(&self, i: usize) -> &[TrapState] {
        &self.traps[i * self.block_len..(i + 1) * self.block_len]
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn a(&self) -> &BitString {
        &self.a
    }

    pub fn b(&self) -> &BitString {
        &self.b
    }

    pub fn salt(&self) -> &[u8] {
        &self.salt
    }

    pub fn opening(&self) -> KeyOpening {
        KeyOpening { perm: self.perm.clone(), a: self.a.clone(), b: self.b.clone() }
    }

    pub fn with_opening(&self, opening: KeyOpening) -> Result<Self> {
        EncodingKey::new(self.n, &self.code(), self.traps.clone(), opening.perm, opening.a, opening.b, self.salt.clone())
    }

    pub fn with_traps(&self, traps: Vec<TrapState>) -> Result<Self> {
        check_len(self.traps.len(), traps.len())?;
        let mut k = self.clone();
        k.traps = traps;
        Ok(k)
    }

    pub fn inverse_perm(&self) -> Vec<usize> {
        let mut inv = vec![0; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p] = i;
        }
        inv
    }

    /// `π(s)`: `out[perm[j]] = s[j]` on one block.
    pub fn permute_block(&self, s: &BitString) -> BitString {
        let mut out = BitString::zeros(s.len());
        for (j, &p) in self.perm.iter().enumerate() {
            out.set(p, s.get(j));
        }
        out
    }

    /// `π^{−1}(u)` split into `(code, trap)` halves.
    pub fn unpermute_block(&self, u: &BitString) -> (BitString, BitString) {
        let nn = self.block_len;
        let y = BitString::from_bools((0..nn).map(|j| u.get(self.perm[j])));
        let z = BitString::from_bools((nn..2 * nn).map(|j| u.get(self.perm[j])));
        (y, z)
    }

    /// Pad bits of block `i`.
    pub fn block_pad(&self, i: usize) -> (BitString, BitString) {
        let w = 2 * self.block_len;
        (self.a.slice(i * w, (i + 1) * w), self.b.slice(i * w, (i + 1) * w))
    }

    fn physical_order(&self) -> Vec<usize> {
        // new qubit (block i, position perm[j]) is old qubit (block i, position j)
        let w = 2 * self.block_len;
        let mut order = vec![0; self.n * w];
        for i in 0..self.n {
            for (j, &p) in self.perm.iter().enumerate() {
                order[i * w + p] = i * w + j;
            }
        }
        order
    }

    fn pad_pauli(&self) -> PauliString {
        PauliString { x: self.a.clone(), z: self.b.clone(), phase: 0 }
    }
}

/// Uniform `(t, π, a, b)` and a fresh salt.
pub fn sample_key<R: Rng + ?Sized>(n: usize, code: &SteaneCode, rng: &mut R) -> EncodingKey {
    let nn = code.block_len();
    let traps = (0..n * nn).map(|_| TrapState::ALL[rng.gen_range(0..3)]).collect();
    let mut perm: Vec<usize> = (0..2 * nn).collect();
    perm.shuffle(rng);
    let a = BitString::from_bools((0..2 * n * nn).map(|_| rng.gen::<bool>()));
    let b = BitString::from_bools((0..2 * n * nn).map(|_| rng.gen::<bool>()));
    let mut salt = vec![0u8; SALT_LEN];
    rng.fill(salt.as_mut_slice());
    EncodingKey { n, level: code.level(), block_len: nn, traps, perm, a, b, salt }
}

#[derive(Serialize, Deserialize)]
struct KeyRepr {
    n: usize,
    level: u32,
    traps: String,
    perm: Vec<usize>,
    a: BitString,
    b: BitString,
    salt: String,
}

impl Serialize for EncodingKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        KeyRepr {
            n: self.n,
            level: self.level,
            traps: trap_string_to_text(&self.traps),
            perm: self.perm.clone(),
            a: self.a.clone(),
            b: self.b.clone(),
            salt: hex::encode(&self.salt),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for EncodingKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = KeyRepr::deserialize(deserializer)?;
        let code = SteaneCode::new(r.level).map_err(D::Error::custom)?;
        let traps = trap_string_from_text(&r.traps).map_err(D::Error::custom)?;
        let salt = hex::decode(&r.salt).map_err(D::Error::custom)?;
        EncodingKey::new(r.n, &code, traps, r.perm, r.a, r.b, salt).map_err(D::Error::custom)
    }
}

/// Symbolic (key + logical state) or physical (stabilizer tableau) form.
#[derive(Clone, Debug)]
pub enum WitnessForm {
    Symbolic(DenseState),
    Physical(StabilizerState),
}

#[derive(Clone, Debug)]
pub struct EncodedWitness {
    key: EncodingKey,
    form: WitnessForm,
}

impl EncodedWitness {
    pub fn key(&self) -> &EncodingKey {
        &self.key
    }

    pub fn form(&self) -> &WitnessForm {
        &self.form
    }

    pub fn logical(&self) -> Option<&DenseState> {
        match &self.form {
            WitnessForm::Symbolic(s) => Some(s),
            WitnessForm::Physical(_) => None,
        }
    }

    pub fn physical(&self) -> Option<&StabilizerState> {
        match &self.form {
            WitnessForm::Physical(s) => Some(s),
            WitnessForm::Symbolic(_) => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct WitnessRepr {
    key: EncodingKey,
    logical: DenseState,
}

impl Serialize for EncodedWitness {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match &self.form {
            WitnessForm::Symbolic(s) => WitnessRepr { key: self.key.clone(), logical: s.clone() }.serialize(serializer),
            WitnessForm::Physical(_) => Err(serde::ser::Error::custom("only the symbolic form serializes")),
        }
    }
}

impl<'de> Deserialize<'de> for EncodedWitness {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = WitnessRepr::deserialize(deserializer)?;
        encode_symbolic(r.logical, r.key).map_err(serde::de::Error::custom)
    }
}

/// Stores the key and logical state; the physical register stays implicit.
pub fn encode_symbolic(logical: DenseState, key: EncodingKey) -> Result<EncodedWitness> {
    check_len(key.n(), logical.k())?;
    Ok(EncodedWitness { key, form: WitnessForm::Symbolic(logical) })
}

/// Circuit taking `|ψ⟩ ⊗ |0…0⟩` (logical qubits first) to the unpadded,
/// unpermuted encoding: code then traps in every block.
fn block_layout_circuit(key: &EncodingKey) -> (Vec<usize>, CliffordCircuit) {
    let nn = key.block_len();
    let w = 2 * nn;
    let total = key.n() * w;
    // logical qubit i moves to block head i·2N
    let mut order = vec![0; total];
    let mut filler = key.n();
    for (pos, slot) in order.iter_mut().enumerate() {
        if pos % w == 0 {
            *slot = pos / w;
        } else {
            *slot = filler;
            filler += 1;
        }
    }
    let enc = key.code().encoder_circuit();
    let mut circ = CliffordCircuit::new(total);
    for i in 0..key.n() {
        let code_map: Vec<usize> = (i * w..i * w + nn).collect();
        circ = circ.then(&enc.embed(total, &code_map).expect("in range")).expect("same width");
        for (j, t) in key.block_traps(i).iter().enumerate() {
            circ = t.prepare(circ, i * w + nn + j);
        }
    }
    (order, circ)
}

/// Physical encoding of a stabilizer logical state on `2nN` qubits.
pub fn encode_physical(logical: &StabilizerState, key: &EncodingKey) -> Result<StabilizerState> {
    check_len(key.n(), logical.n())?;
    let total = 2 * key.n() * key.block_len();
    if total > TABLEAU_QUBIT_BUDGET {
        return Err(Error::CapExceeded { requested: total, cap: TABLEAU_QUBIT_BUDGET });
    }
    let (order, circ) = block_layout_circuit(key);
    let mut s = logical.tensor(&StabilizerState::zero(total - key.n())).reorder(&order)?;
    s.apply_circuit(&circ)?;
    s = s.reorder(&key.physical_order())?;
    s.apply_pauli(&key.pad_pauli())?;
    Ok(s)
}

/// Physical form of an encoded stabilizer witness.
pub fn encode_physical_witness(logical: &StabilizerState, key: EncodingKey) -> Result<EncodedWitness> {
    let state = encode_physical(logical, &key)?;
    Ok(EncodedWitness { key, form: WitnessForm::Physical(state) })
}

/// Dense physical encoding; `2nN` must fit the dense cap.
pub fn encode_dense(logical: &DenseState, key: &EncodingKey) -> Result<DenseState> {
    check_len(key.n(), logical.k())?;
    let total = 2 * key.n() * key.block_len();
    if total > DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { requested: total, cap: DEFAULT_DENSE_CAP });
    }
    let (order, circ) = block_layout_circuit(key);
    let mut s = logical.tensor(&DenseState::zero(total - key.n())?)?.reorder(&order)?;
    s.apply_circuit(&circ)?;
    s = s.reorder(&key.physical_order())?;
    s.apply_pauli(&key.pad_pauli())?;
    Ok(s)
}

/// Undo the pad and the permutation of a physical pure state: the result
/// has code qubits then traps in every block.
pub fn unpad_unpermute(state: &DenseState, opening: &KeyOpening, n: usize, block_len: usize) -> Result<DenseState> {
    let w = 2 * block_len;
    check_len(n * w, state.k())?;
    check_len(w, opening.perm.len())?;
    let mut s = state.clone();
    // X^a Z^b is its own inverse up to a global sign
    s.apply_pauli(&PauliString { x: opening.a.clone(), z: opening.b.clone(), phase: 0 })?;
    let mut order = vec![0; n * w];
    for i in 0..n {
        for (j, &p) in opening.perm.iter().enumerate() {
            order[i * w + j] = i * w + p;
        }
    }
    s.reorder(&order)
}

/// Un-pad, un-permute, drop the traps and apply `Ξ_N` to every block.
pub fn soundness_decode(xi: &Ensemble, opening: &KeyOpening, n: usize, block_len: usize) -> Result<DenseOperator> {
    let w = 2 * block_len;
    check_len(n * w, xi.k())?;
    let decoded = xi.map_states(|s| unpad_unpermute(s, opening, n, block_len))?;
    let code_blocks: Vec<Vec<usize>> = (0..n).map(|i| (i * w..i * w + block_len).collect()).collect();
    xi_tensor_decode(&decoded, &code_blocks)
}

/// `¼ Σ_{a,b} X^a Z^b ρ (X^a Z^b)†`.
pub fn qotp_twirl_check(rho: &DenseOperator) -> Result<DenseOperator> {
    check_len(1, rho.k())?;
    let mut acc = DenseOperator::zeros(1)?;
    for label in ["I", "X", "Z", "Y"] {
        let p = crate::pauli_clifford::dense::pauli_matrix(&PauliString::from_label(label)?)?;
        acc = acc.add(&rho.conjugate_by(&p)?)?;
    }
    Ok(acc.scale(0.25))
}

/// `|+⟩` helper for tests and examples.
pub fn plus_state() -> DenseState {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DenseState::from_amplitudes(vec![c(r, 0.0), c(r, 0.0)]).expect("normalized")
}
