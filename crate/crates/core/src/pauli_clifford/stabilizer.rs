//! Stabilizer tableau simulator.
//!
//! Rows `0..n` are destabilizers, rows `n..2n` stabilizers, each a
//! bit-packed `PauliString`. Measurement follows the Aaronson-Gottesman
//! update; `rowsum` is an exact Pauli product.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::dense::DenseState;
use crate::pauli_clifford::{CliffordCircuit, Gate, PauliString};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    rows: Vec<PauliString>,
}

impl StabilizerState {
    /// `|0…0⟩`.
    pub fn zero(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        rows.extend((0..n).map(|j| PauliString::single(n, j, 'X')));
        rows.extend((0..n).map(|j| PauliString::single(n, j, 'Z')));
        StabilizerState { n, rows }
    }

    pub fn from_bits(bits: &BitString) -> Self {
        let mut s = Self::zero(bits.len());
        for q in bits.ones_positions() {
            s.apply_gate(Gate::X(q));
        }
        s
    }

    pub fn from_circuit(c: &CliffordCircuit) -> Self {
        let mut s = Self::zero(c.n());
        s.apply_circuit(c).expect("sizes agree");
        s
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.rows[self.n..]
    }

    pub fn destabilizers(&self) -> &[PauliString] {
        &self.rows[..self.n]
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            Err(Error::IndexOutOfRange { index: q, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Caller guarantees in-range indices.
    pub fn apply_gate(&mut self, g: Gate) {
        for row in &mut self.rows {
            g.conjugate(row);
        }
    }

    pub fn apply_circuit(&mut self, c: &CliffordCircuit) -> Result<()> {
        check_len(self.n, c.n())?;
        for &g in c.gates() {
            self.apply_gate(g);
        }
        Ok(())
    }

    /// `|ψ⟩ ↦ P|ψ⟩` for a Pauli `P`; flips the sign of anticommuting rows.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_len(self.n, p.n())?;
        for row in &mut self.rows {
            if !row.commutes_with(p)? {
                row.multiply_phase(2);
            }
        }
        Ok(())
    }

    fn rowsum(&mut self, target: usize, source: usize) {
        let prod = self.rows[target].multiply(&self.rows[source]).expect("sizes agree");
        self.rows[target] = prod;
    }

    /// Outcome of a Z measurement on `q` when it is determined.
    pub fn deterministic_outcome(&self, q: usize) -> Result<Option<bool>> {
        self.check_qubit(q)?;
        if self.stabilizers().iter().any(|r| r.x.get(q)) {
            return Ok(None);
        }
        let mut scratch = PauliString::identity(self.n);
        for i in 0..self.n {
            if self.rows[i].x.get(q) {
                scratch = scratch.multiply(&self.rows[i + self.n])?;
            }
        }
        Ok(Some(scratch.hermitian_sign().expect("stabilizer products are Hermitian")))
    }

    fn collapse_random(&mut self, q: usize, outcome: bool) {
        let n = self.n;
        let p = (n..2 * n).find(|&i| self.rows[i].x.get(q)).expect("random outcome");
        for i in 0..2 * n {
            if i != p && self.rows[i].x.get(q) {
                self.rowsum(i, p);
            }
        }
        self.rows[p - n] = self.rows[p].clone();
        let mut z = PauliString::single(n, q, 'Z');
        if outcome {
            z.phase = 2;
        }
        self.rows[p] = z;
    }

    /// Z-basis measurement of `q`, collapsing the state.
    pub fn measure_z<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> Result<bool> {
        match self.deterministic_outcome(q)? {
            Some(b) => Ok(b),
            None => {
                let b = rng.gen::<bool>();
                self.collapse_random(q, b);
                Ok(b)
            }
        }
    }

    /// Project onto outcome `bit` of a Z measurement on `q`. Returns the Born
    /// probability of that outcome; the state is left unchanged when it is 0.
    pub fn project_z(&mut self, q: usize, bit: bool) -> Result<f64> {
        match self.deterministic_outcome(q)? {
            Some(b) => Ok(if b == bit { 1.0 } else { 0.0 }),
            None => {
                self.collapse_random(q, bit);
                Ok(0.5)
            }
        }
    }

    /// `⟨P⟩ ∈ {−1, 0, 1}` for a Hermitian Pauli `P`.
    pub fn expectation(&self, p: &PauliString) -> Result<i8> {
        check_len(self.n, p.n())?;
        if !p.is_hermitian() {
            return Err(Error::InvalidParameters(format!("{p} is not Hermitian")));
        }
        for s in self.stabilizers() {
            if !s.commutes_with(p)? {
                return Ok(0);
            }
        }
        let mut scratch = PauliString::identity(self.n);
        for i in 0..self.n {
            if !self.rows[i].commutes_with(p)? {
                scratch = scratch.multiply(&self.rows[i + self.n])?;
            }
        }
        debug_assert!(scratch.x == p.x && scratch.z == p.z);
        let rel = (p.phase + 4 - scratch.phase) % 4;
        Ok(if rel == 0 { 1 } else { -1 })
    }

    /// Reduced-row-echelon stabilizer generators over the column order
    /// `x_0..x_{n-1}, z_0..z_{n-1}`; equal states have equal canonical forms.
    pub fn canonical_stabilizers(&self) -> Vec<PauliString> {
        let n = self.n;
        let mut rows: Vec<PauliString> = self.stabilizers().to_vec();
        let mut pivot_row = 0;
        for col in 0..2 * n {
            let bit = |r: &PauliString| if col < n { r.x.get(col) } else { r.z.get(col - n) };
            let Some(found) = (pivot_row..n).find(|&i| bit(&rows[i])) else {
                continue;
            };
            rows.swap(pivot_row, found);
            for i in 0..n {
                if i != pivot_row && bit(&rows[i]) {
                    rows[i] = rows[i].multiply(&rows[pivot_row]).expect("sizes agree");
                }
            }
            pivot_row += 1;
            if pivot_row == n {
                break;
            }
        }
        rows
    }

    pub fn same_state(&self, other: &StabilizerState) -> bool {
        self.n == other.n && self.canonical_stabilizers() == other.canonical_stabilizers()
    }

    /// Computational-basis support `offset ⊕ span(basis)`; each string in it
    /// has probability `2^{-basis.len()}`.
    pub fn support(&self) -> (BitString, Vec<BitString>) {
        let basis: Vec<BitString> = self
            .canonical_stabilizers()
            .into_iter()
            .map(|r| r.x)
            .filter(|x| !x.is_zero())
            .collect();
        let mut probe = self.clone();
        let mut offset = BitString::zeros(self.n);
        for q in 0..self.n {
            // forcing 0 whenever random always succeeds
            let p = probe.project_z(q, false).expect("in range");
            if p == 0.0 {
                offset.set(q, true);
            }
        }
        (offset, basis)
    }

    /// Born probability of a full measurement string.
    pub fn probability_of(&self, bits: &BitString) -> Result<f64> {
        check_len(self.n, bits.len())?;
        let mut probe = self.clone();
        let mut p = 1.0;
        for q in 0..self.n {
            p *= probe.project_z(q, bits.get(q))?;
            if p == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(p)
    }

    /// One full Z-basis measurement sample; the state is not modified.
    pub fn sample_measurement<R: Rng + ?Sized>(&self, rng: &mut R) -> BitString {
        let (mut out, basis) = self.support();
        for b in &basis {
            if rng.gen::<bool>() {
                out ^= b;
            }
        }
        out
    }

    /// `self ⊗ other`, with `other`'s qubits appended.
    pub fn tensor(&self, other: &StabilizerState) -> StabilizerState {
        let (na, nb) = (self.n, other.n);
        let pad_a = |p: &PauliString| PauliString {
            x: p.x.concat_with(&BitString::zeros(nb)),
            z: p.z.concat_with(&BitString::zeros(nb)),
            phase: p.phase,
        };
        let pad_b = |p: &PauliString| PauliString {
            x: BitString::zeros(na).concat_with(&p.x),
            z: BitString::zeros(na).concat_with(&p.z),
            phase: p.phase,
        };
        let mut rows = Vec::with_capacity(2 * (na + nb));
        rows.extend(self.destabilizers().iter().map(pad_a));
        rows.extend(other.destabilizers().iter().map(pad_b));
        rows.extend(self.stabilizers().iter().map(pad_a));
        rows.extend(other.stabilizers().iter().map(pad_b));
        StabilizerState { n: na + nb, rows }
    }

    /// New qubit `j` is old qubit `order[j]`.
    pub fn reorder(&self, order: &[usize]) -> Result<StabilizerState> {
        check_len(self.n, order.len())?;
        let mut seen = vec![false; self.n];
        for &q in order {
            self.check_qubit(q)?;
            if std::mem::replace(&mut seen[q], true) {
                return Err(Error::RepeatedQubit(q));
            }
        }
        let rows = self
            .rows
            .iter()
            .map(|r| PauliString {
                x: BitString::from_bools(order.iter().map(|&q| r.x.get(q))),
                z: BitString::from_bools(order.iter().map(|&q| r.z.get(q))),
                phase: r.phase,
            })
            .collect();
        Ok(StabilizerState { n: self.n, rows })
    }

    /// Stabilizer generators commute, and the full tableau has the
    /// destabilizer/stabilizer commutation pattern.
    pub fn is_valid(&self) -> bool {
        let n = self.n;
        for a in 0..2 * n {
            for b in (a + 1)..2 * n {
                let anti = b == a + n;
                let both_destab = b < n;
                let commutes = self.rows[a].commutes_with(&self.rows[b]).expect("sizes agree");
                if !both_destab && commutes == anti {
                    return false;
                }
            }
        }
        self.stabilizers().iter().all(|s| s.is_hermitian())
    }

    /// Dense state vector up to a global phase.
    pub fn to_dense(&self) -> Result<DenseState> {
        let (offset, _) = self.support();
        let mut state = DenseState::from_bits(&offset)?;
        for s in self.stabilizers() {
            let mut applied = state.clone();
            applied.apply_pauli(s)?;
            let amps = state
                .amplitudes()
                .iter()
                .zip(applied.amplitudes())
                .map(|(a, b)| (a + b) * 0.5)
                .collect();
            state = DenseState::from_unnormalized(amps)?;
        }
        Ok(state)
    }
}

pub fn apply_circuit(s: &StabilizerState, c: &CliffordCircuit) -> Result<StabilizerState> {
    let mut out = s.clone();
    out.apply_circuit(c)?;
    Ok(out)
}

pub fn measure_z<R: Rng + ?Sized>(
    s: &StabilizerState,
    qubit: usize,
    rng: &mut R,
) -> Result<(bool, StabilizerState)> {
    let mut out = s.clone();
    let b = out.measure_z(qubit, rng)?;
    Ok((b, out))
}
