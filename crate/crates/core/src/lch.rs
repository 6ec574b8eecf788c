//! Local Clifford-Hamiltonian instances and the circuit-to-Hamiltonian
//! compiler.
//!
//! A term is `H_j = C_j† |0^k⟩⟨0^k| C_j` on a list of support qubits. The
//! compiler emits Kitaev's clock construction for circuits over
//! `{Λ(P), H⊗H}`: data qubits (witness, then ancillas) come first, followed
//! by `T` unary clock qubits `c_1..c_T` with time `t ↦ 1^t 0^{T−t}`.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::dense::{c, CMatrix, DENSE_OPERATOR_CAP};
use crate::pauli_clifford::{CliffordCircuit, DenseGate, DenseOperator, DenseState};

pub const DEFAULT_LOCALITY: usize = 5;

/// Largest instance whose spectrum is computed during `compile`.
const METADATA_QUBIT_LIMIT: usize = 10;

/// Gate of a verification circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VGate {
    /// Controlled phase `Λ(P)` on `(control, target)`; symmetric.
    ControlledPhase(usize, usize),
    /// `H ⊗ H` on two distinct qubits.
    HH(usize, usize),
}

impl VGate {
    pub fn qubits(&self) -> (usize, usize) {
        match *self {
            VGate::ControlledPhase(a, b) | VGate::HH(a, b) => (a, b),
        }
    }

    pub fn kind(&self) -> PropagationGate {
        match self {
            VGate::ControlledPhase(..) => PropagationGate::ControlledPhase,
            VGate::HH(..) => PropagationGate::HH,
        }
    }

    pub fn dense_gates(&self) -> Vec<DenseGate> {
        match *self {
            VGate::ControlledPhase(a, b) => vec![DenseGate::ControlledPhase(a, b)],
            VGate::HH(a, b) => vec![DenseGate::H(a), DenseGate::H(b)],
        }
    }
}

impl Serialize for VGate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (a, b) = self.qubits();
        let tag = match self {
            VGate::ControlledPhase(..) => "CP",
            VGate::HH(..) => "HH",
        };
        (tag, a, b).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for VGate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let (tag, a, b): (String, usize, usize) = Deserialize::deserialize(deserializer)?;
        match PropagationGate::from_tag(&tag).map_err(serde::de::Error::custom)? {
            PropagationGate::ControlledPhase => Ok(VGate::ControlledPhase(a, b)),
            PropagationGate::HH => Ok(VGate::HH(a, b)),
        }
    }
}

/// Circuit over `{Λ(P), H⊗H}` acting on `witness + ancilla` qubits;
/// ancillas start in `|0⟩` and acceptance means measuring 1 on `output`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationCircuit {
    pub witness: usize,
    pub ancilla: usize,
    pub output: usize,
    pub gates: Vec<VGate>,
}

impl VerificationCircuit {
    pub fn new(witness: usize, ancilla: usize, output: usize, gates: Vec<VGate>) -> Result<Self> {
        let v = VerificationCircuit { witness, ancilla, output, gates };
        v.validate()?;
        Ok(v)
    }

    pub fn n_data(&self) -> usize {
        self.witness + self.ancilla
    }

    /// Number of gates `T`.
    pub fn steps(&self) -> usize {
        self.gates.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_data();
        if n == 0 {
            return Err(Error::InvalidParameters("circuit has no qubits".into()));
        }
        if self.output >= n {
            return Err(Error::IndexOutOfRange { index: self.output, n });
        }
        for g in &self.gates {
            let (a, b) = g.qubits();
            for q in [a, b] {
                if q >= n {
                    return Err(Error::IndexOutOfRange { index: q, n });
                }
            }
            if a == b {
                return Err(Error::RepeatedQubit(a));
            }
        }
        Ok(())
    }

    /// `|witness⟩|0^anc⟩`.
    pub fn initial_state(&self, witness: &DenseState) -> Result<DenseState> {
        check_len(self.witness, witness.k())?;
        witness.tensor(&DenseState::zero(self.ancilla)?)
    }

    /// Data register after the first `t` gates.
    pub fn run_prefix(&self, witness: &DenseState, t: usize) -> Result<DenseState> {
        let mut s = self.initial_state(witness)?;
        for g in &self.gates[..t] {
            s.apply_gates(&g.dense_gates())?;
        }
        Ok(s)
    }

    /// Probability that the circuit accepts `witness`.
    pub fn acceptance_probability(&self, witness: &DenseState) -> Result<f64> {
        let s = self.run_prefix(witness, self.steps())?;
        Ok(s.marginal(&[self.output])?[1])
    }
}

/// Gate tag accepted by [`decompose_propagation`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagationGate {
    ControlledPhase,
    HH,
}

impl PropagationGate {
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "CP" | "LP" | "ΛP" => Ok(PropagationGate::ControlledPhase),
            "HH" => Ok(PropagationGate::HH),
            other => Err(Error::UnsupportedGate(other.to_string())),
        }
    }

    /// The 4×4 unitary `U`, qubit 0 most significant.
    pub fn unitary(&self) -> CMatrix {
        let gates = match self {
            PropagationGate::ControlledPhase => vec![DenseGate::ControlledPhase(0, 1)],
            PropagationGate::HH => vec![DenseGate::H(0), DenseGate::H(1)],
        };
        crate::pauli_clifford::dense::gates_unitary(2, &gates).expect("two qubits")
    }
}

/// Preparation circuits `V_i` with `V_i|000⟩` spanning the propagation
/// projection; qubit 0 is the clock qubit.
pub fn propagation_vectors(gate: PropagationGate) -> [CliffordCircuit; 4] {
    let c3 = || CliffordCircuit::new(3);
    match gate {
        PropagationGate::ControlledPhase => [
            c3().h(0).z(0),
            c3().h(0).z(0).x(2),
            c3().h(0).z(0).x(1),
            c3().h(0).p_dag(0).x(1).x(2),
        ],
        PropagationGate::HH => [
            c3().h(0).h(1).cnot(0, 2).cnot(1, 2).z(0).cz(1, 2),
            c3().h(0).h(1).z(0).cnot(1, 2),
            c3().h(0).h(1).x(2).cnot(1, 2).z(1),
            c3().h(0).h(1).x(2).cnot(0, 2).cnot(1, 2).z(0).cz(1, 2),
        ],
    }
}

/// Term Cliffords `C_i = V_i†`, so that
/// `Σ_i C_i†|000⟩⟨000|C_i = ½[I⊗I − |1⟩⟨0|⊗U − |0⟩⟨1|⊗U†]`.
pub fn decompose_propagation(gate: PropagationGate) -> [CliffordCircuit; 4] {
    propagation_vectors(gate).map(|v| v.inverse())
}

/// `½[I⊗I − |1⟩⟨0|⊗U − |0⟩⟨1|⊗U†]` on (clock, data, data).
pub fn propagation_projection(gate: PropagationGate) -> DenseOperator {
    let u = gate.unitary();
    let mut m = CMatrix::identity(8, 8);
    for r in 0..4 {
        for col in 0..4 {
            m[(4 + r, col)] -= u[(r, col)];
            m[(col, 4 + r)] -= u[(r, col)].conj();
        }
    }
    DenseOperator::from_matrix(m * c(0.5, 0.0)).expect("8x8")
}

/// `C† |0^k⟩⟨0^k| C` on `support`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LchTerm {
    pub support: Vec<usize>,
    pub clifford: CliffordCircuit,
}

impl LchTerm {
    pub fn new(support: Vec<usize>, clifford: CliffordCircuit) -> Result<Self> {
        check_len(support.len(), clifford.n())?;
        for (i, q) in support.iter().enumerate() {
            if support[..i].contains(q) {
                return Err(Error::RepeatedQubit(*q));
            }
        }
        Ok(LchTerm { support, clifford })
    }

    /// `|w⟩⟨w|` on `support`, as `(X^w)† |0⟩⟨0| X^w`.
    pub fn basis_projector(support: Vec<usize>, w: &BitString) -> Result<Self> {
        let mut circ = CliffordCircuit::new(w.len());
        for q in w.ones_positions() {
            circ = circ.x(q);
        }
        Self::new(support, circ)
    }

    pub fn arity(&self) -> usize {
        self.support.len()
    }

    /// `C†|0^k⟩`, the state the projection is onto.
    pub fn ray(&self) -> Result<DenseState> {
        let mut s = DenseState::zero(self.arity())?;
        s.apply_circuit(&self.clifford.inverse())?;
        Ok(s)
    }

    /// Local `2^k × 2^k` projection.
    pub fn local_operator(&self) -> Result<DenseOperator> {
        Ok(self.ray()?.to_operator())
    }

    /// The term on all `n` qubits.
    pub fn full_operator(&self, n: usize) -> Result<DenseOperator> {
        if n > DENSE_OPERATOR_CAP {
            return Err(Error::CapExceeded { requested: n, cap: DENSE_OPERATOR_CAP });
        }
        let ray = self.ray()?;
        let k = self.arity();
        let dim = 1usize << n;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let supp_mask = self.support.iter().fold(0, |m, &q| m | bit(q));
        let spread = |l: usize| {
            (0..k).fold(0usize, |m, j| if l >> (k - 1 - j) & 1 == 1 { m | bit(self.support[j]) } else { m })
        };
        let offs: Vec<usize> = (0..1 << k).map(spread).collect();
        let mut m = CMatrix::zeros(dim, dim);
        for rest in 0..dim {
            if rest & supp_mask != 0 {
                continue;
            }
            for a in 0..1 << k {
                for b in 0..1 << k {
                    m[(rest | offs[a], rest | offs[b])] = ray.amplitude(a) * ray.amplitude(b).conj();
                }
            }
        }
        DenseOperator::from_matrix(m)
    }

    /// `⟨ψ|H_j|ψ⟩` without forming the operator.
    pub fn energy_state(&self, psi: &DenseState) -> Result<f64> {
        let mut s = psi.clone();
        let circ = self.clifford.embed(psi.k(), &self.support)?;
        s.apply_circuit(&circ)?;
        Ok(s.marginal(&self.support)?[0])
    }

    /// `tr(H_j ρ)`.
    pub fn energy(&self, rho: &DenseOperator) -> Result<f64> {
        let local = rho.partial_trace(&self.support)?;
        self.local_operator()?.pair(&local)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TermCounts {
    pub input: usize,
    pub output: usize,
    pub clock: usize,
    pub propagation: usize,
}

/// Compiler bookkeeping stored alongside an instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetadata {
    pub steps: usize,
    pub data_qubits: usize,
    pub witness_qubits: usize,
    pub clock_offset: usize,
    pub term_counts: TermCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectral_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LchInstance {
    pub n: usize,
    pub k: usize,
    pub p: u32,
    pub q: u64,
    pub terms: Vec<LchTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<InstanceMetadata>,
}

impl LchInstance {
    pub fn new(n: usize, k: usize, terms: Vec<LchTerm>, p: u32, q: u64) -> Result<Self> {
        let inst = LchInstance { n, k, p, q, terms, metadata: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.p == 0 {
            return Err(Error::InvalidParameters("p and q must be positive".into()));
        }
        if self.p < 64 && (1u64 << self.p) <= self.q {
            return Err(Error::InvalidParameters(format!("2^p must exceed q (p = {}, q = {})", self.p, self.q)));
        }
        for (j, t) in self.terms.iter().enumerate() {
            check_len(t.support.len(), t.clifford.n())?;
            if t.arity() > self.k {
                return Err(Error::InvalidParameters(format!("term {j} has arity {} > k = {}", t.arity(), self.k)));
            }
            for (i, &s) in t.support.iter().enumerate() {
                if s >= self.n {
                    return Err(Error::IndexOutOfRange { index: s, n: self.n });
                }
                if t.support[..i].contains(&s) {
                    return Err(Error::RepeatedQubit(s));
                }
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.terms.len()
    }

    /// Completeness threshold `α = 2^{−p}`.
    pub fn alpha(&self) -> f64 {
        0.5f64.powi(self.p as i32)
    }

    /// Soundness threshold `β = 1/q`.
    pub fn beta(&self) -> f64 {
        1.0 / self.q as f64
    }

    /// `Σ_j H_j` as a dense matrix.
    pub fn hamiltonian(&self) -> Result<DenseOperator> {
        let mut h = DenseOperator::zeros(self.n)?;
        for t in &self.terms {
            h = h.add(&t.full_operator(self.n)?)?;
        }
        Ok(h)
    }

    /// `Σ_j ⟨ψ|H_j|ψ⟩`.
    pub fn energy_state(&self, psi: &DenseState) -> Result<f64> {
        check_len(self.n, psi.k())?;
        self.terms.iter().map(|t| t.energy_state(psi)).sum()
    }
}

/// `Σ_j tr(H_j ρ)`.
pub fn energy(inst: &LchInstance, rho: &DenseOperator) -> Result<f64> {
    check_len(inst.n, rho.k())?;
    inst.terms.iter().map(|t| t.energy(rho)).sum()
}

/// Minimum eigenvalue of `Σ_j H_j`.
pub fn ground_energy(inst: &LchInstance) -> Result<f64> {
    Ok(inst.hamiltonian()?.min_eigenvalue())
}

/// Ground energy and the distance to the next distinct eigenvalue.
pub fn spectrum_summary(inst: &LchInstance) -> Result<(f64, Option<f64>)> {
    let ev = inst.hamiltonian()?.eigenvalues();
    let g = ev[0];
    let gap = ev.iter().find(|&&e| e > g + 1e-9).map(|e| e - g);
    Ok((g, gap))
}

/// Clock value `1^t 0^{T−t}`.
pub fn unary_clock(steps: usize, t: usize) -> BitString {
    BitString::from_bools((1..=steps).map(|j| j <= t))
}

/// Kitaev-style reduction of `v` to a Clifford-Hamiltonian instance with
/// `q = 2(T+1)³m`. Fails when `2^p ≤ q`.
pub fn compile(v: &VerificationCircuit, p: u32) -> Result<LchInstance> {
    v.validate()?;
    let nd = v.n_data();
    let steps = v.steps();
    let n = nd + steps;
    let clock = |t: usize| nd + t - 1;
    let mut terms = Vec::new();
    let mut counts = TermCounts::default();
    let bits = |s: &str| s.parse::<BitString>().expect("literal");

    for a in v.witness..nd {
        let term = if steps == 0 {
            LchTerm::basis_projector(vec![a], &bits("1"))?
        } else {
            LchTerm::basis_projector(vec![a, clock(1)], &bits("10"))?
        };
        terms.push(term);
        counts.input += 1;
    }

    terms.push(if steps == 0 {
        LchTerm::basis_projector(vec![v.output], &bits("0"))?
    } else {
        LchTerm::basis_projector(vec![v.output, clock(steps)], &bits("01"))?
    });
    counts.output += 1;

    for t in 1..steps {
        terms.push(LchTerm::basis_projector(vec![clock(t), clock(t + 1)], &bits("01"))?);
        counts.clock += 1;
    }

    for (idx, g) in v.gates.iter().enumerate() {
        let t = idx + 1;
        let (d1, d2) = g.qubits();
        let mut support = vec![clock(t), d1, d2];
        let before = t > 1;
        let after = t < steps;
        if before {
            support.push(clock(t - 1));
        }
        if after {
            support.push(clock(t + 1));
        }
        let arity = support.len();
        for gadget in decompose_propagation(g.kind()) {
            let mut circ = gadget.embed(arity, &[0, 1, 2])?;
            if before {
                circ = circ.x(3);
            }
            terms.push(LchTerm::new(support.clone(), circ)?);
            counts.propagation += 1;
        }
    }

    let m = terms.len() as u64;
    let q = 2 * (steps as u64 + 1).pow(3) * m;
    let mut inst = LchInstance::new(n, DEFAULT_LOCALITY, terms, p, q)?;
    let (ground, gap) = if n <= METADATA_QUBIT_LIMIT {
        let (g, gap) = spectrum_summary(&inst)?;
        (Some(g), gap)
    } else {
        (None, None)
    };
    inst.metadata = Some(InstanceMetadata {
        steps,
        data_qubits: nd,
        witness_qubits: v.witness,
        clock_offset: nd,
        term_counts: counts,
        ground_energy: ground,
        spectral_gap: gap,
    });
    Ok(inst)
}

/// `(T+1)^{−1/2} Σ_t U_t⋯U_1 |witness⟩|0^anc⟩ ⊗ |1^t 0^{T−t}⟩`.
pub fn history_state(v: &VerificationCircuit, witness: &DenseState) -> Result<DenseState> {
    v.validate()?;
    let steps = v.steps();
    let total = v.n_data() + steps;
    if total > crate::pauli_clifford::dense::DEFAULT_DENSE_CAP {
        return Err(Error::CapExceeded { requested: total, cap: crate::pauli_clifford::dense::DEFAULT_DENSE_CAP });
    }
    let mut amps = vec![c(0.0, 0.0); 1 << total];
    let norm = 1.0 / ((steps + 1) as f64).sqrt();
    let mut data = v.initial_state(witness)?;
    for t in 0..=steps {
        if t > 0 {
            data.apply_gates(&v.gates[t - 1].dense_gates())?;
        }
        let clk = crate::pauli_clifford::dense::basis_index(&unary_clock(steps, t));
        for (i, a) in data.amplitudes().iter().enumerate() {
            amps[(i << steps) | clk] += a * norm;
        }
    }
    DenseState::from_amplitudes(amps)
}
