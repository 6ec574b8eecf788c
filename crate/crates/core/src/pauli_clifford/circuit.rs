use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::PauliString;

/// Clifford gate set `{H, P, CNOT, X, Z}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    P(usize),
    Cnot(usize, usize),
    X(usize),
    Z(usize),
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H(_) => "H",
            Gate::P(_) => "P",
            Gate::Cnot(..) => "CNOT",
            Gate::X(_) => "X",
            Gate::Z(_) => "Z",
        }
    }

    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::P(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Cnot(c, t) => vec![c, t],
        }
    }

    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::P(q) => Gate::P(map(q)),
            Gate::X(q) => Gate::X(map(q)),
            Gate::Z(q) => Gate::Z(map(q)),
            Gate::Cnot(c, t) => Gate::Cnot(map(c), map(t)),
        }
    }

    /// `p ↦ G p G†` in place.
    pub fn conjugate(&self, p: &mut PauliString) {
        match *self {
            Gate::H(q) => {
                let (x, z) = (p.x.get(q), p.z.get(q));
                p.x.set(q, z);
                p.z.set(q, x);
                if x && z {
                    p.multiply_phase(2);
                }
            }
            Gate::P(q) => {
                // P X P† = iXZ, P Z P† = Z
                if p.x.get(q) {
                    p.z.flip(q);
                    p.multiply_phase(1);
                }
            }
            Gate::X(q) => {
                if p.z.get(q) {
                    p.multiply_phase(2);
                }
            }
            Gate::Z(q) => {
                if p.x.get(q) {
                    p.multiply_phase(2);
                }
            }
            Gate::Cnot(c, t) => {
                if p.x.get(c) {
                    p.x.flip(t);
                }
                if p.z.get(t) {
                    p.z.flip(c);
                }
            }
        }
    }
}

/// Ordered gate list on `n` qubits; first gate is applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordCircuit {
    n: usize,
    gates: Vec<Gate>,
}

impl CliffordCircuit {
    pub fn new(n: usize) -> Self {
        CliffordCircuit { n, gates: Vec::new() }
    }

    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, g: Gate) -> Result<&mut Self> {
        let qs = g.qubits();
        for &q in &qs {
            if q >= self.n {
                return Err(Error::IndexOutOfRange { index: q, n: self.n });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::RepeatedQubit(qs[0]));
        }
        self.gates.push(g);
        Ok(self)
    }

    pub fn h(mut self, q: usize) -> Self {
        self.push(Gate::H(q)).expect("valid gate");
        self
    }
    pub fn p(mut self, q: usize) -> Self {
        self.push(Gate::P(q)).expect("valid gate");
        self
    }
    pub fn p_dag(self, q: usize) -> Self {
        self.p(q).p(q).p(q)
    }
    pub fn x(mut self, q: usize) -> Self {
        self.push(Gate::X(q)).expect("valid gate");
        self
    }
    pub fn z(mut self, q: usize) -> Self {
        self.push(Gate::Z(q)).expect("valid gate");
        self
    }
    pub fn cnot(mut self, c: usize, t: usize) -> Self {
        self.push(Gate::Cnot(c, t)).expect("valid gate");
        self
    }
    /// Controlled-Z as `H_t · CNOT · H_t`.
    pub fn cz(self, c: usize, t: usize) -> Self {
        self.h(t).cnot(c, t).h(t)
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &CliffordCircuit) -> Result<CliffordCircuit> {
        check_len(self.n, other.n)?;
        let mut gates = self.gates.clone();
        gates.extend_from_slice(&other.gates);
        Ok(CliffordCircuit { n: self.n, gates })
    }

    /// Circuit for `C†`.
    pub fn inverse(&self) -> CliffordCircuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in self.gates.iter().rev() {
            match *g {
                Gate::P(q) => gates.extend([Gate::P(q), Gate::P(q), Gate::P(q)]),
                other => gates.push(other),
            }
        }
        CliffordCircuit { n: self.n, gates: merge_phase_runs(gates) }
    }

    /// Entry-wise complex conjugate: every `P` becomes `P³ = P*`, the rest
    /// of the gate set is real.
    pub fn conjugate(&self) -> CliffordCircuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for g in &self.gates {
            match *g {
                Gate::P(q) => gates.extend([Gate::P(q), Gate::P(q), Gate::P(q)]),
                other => gates.push(other),
            }
        }
        CliffordCircuit { n: self.n, gates: merge_phase_runs(gates) }
    }

    /// Relabel qubit `j` to `map[j]` inside a circuit on `total` qubits.
    pub fn embed(&self, total: usize, map: &[usize]) -> Result<CliffordCircuit> {
        check_len(self.n, map.len())?;
        CliffordCircuit::from_gates(total, self.gates.iter().map(|g| g.remap(|q| map[q])).collect())
    }

    /// The same k-qubit circuit applied to each of the given k-tuples.
    pub fn transversal(&self, total: usize, tuples: &[Vec<usize>]) -> Result<CliffordCircuit> {
        let mut out = CliffordCircuit::new(total);
        for tuple in tuples {
            let e = self.embed(total, tuple)?;
            out.gates.extend(e.gates);
        }
        Ok(out)
    }
}

/// Reduce adjacent runs of `P` on one qubit modulo 4.
fn merge_phase_runs(gates: Vec<Gate>) -> Vec<Gate> {
    let mut out: Vec<Gate> = Vec::with_capacity(gates.len());
    let mut i = 0;
    while i < gates.len() {
        if let Gate::P(q) = gates[i] {
            let mut run = 0;
            while i < gates.len() && gates[i] == Gate::P(q) {
                run += 1;
                i += 1;
            }
            out.extend(std::iter::repeat_n(Gate::P(q), run % 4));
        } else {
            out.push(gates[i]);
            i += 1;
        }
    }
    out
}

/// `C p C†` with exact phase.
pub fn conjugate_pauli(c: &CliffordCircuit, p: &PauliString) -> Result<PauliString> {
    check_len(c.n(), p.n())?;
    let mut out = p.clone();
    for g in c.gates() {
        g.conjugate(&mut out);
    }
    Ok(out)
}

// JSON form: {"n":k,"gates":[["H",0],["CNOT",0,1],...]}

impl Serialize for Gate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let qs = self.qubits();
        let mut seq = serializer.serialize_seq(Some(1 + qs.len()))?;
        seq.serialize_element(self.name())?;
        for q in qs {
            seq.serialize_element(&q)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct GateVisitor;
        impl<'de> Visitor<'de> for GateVisitor {
            type Value = Gate;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a gate array such as [\"H\",0] or [\"CNOT\",0,1]")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Gate, A::Error> {
                let name: String = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let mut next = |i| -> std::result::Result<usize, A::Error> {
                    seq.next_element()?.ok_or_else(|| de::Error::invalid_length(i, &self))
                };
                let g = match name.as_str() {
                    "H" => Gate::H(next(1)?),
                    "P" => Gate::P(next(1)?),
                    "X" => Gate::X(next(1)?),
                    "Z" => Gate::Z(next(1)?),
                    "CNOT" => {
                        let c = next(1)?;
                        Gate::Cnot(c, next(2)?)
                    }
                    other => return Err(de::Error::custom(format!("unknown Clifford gate {other:?}"))),
                };
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("too many operands for gate"));
                }
                Ok(g)
            }
        }
        deserializer.deserialize_seq(GateVisitor)
    }
}

#[derive(Serialize, Deserialize)]
struct CircuitRepr {
    n: usize,
    gates: Vec<Gate>,
}

impl Serialize for CliffordCircuit {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CircuitRepr { n: self.n, gates: self.gates.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CliffordCircuit {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = CircuitRepr::deserialize(deserializer)?;
        CliffordCircuit::from_gates(repr.n, repr.gates).map_err(de::Error::custom)
    }
}
