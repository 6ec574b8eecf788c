//! Dense state-vector and density-matrix backend.
//!
//! Qubit 0 is the most significant bit of a basis index. Every constructor
//! enforces a qubit cap (default [`DEFAULT_DENSE_CAP`]).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::error::{check_len, Error, Result};
use crate::pauli_clifford::{CliffordCircuit, Gate, PauliString};

pub const DEFAULT_DENSE_CAP: usize = 20;

/// Qubit cap for full `2^k × 2^k` operators.
pub const DENSE_OPERATOR_CAP: usize = 12;

const NORM_TOL: f64 = 1e-10;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn check_cap(k: usize, cap: usize) -> Result<()> {
    if k > cap {
        Err(Error::CapExceeded { requested: k, cap })
    } else {
        Ok(())
    }
}

#[inline]
fn bit_of(k: usize, q: usize) -> usize {
    1usize << (k - 1 - q)
}

/// Basis index of a bit string, first bit most significant.
pub fn basis_index(bits: &BitString) -> usize {
    bits.iter().fold(0usize, |acc, b| (acc << 1) | b as usize)
}

fn mask_of(k: usize, bits: &BitString) -> usize {
    bits.ones_positions().into_iter().fold(0, |m, q| m | bit_of(k, q))
}

/// Gates available to the dense simulator, including the non-Clifford
/// controlled phase `Λ(P)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DenseGate {
    H(usize),
    P(usize),
    X(usize),
    Z(usize),
    Cnot(usize, usize),
    /// `|a⟩|x⟩ ↦ |a⟩P^a|x⟩`.
    ControlledPhase(usize, usize),
}

impl From<Gate> for DenseGate {
    fn from(g: Gate) -> Self {
        match g {
            Gate::H(q) => DenseGate::H(q),
            Gate::P(q) => DenseGate::P(q),
            Gate::X(q) => DenseGate::X(q),
            Gate::Z(q) => DenseGate::Z(q),
            Gate::Cnot(a, b) => DenseGate::Cnot(a, b),
        }
    }
}

impl DenseGate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            DenseGate::H(q) | DenseGate::P(q) | DenseGate::X(q) | DenseGate::Z(q) => vec![q],
            DenseGate::Cnot(a, b) | DenseGate::ControlledPhase(a, b) => vec![a, b],
        }
    }
}

/// Pure state on `k` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    k: usize,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn zero(k: usize) -> Result<Self> {
        Self::zero_capped(k, DEFAULT_DENSE_CAP)
    }

    pub fn zero_capped(k: usize, cap: usize) -> Result<Self> {
        check_cap(k, cap)?;
        let mut amps = vec![c(0.0, 0.0); 1 << k];
        amps[0] = c(1.0, 0.0);
        Ok(DenseState { k, amps })
    }

    pub fn basis(k: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(k)?;
        if index >= s.amps.len() {
            return Err(Error::IndexOutOfRange { index, n: s.amps.len() });
        }
        s.amps[0] = c(0.0, 0.0);
        s.amps[index] = c(1.0, 0.0);
        Ok(s)
    }

    pub fn from_bits(bits: &BitString) -> Result<Self> {
        Self::basis(bits.len(), basis_index(bits))
    }

    /// Amplitudes must have power-of-two length and unit norm.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        Self::from_amplitudes_capped(amps, DEFAULT_DENSE_CAP)
    }

    pub fn from_amplitudes_capped(amps: Vec<Complex64>, cap: usize) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::InvalidParameters(format!(
                "amplitude vector length {} is not a power of two",
                amps.len()
            )));
        }
        let k = amps.len().trailing_zeros() as usize;
        check_cap(k, cap)?;
        let s = DenseState { k, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameters(format!("state norm {norm} is not 1")));
        }
        Ok(s)
    }

    /// Normalizes a nonzero vector.
    pub fn from_unnormalized(amps: Vec<Complex64>) -> Result<Self> {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return Err(Error::InvalidParameters("zero vector".into()));
        }
        Self::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_qubits(&self, qs: &[usize]) -> Result<()> {
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.k {
                return Err(Error::IndexOutOfRange { index: q, n: self.k });
            }
            if qs[..i].contains(&q) {
                return Err(Error::RepeatedQubit(q));
            }
        }
        Ok(())
    }

    /// Apply a 2×2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`.
    pub fn apply_single(&mut self, q: usize, m: [[Complex64; 2]; 2]) -> Result<()> {
        self.check_qubits(&[q])?;
        let bit = bit_of(self.k, q);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    pub fn apply(&mut self, g: &DenseGate) -> Result<()> {
        self.check_qubits(&g.qubits())?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (zero, one) = (c(0.0, 0.0), c(1.0, 0.0));
        match *g {
            DenseGate::H(q) => self.apply_single(q, [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])?,
            DenseGate::P(q) => self.apply_single(q, [[one, zero], [zero, c(0.0, 1.0)]])?,
            DenseGate::X(q) => self.apply_single(q, [[zero, one], [one, zero]])?,
            DenseGate::Z(q) => self.apply_single(q, [[one, zero], [zero, -one]])?,
            DenseGate::Cnot(ctl, t) => {
                let (bc, bt) = (bit_of(self.k, ctl), bit_of(self.k, t));
                for i in 0..self.amps.len() {
                    if i & bc != 0 && i & bt == 0 {
                        self.amps.swap(i, i | bt);
                    }
                }
            }
            DenseGate::ControlledPhase(ctl, t) => {
                let mask = bit_of(self.k, ctl) | bit_of(self.k, t);
                for i in 0..self.amps.len() {
                    if i & mask == mask {
                        self.amps[i] *= c(0.0, 1.0);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn apply_gates(&mut self, gates: &[DenseGate]) -> Result<()> {
        gates.iter().try_for_each(|g| self.apply(g))
    }

    pub fn apply_circuit(&mut self, circ: &CliffordCircuit) -> Result<()> {
        check_len(self.k, circ.n())?;
        for g in circ.gates() {
            self.apply(&DenseGate::from(*g))?;
        }
        Ok(())
    }

    /// `|ψ⟩ ↦ P|ψ⟩`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        check_len(self.k, p.n())?;
        let xm = mask_of(self.k, &p.x);
        let zm = mask_of(self.k, &p.z);
        let scalar = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase as usize % 4];
        let mut out = vec![c(0.0, 0.0); self.amps.len()];
        for (b, a) in self.amps.iter().enumerate() {
            let sign = if (b & zm).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            out[b ^ xm] = *a * scalar * sign;
        }
        self.amps = out;
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &DenseState) -> Result<Complex64> {
        check_len(self.k, other.k)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<Complex64> {
        let mut q = self.clone();
        q.apply_pauli(p)?;
        self.inner(&q)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Born distribution of measuring `qubits` (listed order, first most
    /// significant), the rest traced out.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut idx = 0usize;
            for &q in qubits {
                idx = (idx << 1) | ((i & bit_of(self.k, q) != 0) as usize);
            }
            out[idx] += a.norm_sqr();
        }
        Ok(out)
    }

    /// Reduced density operator on `keep` (listed order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DenseOperator> {
        self.check_qubits(keep)?;
        let kk = keep.len();
        let dim = 1usize << kk;
        let keep_mask = keep.iter().fold(0, |m, &q| m | bit_of(self.k, q));
        let spread = |l: usize| -> usize {
            keep.iter()
                .enumerate()
                .fold(0usize, |m, (j, &q)| if l & (1 << (kk - 1 - j)) != 0 { m | bit_of(self.k, q) } else { m })
        };
        let offsets: Vec<usize> = (0..dim).map(spread).collect();
        let mut m = CMatrix::zeros(dim, dim);
        for base in 0..self.amps.len() {
            if base & keep_mask != 0 {
                continue;
            }
            for a in 0..dim {
                let va = self.amps[base | offsets[a]];
                if va == c(0.0, 0.0) {
                    continue;
                }
                for b in 0..dim {
                    m[(a, b)] += va * self.amps[base | offsets[b]].conj();
                }
            }
        }
        Ok(DenseOperator { k: kk, m })
    }

    pub fn tensor(&self, other: &DenseState) -> Result<DenseState> {
        check_cap(self.k + other.k, DEFAULT_DENSE_CAP)?;
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Ok(DenseState { k: self.k + other.k, amps })
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> DenseState {
        DenseState { k: self.k, amps: self.amps.iter().map(|a| a.conj()).collect() }
    }

    /// Reorder qubits so that new qubit `j` is old qubit `order[j]`.
    pub fn reorder(&self, order: &[usize]) -> Result<DenseState> {
        check_len(self.k, order.len())?;
        self.check_qubits(order)?;
        let mut amps = vec![c(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let mut j = 0usize;
            for &old in order {
                j = (j << 1) | ((i & bit_of(self.k, old) != 0) as usize);
            }
            amps[j] = *a;
        }
        Ok(DenseState { k: self.k, amps })
    }

    /// Equal up to a global phase.
    pub fn approx_eq_up_to_phase(&self, other: &DenseState, tol: f64) -> bool {
        self.k == other.k && (self.inner(other).map(|z| z.norm()).unwrap_or(0.0) - 1.0).abs() < tol
    }

    pub fn approx_eq(&self, other: &DenseState, tol: f64) -> bool {
        self.k == other.k && self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b).norm() < tol)
    }

    pub fn to_operator(&self) -> DenseOperator {
        DenseOperator::from_state(self)
    }
}

#[derive(Serialize, Deserialize)]
struct StateRepr {
    k: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for DenseState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        StateRepr {
            k: self.k,
            re: self.amps.iter().map(|a| a.re).collect(),
            im: self.amps.iter().map(|a| a.im).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DenseState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let r = StateRepr::deserialize(deserializer)?;
        if r.re.len() != r.im.len() || r.re.len() != 1usize << r.k {
            return Err(serde::de::Error::custom("amplitude arrays do not match k"));
        }
        let amps = r.re.into_iter().zip(r.im).map(|(a, b)| c(a, b)).collect();
        DenseState::from_amplitudes(amps).map_err(serde::de::Error::custom)
    }
}

/// Operator on `k` qubits, usually a density matrix or a Hamiltonian term.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    k: usize,
    m: CMatrix,
}

impl DenseOperator {
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() || !m.nrows().is_power_of_two() {
            return Err(Error::InvalidParameters("operator must be square with power-of-two side".into()));
        }
        let k = m.nrows().trailing_zeros() as usize;
        check_cap(k, DENSE_OPERATOR_CAP)?;
        Ok(DenseOperator { k, m })
    }

    pub fn zeros(k: usize) -> Result<Self> {
        Self::from_matrix(CMatrix::zeros(1 << k, 1 << k))
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::from_matrix(CMatrix::identity(1 << k, 1 << k))
    }

    pub fn maximally_mixed(k: usize) -> Result<Self> {
        Ok(Self::identity(k)?.scale(1.0 / (1u64 << k) as f64))
    }

    pub fn from_state(s: &DenseState) -> Self {
        let v = nalgebra::DVector::from_column_slice(s.amplitudes());
        DenseOperator { k: s.k(), m: &v * v.adjoint() }
    }

    /// `|bits⟩⟨bits|`.
    pub fn basis_projector(bits: &BitString) -> Result<Self> {
        let mut op = Self::zeros(bits.len())?;
        let i = basis_index(bits);
        op.m[(i, i)] = c(1.0, 0.0);
        Ok(op)
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn trace(&self) -> Complex64 {
        self.m.trace()
    }

    /// `tr(self · other)`, the pairing `⟨H, ρ⟩` for Hermitian arguments.
    pub fn pair(&self, other: &DenseOperator) -> Result<f64> {
        check_len(self.k, other.k)?;
        let n = self.m.nrows();
        let mut acc = c(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.m[(i, j)] * other.m[(j, i)];
            }
        }
        Ok(acc.re)
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_len(self.k, other.k)?;
        Ok(DenseOperator { k: self.k, m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_len(self.k, other.k)?;
        Ok(DenseOperator { k: self.k, m: &self.m - &other.m })
    }

    pub fn scale(&self, s: f64) -> DenseOperator {
        DenseOperator { k: self.k, m: &self.m * c(s, 0.0) }
    }

    pub fn mul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_len(self.k, other.k)?;
        Ok(DenseOperator { k: self.k, m: &self.m * &other.m })
    }

    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator { k: self.k, m: self.m.adjoint() }
    }

    pub fn tensor(&self, other: &DenseOperator) -> Result<DenseOperator> {
        Self::from_matrix(self.m.kronecker(&other.m))
    }

    /// `U A U†`.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<DenseOperator> {
        check_len(self.m.nrows(), u.nrows())?;
        Ok(DenseOperator { k: self.k, m: u * &self.m * u.adjoint() })
    }

    /// Trace out every qubit not in `keep`; result ordered as `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DenseOperator> {
        for &q in keep {
            if q >= self.k {
                return Err(Error::IndexOutOfRange { index: q, n: self.k });
            }
        }
        let kk = keep.len();
        let dim = 1usize << kk;
        let keep_mask = keep.iter().fold(0, |m, &q| m | bit_of(self.k, q));
        let offsets: Vec<usize> = (0..dim)
            .map(|l| {
                keep.iter().enumerate().fold(0usize, |m, (j, &q)| {
                    if l & (1 << (kk - 1 - j)) != 0 {
                        m | bit_of(self.k, q)
                    } else {
                        m
                    }
                })
            })
            .collect();
        let mut out = CMatrix::zeros(dim, dim);
        for base in 0..self.m.nrows() {
            if base & keep_mask != 0 {
                continue;
            }
            for a in 0..dim {
                for b in 0..dim {
                    out[(a, b)] += self.m[(base | offsets[a], base | offsets[b])];
                }
            }
        }
        Ok(DenseOperator { k: kk, m: out })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.m - self.m.adjoint()).iter().all(|z| z.norm() < tol)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.m + self.m.adjoint()) * c(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(1e-12)) && self.min_eigenvalue() >= -tol
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|e| e.abs() > tol).count()
    }

    /// `½‖A − B‖₁` for Hermitian arguments.
    pub fn trace_distance(&self, other: &DenseOperator) -> Result<f64> {
        let d = self.sub(other)?;
        Ok(0.5 * d.eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }

    pub fn max_abs_diff(&self, other: &DenseOperator) -> Result<f64> {
        check_len(self.k, other.k)?;
        Ok((&self.m - &other.m).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &DenseOperator, tol: f64) -> bool {
        self.max_abs_diff(other).map(|d| d <= tol).unwrap_or(false)
    }

    pub fn is_projection(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && (&self.m * &self.m - &self.m).iter().all(|z| z.norm() < tol)
    }
}

/// Matrix of a Pauli string, phase included.
pub fn pauli_matrix(p: &PauliString) -> Result<CMatrix> {
    let k = p.n();
    check_cap(k, DENSE_OPERATOR_CAP)?;
    let dim = 1usize << k;
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut s = DenseState::basis(k, b)?;
        s.apply_pauli(p)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            m[(row, b)] = *a;
        }
    }
    Ok(m)
}

/// Unitary of a gate list on `k` qubits.
pub fn gates_unitary(k: usize, gates: &[DenseGate]) -> Result<CMatrix> {
    check_cap(k, DENSE_OPERATOR_CAP)?;
    let dim = 1usize << k;
    let mut m = CMatrix::zeros(dim, dim);
    for b in 0..dim {
        let mut s = DenseState::basis(k, b)?;
        s.apply_gates(gates)?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            m[(row, b)] = *a;
        }
    }
    Ok(m)
}

pub fn circuit_unitary(circ: &CliffordCircuit) -> Result<CMatrix> {
    let gates: Vec<DenseGate> = circ.gates().iter().map(|g| DenseGate::from(*g)).collect();
    gates_unitary(circ.n(), &gates)
}

/// Finite mixture of pure states, used where a full density matrix would
/// not fit in memory.
#[derive(Clone, Debug)]
pub struct Ensemble {
    k: usize,
    items: Vec<(f64, DenseState)>,
}

impl Ensemble {
    pub fn new(k: usize, items: Vec<(f64, DenseState)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidParameters("empty ensemble".into()));
        }
        let mut total = 0.0;
        for (w, s) in &items {
            check_len(k, s.k())?;
            if *w < 0.0 {
                return Err(Error::InvalidParameters("negative ensemble weight".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameters(format!("ensemble weights sum to {total}")));
        }
        Ok(Ensemble { k, items })
    }

    pub fn pure(s: DenseState) -> Self {
        Ensemble { k: s.k(), items: vec![(1.0, s)] }
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn items(&self) -> &[(f64, DenseState)] {
        &self.items
    }

    pub fn reduced(&self, keep: &[usize]) -> Result<DenseOperator> {
        let mut acc: Option<DenseOperator> = None;
        for (w, s) in &self.items {
            let r = s.reduced(keep)?.scale(*w);
            acc = Some(match acc {
                None => r,
                Some(a) => a.add(&r)?,
            });
        }
        Ok(acc.expect("nonempty ensemble"))
    }

    pub fn pauli_expectation(&self, p: &PauliString) -> Result<f64> {
        let mut acc = 0.0;
        for (w, s) in &self.items {
            acc += w * s.pauli_expectation(p)?.re;
        }
        Ok(acc)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let mut out = vec![0.0; 1 << self.k];
        for (w, s) in &self.items {
            for (o, a) in out.iter_mut().zip(s.amplitudes()) {
                *o += w * a.norm_sqr();
            }
        }
        out
    }

    pub fn to_operator(&self) -> Result<DenseOperator> {
        let all: Vec<usize> = (0..self.k).collect();
        self.reduced(&all)
    }

    pub fn map_states(&self, f: impl Fn(&DenseState) -> Result<DenseState>) -> Result<Ensemble> {
        let items = self
            .items
            .iter()
            .map(|(w, s)| Ok((*w, f(s)?)))
            .collect::<Result<Vec<_>>>()?;
        Ensemble::new(self.k, items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn controlled_phase_on_11_gives_i() {
        let mut s = DenseState::from_bits(&"11".parse().unwrap()).unwrap();
        s.apply(&DenseGate::ControlledPhase(0, 1)).unwrap();
        assert!((s.amplitude(3) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn controlled_phase_with_control_off_is_trivial() {
        let mut s = DenseState::from_bits(&"01".parse().unwrap()).unwrap();
        let before = s.clone();
        s.apply(&DenseGate::ControlledPhase(0, 1)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn hadamard_on_zero() {
        let mut s = DenseState::zero(1).unwrap();
        s.apply(&DenseGate::H(0)).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.approx_eq(&DenseState::from_amplitudes(vec![c(r, 0.0), c(r, 0.0)]).unwrap(), 1e-15));
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(DenseState::zero(21), Err(Error::CapExceeded { .. })));
        assert!(DenseState::zero_capped(3, 2).is_err());
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        let mut s = DenseState::zero(3).unwrap();
        s.apply(&DenseGate::X(0)).unwrap();
        assert!((s.amplitude(0b100).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reduced_state_of_bell_pair_is_mixed() {
        let mut s = DenseState::zero(2).unwrap();
        s.apply_gates(&[DenseGate::H(0), DenseGate::Cnot(0, 1)]).unwrap();
        let r = s.reduced(&[1]).unwrap();
        assert!(r.approx_eq(&DenseOperator::maximally_mixed(1).unwrap(), 1e-12));
        let full = s.to_operator();
        assert!(full.partial_trace(&[0]).unwrap().approx_eq(&r, 1e-12));
    }

    #[test]
    fn json_round_trip() {
        let mut s = DenseState::zero(2).unwrap();
        s.apply_gates(&[DenseGate::H(0), DenseGate::P(0)]).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        let back: DenseState = serde_json::from_str(&js).unwrap();
        assert!(back.approx_eq(&s, 1e-15));
    }
}
