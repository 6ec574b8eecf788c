//! Soundness apparatus (code projectors, the decoding channel `Ξ_N`, the
//! rejection bound) and the zero-knowledge simulator experiments.
//!
//! `Ξ_N(σ) = ½ (⟨I^{⊗N},σ⟩ I + ⟨X^{⊗N},σ⟩ X + ⟨Y^{⊗N},σ⟩ Y + ⟨Z^{⊗N},σ⟩ Z)`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::encoding::{soundness_decode, KeyOpening};
use crate::error::{check_len, Error, Result};
use crate::lch::LchInstance;
use crate::mc;
use crate::pauli_clifford::dense::{basis_index, c, pauli_matrix, CMatrix, DENSE_OPERATOR_CAP};
use crate::pauli_clifford::{DenseOperator, DenseState, Ensemble, PauliString};
use crate::protocol::predicates::{challenge_len, select_term};
use crate::protocol::session::{run_protocol, simulate_session, Adversary, ProtocolConfig};
use crate::protocol::{Backend, Transcript};
use crate::sampler::{all_trap_columns, pad_shift, TermSampler};
use crate::steane::SteaneCode;

const PAULI_LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

/// `P^{⊗N}` placed on `qubits` of an `n`-qubit register; Hermitian.
fn tensor_power(op: char, n: usize, qubits: &[usize]) -> PauliString {
    let mut p = PauliString::identity(n);
    for &q in qubits {
        p = p.multiply(&PauliString::single(n, q, op)).expect("same width");
    }
    p
}

/// `⊗_i P_i^{⊗N}` with `P_i` on block `i`.
fn block_pauli(ops: &[char], n: usize, blocks: &[Vec<usize>]) -> PauliString {
    ops.iter()
        .zip(blocks)
        .fold(PauliString::identity(n), |acc, (&op, qs)| acc.multiply(&tensor_power(op, n, qs)).expect("same width"))
}

fn pauli_words(len: usize) -> Vec<Vec<char>> {
    (0..4usize.pow(len as u32))
        .map(|mut idx| {
            let mut w = vec!['I'; len];
            for slot in w.iter_mut().rev() {
                *slot = PAULI_LABELS[idx % 4];
                idx /= 4;
            }
            w
        })
        .collect()
}

fn label_matrix(ops: &[char]) -> CMatrix {
    let label: String = ops.iter().collect();
    pauli_matrix(&PauliString::from_label(&label).expect("valid label")).expect("small")
}

/// `Ξ_N^{⊗n}` from expectation values: `2^{−n} Σ_P ⟨⊗_i P_i^{⊗N}⟩ ⊗_i P_i`.
fn xi_from_expectations(n: usize, mut expectation: impl FnMut(&[char]) -> Result<f64>) -> Result<DenseOperator> {
    if n > DENSE_OPERATOR_CAP {
        return Err(Error::CapExceeded { requested: n, cap: DENSE_OPERATOR_CAP });
    }
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim, dim);
    for ops in pauli_words(n) {
        let e = expectation(&ops)?;
        if e != 0.0 {
            m += label_matrix(&ops) * c(e, 0.0);
        }
    }
    DenseOperator::from_matrix(m * c(1.0 / dim as f64, 0.0))
}

/// `Ξ_N` applied to each listed block of an ensemble; other qubits traced out.
pub fn xi_tensor_decode(ens: &Ensemble, blocks: &[Vec<usize>]) -> Result<DenseOperator> {
    let n = ens.k();
    xi_from_expectations(blocks.len(), |ops| ens.pauli_expectation(&block_pauli(ops, n, blocks)))
}

/// `Ξ_N(σ)` for an `N`-qubit operator.
pub fn xi_apply(sigma: &DenseOperator) -> Result<DenseOperator> {
    let nn = sigma.k();
    let all: Vec<usize> = (0..nn).collect();
    xi_from_expectations(1, |ops| {
        let p = pauli_matrix(&tensor_power(ops[0], nn, &all))?;
        Ok((sigma.matrix() * p).trace().re)
    })
}

/// `Ξ_N*(τ) = ½ Σ_P ⟨P, τ⟩ P^{⊗N}`.
pub fn xi_adjoint(tau: &DenseOperator, nn: usize) -> Result<DenseOperator> {
    check_len(1, tau.k())?;
    if nn > DENSE_OPERATOR_CAP {
        return Err(Error::CapExceeded { requested: nn, cap: DENSE_OPERATOR_CAP });
    }
    let all: Vec<usize> = (0..nn).collect();
    let dim = 1usize << nn;
    let mut m = CMatrix::zeros(dim, dim);
    for op in PAULI_LABELS {
        let coeff = (tau.matrix() * label_matrix(&[op])).trace();
        m += pauli_matrix(&tensor_power(op, nn, &all))? * coeff;
    }
    DenseOperator::from_matrix(m * c(0.5, 0.0))
}

/// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Ξ_N(|i⟩⟨j|)`, input qubits first.
pub fn xi_choi(nn: usize) -> Result<DenseOperator> {
    if nn + 1 > DENSE_OPERATOR_CAP {
        return Err(Error::CapExceeded { requested: nn + 1, cap: DENSE_OPERATOR_CAP });
    }
    let all: Vec<usize> = (0..nn).collect();
    let powers: Vec<(CMatrix, CMatrix)> = PAULI_LABELS
        .iter()
        .map(|&op| Ok((pauli_matrix(&tensor_power(op, nn, &all))?, label_matrix(&[op]))))
        .collect::<Result<_>>()?;
    let dim = 1usize << nn;
    let mut m = CMatrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            // ⟨P^{⊗N}, |i⟩⟨j|⟩ = ⟨j|P^{⊗N}|i⟩
            let mut out = CMatrix::zeros(2, 2);
            for (big, small) in &powers {
                out += small * big[(j, i)];
            }
            for a in 0..2 {
                for b in 0..2 {
                    m[(2 * i + a, 2 * j + b)] = out[(a, b)] * c(0.5, 0.0);
                }
            }
        }
    }
    DenseOperator::from_matrix(m)
}

/// `Π_0, Π_1` (code-space projectors) and `Δ_0, Δ_1` (parity projectors).
#[derive(Clone, Debug)]
pub struct Projectors {
    pub pi0: DenseOperator,
    pub pi1: DenseOperator,
    pub delta0: DenseOperator,
    pub delta1: DenseOperator,
}

/// `Δ_b = (I + (−1)^b Z^{⊗N})/2`.
pub fn parity_projectors(nn: usize) -> Result<(DenseOperator, DenseOperator)> {
    if nn > DENSE_OPERATOR_CAP {
        return Err(Error::CapExceeded { requested: nn, cap: DENSE_OPERATOR_CAP });
    }
    let dim = 1usize << nn;
    let mut d0 = CMatrix::zeros(dim, dim);
    let mut d1 = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        if x.count_ones() % 2 == 0 {
            d0[(x, x)] = c(1.0, 0.0);
        } else {
            d1[(x, x)] = c(1.0, 0.0);
        }
    }
    Ok((DenseOperator::from_matrix(d0)?, DenseOperator::from_matrix(d1)?))
}

/// Projectors for `N = 1` (code words `0` and `1`) or `N = 7`.
pub fn projectors(nn: usize) -> Result<Projectors> {
    let words = |bit: bool| -> Result<Vec<BitString>> {
        match nn {
            1 => Ok(vec![BitString::from_bools([bit])]),
            7 => SteaneCode::new(1)?.codewords(bit),
            _ => Err(Error::InvalidParameters(format!("code projectors need N = 1 or 7, got {nn}"))),
        }
    };
    let proj = |ws: Vec<BitString>| -> Result<DenseOperator> {
        let dim = 1usize << nn;
        let mut m = CMatrix::zeros(dim, dim);
        for w in ws {
            let i = basis_index(&w);
            m[(i, i)] = c(1.0, 0.0);
        }
        DenseOperator::from_matrix(m)
    };
    let (delta0, delta1) = parity_projectors(nn)?;
    Ok(Projectors { pi0: proj(words(false)?)?, pi1: proj(words(true)?)?, delta0, delta1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoundnessReport {
    pub reject_prob: f64,
    pub lower_bound: f64,
}

impl SoundnessReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.reject_prob >= self.lower_bound - tol
    }
}

/// Exact rejection probability of the honest verifier on adversarial `ξ`
/// for term `j`, against a prover who knows `(π, a, b)` and picks the trap
/// string after seeing `u`; and `⟨H_j, Ξ(un-padded, un-permuted ξ)⟩`.
pub fn soundness_check(
    inst: &LchInstance,
    xi: &Ensemble,
    opening: &KeyOpening,
    block_len: usize,
    j: usize,
) -> Result<SoundnessReport> {
    let n = inst.n;
    let w = 2 * block_len;
    check_len(n * w, xi.k())?;
    let term = inst.terms.get(j).ok_or(Error::IndexOutOfRange { index: j, n: inst.m() })?;
    let t_level = (1..=3).find(|&t| 7usize.pow(t) == block_len).ok_or_else(|| {
        Error::InvalidParameters(format!("block length {block_len} is not a power of 7"))
    })?;
    let code = SteaneCode::new(t_level)?;
    let k = term.arity();
    let tuples: Vec<Vec<usize>> = (0..w).map(|p| term.support.iter().map(|&i| i * w + p).collect()).collect();
    let transversal = term.clifford.transversal(n * w, &tuples)?;
    let measured = xi.map_states(|s| {
        let mut s = s.clone();
        s.apply_circuit(&transversal)?;
        Ok(s)
    })?;
    let probs = measured.probabilities();

    // trap-column outcomes that some trap string can produce
    let ts = TermSampler::new(term, &code)?;
    let columns = all_trap_columns(k);
    let reachable: Vec<bool> =
        (0..1usize << k).map(|z| columns.iter().any(|col| ts.column_probabilities(col)[z] > 0.0)).collect();

    let shift = pad_shift(&term.clifford, &term.support, &opening.a, &opening.b, block_len)?;
    let mut accept = 0.0;
    for (idx, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let u = &BitString::from_uint(idx as u64, n * w) ^ &shift.c;
        if optimal_prover_accepts(&u, &term.support, opening, &code, &reachable) {
            accept += p;
        }
    }

    let decoded = soundness_decode(xi, opening, n, block_len)?;
    let lower_bound = term.energy(&decoded)?;
    Ok(SoundnessReport { reject_prob: 1.0 - accept, lower_bound })
}

fn optimal_prover_accepts(
    u: &BitString,
    support: &[usize],
    opening: &KeyOpening,
    code: &SteaneCode,
    reachable: &[bool],
) -> bool {
    let block_len = code.block_len();
    let w = 2 * block_len;
    let mut any_one = false;
    let mut zs = Vec::with_capacity(support.len());
    for &i in support {
        let block = u.slice(i * w, (i + 1) * w);
        let y = BitString::from_bools((0..block_len).map(|jj| block.get(opening.perm[jj])));
        let z = BitString::from_bools((block_len..w).map(|jj| block.get(opening.perm[jj])));
        match code.logical_decode(&y) {
            Ok(bit) => any_one |= bit,
            Err(_) => return false,
        }
        zs.push(z);
    }
    any_one
        && (0..block_len).all(|jj| reachable[zs.iter().fold(0usize, |acc, z| (acc << 1) | z.get(jj) as usize)])
}

/// `C_j†|10^{k−1}⟩` on the support of term `j`, `|0⟩` elsewhere.
pub fn prepare_rho_r(inst: &LchInstance, j: usize) -> Result<DenseState> {
    let term = inst.terms.get(j).ok_or(Error::IndexOutOfRange { index: j, n: inst.m() })?;
    let mut bits = BitString::zeros(inst.n);
    bits.set(term.support[0], true);
    let mut s = DenseState::from_bits(&bits)?;
    s.apply_circuit(&term.clifford.inverse().embed(inst.n, &term.support)?)?;
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct SimulatorConfig {
    pub instance: LchInstance,
    pub adversary: Adversary,
    pub samples: usize,
    pub t_level: u32,
}

/// One simulated transcript; there is no witness input.
///
/// At odd levels the logical action is `conj(C)`, so the passing state is
/// conjugated to stay orthogonal to `conj(C)†|0^k⟩`.
pub fn zk_simulate<R: Rng + ?Sized>(cfg: &SimulatorConfig, rng: &mut R) -> Result<Transcript> {
    let inst = &cfg.instance;
    let r = BitString::from_bools((0..challenge_len(inst.m())).map(|_| rng.gen::<bool>()));
    let j = select_term(&r, inst.m())?;
    let mut rho = prepare_rho_r(inst, j)?;
    if cfg.t_level % 2 == 1 {
        rho = rho.conj();
    }
    simulate_session(inst, &r, rho, &cfg.adversary, cfg.t_level, rng)
}

/// Classical features of a transcript: challenge string and verdict.
pub fn transcript_feature(t: &Transcript) -> String {
    let r = t.challenge().map_or_else(|| "-".to_string(), |(r, _)| r.to_string());
    let v = t.verdict().map_or("none", |v| match v {
        crate::protocol::Verdict::Accept => "accept",
        crate::protocol::Verdict::Reject => "reject",
        crate::protocol::Verdict::Abort => "abort",
    });
    format!("{r}|{v}")
}

pub fn histogram(features: impl IntoIterator<Item = String>) -> BTreeMap<String, usize> {
    let mut h = BTreeMap::new();
    for f in features {
        *h.entry(f).or_insert(0) += 1;
    }
    h
}

/// Total variation distance between two empirical distributions.
pub fn tv_distance(a: &BTreeMap<String, usize>, b: &BTreeMap<String, usize>) -> f64 {
    let na: usize = a.values().sum();
    let nb: usize = b.values().sum();
    if na == 0 || nb == 0 {
        return if na == nb { 0.0 } else { 1.0 };
    }
    let keys: std::collections::BTreeSet<&String> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| {
            let pa = *a.get(k).unwrap_or(&0) as f64 / na as f64;
            let pb = *b.get(k).unwrap_or(&0) as f64 / nb as f64;
            (pa - pb).abs()
        })
        .sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionReport {
    pub real: BTreeMap<String, usize>,
    pub simulated: BTreeMap<String, usize>,
    pub tv: f64,
    pub samples: usize,
}

/// Real runs with `witness` against simulated runs, same adversary.
pub fn compare_real_vs_simulated(
    witness: &DenseState,
    cfg: &SimulatorConfig,
    seed: u64,
) -> Result<DistributionReport> {
    let inst = &cfg.instance;
    let pcfg = ProtocolConfig { t_level: cfg.t_level, backend: Backend::Hash, direct_challenge: false };
    let real = mc::collect(cfg.samples, seed, |rng| {
        Ok(transcript_feature(&run_protocol(inst, Some(witness), &cfg.adversary, &pcfg, rng)?))
    })?;
    let simulated = mc::collect(cfg.samples, seed ^ 0x5eed_5eed_5eed_5eed, |rng| {
        Ok(transcript_feature(&zk_simulate(cfg, rng)?))
    })?;
    let real = histogram(real);
    let simulated = histogram(simulated);
    let tv = tv_distance(&real, &simulated);
    Ok(DistributionReport { real, simulated, tv, samples: cfg.samples })
}
