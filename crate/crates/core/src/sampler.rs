//! Challenge-outcome sampling from a symbolic encoded witness, the XOR
//! attack experiment, trap strings and the attack bound.
//!
//! The measured string of a support block factorizes into a code part, which
//! is uniform over `D_N^{v_i}` given the logical outcome `v`, and `N` trap
//! columns, each a `k`-qubit measurement of `C|t-column⟩`. The pad only
//! shifts the result by the X-part `c` of the conjugated pad.

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::encoding::{sample_key, trap_preparation, EncodedWitness, EncodingKey, TrapState, WitnessForm};
use crate::error::{check_len, Error, Result};
use crate::lch::{LchInstance, LchTerm};
use crate::mc;
use crate::pauli_clifford::{conjugate_pauli, CliffordCircuit, DenseOperator, DenseState, PauliString};
use crate::steane::SteaneCode;

pub const MAX_TERM_ARITY: usize = 5;

/// Amplitudes below this are zero: stabilizer amplitudes are 0 or at least
/// `2^{−k/2}` in modulus.
const AMPLITUDE_FLOOR: f64 = 1e-12;

/// Verifier's reported measurement of the support blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChallengeOutcome {
    pub r: BitString,
    pub j: usize,
    pub support: Vec<usize>,
    pub u: BitString,
}

/// `C^{⊗2N} X^a Z^b = i^phase X^c Z^d C^{⊗2N}` over the full register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadShift {
    pub c: BitString,
    pub d: BitString,
    pub phase: u8,
}

impl PadShift {
    /// `c` on the support blocks, concatenated in support order.
    pub fn c_on(&self, support: &[usize], block_len: usize) -> BitString {
        let w = 2 * block_len;
        BitString::concat(&support.iter().map(|&i| self.c.slice(i * w, (i + 1) * w)).collect::<Vec<_>>())
    }
}

/// Positionwise conjugation of the pad through `C` on the support blocks.
pub fn pad_shift(
    clifford: &CliffordCircuit,
    support: &[usize],
    a: &BitString,
    b: &BitString,
    block_len: usize,
) -> Result<PadShift> {
    check_len(a.len(), b.len())?;
    check_len(support.len(), clifford.n())?;
    let w = 2 * block_len;
    if !a.len().is_multiple_of(w) {
        return Err(Error::InvalidParameters(format!("pad length {} is not a multiple of {w}", a.len())));
    }
    let blocks = a.len() / w;
    if let Some(&bad) = support.iter().find(|&&i| i >= blocks) {
        return Err(Error::IndexOutOfRange { index: bad, n: blocks });
    }
    let mut c = a.clone();
    let mut d = b.clone();
    let mut phase = 0u8;
    for p in 0..w {
        let x = BitString::from_bools(support.iter().map(|&i| a.get(i * w + p)));
        let z = BitString::from_bools(support.iter().map(|&i| b.get(i * w + p)));
        let image = conjugate_pauli(clifford, &PauliString { x, z, phase: 0 })?;
        for (l, &i) in support.iter().enumerate() {
            c.set(i * w + p, image.x.get(l));
            d.set(i * w + p, image.z.get(l));
        }
        phase = (phase + image.phase) % 4;
    }
    Ok(PadShift { c, d, phase })
}

fn column_index(col: &[TrapState]) -> usize {
    col.iter().rev().fold(0, |acc, t| acc * 3 + t.index())
}

/// All `3^k` trap columns, indexed base 3 with the first entry least significant.
pub fn all_trap_columns(k: usize) -> Vec<Vec<TrapState>> {
    (0..3usize.pow(k as u32))
        .map(|mut idx| {
            (0..k)
                .map(|_| {
                    let t = TrapState::ALL[idx % 3];
                    idx /= 3;
                    t
                })
                .collect()
        })
        .collect()
}

/// Per-term tables: trap-column outcome distributions for all `3^k`
/// columns and the logical action of the transversal `C`.
#[derive(Clone, Debug)]
pub struct TermSampler {
    support: Vec<usize>,
    clifford: CliffordCircuit,
    logical: CliffordCircuit,
    code: SteaneCode,
    trap_probs: Vec<Vec<f64>>,
    trap_dists: Vec<WeightedIndex<f64>>,
}

impl TermSampler {
    pub fn new(term: &LchTerm, code: &SteaneCode) -> Result<Self> {
        let k = term.arity();
        if k == 0 || k > MAX_TERM_ARITY {
            return Err(Error::InvalidParameters(format!("term arity {k} outside 1..={MAX_TERM_ARITY}")));
        }
        let mut trap_probs = Vec::new();
        for col in all_trap_columns(k) {
            let mut s = DenseState::zero(k)?;
            s.apply_circuit(&trap_preparation(&col))?;
            s.apply_circuit(&term.clifford)?;
            let probs: Vec<f64> = s.probabilities().into_iter().map(|p| if p < AMPLITUDE_FLOOR { 0.0 } else { p }).collect();
            trap_probs.push(probs);
        }
        let trap_dists = trap_probs
            .iter()
            .map(|p| WeightedIndex::new(p).expect("nonzero distribution"))
            .collect();
        Ok(TermSampler {
            support: term.support.clone(),
            clifford: term.clifford.clone(),
            logical: code.logical_action(&term.clifford),
            code: code.clone(),
            trap_probs,
            trap_dists,
        })
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn code(&self) -> &SteaneCode {
        &self.code
    }

    /// Outcome distribution of `C|col⟩`, first support block most significant.
    pub fn column_probabilities(&self, col: &[TrapState]) -> &[f64] {
        &self.trap_probs[column_index(col)]
    }

    fn column(&self, key: &EncodingKey, j: usize) -> Vec<TrapState> {
        self.support.iter().map(|&i| key.block_traps(i)[j]).collect()
    }

    /// Born distribution of the logical outcome `v` after the logical action.
    pub fn logical_distribution(&self, psi: &DenseState) -> Result<Vec<f64>> {
        let mut s = psi.clone();
        s.apply_circuit(&self.logical.embed(psi.k(), &self.support)?)?;
        s.marginal(&self.support)
    }

    pub fn logical_sampler(&self, psi: &DenseState) -> Result<WeightedIndex<f64>> {
        WeightedIndex::new(self.logical_distribution(psi)?)
            .map_err(|e| Error::InvalidParameters(format!("logical distribution: {e}")))
    }

    /// Honest measurement string before the pad shift, `w = π(y‖z)` per block.
    pub fn sample_unpadded<R: Rng + ?Sized>(
        &self,
        key: &EncodingKey,
        logical: &WeightedIndex<f64>,
        rng: &mut R,
    ) -> BitString {
        let k = self.k();
        let nn = key.block_len();
        let v = logical.sample(rng);
        let mut ys: Vec<BitString> = (0..k)
            .map(|l| self.code.sample_codeword(v >> (k - 1 - l) & 1 == 1, rng))
            .collect();
        let mut zs: Vec<BitString> = vec![BitString::zeros(nn); k];
        for j in 0..nn {
            let col = self.column(key, j);
            let outcome = self.trap_dists[column_index(&col)].sample(rng);
            for (l, z) in zs.iter_mut().enumerate() {
                z.set(j, outcome >> (k - 1 - l) & 1 == 1);
            }
        }
        let blocks: Vec<BitString> = ys
            .drain(..)
            .zip(zs)
            .map(|(y, z)| key.permute_block(&y.concat_with(&z)))
            .collect();
        BitString::concat(&blocks)
    }

    /// `R_r(t, π, u)` over the support blocks.
    pub fn eval_r(&self, key: &EncodingKey, u: &BitString) -> Result<bool> {
        let nn = key.block_len();
        let w = 2 * nn;
        check_len(self.k() * w, u.len())?;
        let k = self.k();
        let mut any_one = false;
        let mut zs = Vec::with_capacity(k);
        for l in 0..k {
            let (y, z) = key.unpermute_block(&u.slice(l * w, (l + 1) * w));
            match self.code.logical_decode(&y) {
                Ok(bit) => any_one |= bit,
                Err(_) => return Ok(false),
            }
            zs.push(z);
        }
        if !any_one {
            return Ok(false);
        }
        for j in 0..nn {
            let outcome = zs.iter().fold(0usize, |acc, z| (acc << 1) | z.get(j) as usize);
            if self.column_probabilities(&self.column(key, j))[outcome] == 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn pad_shift(&self, key: &EncodingKey) -> Result<PadShift> {
        pad_shift(&self.clifford, &self.support, key.a(), key.b(), key.block_len())
    }

    /// `Q_r = R_r(t, π, u ⊕ c)`.
    pub fn eval_q(&self, key: &EncodingKey, u: &BitString) -> Result<bool> {
        let c = self.pad_shift(key)?.c_on(&self.support, key.block_len());
        check_len(c.len(), u.len())?;
        self.eval_r(key, &(u ^ &c))
    }

    /// One run of the XOR attack: honest `w`, report `w ⊕ mask`, return `R`.
    pub fn xor_attack_run<R: Rng + ?Sized>(
        &self,
        key: &EncodingKey,
        logical: &WeightedIndex<f64>,
        mask: &BitString,
        rng: &mut R,
    ) -> Result<bool> {
        check_len(2 * self.k() * key.block_len(), mask.len())?;
        let w = self.sample_unpadded(key, logical, rng);
        self.eval_r(key, &(&w ^ mask))
    }

    /// Survival of `mask` for one `(π, t)`: every code part lies in `D_N^0`
    /// and every trap column flip stays inside the support of `C|t-column⟩`.
    pub fn mask_survives(&self, key: &EncodingKey, mask: &BitString) -> Result<bool> {
        let nn = key.block_len();
        let w = 2 * nn;
        check_len(self.k() * w, mask.len())?;
        let mut flips = Vec::with_capacity(self.k());
        for l in 0..self.k() {
            let (y, z) = key.unpermute_block(&mask.slice(l * w, (l + 1) * w));
            if self.code.logical_decode(&y) != Ok(false) {
                return Ok(false);
            }
            flips.push(z);
        }
        for j in 0..nn {
            let f = flips.iter().fold(0usize, |acc, z| (acc << 1) | z.get(j) as usize);
            if f == 0 {
                continue;
            }
            let probs = self.column_probabilities(&self.column(key, j));
            let base = probs.iter().position(|&p| p > 0.0).expect("normalized");
            if probs[base ^ f] == 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Outcome of the challenge measurement on the support blocks of `term`.
pub fn sample_challenge<R: Rng + ?Sized>(enc: &EncodedWitness, term: &LchTerm, rng: &mut R) -> Result<BitString> {
    let key = enc.key();
    let code = key.code();
    let nn = key.block_len();
    let w = 2 * nn;
    if let Some(&bad) = term.support.iter().find(|&&i| i >= key.n()) {
        return Err(Error::IndexOutOfRange { index: bad, n: key.n() });
    }
    match enc.form() {
        WitnessForm::Symbolic(psi) => {
            let ts = TermSampler::new(term, &code)?;
            let logical = ts.logical_sampler(psi)?;
            let wstr = ts.sample_unpadded(key, &logical, rng);
            let c = ts.pad_shift(key)?.c_on(&term.support, nn);
            Ok(&wstr ^ &c)
        }
        WitnessForm::Physical(state) => {
            let tuples: Vec<Vec<usize>> = (0..w).map(|p| term.support.iter().map(|&i| i * w + p).collect()).collect();
            let mut s = state.clone();
            s.apply_circuit(&term.clifford.transversal(state.n(), &tuples)?)?;
            let all = s.sample_measurement(rng);
            Ok(BitString::concat(&term.support.iter().map(|&i| all.slice(i * w, (i + 1) * w)).collect::<Vec<_>>()))
        }
    }
}

/// The verifier's measurement for challenge string `r`.
pub fn challenge_outcome<R: Rng + ?Sized>(
    enc: &EncodedWitness,
    inst: &LchInstance,
    r: &BitString,
    rng: &mut R,
) -> Result<ChallengeOutcome> {
    let j = crate::protocol::select_term(r, inst.m())?;
    let term = &inst.terms[j];
    let u = sample_challenge(enc, term, rng)?;
    Ok(ChallengeOutcome { r: r.clone(), j, support: term.support.clone(), u })
}

/// `1 − tr(H_j ρ)`.
pub fn acceptance_probability(inst: &LchInstance, rho: &DenseOperator, j: usize) -> Result<f64> {
    check_len(inst.n, rho.k())?;
    let term = inst.terms.get(j).ok_or(Error::IndexOutOfRange { index: j, n: inst.m() })?;
    Ok(1.0 - term.energy(rho)?)
}

/// `R` on one XOR-attack run with a fresh key.
pub fn xor_attack_run<R: Rng + ?Sized>(
    enc: &EncodedWitness,
    term: &LchTerm,
    mask: &BitString,
    rng: &mut R,
) -> Result<bool> {
    let psi = enc
        .logical()
        .ok_or_else(|| Error::InvalidParameters("xor attack needs the symbolic form".into()))?;
    let ts = TermSampler::new(term, &enc.key().code())?;
    let logical = ts.logical_sampler(psi)?;
    ts.xor_attack_run(enc.key(), &logical, mask, rng)
}

/// `(1 − 3^{−(k+1)})^{K/k}`.
pub fn attack_bound(k: usize, big_k: usize) -> f64 {
    assert!(k >= 1, "arity must be positive");
    (1.0 - 3f64.powi(-(k as i32 + 1))).powf(big_k as f64 / k as f64)
}

/// Product trap string leaving qubit `j` of `C|t⟩` in a standard basis state.
pub fn trap_string(clifford: &CliffordCircuit, j: usize) -> Result<Vec<TrapState>> {
    let k = clifford.n();
    if j >= k {
        return Err(Error::IndexOutOfRange { index: j, n: k });
    }
    let image = conjugate_pauli(&clifford.inverse(), &PauliString::single(k, j, 'Z'))?;
    Ok((0..k)
        .map(|q| match image.op_at(q) {
            'X' => TrapState::Plus,
            'Y' => TrapState::Circ,
            _ => TrapState::Zero,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub v: BitString,
    pub samples: usize,
    pub q_hat: f64,
    pub ci95: f64,
    pub sigma: f64,
    pub bound: Option<f64>,
}

/// XOR attack with mask `v` on `samples` runs, each with a fresh key, against
/// the encoding of `psi` at `code`. `bound` is set when `|v| ≥ K`.
pub fn attack_experiment(
    psi: &DenseState,
    term: &LchTerm,
    code: &SteaneCode,
    v: &BitString,
    samples: usize,
    seed: u64,
) -> Result<AttackReport> {
    let ts = TermSampler::new(term, code)?;
    check_len(2 * ts.k() * code.block_len(), v.len())?;
    let logical = ts.logical_sampler(psi)?;
    let n = psi.k();
    let prop = mc::proportion(samples, seed, |rng| {
        let key = sample_key(n, code, rng);
        ts.xor_attack_run(&key, &logical, v, rng)
    })?;
    let big_k = code.min_distance();
    Ok(AttackReport {
        v: v.clone(),
        samples,
        q_hat: prop.estimate(),
        ci95: prop.ci95(),
        sigma: prop.sigma(),
        bound: (v.weight() >= big_k).then(|| attack_bound(ts.k(), big_k)),
    })
}

/// Monte Carlo `β(v)` over uniform `(π, t)`; requires `1 ≤ |v| < K` except
/// for `v = 0`, where it is `1`.
pub fn estimate_beta(
    v: &BitString,
    term: &LchTerm,
    code: &SteaneCode,
    samples: usize,
    seed: u64,
) -> Result<mc::Proportion> {
    let ts = TermSampler::new(term, code)?;
    check_len(2 * ts.k() * code.block_len(), v.len())?;
    if v.weight() >= code.min_distance() {
        return Err(Error::InvalidParameters("beta is defined for masks lighter than the code distance".into()));
    }
    let n = term.support.iter().max().map_or(1, |&m| m + 1);
    mc::proportion(samples, seed, |rng| {
        let key = sample_key(n, code, rng);
        ts.mask_survives(&key, v)
    })
}
