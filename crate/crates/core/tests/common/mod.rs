//! Instances shared by the integration suites.
#![allow(dead_code)]

use std::collections::HashMap;

use lchzk::bits::BitString;
use lchzk::encoding::{encode_physical, EncodingKey};
use lchzk::lch::{compile, history_state, LchInstance, LchTerm, VGate, VerificationCircuit};
use lchzk::pauli_clifford::{CliffordCircuit, DenseState, StabilizerState};
use lchzk::sampler::TermSampler;

/// Three terms on two qubits with a witness that passes all of them:
/// `|0⟩⟨0|` on qubit 0, `|00⟩⟨00|` on both, `|+⟩⟨+|` on qubit 1; witness
/// `|1⟩|−⟩`.
pub fn perfect_instance() -> (LchInstance, DenseState) {
    let terms = vec![
        LchTerm::new(vec![0], CliffordCircuit::new(1)).unwrap(),
        LchTerm::new(vec![0, 1], CliffordCircuit::new(2)).unwrap(),
        LchTerm::new(vec![1], CliffordCircuit::new(1).h(0)).unwrap(),
    ];
    let inst = LchInstance::new(2, 2, terms, 4, 2).unwrap();
    let mut w = DenseState::from_bits(&"11".parse().unwrap()).unwrap();
    w.apply_circuit(&CliffordCircuit::new(2).h(1)).unwrap();
    (inst, w)
}

/// `|0⟩⟨0|` and `|+⟩⟨+|` on one qubit; no state passes both.
pub fn toy_instance() -> LchInstance {
    let terms = vec![
        LchTerm::new(vec![0], CliffordCircuit::new(1)).unwrap(),
        LchTerm::new(vec![0], CliffordCircuit::new(1).h(0)).unwrap(),
    ];
    LchInstance::new(1, 1, terms, 4, 2).unwrap()
}

/// Compiled always-accepting two-qubit circuit and its history state.
pub fn yes_instance() -> (LchInstance, DenseState) {
    let v = VerificationCircuit::new(1, 1, 0, vec![VGate::HH(0, 1), VGate::HH(0, 1)]).unwrap();
    let inst = compile(&v, 10).unwrap();
    let w = history_state(&v, &DenseState::from_bits(&"1".parse().unwrap()).unwrap()).unwrap();
    (inst, w)
}

/// The six one-qubit stabilizer states as preparation circuits.
pub fn stabilizer_preps() -> Vec<CliffordCircuit> {
    let c = || CliffordCircuit::new(1);
    vec![c(), c().x(0), c().h(0), c().x(0).h(0), c().h(0).p(0), c().h(0).p_dag(0)]
}

/// Exact outcome distribution of the transversally rotated physical state,
/// read off the stabilizer support of the tableau.
pub fn physical_distribution(logical: &CliffordCircuit, key: &EncodingKey, term: &LchTerm) -> HashMap<BitString, f64> {
    let s0 = StabilizerState::from_circuit(logical);
    let mut s = encode_physical(&s0, key).unwrap();
    let w = 2 * key.block_len();
    let tuples: Vec<Vec<usize>> = (0..w).map(|p| term.support.iter().map(|&i| i * w + p).collect()).collect();
    s.apply_circuit(&term.clifford.transversal(s.n(), &tuples).unwrap()).unwrap();
    let (offset, basis) = s.support();
    let p = 0.5f64.powi(basis.len() as i32);
    let mut out = HashMap::new();
    for m in 0..1u64 << basis.len() {
        let mut x = offset.clone();
        for (l, b) in basis.iter().enumerate() {
            if m >> l & 1 == 1 {
                x ^= b;
            }
        }
        let u = BitString::concat(&term.support.iter().map(|&i| x.slice(i * w, (i + 1) * w)).collect::<Vec<_>>());
        *out.entry(u).or_insert(0.0) += p;
    }
    out
}

/// Exact distribution of the symbolic factorization for `k = 1`: logical
/// outcome, uniform codeword, independent trap columns, permutation, shift.
pub fn symbolic_distribution(psi: &DenseState, key: &EncodingKey, term: &LchTerm) -> HashMap<BitString, f64> {
    let ts = TermSampler::new(term, &key.code()).unwrap();
    let nn = key.block_len();
    let pv = ts.logical_distribution(psi).unwrap();
    let c = ts.pad_shift(key).unwrap().c_on(&term.support, nn);
    let cols: Vec<&[f64]> = (0..nn).map(|j| ts.column_probabilities(&[key.traps()[j]])).collect();
    let mut out = HashMap::new();
    for (v, &p) in pv.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let words = key.code().codewords(v == 1).unwrap();
        for y in &words {
            for zi in 0..1u64 << nn {
                let z = BitString::from_uint(zi, nn);
                let pz: f64 = (0..nn).map(|j| cols[j][z.get(j) as usize]).product();
                if pz == 0.0 {
                    continue;
                }
                let u = &key.permute_block(&y.concat_with(&z)) ^ &c;
                *out.entry(u).or_insert(0.0) += p * pz / words.len() as f64;
            }
        }
    }
    out
}
