//! Encoding checked against tableau and dense oracles built in the test.

use lchzk::bits::BitString;
use lchzk::encoding::{
    encode_dense, encode_physical, encode_symbolic, plus_state, qotp_twirl_check, sample_key, soundness_decode,
    trap_string_from_text, trap_string_to_text, EncodedWitness, EncodingKey, TrapState, SALT_LEN,
};
use lchzk::lch::{history_state, VGate, VerificationCircuit};
use lchzk::pauli_clifford::dense::pauli_matrix;
use lchzk::pauli_clifford::{DenseOperator, DenseState, Ensemble, PauliString, StabilizerState};
use lchzk::steane::{SteaneCode, D7_0};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn code1() -> SteaneCode {
    SteaneCode::new(1).unwrap()
}

/// Physical-to-layout order: qubit `i·2N + j` of the result is physical
/// qubit `i·2N + perm[j]`.
fn unpermute_order(key: &EncodingKey) -> Vec<usize> {
    let w = 2 * key.block_len();
    (0..key.n() * w).map(|q| (q / w) * w + key.perm()[q % w]).collect()
}

fn pad(key: &EncodingKey) -> PauliString {
    PauliString::new(key.a().clone(), key.b().clone(), 0).unwrap()
}

#[test]
fn trivial_key_gives_code_state_then_zero_traps() {
    let code = code1();
    let key = EncodingKey::trivial(1, &code);
    let got = encode_physical(&StabilizerState::zero(1), &key).unwrap();
    let want = StabilizerState::from_circuit(&code.encoder_circuit()).tensor(&StabilizerState::zero(7));
    assert!(got.same_state(&want));
}

#[test]
fn trivial_key_measurement_is_codeword_and_zero_traps() {
    let code = code1();
    let key = EncodingKey::trivial(1, &code);
    let s = encode_physical(&StabilizerState::zero(1), &key).unwrap();
    let d0: Vec<BitString> = D7_0.iter().map(|w| w.parse().unwrap()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let m = s.sample_measurement(&mut rng);
        assert!(d0.contains(&m.slice(0, 7)), "{m}");
        assert!(m.slice(7, 14).is_zero());
    }
}

#[test]
fn unpadding_and_unpermuting_recovers_trivial_key_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for t in [1, 2] {
        let code = SteaneCode::new(t).unwrap();
        for n in [1, 2] {
            for _ in 0..3 {
                let key = sample_key(n, &code, &mut rng);
                let bits = BitString::from_bools((0..n).map(|_| rng.gen::<bool>()));
                let logical = StabilizerState::from_bits(&bits);
                let mut s = encode_physical(&logical, &key).unwrap();
                s.apply_pauli(&pad(&key)).unwrap();
                let s = s.reorder(&unpermute_order(&key)).unwrap();
                let plain = EncodingKey::trivial(n, &code).with_traps(key.traps().to_vec()).unwrap();
                assert!(s.same_state(&encode_physical(&logical, &plain).unwrap()));
            }
        }
    }
}

#[test]
fn trivial_key_with_all_zero_traps_matches_transversal_layout() {
    // two blocks: each is U_N|b_i⟩|0^{N−1}⟩ ⊗ |0^N⟩
    let code = code1();
    let key = EncodingKey::trivial(2, &code);
    let got = encode_physical(&StabilizerState::from_bits(&"10".parse().unwrap()), &key).unwrap();
    let mut one = StabilizerState::from_bits(&"1000000".parse().unwrap());
    one.apply_circuit(&code.encoder_circuit()).unwrap();
    let zero = StabilizerState::from_circuit(&code.encoder_circuit());
    let traps = StabilizerState::zero(7);
    let want = one.tensor(&traps).tensor(&zero).tensor(&traps);
    assert!(got.same_state(&want));
}

#[test]
fn trap_qubits_hold_their_prescribed_states() {
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let random = sample_key(2, &code, &mut rng);
        let w = 14;
        let key = EncodingKey::new(
            2,
            &code,
            random.traps().to_vec(),
            random.perm().to_vec(),
            BitString::zeros(2 * w),
            BitString::zeros(2 * w),
            vec![0; SALT_LEN],
        )
        .unwrap();
        let s = encode_physical(&StabilizerState::from_bits(&"01".parse().unwrap()), &key).unwrap();
        for i in 0..2 {
            for (j, t) in key.block_traps(i).iter().enumerate() {
                let q = i * w + key.perm()[7 + j];
                let (op, sign) = match t {
                    TrapState::Zero => ('Z', 1),
                    TrapState::Plus => ('X', 1),
                    TrapState::Circ => ('Y', -1),
                };
                assert_eq!(s.expectation(&PauliString::single(2 * w, q, op)).unwrap(), sign, "{t:?}");
            }
        }
    }
}

#[test]
fn circ_trap_is_minus_i_superposition() {
    let mut s = DenseState::zero(1).unwrap();
    s.apply_circuit(&TrapState::Circ.prepare(lchzk::pauli_clifford::CliffordCircuit::new(1), 0)).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let want = DenseState::from_amplitudes(vec![Complex64::new(r, 0.0), Complex64::new(0.0, -r)]).unwrap();
    assert!(s.approx_eq(&want, 1e-15));
}

#[test]
fn trap_text_round_trip() {
    let t = trap_string_from_text("0+r0").unwrap();
    assert_eq!(t, vec![TrapState::Zero, TrapState::Plus, TrapState::Circ, TrapState::Zero]);
    assert_eq!(trap_string_to_text(&t), "0+r0");
    assert!(trap_string_from_text("0x").is_err());
}

#[test]
fn fixed_seed_reproduces_key() {
    let code = SteaneCode::new(2).unwrap();
    let a = sample_key(3, &code, &mut ChaCha8Rng::seed_from_u64(99));
    let b = sample_key(3, &code, &mut ChaCha8Rng::seed_from_u64(99));
    assert_eq!(a, b);
    assert_eq!(a.traps().len(), 3 * 49);
    assert_eq!(a.perm().len(), 98);
    assert_eq!(a.a().len(), 3 * 98);
    assert_eq!(a.salt().len(), SALT_LEN);
}

#[test]
fn trap_symbol_marginals_are_uniform() {
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let draws = 10_000;
    let mut counts = [[0usize; 3]; 7];
    for _ in 0..draws {
        let key = sample_key(1, &code, &mut rng);
        for (j, t) in key.traps().iter().enumerate() {
            counts[j][t.index()] += 1;
        }
    }
    for row in counts {
        for c in row {
            assert!((c as f64 / draws as f64 - 1.0 / 3.0).abs() < 0.02, "{row:?}");
        }
    }
}

#[test]
fn permutation_composed_with_inverse_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let key = sample_key(1, &SteaneCode::new(2).unwrap(), &mut rng);
    let inv = key.inverse_perm();
    assert!((0..98).all(|j| inv[key.perm()[j]] == j && key.perm()[inv[j]] == j));
    let s = BitString::from_bools((0..98).map(|_| rng.gen::<bool>()));
    let (y, z) = key.unpermute_block(&key.permute_block(&s));
    assert_eq!(y.concat_with(&z), s);
}

#[test]
fn one_permutation_serves_every_block() {
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let key = sample_key(3, &code, &mut rng);
    let bits: BitString = "101".parse().unwrap();
    let mut s = encode_physical(&StabilizerState::from_bits(&bits), &key).unwrap();
    s.apply_pauli(&pad(&key)).unwrap();
    for i in 0..3 {
        for j in 7..14 {
            let q = i * 14 + key.perm()[j];
            // each block's trap positions under the shared permutation
            let t = key.block_traps(i)[j - 7];
            let op = match t {
                TrapState::Zero => 'Z',
                TrapState::Plus => 'X',
                TrapState::Circ => 'Y',
            };
            assert_ne!(s.expectation(&PauliString::single(42, q, op)).unwrap(), 0);
        }
    }
}

#[test]
fn symbolic_witness_round_trips_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let v = VerificationCircuit::new(1, 1, 0, vec![VGate::HH(0, 1), VGate::ControlledPhase(0, 1)]).unwrap();
    let hist = history_state(&v, &plus_state()).unwrap();
    let key = sample_key(hist.k(), &SteaneCode::new(2).unwrap(), &mut rng);
    let enc = encode_symbolic(hist.clone(), key.clone()).unwrap();
    let js = serde_json::to_string(&enc).unwrap();
    let back: EncodedWitness = serde_json::from_str(&js).unwrap();
    assert_eq!(back.key(), &key);
    assert!(back.logical().unwrap().approx_eq(&hist, 1e-15));
    assert!(encode_symbolic(plus_state(), key).is_err());
}

#[test]
fn key_json_uses_trap_alphabet_and_bit_strings() {
    let key = sample_key(1, &code1(), &mut ChaCha8Rng::seed_from_u64(6));
    let js = serde_json::to_value(&key).unwrap();
    let traps = js["traps"].as_str().unwrap();
    assert_eq!(traps.len(), 7);
    assert!(traps.chars().all(|c| "0+r".contains(c)));
    assert!(js["perm"].as_array().unwrap().len() == 14);
    assert!(js["a"].as_str().unwrap().chars().all(|c| c == '0' || c == '1'));
    let back: EncodingKey = serde_json::from_value(js).unwrap();
    assert_eq!(back, key);
}

#[test]
fn symbolic_and_dense_encodings_agree_with_tableau() {
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let key = sample_key(1, &code, &mut rng);
        let bit = rng.gen::<bool>();
        let dense = encode_dense(&DenseState::from_bits(&BitString::from_bools([bit])).unwrap(), &key).unwrap();
        let tab = encode_physical(&StabilizerState::from_bits(&BitString::from_bools([bit])), &key).unwrap();
        assert!(dense.approx_eq_up_to_phase(&tab.to_dense().unwrap(), 1e-12));
    }
}

#[test]
fn dense_encoding_respects_cap() {
    let key = EncodingKey::trivial(2, &code1());
    assert!(encode_dense(&DenseState::zero(2).unwrap(), &key).is_err());
}

#[test]
fn honest_encoding_decodes_to_logical_state() {
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let one = DenseState::from_bits(&"1".parse().unwrap()).unwrap();
    for _ in 0..3 {
        let key = sample_key(1, &code, &mut rng);
        let xi = Ensemble::pure(encode_dense(&one, &key).unwrap());
        let rho = soundness_decode(&xi, &key.opening(), 1, 7).unwrap();
        assert!(rho.approx_eq(&one.to_operator(), 1e-9));
        let plus = plus_state();
        let rho = soundness_decode(&Ensemble::pure(encode_dense(&plus, &key).unwrap()), &key.opening(), 1, 7).unwrap();
        assert!(rho.approx_eq(&plus.to_operator(), 1e-9));
    }
}

#[test]
fn level_one_decode_of_honest_encoding_is_the_transpose() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let y_plus = DenseState::from_amplitudes(vec![Complex64::new(r, 0.0), Complex64::new(0.0, r)]).unwrap();
    let key = sample_key(1, &code1(), &mut ChaCha8Rng::seed_from_u64(1));
    let rho = soundness_decode(&Ensemble::pure(encode_dense(&y_plus, &key).unwrap()), &key.opening(), 1, 7).unwrap();
    assert!(rho.approx_eq(&y_plus.conj().to_operator(), 1e-9));
}

#[test]
fn code_marginal_maximally_mixed_decodes_to_maximally_mixed() {
    // uniform over all code patterns with traps fixed
    let key = sample_key(1, &code1(), &mut ChaCha8Rng::seed_from_u64(12));
    let items: Vec<(f64, DenseState)> = (0..128u64)
        .map(|x| {
            let layout = BitString::from_uint(x, 7).concat_with(&BitString::zeros(7));
            let mut phys = key.permute_block(&layout);
            phys ^= key.a();
            (1.0 / 128.0, DenseState::from_bits(&phys).unwrap())
        })
        .collect();
    let xi = Ensemble::new(14, items).unwrap();
    let rho = soundness_decode(&xi, &key.opening(), 1, 7).unwrap();
    assert!(rho.approx_eq(&DenseOperator::maximally_mixed(1).unwrap(), 1e-12));
}

fn random_state<R: Rng>(k: usize, rng: &mut R) -> DenseState {
    let amps = (0..1 << k).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    DenseState::from_unnormalized(amps).unwrap()
}

#[test]
fn decoded_states_have_unit_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let key = sample_key(1, &code1(), &mut rng);
    for _ in 0..5 {
        let xi = Ensemble::new(14, vec![(0.3, random_state(14, &mut rng)), (0.7, random_state(14, &mut rng))]).unwrap();
        let rho = soundness_decode(&xi, &key.opening(), 1, 7).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12 && rho.trace().im.abs() < 1e-12);
        assert!(rho.is_hermitian(1e-12));
    }
}

#[test]
fn one_time_pad_twirl_examples() {
    let half = DenseOperator::maximally_mixed(1).unwrap();
    let zero = DenseState::zero(1).unwrap().to_operator();
    for rho in [zero, plus_state().to_operator(), half.clone()] {
        assert!(qotp_twirl_check(&rho).unwrap().approx_eq(&half, 1e-15));
    }
}

/// `2^{−|S|} Σ_P ⟨P⟩ P` over all Paulis on `qubits`.
fn reduced_from_expectations(expect: impl Fn(&PauliString) -> f64, n: usize, qubits: &[usize]) -> DenseOperator {
    let k = qubits.len();
    let mut acc = DenseOperator::zeros(k).unwrap().into_matrix();
    for word in 0..4usize.pow(k as u32) {
        let mut full = PauliString::identity(n);
        let mut local = String::new();
        for (l, &q) in qubits.iter().enumerate() {
            let op = ['I', 'X', 'Y', 'Z'][(word >> (2 * l)) & 3];
            local.push(op);
            if op != 'I' {
                full = full.multiply(&PauliString::single(n, q, op)).unwrap();
            }
        }
        let e = expect(&full);
        if e != 0.0 {
            acc += pauli_matrix(&PauliString::from_label(&local).unwrap()).unwrap() * Complex64::new(e, 0.0);
        }
    }
    DenseOperator::from_matrix(acc * Complex64::new(1.0 / (1 << k) as f64, 0.0)).unwrap()
}

#[test]
fn pad_flips_pauli_expectations_by_a_character() {
    // ⟨P⟩ after X^a Z^b is (−1)^{a·z + b·x}⟨P⟩, so the full-pad average of
    // every non-identity expectation vanishes
    let code = code1();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..20 {
        let key = sample_key(1, &code, &mut rng);
        let bare = EncodingKey::trivial(1, &code).with_traps(key.traps().to_vec()).unwrap();
        let bare = bare.with_opening(lchzk::encoding::KeyOpening {
            perm: key.perm().to_vec(),
            a: BitString::zeros(14),
            b: BitString::zeros(14),
        }).unwrap();
        let logical = StabilizerState::from_bits(&BitString::from_bools([rng.gen::<bool>()]));
        let padded = encode_physical(&logical, &key).unwrap();
        let unpadded = encode_physical(&logical, &bare).unwrap();
        for _ in 0..50 {
            let x = BitString::from_bools((0..14).map(|_| rng.gen::<bool>()));
            let z = BitString::from_bools((0..14).map(|_| rng.gen::<bool>()));
            let y_count = x.iter().zip(z.iter()).filter(|(a, b)| *a && *b).count();
            let p = PauliString::new(x.clone(), z.clone(), (y_count % 4) as u8).unwrap();
            let sign = if key.a().dot(&z) ^ key.b().dot(&x) { -1 } else { 1 };
            assert_eq!(padded.expectation(&p).unwrap(), sign * unpadded.expectation(&p).unwrap());
        }
    }
}

#[test]
fn random_keys_conceal_the_logical_bit_on_small_marginals() {
    let code = code1();
    let keys = 1000;
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut encs = [Vec::new(), Vec::new()];
    for _ in 0..keys {
        let key = sample_key(1, &code, &mut rng);
        for (bit, list) in encs.iter_mut().enumerate() {
            list.push(encode_physical(&StabilizerState::from_bits(&BitString::from_bools([bit == 1])), &key).unwrap());
        }
    }
    let avg = |list: &Vec<StabilizerState>, p: &PauliString| {
        list.iter().map(|s| s.expectation(p).unwrap() as f64).sum::<f64>() / list.len() as f64
    };
    let mut worst: f64 = 0.0;
    for a in 0..14 {
        for b in a..14 {
            let qubits: Vec<usize> = if a == b { vec![a] } else { vec![a, b] };
            let r0 = reduced_from_expectations(|p| avg(&encs[0], p), 14, &qubits);
            let r1 = reduced_from_expectations(|p| avg(&encs[1], p), 14, &qubits);
            worst = worst.max(r0.trace_distance(&r1).unwrap());
        }
    }
    assert!(worst < 0.1, "largest marginal trace distance {worst}");
}
