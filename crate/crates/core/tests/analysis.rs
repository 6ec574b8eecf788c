//! Code projectors, the decoding channel, the rejection bound and the
//! simulator experiments.

mod common;

use common::{perfect_instance, toy_instance, yes_instance};
use lchzk::analysis::{
    compare_real_vs_simulated, histogram, parity_projectors, prepare_rho_r, projectors, soundness_check,
    transcript_feature, tv_distance, xi_adjoint, xi_apply, xi_choi, xi_tensor_decode, SimulatorConfig,
};
use lchzk::encoding::{encode_dense, sample_key, EncodingKey};
use lchzk::lch::{LchInstance, LchTerm};
use lchzk::pauli_clifford::dense::{circuit_unitary, CMatrix};

use lchzk::pauli_clifford::{random_clifford, CliffordCircuit, DenseOperator, DenseState, Ensemble, PauliString};
use lchzk::protocol::{validate_transcript, Adversary, MaskSpec, Verdict};
use lchzk::sampler::{acceptance_probability, attack_bound};
use lchzk::steane::SteaneCode;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state<R: Rng>(k: usize, rng: &mut R) -> DenseState {
    let amps = (0..1 << k).map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
    DenseState::from_unnormalized(amps).unwrap()
}

/// `G G† / tr` for a Gaussian-ish `G`; full rank almost surely.
fn random_density<R: Rng>(k: usize, rng: &mut R) -> DenseOperator {
    let d = 1 << k;
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
    let m = &g * g.adjoint();
    let tr = m.trace();
    DenseOperator::from_matrix(m / tr).unwrap()
}

fn projector_on(bits: &str) -> DenseOperator {
    DenseOperator::basis_projector(&bits.parse().unwrap()).unwrap()
}

fn transversal_one_qubit(c: &CliffordCircuit, nn: usize) -> CliffordCircuit {
    let tuples: Vec<Vec<usize>> = (0..nn).map(|q| vec![q]).collect();
    c.transversal(nn, &tuples).unwrap()
}

#[test]
fn single_qubit_code_projectors_coincide_with_parity_projectors() {
    let p = projectors(1).unwrap();
    assert!(p.pi0.approx_eq(&p.delta0, 0.0));
    assert!(p.pi0.approx_eq(&projector_on("0"), 0.0));
    assert!(p.pi1.approx_eq(&projector_on("1"), 0.0));
}

#[test]
fn steane_projector_ranks_and_ordering() {
    let p = projectors(7).unwrap();
    assert_eq!(p.pi0.rank(1e-9), 8);
    assert_eq!(p.pi1.rank(1e-9), 8);
    assert_eq!(p.delta0.rank(1e-9), 64);
    assert_eq!(p.delta1.rank(1e-9), 64);
    assert!(p.delta0.add(&p.delta1).unwrap().approx_eq(&DenseOperator::identity(7).unwrap(), 0.0));
    for (pi, delta) in [(&p.pi0, &p.delta0), (&p.pi1, &p.delta1)] {
        assert!(pi.is_projection(1e-12) && delta.is_projection(1e-12));
        assert!(delta.sub(pi).unwrap().is_psd(1e-12));
    }
    assert!(projectors(5).is_err());
    assert!(parity_projectors(13).is_err());
}

#[test]
fn xi_one_is_the_identity_channel() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let sigma = random_density(1, &mut rng);
        assert!(xi_apply(&sigma).unwrap().approx_eq(&sigma, 1e-14));
    }
}

#[test]
fn xi_adjoint_sends_basis_projectors_to_parity_projectors() {
    for nn in [1, 3, 5, 7] {
        let (d0, d1) = parity_projectors(nn).unwrap();
        assert!(xi_adjoint(&projector_on("0"), nn).unwrap().approx_eq(&d0, 1e-12), "N = {nn}");
        assert!(xi_adjoint(&projector_on("1"), nn).unwrap().approx_eq(&d1, 1e-12), "N = {nn}");
    }
    assert!(xi_adjoint(&projector_on("00"), 3).is_err());
}

#[test]
fn xi_choi_is_psd_exactly_when_n_is_one_mod_four() {
    for nn in [1, 5] {
        let choi = xi_choi(nn).unwrap();
        assert!(choi.is_hermitian(1e-12));
        assert!(choi.min_eigenvalue() >= -1e-12, "N = {nn}: {}", choi.min_eigenvalue());
        // Choi partial trace over the output is the identity on the input
        let input: Vec<usize> = (0..nn).collect();
        assert!(choi.partial_trace(&input).unwrap().approx_eq(&DenseOperator::identity(nn).unwrap(), 1e-12));
    }
    for nn in [3, 7] {
        // Y^{⊗N} picks up a sign relative to the logical Y when N ≡ 3 mod 4
        assert!(xi_choi(nn).unwrap().min_eigenvalue() < -0.1, "N = {nn}");
    }
}

#[test]
fn xi_preserves_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for nn in [1, 5] {
        for _ in 0..100 {
            let sigma = random_density(nn, &mut rng);
            let tr = xi_apply(&sigma).unwrap().trace();
            assert!((tr - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn xi_adjoint_is_the_hilbert_schmidt_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for nn in [1, 3, 5] {
        for _ in 0..20 {
            let sigma = random_density(nn, &mut rng);
            let tau = random_density(1, &mut rng);
            let lhs = tau.pair(&xi_apply(&sigma).unwrap()).unwrap();
            let rhs = xi_adjoint(&tau, nn).unwrap().pair(&sigma).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}

#[test]
fn xi_commutes_with_transversal_cliffords_at_five() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let c = random_clifford(1, &mut rng);
        let sigma = random_density(5, &mut rng);
        let big = circuit_unitary(&transversal_one_qubit(&c, 5)).unwrap();
        let small = circuit_unitary(&c).unwrap();
        let lhs = xi_apply(&sigma.conjugate_by(&big).unwrap()).unwrap();
        let rhs = xi_apply(&sigma).unwrap().conjugate_by(&small).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-10), "C = {c:?}");
    }
}

#[test]
fn tensor_decode_on_one_block_matches_xi_apply() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_state(5, &mut rng);
    let b = random_state(5, &mut rng);
    let ens = Ensemble::new(5, vec![(0.25, a.clone()), (0.75, b.clone())]).unwrap();
    let rho = a.to_operator().scale(0.25).add(&b.to_operator().scale(0.75)).unwrap();
    let all: Vec<usize> = (0..5).collect();
    assert!(xi_tensor_decode(&ens, &[all]).unwrap().approx_eq(&xi_apply(&rho).unwrap(), 1e-12));
}

fn code1() -> SteaneCode {
    SteaneCode::new(1).unwrap()
}

fn one_qubit_instance(c: CliffordCircuit) -> LchInstance {
    LchInstance::new(1, 1, vec![LchTerm::new(vec![0], c).unwrap()], 4, 2).unwrap()
}

#[test]
fn honest_encodings_meet_the_bound_with_equality() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let inst = one_qubit_instance(random_clifford(1, &mut rng));
        let logical = random_state(1, &mut rng);
        let key = sample_key(1, &code1(), &mut rng);
        let xi = Ensemble::pure(encode_dense(&logical, &key).unwrap());
        let rep = soundness_check(&inst, &xi, &key.opening(), 7, 0).unwrap();
        assert!((rep.reject_prob - rep.lower_bound).abs() < 1e-9, "{rep:?}");
        // the level-one logical action is the conjugate, so the energy is of conj(ρ)
        let energy = inst.terms[0].energy(&logical.conj().to_operator()).unwrap();
        assert!((rep.lower_bound - energy).abs() < 1e-9);
    }
    // ground state of |0⟩⟨0| is |1⟩: nothing to reject
    let inst = one_qubit_instance(CliffordCircuit::new(1));
    let key = sample_key(1, &code1(), &mut rng);
    let one = DenseState::from_bits(&"1".parse().unwrap()).unwrap();
    let rep = soundness_check(&inst, &Ensemble::pure(encode_dense(&one, &key).unwrap()), &key.opening(), 7, 0).unwrap();
    assert!(rep.reject_prob.abs() < 1e-9 && rep.lower_bound.abs() < 1e-9);
}

#[test]
fn honest_zero_is_always_rejected_by_the_zero_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let inst = one_qubit_instance(CliffordCircuit::new(1));
    let zero = DenseState::from_bits(&"0".parse().unwrap()).unwrap();
    for _ in 0..5 {
        let key = sample_key(1, &code1(), &mut rng);
        let xi = Ensemble::pure(encode_dense(&zero, &key).unwrap());
        let rep = soundness_check(&inst, &xi, &key.opening(), 7, 0).unwrap();
        assert!((rep.lower_bound - 1.0).abs() < 1e-12);
        assert!((rep.reject_prob - 1.0).abs() < 1e-12);
    }
}

fn mixture(items: Vec<(f64, DenseState)>) -> Ensemble {
    let total: f64 = items.iter().map(|(w, _)| w).sum();
    Ensemble::new(14, items.into_iter().map(|(w, s)| (w / total, s)).collect()).unwrap()
}

/// Adversarial 14-qubit states of several shapes, all built against `key`.
fn adversarial_state<R: Rng>(kind: usize, key: &EncodingKey, rng: &mut R) -> Ensemble {
    match kind {
        // generic mixed state
        0 => mixture((0..3).map(|_| (rng.gen::<f64>() + 0.1, random_state(14, rng))).collect()),
        // honest encoding hit by random Pauli errors
        1 => {
            let items = (0..3)
                .map(|_| {
                    let mut s = encode_dense(&random_state(1, rng), key).unwrap();
                    for _ in 0..rng.gen_range(1..=3) {
                        let q = rng.gen_range(0..14);
                        s.apply_pauli(&PauliString::single(14, q, ['X', 'Y', 'Z'][rng.gen_range(0..3)])).unwrap();
                    }
                    (rng.gen::<f64>() + 0.1, s)
                })
                .collect();
            mixture(items)
        }
        // honest encoding under an unrelated key
        2 => {
            let other = sample_key(1, &code1(), rng);
            Ensemble::pure(encode_dense(&random_state(1, rng), &other).unwrap())
        }
        // honest encoding with a random Clifford on the trap half applied
        _ => {
            let mut s = encode_dense(&random_state(1, rng), key).unwrap();
            let c = random_clifford(3, rng);
            let mut qs: Vec<usize> = (0..14).collect();
            rand::seq::SliceRandom::shuffle(qs.as_mut_slice(), rng);
            s.apply_circuit(&c.embed(14, &qs[..3]).unwrap()).unwrap();
            Ensemble::pure(s)
        }
    }
}

#[test]
fn rejection_dominates_decoded_energy_on_random_adversaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = f64::INFINITY;
    for trial in 0..120 {
        let inst = one_qubit_instance(random_clifford(1, &mut rng));
        let key = sample_key(1, &code1(), &mut rng);
        let xi = adversarial_state(trial % 4, &key, &mut rng);
        let rep = soundness_check(&inst, &xi, &key.opening(), 7, 0).unwrap();
        assert!((0.0..=1.0 + 1e-12).contains(&rep.reject_prob));
        assert!(rep.holds(1e-9), "trial {trial}: {rep:?}");
        worst = worst.min(rep.reject_prob - rep.lower_bound);
    }
    assert!(worst > -1e-9);
}

#[test]
fn soundness_check_validates_shapes() {
    let inst = one_qubit_instance(CliffordCircuit::new(1));
    let key = EncodingKey::trivial(1, &code1());
    let xi = Ensemble::pure(DenseState::zero(14).unwrap());
    assert!(soundness_check(&inst, &xi, &key.opening(), 7, 1).is_err());
    assert!(soundness_check(&inst, &xi, &key.opening(), 5, 0).is_err());
    assert!(soundness_check(&inst, &Ensemble::pure(DenseState::zero(12).unwrap()), &key.opening(), 7, 0).is_err());
}

#[test]
fn rho_r_passes_its_own_term() {
    let inst = toy_instance();
    let rho = prepare_rho_r(&inst, 0).unwrap();
    assert!(rho.approx_eq(&DenseState::from_bits(&"1".parse().unwrap()).unwrap(), 1e-15));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..50 {
        let k = rng.gen_range(1..=3);
        let n = 4;
        let mut support: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(support.as_mut_slice(), &mut rng);
        support.truncate(k);
        let term = LchTerm::new(support, random_clifford(k, &mut rng)).unwrap();
        let inst = LchInstance::new(n, k, vec![term], 4, 2).unwrap();
        let rho = prepare_rho_r(&inst, 0).unwrap().to_operator();
        assert!(inst.terms[0].energy(&rho).unwrap().abs() < 1e-12);
        assert!((acceptance_probability(&inst, &rho, 0).unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn rho_r_can_fail_another_term() {
    let inst = toy_instance();
    let rho = prepare_rho_r(&inst, 0).unwrap().to_operator();
    // |1⟩ against |+⟩⟨+|
    assert!((acceptance_probability(&inst, &rho, 1).unwrap() - 0.5).abs() < 1e-12);
    assert!(prepare_rho_r(&inst, 2).is_err());
}

fn sim_cfg(instance: LchInstance, adversary: Adversary, samples: usize, t_level: u32) -> SimulatorConfig {
    SimulatorConfig { instance, adversary, samples, t_level }
}

#[test]
fn simulated_honest_sessions_always_accept_and_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for inst in [yes_instance().0, perfect_instance().0, toy_instance()] {
        for t in [1, 2] {
            let cfg = sim_cfg(inst.clone(), Adversary::Honest, 0, t);
            for _ in 0..50 {
                let tr = lchzk::analysis::zk_simulate(&cfg, &mut rng).unwrap();
                validate_transcript(&tr).unwrap();
                assert_eq!(tr.verdict(), Some(Verdict::Accept));
            }
        }
    }
}

#[test]
fn simulated_heavy_xor_respects_the_attack_bound() {
    let inst = one_qubit_instance(CliffordCircuit::new(1));
    let cfg = sim_cfg(inst, Adversary::Xor(MaskSpec::Weight(3)), 0, 1);
    let samples = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let passed = (0..samples)
        .filter(|_| lchzk::analysis::zk_simulate(&cfg, &mut rng).unwrap().messages.iter().any(|m| {
            matches!(m.body, lchzk::protocol::Body::Npzk { .. })
        }))
        .count();
    let q = passed as f64 / samples as f64;
    let sigma = (q * (1.0 - q) / samples as f64).sqrt();
    assert!(q <= attack_bound(1, 3) + 3.0 * sigma, "q = {q}");
}

#[test]
fn transcript_features_and_tv() {
    let (inst, w) = perfect_instance();
    let tr = lchzk::protocol::run_protocol(
        &inst,
        Some(&w),
        &Adversary::Honest,
        &lchzk::protocol::ProtocolConfig { t_level: 1, backend: lchzk::protocol::Backend::Hash, direct_challenge: false },
        &mut ChaCha8Rng::seed_from_u64(12),
    )
    .unwrap();
    let f = transcript_feature(&tr);
    let (r, _) = tr.challenge().unwrap();
    assert_eq!(f, format!("{r}|accept"));
    let h = histogram(["a".to_string(), "a".to_string(), "b".to_string(), "c".to_string()]);
    let g = histogram(["a".to_string(), "b".to_string()]);
    assert!((tv_distance(&h, &g) - 0.25).abs() < 1e-15);
    assert_eq!(tv_distance(&h, &Default::default()), 1.0);
}

#[test]
fn real_and_simulated_agree_for_a_perfect_witness() {
    let (inst, w) = perfect_instance();
    for t in [1, 2] {
        let rep = compare_real_vs_simulated(&w, &sim_cfg(inst.clone(), Adversary::Honest, 10_000, t), 13).unwrap();
        assert!(rep.tv <= 0.02, "t = {t}: {rep:?}");
        assert!(rep.real.keys().all(|k| k.ends_with("|accept")));
        assert_eq!(rep.real.values().sum::<usize>(), 10_000);
    }
    let weak = compare_real_vs_simulated(&w, &sim_cfg(inst, "xor:w1".parse().unwrap(), 10_000, 2), 14).unwrap();
    assert!(weak.tv <= 0.03, "{weak:?}");
}

#[test]
fn real_and_simulated_separate_when_the_witness_fails_half_the_time() {
    let inst = one_qubit_instance(CliffordCircuit::new(1));
    let plus = lchzk::encoding::plus_state();
    let rep = compare_real_vs_simulated(&plus, &sim_cfg(inst, Adversary::Honest, 10_000, 2), 15).unwrap();
    assert!(rep.tv >= 0.2, "{rep:?}");
    assert!((0.0..=1.0).contains(&rep.tv));
}

#[test]
fn distribution_report_round_trips_through_json() {
    let (inst, w) = perfect_instance();
    let rep = compare_real_vs_simulated(&w, &sim_cfg(inst, Adversary::Honest, 200, 1), 16).unwrap();
    let text = serde_json::to_string(&rep).unwrap();
    assert_eq!(serde_json::from_str::<lchzk::analysis::DistributionReport>(&text).unwrap(), rep);
}
