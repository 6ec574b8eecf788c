//! Prover and verifier state machines, adversaries and the session driver.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample as sample_positions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bits::BitString;
use crate::encoding::{encode_symbolic, sample_key, EncodedWitness, EncodingKey, KeyOpening};
use crate::error::{check_len, Error, Result};
use crate::lch::{LchInstance, LchTerm};
use crate::pauli_clifford::DenseState;
use crate::protocol::coinflip::{verify_reveal, CoinProver};
use crate::protocol::commitment::{Backend, Commitment, CommitmentScheme};
use crate::protocol::messages::{Body, Message, Role, Transcript, Verdict};
use crate::protocol::npzk::{simulate_npzk, IdealNpzk, NpzkBackend, NpzkProof, NpzkStatement};
use crate::protocol::predicates::{challenge_len, select_term};
use crate::protocol::transport::{MemoryTransport, Transport};
use crate::sampler::{sample_challenge, TermSampler};
use crate::steane::SteaneCode;

/// Exact mode enumerates every challenge string; this caps `⌈log₂ m⌉`.
pub const MAX_EXACT_CHALLENGE_BITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaskSpec {
    /// Explicit mask of length `2kN`.
    Bits(BitString),
    /// Fresh uniformly placed mask of this weight on every run.
    Weight(usize),
}

/// Cheating-verifier family.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Adversary {
    #[default]
    Honest,
    /// Measure honestly and report `u ⊕ v`.
    Xor(MaskSpec),
    /// Measure with the given term instead of the challenged one.
    WrongTerm(usize),
}

impl fmt::Display for Adversary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Adversary::Honest => write!(f, "honest"),
            Adversary::Xor(MaskSpec::Bits(b)) => write!(f, "xor:{b}"),
            Adversary::Xor(MaskSpec::Weight(w)) => write!(f, "xor:w{w}"),
            Adversary::WrongTerm(j) => write!(f, "wrong-term:{j}"),
        }
    }
}

impl FromStr for Adversary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("adversary {s:?}: expected honest, xor:<bits>, xor:w<weight> or wrong-term:<j>"));
        if s == "honest" {
            return Ok(Adversary::Honest);
        }
        if let Some(rest) = s.strip_prefix("xor:") {
            if let Some(w) = rest.strip_prefix('w') {
                return w.parse().map(|w| Adversary::Xor(MaskSpec::Weight(w))).map_err(|_| bad());
            }
            if rest.is_empty() {
                return Err(bad());
            }
            return rest.parse().map(|b| Adversary::Xor(MaskSpec::Bits(b))).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix("wrong-term:") {
            return rest.parse().map(Adversary::WrongTerm).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl Serialize for Adversary {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Adversary {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?.parse().map_err(serde::de::Error::custom)
    }
}

impl Adversary {
    pub fn validate(&self, inst: &LchInstance) -> Result<()> {
        match self {
            Adversary::WrongTerm(j) if *j >= inst.m() => Err(Error::IndexOutOfRange { index: *j, n: inst.m() }),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub t_level: u32,
    pub backend: Backend,
    /// Skip coin flipping; the verifier picks `r` itself.
    pub direct_challenge: bool,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig { t_level: 2, backend: Backend::Hash, direct_challenge: false }
    }
}

impl ProtocolConfig {
    pub fn code(&self) -> Result<SteaneCode> {
        SteaneCode::new(self.t_level)
    }
}

/// The encoded register in transit. The verifier can only measure it.
#[derive(Clone, Debug)]
pub struct QuantumRegister(EncodedWitness);

impl QuantumRegister {
    pub(crate) fn new(enc: EncodedWitness) -> Self {
        QuantumRegister(enc)
    }

    pub fn blocks(&self) -> usize {
        self.0.key().n()
    }

    pub fn block_len(&self) -> usize {
        self.0.key().block_len()
    }

    /// Transversal `C` on the support blocks, then a standard-basis measurement.
    pub fn measure<R: Rng + ?Sized>(&self, term: &LchTerm, rng: &mut R) -> Result<BitString> {
        sample_challenge(&self.0, term, rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PState {
    Start,
    AwaitChallenge,
    AwaitOutcome,
    Done,
}

/// Honest prover.
#[derive(Clone, Debug)]
pub struct ProverMachine<'a> {
    inst: &'a LchInstance,
    cfg: ProtocolConfig,
    rng: ChaCha8Rng,
    enc: EncodedWitness,
    commitment: Commitment,
    /// Key handed to the NP-ZK subprotocol; differs from the encoding key
    /// only when testing binding.
    npzk_key: EncodingKey,
    coin: Option<CoinProver>,
    r: Option<BitString>,
    state: PState,
}

impl<'a> ProverMachine<'a> {
    pub fn new(inst: &'a LchInstance, logical: DenseState, cfg: ProtocolConfig, mut rng: ChaCha8Rng) -> Result<Self> {
        check_len(inst.n, logical.k())?;
        let code = cfg.code()?;
        let key = sample_key(inst.n, &code, &mut rng);
        let commitment = cfg.backend.commit(&key.opening().to_bytes(), key.salt())?;
        let enc = encode_symbolic(logical, key.clone())?;
        Ok(ProverMachine { inst, cfg, rng, enc, commitment, npzk_key: key, coin: None, r: None, state: PState::Start })
    }

    /// Later present `opening` instead of the committed one.
    pub fn with_false_opening(mut self, opening: KeyOpening) -> Result<Self> {
        self.npzk_key = self.enc.key().with_opening(opening)?;
        Ok(self)
    }

    pub fn key(&self) -> &EncodingKey {
        self.enc.key()
    }

    pub fn start(&mut self) -> Result<(Vec<Message>, QuantumRegister)> {
        if self.state != PState::Start {
            return Err(Error::Protocol("prover already started".into()));
        }
        let key = self.enc.key();
        let mut out = vec![Message::new(
            Role::Prover,
            Body::WitnessCommitment { commitment: self.commitment.clone(), blocks: key.n(), block_len: 2 * key.block_len() },
        )];
        if self.cfg.direct_challenge {
            self.state = PState::AwaitOutcome;
        } else {
            let (coin, commitments) = CoinProver::commit(challenge_len(self.inst.m()), self.cfg.backend, &mut self.rng)?;
            self.coin = Some(coin);
            out.push(Message::new(Role::Prover, Body::CoinflipCommit { commitments }));
            self.state = PState::AwaitChallenge;
        }
        Ok((out, QuantumRegister::new(self.enc.clone())))
    }

    fn abort(&mut self, reason: &str) -> Vec<Message> {
        self.state = PState::Done;
        vec![Message::new(Role::Prover, Body::Abort { reason: reason.into() })]
    }

    pub fn on_message(&mut self, msg: &Message) -> Result<Vec<Message>> {
        if self.state == PState::Done || msg.role != Role::Verifier {
            return Ok(vec![]);
        }
        match (self.state, &msg.body) {
            (_, Body::Verdict { .. }) => {
                self.state = PState::Done;
                Ok(vec![])
            }
            (PState::AwaitChallenge, Body::CoinflipChallenge { bits }) => {
                let coin = self.coin.as_ref().expect("coin committed");
                match coin.result(bits) {
                    Ok(r) => {
                        self.r = Some(r);
                        self.state = PState::AwaitOutcome;
                        Ok(vec![Message::new(Role::Prover, coin.reveal())])
                    }
                    Err(_) => Ok(self.abort("malformed coin-flip challenge")),
                }
            }
            (PState::AwaitOutcome, Body::OutcomeU { r, j, u }) => {
                let m = self.inst.m();
                let r_ok = match &self.r {
                    Some(expected) => expected == r,
                    None => r.len() == challenge_len(m),
                };
                if !r_ok || select_term(r, m).ok() != Some(*j) {
                    return Ok(self.abort("challenge does not match the coin flip"));
                }
                let term = &self.inst.terms[*j];
                let ts = TermSampler::new(term, &self.enc.key().code())?;
                if !ts.eval_q(self.enc.key(), u).unwrap_or(false) {
                    return Ok(self.abort("predicate Q is 0"));
                }
                let statement = NpzkStatement { commitment: &self.commitment, term, u };
                let proof = IdealNpzk { commitments: self.cfg.backend }.prove(&statement, &self.npzk_key);
                self.state = PState::Done;
                Ok(vec![Message::new(Role::Prover, Body::Npzk { accepted: proof.accepted })])
            }
            (_, body) => Ok(self.abort(&format!("unexpected {}", body.kind()))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VState {
    AwaitWitness,
    AwaitCoinCommit,
    AwaitReveal,
    AwaitResponse,
    Done,
}

/// Verifier, honest or drawn from the XOR / wrong-term family.
#[derive(Clone, Debug)]
pub struct VerifierMachine<'a> {
    inst: &'a LchInstance,
    cfg: ProtocolConfig,
    adversary: Adversary,
    rng: ChaCha8Rng,
    register: Option<QuantumRegister>,
    coin_commitments: Vec<Commitment>,
    z: BitString,
    state: VState,
    verdict: Option<Verdict>,
}

impl<'a> VerifierMachine<'a> {
    pub fn new(inst: &'a LchInstance, cfg: ProtocolConfig, adversary: Adversary, rng: ChaCha8Rng) -> Result<Self> {
        adversary.validate(inst)?;
        Ok(VerifierMachine {
            inst,
            cfg,
            adversary,
            rng,
            register: None,
            coin_commitments: vec![],
            z: BitString::zeros(0),
            state: VState::AwaitWitness,
            verdict: None,
        })
    }

    pub fn receive_register(&mut self, reg: QuantumRegister) {
        self.register = Some(reg);
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.verdict
    }

    fn decide(&mut self, v: Verdict) -> Vec<Message> {
        self.state = VState::Done;
        self.verdict = Some(v);
        vec![Message::new(Role::Verifier, Body::Verdict { verdict: v })]
    }

    fn challenge(&mut self, r: BitString) -> Result<Vec<Message>> {
        let m = self.inst.m();
        let j = select_term(&r, m)?;
        let measured = match self.adversary {
            Adversary::WrongTerm(jj) => jj,
            _ => j,
        };
        let Some(reg) = &self.register else {
            return Ok(self.decide(Verdict::Reject));
        };
        let mut u = reg.measure(&self.inst.terms[measured], &mut self.rng)?;
        match &self.adversary {
            Adversary::Xor(MaskSpec::Bits(v)) => {
                check_len(u.len(), v.len())?;
                u ^= v;
            }
            Adversary::Xor(MaskSpec::Weight(w)) => {
                if *w > u.len() {
                    return Err(Error::InvalidParameters(format!("mask weight {w} exceeds {} bits", u.len())));
                }
                for p in sample_positions(&mut self.rng, u.len(), *w) {
                    u.flip(p);
                }
            }
            Adversary::Honest | Adversary::WrongTerm(_) => {}
        }
        self.state = VState::AwaitResponse;
        Ok(vec![Message::new(Role::Verifier, Body::OutcomeU { r, j, u })])
    }

    pub fn on_message(&mut self, msg: &Message) -> Result<Vec<Message>> {
        if self.state == VState::Done {
            return Ok(vec![]);
        }
        if msg.role != Role::Prover {
            return Ok(self.decide(Verdict::Reject));
        }
        let len = challenge_len(self.inst.m());
        match (self.state, &msg.body) {
            (VState::AwaitWitness, Body::WitnessCommitment { blocks, block_len, .. }) => {
                let shape_ok = self
                    .register
                    .as_ref()
                    .is_some_and(|reg| reg.blocks() == *blocks && 2 * reg.block_len() == *block_len)
                    && *blocks == self.inst.n
                    && *block_len == 2 * self.cfg.code()?.block_len();
                if !shape_ok {
                    return Ok(self.decide(Verdict::Reject));
                }
                if self.cfg.direct_challenge {
                    let r = BitString::from_bools((0..len).map(|_| self.rng.gen::<bool>()));
                    self.challenge(r)
                } else {
                    self.state = VState::AwaitCoinCommit;
                    Ok(vec![])
                }
            }
            (VState::AwaitCoinCommit, Body::CoinflipCommit { commitments }) if commitments.len() == len => {
                self.coin_commitments = commitments.clone();
                self.z = BitString::from_bools((0..len).map(|_| self.rng.gen::<bool>()));
                self.state = VState::AwaitReveal;
                Ok(vec![Message::new(Role::Verifier, Body::CoinflipChallenge { bits: self.z.clone() })])
            }
            (VState::AwaitReveal, Body::CoinflipReveal { bits, salts }) => {
                match verify_reveal(self.cfg.backend, &self.coin_commitments, &self.z, bits, salts) {
                    Some(r) => self.challenge(r),
                    None => Ok(self.decide(Verdict::Reject)),
                }
            }
            (VState::AwaitResponse, Body::Npzk { accepted }) => {
                let v = if *accepted { Verdict::Accept } else { Verdict::Reject };
                Ok(self.decide(v))
            }
            (_, Body::Abort { .. }) => Ok(self.decide(Verdict::Abort)),
            _ => Ok(self.decide(Verdict::Reject)),
        }
    }
}

/// Deliver messages until both sides go quiet.
pub fn run_session<T: Transport>(
    prover: &mut ProverMachine<'_>,
    verifier: &mut VerifierMachine<'_>,
    transport: &mut T,
) -> Result<()> {
    let (first, reg) = prover.start()?;
    verifier.receive_register(reg);
    for m in first {
        transport.send(m)?;
    }
    loop {
        let mut progressed = false;
        while let Some(m) = transport.recv(Role::Verifier)? {
            progressed = true;
            for out in verifier.on_message(&m)? {
                transport.send(out)?;
            }
        }
        while let Some(m) = transport.recv(Role::Prover)? {
            progressed = true;
            for out in prover.on_message(&m)? {
                transport.send(out)?;
            }
        }
        if !progressed {
            break;
        }
    }
    if verifier.verdict().is_none() {
        return Err(Error::Protocol("session stalled without a verdict".into()));
    }
    Ok(())
}

/// Seeds for the prover and verifier machines drawn from `rng`.
pub fn split_rngs<R: Rng + ?Sized>(rng: &mut R) -> (ChaCha8Rng, ChaCha8Rng) {
    (ChaCha8Rng::seed_from_u64(rng.gen()), ChaCha8Rng::seed_from_u64(rng.gen()))
}

/// Uniform computational basis state: one draw of the maximally mixed state.
pub fn random_basis_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DenseState> {
    DenseState::from_bits(&BitString::from_bools((0..n).map(|_| rng.gen::<bool>())))
}

/// One real interaction. Without a witness the prover sends the maximally
/// mixed state.
pub fn run_protocol<R: Rng + ?Sized>(
    inst: &LchInstance,
    witness: Option<&DenseState>,
    adversary: &Adversary,
    cfg: &ProtocolConfig,
    rng: &mut R,
) -> Result<Transcript> {
    let (mut prng, vrng) = split_rngs(rng);
    let logical = match witness {
        Some(w) => w.clone(),
        None => random_basis_state(inst.n, &mut prng)?,
    };
    let mut prover = ProverMachine::new(inst, logical, *cfg, prng)?;
    let mut verifier = VerifierMachine::new(inst, *cfg, adversary.clone(), vrng)?;
    let mut transport = MemoryTransport::new();
    run_session(&mut prover, &mut verifier, &mut transport)?;
    Ok(transport.into_transcript())
}

/// `2^{−|r|} Σ_r f(j(r))` over all challenge strings.
pub fn challenge_average(m: usize, mut f: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let len = challenge_len(m);
    if len > MAX_EXACT_CHALLENGE_BITS {
        return Err(Error::CapExceeded { requested: len, cap: MAX_EXACT_CHALLENGE_BITS });
    }
    let mut per_term = vec![None; m];
    let mut acc = 0.0;
    for v in 0..1u64 << len {
        let j = select_term(&BitString::from_uint(v, len), m)?;
        acc += match per_term[j] {
            Some(x) => x,
            None => *per_term[j].insert(f(j)?),
        };
    }
    Ok(acc / (1u64 << len) as f64)
}

/// Honest acceptance probability, computed from the logical outcome
/// distribution instead of sampling. Honest traps always pass, so this is
/// the probability that the logical outcome is nonzero.
pub fn exact_accept_probability(inst: &LchInstance, witness: &DenseState, t_level: u32) -> Result<f64> {
    check_len(inst.n, witness.k())?;
    let code = SteaneCode::new(t_level)?;
    challenge_average(inst.m(), |j| {
        let dist = TermSampler::new(&inst.terms[j], &code)?.logical_distribution(witness)?;
        Ok(1.0 - dist[0])
    })
}

/// Simulated interaction: the helper behind the zero-knowledge simulator.
///
/// The challenge `r` is fixed before anything is sent. The register holds
/// `logical` under a fresh key while the commitment is to the identity
/// permutation with zero pads, under the transparent backend. The coin flip
/// is steered to `r` by rewinding the verifier; the NP-ZK answer is the
/// subprotocol simulator's.
pub fn simulate_session<R: Rng + ?Sized>(
    inst: &LchInstance,
    r: &BitString,
    logical: DenseState,
    adversary: &Adversary,
    t_level: u32,
    rng: &mut R,
) -> Result<Transcript> {
    const MAX_REWINDS: usize = 64;
    let cfg = ProtocolConfig { t_level, backend: Backend::Transparent, direct_challenge: false };
    let code = cfg.code()?;
    check_len(challenge_len(inst.m()), r.len())?;
    let (mut srng, vrng) = split_rngs(rng);
    let key = sample_key(inst.n, &code, &mut srng);
    let fixed = EncodingKey::trivial(inst.n, &code);
    let commitment = cfg.backend.commit(&fixed.opening().to_bytes(), key.salt())?;
    let enc = encode_symbolic(logical, key.clone())?;

    let mut verifier = VerifierMachine::new(inst, cfg, adversary.clone(), vrng)?;
    verifier.receive_register(QuantumRegister::new(enc));
    let mut log = vec![Message::new(
        Role::Prover,
        Body::WitnessCommitment { commitment: commitment.clone(), blocks: inst.n, block_len: 2 * code.block_len() },
    )];
    let mut replies = verifier.on_message(&log[0])?;
    log.extend_from_slice(&replies);

    // rewind until y ⊕ z = r
    let mut y = BitString::from_bools((0..r.len()).map(|_| srng.gen::<bool>()));
    let mut attempt = None;
    for _ in 0..MAX_REWINDS {
        let mut trial = verifier.clone();
        let (coin, commitments) = CoinProver::commit_to(y.clone(), cfg.backend, &mut srng)?;
        let commit_msg = Message::new(Role::Prover, Body::CoinflipCommit { commitments });
        let out = trial.on_message(&commit_msg)?;
        let z = match out.first() {
            Some(Message { body: Body::CoinflipChallenge { bits }, .. }) => bits.clone(),
            _ => return Err(Error::Protocol("verifier left the coin flip".into())),
        };
        if &(&y ^ &z) == r {
            attempt = Some((trial, coin, commit_msg, out));
            break;
        }
        y = r ^ &z;
    }
    let (mut verifier, coin, commit_msg, out) =
        attempt.ok_or_else(|| Error::Protocol("coin flip could not be steered".into()))?;
    log.push(commit_msg);
    log.extend(out);
    let reveal = Message::new(Role::Prover, coin.reveal());
    replies = verifier.on_message(&reveal)?;
    log.push(reveal);
    log.extend_from_slice(&replies);

    let response = match replies.first() {
        Some(Message { body: Body::OutcomeU { j, u, .. }, .. }) => {
            let term = &inst.terms[*j];
            let q = TermSampler::new(term, &code)?.eval_q(&key, u).unwrap_or(false);
            if q {
                let statement = NpzkStatement { commitment: &commitment, term, u };
                let NpzkProof { accepted } = simulate_npzk(&statement, &key);
                Body::Npzk { accepted }
            } else {
                Body::Abort { reason: "predicate Q is 0".into() }
            }
        }
        _ => return Err(Error::Protocol("verifier did not issue a challenge".into())),
    };
    let response = Message::new(Role::Prover, response);
    replies = verifier.on_message(&response)?;
    log.push(response);
    log.extend_from_slice(&replies);
    Ok(Transcript::new(log))
}
