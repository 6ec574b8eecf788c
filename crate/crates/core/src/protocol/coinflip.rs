//! Parallel Blum coin flipping: the prover commits to `y`, the verifier
//! answers with `z`, the prover opens and both take `r = y ⊕ z`.

use rand::Rng;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::protocol::commitment::{fresh_salt, Backend, Commitment, CommitmentScheme};
use crate::protocol::messages::{Body, Message, Role};
use crate::protocol::transport::Transport;

/// Prover side after the commit message.
#[derive(Clone, Debug)]
pub struct CoinProver {
    y: BitString,
    salts: Vec<Vec<u8>>,
}

impl CoinProver {
    pub fn commit<R: Rng + ?Sized>(len: usize, backend: Backend, rng: &mut R) -> Result<(Self, Vec<Commitment>)> {
        let y = BitString::from_bools((0..len).map(|_| rng.gen::<bool>()));
        Self::commit_to(y, backend, rng)
    }

    /// Commit to a chosen `y`.
    pub fn commit_to<R: Rng + ?Sized>(y: BitString, backend: Backend, rng: &mut R) -> Result<(Self, Vec<Commitment>)> {
        let salts: Vec<Vec<u8>> = (0..y.len()).map(|_| fresh_salt(rng)).collect();
        let commitments = y
            .iter()
            .zip(&salts)
            .map(|(b, s)| backend.commit(&[b as u8], s))
            .collect::<Result<Vec<_>>>()?;
        Ok((CoinProver { y, salts }, commitments))
    }

    pub fn y(&self) -> &BitString {
        &self.y
    }

    pub fn reveal(&self) -> Body {
        Body::CoinflipReveal { bits: self.y.clone(), salts: self.salts.iter().map(hex::encode).collect() }
    }

    pub fn result(&self, z: &BitString) -> Result<BitString> {
        if z.len() != self.y.len() {
            return Err(Error::Protocol("coin-flip challenge has the wrong length".into()));
        }
        Ok(&self.y ^ z)
    }
}

/// `r = y ⊕ z` if every opening verifies.
pub fn verify_reveal(
    backend: Backend,
    commitments: &[Commitment],
    z: &BitString,
    bits: &BitString,
    salts: &[String],
) -> Option<BitString> {
    if commitments.len() != z.len() || bits.len() != z.len() || salts.len() != z.len() {
        return None;
    }
    for ((c, b), s) in commitments.iter().zip(bits.iter()).zip(salts) {
        let salt = hex::decode(s).ok()?;
        if !backend.verify_open(c, &[b as u8], &salt) {
            return None;
        }
    }
    Some(bits ^ z)
}

/// Both sides of the coin flip over `transport`. Returns `None` when the
/// verifier rejects the opening.
pub fn coin_flip<R1: Rng + ?Sized, R2: Rng + ?Sized, T: Transport>(
    len: usize,
    backend: Backend,
    prover_rng: &mut R1,
    verifier_rng: &mut R2,
    transport: &mut T,
) -> Result<Option<BitString>> {
    let (prover, commitments) = CoinProver::commit(len, backend, prover_rng)?;
    transport.send(Message::new(Role::Prover, Body::CoinflipCommit { commitments }))?;
    let Some(Message { body: Body::CoinflipCommit { commitments }, .. }) = transport.recv(Role::Verifier)? else {
        return Err(Error::Protocol("expected coinflip-commit".into()));
    };
    let z = BitString::from_bools((0..len).map(|_| verifier_rng.gen::<bool>()));
    transport.send(Message::new(Role::Verifier, Body::CoinflipChallenge { bits: z }))?;
    let Some(Message { body: Body::CoinflipChallenge { bits: z_seen }, .. }) = transport.recv(Role::Prover)? else {
        return Err(Error::Protocol("expected coinflip-challenge".into()));
    };
    let r_prover = prover.result(&z_seen)?;
    transport.send(Message::new(Role::Prover, prover.reveal()))?;
    let Some(Message { body: Body::CoinflipReveal { bits, salts }, .. }) = transport.recv(Role::Verifier)? else {
        return Err(Error::Protocol("expected coinflip-reveal".into()));
    };
    let r = verify_reveal(backend, &commitments, &z_seen, &bits, &salts);
    debug_assert!(r.as_ref().is_none_or(|r| r == &r_prover));
    Ok(r)
}
