//! NP zero-knowledge subprotocol seam.
//!
//! The default backend is an ideal functionality: a trusted evaluator checks
//! that the key opens the commitment and that `Q_r` holds, and discloses only
//! that bit. A GMW graph 3-coloring proof is included as a standalone
//! demonstration over explicit graphs.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::encoding::EncodingKey;
use crate::error::{Error, Result};
use crate::lch::LchTerm;
use crate::mc;
use crate::protocol::commitment::{fresh_salt, Backend, Commitment, CommitmentScheme};
use crate::protocol::predicates::eval_q;

/// Public statement: commitment `z`, the challenged term and reported `u`.
#[derive(Clone, Debug)]
pub struct NpzkStatement<'a> {
    pub commitment: &'a Commitment,
    pub term: &'a LchTerm,
    pub u: &'a BitString,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NpzkProof {
    pub accepted: bool,
}

pub trait NpzkBackend {
    fn prove(&self, statement: &NpzkStatement<'_>, key: &EncodingKey) -> NpzkProof;
    fn verify(&self, statement: &NpzkStatement<'_>, proof: &NpzkProof) -> bool;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct IdealNpzk {
    pub commitments: Backend,
}

impl IdealNpzk {
    /// `(i)` the key opens `z` and `(ii)` `Q_r(t, π, u, a, b) = 1`.
    pub fn relation(&self, statement: &NpzkStatement<'_>, key: &EncodingKey) -> bool {
        let opens = self.commitments.verify_open(statement.commitment, &key.opening().to_bytes(), key.salt());
        opens && eval_q(statement.term, key, statement.u).unwrap_or(false)
    }
}

impl NpzkBackend for IdealNpzk {
    fn prove(&self, statement: &NpzkStatement<'_>, key: &EncodingKey) -> NpzkProof {
        NpzkProof { accepted: self.relation(statement, key) }
    }

    fn verify(&self, _statement: &NpzkStatement<'_>, proof: &NpzkProof) -> bool {
        proof.accepted
    }
}

/// Stand-in for the subprotocol's simulator: outputs `Q_r` for the key the
/// simulator actually encoded with, ignoring the commitment.
pub fn simulate_npzk(statement: &NpzkStatement<'_>, key: &EncodingKey) -> NpzkProof {
    NpzkProof { accepted: eval_q(statement.term, key, statement.u).unwrap_or(false) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        for &(a, b) in &edges {
            if a >= n || b >= n || a == b {
                return Err(Error::InvalidParameters(format!("bad edge ({a}, {b})")));
            }
        }
        Ok(Graph { n, edges })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        Graph { n, edges }
    }

    pub fn is_proper(&self, coloring: &[u8]) -> bool {
        coloring.len() == self.n
            && coloring.iter().all(|&c| c < 3)
            && self.edges.iter().all(|&(a, b)| coloring[a] != coloring[b])
    }
}

/// One GMW round; `true` when the verifier accepts.
pub fn gmw_round<R: Rng + ?Sized>(graph: &Graph, coloring: &[u8], backend: Backend, rng: &mut R) -> Result<bool> {
    if coloring.len() != graph.n || graph.edges.is_empty() {
        return Err(Error::InvalidParameters("coloring length or empty edge set".into()));
    }
    let mut sigma = [0u8, 1, 2];
    sigma.shuffle(rng);
    let shuffled: Vec<u8> = coloring.iter().map(|&c| sigma[(c % 3) as usize]).collect();
    let salts: Vec<Vec<u8>> = (0..graph.n).map(|_| fresh_salt(rng)).collect();
    let commitments = shuffled
        .iter()
        .zip(&salts)
        .map(|(c, s)| backend.commit(&[*c], s))
        .collect::<Result<Vec<_>>>()?;
    let (a, b) = graph.edges[rng.gen_range(0..graph.edges.len())];
    let opened = |v: usize| backend.verify_open(&commitments[v], &[shuffled[v]], &salts[v]).then_some(shuffled[v]);
    Ok(match (opened(a), opened(b)) {
        (Some(ca), Some(cb)) => ca < 3 && cb < 3 && ca != cb,
        _ => false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmwReport {
    pub rounds: usize,
    pub accepted: usize,
}

pub fn gmw_run(graph: &Graph, coloring: &[u8], rounds: usize, backend: Backend, seed: u64) -> Result<GmwReport> {
    let p = mc::proportion(rounds, seed, |rng| gmw_round(graph, coloring, backend, rng))?;
    Ok(GmwReport { rounds, accepted: p.hits })
}
