//! Wire messages and transcripts.
//!
//! One message per JSON line: `{"role":…,"kind":…,"payload":…}`. The
//! verdict line is last.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::protocol::commitment::Commitment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Prover,
    Verifier,
}

impl Role {
    pub fn other(self) -> Role {
        match self {
            Role::Prover => Role::Verifier,
            Role::Verifier => Role::Prover,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
    /// The prover aborted; counts as a rejection.
    Abort,
}

impl Verdict {
    pub fn accepted(self) -> bool {
        self == Verdict::Accept
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload")]
pub enum Body {
    /// The encoded register travels alongside; only its shape is on the wire.
    #[serde(rename = "witness+commitment")]
    WitnessCommitment { commitment: Commitment, blocks: usize, block_len: usize },
    #[serde(rename = "coinflip-commit")]
    CoinflipCommit { commitments: Vec<Commitment> },
    #[serde(rename = "coinflip-challenge")]
    CoinflipChallenge { bits: BitString },
    #[serde(rename = "coinflip-reveal")]
    CoinflipReveal { bits: BitString, salts: Vec<String> },
    #[serde(rename = "outcome-u")]
    OutcomeU { r: BitString, j: usize, u: BitString },
    /// Output bit of the NP zero-knowledge subprotocol.
    #[serde(rename = "npzk")]
    Npzk { accepted: bool },
    #[serde(rename = "abort")]
    Abort { reason: String },
    #[serde(rename = "verdict")]
    Verdict { verdict: Verdict },
}

impl Body {
    pub fn kind(&self) -> &'static str {
        match self {
            Body::WitnessCommitment { .. } => "witness+commitment",
            Body::CoinflipCommit { .. } => "coinflip-commit",
            Body::CoinflipChallenge { .. } => "coinflip-challenge",
            Body::CoinflipReveal { .. } => "coinflip-reveal",
            Body::OutcomeU { .. } => "outcome-u",
            Body::Npzk { .. } => "npzk",
            Body::Abort { .. } => "abort",
            Body::Verdict { .. } => "verdict",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    #[serde(flatten)]
    pub body: Body,
}

impl Message {
    pub fn new(role: Role, body: Body) -> Self {
        Message { role, body }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub messages: Vec<Message>,
}

impl Transcript {
    pub fn new(messages: Vec<Message>) -> Self {
        Transcript { messages }
    }

    /// Verdict from the last line, if that line is a verdict.
    pub fn verdict(&self) -> Option<Verdict> {
        match self.messages.last() {
            Some(Message { body: Body::Verdict { verdict }, .. }) => Some(*verdict),
            _ => None,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict().is_some_and(Verdict::accepted)
    }

    /// The `(r, j)` of the challenge, if one was issued.
    pub fn challenge(&self) -> Option<(&BitString, usize)> {
        self.messages.iter().find_map(|m| match &m.body {
            Body::OutcomeU { r, j, .. } => Some((r, *j)),
            _ => None,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for m in &self.messages {
            out.push_str(&serde_json::to_string(m).expect("serializable"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let messages = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1))))
            .collect::<Result<Vec<Message>>>()?;
        Ok(Transcript { messages })
    }
}

/// Structural check of message order, senders and the verdict.
///
/// Accepted shapes: witness+commitment, then either the three coin-flip
/// messages or none (direct challenge), then outcome-u, then npzk or abort,
/// then the verdict. A prover abort may come at any point and must be
/// followed by an `abort` verdict; otherwise a transcript may end early
/// with a `reject`.
pub fn validate_transcript(t: &Transcript) -> Result<()> {
    let fail = |i: usize, why: &str| Err(Error::Protocol(format!("message {}: {why}", i + 1)));
    let msgs = &t.messages;
    let Some((last, body)) = msgs.split_last() else {
        return Err(Error::Protocol("empty transcript".into()));
    };
    let Body::Verdict { verdict } = last.body else {
        return fail(msgs.len() - 1, "last message is not a verdict");
    };
    if last.role != Role::Verifier {
        return fail(msgs.len() - 1, "verdict not sent by the verifier");
    }
    #[derive(PartialEq)]
    enum S {
        Start,
        Committed,
        CoinCommitted,
        Challenged,
        Revealed,
        Measured,
        Answered(bool),
        Aborted,
    }
    let mut s = S::Start;
    let mut coin_len = None;
    for (i, m) in body.iter().enumerate() {
        let expect_role = match m.body {
            Body::CoinflipChallenge { .. } | Body::OutcomeU { .. } | Body::Verdict { .. } => Role::Verifier,
            _ => Role::Prover,
        };
        if m.role != expect_role {
            return fail(i, "wrong sender");
        }
        s = match (&s, &m.body) {
            (S::Start, Body::WitnessCommitment { .. }) => S::Committed,
            (S::Committed, Body::CoinflipCommit { commitments }) => {
                coin_len = Some(commitments.len());
                S::CoinCommitted
            }
            (S::CoinCommitted, Body::CoinflipChallenge { bits }) if Some(bits.len()) == coin_len => S::Challenged,
            (S::Challenged, Body::CoinflipReveal { bits, salts })
                if Some(bits.len()) == coin_len && salts.len() == bits.len() =>
            {
                S::Revealed
            }
            (S::Committed, Body::OutcomeU { .. }) => S::Measured,
            (S::Revealed, Body::OutcomeU { r, .. }) if Some(r.len()) == coin_len => S::Measured,
            (S::Measured, Body::Npzk { accepted }) => S::Answered(*accepted),
            (S::Aborted, _) => return fail(i, "message after abort"),
            (_, Body::Abort { .. }) => S::Aborted,
            _ => return fail(i, &format!("unexpected {}", m.body.kind())),
        };
    }
    let consistent = match s {
        S::Answered(true) => verdict == Verdict::Accept || verdict == Verdict::Reject,
        S::Aborted => verdict == Verdict::Abort,
        _ => verdict == Verdict::Reject,
    };
    if consistent {
        Ok(())
    } else {
        fail(msgs.len() - 1, "verdict inconsistent with the exchange")
    }
}
