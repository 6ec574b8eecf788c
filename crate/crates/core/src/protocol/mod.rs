//! The interactive proof: commitments, coin flipping, predicates, the NP-ZK
//! seam, message schema, transport and the two state machines.

pub mod coinflip;
pub mod commitment;
pub mod messages;
pub mod npzk;
pub mod predicates;
pub mod session;
pub mod transport;

pub use commitment::{Backend, Commitment, CommitmentScheme};
pub use messages::{validate_transcript, Body, Message, Role, Transcript, Verdict};
pub use predicates::{challenge_len, eval_q, eval_r, select_term};
pub use session::{
    exact_accept_probability, run_protocol, Adversary, MaskSpec, ProtocolConfig, ProverMachine, VerifierMachine,
};
