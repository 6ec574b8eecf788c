//! Message transport between the two machines.

use std::collections::VecDeque;

use crate::error::Result;
use crate::protocol::messages::{Message, Role, Transcript};

pub trait Transport {
    fn send(&mut self, msg: Message) -> Result<()>;

    /// Next message addressed to `to`, if any is pending.
    fn recv(&mut self, to: Role) -> Result<Option<Message>>;
}

/// In-process duplex channel that records every message in send order.
#[derive(Clone, Debug, Default)]
pub struct MemoryTransport {
    to_prover: VecDeque<Message>,
    to_verifier: VecDeque<Message>,
    log: Vec<Message>,
}

impl MemoryTransport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn transcript(&self) -> Transcript {
        Transcript::new(self.log.clone())
    }

    pub fn into_transcript(self) -> Transcript {
        Transcript::new(self.log)
    }
}

impl Transport for MemoryTransport {
    fn send(&mut self, msg: Message) -> Result<()> {
        self.log.push(msg.clone());
        match msg.role {
            Role::Prover => self.to_verifier.push_back(msg),
            Role::Verifier => self.to_prover.push_back(msg),
        }
        Ok(())
    }

    fn recv(&mut self, to: Role) -> Result<Option<Message>> {
        Ok(match to {
            Role::Prover => self.to_prover.pop_front(),
            Role::Verifier => self.to_verifier.pop_front(),
        })
    }
}
