//! Salted commitments with a hash backend and a transparent test backend.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::encoding::SALT_LEN;
use crate::error::{Error, Result};

const DOMAIN_TAG: &[u8] = b"lchzk/commit/v1";

/// Commitment string. Hash-backend values are 32 bytes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub value: Vec<u8>,
}

impl fmt::Debug for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Commitment({})", hex::encode(&self.value))
    }
}

impl Serialize for Commitment {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&hex::encode(&self.value))
    }
}

impl<'de> Deserialize<'de> for Commitment {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        hex::decode(s).map(|value| Commitment { value }).map_err(serde::de::Error::custom)
    }
}

pub trait CommitmentScheme {
    fn commit(&self, message: &[u8], salt: &[u8]) -> Result<Commitment>;

    fn verify_open(&self, z: &Commitment, message: &[u8], salt: &[u8]) -> bool {
        self.commit(message, salt).is_ok_and(|c| &c == z)
    }
}

/// `SHA-256(tag ‖ salt ‖ message)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct HashCommitment;

/// Stores `salt ‖ message` in the clear; openings are inspectable.
#[derive(Clone, Copy, Debug, Default)]
pub struct TransparentCommitment;

fn check_salt(salt: &[u8]) -> Result<()> {
    if salt.len() == SALT_LEN {
        Ok(())
    } else {
        Err(Error::InvalidParameters(format!("salt must be {SALT_LEN} bytes, got {}", salt.len())))
    }
}

impl CommitmentScheme for HashCommitment {
    fn commit(&self, message: &[u8], salt: &[u8]) -> Result<Commitment> {
        check_salt(salt)?;
        let mut h = Sha256::new();
        h.update(DOMAIN_TAG);
        h.update(salt);
        h.update(message);
        Ok(Commitment { value: h.finalize().to_vec() })
    }
}

impl CommitmentScheme for TransparentCommitment {
    fn commit(&self, message: &[u8], salt: &[u8]) -> Result<Commitment> {
        check_salt(salt)?;
        Ok(Commitment { value: [salt, message].concat() })
    }
}

impl TransparentCommitment {
    /// `(salt, message)` read back from a transparent commitment.
    pub fn open(z: &Commitment) -> Option<(&[u8], &[u8])> {
        (z.value.len() >= SALT_LEN).then(|| z.value.split_at(SALT_LEN))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[default]
    Hash,
    Transparent,
}

impl CommitmentScheme for Backend {
    fn commit(&self, message: &[u8], salt: &[u8]) -> Result<Commitment> {
        match self {
            Backend::Hash => HashCommitment.commit(message, salt),
            Backend::Transparent => TransparentCommitment.commit(message, salt),
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hash" => Ok(Backend::Hash),
            "transparent" => Ok(Backend::Transparent),
            other => Err(Error::Parse(format!("unknown commitment backend {other:?}"))),
        }
    }
}

pub fn fresh_salt<R: Rng + ?Sized>(rng: &mut R) -> Vec<u8> {
    let mut s = vec![0u8; SALT_LEN];
    rng.fill(s.as_mut_slice());
    s
}
