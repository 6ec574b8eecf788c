//! Challenge-to-term map and the prover's predicates `R_r` and `Q_r`.
//!
//! Term indices are 0-based throughout: `j = int(r) mod m`.

use crate::bits::BitString;
use crate::encoding::EncodingKey;
use crate::error::{Error, Result};
use crate::lch::LchTerm;
use crate::sampler::TermSampler;

/// `⌈log₂ m⌉`; zero for a single term.
pub fn challenge_len(m: usize) -> usize {
    assert!(m >= 1, "instance has no terms");
    (usize::BITS - (m - 1).leading_zeros()) as usize
}

/// `int(r) mod m`; `r` must be long enough to reach every index and at
/// most 64 bits.
pub fn select_term(r: &BitString, m: usize) -> Result<usize> {
    if r.len() < challenge_len(m) || r.len() > 64 {
        return Err(Error::InvalidParameters(format!("challenge of {} bits for {m} terms", r.len())));
    }
    if r.is_empty() {
        return Ok(0);
    }
    Ok((r.to_uint() % m as u64) as usize)
}

/// `R_r(t, π, u)` for the support blocks of `term`.
pub fn eval_r(term: &LchTerm, key: &EncodingKey, u: &BitString) -> Result<bool> {
    TermSampler::new(term, &key.code())?.eval_r(key, u)
}

/// `Q_r(t, π, u, a, b) = R_r(t, π, u ⊕ c)`.
pub fn eval_q(term: &LchTerm, key: &EncodingKey, u: &BitString) -> Result<bool> {
    TermSampler::new(term, &key.code())?.eval_q(key, u)
}
