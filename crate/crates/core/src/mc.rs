//! Seeded Monte Carlo over independent chunks.
//!
//! Sample `i` belongs to chunk `i / CHUNK`, and chunk `c` draws from
//! ChaCha8 seeded with `seed` on stream `c`. Results are merged in chunk
//! order, so output depends only on `(seed, samples)` and not on the
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const CHUNK: usize = 1024;

pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// `f` evaluated on `samples` draws, in sample order.
pub fn collect<T, F>(samples: usize, seed: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<T> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Vec<T>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len).map(|_| f(&mut rng)).collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.into_iter().flatten().collect())
}

pub fn proportion<F>(samples: usize, seed: u64, f: F) -> Result<Proportion>
where
    F: Fn(&mut ChaCha8Rng) -> Result<bool> + Sync,
{
    let hits = collect(samples, seed, f)?.into_iter().filter(|&b| b).count();
    Ok(Proportion::new(hits, samples))
}

/// Binomial estimate with a normal-approximation interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: usize,
    pub samples: usize,
}

impl Proportion {
    pub fn new(hits: usize, samples: usize) -> Self {
        Proportion { hits, samples }
    }

    pub fn estimate(&self) -> f64 {
        if self.samples == 0 {
            0.0
        } else {
            self.hits as f64 / self.samples as f64
        }
    }

    /// Standard error `√(p̂(1 − p̂)/n)`.
    pub fn sigma(&self) -> f64 {
        if self.samples == 0 {
            return 0.0;
        }
        let p = self.estimate();
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn ci95(&self) -> f64 {
        1.96 * self.sigma()
    }
}
