//! Deterministic RNG plumbing.
//!
//! All randomness in the crate flows through explicit [`RngStream`] handles;
//! there is no global RNG. A stream is identified by a `(seed, stream id)`
//! pair, and identical `(seed, stream id, call sequence)` reproduces
//! identical draws, which is what makes multi-seed experiments exactly
//! replayable.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Handle naming one deterministic random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Materialize the stream as a generator positioned at its start.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    /// A sibling stream under the same seed. Callers partition the stream-id
    /// space so that concurrent work (e.g. per-offspring variation) stays
    /// deterministic regardless of scheduling.
    pub fn substream(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(offset),
        }
    }
}
