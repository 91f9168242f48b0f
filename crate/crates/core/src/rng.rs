//! Counter-based random streams.
//!
//! A `(seed, stream)` pair maps to a ChaCha keystream; the generator position
//! plays the role of the counter. Paths are generated from their own stream,
//! so results do not depend on scheduling or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies the randomness of one sample path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub seed: u64,
    pub stream: u64,
}

/// Independent sub-streams of a single path. The driving noise of `X` and
/// that of an independent drift must never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SubStream {
    Main = 0,
    Drift = 1,
}

impl SeedSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// The `i`-th stream under the same master seed.
    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub(crate) fn rng(self, sub: SubStream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream.wrapping_mul(2).wrapping_add(sub as u64));
        rng
    }
}
