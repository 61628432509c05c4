//! Named, reproducible RNG substreams derived from one master seed.
//!
//! Every stochastic consumer in the workspace (environment resets, policy
//! sampling, adversary picks, minibatch shuffles, ...) draws from its own
//! named stream. Streams are mutually independent, so adding or removing one
//! consumer never perturbs the draws seen by another — that independence is
//! what makes e.g. "population of one" and "single adversary" runs bit-equal.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// FNV-1a folded over `bytes`, continuing from `state`. Stable across
/// platforms and toolchain versions, unlike `std::hash`.
fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Factory for independent, reproducible random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        SeedStreams { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    /// An independent generator for the pair `(name, index)`.
    ///
    /// The same `(master, name, index)` always yields the same sequence;
    /// distinct pairs select distinct ChaCha streams over the same key.
    pub fn stream(&self, name: &str, index: u64) -> ChaCha8Rng {
        let h = fnv1a(FNV_OFFSET, name.as_bytes());
        let h = fnv1a(h, &index.to_le_bytes());
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(h);
        rng
    }
}
