//! Keyed random streams.
//!
//! Every consumer of randomness derives its generator from `(seed, domain,
//! index)`, so results do not depend on how work is split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    PlainRados,
    ClassWiseRados,
    Laplace,
    Folds,
    GameTrials,
    Experiment,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::PlainRados => 0x706c_6169_6e00_0001,
            Domain::ClassWiseRados => 0x636c_6173_7300_0002,
            Domain::Laplace => 0x6c61_706c_6100_0003,
            Domain::Folds => 0x666f_6c64_7300_0004,
            Domain::GameTrials => 0x6761_6d65_7300_0005,
            Domain::Experiment => 0x6578_7065_7200_0006,
        }
    }
}

/// ChaCha8 keyed by `(seed, domain)` and positioned on stream `index`.
pub fn stream(seed: u64, domain: Domain, index: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&domain.tag().to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}
