//! Deterministic named substreams derived from one master seed.
//!
//! Every estimator draws from its own stream so that changing the sample
//! count of one estimator never shifts the randomness seen by another, and
//! rerunning with the same seed reproduces every draw bit for bit.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Collapses `(master, labels)` into a child seed.
pub fn stream_seed(master: u64, labels: &[&str]) -> u64 {
    let mut h = splitmix64(master ^ 0x5851_f42d_4c95_7f2d);
    for label in labels {
        for &b in label.as_bytes() {
            h = splitmix64(h ^ u64::from(b));
        }
        h = splitmix64(h ^ 0xff);
    }
    h
}

/// RNG for the named substream.
pub fn stream_rng(master: u64, labels: &[&str]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(master, labels))
}
