//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 generator whose 256-bit key is
//! `seed (u64 LE) | domain (u64 LE) | 0 | 0` and whose 64-bit stream id is
//! the index inside that domain. Replication `i` of a run is therefore
//! addressable directly, without generating replications `< i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Key domains. Distinct domains never share a keystream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Replication = 1,
    Site = 2,
    Coupling = 3,
}

pub fn keyed(seed: u64, domain: Domain, index: u64) -> Stream {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng
}

/// Stream for replication `index` of a run with master seed `seed`.
pub fn stream(seed: u64, index: u64) -> Stream {
    keyed(seed, Domain::Replication, index)
}

/// Per-site stream for a lazily sampled two-sided environment.
pub fn site_stream(seed: u64, site: i64) -> Stream {
    keyed(seed, Domain::Site, zigzag(site))
}

#[inline]
pub fn zigzag(i: i64) -> u64 {
    ((i << 1) ^ (i >> 63)) as u64
}

/// Uniform on the open interval `(0, 1)`.
#[inline]
pub fn open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}
