//! Seeded, splittable random streams.
//!
//! Work is cut into fixed-size chunks; chunk `k` of a computation seeded with
//! `seed` draws from ChaCha8 stream `k` under that seed. Results therefore do
//! not depend on how chunks are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub const GENERATOR_ID: &str = "chacha8-stream-v1";

/// Number of draws handled by one stream.
pub const CHUNK: usize = 8192;

pub fn stream(seed: u64, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Derives an independent seed for a named sub-computation.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `f(rng, start, count)` over consecutive chunks covering `0..total`
/// and returns the per-chunk results in order.
pub fn chunked<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    F: Fn(&mut Rng, usize, usize) -> T,
{
    let mut out = Vec::with_capacity(total.div_ceil(CHUNK));
    let mut start = 0;
    let mut k = 0u64;
    while start < total {
        let count = CHUNK.min(total - start);
        let mut r = stream(seed, k);
        out.push(f(&mut r, start, count));
        start += count;
        k += 1;
    }
    out
}
