//! Seeded generators with explicit substreams.
//!
//! Every randomized routine in the crate takes `&mut R where R: Rng`. The
//! experiment harness derives one independent ChaCha stream per run index so
//! results do not depend on how runs are scheduled across threads.

use rand_chacha::rand_core::SeedableRng;
pub use rand_chacha::ChaCha8Rng as StsRng;

/// Generator for stream `stream` of the family keyed by `seed`.
pub fn substream(seed: u64, stream: u64) -> StsRng {
    let mut rng = StsRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
