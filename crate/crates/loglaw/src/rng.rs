//! Stream-separated deterministic RNG construction.
//!
//! Every Monte Carlo consumer derives its generator from
//! `(seed, stream kind, replication index)`, so results are independent of
//! worker count and evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub(crate) const STREAM_DIRECT: u64 = 0;
pub(crate) const STREAM_POISSON: u64 = 1;
pub(crate) const STREAM_GAUSS: u64 = 2;
pub(crate) const STREAM_FACT6_SAMPLE: u64 = 3;
pub(crate) const STREAM_FACT6_POISSON: u64 = 4;

pub(crate) fn rep_rng(seed: u64, kind: u64, rep: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream((kind << 48) | (rep & 0x0000_FFFF_FFFF_FFFF));
    rng
}
