//! Deterministic fan-out of one master seed into independent named streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Named random streams. Each experiment component draws from its own stream
/// so that one can be varied while the others stay frozen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Source,
    Interleaver,
    Noise,
    Relaxation,
    Bsc,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::Source => 0x53_6f_75_72_63_65,
            Stream::Interleaver => 0x49_6e_74_65_72_6c,
            Stream::Noise => 0x4e_6f_69_73_65,
            Stream::Relaxation => 0x52_65_6c_61_78,
            Stream::Bsc => 0x42_73_63,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a 64-bit seed for `stream` from `master` and an index path
/// (e.g. SNR point, trial, outer iteration).
pub fn derive_seed(master: u64, stream: Stream, path: &[u64]) -> u64 {
    let mut h = splitmix64(master ^ splitmix64(stream.tag()));
    for &p in path {
        h = splitmix64(h ^ splitmix64(p.wrapping_add(0x632b_e59b_d9b4_e019)));
    }
    h
}

pub fn stream_rng(master: u64, stream: Stream, path: &[u64]) -> SimRng {
    SimRng::seed_from_u64(derive_seed(master, stream, path))
}
