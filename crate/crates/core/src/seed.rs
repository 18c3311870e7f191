//! Per-frame random streams derived from a base seed and integer coordinates.
//!
//! Every Monte-Carlo frame gets its own ChaCha8 key computed from
//! `(base_seed, policy, point, iteration)`, so results do not depend on the
//! order in which frames run or on how many threads run them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type FrameRng = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with a path of indices into a 256-bit ChaCha key.
pub fn derive_key(base_seed: u64, path: &[u64]) -> [u8; 32] {
    let mut state = splitmix64(base_seed);
    for (depth, &index) in path.iter().enumerate() {
        state = splitmix64(
            state ^ splitmix64(index.wrapping_add((depth as u64 + 1).wrapping_mul(GOLDEN_GAMMA))),
        );
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_exact_mut(8).enumerate() {
        state = splitmix64(state.wrapping_add(i as u64));
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

pub fn stream(base_seed: u64, path: &[u64]) -> FrameRng {
    FrameRng::from_seed(derive_key(base_seed, path))
}

/// The stream for one frame of one sweep point of one policy.
pub fn frame_stream(base_seed: u64, policy: usize, point: usize, iteration: u64) -> FrameRng {
    stream(base_seed, &[policy as u64, point as u64, iteration])
}
