//! Seed derivation. Every random draw in the crate descends from one root
//! seed through [`derive_seed`], so a single trial can be replayed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over the label bytes.
fn label_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// `splitmix(splitmix(splitmix(root ^ fnv(label)) ^ a) ^ b)`.
///
/// `label` names the suite, `a` is usually a density index and `b` a trial
/// index.
pub fn derive_seed(root: u64, label: &str, a: u64, b: u64) -> u64 {
    let s = splitmix64(root ^ label_hash(label));
    let s = splitmix64(s ^ a);
    splitmix64(s ^ b)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
