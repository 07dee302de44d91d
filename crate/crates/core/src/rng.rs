//! Seed derivation for reproducible, partition-independent randomness.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and a key path.
pub fn derive_seed(base: u64, key: &[u64]) -> u64 {
    key.iter().fold(mix(base), |acc, &k| mix(acc ^ mix(k)))
}
