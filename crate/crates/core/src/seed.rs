//! Seed derivation for independent, reproducible substreams.

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of substream `index` under `master`. Substreams depend only on their
/// own index, so growing a trial count never reshuffles earlier trials.
#[inline]
pub fn substream(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ mix(index.wrapping_add(0x632b_e59b_d9b4_e019)))
}
