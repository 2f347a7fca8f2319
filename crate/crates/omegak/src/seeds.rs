//! Deterministic seed derivation.
//!
//! Every sampler in this crate takes an explicit seed. Experiments that
//! need several independent streams derive them from one root seed with
//! the splitters below, so each stream is reproducible on its own.

/// Derive a child seed from a root seed and a textual label.
pub fn split(seed: u64, label: &str) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    for b in label.bytes() {
        h = (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix(h)
}

/// Derive the seed of the `index`-th item in a stream.
pub fn split_index(seed: u64, index: u64) -> u64 {
    mix(seed ^ index.wrapping_mul(0xa076_1d64_78bd_642f))
}

// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
