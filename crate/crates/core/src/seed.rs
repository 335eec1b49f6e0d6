//! Seed derivation so every sample can be produced independently of
//! scheduling order.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer; a bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive hash of a word sequence. For a fixed prefix, the map
/// from the last word to the output is a bijection.
pub fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(GOLDEN_GAMMA, |h, &p| {
        mix64(h.wrapping_add(GOLDEN_GAMMA) ^ p)
    })
}

pub fn derive_sample_seed(
    master_seed: u64,
    identity_id: u32,
    grid_index: u64,
    background_id: u32,
) -> u64 {
    let packed = (u64::from(identity_id) << 32) | u64::from(background_id);
    mix(&[master_seed, grid_index, packed])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn fixed_inputs_fixed_output() {
        let s = derive_sample_seed(42, 3, 17, 9);
        assert_eq!(s, derive_sample_seed(42, 3, 17, 9));
        // frozen so accidental changes to the mixing are caught
        assert_eq!(s, 0x52a4_b0ad_e257_897f);
        assert_eq!(mix64(0), 0);
    }

    #[test]
    fn background_alone_changes_seed() {
        let base = derive_sample_seed(7, 1, 2, 3);
        for bg in [0, 4, 1000, u32::MAX] {
            assert_ne!(base, derive_sample_seed(7, 1, 2, bg));
        }
    }

    #[test]
    fn no_collisions_over_a_million_tuples() {
        let mut seen = HashSet::with_capacity(1_000_000);
        for id in 0..100u32 {
            for grid in 0..200u64 {
                for bg in 0..50u32 {
                    assert!(seen.insert(derive_sample_seed(2024, id, grid, bg)));
                }
            }
        }
        assert_eq!(seen.len(), 1_000_000);
    }
}
