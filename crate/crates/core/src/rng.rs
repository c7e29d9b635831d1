//! Seeded randomness.
//!
//! Every random stream in the crate is a ChaCha8 generator seeded through
//! [`rng_from_seed`]. Sub-streams (per trial, per worker chunk, per level) are
//! derived with [`derive_seed`], so results never depend on scheduling or on
//! the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::PrimeField;

pub type LabRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the sub-stream identified by `tags` under `seed`.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(mix(seed), |acc, &t| mix(acc ^ mix(t)))
}

pub fn sub_rng(seed: u64, tags: &[u64]) -> LabRng {
    rng_from_seed(derive_seed(seed, tags))
}

pub fn random_scalar(rng: &mut LabRng, field: PrimeField) -> u32 {
    rng.random_range(0..field.p())
}

pub fn random_nonzero(rng: &mut LabRng, field: PrimeField) -> u32 {
    rng.random_range(1..field.p())
}

pub fn random_vector(rng: &mut LabRng, field: PrimeField, n: usize) -> Vec<u32> {
    (0..n).map(|_| random_scalar(rng, field)).collect()
}

pub fn random_nonzero_vector(rng: &mut LabRng, field: PrimeField, n: usize) -> Vec<u32> {
    loop {
        let v = random_vector(rng, field, n);
        if v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let f = PrimeField::new(101).unwrap();
        let a = random_vector(&mut sub_rng(7, &[1, 2]), f, 16);
        let b = random_vector(&mut sub_rng(7, &[1, 2]), f, 16);
        let c = random_vector(&mut sub_rng(7, &[2, 1]), f, 16);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn derive_seed_is_frozen() {
        // the state-transition function is part of the reproducibility contract
        assert_eq!(derive_seed(0, &[]), mix(0));
        assert_eq!(mix(0), 0xe220_a839_7b1d_cdaf);
    }
}
