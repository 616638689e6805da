//! Reproducible random streams.
//!
//! Every episode draws from its own ChaCha20 stream: the dataset seed (mixed
//! with the task name) selects the key and the episode index selects the
//! stream. All draws go through `u32` ranges or 53-bit floats so sequences do
//! not depend on the platform's pointer width.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type EpisodeRng = ChaCha20Rng;

/// Independent stream `episode_index` of the generator keyed by `seed`.
pub fn derive_rng(seed: u64, episode_index: u64) -> EpisodeRng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(episode_index);
    rng
}

/// Seed for the streams of one task: distinct tasks never share streams.
pub fn task_seed(seed: u64, task: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(task.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

/// Uniform index in `0..n`. Panics if `n == 0`.
pub fn pick<R: Rng + ?Sized>(rng: &mut R, n: usize) -> usize {
    assert!(n > 0, "pick from empty range");
    rng.random_range(0..n as u32) as usize
}

/// Uniform element of a non-empty slice.
pub fn choose<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    &items[pick(rng, items.len())]
}

/// Uniform integer in `lo..=hi`.
pub fn between<R: Rng + ?Sized>(rng: &mut R, lo: usize, hi: usize) -> usize {
    lo + pick(rng, hi - lo + 1)
}

/// Uniform float in `[lo, hi)`.
pub fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Bernoulli draw with probability `p`.
pub fn coin<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = (0..64)
            .map({
                let mut r = derive_rng(9, 3);
                move |_| r.next_u64()
            })
            .collect();
        let b: Vec<u64> = (0..64)
            .map({
                let mut r = derive_rng(9, 3);
                move |_| r.next_u64()
            })
            .collect();
        assert_eq!(a, b);
    }

    #[test]
    fn neighbouring_indices_differ() {
        let mut r0 = derive_rng(1, 0);
        let mut r1 = derive_rng(1, 1);
        let same = (0..10_000).filter(|_| r0.next_u64() == r1.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn golden_draws() {
        let mut r = derive_rng(42, 7);
        let draws: Vec<u64> = (0..100).map(|_| r.next_u64()).collect();
        let mut h = Sha256::new();
        for d in &draws {
            h.update(d.to_le_bytes());
        }
        let hex: String = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(draws[0], GOLDEN_FIRST, "first");
        assert_eq!(hex, GOLDEN_SHA256);
    }

    // Cross-checked against a from-scratch ChaCha20 + PCG32 seed expansion.
    const GOLDEN_FIRST: u64 = 1168684908879833857;
    const GOLDEN_SHA256: &str = "9f0f027e9280a5dadc579088d002327bad3827fb4b45904d6e49753d8c50977e";

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(0, "Exist"), task_seed(0, "ExistColor"));
        assert_eq!(task_seed(5, "Go"), task_seed(5, "Go"));
    }
}
