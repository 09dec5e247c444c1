//! Counter-based seeding and low-discrepancy sequences.
//!
//! Every stochastic evaluation derives its own stream from
//! `(global seed, stage, point index)`, so batch results do not depend on
//! scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a global seed with two counters into a stream seed.
pub fn stream_seed(global: u64, stage: u64, point: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(global) ^ stage) ^ point.rotate_left(17))
}

pub fn stream_rng(global: u64, stage: u64, point: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(stream_seed(global, stage, point))
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % b) as f64;
        index /= b;
        f *= inv;
    }
    r
}

/// Halton point `index` in `[0, 1)^dim`. Dimensions beyond the prime table
/// are not supported.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton sequence supports up to {} dims", PRIMES.len());
    PRIMES[..dim].iter().map(|&p| radical_inverse(index, p)).collect()
}

pub const MAX_HALTON_DIM: usize = PRIMES.len();

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radical_inverse_base2() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(2, 2), 0.25);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn seeds_differ_by_counter() {
        let a = stream_seed(7, 1, 2);
        assert_ne!(a, stream_seed(7, 2, 1));
        assert_ne!(a, stream_seed(8, 1, 2));
        assert_eq!(a, stream_seed(7, 1, 2));
    }
}
