//! Seeded sampling on the profile space. All randomness flows through
//! ChaCha20 streams keyed by a single 64-bit seed, so every artifact is
//! reproducible across platforms.

use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::game::{FloatProfile, Game, MixedProfile};
use crate::rational::Rat;

/// Name recorded in run manifests for provenance.
pub const GENERATOR_NAME: &str = "chacha20";

pub fn rng_for(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform profile sample: per-player Dirichlet(1,...,1) via exponential
/// spacings.
pub fn sample_profile(game: &Game, rng: &mut ChaCha20Rng) -> FloatProfile {
    let blocks = game
        .strategy_counts()
        .iter()
        .map(|&n| {
            let mut e: Vec<f64> = (0..n)
                .map(|_| {
                    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                    -u.ln()
                })
                .collect();
            let total: f64 = e.iter().sum();
            for v in &mut e {
                *v /= total;
            }
            e
        })
        .collect();
    FloatProfile::new(blocks).expect("exponential spacings stay in the simplex")
}

/// Denominator of the rational grid used when an exact sample is needed.
const RATIONAL_GRID: i64 = 1 << 31;

/// Near-uniform exact sample: the Dirichlet draw snapped to the grid
/// 1/2^31 with the largest coordinate absorbing the rounding slack, so
/// every coordinate stays strictly positive and block sums are exactly 1.
pub fn sample_profile_rational(game: &Game, rng: &mut ChaCha20Rng) -> MixedProfile {
    let float = sample_profile(game, rng);
    let blocks = float
        .blocks()
        .iter()
        .map(|b| {
            let mut nums: Vec<i64> = b
                .iter()
                .map(|&v| ((v * RATIONAL_GRID as f64).round() as i64).max(1))
                .collect();
            let total: i64 = nums.iter().sum();
            let imax = (0..nums.len())
                .max_by_key(|&i| nums[i])
                .expect("nonempty block");
            nums[imax] += RATIONAL_GRID - total;
            debug_assert!(nums[imax] > 0);
            nums.into_iter()
                .map(|n| Rat::new(BigInt::from(n), BigInt::from(RATIONAL_GRID)))
                .collect()
        })
        .collect();
    MixedProfile::new(blocks).expect("grid snap preserves the simplex")
}

/// A unit vector of the per-player zero-sum subspace (each block sums to
/// zero): the tangent directions along which profiles may move.
pub fn sample_tangent_unit(game: &Game, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    loop {
        let mut blocks: Vec<Vec<f64>> = game
            .strategy_counts()
            .iter()
            .map(|&n| (0..n).map(|_| standard_normal(rng)).collect())
            .collect();
        for b in &mut blocks {
            let mean: f64 = b.iter().sum::<f64>() / b.len() as f64;
            for v in b.iter_mut() {
                *v -= mean;
            }
        }
        let norm: f64 = blocks
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        if norm > 1e-9 {
            for b in &mut blocks {
                for v in b.iter_mut() {
                    *v /= norm;
                }
            }
            return blocks;
        }
    }
}

/// Exact tangent direction on a small integer grid, block sums exactly 0.
pub fn sample_tangent_rational(game: &Game, rng: &mut ChaCha20Rng) -> Vec<Vec<Rat>> {
    const SPAN: i64 = 1000;
    loop {
        let raw: Vec<Vec<i64>> = game
            .strategy_counts()
            .iter()
            .map(|&n| (0..n).map(|_| rng.gen_range(-SPAN..=SPAN)).collect())
            .collect();
        // Zero-sum each block exactly: multiply by block length, subtract sum.
        let blocks: Vec<Vec<Rat>> = raw
            .iter()
            .map(|b| {
                let n = b.len() as i64;
                let total: i64 = b.iter().sum();
                b.iter()
                    .map(|&v| Rat::new(BigInt::from(v * n - total), BigInt::from(n)))
                    .collect()
            })
            .collect();
        if blocks.iter().flatten().any(|v| !num_traits::Zero::is_zero(v)) {
            return blocks;
        }
    }
}

fn standard_normal(rng: &mut ChaCha20Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin::matching_pennies;
    use num_traits::{One, Zero};

    #[test]
    fn float_samples_live_in_domain_and_replay() {
        let g = matching_pennies();
        let mut a = rng_for(7, 0);
        let mut b = rng_for(7, 0);
        for _ in 0..100 {
            let x = sample_profile(&g, &mut a);
            let y = sample_profile(&g, &mut b);
            assert_eq!(x, y);
            assert!(x.in_domain(1e-12));
        }
    }

    #[test]
    fn rational_samples_sum_exactly() {
        let g = matching_pennies();
        let mut rng = rng_for(3, 1);
        for _ in 0..50 {
            let x = sample_profile_rational(&g, &mut rng);
            for b in x.blocks() {
                let total: Rat = b.iter().cloned().sum();
                assert!(total.is_one());
                assert!(b.iter().all(|v| v > &Rat::zero()));
            }
        }
    }

    #[test]
    fn tangent_blocks_sum_to_zero() {
        let g = matching_pennies();
        let mut rng = rng_for(11, 2);
        let w = sample_tangent_unit(&g, &mut rng);
        for b in &w {
            assert!(b.iter().sum::<f64>().abs() < 1e-12);
        }
        let wr = sample_tangent_rational(&g, &mut rng);
        for b in &wr {
            let total: Rat = b.iter().cloned().sum();
            assert!(total.is_zero());
        }
    }
}
