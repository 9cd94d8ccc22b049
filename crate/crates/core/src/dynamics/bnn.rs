//! The Brown–von Neumann–Nash field: probability mass flows toward
//! strategies with above-average payoff. Per strategy a of player i,
//!
//!   field(x)_i^a = [u_i(a, x_-i) - ubar_i(x)]_+
//!                  - x_i^a * sum_b [u_i(b, x_-i) - ubar_i(x)]_+
//!
//! Each player block sums to zero and the field vanishes exactly at the
//! Nash equilibria. The discrete step x + eta * field is known to cycle
//! rather than converge on zero-sum games.

use num_traits::{Signed, Zero};

use crate::dynamics::DiscreteDynamic;
use crate::game::{
    expected_utility, expected_utility_f64, pure_deviation_payoff, pure_deviation_payoff_f64,
    FloatProfile, Game, MixedProfile,
};
use crate::rational::Rat;

/// Float-mode field, the form used by trajectory simulation and the
/// proving-game responder. Summation order is fixed so replays are
/// bit-identical.
pub fn bnn_field(game: &Game, x: &FloatProfile) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(game.num_players());
    for player in 0..game.num_players() {
        let avg = expected_utility_f64(game, x, player);
        let n = game.strategy_counts()[player];
        let excess: Vec<f64> = (0..n)
            .map(|s| (pure_deviation_payoff_f64(game, x, player, s) - avg).max(0.0))
            .collect();
        let total: f64 = excess.iter().sum();
        out.push(
            (0..n)
                .map(|s| excess[s] - x.prob(player, s) * total)
                .collect(),
        );
    }
    out
}

/// Exact-rational field; zero exactly at the Nash equilibria.
pub fn bnn_field_exact(game: &Game, x: &MixedProfile) -> crate::error::Result<Vec<Vec<Rat>>> {
    let mut out = Vec::with_capacity(game.num_players());
    for player in 0..game.num_players() {
        let avg = expected_utility(game, x, player)?;
        let n = game.strategy_counts()[player];
        let mut excess = Vec::with_capacity(n);
        for s in 0..n {
            let gain = pure_deviation_payoff(game, x, player, s)? - &avg;
            excess.push(if gain.is_positive() { gain } else { Rat::zero() });
        }
        let total: Rat = excess.iter().cloned().sum();
        out.push(
            (0..n)
                .map(|s| &excess[s] - x.prob(player, s) * &total)
                .collect(),
        );
    }
    Ok(out)
}

/// Forward-Euler step x + eta * field, projected back onto the profile
/// space in the rare case a coordinate turns negative.
pub fn bnn_step(game: &Game, x: &FloatProfile, eta: f64) -> FloatProfile {
    let field = bnn_field(game, x);
    let blocks: Vec<Vec<f64>> = x
        .blocks()
        .iter()
        .zip(&field)
        .map(|(b, f)| b.iter().zip(f).map(|(v, d)| v + eta * d).collect())
        .collect();
    FloatProfile::from_blocks_unchecked(blocks).project()
}

pub struct BnnDynamic<'g> {
    pub game: &'g Game,
    pub eta: f64,
}

impl DiscreteDynamic for BnnDynamic<'_> {
    fn step(&self, x: &FloatProfile) -> FloatProfile {
        bnn_step(self.game, x, self.eta)
    }

    fn name(&self) -> &'static str {
        "bnn"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_trajectory, Termination};
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::game::regret_f64;
    use crate::sampling::{rng_for, sample_profile};

    #[test]
    fn zero_field_at_uniform_matching_pennies() {
        let g = matching_pennies();
        let f = bnn_field(&g, &FloatProfile::uniform(&g));
        assert!(f.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn corner_field_hand_value() {
        let g = matching_pennies();
        let x = FloatProfile::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let f = bnn_field(&g, &x);
        // Player 2's strategy 2 has excess 1; mass 1 leaves strategy 1.
        assert_eq!(f[0], vec![0.0, 0.0]);
        assert_eq!(f[1], vec![-1.0, 1.0]);
        let next = bnn_step(&g, &x, 0.1);
        assert_eq!(next.blocks()[1], vec![0.9, 0.1]);
        assert_eq!(next.blocks()[0], vec![1.0, 0.0]);
    }

    #[test]
    fn exact_field_vanishes_exactly_at_equilibria() {
        for g in [matching_pennies(), battle_of_sexes()] {
            let set = enumerate_nash(&g).unwrap();
            for e in set.profiles() {
                let f = bnn_field_exact(&g, e).unwrap();
                assert!(f.iter().flatten().all(Rat::is_zero));
            }
        }
    }

    #[test]
    fn block_sums_vanish() {
        let g = battle_of_sexes();
        let mut rng = rng_for(8, 0);
        for _ in 0..100 {
            let x = sample_profile(&g, &mut rng);
            for b in bnn_field(&g, &x) {
                assert!(b.iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn nonzero_away_from_equilibria() {
        let g = battle_of_sexes();
        let mut rng = rng_for(9, 0);
        for _ in 0..200 {
            let x = sample_profile(&g, &mut rng);
            if regret_f64(&g, &x) > 1e-2 {
                let norm: f64 = bnn_field(&g, &x)
                    .iter()
                    .flatten()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                assert!(norm > 1e-9);
            }
        }
    }

    #[test]
    fn cycles_on_matching_pennies() {
        let g = matching_pennies();
        let dynamic = BnnDynamic {
            game: &g,
            eta: 0.01,
        };
        let x0 = FloatProfile::new(vec![vec![0.9, 0.1], vec![0.8, 0.2]]).unwrap();
        let t = run_trajectory(&dynamic, None, &x0, 1e-9, 100_000).unwrap();
        assert_eq!(t.termination, Termination::StepLimit);
    }

    #[test]
    fn small_eta_limit_matches_field() {
        let g = battle_of_sexes();
        let x = FloatProfile::new(vec![vec![0.3, 0.7], vec![0.6, 0.4]]).unwrap();
        let eta = 1e-8;
        let next = bnn_step(&g, &x, eta);
        let field = bnn_field(&g, &x);
        for ((n, xv), f) in next.coords().zip(x.coords()).zip(field.iter().flatten()) {
            assert!(((n - xv) / eta - f).abs() < 1e-6);
        }
    }
}
