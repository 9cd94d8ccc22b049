//! Prover strategies for the proving game. All are deterministic given
//! their configuration; the budget is the only resource limit enforced.

use crate::equilibria::enumerate_nash;
use crate::game::{regret_f64, FloatProfile, Game};
use crate::pg::Round;
use crate::sampling::{rng_for, sample_profile};

pub trait BobStrategy {
    /// Next query given the transcript so far; `None` stops early.
    fn next_query(&mut self, game: &Game, history: &[Round]) -> Option<FloatProfile>;
    /// Claimed approximate equilibrium after the rounds.
    fn final_answer(&mut self, game: &Game, history: &[Round]) -> FloatProfile;
    fn name(&self) -> &'static str;
}

/// Lowest-regret probe among the queries, uniform when there were none.
fn best_probe(game: &Game, history: &[Round]) -> FloatProfile {
    history
        .iter()
        .map(|r| &r.query)
        .min_by(|a, b| {
            regret_f64(game, a)
                .partial_cmp(&regret_f64(game, b))
                .expect("finite regret")
        })
        .cloned()
        .unwrap_or_else(|| FloatProfile::uniform(game))
}

/// Probes an offset lattice over the profile space: per-player simplex
/// grids with half-integer weights, so no probe lands on a coordinate
/// rational with a small denominator.
pub struct GridBob {
    points: Option<Vec<FloatProfile>>,
    cursor: usize,
}

impl GridBob {
    pub fn new() -> Self {
        GridBob {
            points: None,
            cursor: 0,
        }
    }

    fn lattice(game: &Game, at_least: usize) -> Vec<FloatProfile> {
        // Grow the per-player resolution until the product covers the
        // budget (capped; the budget is desk scale).
        for g in 1..=64usize {
            let per_player: Vec<Vec<Vec<f64>>> = game
                .strategy_counts()
                .iter()
                .map(|&n| {
                    compositions(g, n)
                        .into_iter()
                        .map(|c| {
                            let total = g as f64 + n as f64 / 2.0;
                            c.iter().map(|&a| (a as f64 + 0.5) / total).collect()
                        })
                        .collect()
                })
                .collect();
            let count: usize = per_player.iter().map(Vec::len).product();
            if count < at_least && g < 64 {
                continue;
            }
            let mut out = Vec::with_capacity(count);
            cartesian(&per_player, &mut vec![], &mut out);
            return out;
        }
        unreachable!("lattice growth is bounded")
    }
}

impl Default for GridBob {
    fn default() -> Self {
        GridBob::new()
    }
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            let mut c = vec![first];
            c.append(&mut rest);
            out.push(c);
        }
    }
    out
}

fn cartesian(per_player: &[Vec<Vec<f64>>], prefix: &mut Vec<Vec<f64>>, out: &mut Vec<FloatProfile>) {
    if prefix.len() == per_player.len() {
        out.push(FloatProfile::new(prefix.clone()).expect("lattice point in simplex"));
        return;
    }
    for block in &per_player[prefix.len()] {
        prefix.push(block.clone());
        cartesian(per_player, prefix, out);
        prefix.pop();
    }
}

impl BobStrategy for GridBob {
    fn next_query(&mut self, game: &Game, history: &[Round]) -> Option<FloatProfile> {
        if self.points.is_none() {
            // The lattice needs a size hint; use the history capacity via
            // a generous default (the budget caps the rounds anyway).
            self.points = Some(Self::lattice(game, (history.len() + 1).max(32)));
        }
        let points = self.points.as_ref().expect("built above");
        let p = points.get(self.cursor).cloned();
        self.cursor += 1;
        p
    }

    fn final_answer(&mut self, game: &Game, history: &[Round]) -> FloatProfile {
        best_probe(game, history)
    }

    fn name(&self) -> &'static str {
        "grid"
    }
}

/// Seeded uniform probes.
pub struct RandomBob {
    seed: u64,
    round: u64,
}

impl RandomBob {
    pub fn new(seed: u64) -> Self {
        RandomBob { seed, round: 0 }
    }
}

impl BobStrategy for RandomBob {
    fn next_query(&mut self, game: &Game, _history: &[Round]) -> Option<FloatProfile> {
        let mut rng = rng_for(self.seed, self.round);
        self.round += 1;
        Some(sample_profile(game, &mut rng))
    }

    fn final_answer(&mut self, game: &Game, history: &[Round]) -> FloatProfile {
        best_probe(game, history)
    }

    fn name(&self) -> &'static str {
        "random"
    }
}

/// Computes the answer offline with the exact enumerator — the run a
/// polynomially bounded prover cannot reproduce at scale, but a valid
/// claim always wins the run.
pub struct CheatBob;

impl BobStrategy for CheatBob {
    fn next_query(&mut self, _game: &Game, _history: &[Round]) -> Option<FloatProfile> {
        None
    }

    fn final_answer(&mut self, game: &Game, _history: &[Round]) -> FloatProfile {
        enumerate_nash(game)
            .ok()
            .and_then(|set| set.profiles().next().map(|p| p.to_float()))
            .unwrap_or_else(|| FloatProfile::uniform(game))
    }

    fn name(&self) -> &'static str {
        "cheat"
    }
}

pub fn bob_by_name(name: &str, seed: u64) -> Option<Box<dyn BobStrategy>> {
    match name {
        "grid" => Some(Box::new(GridBob::new())),
        "random" => Some(Box::new(RandomBob::new(seed))),
        "cheat" => Some(Box::new(CheatBob)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin::battle_of_sexes;

    #[test]
    fn grid_bob_is_deterministic_and_interior() {
        let g = battle_of_sexes();
        let mut a = GridBob::new();
        let mut b = GridBob::new();
        for _ in 0..6 {
            let qa = a.next_query(&g, &[]).unwrap();
            let qb = b.next_query(&g, &[]).unwrap();
            assert_eq!(qa, qb);
            assert!(qa.coords().all(|c| c > 0.0 && c < 1.0));
        }
    }

    #[test]
    fn random_bob_replays() {
        let g = battle_of_sexes();
        let mut a = RandomBob::new(5);
        let mut b = RandomBob::new(5);
        for _ in 0..4 {
            assert_eq!(a.next_query(&g, &[]), b.next_query(&g, &[]));
        }
    }
}
