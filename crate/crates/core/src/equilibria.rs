//! Exact enumeration of bimatrix Nash equilibria by support scan,
//! nondegeneracy certification, and seeded random nondegenerate games.

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::game::{is_nash, Game, MixedProfile, Support};
use crate::linalg::{feasible_nonneg, solve, Solve};
use crate::rational::{rat_to_string, Rat};

/// Desk-scale cap on per-player strategy counts for the exact scans.
pub const MAX_STRATEGIES: usize = 12;

/// Denominator of the utility grid sampled by [`random_nondegenerate_game`].
pub const GRID_DENOMINATOR: i64 = 10007;

const RESAMPLE_CAP: usize = 1000;

/// All Nash equilibria of a bimatrix game, each with its support; members
/// are exact, pairwise distinct, and sorted by support then profile.
#[derive(Debug, Clone)]
pub struct EquilibriumSet {
    pub items: Vec<Equilibrium>,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equilibrium {
    pub profile: MixedProfile,
    pub support: Support,
}

impl EquilibriumSet {
    pub fn profiles(&self) -> impl Iterator<Item = &MixedProfile> {
        self.items.iter().map(|e| &e.profile)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// JSON rendering: each member carries a regret attestation, which is
    /// exact by construction.
    pub fn to_json(&self) -> Value {
        json!({
            "fingerprint": self.fingerprint,
            "equilibria": self.items.iter().map(|e| json!({
                "profile": e.profile.to_json(),
                "support": e.support.per_player(),
                "regret": "0/1",
            })).collect::<Vec<_>>(),
        })
    }
}

/// Verdict of the nondegeneracy scan; `Degenerate` carries a witness
/// profile exhibiting the coincidence.
#[derive(Debug, Clone)]
pub enum Nondegeneracy {
    Nondegenerate,
    Degenerate {
        witness: MixedProfile,
        reason: String,
    },
}

impl Nondegeneracy {
    pub fn is_nondegenerate(&self) -> bool {
        matches!(self, Nondegeneracy::Nondegenerate)
    }
}

fn check_bimatrix_scale(game: &Game) -> Result<()> {
    if game.num_players() != 2 {
        return Err(Error::Players {
            found: game.num_players(),
            context: "equilibrium enumeration is restricted to bimatrix games",
        });
    }
    if game.strategy_counts().iter().any(|&n| n > MAX_STRATEGIES) {
        return Err(Error::DeskScale(format!(
            "strategy counts must stay <= {MAX_STRATEGIES}"
        )));
    }
    Ok(())
}

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
}

/// Indifference system for one side. Unknowns are the supported
/// probabilities followed by the common payoff level; equations make every
/// opponent-support strategy achieve that level, plus the probability sum.
struct SideSystem {
    a: Vec<Vec<Rat>>,
    b: Vec<Rat>,
}

fn column_side_system(game: &Game, s1: &[usize], s2: &[usize]) -> SideSystem {
    // Unknowns: y_j for j in s2, then v. Rows: one per i in s1, plus sum.
    let mut a = Vec::with_capacity(s1.len() + 1);
    let mut b = Vec::with_capacity(s1.len() + 1);
    for &i in s1 {
        let mut row: Vec<Rat> = s2.iter().map(|&j| game.a(i, j).clone()).collect();
        row.push(-Rat::one());
        a.push(row);
        b.push(Rat::zero());
    }
    let mut sum_row = vec![Rat::one(); s2.len()];
    sum_row.push(Rat::zero());
    a.push(sum_row);
    b.push(Rat::one());
    SideSystem { a, b }
}

fn row_side_system(game: &Game, s1: &[usize], s2: &[usize]) -> SideSystem {
    // Unknowns: x_i for i in s1, then u. Rows: one per j in s2, plus sum.
    let mut a = Vec::with_capacity(s2.len() + 1);
    let mut b = Vec::with_capacity(s2.len() + 1);
    for &j in s2 {
        let mut row: Vec<Rat> = s1.iter().map(|&i| game.b(i, j).clone()).collect();
        row.push(-Rat::one());
        a.push(row);
        b.push(Rat::zero());
    }
    let mut sum_row = vec![Rat::one(); s1.len()];
    sum_row.push(Rat::zero());
    a.push(sum_row);
    b.push(Rat::one());
    SideSystem { a, b }
}

/// Expand a supported vector (plus payoff level) into a full strategy
/// vector and the level.
fn expand(support: &[usize], n: usize, solution: &[Rat]) -> (Vec<Rat>, Rat) {
    let mut full = vec![Rat::zero(); n];
    for (k, &idx) in support.iter().enumerate() {
        full[idx] = solution[k].clone();
    }
    (full, solution[support.len()].clone())
}

fn off_support_ok(payoffs: &[Rat], support: &[usize], level: &Rat) -> bool {
    payoffs
        .iter()
        .enumerate()
        .all(|(i, p)| support.contains(&i) || p <= level)
}

fn column_payoffs(game: &Game, y: &[Rat]) -> Vec<Rat> {
    (0..game.strategy_counts()[0])
        .map(|i| (0..y.len()).map(|j| game.a(i, j) * &y[j]).sum())
        .collect()
}

fn row_payoffs(game: &Game, x: &[Rat]) -> Vec<Rat> {
    (0..game.strategy_counts()[1])
        .map(|j| (0..x.len()).map(|i| game.b(i, j) * &x[i]).sum())
        .collect()
}

/// Enumerate all Nash equilibria by scanning every support pair and
/// solving the exact indifference systems. Complete for nondegenerate
/// games; for degenerate games only the isolated (uniquely determined)
/// solutions are returned.
pub fn enumerate_nash(game: &Game) -> Result<EquilibriumSet> {
    check_bimatrix_scale(game)?;
    let (n1, n2) = (game.strategy_counts()[0], game.strategy_counts()[1]);
    let mut found: Vec<Equilibrium> = Vec::new();
    for s1 in subsets(n1) {
        for s2 in subsets(n2) {
            let col = solve(&column_side_system(game, &s1, &s2).a, &column_side_system(game, &s1, &s2).b);
            let Solve::Unique(ys) = col else { continue };
            let row = solve(&row_side_system(game, &s1, &s2).a, &row_side_system(game, &s1, &s2).b);
            let Solve::Unique(xs) = row else { continue };
            let (y, v) = expand(&s2, n2, &ys);
            let (x, u) = expand(&s1, n1, &xs);
            // Strict positivity on the claimed support; boundary solutions
            // are degeneracy evidence, not equilibria of this support.
            if s2.iter().any(|&j| !y[j].is_positive()) || s1.iter().any(|&i| !x[i].is_positive()) {
                continue;
            }
            if !off_support_ok(&column_payoffs(game, &y), &s1, &v) {
                continue;
            }
            if !off_support_ok(&row_payoffs(game, &x), &s2, &u) {
                continue;
            }
            let profile = MixedProfile::new(vec![x, y])?;
            let support = profile.support();
            if !found.iter().any(|e| e.profile == profile) {
                found.push(Equilibrium { profile, support });
            }
        }
    }
    found.sort_by(|a, b| {
        a.support
            .cmp(&b.support)
            .then_with(|| a.profile.cmp(&b.profile))
    });
    debug_assert!(found
        .iter()
        .all(|e| is_nash(game, &e.profile, &Rat::zero()).unwrap()));
    Ok(EquilibriumSet {
        items: found,
        fingerprint: game.fingerprint(),
    })
}

/// Test nondegeneracy: no solution of any support-pair indifference system
/// that lies in the profile space may have more pure best responses than
/// the standard count allows, no such solution may sit on the boundary of
/// its claimed support, and no feasible indifference system may be rank
/// deficient. Returns a witness profile on failure.
pub fn is_nondegenerate(game: &Game) -> Result<Nondegeneracy> {
    check_bimatrix_scale(game)?;
    let (n1, n2) = (game.strategy_counts()[0], game.strategy_counts()[1]);
    for s1 in subsets(n1) {
        for s2 in subsets(n2) {
            let col_sys = column_side_system(game, &s1, &s2);
            let row_sys = row_side_system(game, &s1, &s2);
            let col = solve(&col_sys.a, &col_sys.b);
            let row = solve(&row_sys.a, &row_sys.b);

            let col_point = side_point(&col, &s2, n2);
            let row_point = side_point(&row, &s1, n1);
            let (Some((y, _v, col_unique)), Some((x, _u, row_unique))) = (col_point, row_point)
            else {
                continue; // this support pair has no solution in the simplex
            };

            let witness = || MixedProfile::new(vec![x.clone(), y.clone()]);
            if !(col_unique && row_unique) {
                // A consistent, feasible, rank-deficient indifference system
                // is a numerical coincidence in the utilities.
                return Ok(Nondegeneracy::Degenerate {
                    witness: witness()?,
                    reason: format!(
                        "support pair ({s1:?}, {s2:?}) admits a continuum of indifference solutions"
                    ),
                });
            }
            if s2.iter().any(|&j| y[j].is_zero()) || s1.iter().any(|&i| x[i].is_zero()) {
                return Ok(Nondegeneracy::Degenerate {
                    witness: witness()?,
                    reason: format!(
                        "support pair ({s1:?}, {s2:?}) solution sits on the boundary of its support"
                    ),
                });
            }
            // Best-response counts against actual supports.
            let col_best = best_response_count(&column_payoffs(game, &y));
            let supp_y = y.iter().filter(|p| p.is_positive()).count();
            if col_best > supp_y {
                return Ok(Nondegeneracy::Degenerate {
                    witness: witness()?,
                    reason: format!(
                        "column mix from support pair ({s1:?}, {s2:?}) leaves {col_best} pure best responses against support size {supp_y}"
                    ),
                });
            }
            let row_best = best_response_count(&row_payoffs(game, &x));
            let supp_x = x.iter().filter(|p| p.is_positive()).count();
            if row_best > supp_x {
                return Ok(Nondegeneracy::Degenerate {
                    witness: witness()?,
                    reason: format!(
                        "row mix from support pair ({s1:?}, {s2:?}) leaves {row_best} pure best responses against support size {supp_x}"
                    ),
                });
            }
        }
    }
    Ok(Nondegeneracy::Nondegenerate)
}

/// Extract a solution point of one side system lying in the simplex face,
/// together with uniqueness. `None` when no such point exists.
fn side_point(outcome: &Solve, support: &[usize], n: usize) -> Option<(Vec<Rat>, Rat, bool)> {
    match outcome {
        Solve::Inconsistent => None,
        Solve::Unique(sol) => {
            let (full, level) = expand(support, n, sol);
            full.iter().all(|p| !p.is_negative()).then_some((full, level, true))
        }
        Solve::Underdetermined {
            particular,
            nullspace,
        } => {
            // Probabilities must be nonnegative; the payoff level is free.
            let mut nonneg = vec![true; support.len() + 1];
            nonneg[support.len()] = false;
            let point = feasible_nonneg(particular, nullspace, &nonneg)?;
            let (full, level) = expand(support, n, &point);
            Some((full, level, false))
        }
    }
}

fn best_response_count(payoffs: &[Rat]) -> usize {
    let best = payoffs.iter().max().expect("nonempty");
    payoffs.iter().filter(|p| *p == best).count()
}

/// Sample a game with utilities uniform on the grid {0, 1/D, ..., 1},
/// D = 10007, resampling until the nondegeneracy scan passes.
/// Deterministic for a given seed.
pub fn random_nondegenerate_game(n1: usize, n2: usize, seed: u64) -> Result<Game> {
    if !(2..=MAX_STRATEGIES).contains(&n1) || !(2..=MAX_STRATEGIES).contains(&n2) {
        return Err(Error::DeskScale(format!(
            "strategy counts must lie in 2..={MAX_STRATEGIES}"
        )));
    }
    for attempt in 0..RESAMPLE_CAP {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(attempt as u64);
        let game = random_game_on_grid(n1, n2, &mut rng)?;
        if is_nondegenerate(&game)?.is_nondegenerate() {
            return Ok(game);
        }
    }
    Err(Error::ResampleCap(RESAMPLE_CAP))
}

fn random_game_on_grid(n1: usize, n2: usize, rng: &mut ChaCha20Rng) -> Result<Game> {
    let mut tensor = || -> Vec<Vec<Rat>> {
        (0..n1)
            .map(|_| {
                (0..n2)
                    .map(|_| {
                        let num = rng.gen_range(0..=GRID_DENOMINATOR);
                        Rat::new(num.into(), GRID_DENOMINATOR.into())
                    })
                    .collect()
            })
            .collect()
    };
    let a = tensor();
    let b = tensor();
    Game::bimatrix(a, b)
}

pub fn equilibrium_set_to_string(set: &EquilibriumSet) -> String {
    set.items
        .iter()
        .map(|e| {
            let coords: Vec<String> = e
                .profile
                .blocks()
                .iter()
                .map(|b| {
                    let inner: Vec<String> = b.iter().map(rat_to_string).collect();
                    format!("({})", inner.join(", "))
                })
                .collect();
            coords.join(" x ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin::*;
    use crate::game::regret;
    use crate::rational::rat;

    #[test]
    fn matching_pennies_unique_mixed() {
        let set = enumerate_nash(&matching_pennies()).unwrap();
        assert_eq!(set.len(), 1);
        let expected = MixedProfile::uniform(&matching_pennies());
        assert_eq!(set.items[0].profile, expected);
    }

    #[test]
    fn battle_of_sexes_three_equilibria() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        assert_eq!(set.len(), 3);
        let mixed = MixedProfile::new(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        assert!(set.profiles().any(|p| *p == mixed));
        assert!(set
            .profiles()
            .any(|p| *p == MixedProfile::pure(&g, &[0, 0]).unwrap()));
        assert!(set
            .profiles()
            .any(|p| *p == MixedProfile::pure(&g, &[1, 1]).unwrap()));
        for p in set.profiles() {
            assert!(regret(&g, p).unwrap().is_zero());
        }
    }

    #[test]
    fn dominant_strategies_single_pure() {
        // Row 0 and column 0 strictly dominant for both players.
        let g = Game::bimatrix(
            vec![vec![rat(1, 1), rat(3, 4)], vec![rat(1, 2), rat(1, 4)]],
            vec![vec![rat(1, 1), rat(1, 2)], vec![rat(3, 4), rat(1, 4)]],
        )
        .unwrap();
        let set = enumerate_nash(&g).unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.items[0].profile, MixedProfile::pure(&g, &[0, 0]).unwrap());
    }

    #[test]
    fn nondegeneracy_verdicts() {
        assert!(is_nondegenerate(&matching_pennies())
            .unwrap()
            .is_nondegenerate());
        assert!(is_nondegenerate(&battle_of_sexes())
            .unwrap()
            .is_nondegenerate());
        match is_nondegenerate(&degenerate_2x2()).unwrap() {
            Nondegeneracy::Degenerate { witness, .. } => {
                // Witness exhibits a column mix making both rows best.
                assert!(witness.matches(&degenerate_2x2()));
            }
            Nondegeneracy::Nondegenerate => panic!("constant rows must be degenerate"),
        }
    }

    #[test]
    fn random_game_deterministic_and_certified() {
        let g1 = random_nondegenerate_game(2, 2, 1).unwrap();
        let g2 = random_nondegenerate_game(2, 2, 1).unwrap();
        assert_eq!(g1, g2);
        assert!(is_nondegenerate(&g1).unwrap().is_nondegenerate());
    }

    #[test]
    fn oddness_small_panel() {
        for seed in 0..25 {
            let g = random_nondegenerate_game(3, 3, 1000 + seed).unwrap();
            let count = enumerate_nash(&g).unwrap().len();
            assert_eq!(count % 2, 1, "seed {seed} produced {count} equilibria");
        }
    }

    #[test]
    fn enumeration_rejects_three_players() {
        let t = vec![rat(1, 2); 8];
        let g = Game::new(vec![2, 2, 2], vec![t.clone(), t.clone(), t]).unwrap();
        assert!(matches!(enumerate_nash(&g), Err(Error::Players { .. })));
    }
}
