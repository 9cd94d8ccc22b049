//! Executable black-box demos: finding a Nash equilibrium from a single
//! query to a point-toward-equilibrium dynamic, and deciding uniqueness of
//! the equilibrium with random queries to a chamber dynamic. Both reduce
//! to the exact line solver.

use serde_json::{json, Value};

use crate::affine::{nash_on_line, AffineSubspace, LambdaSolutionSet};
use crate::dynamics::exact::{ExactType1, ExactType2};
use crate::equilibria::is_nondegenerate;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};
use crate::rational::{rat_to_string, Rat};
use crate::sampling::{rng_for, sample_profile_rational};

/// Oracle access to an opaque dynamic: a step function plus query
/// accounting. The oracle never mutates the game.
pub struct DynamicOracle {
    step: Box<dyn Fn(&MixedProfile) -> MixedProfile>,
    log: Vec<(MixedProfile, MixedProfile)>,
}

impl DynamicOracle {
    pub fn new(step: impl Fn(&MixedProfile) -> MixedProfile + 'static) -> Self {
        DynamicOracle {
            step: Box::new(step),
            log: Vec::new(),
        }
    }

    pub fn wrap_type1(dynamic: ExactType1) -> Self {
        DynamicOracle::new(move |x| dynamic.step(x))
    }

    pub fn wrap_type2(dynamic: ExactType2) -> Self {
        DynamicOracle::new(move |x| dynamic.step(x))
    }

    pub fn query(&mut self, x: &MixedProfile) -> MixedProfile {
        let y = (self.step)(x);
        self.log.push((x.clone(), y.clone()));
        y
    }

    pub fn queries(&self) -> usize {
        self.log.len()
    }

    pub fn log(&self) -> &[(MixedProfile, MixedProfile)] {
        &self.log
    }
}

/// The line through x and y, as base x with tangent direction y - x.
fn line_through(x: &MixedProfile, y: &MixedProfile) -> Result<AffineSubspace> {
    let direction: Vec<Vec<Rat>> = x
        .blocks()
        .iter()
        .zip(y.blocks())
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| v - u).collect())
        .collect();
    AffineSubspace::line(x.clone(), direction)
}

/// Find a Nash equilibrium with exactly one oracle query: the direction of
/// a genuine point-toward-equilibrium dynamic always contains its target,
/// so solving the line through x and oracle(x) must surface it.
pub fn find_nash_via_type1(game: &Game, oracle: &mut DynamicOracle) -> Result<MixedProfile> {
    let x = MixedProfile::uniform(game);
    let y = oracle.query(&x);
    if y == x {
        // The interior query point is itself a fixed point, hence an
        // equilibrium of an honest oracle; verify and return it.
        return if crate::game::is_nash(game, &x, &Rat::from_integer(0.into()))? {
            Ok(x)
        } else {
            Err(Error::OracleMismatch)
        };
    }
    let line = line_through(&x, &y)?;
    let solution = nash_on_line(game, &line)?;
    // The honest dynamic moves from x toward its target: prefer the
    // nearest solution in the forward direction, falling back to the
    // nearest behind (the full line is solved either way).
    let mut candidates: Vec<Rat> = solution
        .line_points()
        .iter()
        .filter_map(|p| p.as_rational())
        .collect();
    candidates.sort();
    let forward = candidates.iter().filter(|l| l > &&Rat::from_integer(0.into())).min();
    let chosen = forward
        .or_else(|| candidates.iter().max())
        .ok_or(Error::OracleMismatch)?;
    let blocks = line.point_at(std::slice::from_ref(chosen));
    let profile = MixedProfile::new(blocks)?;
    debug_assert!(crate::game::is_nash(game, &profile, &Rat::from_integer(0.into()))?);
    Ok(profile)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Unique,
    Multiple,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Unique => "unique",
            Verdict::Multiple => "multiple",
        }
    }
}

#[derive(Debug)]
pub struct UniquenessReport {
    pub verdict: Verdict,
    pub trials: usize,
    pub hits: usize,
    pub lines: Vec<LambdaSolutionSet>,
}

impl UniquenessReport {
    pub fn to_json(&self, spaces: &[AffineSubspace]) -> Value {
        json!({
            "verdict": self.verdict.as_str(),
            "trials": self.trials,
            "hits": self.hits,
            "lines": self.lines.iter().zip(spaces).map(|(s, sp)| s.to_json(sp)).collect::<Vec<_>>(),
        })
    }
}

/// Randomized uniqueness test: sample a point, query the chamber-dynamic
/// oracle, and solve the line through query and answer. A unique
/// equilibrium attracts every direction exactly; with several equilibria
/// the chamber interpolation bends almost every direction off all of
/// them. Majority vote over the trials.
pub fn uniqueness_test(
    game: &Game,
    oracle: &mut DynamicOracle,
    trials: usize,
    seed: u64,
) -> Result<(UniquenessReport, Vec<AffineSubspace>)> {
    if trials == 0 {
        return Err(Error::NoTrials);
    }
    if let crate::equilibria::Nondegeneracy::Degenerate { reason, .. } = is_nondegenerate(game)? {
        return Err(Error::Degenerate(reason));
    }
    let mut hits = 0;
    let mut lines = Vec::with_capacity(trials);
    let mut spaces = Vec::with_capacity(trials);
    for trial in 0..trials {
        let mut rng = rng_for(seed, trial as u64);
        let x = sample_profile_rational(game, &mut rng);
        let y = oracle.query(&x);
        let line = if y == x {
            // Sampled a fixed point of the oracle (an equilibrium when the
            // oracle is honest): any line through x carries it at zero.
            let direction: Vec<Vec<Rat>> = x
                .blocks()
                .iter()
                .enumerate()
                .map(|(p, b)| {
                    let mut d = vec![Rat::from_integer(0.into()); b.len()];
                    if p == 0 {
                        d[0] = Rat::from_integer(1.into());
                        d[1] = Rat::from_integer((-1).into());
                    }
                    d
                })
                .collect();
            AffineSubspace::line(x.clone(), direction)?
        } else {
            line_through(&x, &y)?
        };
        let solution = nash_on_line(game, &line)?;
        if !solution.is_empty() {
            hits += 1;
        }
        lines.push(solution);
        spaces.push(line);
    }
    let verdict = if 2 * hits > trials {
        Verdict::Unique
    } else {
        Verdict::Multiple
    };
    Ok((
        UniquenessReport {
            verdict,
            trials,
            hits,
            lines,
        },
        spaces,
    ))
}

pub fn describe_profile(p: &MixedProfile) -> String {
    p.blocks()
        .iter()
        .map(|b| {
            let inner: Vec<String> = b.iter().map(rat_to_string).collect();
            format!("({})", inner.join(","))
        })
        .collect::<Vec<_>>()
        .join("x")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::rational::rat;

    #[test]
    fn matching_pennies_one_query() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let mut oracle = DynamicOracle::wrap_type1(ExactType1::new(&set, 0, rat(10, 1)).unwrap());
        let found = find_nash_via_type1(&g, &mut oracle).unwrap();
        assert_eq!(found, MixedProfile::uniform(&g));
        assert_eq!(oracle.queries(), 1);
    }

    #[test]
    fn battle_of_sexes_targets_each_equilibrium() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        for target in 0..set.len() {
            let mut oracle =
                DynamicOracle::wrap_type1(ExactType1::new(&set, target, rat(10, 1)).unwrap());
            let found = find_nash_via_type1(&g, &mut oracle).unwrap();
            let expected = set.profiles().nth(target).unwrap();
            assert_eq!(found, *expected);
            assert_eq!(oracle.queries(), 1);
        }
    }

    #[test]
    fn rotated_oracle_raises_mismatch() {
        // A dishonest oracle moving only the row block: the line through
        // the (non-equilibrium) uniform query keeps the column fixed at
        // (1/2, 1/2), which no equilibrium of this game has.
        let g = battle_of_sexes();
        let mut oracle = DynamicOracle::new(|x| {
            let mut blocks: Vec<Vec<Rat>> = x.blocks().to_vec();
            let shift = rat(1, 100);
            blocks[0][0] = &blocks[0][0] + &shift;
            blocks[0][1] = &blocks[0][1] - &shift;
            MixedProfile::new(blocks).unwrap()
        });
        assert!(matches!(
            find_nash_via_type1(&g, &mut oracle),
            Err(Error::OracleMismatch)
        ));
    }

    #[test]
    fn uniqueness_verdicts() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let mut oracle = DynamicOracle::wrap_type2(
            ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 11).unwrap(),
        );
        let (report, _) = uniqueness_test(&g, &mut oracle, 20, 1).unwrap();
        assert_eq!(report.verdict, Verdict::Unique);
        assert_eq!(report.hits, 20);
        assert_eq!(oracle.queries(), 20);

        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let mut oracle = DynamicOracle::wrap_type2(
            ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 11).unwrap(),
        );
        let (report, _) = uniqueness_test(&g, &mut oracle, 20, 1).unwrap();
        assert_eq!(report.verdict, Verdict::Multiple);
        assert_eq!(report.hits, 0);
    }

    #[test]
    fn zero_trials_rejected() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let mut oracle = DynamicOracle::wrap_type2(
            ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 11).unwrap(),
        );
        assert!(matches!(
            uniqueness_test(&g, &mut oracle, 0, 1),
            Err(Error::NoTrials)
        ));
    }
}
