//! Finite normal-form games with exact rational utilities, mixed profiles
//! in both numeric modes, expected utilities, deviation payoffs, and the
//! regret-based approximate-equilibrium test.

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::rational::{parse_rat, rat_to_f64, rat_to_string, Rat};

pub const MAX_PLAYERS: usize = 3;

/// A finite normal-form game. Utilities are exact rationals in [0,1],
/// one `p`-dimensional tensor per player, stored flat in row-major order
/// (player 1's strategy index outermost). Immutable after construction.
#[derive(Debug, Clone)]
pub struct Game {
    strategy_counts: Vec<usize>,
    utilities: Vec<Vec<Rat>>,
    utilities_f64: Vec<Vec<f64>>,
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        // The f64 mirror is derived from the exact tensors.
        self.strategy_counts == other.strategy_counts && self.utilities == other.utilities
    }
}

impl Eq for Game {}

impl Game {
    pub fn new(strategy_counts: Vec<usize>, utilities: Vec<Vec<Rat>>) -> Result<Self> {
        let p = strategy_counts.len();
        if p < 2 || p > MAX_PLAYERS {
            return Err(Error::Players {
                found: p,
                context: "games must have 2 or 3 players",
            });
        }
        if strategy_counts.iter().any(|&n| n < 2) {
            return Err(Error::Malformed(
                "every player needs at least 2 strategies".into(),
            ));
        }
        if utilities.len() != p {
            return Err(Error::Dimension(format!(
                "expected {} utility tensors, got {}",
                p,
                utilities.len()
            )));
        }
        let cells: usize = strategy_counts.iter().product();
        for (i, t) in utilities.iter().enumerate() {
            if t.len() != cells {
                return Err(Error::Dimension(format!(
                    "tensor for player {} has {} entries, expected {}",
                    i,
                    t.len(),
                    cells
                )));
            }
            for v in t {
                if v.is_negative() || *v > Rat::from_integer(1.into()) {
                    return Err(Error::UtilityRange(rat_to_string(v)));
                }
            }
        }
        let utilities_f64 = utilities
            .iter()
            .map(|t| t.iter().map(rat_to_f64).collect())
            .collect();
        Ok(Game {
            strategy_counts,
            utilities,
            utilities_f64,
        })
    }

    /// Convenience constructor for bimatrix games.
    pub fn bimatrix(a: Vec<Vec<Rat>>, b: Vec<Vec<Rat>>) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map(|r| r.len()).unwrap_or(0);
        if b.len() != rows || b.iter().chain(a.iter()).any(|r| r.len() != cols) {
            return Err(Error::Dimension("payoff matrices must share shape".into()));
        }
        let flat = |m: Vec<Vec<Rat>>| m.into_iter().flatten().collect::<Vec<_>>();
        Game::new(vec![rows, cols], vec![flat(a), flat(b)])
    }

    pub fn num_players(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    /// Total number of strategies, the size surrogate `n`.
    pub fn total_strategies(&self) -> usize {
        self.strategy_counts.iter().sum()
    }

    fn flat_index(&self, tuple: &[usize]) -> usize {
        let mut idx = 0;
        for (i, &s) in tuple.iter().enumerate() {
            idx = idx * self.strategy_counts[i] + s;
        }
        idx
    }

    pub fn utility(&self, player: usize, tuple: &[usize]) -> &Rat {
        &self.utilities[player][self.flat_index(tuple)]
    }

    pub fn utility_f64(&self, player: usize, tuple: &[usize]) -> f64 {
        self.utilities_f64[player][self.flat_index(tuple)]
    }

    /// Row-player matrix entry for bimatrix games.
    pub fn a(&self, i: usize, j: usize) -> &Rat {
        debug_assert_eq!(self.num_players(), 2);
        self.utility(0, &[i, j])
    }

    /// Column-player matrix entry for bimatrix games.
    pub fn b(&self, i: usize, j: usize) -> &Rat {
        debug_assert_eq!(self.num_players(), 2);
        self.utility(1, &[i, j])
    }

    /// Iterate all pure strategy tuples in lexicographic order.
    pub fn tuples(&self) -> TupleIter {
        TupleIter {
            counts: self.strategy_counts.clone(),
            next: Some(vec![0; self.strategy_counts.len()]),
        }
    }

    /// SHA-256 of the canonical JSON rendering; identifies the game in
    /// equilibrium-set and transcript artifacts.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(&self.to_json()).expect("game JSON");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        format!("{:x}", h.finalize())
    }

    pub fn to_json(&self) -> Value {
        let tensors: Vec<Value> = (0..self.num_players())
            .map(|p| nest_tensor(&self.utilities[p], &self.strategy_counts, 0, &mut 0))
            .collect();
        json!({
            "players": self.num_players(),
            "strategies": self.strategy_counts,
            "utilities": tensors,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed("game JSON must be an object".into()))?;
        let players = obj
            .get("players")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Malformed("missing integer `players`".into()))?
            as usize;
        let strategies: Vec<usize> = obj
            .get("strategies")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("missing array `strategies`".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|n| n as usize)
                    .ok_or_else(|| Error::Malformed("strategy counts must be integers".into()))
            })
            .collect::<Result<_>>()?;
        if strategies.len() != players {
            return Err(Error::Malformed(
                "`strategies` length must equal `players`".into(),
            ));
        }
        let tensors = obj
            .get("utilities")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("missing array `utilities`".into()))?;
        if tensors.len() != players {
            return Err(Error::Malformed(
                "`utilities` length must equal `players`".into(),
            ));
        }
        let mut utilities = Vec::with_capacity(players);
        for t in tensors {
            let mut flat = Vec::new();
            flatten_tensor(t, &strategies, 0, &mut flat)?;
            utilities.push(flat);
        }
        Game::new(strategies, utilities)
    }
}

fn nest_tensor(flat: &[Rat], counts: &[usize], depth: usize, cursor: &mut usize) -> Value {
    if depth == counts.len() {
        let v = Value::String(rat_to_string(&flat[*cursor]));
        *cursor += 1;
        return v;
    }
    Value::Array(
        (0..counts[depth])
            .map(|_| nest_tensor(flat, counts, depth + 1, cursor))
            .collect(),
    )
}

fn flatten_tensor(v: &Value, counts: &[usize], depth: usize, out: &mut Vec<Rat>) -> Result<()> {
    if depth == counts.len() {
        let s = v
            .as_str()
            .ok_or_else(|| Error::Malformed("utility entries must be `num/den` strings".into()))?;
        out.push(parse_rat(s)?);
        return Ok(());
    }
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Malformed("utility tensor nesting does not match shape".into()))?;
    if arr.len() != counts[depth] {
        return Err(Error::Dimension(format!(
            "tensor axis {} has length {}, expected {}",
            depth,
            arr.len(),
            counts[depth]
        )));
    }
    for child in arr {
        flatten_tensor(child, counts, depth + 1, out)?;
    }
    Ok(())
}

pub struct TupleIter {
    counts: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for TupleIter {
    type Item = Vec<usize>;
    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        for i in (0..succ.len()).rev() {
            succ[i] += 1;
            if succ[i] < self.counts[i] {
                self.next = Some(succ);
                return Some(current);
            }
            succ[i] = 0;
        }
        Some(current)
    }
}

/// One exact probability vector per player. Rational mode: vectors are
/// nonnegative and sum to exactly 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MixedProfile {
    blocks: Vec<Vec<Rat>>,
}

impl MixedProfile {
    pub fn new(blocks: Vec<Vec<Rat>>) -> Result<Self> {
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Dimension("empty probability vector".into()));
            }
            if b.iter().any(|v| v.is_negative()) {
                return Err(Error::Malformed("negative probability".into()));
            }
            let total: Rat = b.iter().cloned().sum();
            if !total.is_one() {
                return Err(Error::Malformed(format!(
                    "probabilities sum to {}, expected 1",
                    rat_to_string(&total)
                )));
            }
        }
        Ok(MixedProfile { blocks })
    }

    pub fn uniform(game: &Game) -> Self {
        let blocks = game
            .strategy_counts()
            .iter()
            .map(|&n| vec![Rat::new(1.into(), (n as i64).into()); n])
            .collect();
        MixedProfile { blocks }
    }

    /// The pure profile selecting `choices[i]` for each player.
    pub fn pure(game: &Game, choices: &[usize]) -> Result<Self> {
        if choices.len() != game.num_players() {
            return Err(Error::Dimension("one pure choice per player".into()));
        }
        let blocks = game
            .strategy_counts()
            .iter()
            .zip(choices)
            .map(|(&n, &c)| {
                let mut v = vec![Rat::zero(); n];
                v[c] = Rat::from_integer(1.into());
                v
            })
            .collect();
        Ok(MixedProfile { blocks })
    }

    pub fn blocks(&self) -> &[Vec<Rat>] {
        &self.blocks
    }

    pub fn prob(&self, player: usize, strategy: usize) -> &Rat {
        &self.blocks[player][strategy]
    }

    pub fn matches(&self, game: &Game) -> bool {
        self.blocks.len() == game.num_players()
            && self
                .blocks
                .iter()
                .zip(game.strategy_counts())
                .all(|(b, &n)| b.len() == n)
    }

    pub fn support(&self) -> Support {
        Support {
            per_player: self
                .blocks
                .iter()
                .map(|b| {
                    b.iter()
                        .enumerate()
                        .filter(|(_, v)| !v.is_zero())
                        .map(|(i, _)| i)
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_float(&self) -> FloatProfile {
        FloatProfile {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(rat_to_f64).collect())
                .collect(),
        }
    }

    /// Exact squared Euclidean distance.
    pub fn dist2(&self, other: &MixedProfile) -> Rat {
        self.blocks
            .iter()
            .flatten()
            .zip(other.blocks.iter().flatten())
            .map(|(a, b)| {
                let d = a - b;
                &d * &d
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.blocks
                .iter()
                .map(|b| Value::Array(b.iter().map(|v| rat_to_string(v).into()).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Malformed("profile must be an array of arrays".into()))?;
        let blocks = arr
            .iter()
            .map(|b| {
                b.as_array()
                    .ok_or_else(|| Error::Malformed("profile block must be an array".into()))?
                    .iter()
                    .map(|s| {
                        parse_rat(
                            s.as_str()
                                .ok_or_else(|| Error::Malformed("probability string".into()))?,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        MixedProfile::new(blocks)
    }
}

/// Float-mode mixed profile used by trajectory simulation. Block sums must
/// stay within 1e-12 of 1 at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatProfile {
    blocks: Vec<Vec<f64>>,
}

pub const FLOAT_SUM_TOL: f64 = 1e-12;

impl FloatProfile {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::Dimension("empty probability vector".into()));
            }
            if b.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::Malformed("negative or non-finite probability".into()));
            }
            let total: f64 = b.iter().sum();
            if (total - 1.0).abs() > FLOAT_SUM_TOL {
                return Err(Error::Malformed(format!(
                    "probabilities sum to {total}, expected 1 within 1e-12"
                )));
            }
        }
        Ok(FloatProfile { blocks })
    }

    /// Internal constructor for dynamics steps; skips validation.
    pub(crate) fn from_blocks_unchecked(blocks: Vec<Vec<f64>>) -> Self {
        FloatProfile { blocks }
    }

    pub fn uniform(game: &Game) -> Self {
        FloatProfile {
            blocks: game
                .strategy_counts()
                .iter()
                .map(|&n| vec![1.0 / n as f64; n])
                .collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn prob(&self, player: usize, strategy: usize) -> f64 {
        self.blocks[player][strategy]
    }

    pub fn matches(&self, game: &Game) -> bool {
        self.blocks.len() == game.num_players()
            && self
                .blocks
                .iter()
                .zip(game.strategy_counts())
                .all(|(b, &n)| b.len() == n)
    }

    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().copied()
    }

    pub fn dim(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn dist(&self, other: &FloatProfile) -> f64 {
        self.coords()
            .zip(other.coords())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn dist_linf(&self, other: &FloatProfile) -> f64 {
        self.coords()
            .zip(other.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// x + t * (y - x), blockwise.
    pub fn lerp(&self, other: &FloatProfile, t: f64) -> FloatProfile {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
            .collect();
        FloatProfile { blocks }
    }

    /// x + delta with per-block entries of `delta` flat-indexed.
    pub fn add_displacement(&self, delta: &[f64]) -> FloatProfile {
        let mut it = delta.iter();
        let blocks = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|x| x + it.next().expect("dim")).collect())
            .collect();
        FloatProfile { blocks }
    }

    /// Euclidean projection onto the profile space (per-block probability
    /// simplex); identity for points already inside.
    pub fn project(&self) -> FloatProfile {
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                if b.iter().all(|&v| v >= 0.0) {
                    b.clone()
                } else {
                    project_simplex(b)
                }
            })
            .collect();
        FloatProfile { blocks }
    }

    /// Domain check used by the trajectory engine: coordinates above
    /// -tol and block sums within tol of 1.
    pub fn in_domain(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            b.iter().all(|&v| v >= -tol && v.is_finite())
                && (b.iter().sum::<f64>() - 1.0).abs() <= tol
        })
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.blocks
                .iter()
                .map(|b| Value::Array(b.iter().map(|&v| json!(format_f64(v))).collect()))
                .collect(),
        )
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Malformed("profile must be an array of arrays".into()))?;
        let blocks = arr
            .iter()
            .map(|b| {
                b.as_array()
                    .ok_or_else(|| Error::Malformed("profile block must be an array".into()))?
                    .iter()
                    .map(|s| {
                        s.as_str()
                            .and_then(|s| s.parse::<f64>().ok())
                            .or_else(|| s.as_f64())
                            .ok_or_else(|| Error::Malformed("float coordinate".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FloatProfile::new(blocks)
    }
}

/// 17 significant digits: round-trips every finite f64 exactly.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Euclidean projection of a vector onto the standard probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (i + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&u| (u - theta).max(0.0)).collect()
}

/// Per-player sets of strategies played with positive probability.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Support {
    per_player: Vec<Vec<usize>>,
}

impl Support {
    pub fn new(per_player: Vec<Vec<usize>>) -> Result<Self> {
        if per_player.iter().any(Vec::is_empty) {
            return Err(Error::Malformed("empty support".into()));
        }
        Ok(Support { per_player })
    }

    pub fn per_player(&self) -> &[Vec<usize>] {
        &self.per_player
    }
}

// ---------------------------------------------------------------------------
// Exact evaluation operations.
// ---------------------------------------------------------------------------

fn check_profile(game: &Game, x: &MixedProfile) -> Result<()> {
    if !x.matches(game) {
        return Err(Error::Dimension(
            "profile shape does not match the game".into(),
        ));
    }
    Ok(())
}

/// Expected utility of `player` at the mixed profile `x`; exact.
pub fn expected_utility(game: &Game, x: &MixedProfile, player: usize) -> Result<Rat> {
    check_profile(game, x)?;
    let mut total = Rat::zero();
    for tuple in game.tuples() {
        let mut prob = Rat::from_integer(1.into());
        for (i, &s) in tuple.iter().enumerate() {
            if x.prob(i, s).is_zero() {
                prob = Rat::zero();
                break;
            }
            prob *= x.prob(i, s);
        }
        if !prob.is_zero() {
            total += game.utility(player, &tuple) * prob;
        }
    }
    Ok(total)
}

/// Expected utility to `player` of playing `strategy` purely while the
/// opponents keep their mixed strategies.
pub fn pure_deviation_payoff(
    game: &Game,
    x: &MixedProfile,
    player: usize,
    strategy: usize,
) -> Result<Rat> {
    check_profile(game, x)?;
    if player >= game.num_players() || strategy >= game.strategy_counts()[player] {
        return Err(Error::Dimension("player or strategy out of range".into()));
    }
    let mut total = Rat::zero();
    for tuple in game.tuples() {
        if tuple[player] != strategy {
            continue;
        }
        let mut prob = Rat::from_integer(1.into());
        for (i, &s) in tuple.iter().enumerate() {
            if i == player {
                continue;
            }
            prob *= x.prob(i, s);
            if prob.is_zero() {
                break;
            }
        }
        if !prob.is_zero() {
            total += game.utility(player, &tuple) * prob;
        }
    }
    Ok(total)
}

/// Max gain any player can get from any unilateral pure deviation; `x` is
/// an eps-approximate Nash equilibrium iff this is <= eps.
pub fn regret(game: &Game, x: &MixedProfile) -> Result<Rat> {
    check_profile(game, x)?;
    let mut worst = Rat::zero();
    for player in 0..game.num_players() {
        let base = expected_utility(game, x, player)?;
        for strategy in 0..game.strategy_counts()[player] {
            let dev = pure_deviation_payoff(game, x, player, strategy)?;
            let gain = dev - &base;
            if gain > worst {
                worst = gain;
            }
        }
    }
    Ok(worst)
}

pub fn is_nash(game: &Game, x: &MixedProfile, eps: &Rat) -> Result<bool> {
    if eps.is_negative() {
        return Err(Error::Malformed("eps must be nonnegative".into()));
    }
    Ok(regret(game, x)? <= *eps)
}

// ---------------------------------------------------------------------------
// Float twins used by the dynamics modules. Summation order is fixed
// (lexicographic tuples) so replays are bit-identical across call sites.
// ---------------------------------------------------------------------------

pub fn expected_utility_f64(game: &Game, x: &FloatProfile, player: usize) -> f64 {
    let mut total = 0.0;
    for tuple in game.tuples() {
        let mut prob = 1.0;
        for (i, &s) in tuple.iter().enumerate() {
            prob *= x.prob(i, s);
        }
        total += game.utility_f64(player, &tuple) * prob;
    }
    total
}

pub fn pure_deviation_payoff_f64(
    game: &Game,
    x: &FloatProfile,
    player: usize,
    strategy: usize,
) -> f64 {
    let mut total = 0.0;
    for tuple in game.tuples() {
        if tuple[player] != strategy {
            continue;
        }
        let mut prob = 1.0;
        for (i, &s) in tuple.iter().enumerate() {
            if i != player {
                prob *= x.prob(i, s);
            }
        }
        total += game.utility_f64(player, &tuple) * prob;
    }
    total
}

pub fn regret_f64(game: &Game, x: &FloatProfile) -> f64 {
    let mut worst = 0.0f64;
    for player in 0..game.num_players() {
        let base = expected_utility_f64(game, x, player);
        for strategy in 0..game.strategy_counts()[player] {
            let gain = pure_deviation_payoff_f64(game, x, player, strategy) - base;
            worst = worst.max(gain);
        }
    }
    worst
}

/// Named desk-scale games used by tests and the CLI.
pub mod builtin {
    use super::*;
    use crate::rational::rat;

    pub fn matching_pennies() -> Game {
        Game::bimatrix(
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        )
        .expect("valid")
    }

    pub fn battle_of_sexes() -> Game {
        Game::bimatrix(
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 2)]],
            vec![vec![rat(1, 2), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
        )
        .expect("valid")
    }

    /// Constant row payoffs against an identity column game: every column
    /// mix leaves the row player indifferent between both rows.
    pub fn degenerate_2x2() -> Game {
        Game::bimatrix(
            vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
            vec![vec![rat(1, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
        )
        .expect("valid")
    }

    pub fn by_name(name: &str) -> Option<Game> {
        match name {
            "matching-pennies" => Some(matching_pennies()),
            "battle-of-sexes" => Some(battle_of_sexes()),
            "degenerate-2x2" => Some(degenerate_2x2()),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::builtin::*;
    use super::*;
    use crate::rational::rat;

    /// Independent brute-force oracle: expected utility as an explicit sum
    /// over all pure profiles, written against the definition.
    fn oracle_expected(game: &Game, x: &MixedProfile, player: usize) -> Rat {
        let mut sum = Rat::zero();
        for tuple in game.tuples() {
            let mut p = Rat::from_integer(1.into());
            for (i, &s) in tuple.iter().enumerate() {
                p *= x.prob(i, s);
            }
            sum += game.utility(player, &tuple) * p;
        }
        sum
    }

    fn oracle_regret(game: &Game, x: &MixedProfile) -> Rat {
        let mut worst = Rat::zero();
        for pl in 0..game.num_players() {
            let base = oracle_expected(game, x, pl);
            for s in 0..game.strategy_counts()[pl] {
                let pure = MixedProfile::pure(game, &[s, s]).ok();
                let _ = pure; // deviation computed directly below
                let mut dev = Rat::zero();
                for tuple in game.tuples() {
                    if tuple[pl] != s {
                        continue;
                    }
                    let mut p = Rat::from_integer(1.into());
                    for (i, &t) in tuple.iter().enumerate() {
                        if i != pl {
                            p *= x.prob(i, t);
                        }
                    }
                    dev += game.utility(pl, &tuple) * p;
                }
                let gain = dev - &base;
                if gain > worst {
                    worst = gain;
                }
            }
        }
        worst
    }

    #[test]
    fn expected_utility_matching_pennies_uniform() {
        let g = matching_pennies();
        let x = MixedProfile::uniform(&g);
        let v = expected_utility(&g, &x, 0).unwrap();
        assert_eq!(v, rat(1, 2));
        assert_eq!(v, oracle_expected(&g, &x, 0));
    }

    #[test]
    fn expected_utility_pure_profile_is_tensor_entry() {
        let g = battle_of_sexes();
        for tuple in g.tuples() {
            let x = MixedProfile::pure(&g, &tuple).unwrap();
            for pl in 0..2 {
                assert_eq!(
                    expected_utility(&g, &x, pl).unwrap(),
                    *g.utility(pl, &tuple)
                );
            }
        }
    }

    #[test]
    fn expected_utility_battle_of_sexes_mixed() {
        let g = battle_of_sexes();
        let x = MixedProfile::new(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        assert_eq!(expected_utility(&g, &x, 0).unwrap(), rat(1, 3));
        assert_eq!(oracle_expected(&g, &x, 0), rat(1, 3));
    }

    #[test]
    fn pure_deviation_examples() {
        let g = matching_pennies();
        let x = MixedProfile::uniform(&g);
        assert_eq!(pure_deviation_payoff(&g, &x, 0, 0).unwrap(), rat(1, 2));

        let bos = battle_of_sexes();
        let x = MixedProfile::new(vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        assert_eq!(pure_deviation_payoff(&bos, &x, 0, 0).unwrap(), rat(1, 3));
        // Pure profile: deviating to the played strategy equals expected.
        let pure = MixedProfile::pure(&bos, &[1, 1]).unwrap();
        assert_eq!(
            pure_deviation_payoff(&bos, &pure, 0, 1).unwrap(),
            expected_utility(&bos, &pure, 0).unwrap()
        );
    }

    #[test]
    fn regret_examples() {
        let g = matching_pennies();
        let uniform = MixedProfile::uniform(&g);
        assert_eq!(regret(&g, &uniform).unwrap(), rat(0, 1));
        let corner = MixedProfile::pure(&g, &[0, 0]).unwrap();
        assert_eq!(regret(&g, &corner).unwrap(), rat(1, 1));
        assert_eq!(oracle_regret(&g, &corner), rat(1, 1));
        assert!(is_nash(&g, &uniform, &rat(0, 1)).unwrap());
        assert!(!is_nash(&g, &corner, &rat(0, 1)).unwrap());
    }

    #[test]
    fn utilities_outside_unit_interval_rejected() {
        let bad = Game::bimatrix(
            vec![vec![rat(2, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
        );
        assert!(matches!(bad, Err(Error::UtilityRange(_))));
    }

    #[test]
    fn game_json_round_trip_bit_exact() {
        let g = battle_of_sexes();
        let s1 = serde_json::to_string(&g.to_json()).unwrap();
        let g2 = Game::from_json(&serde_json::from_str(&s1).unwrap()).unwrap();
        let s2 = serde_json::to_string(&g2.to_json()).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(g, g2);
    }

    #[test]
    fn json_rejects_unreduced_entries() {
        let g = matching_pennies();
        let mut v = g.to_json();
        v["utilities"][0][0][0] = Value::String("2/2".into());
        assert!(Game::from_json(&v).is_err());
    }

    #[test]
    fn three_player_evaluation() {
        // 2x2x2 game: player utilities all 1/2 except one corner.
        let cells = 8;
        let mut t = vec![rat(1, 2); cells];
        t[0] = rat(1, 1);
        let g = Game::new(vec![2, 2, 2], vec![t.clone(), t.clone(), t]).unwrap();
        let x = MixedProfile::uniform(&g);
        // E[u] = 1/2 + (1 - 1/2)/8 = 9/16
        assert_eq!(expected_utility(&g, &x, 0).unwrap(), rat(9, 16));
    }

    #[test]
    fn simplex_projection_restores_domain() {
        let p = FloatProfile::from_blocks_unchecked(vec![vec![1.2, -0.2], vec![0.5, 0.5]]);
        let q = p.project();
        assert!(q.in_domain(1e-12));
        assert_eq!(q.blocks()[0], vec![1.0, 0.0]);
    }
}
