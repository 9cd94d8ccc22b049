//! All Nash equilibria of a bimatrix game on a given line or low-
//! dimensional affine subspace of the profile space, computed exactly.
//!
//! On a line x(lambda) = A + B*lambda the equilibrium conditions become:
//! per-coordinate feasibility (linear in lambda) plus, for every player
//! and pure strategy, "own expected utility minus that deviation payoff is
//! nonnegative" — a quadratic in lambda with rational coefficients. The
//! solver extracts every real root, sorts the merged root list exactly,
//! decides every inequality at each root and at one rational point inside
//! each gap, and stitches the satisfied cells into closed intervals and
//! isolated points. No tolerances anywhere.

use std::cmp::Ordering;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::equilibria::{enumerate_nash, is_nondegenerate, Nondegeneracy};
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};
use crate::linalg::{rank, solve, Solve};
use crate::rational::{parse_rat, rat_to_string, Rat};
use crate::roots::{quadratic_sign_at, rational_between, real_roots, QuadraticRoot};

/// Base point plus `d` direction vectors in the tangent space of the
/// profile polytope: every direction sums to zero within each player
/// block, so A + B*lambda preserves the probability sums.
#[derive(Debug, Clone)]
pub struct AffineSubspace {
    base: MixedProfile,
    directions: Vec<Vec<Vec<Rat>>>,
}

impl AffineSubspace {
    pub fn new(base: MixedProfile, directions: Vec<Vec<Vec<Rat>>>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::Malformed("need at least one direction".into()));
        }
        // The tangent space of the profile polytope has dimension
        // sum(n_i - 1); more directions than that cannot be independent.
        let dim_x: usize = base.blocks().iter().map(|b| b.len() - 1).sum();
        if directions.len() > dim_x {
            return Err(Error::Malformed(format!(
                "at most dim(X) = {dim_x} directions allowed"
            )));
        }
        for dir in &directions {
            if dir.len() != base.blocks().len()
                || dir
                    .iter()
                    .zip(base.blocks())
                    .any(|(d, b)| d.len() != b.len())
            {
                return Err(Error::Dimension(
                    "direction shape does not match the base profile".into(),
                ));
            }
            if dir.iter().flatten().all(Rat::is_zero) {
                return Err(Error::ZeroDirection);
            }
            for (player, block) in dir.iter().enumerate() {
                let total: Rat = block.iter().cloned().sum();
                if !total.is_zero() {
                    return Err(Error::NonTangent(format!(
                        "direction block for player {player} sums to {}",
                        rat_to_string(&total)
                    )));
                }
            }
        }
        // Linear independence of the direction vectors.
        let rows: Vec<Vec<Rat>> = directions
            .iter()
            .map(|d| d.iter().flatten().cloned().collect())
            .collect();
        if rank(&rows) != directions.len() {
            return Err(Error::Malformed(
                "direction vectors are linearly dependent".into(),
            ));
        }
        Ok(AffineSubspace { base, directions })
    }

    pub fn line(base: MixedProfile, direction: Vec<Vec<Rat>>) -> Result<Self> {
        AffineSubspace::new(base, vec![direction])
    }

    pub fn dim(&self) -> usize {
        self.directions.len()
    }

    pub fn base(&self) -> &MixedProfile {
        &self.base
    }

    pub fn directions(&self) -> &[Vec<Vec<Rat>>] {
        &self.directions
    }

    /// Exact point A + B*lambda for a rational lambda vector.
    pub fn point_at(&self, lambda: &[Rat]) -> Vec<Vec<Rat>> {
        assert_eq!(lambda.len(), self.dim());
        let mut blocks: Vec<Vec<Rat>> = self.base.blocks().to_vec();
        for (dir, l) in self.directions.iter().zip(lambda) {
            for (block, dblock) in blocks.iter_mut().zip(dir) {
                for (v, d) in block.iter_mut().zip(dblock) {
                    *v += d * l;
                }
            }
        }
        blocks
    }

    pub fn to_json(&self) -> Value {
        json!({
            "base": self.base.to_json(),
            "directions": self.directions.iter().map(|d| {
                Value::Array(d.iter().map(|b| {
                    Value::Array(b.iter().map(|v| rat_to_string(v).into()).collect())
                }).collect())
            }).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Malformed("subspace JSON must be an object".into()))?;
        let base = MixedProfile::from_json(
            obj.get("base")
                .ok_or_else(|| Error::Malformed("missing `base`".into()))?,
        )?;
        let dirs = obj
            .get("directions")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Malformed("missing array `directions`".into()))?;
        let directions = dirs
            .iter()
            .map(|d| {
                d.as_array()
                    .ok_or_else(|| Error::Malformed("direction must be an array".into()))?
                    .iter()
                    .map(|b| {
                        b.as_array()
                            .ok_or_else(|| Error::Malformed("direction block".into()))?
                            .iter()
                            .map(|s| {
                                parse_rat(s.as_str().ok_or_else(|| {
                                    Error::Malformed("direction entries are strings".into())
                                })?)
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        AffineSubspace::new(base, directions)
    }
}

/// One maximal connected piece of the solution set on a line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LineSolution {
    Point(QuadraticRoot),
    /// Closed interval [lo, hi] with lo < hi.
    Interval(QuadraticRoot, QuadraticRoot),
}

/// Solution set of a line or affine-subspace query: sorted disjoint
/// segments over lambda for d = 1, isolated rational lambda vectors for
/// d > 1.
#[derive(Debug, Clone)]
pub enum LambdaSolutionSet {
    Line(Vec<LineSolution>),
    Affine(Vec<Vec<Rat>>),
}

impl LambdaSolutionSet {
    pub fn is_empty(&self) -> bool {
        match self {
            LambdaSolutionSet::Line(v) => v.is_empty(),
            LambdaSolutionSet::Affine(v) => v.is_empty(),
        }
    }

    /// Isolated points of a line solution (excluding intervals).
    pub fn line_points(&self) -> Vec<&QuadraticRoot> {
        match self {
            LambdaSolutionSet::Line(v) => v
                .iter()
                .filter_map(|s| match s {
                    LineSolution::Point(p) => Some(p),
                    LineSolution::Interval(..) => None,
                })
                .collect(),
            LambdaSolutionSet::Affine(_) => vec![],
        }
    }

    pub fn to_json(&self, space: &AffineSubspace) -> Value {
        match self {
            LambdaSolutionSet::Line(segs) => Value::Array(
                segs.iter()
                    .map(|seg| match seg {
                        LineSolution::Point(p) => json!({
                            "kind": "point",
                            "lambda": p.to_display(),
                            "profile": profile_at_root(space, p),
                        }),
                        LineSolution::Interval(lo, hi) => json!({
                            "kind": "interval",
                            "lambda": [lo.to_display(), hi.to_display()],
                            "profile": [profile_at_root(space, lo), profile_at_root(space, hi)],
                        }),
                    })
                    .collect(),
            ),
            LambdaSolutionSet::Affine(points) => Value::Array(
                points
                    .iter()
                    .map(|lambda| {
                        let coords = space.point_at(lambda);
                        json!({
                            "kind": "point",
                            "lambda": lambda.iter().map(rat_to_string).collect::<Vec<_>>(),
                            "profile": coords.iter().map(|b| {
                                b.iter().map(rat_to_string).collect::<Vec<_>>()
                            }).collect::<Vec<_>>(),
                        })
                    })
                    .collect(),
            ),
        }
    }
}

/// Coordinates of A + B*lambda as exact strings, algebraic where lambda is
/// irrational.
fn profile_at_root(space: &AffineSubspace, lambda: &QuadraticRoot) -> Value {
    if let Some(l) = lambda.as_rational() {
        let blocks = space.point_at(&[l]);
        return Value::Array(
            blocks
                .iter()
                .map(|b| Value::Array(b.iter().map(|v| rat_to_string(v).into()).collect()))
                .collect(),
        );
    }
    let (p, q, s, r) = lambda.parts();
    let dir = &space.directions()[0];
    Value::Array(
        space
            .base()
            .blocks()
            .iter()
            .zip(dir)
            .map(|(bb, db)| {
                Value::Array(
                    bb.iter()
                        .zip(db)
                        .map(|(a, b)| {
                            // a + b * (p + q sqrt(s))/r = (a r + b p + b q sqrt(s))/r
                            // with rational a, b; clear to integers.
                            let num_rat = a * Rat::from_integer(r.clone())
                                + b * Rat::from_integer(p.clone());
                            let rad_rat = b * Rat::from_integer(q.clone());
                            let den = num_rat.denom().lcm(rad_rat.denom());
                            let ip = (&num_rat * Rat::from_integer(den.clone())).to_integer();
                            let iq = (&rad_rat * Rat::from_integer(den.clone())).to_integer();
                            let root = QuadraticRoot::new(ip, iq, s.clone(), r * den);
                            Value::String(root.to_display())
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

/// The quadratics (in lambda) whose nonnegativity characterizes the Nash
/// conditions along the line, one per (player, pure strategy).
fn line_condition_quadratics(game: &Game, space: &AffineSubspace) -> Vec<(Rat, Rat, Rat)> {
    let ar = &space.base().blocks()[0];
    let ac = &space.base().blocks()[1];
    let br = &space.directions()[0][0];
    let bc = &space.directions()[0][1];
    let (n1, n2) = (game.strategy_counts()[0], game.strategy_counts()[1]);

    // Bilinear helper: u^T M v for the named player matrix.
    let quad = |player: usize, u: &[Rat], v: &[Rat]| -> Rat {
        let mut total = Rat::zero();
        for i in 0..n1 {
            if u[i].is_zero() {
                continue;
            }
            for j in 0..n2 {
                if v[j].is_zero() {
                    continue;
                }
                total += game.utility(player, &[i, j]) * &u[i] * &v[j];
            }
        }
        total
    };

    let mut out = Vec::with_capacity(n1 + n2);
    for player in 0..2 {
        // Own expected utility along the line: quadratic coefficients.
        let c0 = quad(player, ar, ac);
        let c1 = quad(player, br, ac) + quad(player, ar, bc);
        let c2 = quad(player, br, bc);
        let count = game.strategy_counts()[player];
        for strat in 0..count {
            // Deviation payoff is linear in lambda.
            let (d0, d1) = if player == 0 {
                let e: Vec<Rat> = (0..n1)
                    .map(|i| {
                        if i == strat {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect();
                (quad(player, &e, ac), quad(player, &e, bc))
            } else {
                let e: Vec<Rat> = (0..n2)
                    .map(|j| {
                        if j == strat {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    })
                    .collect();
                (quad(player, ar, &e), quad(player, br, &e))
            };
            out.push((&c0 - d0, &c1 - d1, c2.clone()));
        }
    }
    out
}

/// Closed feasible lambda interval from the per-coordinate nonnegativity
/// of A + B*lambda; `None` when empty. Compact because tangent directions
/// have both signs inside some block.
fn feasible_interval(space: &AffineSubspace) -> Option<(Rat, Rat)> {
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    let dir = &space.directions()[0];
    for (bb, db) in space.base().blocks().iter().zip(dir) {
        for (a, b) in bb.iter().zip(db) {
            if b.is_zero() {
                if a.is_negative() {
                    return None;
                }
                continue;
            }
            let bound = -a / b;
            if b.is_positive() {
                lo = Some(match lo {
                    Some(v) if v >= bound => v,
                    _ => bound,
                });
            } else {
                hi = Some(match hi {
                    Some(v) if v <= bound => v,
                    _ => bound,
                });
            }
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) if l <= h => Some((l, h)),
        (Some(_), Some(_)) => None,
        // A zero-sum nonzero block always yields both bounds; reaching here
        // means the direction was zero, which construction rejects.
        _ => unreachable!("tangent directions bound lambda on both sides"),
    }
}

/// All Nash equilibria of `game` on the 1-dimensional `space`, exactly.
pub fn nash_on_line(game: &Game, space: &AffineSubspace) -> Result<LambdaSolutionSet> {
    if game.num_players() != 2 {
        return Err(Error::Players {
            found: game.num_players(),
            context: "the line solver is restricted to bimatrix games",
        });
    }
    if space.dim() != 1 {
        return Err(Error::Malformed(format!(
            "nash_on_line needs a 1-dimensional subspace, got {}",
            space.dim()
        )));
    }
    if !space.base().matches(game) {
        return Err(Error::Dimension("subspace does not match the game".into()));
    }
    let Some((lo, hi)) = feasible_interval(space) else {
        return Ok(LambdaSolutionSet::Line(vec![]));
    };
    let quadratics = line_condition_quadratics(game, space);

    // Candidate breakpoints: all real roots inside [lo, hi], plus both
    // feasibility endpoints.
    let lo_root = QuadraticRoot::from_rational(&lo);
    let hi_root = QuadraticRoot::from_rational(&hi);
    let mut breakpoints: Vec<QuadraticRoot> = vec![lo_root.clone(), hi_root.clone()];
    for (c0, c1, c2) in &quadratics {
        // real_roots takes ascending-degree coefficients: a x^2 + b x + c.
        if let Some(roots) = real_roots(c2, c1, c0) {
            for r in roots {
                if r >= lo_root && r <= hi_root {
                    breakpoints.push(r);
                }
            }
        }
        // Identically-zero condition: satisfied everywhere, no roots.
    }
    breakpoints.sort();
    breakpoints.dedup();

    let satisfied_at_root = |x: &QuadraticRoot| -> bool {
        quadratics
            .iter()
            .all(|(c0, c1, c2)| quadratic_sign_at(c2, c1, c0, x) != Ordering::Less)
    };
    let satisfied_at_rational = |x: &Rat| -> bool {
        quadratics.iter().all(|(c0, c1, c2)| {
            let v = c2 * x * x + c1 * x + c0;
            !v.is_negative()
        })
    };

    // Cells: breakpoint, open gap, breakpoint, ... over [lo, hi].
    let mut cells: Vec<bool> = Vec::with_capacity(2 * breakpoints.len());
    for (i, bp) in breakpoints.iter().enumerate() {
        cells.push(satisfied_at_root(bp));
        if i + 1 < breakpoints.len() {
            let mid = rational_between(bp, &breakpoints[i + 1]);
            cells.push(satisfied_at_rational(&mid));
        }
    }

    // Stitch satisfied cells into maximal closed segments. A satisfied open
    // gap forces both endpoints satisfied (continuity without interior
    // roots), so segments always begin and end at breakpoints.
    let mut segments: Vec<LineSolution> = Vec::new();
    let mut run_start: Option<usize> = None; // breakpoint index
    let flush = |segments: &mut Vec<LineSolution>, start: usize, end: usize| {
        if start == end {
            segments.push(LineSolution::Point(breakpoints[start].clone()));
        } else {
            segments.push(LineSolution::Interval(
                breakpoints[start].clone(),
                breakpoints[end].clone(),
            ));
        }
    };
    let mut idx = 0; // breakpoint index of the current cell pair
    let mut i = 0;
    while i < cells.len() {
        let is_breakpoint_cell = i % 2 == 0;
        if is_breakpoint_cell {
            if cells[i] {
                if run_start.is_none() {
                    run_start = Some(idx);
                }
            } else if let Some(start) = run_start.take() {
                flush(&mut segments, start, idx - 1);
            }
        } else if !cells[i] {
            // Open gap unsatisfied: close any run at the left breakpoint.
            if let Some(start) = run_start.take() {
                flush(&mut segments, start, idx);
            }
        }
        if !is_breakpoint_cell {
            idx += 1;
        }
        i += 1;
    }
    if let Some(start) = run_start.take() {
        flush(&mut segments, start, breakpoints.len() - 1);
    }
    Ok(LambdaSolutionSet::Line(segments))
}

/// Nash equilibria of a nondegenerate bimatrix game on an affine subspace
/// of dimension at most 4: enumerate the (finitely many) equilibria, then
/// keep each one whose lambda system A + B*lambda = z is solvable.
pub fn nash_on_affine(game: &Game, space: &AffineSubspace) -> Result<LambdaSolutionSet> {
    if game.num_players() != 2 {
        return Err(Error::Players {
            found: game.num_players(),
            context: "the affine solver is restricted to bimatrix games",
        });
    }
    if space.dim() > 4 {
        return Err(Error::DeskScale(format!(
            "affine solver handles dimension <= 4, got {}",
            space.dim()
        )));
    }
    if !space.base().matches(game) {
        return Err(Error::Dimension("subspace does not match the game".into()));
    }
    if let Nondegeneracy::Degenerate { witness, reason } = is_nondegenerate(game)? {
        return Err(Error::Degenerate(format!(
            "{reason}; witness {:?}",
            witness
                .blocks()
                .iter()
                .map(|b| b.iter().map(rat_to_string).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        )));
    }
    let eqs = enumerate_nash(game)?;
    let d = space.dim();
    let coords: usize = space.base().blocks().iter().map(Vec::len).sum();
    let mut hits: Vec<Vec<Rat>> = Vec::new();
    for eq in eqs.profiles() {
        // Rows: one per coordinate; columns: one per lambda component.
        let mut a = Vec::with_capacity(coords);
        let mut b = Vec::with_capacity(coords);
        let base_flat: Vec<&Rat> = space.base().blocks().iter().flatten().collect();
        let eq_flat: Vec<&Rat> = eq.blocks().iter().flatten().collect();
        let dir_flat: Vec<Vec<&Rat>> = space
            .directions()
            .iter()
            .map(|dir| dir.iter().flatten().collect())
            .collect();
        for c in 0..coords {
            a.push((0..d).map(|j| dir_flat[j][c].clone()).collect::<Vec<_>>());
            b.push(eq_flat[c] - base_flat[c]);
        }
        match solve(&a, &b) {
            Solve::Unique(lambda) => hits.push(lambda),
            Solve::Underdetermined { .. } => {
                unreachable!("directions are linearly independent")
            }
            Solve::Inconsistent => {}
        }
    }
    hits.sort();
    hits.dedup();
    Ok(LambdaSolutionSet::Affine(hits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::builtin::*;
    use crate::rational::rat;

    fn mp_diagonal_line() -> AffineSubspace {
        // x(lambda) = ((1-l, l), (1-l, l)).
        let base = MixedProfile::new(vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(1, 1), rat(0, 1)],
        ])
        .unwrap();
        let dir = vec![
            vec![rat(-1, 1), rat(1, 1)],
            vec![rat(-1, 1), rat(1, 1)],
        ];
        AffineSubspace::line(base, dir).unwrap()
    }

    #[test]
    fn matching_pennies_diagonal_isolated_half() {
        let sol = nash_on_line(&matching_pennies(), &mp_diagonal_line()).unwrap();
        let LambdaSolutionSet::Line(segs) = &sol else {
            panic!()
        };
        assert_eq!(segs.len(), 1);
        match &segs[0] {
            LineSolution::Point(p) => assert_eq!(p.as_rational().unwrap(), rat(1, 2)),
            other => panic!("expected point, got {other:?}"),
        }
    }

    #[test]
    fn matching_pennies_fixed_row_line_empty() {
        // Row player fixed at (1,0); column player moves.
        let base = MixedProfile::new(vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(1, 1)],
        ])
        .unwrap();
        let dir = vec![
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(1, 1), rat(-1, 1)],
        ];
        let space = AffineSubspace::line(base, dir).unwrap();
        let sol = nash_on_line(&matching_pennies(), &space).unwrap();
        assert!(sol.is_empty());
    }

    #[test]
    fn constant_game_full_interval() {
        // Both players indifferent everywhere: every profile on the line is
        // an equilibrium, so the whole feasible interval comes back.
        let g = Game::bimatrix(
            vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
            vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
        )
        .unwrap();
        let base = MixedProfile::new(vec![
            vec![rat(0, 1), rat(1, 1)],
            vec![rat(1, 2), rat(1, 2)],
        ])
        .unwrap();
        let dir = vec![
            vec![rat(1, 1), rat(-1, 1)],
            vec![rat(0, 1), rat(0, 1)],
        ];
        let space = AffineSubspace::line(base, dir).unwrap();
        let sol = nash_on_line(&g, &space).unwrap();
        let LambdaSolutionSet::Line(segs) = &sol else {
            panic!()
        };
        assert_eq!(segs.len(), 1);
        match &segs[0] {
            LineSolution::Interval(lo, hi) => {
                assert_eq!(lo.as_rational().unwrap(), rat(0, 1));
                assert_eq!(hi.as_rational().unwrap(), rat(1, 1));
            }
            other => panic!("expected interval, got {other:?}"),
        }
    }

    #[test]
    fn zero_direction_rejected() {
        let base = MixedProfile::uniform(&matching_pennies());
        let dir = vec![
            vec![rat(0, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1)],
        ];
        assert!(matches!(
            AffineSubspace::line(base, dir),
            Err(Error::ZeroDirection)
        ));
    }

    #[test]
    fn non_tangent_direction_rejected() {
        let base = MixedProfile::uniform(&matching_pennies());
        let dir = vec![
            vec![rat(1, 1), rat(0, 1)],
            vec![rat(0, 1), rat(0, 1)],
        ];
        assert!(matches!(
            AffineSubspace::line(base, dir),
            Err(Error::NonTangent(_))
        ));
    }

    #[test]
    fn affine_full_tangent_space_finds_all_three() {
        let g = battle_of_sexes();
        let base = MixedProfile::new(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        let dirs = vec![
            vec![vec![rat(1, 1), rat(-1, 1)], vec![rat(0, 1), rat(0, 1)]],
            vec![vec![rat(0, 1), rat(0, 1)], vec![rat(1, 1), rat(-1, 1)]],
        ];
        let space = AffineSubspace::new(base, dirs).unwrap();
        let sol = nash_on_affine(&g, &space).unwrap();
        let LambdaSolutionSet::Affine(points) = &sol else {
            panic!()
        };
        assert_eq!(points.len(), 3);
        // The base point itself is the mixed equilibrium: lambda = 0.
        assert!(points.contains(&vec![rat(0, 1), rat(0, 1)]));
    }

    #[test]
    fn affine_rejects_degenerate_game() {
        let base = MixedProfile::uniform(&degenerate_2x2());
        let dirs = vec![vec![
            vec![rat(1, 1), rat(-1, 1)],
            vec![rat(0, 1), rat(0, 1)],
        ]];
        let space = AffineSubspace::new(base, dirs).unwrap();
        assert!(matches!(
            nash_on_affine(&degenerate_2x2(), &space),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn line_through_known_equilibrium_reports_it() {
        let g = battle_of_sexes();
        let eq = MixedProfile::new(vec![
            vec![rat(2, 3), rat(1, 3)],
            vec![rat(1, 3), rat(2, 3)],
        ])
        .unwrap();
        let dir = vec![
            vec![rat(1, 1), rat(-1, 1)],
            vec![rat(-1, 2), rat(1, 2)],
        ];
        let space = AffineSubspace::line(eq, dir).unwrap();
        let sol = nash_on_line(&g, &space).unwrap();
        let points = sol.line_points();
        assert!(points
            .iter()
            .any(|p| p.as_rational() == Some(rat(0, 1))));
    }
}
