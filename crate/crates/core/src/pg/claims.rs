//! The three transcript claims Alice relies on before constructing her
//! consistent dynamic: the query set contains no approximate equilibrium,
//! no exact response cycle, and no query line passing near an equilibrium.

use serde_json::{json, Value};

use crate::equilibria::EquilibriumSet;
use crate::error::Result;
use crate::game::{format_f64, regret_f64, FloatProfile, Game};
use crate::pg::{PgConfig, Round};

#[derive(Debug, Clone)]
pub struct ClaimOutcome {
    pub pass: bool,
    pub witness: Option<String>,
}

impl ClaimOutcome {
    fn pass() -> Self {
        ClaimOutcome {
            pass: true,
            witness: None,
        }
    }

    fn fail(witness: String) -> Self {
        ClaimOutcome {
            pass: false,
            witness: Some(witness),
        }
    }

    fn to_json(&self) -> Value {
        json!({ "pass": self.pass, "witness": self.witness })
    }
}

#[derive(Debug, Clone)]
pub struct ClaimsReport {
    /// No query has regret at most eps_r.
    pub no_approximate_equilibrium: ClaimOutcome,
    /// No subset of the queries forms a response cycle (exact matching).
    pub no_periodic_points: ClaimOutcome,
    /// No enumerated equilibrium lies within rho of any query line.
    pub no_equilibrium_near_query_lines: ClaimOutcome,
}

impl ClaimsReport {
    pub fn all_pass(&self) -> bool {
        self.no_approximate_equilibrium.pass
            && self.no_periodic_points.pass
            && self.no_equilibrium_near_query_lines.pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "claim1_no_approximate_equilibrium": self.no_approximate_equilibrium.to_json(),
            "claim2_no_periodic_points": self.no_periodic_points.to_json(),
            "claim3_no_equilibrium_near_query_lines": self.no_equilibrium_near_query_lines.to_json(),
        })
    }
}

/// Euclidean distance from a point to the (infinite) line through `base`
/// with direction `dir`.
pub fn point_line_distance(point: &FloatProfile, base: &FloatProfile, dir: &[f64]) -> f64 {
    let diff: Vec<f64> = point
        .coords()
        .zip(base.coords())
        .map(|(p, b)| p - b)
        .collect();
    let dir_norm2: f64 = dir.iter().map(|d| d * d).sum();
    if dir_norm2 == 0.0 {
        return diff.iter().map(|d| d * d).sum::<f64>().sqrt();
    }
    let along: f64 = diff.iter().zip(dir).map(|(a, d)| a * d).sum::<f64>() / dir_norm2;
    diff.iter()
        .zip(dir)
        .map(|(a, d)| {
            let r = a - along * d;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

pub fn check_claims(
    game: &Game,
    rounds: &[Round],
    cfg: &PgConfig,
    equilibria: &EquilibriumSet,
) -> Result<ClaimsReport> {
    let eqs: Vec<FloatProfile> = equilibria.profiles().map(|p| p.to_float()).collect();

    // Claim 1: every query has regret above the approximation target.
    let mut claim1 = ClaimOutcome::pass();
    for (i, r) in rounds.iter().enumerate() {
        let reg = regret_f64(game, &r.query);
        if reg <= cfg.eps_r {
            claim1 = ClaimOutcome::fail(format!(
                "query {i} has regret {} <= eps_r {}",
                format_f64(reg),
                format_f64(cfg.eps_r)
            ));
            break;
        }
    }

    // Claim 2: the exact-match successor relation on the query set has no
    // cycle. Responses are deterministic, so the relation is a partial
    // function and a pointer chase suffices.
    let successor: Vec<Option<usize>> = rounds
        .iter()
        .map(|r| rounds.iter().position(|r2| r2.query == r.response))
        .collect();
    let mut claim2 = ClaimOutcome::pass();
    'outer: for start in 0..rounds.len() {
        let mut seen = vec![start];
        let mut cur = start;
        while let Some(next) = successor[cur] {
            if let Some(pos) = seen.iter().position(|&s| s == next) {
                claim2 = ClaimOutcome::fail(format!(
                    "queries {:?} form a response cycle",
                    &seen[pos..]
                ));
                break 'outer;
            }
            seen.push(next);
            cur = next;
        }
    }

    // Claim 3: no equilibrium within rho of any query line.
    let mut claim3 = ClaimOutcome::pass();
    'lines: for (i, r) in rounds.iter().enumerate() {
        let dir: Vec<f64> = r
            .response
            .coords()
            .zip(r.query.coords())
            .map(|(a, b)| a - b)
            .collect();
        for (j, z) in eqs.iter().enumerate() {
            let d = point_line_distance(z, &r.query, &dir);
            if d <= cfg.rho {
                claim3 = ClaimOutcome::fail(format!(
                    "equilibrium {j} lies {} from the line of query {i} (rho = {})",
                    format_f64(d),
                    format_f64(cfg.rho)
                ));
                break 'lines;
            }
        }
    }

    Ok(ClaimsReport {
        no_approximate_equilibrium: claim1,
        no_periodic_points: claim2,
        no_equilibrium_near_query_lines: claim3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::matching_pennies;
    use crate::pg::alice_respond;

    fn cfg() -> PgConfig {
        PgConfig::default()
    }

    #[test]
    fn claim1_fails_on_equilibrium_query() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let q = FloatProfile::uniform(&g);
        let rounds = vec![Round {
            response: alice_respond(&g, &q, &cfg()),
            query: q,
        }];
        let report = check_claims(&g, &rounds, &cfg(), &eqs).unwrap();
        assert!(!report.no_approximate_equilibrium.pass);
    }

    #[test]
    fn claim2_detects_two_cycle() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let a = FloatProfile::new(vec![vec![0.9, 0.1], vec![0.2, 0.8]]).unwrap();
        let b = FloatProfile::new(vec![vec![0.1, 0.9], vec![0.8, 0.2]]).unwrap();
        // Doctored transcript: responses point at each other exactly.
        let rounds = vec![
            Round {
                query: a.clone(),
                response: b.clone(),
            },
            Round {
                query: b,
                response: a,
            },
        ];
        let report = check_claims(&g, &rounds, &cfg(), &eqs).unwrap();
        assert!(!report.no_periodic_points.pass);
    }

    #[test]
    fn claim3_fails_when_line_hits_equilibrium() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        // Query whose doctored response points straight at the uniform
        // equilibrium: line distance 0.
        let q = FloatProfile::new(vec![vec![0.9, 0.1], vec![0.9, 0.1]]).unwrap();
        let r = FloatProfile::new(vec![vec![0.8, 0.2], vec![0.8, 0.2]]).unwrap();
        let rounds = vec![Round {
            query: q,
            response: r,
        }];
        let report = check_claims(&g, &rounds, &cfg(), &eqs).unwrap();
        assert!(!report.no_equilibrium_near_query_lines.pass);
    }

    #[test]
    fn honest_far_queries_pass_all_claims() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let q = FloatProfile::new(vec![vec![0.93, 0.07], vec![0.21, 0.79]]).unwrap();
        let rounds = vec![Round {
            response: alice_respond(&g, &q, &cfg()),
            query: q,
        }];
        let report = check_claims(&g, &rounds, &cfg(), &eqs).unwrap();
        assert!(report.all_pass(), "{report:?}");
    }
}
