//! The proving game: a budgeted prover (Bob) queries a claimed
//! Nash-convergent dynamic; the unbounded adversary (Alice) answers every
//! query x with a scaled Brown–von Neumann–Nash step x + eta * field(x) —
//! a pure function of the game that hands Bob no information he could not
//! compute himself. After the rounds Bob must produce an approximate
//! equilibrium; Alice prevails when Bob's claim fails the regret test and
//! she can exhibit a legitimate dynamic consistent with all her replies
//! (the ball construction of [`phi`]).

pub mod bob;
pub mod claims;
pub mod phi;

pub use bob::{BobStrategy, CheatBob, GridBob, RandomBob};
pub use claims::{check_claims, ClaimOutcome, ClaimsReport};
pub use phi::{build_phi, verify_phi, PhiDynamic, PhiReport};

use serde_json::{json, Value};

use crate::dynamics::bnn_step;
use crate::equilibria::{enumerate_nash, EquilibriumSet};
use crate::error::{Error, Result};
use crate::game::{format_f64, regret_f64, FloatProfile, Game};

/// Desk-scale protocol knobs standing in for the asymptotic quantities:
/// `budget` for the polynomial round bound, `eps_r` for the approximation
/// target, `eta` for Alice's step scale, `rho` for the ball radius of the
/// second-stage construction. The proofs only need rho << eta; the
/// constructor pins rho < eta/4.
#[derive(Debug, Clone)]
pub struct PgConfig {
    pub budget: usize,
    pub eps_r: f64,
    pub eta: f64,
    pub rho: f64,
    /// Index of the target equilibrium of the second-stage dynamic.
    pub target: usize,
    pub seed: u64,
}

impl Default for PgConfig {
    fn default() -> Self {
        PgConfig {
            budget: 32,
            eps_r: 1e-2,
            eta: 1e-3,
            rho: 1e-4,
            target: 0,
            seed: 0,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < self.eta / 4.0) {
            return Err(Error::Malformed(format!(
                "need 0 < rho < eta/4 (rho = {}, eta = {})",
                self.rho, self.eta
            )));
        }
        if !(self.eps_r > 0.0 && self.eps_r < 1.0) {
            return Err(Error::Malformed("need 0 < eps_r < 1".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "budget": self.budget,
            "eps_r": format_f64(self.eps_r),
            "eta": format_f64(self.eta),
            "rho": format_f64(self.rho),
            "target": self.target,
            "seed": self.seed,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub query: FloatProfile,
    pub response: FloatProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prevail {
    Alice,
    Bob,
}

impl Prevail {
    pub fn as_str(&self) -> &'static str {
        match self {
            Prevail::Alice => "alice",
            Prevail::Bob => "bob",
        }
    }
}

/// Full record of one run: every query/response pair, Bob's claimed
/// equilibrium with its measured regret, the claim-checker results, the
/// second-stage verification report, and the prevail verdict. Responses
/// are replayable bit-exactly from the queries and the config.
#[derive(Debug, Clone)]
pub struct PgTranscript {
    pub config: PgConfig,
    pub fingerprint: String,
    pub rounds: Vec<Round>,
    pub claim: FloatProfile,
    pub claim_regret: f64,
    pub claims_report: Option<ClaimsReport>,
    pub phi_report: Option<PhiReport>,
    pub prevail: Prevail,
}

impl PgTranscript {
    pub fn to_json(&self) -> Value {
        json!({
            "config": self.config.to_json(),
            "fingerprint": self.fingerprint,
            "rounds": self.rounds.iter().map(|r| json!({
                "query": r.query.to_json(),
                "response": r.response.to_json(),
            })).collect::<Vec<_>>(),
            "claim": self.claim.to_json(),
            "claim_regret": format_f64(self.claim_regret),
            "claims_report": self.claims_report.as_ref().map(|c| c.to_json()),
            "phi_report": self.phi_report.as_ref().map(|p| p.to_json()),
            "prevail": self.prevail.as_str(),
        })
    }
}

/// Alice's first-stage responder: one scaled BNN step. A pure function of
/// (game, x, eta) — Bob can recompute every response without her.
pub fn alice_respond(game: &Game, x: &FloatProfile, cfg: &PgConfig) -> FloatProfile {
    bnn_step(game, x, cfg.eta)
}

/// Play one run: alternate Bob queries and Alice responses for at most
/// `budget` rounds, collect Bob's claimed equilibrium, check the three
/// transcript claims, and (when they hold) build and verify the
/// consistent second-stage dynamic. `verify_samples` sizes the
/// verification sampling.
pub fn run_match(
    game: &Game,
    bob: &mut dyn BobStrategy,
    cfg: &PgConfig,
    verify_samples: usize,
) -> Result<PgTranscript> {
    cfg.validate()?;
    let equilibria = enumerate_nash(game)?;
    if cfg.target >= equilibria.len() {
        return Err(Error::Malformed(format!(
            "target equilibrium index {} out of range ({} equilibria)",
            cfg.target,
            equilibria.len()
        )));
    }
    let mut rounds: Vec<Round> = Vec::new();
    for _ in 0..cfg.budget {
        let Some(query) = bob.next_query(game, &rounds) else {
            break;
        };
        if !query.in_domain(1e-9) || !query.matches(game) {
            return Err(Error::QueryOutsideDomain(format!("{:?}", query.blocks())));
        }
        let response = alice_respond(game, &query, cfg);
        rounds.push(Round { query, response });
    }
    let claim = bob.final_answer(game, &rounds);
    let claim_regret = regret_f64(game, &claim);
    let bob_claim_ok = claim_regret <= cfg.eps_r;

    let claims_report = check_claims(game, &rounds, cfg, &equilibria)?;
    let phi_report = if claims_report.all_pass() {
        let phi = build_phi(game, &rounds, cfg, &equilibria)?;
        Some(verify_phi(
            game,
            &phi,
            &rounds,
            cfg,
            verify_samples,
            cfg.seed ^ 0x9e3779b97f4a7c15,
        ))
    } else {
        None
    };

    // Bob prevails on a valid claim no matter what; otherwise Alice must
    // exhibit a verified consistent dynamic to prevail.
    let prevail = if bob_claim_ok {
        Prevail::Bob
    } else if claims_report.all_pass() && phi_report.as_ref().is_some_and(|r| r.all_pass()) {
        Prevail::Alice
    } else {
        Prevail::Bob
    };
    Ok(PgTranscript {
        config: cfg.clone(),
        fingerprint: equilibria.fingerprint.clone(),
        rounds,
        claim,
        claim_regret,
        claims_report: Some(claims_report),
        phi_report,
        prevail,
    })
}

/// Periodic points of Alice's responder are approximate equilibria: every
/// member of an exact response cycle whose diameter stays within
/// budget * eta must have regret at most eps_r. Returns that implication's
/// value; errors when the input is not a cycle of the responder (each
/// member must map to the next bit-exactly, the last closing onto the
/// first within one step length).
pub fn lemma52_check(game: &Game, cycle: &[FloatProfile], cfg: &PgConfig) -> Result<bool> {
    if cycle.is_empty() {
        return Err(Error::NotACycle("empty input".into()));
    }
    for (i, x) in cycle.iter().enumerate() {
        let next = alice_respond(game, x, cfg);
        if i + 1 < cycle.len() {
            if next != cycle[i + 1] {
                return Err(Error::NotACycle(format!(
                    "member {i} does not map to member {}",
                    i + 1
                )));
            }
        } else if next.dist(&cycle[0]) > cfg.eta {
            return Err(Error::NotACycle(format!(
                "tail does not close onto the head ({} > eta)",
                next.dist(&cycle[0])
            )));
        }
    }
    // Diameter via the coordinate bounding box (an upper bound, cheap for
    // long cycles); if the cycle provably fits in budget * eta the regret
    // bound must hold at every member.
    let dim = cycle[0].dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for x in cycle {
        for (i, c) in x.coords().enumerate() {
            lo[i] = lo[i].min(c);
            hi[i] = hi[i].max(c);
        }
    }
    let diameter_bound: f64 = lo
        .iter()
        .zip(&hi)
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    if diameter_bound > cfg.budget as f64 * cfg.eta {
        return Ok(true); // implication holds vacuously
    }
    Ok(cycle.iter().all(|x| regret_f64(game, x) <= cfg.eps_r))
}

/// Re-exported handle for tests and the harness: equilibria as floats.
pub fn equilibria_as_float(set: &EquilibriumSet) -> Vec<FloatProfile> {
    set.profiles().map(|p| p.to_float()).collect()
}
