//! Alice's second-stage dynamic: outside small balls around the query
//! points it is a point-toward-T field that slows near every equilibrium,
//! Delta(x) = (T - x)/2 * |x - N|; inside a ball around query q it
//! interpolates between the recorded response step at the center and the
//! outside field at the ball boundary. Overlapping balls blend the center
//! steps with weights that vanish at each ball's boundary, which keeps the
//! dynamic continuous; the verifier, not the constructor, is the authority
//! on legitimacy.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::dynamics::DiscreteDynamic;
use crate::equilibria::EquilibriumSet;
use crate::error::{Error, Result};
use crate::game::{format_f64, regret_f64, FloatProfile, Game};
use crate::pg::claims::check_claims;
use crate::pg::{PgConfig, Round};
use crate::sampling::{rng_for, sample_profile};

#[derive(Debug, Clone)]
struct Ball {
    center: FloatProfile,
    /// Alice's recorded response at the center, returned verbatim there.
    response: FloatProfile,
    delta: Vec<f64>,
}

/// The consistent dynamic built from a transcript whose claims all hold.
#[derive(Debug, Clone)]
pub struct PhiDynamic {
    balls: Vec<Ball>,
    chains: Vec<Vec<usize>>,
    equilibria: Vec<FloatProfile>,
    target: FloatProfile,
    rho: f64,
}

impl PhiDynamic {
    pub fn chains(&self) -> &[Vec<usize>] {
        &self.chains
    }

    pub fn ball_centers(&self) -> impl Iterator<Item = &FloatProfile> {
        self.balls.iter().map(|b| &b.center)
    }

    pub fn target(&self) -> &FloatProfile {
        &self.target
    }

    pub fn equilibria(&self) -> &[FloatProfile] {
        &self.equilibria
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    fn nearest_equilibrium(&self, x: &FloatProfile) -> f64 {
        self.equilibria
            .iter()
            .map(|e| x.dist(e))
            .fold(f64::INFINITY, f64::min)
    }

    /// The outside field: toward the target, scaled by half the distance
    /// to the nearest equilibrium.
    fn outside_delta(&self, x: &FloatProfile) -> Vec<f64> {
        let scale = self.nearest_equilibrium(x) / 2.0;
        self.target
            .coords()
            .zip(x.coords())
            .map(|(t, v)| (t - v) * scale)
            .collect()
    }

    fn delta(&self, x: &FloatProfile) -> Vec<f64> {
        let containing: Vec<(usize, f64)> = self
            .balls
            .iter()
            .enumerate()
            .filter_map(|(i, b)| {
                let d = x.dist(&b.center);
                (d <= self.rho).then_some((i, d))
            })
            .collect();
        if containing.is_empty() {
            return self.outside_delta(x);
        }
        // Blend the recorded center steps; weights grow without bound at
        // the centers and vanish on each ball's boundary, so the blend is
        // continuous across every membership change.
        let mut blended = vec![0.0; x.dim()];
        let mut total_weight = 0.0;
        for &(i, d) in &containing {
            if d == 0.0 {
                blended.copy_from_slice(&self.balls[i].delta);
                total_weight = 1.0;
                break;
            }
            let w = (self.rho - d) / d;
            total_weight += w;
            for (b, dv) in blended.iter_mut().zip(&self.balls[i].delta) {
                *b += w * dv;
            }
        }
        if total_weight > 0.0 {
            for b in &mut blended {
                *b /= total_weight;
            }
        }
        // Interpolate against the outside field at the nearest ball's
        // boundary point along the ray from its center through x.
        let &(nearest, d) = containing
            .iter()
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
            .expect("nonempty");
        if d == 0.0 {
            return blended;
        }
        let center = &self.balls[nearest].center;
        let boundary: Vec<f64> = center
            .coords()
            .zip(x.coords())
            .map(|(c, v)| c + (v - c) * self.rho / d)
            .collect();
        let boundary = FloatProfile::from_blocks_unchecked(regroup(&boundary, x));
        let outside = self.outside_delta(&boundary);
        outside
            .iter()
            .zip(&blended)
            .map(|(o, b)| (d * o + (self.rho - d) * b) / self.rho)
            .collect()
    }
}

fn regroup(flat: &[f64], shape: &FloatProfile) -> Vec<Vec<f64>> {
    let mut it = flat.iter().copied();
    shape
        .blocks()
        .iter()
        .map(|b| (0..b.len()).map(|_| it.next().expect("dim")).collect())
        .collect()
}

impl DiscreteDynamic for PhiDynamic {
    fn step(&self, x: &FloatProfile) -> FloatProfile {
        // Bit-exact consistency at the recorded queries.
        for b in &self.balls {
            if b.center == *x {
                return b.response.clone();
            }
        }
        x.add_displacement(&self.delta(x)).project()
    }

    fn name(&self) -> &'static str {
        "phi"
    }
}

/// Build the consistent dynamic from a transcript. Requires all three
/// claims to hold; partitions the query set into response chains, wraps
/// each query in a ball of radius rho, and installs the target-seeking
/// outside field.
pub fn build_phi(
    game: &Game,
    rounds: &[Round],
    cfg: &PgConfig,
    equilibria: &EquilibriumSet,
) -> Result<PhiDynamic> {
    let report = check_claims(game, rounds, cfg, equilibria)?;
    if !report.all_pass() {
        return Err(Error::ClaimsFailed);
    }
    let eqs: Vec<FloatProfile> = equilibria.profiles().map(|p| p.to_float()).collect();
    if cfg.target >= eqs.len() {
        return Err(Error::Malformed("target equilibrium out of range".into()));
    }
    let balls: Vec<Ball> = rounds
        .iter()
        .map(|r| Ball {
            center: r.query.clone(),
            response: r.response.clone(),
            delta: r
                .response
                .coords()
                .zip(r.query.coords())
                .map(|(a, b)| a - b)
                .collect(),
        })
        .collect();
    // Chains: successor = exact response match; claim 2 guarantees the
    // relation is acyclic, so chains are simple paths covering the set.
    let successor: Vec<Option<usize>> = rounds
        .iter()
        .map(|r| rounds.iter().position(|r2| r2.query == r.response))
        .collect();
    let has_predecessor: Vec<bool> = (0..rounds.len())
        .map(|i| successor.iter().any(|s| *s == Some(i)))
        .collect();
    let mut chains = Vec::new();
    for start in 0..rounds.len() {
        if has_predecessor[start] {
            continue;
        }
        let mut chain = vec![start];
        let mut cur = start;
        while let Some(next) = successor[cur] {
            chain.push(next);
            cur = next;
        }
        chains.push(chain);
    }
    Ok(PhiDynamic {
        balls,
        chains,
        equilibria: eqs.clone(),
        target: eqs[cfg.target].clone(),
        rho: cfg.rho,
    })
}

#[derive(Debug, Clone)]
pub struct PhiCheck {
    pub pass: bool,
    pub detail: String,
}

impl PhiCheck {
    fn to_json(&self) -> Value {
        json!({ "pass": self.pass, "detail": self.detail })
    }
}

/// Verification report for the constructed dynamic: consistency with the
/// transcript, absence of spurious fixed points, a continuity probe
/// across ball boundaries, and convergence of sampled trajectories.
#[derive(Debug, Clone)]
pub struct PhiReport {
    pub consistency: PhiCheck,
    pub no_spurious_fixed_points: PhiCheck,
    pub continuity: PhiCheck,
    pub convergence: PhiCheck,
}

impl PhiReport {
    pub fn all_pass(&self) -> bool {
        self.consistency.pass
            && self.no_spurious_fixed_points.pass
            && self.continuity.pass
            && self.convergence.pass
    }

    pub fn to_json(&self) -> Value {
        json!({
            "consistency": self.consistency.to_json(),
            "no_spurious_fixed_points": self.no_spurious_fixed_points.to_json(),
            "continuity": self.continuity.to_json(),
            "convergence": self.convergence.to_json(),
        })
    }
}

const FIXED_POINT_DISPLACEMENT: f64 = 1e-12;
const CONVERGENCE_RADIUS: f64 = 1e-6;
const VECTOR_PHASE_CAP: usize = 20_000;
const SCALAR_PHASE_CAP: usize = 20_000_000;

pub fn verify_phi(
    game: &Game,
    phi: &PhiDynamic,
    rounds: &[Round],
    cfg: &PgConfig,
    samples: usize,
    seed: u64,
) -> PhiReport {
    // (a) Consistency: bit-exact agreement with every recorded response.
    let consistency = {
        let bad = rounds
            .iter()
            .enumerate()
            .find(|(_, r)| phi.step(&r.query) != r.response);
        match bad {
            None => PhiCheck {
                pass: true,
                detail: format!("{} responses reproduced bit-exactly", rounds.len()),
            },
            Some((i, _)) => PhiCheck {
                pass: false,
                detail: format!("response {i} not reproduced"),
            },
        }
    };

    // (b) No spurious fixed points: displacement stays positive wherever
    // regret exceeds eps_r — at uniform samples and at points packed
    // inside the balls.
    let no_spurious_fixed_points = {
        let failures: Vec<String> = (0..samples as u64)
            .into_par_iter()
            .filter_map(|i| {
                let mut rng = rng_for(seed, 2 * i);
                let x = sample_profile(game, &mut rng);
                check_moving(game, phi, cfg, &x)
            })
            .collect();
        let ball_failures: Vec<String> = (0..samples as u64)
            .into_par_iter()
            .filter_map(|i| {
                if phi.balls.is_empty() {
                    return None;
                }
                let mut rng = rng_for(seed, 2 * i + 1);
                let ball = &phi.balls[(i as usize) % phi.balls.len()];
                let x = perturb_within(&ball.center, cfg.rho, &mut rng);
                check_moving(game, phi, cfg, &x)
            })
            .collect();
        let total = failures.len() + ball_failures.len();
        PhiCheck {
            pass: total == 0,
            detail: if total == 0 {
                format!("no fixed point among {} samples", 2 * samples)
            } else {
                failures
                    .into_iter()
                    .chain(ball_failures)
                    .take(3)
                    .collect::<Vec<_>>()
                    .join("; ")
            },
        }
    };

    // (c) Continuity across ball boundaries: the interpolation squeezes a
    // field change of scale max|Delta| into a shell of width rho, so the
    // admissible constant is 2 + 4 * max|Delta| / rho.
    let continuity = {
        let max_delta = max_field_scale(phi, game, seed);
        let bound = 2.0 + 4.0 * max_delta / cfg.rho;
        let mut worst: f64 = 0.0;
        if !phi.balls.is_empty() {
            let mut rng = rng_for(seed, 1_000_003);
            for i in 0..2_000usize {
                let ball = &phi.balls[i % phi.balls.len()];
                let dir = random_direction(ball.center.dim(), &mut rng);
                let eps = 4e-7;
                let inside = offset(&ball.center, &dir, cfg.rho - eps);
                let outside = offset(&ball.center, &dir, cfg.rho + eps);
                if !inside.in_domain(0.0) || !outside.in_domain(0.0) {
                    continue;
                }
                let gap = phi.step(&inside).dist(&phi.step(&outside));
                worst = worst.max(gap / inside.dist(&outside));
            }
        }
        PhiCheck {
            pass: worst <= bound,
            detail: format!(
                "worst probe ratio {} against bound {}",
                format_f64(worst),
                format_f64(bound)
            ),
        }
    };

    // (d) Convergence: sampled trajectories reach an equilibrium.
    let convergence = {
        let failures: Vec<String> = (0..samples as u64)
            .into_par_iter()
            .filter_map(|i| {
                let mut rng = rng_for(seed, 3_000_000 + i);
                let x0 = sample_profile(game, &mut rng);
                if trajectory_converges(phi, &x0) {
                    None
                } else {
                    Some(format!("start {:?} did not converge", x0.blocks()))
                }
            })
            .collect();
        PhiCheck {
            pass: failures.is_empty(),
            detail: if failures.is_empty() {
                format!("{samples} trajectories reached an equilibrium")
            } else {
                failures.into_iter().take(3).collect::<Vec<_>>().join("; ")
            },
        }
    };

    PhiReport {
        consistency,
        no_spurious_fixed_points,
        continuity,
        convergence,
    }
}

fn check_moving(game: &Game, phi: &PhiDynamic, cfg: &PgConfig, x: &FloatProfile) -> Option<String> {
    if !x.in_domain(0.0) || regret_f64(game, x) <= cfg.eps_r {
        return None;
    }
    let moved = phi.step(x).dist(x);
    (moved <= FIXED_POINT_DISPLACEMENT).then(|| {
        format!(
            "displacement {} at regret {}",
            format_f64(moved),
            format_f64(regret_f64(game, x))
        )
    })
}

fn perturb_within(center: &FloatProfile, rho: f64, rng: &mut rand_chacha::ChaCha20Rng) -> FloatProfile {
    use rand::Rng;
    let dir = random_direction(center.dim(), rng);
    let radius: f64 = rng.gen_range(0.0..rho);
    offset(center, &dir, radius)
}

/// A unit vector in the per-block zero-sum subspace, so offsets preserve
/// probability sums.
fn random_direction(dim: usize, rng: &mut rand_chacha::ChaCha20Rng) -> Vec<f64> {
    use rand::Rng;
    loop {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = v.iter().sum::<f64>() / dim as f64;
        for x in &mut v {
            *x -= mean;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for x in &mut v {
                *x /= norm;
            }
            return v;
        }
    }
}

fn offset(x: &FloatProfile, dir: &[f64], scale: f64) -> FloatProfile {
    let delta: Vec<f64> = dir.iter().map(|d| d * scale).collect();
    x.add_displacement(&delta)
}

fn max_field_scale(phi: &PhiDynamic, game: &Game, seed: u64) -> f64 {
    let mut max_d: f64 = phi
        .balls
        .iter()
        .map(|b| b.delta.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let mut rng = rng_for(seed, 999);
    for _ in 0..200 {
        let x = sample_profile(game, &mut rng);
        let d = phi
            .outside_delta(&x)
            .iter()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt();
        max_d = max_d.max(d);
    }
    max_d
}

/// Follow the dynamic until it comes within the convergence radius of an
/// equilibrium. Once the iterate rides the straight tail segment toward
/// the target — outside every ball, target strictly nearest along the
/// whole remaining segment, segment clear of all balls — the motion is
/// exactly the scalar recurrence d <- d (1 - d/2), which decreases
/// monotonically to zero; a scalar loop finishes the run cheaply.
fn trajectory_converges(phi: &PhiDynamic, x0: &FloatProfile) -> bool {
    let mut x = x0.clone();
    for _ in 0..VECTOR_PHASE_CAP {
        if phi
            .equilibria
            .iter()
            .any(|e| x.dist(e) <= CONVERGENCE_RADIUS)
        {
            return true;
        }
        if on_tail_segment(phi, &x) {
            let mut d = x.dist(&phi.target);
            for _ in 0..SCALAR_PHASE_CAP {
                if d <= CONVERGENCE_RADIUS {
                    return true;
                }
                d *= 1.0 - d / 2.0;
            }
            return false;
        }
        x = phi.step(&x);
    }
    false
}

fn on_tail_segment(phi: &PhiDynamic, x: &FloatProfile) -> bool {
    let d_target = x.dist(&phi.target);
    if d_target == 0.0 {
        return true;
    }
    // Target strictly nearest along the whole segment.
    for e in &phi.equilibria {
        if e == &phi.target {
            continue;
        }
        if point_segment_distance(e, x, &phi.target) <= d_target {
            return false;
        }
    }
    // Segment clear of every ball.
    for b in &phi.balls {
        if point_segment_distance(&b.center, x, &phi.target) <= phi.rho * 2.0 {
            return false;
        }
    }
    true
}

fn point_segment_distance(p: &FloatProfile, a: &FloatProfile, b: &FloatProfile) -> f64 {
    let ab: Vec<f64> = b.coords().zip(a.coords()).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.coords().zip(a.coords()).map(|(x, y)| x - y).collect();
    let ab2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if ab2 == 0.0 {
        0.0
    } else {
        (ap.iter().zip(&ab).map(|(u, v)| u * v).sum::<f64>() / ab2).clamp(0.0, 1.0)
    };
    ap.iter()
        .zip(&ab)
        .map(|(u, v)| {
            let r = u - t * v;
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::pg::alice_respond;

    fn far_rounds(game: &Game, cfg: &PgConfig, queries: Vec<FloatProfile>) -> Vec<Round> {
        queries
            .into_iter()
            .map(|q| Round {
                response: alice_respond(game, &q, cfg),
                query: q,
            })
            .collect()
    }

    #[test]
    fn phi_reproduces_responses_and_fixes_target() {
        let g = battle_of_sexes();
        let cfg = PgConfig::default();
        let eqs = enumerate_nash(&g).unwrap();
        let rounds = far_rounds(
            &g,
            &cfg,
            vec![
                FloatProfile::new(vec![vec![0.91, 0.09], vec![0.13, 0.87]]).unwrap(),
                FloatProfile::new(vec![vec![0.27, 0.73], vec![0.81, 0.19]]).unwrap(),
            ],
        );
        let phi = build_phi(&g, &rounds, &cfg, &eqs).unwrap();
        for r in &rounds {
            assert_eq!(phi.step(&r.query), r.response);
        }
        let t = phi.target().clone();
        assert_eq!(phi.step(&t), t);
        assert_eq!(phi.chains().len(), 2);
    }

    #[test]
    fn phi_outside_field_points_at_target() {
        let g = matching_pennies();
        let cfg = PgConfig::default();
        let eqs = enumerate_nash(&g).unwrap();
        let phi = build_phi(&g, &[], &cfg, &eqs).unwrap();
        let x = FloatProfile::new(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let next = phi.step(&x);
        let toward: f64 = next
            .coords()
            .zip(x.coords())
            .zip(phi.target().coords().zip(x.coords()))
            .map(|((n, xv), (t, xv2))| (n - xv) * (t - xv2))
            .sum();
        assert!(toward > 0.0);
    }

    #[test]
    fn build_phi_requires_claims() {
        let g = matching_pennies();
        let cfg = PgConfig::default();
        let eqs = enumerate_nash(&g).unwrap();
        let q = FloatProfile::uniform(&g); // regret 0: claim 1 fails
        let rounds = vec![Round {
            response: alice_respond(&g, &q, &cfg),
            query: q,
        }];
        assert!(matches!(
            build_phi(&g, &rounds, &cfg, &eqs),
            Err(Error::ClaimsFailed)
        ));
    }

    #[test]
    fn verify_phi_passes_on_honest_small_match() {
        let g = battle_of_sexes();
        let cfg = PgConfig::default();
        let eqs = enumerate_nash(&g).unwrap();
        let rounds = far_rounds(
            &g,
            &cfg,
            vec![FloatProfile::new(vec![vec![0.89, 0.11], vec![0.17, 0.83]]).unwrap()],
        );
        let phi = build_phi(&g, &rounds, &cfg, &eqs).unwrap();
        let report = verify_phi(&g, &phi, &rounds, &cfg, 200, 17);
        assert!(report.all_pass(), "{report:?}");
    }

    #[test]
    fn empty_transcript_gives_plain_target_field() {
        let g = battle_of_sexes();
        let cfg = PgConfig::default();
        let eqs = enumerate_nash(&g).unwrap();
        let phi = build_phi(&g, &[], &cfg, &eqs).unwrap();
        let report = verify_phi(&g, &phi, &[], &cfg, 100, 3);
        assert!(report.all_pass(), "{report:?}");
    }
}
