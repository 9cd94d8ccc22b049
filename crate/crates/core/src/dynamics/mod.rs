//! Discrete-time dynamics on the profile space: point-toward-equilibrium
//! (type 1), the chamber construction over an ordering line (type 2), the
//! Brown–von Neumann–Nash field, plus the generic Lyapunov-descent and
//! trajectory engines that treat any dynamic/Lyapunov pair uniformly.
//!
//! Trajectory simulation is float mode throughout; the exact-rational
//! twins used by the black-box reduction demos live in [`exact`].

pub mod bnn;
pub mod exact;
pub mod type1;
pub mod type2;

pub use bnn::{bnn_field, bnn_field_exact, bnn_step, BnnDynamic};
pub use type1::Type1Dynamic;
pub use type2::Type2Dynamic;

use crate::error::{Error, Result};
use crate::game::FloatProfile;

/// Default slowdown constant k.
pub const DEFAULT_K: f64 = 10.0;
/// Default even-slice contraction alpha.
pub const DEFAULT_ALPHA: f64 = 0.5;
/// Default fixed-point displacement threshold.
pub const DEFAULT_EPS_FIX: f64 = 1e-9;
/// Default step budget.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Tolerance for the trajectory-engine domain check.
pub const DOMAIN_TOL: f64 = 1e-9;

/// A discrete-time dynamic evaluable at any profile.
pub trait DiscreteDynamic {
    fn step(&self, x: &FloatProfile) -> FloatProfile;
    fn name(&self) -> &'static str;
}

impl<F: Fn(&FloatProfile) -> FloatProfile> DiscreteDynamic for (&'static str, F) {
    fn step(&self, x: &FloatProfile) -> FloatProfile {
        (self.1)(x)
    }
    fn name(&self) -> &'static str {
        self.0
    }
}

/// A claimed Lyapunov function for some dynamic: nonnegative, zero exactly
/// on the fixed points, strictly decreasing along steps elsewhere. The
/// descent engine enforces the decrease; `tau` relaxes the assertion in
/// float mode (0 demands strict decrease).
pub struct LyapunovEvaluator {
    eval: Box<dyn Fn(&FloatProfile) -> f64 + Send + Sync>,
    pub tau: f64,
}

impl LyapunovEvaluator {
    pub fn new(eval: impl Fn(&FloatProfile) -> f64 + Send + Sync + 'static) -> Self {
        LyapunovEvaluator {
            eval: Box::new(eval),
            tau: 0.0,
        }
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn value(&self, x: &FloatProfile) -> f64 {
        (self.eval)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    StepLimit,
    LeftDomain,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::StepLimit => "step-limit",
            Termination::LeftDomain => "left-domain-error",
        }
    }
}

/// A recorded run of a dynamic. Beyond `THIN_AFTER` steps only every
/// `THIN_STRIDE`-th profile is kept (the final profile always is).
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub start: FloatProfile,
    pub steps: usize,
    pub recorded: Vec<(usize, FloatProfile, f64)>, // (step index, profile, displacement into it)
    pub lyapunov: Option<Vec<f64>>,                // aligned with `recorded`
    pub termination: Termination,
    pub final_profile: FloatProfile,
}

pub const THIN_AFTER: usize = 10_000;
pub const THIN_STRIDE: usize = 100;

/// Iterate `phi` from `x0`, recording profiles and optional Lyapunov
/// values, until the step displacement drops below `eps_fix`, the step
/// budget runs out, or the iterate leaves the profile space by more than
/// the domain tolerance (which signals an implementation bug).
pub fn run_trajectory(
    phi: &dyn DiscreteDynamic,
    lyapunov: Option<&LyapunovEvaluator>,
    x0: &FloatProfile,
    eps_fix: f64,
    max_steps: usize,
) -> Result<Trajectory> {
    if !x0.in_domain(DOMAIN_TOL) {
        return Err(Error::QueryOutsideDomain(format!("{:?}", x0.blocks())));
    }
    let mut recorded = vec![(0usize, x0.clone(), 0.0)];
    let mut lyap = lyapunov.map(|l| vec![l.value(x0)]);
    let mut x = x0.clone();
    let mut termination = Termination::StepLimit;
    let mut steps = 0;
    for step in 1..=max_steps {
        let next = phi.step(&x);
        if !next.in_domain(DOMAIN_TOL) {
            termination = Termination::LeftDomain;
            steps = step;
            x = next;
            break;
        }
        let displacement = next.dist(&x);
        let record = step <= THIN_AFTER || step % THIN_STRIDE == 0;
        if record {
            recorded.push((step, next.clone(), displacement));
            if let (Some(ls), Some(l)) = (lyap.as_mut(), lyapunov) {
                ls.push(l.value(&next));
            }
        }
        let converged = displacement < eps_fix;
        x = next;
        steps = step;
        if converged {
            if !record {
                recorded.push((step, x.clone(), displacement));
                if let (Some(ls), Some(l)) = (lyap.as_mut(), lyapunov) {
                    ls.push(l.value(&x));
                }
            }
            termination = Termination::Converged;
            break;
        }
    }
    if termination == Termination::LeftDomain {
        return Err(Error::LeftDomain(format!(
            "{} after {} steps",
            phi.name(),
            steps
        )));
    }
    Ok(Trajectory {
        start: x0.clone(),
        steps,
        recorded,
        lyapunov: lyap,
        termination,
        final_profile: x,
    })
}

/// Outcome of a Lyapunov-guided descent.
#[derive(Debug, Clone)]
pub struct DescendOutcome {
    pub profile: FloatProfile,
    pub steps: usize,
    pub final_regret: f64,
}

/// Iterate `phi` asserting that `lyapunov` strictly decreases at every
/// non-terminal step; stop once the displacement falls below `eps_fix`.
/// A decrease violation aborts with a certificate (the offending point and
/// both Lyapunov values): the pair was not a dynamic/Lyapunov pair.
pub fn descend(
    phi: &dyn DiscreteDynamic,
    lyapunov: &LyapunovEvaluator,
    x0: &FloatProfile,
    eps_fix: f64,
    max_steps: usize,
    game: &crate::game::Game,
) -> Result<DescendOutcome> {
    let mut x = x0.clone();
    let mut lx = lyapunov.value(&x);
    for step in 1..=max_steps {
        let next = phi.step(&x);
        let displacement = next.dist(&x);
        if displacement < eps_fix {
            return Ok(DescendOutcome {
                final_regret: crate::game::regret_f64(game, &next),
                profile: next,
                steps: step,
            });
        }
        let lnext = lyapunov.value(&next);
        if lnext + lyapunov.tau >= lx {
            return Err(Error::LyapunovViolation {
                step,
                x: x.coords().collect(),
                before: lx,
                after: lnext,
            });
        }
        x = next;
        lx = lnext;
    }
    Err(Error::StepLimit(max_steps))
}

/// Trajectory CSV: `step,coord_0..coord_{n-1},lyapunov,displacement` with
/// floats at 17 significant digits and a trailing JSON footer line
/// carrying the termination reason.
pub fn trajectory_to_csv(t: &Trajectory) -> String {
    use crate::game::format_f64;
    let dim = t.start.dim();
    let mut out = String::new();
    out.push_str("step");
    for i in 0..dim {
        out.push_str(&format!(",coord_{i}"));
    }
    out.push_str(",lyapunov,displacement\n");
    for (row, (step, profile, displacement)) in t.recorded.iter().enumerate() {
        out.push_str(&step.to_string());
        for c in profile.coords() {
            out.push(',');
            out.push_str(&format_f64(c));
        }
        out.push(',');
        match &t.lyapunov {
            Some(ls) => out.push_str(&format_f64(ls[row])),
            None => out.push_str(""),
        }
        out.push(',');
        out.push_str(&format_f64(*displacement));
        out.push('\n');
    }
    out.push_str(&format!(
        "#{}\n",
        serde_json::json!({
            "termination": t.termination.as_str(),
            "steps": t.steps,
        })
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::matching_pennies;
    use crate::game::MixedProfile;

    #[test]
    fn descend_type1_on_matching_pennies() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &eqs, 0, DEFAULT_K).unwrap();
        let start = MixedProfile::pure(&g, &[0, 0]).unwrap().to_float();
        let lyap = dyn1.lyapunov();
        let out = descend(&dyn1, &lyap, &start, 1e-6, 10_000, &g).unwrap();
        assert!(out.final_regret < 1e-4);
        let uniform = FloatProfile::uniform(&g);
        assert!(out.profile.dist_linf(&uniform) < 1e-4);
    }

    #[test]
    fn descend_flags_corrupted_lyapunov_at_step_one() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &eqs, 0, DEFAULT_K).unwrap();
        let start = MixedProfile::pure(&g, &[0, 0]).unwrap().to_float();
        let honest = dyn1.lyapunov();
        let corrupted = LyapunovEvaluator::new(move |x| -honest.value(x));
        match descend(&dyn1, &corrupted, &start, 1e-9, 100, &g) {
            Err(Error::LyapunovViolation { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn descend_from_equilibrium_returns_after_one_step() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &eqs, 0, DEFAULT_K).unwrap();
        let x0 = FloatProfile::uniform(&g);
        let out = descend(&dyn1, &dyn1.lyapunov(), &x0, 1e-9, 100, &g).unwrap();
        assert_eq!(out.steps, 1);
        assert_eq!(out.profile, x0);
    }

    #[test]
    fn trajectory_records_and_footer() {
        let g = matching_pennies();
        let eqs = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &eqs, 0, DEFAULT_K).unwrap();
        let start = MixedProfile::pure(&g, &[0, 0]).unwrap().to_float();
        let t = run_trajectory(&dyn1, Some(&dyn1.lyapunov()), &start, 1e-9, 100_000).unwrap();
        assert_eq!(t.termination, Termination::Converged);
        let csv = trajectory_to_csv(&t);
        assert!(csv.starts_with("step,coord_0"));
        assert!(csv.contains("\"termination\":\"converged\""));
        // Start at equilibrium: length-1 trajectory.
        let t = run_trajectory(&dyn1, None, &FloatProfile::uniform(&g), 1e-9, 10).unwrap();
        assert_eq!(t.steps, 1);
        assert_eq!(t.termination, Termination::Converged);
    }
}
