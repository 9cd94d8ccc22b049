//! The point-toward-one-equilibrium dynamic: x moves in the direction of a
//! chosen equilibrium z with step length |z' - x| / k, where z' is the
//! nearest equilibrium — so the motion halts at every equilibrium on its
//! way. Euclidean distance to z is its Lyapunov function.

use crate::dynamics::{DiscreteDynamic, LyapunovEvaluator};
use crate::equilibria::EquilibriumSet;
use crate::error::{Error, Result};
use crate::game::{FloatProfile, Game};

#[derive(Clone)]
pub struct Type1Dynamic {
    equilibria: Vec<FloatProfile>,
    target: usize,
    k: f64,
}

impl Type1Dynamic {
    /// `target` indexes into the enumerated set; the equilibria carry exact
    /// regret-0 certificates from the enumeration.
    pub fn new(_game: &Game, set: &EquilibriumSet, target: usize, k: f64) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::NoEquilibria);
        }
        if target >= set.len() {
            return Err(Error::Malformed(format!(
                "target index {target} out of range ({} equilibria)",
                set.len()
            )));
        }
        if !(k > 1.0) {
            return Err(Error::Malformed("slowdown constant k must exceed 1".into()));
        }
        Ok(Type1Dynamic {
            equilibria: set.profiles().map(|p| p.to_float()).collect(),
            target,
            k,
        })
    }

    pub fn target_profile(&self) -> &FloatProfile {
        &self.equilibria[self.target]
    }

    pub fn equilibria(&self) -> &[FloatProfile] {
        &self.equilibria
    }

    pub fn nearest_equilibrium<'a>(&'a self, x: &FloatProfile) -> (&'a FloatProfile, f64) {
        let mut best = &self.equilibria[0];
        let mut best_d = x.dist(best);
        for e in &self.equilibria[1..] {
            let d = x.dist(e);
            if d < best_d {
                best = e;
                best_d = d;
            }
        }
        (best, best_d)
    }

    /// Euclidean distance to the chosen target.
    pub fn lyapunov(&self) -> LyapunovEvaluator {
        let z = self.target_profile().clone();
        LyapunovEvaluator::new(move |x| x.dist(&z))
    }
}

impl DiscreteDynamic for Type1Dynamic {
    fn step(&self, x: &FloatProfile) -> FloatProfile {
        let z = self.target_profile();
        let dist_z = x.dist(z);
        if dist_z == 0.0 {
            return x.clone();
        }
        let (_, dist_nearest) = self.nearest_equilibrium(x);
        if dist_nearest == 0.0 {
            return x.clone();
        }
        // Fraction of the way to z; truncated at z itself when the nearest
        // equilibrium is farther than k times the remaining distance, so the
        // iterate never overshoots the target or leaves the profile space.
        let t = (dist_nearest / (self.k * dist_z)).min(1.0);
        x.lerp(z, t)
    }

    fn name(&self) -> &'static str {
        "type1"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DEFAULT_K;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::game::MixedProfile;
    use crate::sampling::{rng_for, sample_profile};

    #[test]
    fn fixed_at_any_equilibrium() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &set, 0, DEFAULT_K).unwrap();
        for e in set.profiles() {
            let x = e.to_float();
            assert_eq!(dyn1.step(&x), x);
        }
    }

    #[test]
    fn hand_evaluated_step_on_matching_pennies() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &set, 0, DEFAULT_K).unwrap();
        let x = MixedProfile::pure(&g, &[0, 0]).unwrap().to_float();
        // |z - x| = 1, nearest is z itself: step is x + 0.1 (z - x).
        let next = dyn1.step(&x);
        let expected = vec![vec![0.95, 0.05], vec![0.95, 0.05]];
        for (b, e) in next.blocks().iter().zip(&expected) {
            for (v, w) in b.iter().zip(e) {
                assert!((v - w).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn target_pure_start_at_other_pure_is_fixed() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        // Target the (0,0) pure equilibrium, start at the (1,1) one.
        let target = set
            .profiles()
            .position(|p| *p == MixedProfile::pure(&g, &[0, 0]).unwrap())
            .unwrap();
        let dyn1 = Type1Dynamic::new(&g, &set, target, DEFAULT_K).unwrap();
        let x = MixedProfile::pure(&g, &[1, 1]).unwrap().to_float();
        assert_eq!(dyn1.step(&x), x);
    }

    #[test]
    fn lyapunov_strictly_decreases_off_equilibria() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &set, 2, DEFAULT_K).unwrap();
        let lyap = dyn1.lyapunov();
        let mut rng = rng_for(42, 0);
        let mut checked = 0;
        for _ in 0..100 {
            let x = sample_profile(&g, &mut rng);
            let (_, d) = dyn1.nearest_equilibrium(&x);
            if d < 1e-12 {
                continue;
            }
            let next = dyn1.step(&x);
            assert!(lyap.value(&next) < lyap.value(&x));
            checked += 1;
        }
        assert!(checked > 90);
    }

    #[test]
    fn step_preserves_block_sums() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = Type1Dynamic::new(&g, &set, 1, DEFAULT_K).unwrap();
        let mut rng = rng_for(5, 0);
        for _ in 0..50 {
            let x = sample_profile(&g, &mut rng);
            let next = dyn1.step(&x);
            for b in next.blocks() {
                assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }
}
