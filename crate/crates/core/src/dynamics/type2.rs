//! The chamber dynamic: equilibria are ordered along a line whose normal
//! hyperplanes through the even-indexed equilibria slice the profile space
//! into polytopes. On a slice the dynamic contracts toward that slice's
//! equilibrium; inside a chamber it interpolates between the adjacent
//! slice dynamic and slow motion toward the chamber's own equilibrium, so
//! continuity holds across every boundary and the fixed points are exactly
//! the equilibria.

use crate::dynamics::{DiscreteDynamic, LyapunovEvaluator};
use crate::equilibria::EquilibriumSet;
use crate::error::{Error, Result};
use crate::game::{FloatProfile, Game};
use crate::sampling::{rng_for, sample_tangent_unit};

const MIN_PROJECTION_GAP: f64 = 1e-9;
const LINE_RESAMPLE_CAP: usize = 64;

/// Which rule produced a step; exposed for the continuity and Lyapunov
/// diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// On the hyperplane through an even-indexed equilibrium.
    Slice(usize),
    /// Chamber between a slice and the odd hyperplane of polytope `i`.
    Chamber { polytope: usize, lower: bool },
    /// Beyond the extreme odd hyperplanes (or the whole space when the
    /// game has a single equilibrium).
    Outer { polytope: usize },
}

#[derive(Clone)]
pub struct Type2Dynamic {
    /// Equilibria sorted by projection onto the ordering line.
    equilibria: Vec<FloatProfile>,
    projections: Vec<f64>,
    base: FloatProfile,
    /// Unit tangent direction of the ordering line.
    w: Vec<Vec<f64>>,
    alpha: f64,
    k: f64,
}

impl Type2Dynamic {
    /// Draw the ordering line from the seed, resampling until all
    /// equilibrium projections are pairwise distinct.
    pub fn new(game: &Game, set: &EquilibriumSet, alpha: f64, k: f64, seed: u64) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::NoEquilibria);
        }
        if set.len() % 2 == 0 {
            return Err(Error::Degenerate(format!(
                "even equilibrium count {} (chamber construction needs oddness)",
                set.len()
            )));
        }
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::Malformed("alpha must lie in (0,1)".into()));
        }
        if !(k > 1.0) {
            return Err(Error::Malformed("slowdown constant k must exceed 1".into()));
        }
        let eqs: Vec<FloatProfile> = set.profiles().map(|p| p.to_float()).collect();
        let base = FloatProfile::uniform(game);
        for attempt in 0..LINE_RESAMPLE_CAP {
            let mut rng = rng_for(seed, attempt as u64);
            let w = sample_tangent_unit(game, &mut rng);
            let mut tagged: Vec<(f64, usize)> = eqs
                .iter()
                .enumerate()
                .map(|(i, e)| (project(e, &base, &w), i))
                .collect();
            tagged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
            let distinct = tagged
                .windows(2)
                .all(|p| p[1].0 - p[0].0 > MIN_PROJECTION_GAP);
            if distinct {
                let equilibria = tagged.iter().map(|&(_, i)| eqs[i].clone()).collect();
                let projections = tagged.iter().map(|&(t, _)| t).collect();
                return Ok(Type2Dynamic {
                    equilibria,
                    projections,
                    base,
                    w,
                    alpha,
                    k,
                });
            }
        }
        Err(Error::ResampleCap(LINE_RESAMPLE_CAP))
    }

    pub fn equilibria(&self) -> &[FloatProfile] {
        &self.equilibria
    }

    pub fn projections(&self) -> &[f64] {
        &self.projections
    }

    pub fn projection_of(&self, x: &FloatProfile) -> f64 {
        project(x, &self.base, &self.w)
    }

    fn slice_projections(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        // Even-indexed equilibria in 1-based terms sit at odd 0-based slots.
        (1..self.equilibria.len())
            .step_by(2)
            .map(|i| (i, self.projections[i]))
    }

    pub fn region_of(&self, x: &FloatProfile) -> Region {
        let t = self.projection_of(x);
        for (slot, s) in self.slice_projections() {
            if t == s {
                return Region::Slice(slot);
            }
        }
        // Polytope index i: odd equilibrium at slot 2i, bounded by slices
        // at slots 2i-1 and 2i+1.
        let polytopes = (self.equilibria.len() + 1) / 2;
        let mut poly = 0;
        for i in 0..polytopes {
            poly = i;
            let upper = 2 * i + 1;
            if upper >= self.equilibria.len() || t < self.projections[upper] {
                break;
            }
        }
        let odd_t = self.projections[2 * poly];
        let lower = t < odd_t;
        let has_slice = if lower { poly > 0 } else { 2 * poly + 1 < self.equilibria.len() };
        if has_slice {
            Region::Chamber {
                polytope: poly,
                lower,
            }
        } else {
            Region::Outer { polytope: poly }
        }
    }

    /// Orthogonal projection of x onto the hyperplane with projection
    /// value `s`. Deliberately not clamped into the profile space: the
    /// pull toward the slice equilibrium must stay exactly tangential to
    /// the slice, otherwise the along-line escape component can cancel
    /// against it near the boundary and strand trajectories at spurious
    /// balance points. The step output is clamped instead.
    fn project_to_slice(&self, x: &FloatProfile, t: f64, s: f64) -> FloatProfile {
        let shift = t - s;
        let delta: Vec<f64> = self.w.iter().flatten().map(|wv| -shift * wv).collect();
        x.add_displacement(&delta)
    }

    fn displacement(&self, x: &FloatProfile) -> Vec<f64> {
        let t = self.projection_of(x);
        let n2 = |a: &FloatProfile, b: &FloatProfile| -> Vec<f64> {
            a.coords().zip(b.coords()).map(|(u, v)| u - v).collect()
        };
        match self.region_of(x) {
            Region::Slice(slot) => {
                let z = &self.equilibria[slot];
                n2(z, x).iter().map(|d| self.alpha * d).collect()
            }
            Region::Chamber { polytope, lower } => {
                let odd = &self.equilibria[2 * polytope];
                let odd_t = self.projections[2 * polytope];
                let slice_slot = if lower { 2 * polytope - 1 } else { 2 * polytope + 1 };
                let even = &self.equilibria[slice_slot];
                let s = self.projections[slice_slot];
                let width = (odd_t - s).abs();
                let d = (t - s).abs();
                let sigma = (d / width).clamp(0.0, 1.0);
                let x_slice = self.project_to_slice(x, t, s);
                let even_pull = n2(even, &x_slice);
                let odd_pull = n2(odd, x);
                even_pull
                    .iter()
                    .zip(&odd_pull)
                    .map(|(e, o)| (1.0 - sigma) * self.alpha * e + sigma * o / self.k)
                    .collect()
            }
            Region::Outer { polytope } => {
                let odd = &self.equilibria[2 * polytope];
                let odd_pull = n2(odd, x);
                if self.equilibria.len() == 1 {
                    return odd_pull.iter().map(|o| o / self.k).collect();
                }
                // Beyond the extreme odd hyperplane: blend slow motion to
                // the extreme equilibrium with the adjacent slice dynamic,
                // the slice share growing with distance from the odd
                // hyperplane so the two rules agree on it.
                let slice_slot = if polytope == 0 { 1 } else { 2 * polytope - 1 };
                let even = &self.equilibria[slice_slot];
                let s = self.projections[slice_slot];
                let odd_t = self.projections[2 * polytope];
                let width = (odd_t - s).abs();
                let d = (t - s).abs();
                let omega = if d > width { 1.0 - width / d } else { 0.0 };
                let x_slice = self.project_to_slice(x, t, s);
                let even_pull = n2(even, &x_slice);
                even_pull
                    .iter()
                    .zip(&odd_pull)
                    .map(|(e, o)| omega * self.alpha * e + (1.0 - omega) * o / self.k)
                    .collect()
            }
        }
    }

    /// The chamber Lyapunov function: distance to the slice equilibrium on
    /// slices; within a polytope, progress along the line toward the odd
    /// hyperplane (normalized by chamber width) plus the hyperplane
    /// distance term at the orthogonal projection. A single-equilibrium
    /// game reduces to plain Euclidean distance.
    pub fn lyapunov(&self) -> LyapunovEvaluator {
        let this = self.clone();
        LyapunovEvaluator::new(move |x| this.lyapunov_value(x))
    }

    pub fn lyapunov_value(&self, x: &FloatProfile) -> f64 {
        if self.equilibria.len() == 1 {
            return x.dist(&self.equilibria[0]);
        }
        let t = self.projection_of(x);
        match self.region_of(x) {
            Region::Slice(slot) => x.dist(&self.equilibria[slot]),
            Region::Chamber { polytope, lower } => self.polytope_lyapunov(x, t, polytope, lower),
            Region::Outer { polytope } => {
                let lower = t < self.projections[2 * polytope];
                self.polytope_lyapunov(x, t, polytope, lower)
            }
        }
    }

    fn polytope_lyapunov(&self, x: &FloatProfile, t: f64, polytope: usize, lower: bool) -> f64 {
        let odd = &self.equilibria[2 * polytope];
        let odd_t = self.projections[2 * polytope];
        // Chamber width on this side; the outer regions and the sides of
        // the extreme polytopes without a slice reuse the inner chamber's
        // width as their normalization.
        let slice_slot = if lower {
            if polytope == 0 {
                2 * polytope + 1
            } else {
                2 * polytope - 1
            }
        } else if 2 * polytope + 1 < self.equilibria.len() {
            2 * polytope + 1
        } else {
            2 * polytope - 1
        };
        let width = (odd_t - self.projections[slice_slot]).abs();
        let along = (t - odd_t).abs() / width;
        // Distance from the orthogonal projection (onto the odd
        // hyperplane) to the odd equilibrium: the tangential component.
        let d2 = x.dist(odd).powi(2) - (t - odd_t) * (t - odd_t);
        along + d2.max(0.0).sqrt() / self.k
    }
}

fn project(x: &FloatProfile, base: &FloatProfile, w: &[Vec<f64>]) -> f64 {
    x.coords()
        .zip(base.coords())
        .zip(w.iter().flatten())
        .map(|((xv, bv), wv)| (xv - bv) * wv)
        .sum()
}

impl DiscreteDynamic for Type2Dynamic {
    fn step(&self, x: &FloatProfile) -> FloatProfile {
        let delta = self.displacement(x);
        x.add_displacement(&delta).project()
    }

    fn name(&self) -> &'static str {
        "type2"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{run_trajectory, Termination, DEFAULT_ALPHA, DEFAULT_K};
    use crate::equilibria::{enumerate_nash, random_nondegenerate_game};
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::game::{regret_f64, MixedProfile};
    use crate::sampling::{rng_for, sample_profile};

    #[test]
    fn even_equilibrium_is_fixed_and_slice_contracts() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = Type2Dynamic::new(&g, &set, DEFAULT_ALPHA, DEFAULT_K, 9).unwrap();
        // The middle (slot 1) equilibrium owns the slice.
        let z = dyn2.equilibria()[1].clone();
        assert_eq!(dyn2.step(&z), z);
        for e in dyn2.equilibria() {
            let moved = dyn2.step(e);
            assert!(moved.dist(e) < 1e-12);
        }
    }

    #[test]
    fn single_equilibrium_points_toward_it() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = Type2Dynamic::new(&g, &set, DEFAULT_ALPHA, DEFAULT_K, 3).unwrap();
        let x = MixedProfile::pure(&g, &[0, 0]).unwrap().to_float();
        let next = dyn2.step(&x);
        let z = &dyn2.equilibria()[0];
        let inner: f64 = next
            .coords()
            .zip(x.coords())
            .zip(z.coords().zip(x.coords()))
            .map(|((n, xv), (zv, xv2))| (n - xv) * (zv - xv2))
            .sum();
        assert!(inner > 0.0, "step must point toward the equilibrium");
        // Direction matches the slow point-toward-z dynamic exactly.
        let expected = x.lerp(z, 1.0 / DEFAULT_K);
        assert!(next.dist(&expected) < 1e-15);
    }

    #[test]
    fn trajectories_converge_to_some_equilibrium() {
        let g = random_nondegenerate_game(3, 3, 77).unwrap();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = Type2Dynamic::new(&g, &set, DEFAULT_ALPHA, DEFAULT_K, 5).unwrap();
        let mut rng = rng_for(21, 0);
        for _ in 0..10 {
            let x0 = sample_profile(&g, &mut rng);
            let t = run_trajectory(&dyn2, None, &x0, 1e-9, 200_000).unwrap();
            assert_eq!(t.termination, Termination::Converged);
            let near = dyn2
                .equilibria()
                .iter()
                .map(|e| t.final_profile.dist_linf(e))
                .fold(f64::INFINITY, f64::min);
            assert!(near < 1e-6, "converged {near} away from the set");
        }
    }

    #[test]
    fn fixed_points_only_at_equilibria() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = Type2Dynamic::new(&g, &set, DEFAULT_ALPHA, DEFAULT_K, 9).unwrap();
        let mut rng = rng_for(100, 0);
        for _ in 0..200 {
            let x = sample_profile(&g, &mut rng);
            let moved = dyn2.step(&x).dist(&x);
            if regret_f64(&g, &x) > 1e-9 {
                assert!(moved > 1e-12);
            }
        }
    }

    #[test]
    fn continuity_across_slices() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = Type2Dynamic::new(&g, &set, DEFAULT_ALPHA, DEFAULT_K, 9).unwrap();
        // Slice of the slot-1 equilibrium; straddle it along w.
        let mut rng = rng_for(55, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..2_000 {
            let x = sample_profile(&g, &mut rng);
            let t = dyn2.projection_of(&x);
            let s = dyn2.projections()[1];
            // Shift x along w so it sits just below/just above the slice.
            let shift_to = |target: f64| -> FloatProfile {
                let delta: Vec<f64> = dyn2
                    .w
                    .iter()
                    .flatten()
                    .map(|wv| (target - t) * wv)
                    .collect();
                x.add_displacement(&delta)
            };
            let eps = 5e-7;
            let a = shift_to(s - eps);
            let b = shift_to(s + eps);
            if !a.in_domain(0.0) || !b.in_domain(0.0) {
                continue;
            }
            let gap = dyn2.step(&a).dist(&dyn2.step(&b));
            worst = worst.max(gap / a.dist(&b));
        }
        assert!(worst <= 10.0, "empirical Lipschitz constant {worst}");
    }
}
