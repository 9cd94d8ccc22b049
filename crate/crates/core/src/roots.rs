//! Exact arithmetic over real numbers of the form (p + q*sqrt(s))/r —
//! the roots of integer quadratics. Ordering is decided purely by integer
//! sign analysis (repeated squaring of the radical parts); no floating
//! point is consulted anywhere on the comparison path.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::rational::{is_perfect_square, isqrt_floor, Rat};

/// Square factors with a prime divisor at most this bound are pulled out
/// of the radicand during canonicalization; together with the perfect
/// square check this makes the radicand squarefree for every s < 2^24, and
/// best effort beyond. Comparisons never rely on squarefree-ness.
const SQUARE_EXTRACTION_BOUND: u64 = 4096;

/// The real algebraic number (p + q*sqrt(s))/r with integers p, q, r > 0,
/// s >= 0. Rationals are the q = 0, s = 0 case.
#[derive(Debug, Clone)]
pub struct QuadraticRoot {
    p: BigInt,
    q: BigInt,
    s: BigInt,
    r: BigInt,
    approx: f64,
}

impl QuadraticRoot {
    pub fn new(p: BigInt, q: BigInt, s: BigInt, r: BigInt) -> Self {
        assert!(!r.is_zero(), "zero denominator");
        assert!(!s.is_negative(), "negative radicand");
        let (mut p, mut q, mut s, mut r) = (p, q, s, r);
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        if q.is_zero() {
            s = BigInt::zero();
        }
        if s.is_zero() || s.is_one() {
            if s.is_one() {
                p += &q;
            }
            q = BigInt::zero();
            s = BigInt::zero();
        } else if let Some(root) = is_perfect_square(&s) {
            p += &q * root;
            q = BigInt::zero();
            s = BigInt::zero();
        } else {
            // Pull square factors out of the radicand.
            let mut d = 2u64;
            while d <= SQUARE_EXTRACTION_BOUND {
                let dd = BigInt::from(d) * BigInt::from(d);
                while (&s % &dd).is_zero() {
                    s /= &dd;
                    q *= BigInt::from(d);
                }
                d += 1;
                if BigInt::from(d) * BigInt::from(d) > s {
                    break;
                }
            }
            if let Some(root) = is_perfect_square(&s) {
                p += &q * root;
                q = BigInt::zero();
                s = BigInt::zero();
            }
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() && !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        let approx = {
            let sp = p.to_f64().unwrap_or(f64::NAN);
            let sq = q.to_f64().unwrap_or(f64::NAN);
            let ss = s.to_f64().unwrap_or(f64::NAN);
            let sr = r.to_f64().unwrap_or(f64::NAN);
            (sp + sq * ss.sqrt()) / sr
        };
        QuadraticRoot { p, q, s, r, approx }
    }

    pub fn from_rational(v: &Rat) -> Self {
        QuadraticRoot::new(
            v.numer().clone(),
            BigInt::zero(),
            BigInt::zero(),
            v.denom().clone(),
        )
    }

    pub fn from_integer(n: i64) -> Self {
        QuadraticRoot::new(BigInt::from(n), BigInt::zero(), BigInt::zero(), BigInt::one())
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    pub fn as_rational(&self) -> Option<Rat> {
        self.is_rational()
            .then(|| Rat::new(self.p.clone(), self.r.clone()))
    }

    /// Cached double approximation; display and plotting only.
    pub fn to_f64(&self) -> f64 {
        self.approx
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt, &BigInt) {
        (&self.p, &self.q, &self.s, &self.r)
    }

    /// Exact sign of the represented real.
    pub fn sign(&self) -> Ordering {
        // sign of (p + q sqrt(s)) since r > 0.
        sign_linear(&self.p, &self.q, &self.s)
    }

    /// Exact order against another root: sign analysis of the difference
    /// a - b = (A + B sqrt(s_a) + C sqrt(s_b)) / (r_a r_b).
    pub fn compare(&self, other: &QuadraticRoot) -> Ordering {
        if self.s == other.s {
            // Common radicand: (P + Q sqrt(s)) sign.
            let p = &self.p * &other.r - &other.p * &self.r;
            let q = &self.q * &other.r - &other.q * &self.r;
            return sign_linear(&p, &q, &self.s);
        }
        let a = &self.p * &other.r - &other.p * &self.r;
        let b = &self.q * &other.r;
        let c = -(&other.q * &self.r);
        sign_two_radicals(&a, &b, &self.s, &c, &other.s)
    }

    /// Exact comparison against a rational.
    pub fn compare_rational(&self, v: &Rat) -> Ordering {
        self.compare(&QuadraticRoot::from_rational(v))
    }

    /// Rational enclosure [lo, hi] with the radical bracketed to
    /// 2^-bits; collapses to a point for rationals.
    pub fn enclosure(&self, bits: u64) -> (Rat, Rat) {
        if self.is_rational() {
            let v = Rat::new(self.p.clone(), self.r.clone());
            return (v.clone(), v);
        }
        let scaled = &self.s << (2 * bits);
        let lo_root = isqrt_floor(&scaled);
        let hi_root = &lo_root + 1;
        let den = BigInt::one() << bits;
        let sqrt_lo = Rat::new(lo_root, den.clone());
        let sqrt_hi = Rat::new(hi_root, den);
        let p = Rat::from_integer(self.p.clone());
        let q = Rat::from_integer(self.q.clone());
        let r = Rat::from_integer(self.r.clone());
        let (a, b) = if self.q.is_positive() {
            ((&p + &q * sqrt_lo) / &r, (&p + &q * sqrt_hi) / &r)
        } else {
            ((&p + &q * sqrt_hi) / &r, (&p + &q * sqrt_lo) / &r)
        };
        (a, b)
    }

    /// Canonical text form: `num/den` for rationals, `(p+q*sqrt(s))/r`
    /// otherwise.
    pub fn to_display(&self) -> String {
        if self.is_rational() {
            format!("{}/{}", self.p, self.r)
        } else {
            format!("({}+{}*sqrt({}))/{}", self.p, self.q, self.s, self.r)
        }
    }
}

impl fmt::Display for QuadraticRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_display())
    }
}

impl PartialEq for QuadraticRoot {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Ordering::Equal
    }
}

impl Eq for QuadraticRoot {}

impl PartialOrd for QuadraticRoot {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.compare(other))
    }
}

impl Ord for QuadraticRoot {
    fn cmp(&self, other: &Self) -> Ordering {
        self.compare(other)
    }
}

/// Exact total order on quadratic roots, consistent with the reals.
pub fn compare_roots(a: &QuadraticRoot, b: &QuadraticRoot) -> Ordering {
    a.compare(b)
}

/// Sign of P + Q*sqrt(m), all integers, m >= 0.
fn sign_linear(p: &BigInt, q: &BigInt, m: &BigInt) -> Ordering {
    if q.is_zero() || m.is_zero() {
        return int_sign(p);
    }
    if p.is_zero() {
        return int_sign(q);
    }
    let sp = int_sign(p);
    let sq = int_sign(q);
    if sp == sq {
        return sp;
    }
    // Opposite signs: compare P^2 with Q^2 m; the larger magnitude wins.
    let p2 = p * p;
    let q2m = q * q * m;
    match p2.cmp(&q2m) {
        Ordering::Greater => sp,
        Ordering::Less => sq,
        Ordering::Equal => Ordering::Equal,
    }
}

/// Sign of A + B*sqrt(s) + C*sqrt(t), all integers, s, t > 0, s != t,
/// B != 0, C != 0 on entry in the general case (degenerate cases are
/// routed to `sign_linear`).
fn sign_two_radicals(a: &BigInt, b: &BigInt, s: &BigInt, c: &BigInt, t: &BigInt) -> Ordering {
    if b.is_zero() || s.is_zero() {
        let base = if s.is_zero() { a + b } else { a.clone() };
        return sign_linear(&base, c, t);
    }
    if c.is_zero() || t.is_zero() {
        let base = if t.is_zero() { a + c } else { a.clone() };
        return sign_linear(&base, b, s);
    }
    // u = B sqrt(s) + C sqrt(t).
    let su = {
        let sb = int_sign(b);
        let sc = int_sign(c);
        if sb == sc {
            sb
        } else {
            let lhs = b * b * s;
            let rhs = c * c * t;
            match lhs.cmp(&rhs) {
                Ordering::Greater => sb,
                Ordering::Less => sc,
                Ordering::Equal => Ordering::Equal,
            }
        }
    };
    if a.is_zero() {
        return su;
    }
    let sa = int_sign(a);
    if su == Ordering::Equal {
        return sa;
    }
    if su == sa {
        return sa;
    }
    // |u| versus |A|: square u once, leaving a single radical sqrt(s t).
    // u^2 = B^2 s + C^2 t + 2 B C sqrt(s t).
    let p = b * b * s + c * c * t - a * a;
    let q = BigInt::from(2) * b * c;
    let m = s * t;
    match sign_linear(&p, &q, &m) {
        Ordering::Greater => su,
        Ordering::Less => sa,
        Ordering::Equal => Ordering::Equal,
    }
}

fn int_sign(v: &BigInt) -> Ordering {
    if v.is_positive() {
        Ordering::Greater
    } else if v.is_negative() {
        Ordering::Less
    } else {
        Ordering::Equal
    }
}

/// Real roots of a*x^2 + b*x + c with rational coefficients, ascending.
/// `None` marks the identically-zero polynomial (every real is a root).
pub fn real_roots(a: &Rat, b: &Rat, c: &Rat) -> Option<Vec<QuadraticRoot>> {
    if a.is_zero() && b.is_zero() {
        return if c.is_zero() { None } else { Some(vec![]) };
    }
    // Clear denominators to integers.
    let lcm = a.denom().lcm(b.denom()).lcm(c.denom());
    let ia = (a * Rat::from_integer(lcm.clone())).to_integer();
    let ib = (b * Rat::from_integer(lcm.clone())).to_integer();
    let ic = (c * Rat::from_integer(lcm)).to_integer();
    if ia.is_zero() {
        return Some(vec![QuadraticRoot::new(
            -ic,
            BigInt::zero(),
            BigInt::zero(),
            ib,
        )]);
    }
    let disc = &ib * &ib - BigInt::from(4) * &ia * &ic;
    if disc.is_negative() {
        return Some(vec![]);
    }
    if disc.is_zero() {
        return Some(vec![QuadraticRoot::new(
            -ib,
            BigInt::zero(),
            BigInt::zero(),
            BigInt::from(2) * ia,
        )]);
    }
    let den = BigInt::from(2) * &ia;
    let lo = QuadraticRoot::new(-ib.clone(), BigInt::from(-1), disc.clone(), den.clone());
    let hi = QuadraticRoot::new(-ib, BigInt::one(), disc, den);
    let mut roots = vec![lo, hi];
    roots.sort();
    Some(roots)
}

/// Exact sign of a*x^2 + b*x + c at the quadratic root x.
pub fn quadratic_sign_at(a: &Rat, b: &Rat, c: &Rat, x: &QuadraticRoot) -> Ordering {
    let (p, q, s, r) = x.parts();
    // x = (p + q sqrt(s))/r, x^2 = (p^2 + q^2 s + 2 p q sqrt(s))/r^2.
    // Value * r^2 = a (p^2 + q^2 s) + b p r + c r^2 + (2 a p q + b q r) sqrt(s),
    // still rational coefficients; clear denominators and take the sign.
    let p2 = p * p;
    let q2s = q * q * s;
    let rat_part = a * Rat::from_integer(&p2 + &q2s)
        + b * Rat::from_integer(p * r)
        + c * Rat::from_integer(r * r);
    let rad_part = a * Rat::from_integer(BigInt::from(2) * p * q) + b * Rat::from_integer(q * r);
    let lcm = rat_part.denom().lcm(rad_part.denom());
    let ip = (&rat_part * Rat::from_integer(lcm.clone())).to_integer();
    let iq = (&rad_part * Rat::from_integer(lcm)).to_integer();
    sign_linear(&ip, &iq, s)
}

/// A rational strictly between two roots (a < b required); found by
/// tightening the radical enclosures until they separate.
pub fn rational_between(a: &QuadraticRoot, b: &QuadraticRoot) -> Rat {
    debug_assert_eq!(a.compare(b), Ordering::Less);
    let mut bits = 16u64;
    loop {
        let (_, a_hi) = a.enclosure(bits);
        let (b_lo, _) = b.enclosure(bits);
        if a_hi < b_lo {
            return (a_hi + b_lo) / Rat::from_integer(2.into());
        }
        bits *= 2;
        assert!(bits <= 1 << 20, "enclosure refinement runaway");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn root(p: i64, q: i64, s: i64, r: i64) -> QuadraticRoot {
        QuadraticRoot::new(p.into(), q.into(), s.into(), r.into())
    }

    #[test]
    fn canonicalization_folds_squares() {
        // (0 + 1*sqrt(8))/2 = sqrt(2).
        let a = root(0, 1, 8, 2);
        let b = root(0, 1, 2, 1);
        assert_eq!(a, b);
        // sqrt(9) = 3.
        let c = root(0, 1, 9, 1);
        assert!(c.is_rational());
        assert_eq!(c.as_rational().unwrap(), rat(3, 1));
    }

    #[test]
    fn spec_comparison_examples() {
        // (1 + sqrt 2)/2 < sqrt 3.
        assert_eq!(root(1, 1, 2, 2).compare(&root(0, 1, 3, 1)), Ordering::Less);
        // x vs x.
        let x = root(3, -2, 5, 7);
        assert_eq!(x.compare(&x), Ordering::Equal);
        // 3/2 > sqrt 2 (9/4 > 2 after squaring).
        assert_eq!(
            QuadraticRoot::from_rational(&rat(3, 2)).compare(&root(0, 1, 2, 1)),
            Ordering::Greater
        );
    }

    #[test]
    fn ordering_matches_floats_on_random_small_roots() {
        // A cheap spot check; the acceptance suite runs the 64-digit oracle.
        let mut roots = Vec::new();
        for p in -4i64..5 {
            for q in -3i64..4 {
                for s in [0, 2, 3, 5] {
                    for r in [1i64, 2, 3] {
                        roots.push(root(p, q, s, r));
                    }
                }
            }
        }
        for a in &roots {
            for b in roots.iter().step_by(7) {
                let exact = a.compare(b);
                let float = a.to_f64().partial_cmp(&b.to_f64()).unwrap();
                if (a.to_f64() - b.to_f64()).abs() > 1e-9 {
                    assert_eq!(exact, float, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn real_roots_cases() {
        // x^2 - 2: roots +-sqrt(2).
        let r = real_roots(&rat(1, 1), &rat(0, 1), &rat(-2, 1)).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0], root(0, -1, 2, 1));
        assert_eq!(r[1], root(0, 1, 2, 1));
        // x^2 + 1: none.
        assert!(real_roots(&rat(1, 1), &rat(0, 1), &rat(1, 1))
            .unwrap()
            .is_empty());
        // Identically zero.
        assert!(real_roots(&rat(0, 1), &rat(0, 1), &rat(0, 1)).is_none());
        // Linear 2x - 1.
        let r = real_roots(&rat(0, 1), &rat(2, 1), &rat(-1, 1)).unwrap();
        assert_eq!(r[0].as_rational().unwrap(), rat(1, 2));
        // Double root (x - 3)^2.
        let r = real_roots(&rat(1, 1), &rat(-6, 1), &rat(9, 1)).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].as_rational().unwrap(), rat(3, 1));
    }

    #[test]
    fn sign_at_root_is_zero_on_defining_polynomial() {
        let (a, b, c) = (rat(3, 2), rat(-5, 7), rat(-4, 3));
        for x in real_roots(&a, &b, &c).unwrap() {
            assert_eq!(quadratic_sign_at(&a, &b, &c, &x), Ordering::Equal);
        }
        // And strictly positive away from the roots (positive leading coeff).
        let far = QuadraticRoot::from_rational(&rat(100, 1));
        assert_eq!(quadratic_sign_at(&a, &b, &c, &far), Ordering::Greater);
    }

    #[test]
    fn rational_between_separates() {
        let a = root(0, 1, 2, 1); // sqrt 2
        let b = root(0, 1, 3, 1); // sqrt 3
        let m = rational_between(&a, &b);
        assert_eq!(a.compare_rational(&m), Ordering::Less);
        assert_eq!(b.compare_rational(&m), Ordering::Greater);
        // Adjacent rationals.
        let m = rational_between(
            &QuadraticRoot::from_rational(&rat(1, 3)),
            &QuadraticRoot::from_rational(&rat(1, 2)),
        );
        assert!(m > rat(1, 3) && m < rat(1, 2));
    }
}
