//! Imposing x-coordinates on families over ℚ(t), square-class conditions, conic
//! parametrization, substitution, and normalization to polynomial models.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{strip_square_part, AlgebraError, Poly, RatFunc, Rational, ZPoly};
use crate::curve::{CurveAB, CurveError};

/// Trial-division limit used when removing square factors from rational constants.
pub const SQUARE_STRIP_LIMIT: u64 = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SectionError {
    #[error("x³ + Ax² + Bx vanishes identically at the imposed x")]
    TwoTorsion,
    #[error("point is not on the conic")]
    NotOnConic,
    #[error("condition is already a square; nothing to parametrize")]
    AlreadySquare,
    #[error("conic parametrization needs a condition of degree 1 or 2, got {0:?}")]
    BadDegree(Option<usize>),
    #[error("substitution is constant")]
    ConstantSubstitution,
    #[error("substituted curve is singular")]
    Singular,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl From<CurveError> for SectionError {
    fn from(_: CurveError) -> Self {
        SectionError::Singular
    }
}

/// The condition `s = □` with `s` squarefree; `s` is an integer polynomial whose
/// content carries the sign and has its square factors removed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionCondition {
    pub s: Poly,
    pub source_x: RatFunc,
}

impl SectionCondition {
    /// `s` is a nonzero constant square: the imposed x already lifts.
    pub fn is_trivial(&self) -> bool {
        self.s.is_constant() && self.s.coeff(0).sqrt().is_some()
    }
}

/// Squarefree representative of the square class of a nonzero rational function.
pub fn square_class_representative(w: &RatFunc) -> Poly {
    let (c, s) = w.square_class();
    let class = c.numer() * c.denom();
    let (rest, _) = strip_square_part(&class, SQUARE_STRIP_LIMIT);
    Poly::from_scaled(Rational::from_integer(rest), s)
}

/// Square condition for `X` to be the x-coordinate of a point on `family`.
pub fn impose_x(family: &CurveAB<RatFunc>, x: &RatFunc) -> Result<SectionCondition, SectionError> {
    let w = family.rhs(x);
    if w.is_zero() {
        return Err(SectionError::TwoTorsion);
    }
    Ok(SectionCondition {
        s: square_class_representative(&w),
        source_x: x.clone(),
    })
}

/// Square class of `s(g)`: the condition left over once `t ↦ g` is substituted.
pub fn condition_after_substitution(s: &Poly, g: &RatFunc) -> Result<Poly, SectionError> {
    let w = RatFunc::from_poly(s.clone()).compose(g)?;
    if w.is_zero() {
        return Err(AlgebraError::DegenerateSubstitution.into());
    }
    Ok(square_class_representative(&w))
}

/// Whether two conditions agree up to a nonzero square in ℚ(t).
pub fn same_square_class(a: &RatFunc, b: &RatFunc) -> bool {
    match a.div(b) {
        Ok(q) => !q.is_zero() && q.sqrt().is_some(),
        Err(_) => false,
    }
}

/// Rational parametrization `m ↦ (t(m), z(m))` of `z² = s(t)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConicParam {
    pub t_of_m: RatFunc,
    pub z_of_m: RatFunc,
}

/// Line-pencil parametrization through `(t0, z0)`: the line `z = z0 − m(t − t0)`
/// meets `z² = c₂t² + c₁t + c₀` a second time at
/// `t = (−c₁ − 2z₀m − c₂t₀ − m²t₀) / (c₂ − m²)`.
/// A linear condition `c₁t + c₀` is solved directly by `z = m`.
pub fn parametrize_conic(s: &Poly, t0: &Rational, z0: &Rational) -> Result<ConicParam, SectionError> {
    if s.eval(t0) != z0 * z0 {
        return Err(SectionError::NotOnConic);
    }
    if s.sqrt().is_some() {
        return Err(SectionError::AlreadySquare);
    }
    let m = RatFunc::x();
    let k = |q: &Rational| RatFunc::constant(q.clone());
    let (t_of_m, z_of_m) = match s.degree() {
        Some(1) => {
            let (c0, c1) = (s.coeff(0), s.coeff(1));
            let t = m.square().sub(&k(&c0)).scale(&c1.recip().expect("degree 1"));
            (t, m.clone())
        }
        Some(2) => {
            let (c1, c2) = (s.coeff(1), s.coeff(2));
            let m2 = m.square();
            let num = k(&-c1)
                .sub(&m.scale(&(Rational::from_i64(2) * z0)))
                .sub(&k(&(&c2 * t0)))
                .sub(&m2.scale(t0));
            let den = k(&c2).sub(&m2);
            let t = num.div(&den)?;
            let z = k(z0).sub(&m.mul(&t.sub(&k(t0))));
            (t, z)
        }
        d => return Err(SectionError::BadDegree(d)),
    };
    let check = RatFunc::from_poly(s.clone()).compose(&t_of_m)?;
    assert_eq!(check, z_of_m.square(), "conic parametrization identity");
    Ok(ConicParam { t_of_m, z_of_m })
}

/// `(A(g), B(g))`, with nonsingularity re-checked.
pub fn apply_substitution(family: &CurveAB<RatFunc>, g: &RatFunc) -> Result<CurveAB<RatFunc>, SectionError> {
    if g.is_constant() {
        return Err(SectionError::ConstantSubstitution);
    }
    let a = family.a().compose(g)?;
    let b = family.b().compose(g)?;
    Ok(CurveAB::new(a, b)?)
}

/// `A₂ = μ²A₁`, `B₂ = μ⁴B₁` for some `μ ∈ ℚ(r)*`; returns `μ` with positive leading
/// numerator coefficient.
pub fn is_square_scaling_equivalent(c1: &CurveAB<RatFunc>, c2: &CurveAB<RatFunc>) -> Option<RatFunc> {
    let mu = if c1.a().is_zero() {
        if !c2.a().is_zero() {
            return None;
        }
        c2.b().div(c1.b()).ok()?.sqrt()?.sqrt()?
    } else {
        c2.a().div(c1.a()).ok()?.sqrt()?
    };
    if mu.is_zero() {
        return None;
    }
    let mu2 = mu.square();
    if c1.b().mul(&mu2.square()) != *c2.b() {
        return None;
    }
    Some(mu)
}

/// Product of the squarefree factors of `f` occurring with multiplicity at least `k`.
fn multiplicity_at_least(f: &ZPoly, k: u32) -> ZPoly {
    if f.is_constant() {
        return ZPoly::one();
    }
    Poly::from_zpoly(f.clone())
        .squarefree_decompose()
        .expect("nonzero")
        .into_iter()
        .filter(|(_, m)| *m >= k)
        .fold(ZPoly::one(), |acc, (g, _)| acc.mul(g.primitive()))
}

/// `∏ gᵢ^⌈i/e⌉` over the squarefree decomposition `∏ gᵢ^i` of `f`.
fn ceil_root(f: &ZPoly, e: u32) -> ZPoly {
    if f.is_constant() {
        return ZPoly::one();
    }
    Poly::from_zpoly(f.clone())
        .squarefree_decompose()
        .expect("nonzero")
        .into_iter()
        .fold(ZPoly::one(), |acc, (g, m)| acc.mul(&g.primitive().pow(m.div_ceil(e))))
}

fn zlcm(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let g = a.gcd(b);
    a.mul(b).div_exact(&g).expect("gcd divides").primitive_part()
}

fn v_p(n: &BigInt, p: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    let mut n = n.abs();
    let mut v = 0;
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

/// Largest `k` found with `k² | ca` and `k⁴ | cb`: trial division by small primes,
/// then the remaining common part when it qualifies as a whole.
fn constant_square_part(ca: &BigInt, cb: &BigInt) -> BigInt {
    let mut k = BigInt::one();
    let mut g = if ca.is_zero() { cb.abs() } else { ca.gcd(cb) };
    let mut d = 2u64;
    while d <= SQUARE_STRIP_LIMIT && BigInt::from(d) * BigInt::from(d) <= g {
        let db = BigInt::from(d);
        if (&g % &db).is_zero() {
            let e = (v_p(ca, &db) / 2).min(v_p(cb, &db) / 4);
            k *= db.pow(e);
            while (&g % &db).is_zero() {
                g /= &db;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if g > BigInt::one() {
        let sq = &g * &g;
        if (ca % &sq).is_zero() && (cb % (&sq * &sq)).is_zero() {
            k *= g;
        }
    }
    k
}

/// Integral polynomial model `(λ²A, λ⁴B)` together with `λ`.
///
/// `λ = c·L/M`: `L` clears the denominators minimally (`∏gᵢ^⌈i/2⌉` for `A`,
/// `∏hⱼ^⌈j/4⌉` for `B`), `M` removes every polynomial `q` with `q² | A` and
/// `q⁴ | B`, and the constant `c` makes the coefficients integral and strips square
/// content found by trial division. Repeated until stable, so the map is idempotent.
pub fn normalize_to_polynomial_model(
    family: &CurveAB<RatFunc>,
) -> Result<(CurveAB<RatFunc>, RatFunc), SectionError> {
    let mut current = family.clone();
    let mut lambda = RatFunc::one();
    loop {
        let (next, step) = normalize_once(&current)?;
        if step.is_one() {
            return Ok((current, lambda));
        }
        lambda = lambda.mul(&step);
        current = next;
    }
}

fn normalize_once(family: &CurveAB<RatFunc>) -> Result<(CurveAB<RatFunc>, RatFunc), SectionError> {
    let (a, b) = (family.a(), family.b());
    let l = zlcm(&ceil_root(a.den().primitive(), 2), &ceil_root(b.den().primitive(), 4));
    let lr = RatFunc::from_poly(Poly::from_zpoly(l));
    let mut a1 = a.mul(&lr.square());
    let mut b1 = b.mul(&lr.square().square());
    debug_assert!(a1.is_polynomial() && b1.is_polynomial());

    let mut m = ZPoly::one();
    loop {
        let pb = multiplicity_at_least(b1.num().primitive(), 4);
        let q = if a1.is_zero() {
            pb
        } else {
            multiplicity_at_least(a1.num().primitive(), 2).gcd(&pb)
        };
        if q.is_constant() {
            break;
        }
        let qr = RatFunc::from_poly(Poly::from_zpoly(q.clone()));
        a1 = a1.div(&qr.square())?;
        b1 = b1.div(&qr.square().square())?;
        m = m.mul(&q);
    }

    // constant: first make both integral with c₀ = den(A)·den(B), then strip.
    let da = a1.num().content().denom().clone();
    let db = b1.num().content().denom().clone();
    let c0 = Rational::from_integer(&da * &db);
    let ca = (a1.num().content() * &c0.pow(2)).numer().clone();
    let cb = (b1.num().content() * &c0.pow(4)).numer().clone();
    let k = constant_square_part(&ca, &cb);
    let c = c0 / Rational::from_integer(k);

    let step = RatFunc::from_integer_parts(ZPoly::one(), m)?
        .mul(&lr)
        .scale(&c);
    let cr = RatFunc::constant(c);
    let a2 = a1.mul(&cr.square());
    let b2 = b1.mul(&cr.square().square());
    Ok((CurveAB::new(a2, b2)?, step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;

    fn rf(s: &str) -> RatFunc {
        parse_ratfunc(s).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::frac(n, d)
    }

    fn elkies() -> CurveAB<RatFunc> {
        CurveAB::new(
            rf("65536t^4 - 17472t^3 - 10176t^2 + 18672t - 3535"),
            rf("1024(t+1)^2(15t-8)^2(31t-7)^2"),
        )
        .unwrap()
    }

    #[test]
    fn conditions_match_stated_forms() {
        let e = elkies();
        let c1 = impose_x(&e, &rf("-64(1+t)^2(-4+7t)(4+17t)/(1+4t)^2")).unwrap();
        assert!(same_square_class(&RatFunc::from_poly(c1.s.clone()), &rf("-(7t-4)(17t+4)")));
        let c2 = impose_x(&e, &rf("576(-4+7t)(-8+15t)^2(-1324+5551t)/(49(-39+28t)^2)")).unwrap();
        assert!(same_square_class(&RatFunc::from_poly(c2.s.clone()), &rf("(7t-4)(5551t-1324)")));
        let c3 = impose_x(&e, &rf("-361(t+1)(31t-7)")).unwrap();
        assert!(c3.is_trivial());
        assert_eq!(c3.s, Poly::one());
    }

    #[test]
    fn sign_is_part_of_the_class() {
        assert!(!same_square_class(&rf("t^2+1"), &rf("-(t^2+1)")));
        assert!(same_square_class(&rf("4(t^2+1)/(t-3)^2"), &rf("t^2+1")));
    }

    #[test]
    fn two_torsion_x_rejected() {
        assert_eq!(impose_x(&elkies(), &RatFunc::zero()).unwrap_err(), SectionError::TwoTorsion);
    }

    #[test]
    fn substitutions_square_their_conditions() {
        let s1 = rf("-(7t-4)(17t+4)").num().clone();
        let g1 = rf("4(-1+u^2)/(17+7u^2)");
        assert_eq!(condition_after_substitution(&s1, &g1).unwrap(), Poly::one());
        let s2 = rf("(7t-4)(5551t-1324)").num().clone();
        let g2 = rf("4(-331+u^2)/(7(-793+u^2))");
        assert_eq!(condition_after_substitution(&s2, &g2).unwrap(), Poly::one());
        // the second condition after the first substitution
        let combined = condition_after_substitution(&s2, &g1).unwrap();
        assert_eq!(combined, rf("-(539u^2-1863)").num().clone());
    }

    #[test]
    fn conic_examples() {
        let pyth = parametrize_conic(&rf("1-u^2").num().clone(), &q(0, 1), &q(1, 1)).unwrap();
        assert_eq!(pyth.t_of_m, rf("2m/(1+m^2)"));
        assert_eq!(pyth.z_of_m, rf("(1-m^2)/(1+m^2)"));

        let s = rf("-539u^2+1863").num().clone();
        let c = parametrize_conic(&s, &q(13, 7), &q(2, 1)).unwrap();
        assert_eq!(c.t_of_m.eval(&Rational::zero()), Some(q(-13, 7)));

        let c = parametrize_conic(&rf("2u^2-1").num().clone(), &q(1, 1), &q(1, 1)).unwrap();
        let lhs = RatFunc::from_poly(rf("2u^2-1").num().clone()).compose(&c.t_of_m).unwrap();
        assert_eq!(lhs, c.z_of_m.square());

        assert_eq!(
            parametrize_conic(&s, &q(1, 1), &q(1, 1)).unwrap_err(),
            SectionError::NotOnConic
        );
        assert_eq!(
            parametrize_conic(&rf("(u+1)^2").num().clone(), &q(0, 1), &q(1, 1)).unwrap_err(),
            SectionError::AlreadySquare
        );
        let lin = parametrize_conic(&rf("3u+1").num().clone(), &q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(lin.t_of_m, rf("(m^2-1)/3"));
    }

    #[test]
    fn stated_parametrization_solves_the_conic() {
        // u(0) = −7007/3773 = −13/7
        let u = rf("(-7007-28r+13r^2)/(7(539+r^2))");
        assert_eq!(u.eval(&Rational::zero()), Some(q(-13, 7)));
        let s = rf("-539u^2+1863").num().clone();
        assert_eq!(condition_after_substitution(&s, &u).unwrap(), Poly::one());
    }

    #[test]
    fn substitution_and_equivalence() {
        let e = elkies();
        assert_eq!(apply_substitution(&e, &RatFunc::x()).unwrap(), e);
        let fam = apply_substitution(&e, &rf("4(u^2-1)/(17+7u^2)")).unwrap();
        let cond = impose_x(&fam, &rf("-64(1+t)^2(-4+7t)(4+17t)/(1+4t)^2").compose(&rf("4(u^2-1)/(17+7u^2)")).unwrap()).unwrap();
        assert!(cond.is_trivial());
        assert!(apply_substitution(&e, &RatFunc::from_i64(3)).is_err());

        assert_eq!(is_square_scaling_equivalent(&e, &e), Some(RatFunc::one()));
        let scaled = CurveAB::new(e.a().scale(&q(4, 1)), e.b().scale(&q(16, 1))).unwrap();
        assert_eq!(is_square_scaling_equivalent(&e, &scaled), Some(RatFunc::from_i64(2)));
        let off = CurveAB::new(e.a().clone(), e.b().scale(&q(2, 1))).unwrap();
        assert_eq!(is_square_scaling_equivalent(&e, &off), None);
    }

    #[test]
    fn normalization_examples() {
        let e = elkies();
        let (n, l) = normalize_to_polynomial_model(&e).unwrap();
        assert_eq!(n, e);
        assert!(l.is_one());

        let c = CurveAB::new(RatFunc::constant(q(-3535, 9)), RatFunc::constant(q(3211264, 81))).unwrap();
        let (n, l) = normalize_to_polynomial_model(&c).unwrap();
        assert_eq!(n.a(), &RatFunc::from_i64(-3535));
        assert_eq!(n.b(), &RatFunc::from_i64(3211264));
        assert_eq!(l, RatFunc::from_i64(3));

        // rational-function coefficients: A = a/(r−1)^2·(r+2)^2, B = b/(r−1)^4
        let a = rf("(3r+1)(r+2)^2/(r-1)^3");
        let b = rf("5(r+2)^4/(r-1)^5");
        let fam = CurveAB::new(a, b).unwrap();
        let (n, l) = normalize_to_polynomial_model(&fam).unwrap();
        assert!(n.a().is_polynomial() && n.b().is_polynomial());
        assert_eq!(is_square_scaling_equivalent(&fam, &n), Some(l.clone()).map(|x| {
            if x.num().lc().is_negative() { x.neg() } else { x }
        }));
        let (again, l2) = normalize_to_polynomial_model(&n).unwrap();
        assert_eq!(again, n);
        assert!(l2.is_one());
    }
}
