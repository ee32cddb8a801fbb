//! Reduction of ℚ-curves modulo primes and the 𝔽_p machinery behind the
//! independence certificates: square roots, root finding for the halving
//! quartic, halving tests and naive point counting.

use thiserror::Error;

use crate::algebra::modp::{self, FpPoly};
use crate::algebra::Rational;
use crate::curve::{CurveAB, CurvePoint};

/// Upper limit for [`count_points_naive`].
pub const NAIVE_COUNT_LIMIT: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("p = {0} exceeds the naive counting limit")]
    TooLarge(u64),
}

/// Odd prime modulus.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, ReductionError> {
        if p == 2 || !modp::is_prime_u64(p) {
            return Err(ReductionError::NotOddPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn elem(&self, v: u64) -> Fp {
        Fp::new(v, self.p)
    }

    /// Image of a rational, `None` when p divides the denominator.
    pub fn reduce(&self, q: &Rational) -> Option<Fp> {
        let d = modp::reduce_bigint(q.denom(), self.p);
        let inv = modp::inv_mod(d, self.p)?;
        let n = modp::reduce_bigint(q.numer(), self.p);
        Some(Fp::new(modp::mul_mod(n, inv, self.p), self.p))
    }
}

/// Element of 𝔽_p, stored as its least nonnegative residue.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl std::fmt::Debug for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (mod {})", self.v, self.p)
    }
}

impl Fp {
    pub fn new(v: u64, p: u64) -> Self {
        Fp { v: v % p, p }
    }

    pub fn from_i64(n: i64, p: u64) -> Self {
        Fp::new(n.rem_euclid(p as i64) as u64, p)
    }

    pub fn value(&self) -> u64 {
        self.v
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn add(&self, o: &Fp) -> Fp {
        Fp { v: modp::add_mod(self.v, o.v, self.p), p: self.p }
    }

    pub fn sub(&self, o: &Fp) -> Fp {
        Fp { v: modp::sub_mod(self.v, o.v, self.p), p: self.p }
    }

    pub fn mul(&self, o: &Fp) -> Fp {
        Fp { v: modp::mul_mod(self.v, o.v, self.p), p: self.p }
    }

    pub fn neg(&self) -> Fp {
        Fp { v: modp::neg_mod(self.v, self.p), p: self.p }
    }

    pub fn inv(&self) -> Option<Fp> {
        modp::inv_mod(self.v, self.p).map(|v| Fp { v, p: self.p })
    }

    pub fn sqrt(&self) -> Option<Fp> {
        sqrt_mod_p(self.v, self.p).map(|v| Fp { v, p: self.p })
    }
}

/// Legendre symbol via quadratic reciprocity (p odd prime).
pub fn legendre(a: u64, p: u64) -> i32 {
    let (mut a, mut n) = (a % p, p);
    if a == 0 {
        return 0;
    }
    let mut sign = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                sign = -sign;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            sign = -sign;
        }
        a %= n;
    }
    if n == 1 {
        sign
    } else {
        0
    }
}

/// Tonelli–Shanks; returns the smaller of the two roots.
pub fn sqrt_mod_p(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if legendre(a, p) != 1 {
        return None;
    }
    let r = if p % 4 == 3 {
        modp::pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0;
        while q % 2 == 0 {
            q /= 2;
            s += 1;
        }
        let z = (2..p).find(|&z| legendre(z, p) == -1).expect("non-residue exists");
        let mut m = s;
        let mut c = modp::pow_mod(z, q, p);
        let mut t = modp::pow_mod(a, q, p);
        let mut r = modp::pow_mod(a, (q + 1) / 2, p);
        while t != 1 {
            let mut i = 0;
            let mut tt = t;
            while tt != 1 {
                tt = modp::mul_mod(tt, tt, p);
                i += 1;
            }
            let b = modp::pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = modp::mul_mod(b, b, p);
            t = modp::mul_mod(t, c, p);
            r = modp::mul_mod(r, b, p);
        }
        r
    };
    Some(r.min(p - r))
}

/// Roots in 𝔽_p of a nonzero polynomial, ascending, without multiplicity.
pub fn roots_mod_p(f: &FpPoly) -> Vec<u64> {
    let p = f.p;
    let f = f.monic();
    if f.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    // Product of the distinct linear factors: gcd(f, x^p − x).
    let xp = FpPoly::x(p).pow_mod(p as u128, &f);
    let g = f.gcd(&xp.sub(&FpPoly::x(p)));
    let mut roots = Vec::new();
    split_linear(&g, 0, &mut roots);
    roots.sort_unstable();
    roots
}

/// Equal-degree splitting of a product of distinct linear factors, using the
/// deterministic shifts x + δ for δ = seed, seed+1, …
fn split_linear(g: &FpPoly, seed: u64, out: &mut Vec<u64>) {
    let p = g.p;
    match g.degree() {
        None | Some(0) => {}
        Some(1) => out.push(modp::neg_mod(g.monic().coeffs[0], p)),
        Some(_) if p < 50 => {
            out.extend((0..p).filter(|&x| g.eval(x) == 0));
        }
        Some(_) => {
            let mut delta = seed;
            loop {
                let shifted = FpPoly::new(p, vec![delta % p, 1]);
                let h = shifted.pow_mod(((p - 1) / 2) as u128, g).sub(&FpPoly::one(p));
                let d = g.gcd(&h);
                let dd = d.degree().unwrap_or(0);
                if dd > 0 && Some(dd) < g.degree() {
                    let (other, _) = g.div_rem(&d);
                    split_linear(&d, delta + 1, out);
                    split_linear(&other, delta + 1, out);
                    return;
                }
                delta += 1;
            }
        }
    }
}

/// A ℚ-curve with good reduction at an odd prime.
#[derive(Clone, Debug)]
pub struct ReducedCurve {
    pub curve: CurveAB<Fp>,
    pub source: CurveAB<Rational>,
    pub field: PrimeField,
}

impl ReducedCurve {
    pub fn p(&self) -> u64 {
        self.field.p()
    }
}

pub fn reduce_curve(curve: &CurveAB<Rational>, p: u64) -> Result<ReducedCurve, ReductionError> {
    let field = PrimeField::new(p)?;
    let a = field.reduce(curve.a()).ok_or(ReductionError::BadReduction(p))?;
    let b = field.reduce(curve.b()).ok_or(ReductionError::BadReduction(p))?;
    let reduced = CurveAB::new(a, b).map_err(|_| ReductionError::BadReduction(p))?;
    Ok(ReducedCurve {
        curve: reduced,
        source: curve.clone(),
        field,
    })
}

/// Coordinate-wise reduction; `None` when an affine point reduces to the point at
/// infinity (p divides a denominator), which callers treat as inconclusive.
pub fn reduce_point(pt: &CurvePoint<Rational>, rc: &ReducedCurve) -> Option<CurvePoint<Fp>> {
    pt.map(|c| rc.field.reduce(c))
}

/// Whether `P ∈ 2E(𝔽_p)`.
///
/// Candidates for `x(Q)` with `2Q = P` are the roots of the halving quartic
/// `(x² − B)² − 4·x(P)·(x³ + Ax² + Bx)`; each is lifted and doubled to confirm.
pub fn is_halvable(rc: &ReducedCurve, pt: &CurvePoint<Fp>) -> bool {
    let CurvePoint::Affine { x: px, .. } = pt else {
        return true;
    };
    let curve = &rc.curve;
    let p = rc.p();
    let (a, b) = (curve.a().value(), curve.b().value());
    let xp = px.value();
    let four_x = modp::mul_mod(4, xp, p);
    // (x² − B)² = x⁴ − 2Bx² + B²
    let sq = FpPoly::new(p, vec![modp::mul_mod(b, b, p), 0, modp::neg_mod(modp::mul_mod(2, b, p), p), 0, 1]);
    let cubic = FpPoly::new(p, vec![0, b, a, 1]).scale(four_x);
    let quartic = sq.sub(&cubic);
    for x0 in roots_mod_p(&quartic) {
        let x0 = Fp::new(x0, p);
        if let Some(q) = curve.lift_x(&x0) {
            if curve.double(&q) == *pt || curve.double(&q.neg()) == *pt {
                return true;
            }
        }
    }
    false
}

/// Whether `P ∈ 2E(𝔽_p) + ⟨T⟩` for a point `T` of order dividing 4.
pub fn in_double_plus_torsion(rc: &ReducedCurve, pt: &CurvePoint<Fp>, t: &CurvePoint<Fp>) -> bool {
    let mut cur = pt.clone();
    for _ in 0..4 {
        if is_halvable(rc, &cur) {
            return true;
        }
        cur = rc.curve.sub(&cur, t);
    }
    false
}

/// `#E(𝔽_p)` including the point at infinity, by a quadratic-character sum.
pub fn count_points_naive(rc: &ReducedCurve) -> Result<u64, ReductionError> {
    let p = rc.p();
    if p > NAIVE_COUNT_LIMIT {
        return Err(ReductionError::TooLarge(p));
    }
    let (a, b) = (rc.curve.a().value(), rc.curve.b().value());
    let mut total: i64 = 1 + p as i64;
    for x in 0..p {
        let fx = modp::mul_mod(
            modp::add_mod(modp::add_mod(modp::mul_mod(x, x, p), modp::mul_mod(a, x, p), p), b, p),
            x,
            p,
        );
        total += legendre(fx, p) as i64;
    }
    Ok(total as u64)
}

/// Every point of the reduced curve, for brute-force cross-checks on small primes.
pub fn all_points(curve: &CurveAB<Fp>) -> Vec<CurvePoint<Fp>> {
    let p = curve.a().p();
    let mut out = vec![CurvePoint::Infinity];
    for x in 0..p {
        let xf = Fp::new(x, p);
        if let Some(y) = curve.rhs(&xf).sqrt() {
            out.push(CurvePoint::affine(xf, y));
            if y.value() != 0 {
                out.push(CurvePoint::affine(xf, y.neg()));
            }
        }
    }
    out
}
