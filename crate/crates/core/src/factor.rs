//! Factorization of univariate polynomials: Cantor–Zassenhaus over 𝔽_p and
//! Zassenhaus (modular factorization, Hensel lifting, subset recombination) over ℚ.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::modp::{self, FpPoly};
use crate::algebra::{Poly, Rational, ZPoly};

/// Largest number of distinct factors accepted by [`squarefree_divisors`].
pub const MAX_DIVISOR_FACTORS: usize = 24;

/// Number of admissible primes compared when choosing the Zassenhaus prime.
const PRIME_TRIALS: usize = 5;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FactorError {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("cannot factor the zero polynomial")]
    Zero,
    #[error("hint {0} does not divide the input")]
    BadHint(String),
    #[error("{0} distinct factors exceed the divisor guard of {MAX_DIVISOR_FACTORS}")]
    TooManyFactors(usize),
    #[error("factorization failed to reconstruct its input")]
    Reconstruction,
}

/// How a factor was shown to be irreducible over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IrreducibilityCertificate {
    Linear,
    /// Irreducible modulo this good prime, with the same degree.
    ModP { p: u64 },
    /// No proper subset of the lifted modular factors divides it.
    Recombination { p: u64, modular_factors: usize },
}

/// `unit · ∏ fᵢ^eᵢ` with primitive integer `fᵢ` of positive leading coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub unit: Rational,
    pub factors: Vec<(Poly, u32)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<IrreducibilityCertificate>,
}

impl Factorization {
    pub fn expand(&self) -> Poly {
        self.factors
            .iter()
            .fold(Poly::constant(self.unit.clone()), |acc, (f, e)| acc.mul(&f.pow(*e)))
    }

    pub fn distinct(&self) -> impl Iterator<Item = &Poly> {
        self.factors.iter().map(|(f, _)| f)
    }
}

// ---------------------------------------------------------------------------
// 𝔽_p

fn seeded_rng(f: &FpPoly) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(f.p.to_le_bytes());
    for c in &f.coeffs {
        h.update(c.to_le_bytes());
    }
    ChaCha20Rng::from_seed(h.finalize().into())
}

/// Complete factorization over 𝔽_p into monic irreducibles with multiplicities,
/// sorted by degree then coefficients. The leading coefficient is dropped.
pub fn factor_mod_p(f: &FpPoly) -> Result<Vec<(FpPoly, u32)>, FactorError> {
    let p = f.p;
    if p == 2 || !modp::is_prime_u64(p) {
        return Err(FactorError::NotOddPrime(p));
    }
    if f.is_zero() {
        return Err(FactorError::Zero);
    }
    let mut rng = seeded_rng(f);
    let mut out = Vec::new();
    for (g, m) in squarefree_mod_p(&f.monic()) {
        for (h, d) in distinct_degree(&g) {
            let mut pieces = Vec::new();
            equal_degree(&h, d, &mut rng, &mut pieces);
            out.extend(pieces.into_iter().map(|q| (q, m)));
        }
    }
    out.sort_by(|a, b| fp_key(&a.0).cmp(&fp_key(&b.0)));
    Ok(out)
}

fn fp_key(f: &FpPoly) -> (usize, Vec<u64>) {
    (f.coeffs.len(), f.coeffs.clone())
}

/// Squarefree decomposition of a monic polynomial over 𝔽_p.
fn squarefree_mod_p(f: &FpPoly) -> Vec<(FpPoly, u32)> {
    let p = f.p;
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let df = f.derivative();
    if df.is_zero() {
        for (g, m) in squarefree_mod_p(&f.pth_root()) {
            out.push((g, m * p as u32));
        }
        return out;
    }
    let mut c = f.gcd(&df);
    let mut w = f.div_rem(&c).0;
    let mut i = 1u32;
    while w.degree().unwrap_or(0) > 0 {
        let y = w.gcd(&c);
        let z = w.div_rem(&y).0;
        if z.degree().unwrap_or(0) > 0 {
            out.push((z.monic(), i));
        }
        i += 1;
        w = y;
        c = c.div_rem(&w).0;
    }
    if c.degree().unwrap_or(0) > 0 {
        for (g, m) in squarefree_mod_p(&c.monic().pth_root()) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Splits a squarefree monic polynomial into products of irreducibles of equal degree.
fn distinct_degree(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.p;
    let x = FpPoly::x(p);
    let mut out = Vec::new();
    let mut rest = f.clone();
    let mut h = x.clone();
    let mut d = 0;
    while let Some(n) = rest.degree() {
        if n == 0 {
            break;
        }
        d += 1;
        if 2 * d > n {
            out.push((rest.monic(), n));
            break;
        }
        h = h.pow_mod(p as u128, &rest);
        let g = rest.gcd(&h.sub(&x));
        if g.degree().unwrap_or(0) > 0 {
            rest = rest.div_rem(&g).0;
            h = h.rem(&rest);
            out.push((g, d));
        }
    }
    out
}

/// Cantor–Zassenhaus splitting of a product of distinct degree-`d` irreducibles.
fn equal_degree(f: &FpPoly, d: usize, rng: &mut ChaCha20Rng, out: &mut Vec<FpPoly>) {
    let p = f.p;
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return;
    }
    if n == d {
        out.push(f.monic());
        return;
    }
    loop {
        let a = FpPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect());
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        // a^((p^d − 1)/2) = (a · a^p ⋯ a^(p^(d−1)))^((p − 1)/2)
        let mut frob = a.rem(f);
        let mut norm = frob.clone();
        for _ in 1..d {
            frob = frob.pow_mod(p as u128, f);
            norm = norm.mul(&frob).rem(f);
        }
        let b = norm.pow_mod(((p - 1) / 2) as u128, f).sub(&FpPoly::one(p));
        let g = f.gcd(&b);
        let gd = g.degree().unwrap_or(0);
        if gd > 0 && gd < n {
            let other = f.div_rem(&g).0;
            equal_degree(&g, d, rng, out);
            equal_degree(&other, d, rng, out);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// ℚ

/// Factorization over ℚ. The product is re-expanded and compared before returning.
pub fn factor_over_q(f: &Poly) -> Result<Factorization, FactorError> {
    factor_with_hints(f, &[])
}

/// Factorization over ℚ that first splits `f` along the given divisors. Each hint must
/// divide `f` exactly, so a wrong hint is reported rather than trusted. Overlapping
/// hints are fine: each splits off its gcd with what earlier hints left.
pub fn factor_with_hints(f: &Poly, hints: &[Poly]) -> Result<Factorization, FactorError> {
    if f.is_zero() {
        return Err(FactorError::Zero);
    }
    let mut rest = f.primitive().clone();
    let mut pieces: Vec<(ZPoly, u32)> = Vec::new();
    for h in hints {
        let hp = h.primitive();
        if h.is_zero() || hp.is_constant() {
            continue;
        }
        if f.primitive().div_exact(hp).is_none() {
            return Err(FactorError::BadHint(h.to_string()));
        }
        let g = rest.gcd(hp).primitive_part();
        if g.is_constant() {
            continue;
        }
        let mut e = 0;
        while let Some(q) = rest.div_exact(&g) {
            rest = q;
            e += 1;
        }
        pieces.push((g, e));
    }
    pieces.push((rest, 1));

    let mut merged: Vec<(ZPoly, u32, IrreducibilityCertificate)> = Vec::new();
    for (piece, e) in pieces {
        if piece.is_constant() {
            continue;
        }
        for (sq, m) in Poly::from_zpoly(piece).squarefree_decompose().expect("nonzero") {
            for (g, cert) in factor_squarefree(sq.primitive()) {
                match merged.iter_mut().find(|(h, _, _)| *h == g) {
                    Some(slot) => slot.1 += m * e,
                    None => merged.push((g, m * e, cert)),
                }
            }
        }
    }
    merged.sort_by(|a, b| zkey(&a.0).cmp(&zkey(&b.0)));

    let mut fact = Factorization {
        unit: Rational::zero(),
        factors: merged.iter().map(|(g, e, _)| (Poly::from_zpoly(g.clone()), *e)).collect(),
        certificates: merged.into_iter().map(|(_, _, c)| c).collect(),
    };
    let body = fact.factors.iter().fold(Poly::one(), |acc, (g, e)| acc.mul(&g.pow(*e)));
    fact.unit = f.lc() / body.lc();
    if fact.expand() != *f {
        return Err(FactorError::Reconstruction);
    }
    Ok(fact)
}

fn zkey(f: &ZPoly) -> (usize, Vec<BigInt>) {
    (f.coeffs().len(), f.coeffs().to_vec())
}

/// Irreducible factors of a squarefree primitive polynomial with positive leading
/// coefficient.
fn factor_squarefree(f: &ZPoly) -> Vec<(ZPoly, IrreducibilityCertificate)> {
    let n = f.degree().unwrap_or(0);
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![(f.clone(), IrreducibilityCertificate::Linear)];
    }
    // Powers of x are split off directly: x ∤ f keeps f(0) ≠ 0 for the divisibility
    // filter in recombination.
    if f.coeffs()[0].is_zero() {
        let rest = ZPoly::new(f.coeffs()[1..].to_vec());
        let mut out = vec![(ZPoly::monomial(1), IrreducibilityCertificate::Linear)];
        out.extend(factor_squarefree(&rest));
        return out;
    }
    let (p, modular) = choose_prime(f);
    if modular.len() == 1 {
        return vec![(f.clone(), IrreducibilityCertificate::ModP { p })];
    }
    let lifted = hensel_lift(f, &modular, p);
    recombine(f, lifted)
        .into_iter()
        .map(|(g, r)| {
            let cert = if g.degree() == Some(1) {
                IrreducibilityCertificate::Linear
            } else if r == 1 {
                IrreducibilityCertificate::ModP { p }
            } else {
                IrreducibilityCertificate::Recombination { p, modular_factors: r }
            };
            (g, cert)
        })
        .collect()
}

/// Among the first admissible primes (p ∤ lc, f squarefree mod p), the one giving the
/// fewest modular factors; ties go to the smaller prime.
fn choose_prime(f: &ZPoly) -> (u64, Vec<FpPoly>) {
    let mut best: Option<(u64, Vec<FpPoly>)> = None;
    let mut tried = 0;
    for p in modp::primes_from(3) {
        let fp = f.reduce_mod(p);
        if fp.degree() != f.degree() {
            continue;
        }
        if fp.gcd(&fp.derivative()).degree() != Some(0) {
            continue;
        }
        let facs: Vec<FpPoly> = factor_mod_p(&fp)
            .expect("odd prime")
            .into_iter()
            .map(|(g, _)| g)
            .collect();
        if best.as_ref().map_or(true, |(_, b)| facs.len() < b.len()) {
            best = Some((p, facs));
        }
        tried += 1;
        if tried == PRIME_TRIALS || best.as_ref().map_or(false, |(_, b)| b.len() == 1) {
            break;
        }
    }
    best.expect("admissible primes exist")
}

/// Coefficient bound for factors used to size the Hensel modulus.
///
/// Any factor `g` of `f` (degree n) satisfies `|g|∞ ≤ 2ⁿ·‖f‖₂` (Mignotte). Recombination
/// builds `lc(f)·g/lc(g)`, so the lift must reach `p^k > 2·|lc(f)|·2ⁿ·(⌊‖f‖₂⌋ + 1)`.
fn lift_bound(f: &ZPoly) -> BigInt {
    let n = f.degree().unwrap_or(0);
    let norm = f.norm2_squared().sqrt();
    BigInt::from(2) * f.lc().abs() * (BigInt::one() << n) * (norm + 1u32)
}

fn to_fp(f: &ZPoly, p: u64) -> FpPoly {
    f.reduce_mod(p)
}

fn from_fp(f: &FpPoly) -> ZPoly {
    ZPoly::new(f.coeffs.iter().map(|&c| modp::bigint_from_residue(c)).collect())
}

fn reduce_mod_big(f: &ZPoly, m: &BigInt) -> ZPoly {
    ZPoly::new(f.coeffs().iter().map(|c| c.mod_floor_big(m)).collect())
}

trait ModFloor {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt;
}

impl ModFloor for BigInt {
    fn mod_floor_big(&self, m: &BigInt) -> BigInt {
        let r = self % m;
        if r.is_negative() {
            r + m
        } else {
            r
        }
    }
}

fn symmetric_mod(f: &ZPoly, m: &BigInt) -> ZPoly {
    let half: BigInt = m >> 1;
    ZPoly::new(
        f.coeffs()
            .iter()
            .map(|c| {
                let r = c.mod_floor_big(m);
                if r > half {
                    r - m
                } else {
                    r
                }
            })
            .collect(),
    )
}

/// `(s, t)` with `s·g + t·h = 1` over 𝔽_p for coprime `g`, `h`.
fn bezout(g: &FpPoly, h: &FpPoly) -> (FpPoly, FpPoly) {
    let p = g.p;
    let (mut r0, mut r1) = (g.clone(), h.clone());
    let (mut s0, mut s1) = (FpPoly::one(p), FpPoly::zero(p));
    let (mut t0, mut t1) = (FpPoly::zero(p), FpPoly::one(p));
    while !r1.is_zero() {
        let (q, r) = r0.div_rem(&r1);
        let s = s0.sub(&q.mul(&s1));
        let t = t0.sub(&q.mul(&t1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s);
        t0 = std::mem::replace(&mut t1, t);
    }
    let inv = modp::inv_mod(r0.lc(), p).expect("coprime inputs");
    (s0.scale(inv), t0.scale(inv))
}

/// Linear Hensel lift of `f ≡ lc(f)·g·h (mod p)` with monic `g`, `h` to modulus `m = p^k`.
/// Returns monic `G`, `H` with coefficients in `[0, m)`.
fn lift_pair(f: &ZPoly, g: &FpPoly, h: &FpPoly, p: u64, k: u32) -> (ZPoly, ZPoly) {
    // s·g + t·h = 1 gives t·h ≡ 1 mod g, which is all the correction step needs.
    let (_, t) = bezout(g, h);
    let l = f.lc();
    let l_inv = modp::inv_mod(modp::reduce_bigint(&l, p), p).expect("p ∤ lc");
    let (mut big_g, mut big_h) = (from_fp(g), from_fp(h));
    let pb = BigInt::from(p);
    let mut m = pb.clone();
    for _ in 1..k {
        let err = f.sub(&big_g.mul(&big_h).scale(&l));
        let e = ZPoly::new(err.coeffs().iter().map(|c| c / &m).collect());
        let e = to_fp(&e, p).scale(l_inv);
        let dg = t.mul(&e).rem(g);
        let dh = e.sub(&h.mul(&dg)).div_rem(g).0;
        big_g = big_g.add(&from_fp(&dg).scale(&m));
        big_h = big_h.add(&from_fp(&dh).scale(&m));
        m *= &pb;
    }
    (reduce_mod_big(&big_g, &m), reduce_mod_big(&big_h, &m))
}

/// Lifts the monic modular factors of `f` to monic factors modulo `p^k` where `p^k`
/// exceeds [`lift_bound`]. Returns the modulus and the lifted factors.
fn hensel_lift(f: &ZPoly, modular: &[FpPoly], p: u64) -> (BigInt, Vec<ZPoly>) {
    let bound = lift_bound(f);
    let pb = BigInt::from(p);
    let mut k = 1u32;
    let mut m = pb.clone();
    while m <= bound {
        m *= &pb;
        k += 1;
    }
    let l = f.lc();
    let mut target = f.clone();
    let mut lifted = Vec::with_capacity(modular.len());
    for i in 0..modular.len() - 1 {
        let rest = modular[i + 1..]
            .iter()
            .fold(FpPoly::one(p), |acc, u| acc.mul(u));
        let (g, h) = lift_pair(&target, &modular[i], &rest, p, k);
        lifted.push(g);
        if i + 1 == modular.len() - 1 {
            lifted.push(h);
        } else {
            target = symmetric_mod(&h.scale(&l), &m);
        }
    }
    (m, lifted)
}

/// Zassenhaus subset recombination. Returns each true factor with the number of
/// lifted modular factors it absorbed.
fn recombine(f: &ZPoly, lifted: (BigInt, Vec<ZPoly>)) -> Vec<(ZPoly, usize)> {
    let (m, mut pool) = lifted;
    let mut f = f.clone();
    let mut out = Vec::new();
    let mut size = 1;
    while 2 * size <= pool.len() {
        let mut found = false;
        let l = f.lc();
        let target0 = &l * &f.coeffs()[0];
        for subset in Subsets::new(pool.len(), size) {
            let prod = subset
                .iter()
                .fold(ZPoly::constant(l.clone()), |acc, &i| reduce_mod_big(&acc.mul(&pool[i]), &m));
            let cand = symmetric_mod(&prod, &m);
            let c0 = &cand.coeffs()[0];
            if c0.is_zero() || !(&target0 % c0).is_zero() {
                continue;
            }
            let g = cand.primitive_part();
            if let Some(q) = f.div_exact(&g) {
                out.push((g, size));
                f = q;
                let mut keep = Vec::with_capacity(pool.len() - size);
                for (i, u) in pool.into_iter().enumerate() {
                    if !subset.contains(&i) {
                        keep.push(u);
                    }
                }
                pool = keep;
                found = true;
                break;
            }
        }
        if !found {
            size += 1;
        }
    }
    if !f.is_constant() {
        let r = pool.len();
        out.push((f.primitive_part(), r));
    }
    out
}

/// Lexicographic enumeration of `k`-subsets of `0..n`.
struct Subsets {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Subsets {
    fn new(n: usize, k: usize) -> Self {
        Subsets {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let cur = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(cur)
    }
}

/// All `2^k` products of distinct irreducible factors, indexed by bitmask over the
/// factor order (bit i ↔ factor i); index 0 is the constant 1.
pub fn squarefree_divisors(fact: &Factorization) -> Result<Vec<Poly>, FactorError> {
    let k = fact.factors.len();
    if k > MAX_DIVISOR_FACTORS {
        return Err(FactorError::TooManyFactors(k));
    }
    let mut out: Vec<Poly> = vec![Poly::one()];
    for (f, _) in &fact.factors {
        let extended: Vec<Poly> = out.iter().map(|d| d.mul(f)).collect();
        out.extend(extended);
    }
    Ok(out)
}
