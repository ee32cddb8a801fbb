//! Dense univariate polynomials over ℤ.
//!
//! This is the arithmetic workhorse underneath [`Poly`](super::Poly) and
//! [`RatFunc`](super::RatFunc): products use Karatsuba above
//! [`KARATSUBA_THRESHOLD`], and gcds are computed multi-modularly (Brown's
//! dense algorithm) with trial division as the correctness check. A primitive
//! PRS gcd is kept alongside as an independent route.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::modp::{self, FpPoly};

/// Degree (of the shorter operand) above which multiplication switches to Karatsuba.
pub const KARATSUBA_THRESHOLD: usize = 32;

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct ZPoly {
    coeffs: Vec<BigInt>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ZPoly { coeffs }
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        ZPoly::new(cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        ZPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        ZPoly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        ZPoly::new(vec![c])
    }

    /// `x^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        ZPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<BigInt> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lc(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Primitive part with positive leading coefficient, and the signed content.
    pub fn content_primitive(&self) -> (BigInt, ZPoly) {
        if self.is_zero() {
            return (BigInt::zero(), ZPoly::zero());
        }
        let mut c = self.content();
        if self.lc().is_negative() {
            c = -c;
        }
        if c.is_one() {
            return (c, self.clone());
        }
        let prim = ZPoly {
            coeffs: self.coeffs.iter().map(|a| a / &c).collect(),
        };
        (c, prim)
    }

    pub fn primitive_part(&self) -> ZPoly {
        self.content_primitive().1
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, k: &BigInt) -> ZPoly {
        if k.is_zero() {
            return ZPoly::zero();
        }
        ZPoly {
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    /// Division of every coefficient by `k`; caller guarantees exactness.
    pub fn div_scalar_exact(&self, k: &BigInt) -> ZPoly {
        ZPoly {
            coeffs: self.coeffs.iter().map(|c| c / k).collect(),
        }
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut coeffs = long.coeffs.clone();
        for (c, s) in coeffs.iter_mut().zip(&short.coeffs) {
            *c += s;
        }
        ZPoly::new(coeffs)
    }

    pub fn sub(&self, other: &ZPoly) -> ZPoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero();
        }
        ZPoly::new(mul_slices(&self.coeffs, &other.coeffs))
    }

    pub fn pow(&self, e: u32) -> ZPoly {
        let mut acc = ZPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self) -> ZPoly {
        ZPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.coeffs
            .iter()
            .rev()
            .fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    /// Homogeneous evaluation `Σ cᵢ nⁱ d^(deg−i)`, i.e. `d^deg · f(n/d)`.
    pub fn eval_homogeneous(&self, n: &BigInt, d: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        let mut dpow = BigInt::one();
        for c in self.coeffs.iter().rev() {
            acc = acc * n + c * &dpow;
            dpow *= d;
        }
        acc
    }

    pub fn reduce_mod(&self, p: u64) -> FpPoly {
        FpPoly::new(p, self.coeffs.iter().map(|c| modp::reduce_bigint(c, p)).collect())
    }

    /// Exact quotient in ℤ[x], `None` if `divisor` does not divide `self` over ℤ.
    pub fn div_exact(&self, divisor: &ZPoly) -> Option<ZPoly> {
        let dd = divisor.degree().expect("division by zero polynomial");
        if self.is_zero() {
            return Some(ZPoly::zero());
        }
        let n = self.degree()?;
        if n < dd {
            return None;
        }
        let lc = divisor.lc();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); n - dd + 1];
        for k in (0..quot.len()).rev() {
            let top = &rem[k + dd];
            if top.is_zero() {
                continue;
            }
            let (q, r) = top.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            for (j, d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &q * d;
            }
            quot[k] = q;
        }
        if rem.iter().take(dd).any(|c| !c.is_zero()) {
            return None;
        }
        Some(ZPoly::new(quot))
    }

    /// Pseudo-division: `lc(d)^(deg f − deg d + 1) · f = q·d + r`.
    pub fn pseudo_div_rem(&self, divisor: &ZPoly) -> (ZPoly, ZPoly, u32) {
        let dd = divisor.degree().expect("division by zero polynomial");
        let Some(n) = self.degree() else {
            return (ZPoly::zero(), ZPoly::zero(), 0);
        };
        if n < dd {
            return (ZPoly::zero(), self.clone(), 0);
        }
        let steps = (n - dd + 1) as u32;
        let lc = divisor.lc();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![BigInt::zero(); n - dd + 1];
        for k in (0..quot.len()).rev() {
            let top = rem[k + dd].clone();
            for c in rem.iter_mut() {
                *c *= &lc;
            }
            for q in quot.iter_mut() {
                *q *= &lc;
            }
            if !top.is_zero() {
                for (j, d) in divisor.coeffs.iter().enumerate() {
                    rem[k + j] -= &top * d;
                }
                quot[k] = top;
            }
        }
        rem.truncate(dd);
        (ZPoly::new(quot), ZPoly::new(rem), steps)
    }

    /// Primitive gcd with positive leading coefficient; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return other.primitive_part();
        }
        if other.is_zero() {
            return self.primitive_part();
        }
        let (_, f) = self.content_primitive();
        let (_, g) = other.content_primitive();
        if f.is_constant() || g.is_constant() {
            return ZPoly::one();
        }
        if f == g {
            return f;
        }
        gcd_modular(&f, &g)
    }

    /// Primitive-PRS gcd, quadratic in coefficient size but independent of the modular route.
    pub fn gcd_prs(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return other.primitive_part();
        }
        if other.is_zero() {
            return self.primitive_part();
        }
        let mut a = self.primitive_part();
        let mut b = other.primitive_part();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            let (_, r, _) = a.pseudo_div_rem(&b);
            a = b;
            b = r.primitive_part();
        }
        a.primitive_part()
    }

    /// Sum of squares of coefficients, for Mignotte-style bounds.
    pub fn norm2_squared(&self) -> BigInt {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_default()
    }
}

fn mul_schoolbook(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_into(dst: &mut [BigInt], src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

fn sub_into(dst: &mut [BigInt], src: &[BigInt]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d -= s;
    }
}

fn mul_slices(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.len().min(b.len()) <= KARATSUBA_THRESHOLD {
        return mul_schoolbook(a, b);
    }
    if a.len() != b.len() {
        // Chunk the longer operand into pieces the size of the shorter one.
        let (long, short) = if a.len() > b.len() { (a, b) } else { (b, a) };
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (k, chunk) in long.chunks(short.len()).enumerate() {
            let part = mul_slices(chunk, short);
            add_into(&mut out[k * short.len()..], &part);
        }
        return out;
    }
    let n = a.len();
    let half = n / 2;
    let (a0, a1) = a.split_at(half);
    let (b0, b1) = b.split_at(half);
    let z0 = mul_slices(a0, b0);
    let z2 = mul_slices(a1, b1);
    let mut sa: Vec<BigInt> = a1.to_vec();
    add_into(&mut sa, a0);
    let mut sb: Vec<BigInt> = b1.to_vec();
    add_into(&mut sb, b0);
    let mut z1 = mul_slices(&sa, &sb);
    sub_into(&mut z1, &z0);
    sub_into(&mut z1, &z2);
    let mut out = vec![BigInt::zero(); 2 * n - 1];
    add_into(&mut out, &z0);
    add_into(&mut out[half..], &z1);
    add_into(&mut out[2 * half..], &z2);
    out
}

/// Brown's multi-modular gcd for primitive inputs of positive degree.
fn gcd_modular(f: &ZPoly, g: &ZPoly) -> ZPoly {
    let (f, g) = if f.degree() >= g.degree() { (f, g) } else { (g, f) };
    let lc_gcd = f.lc().gcd(&g.lc());
    let mut best_deg = g.degree().unwrap() + 1;
    let mut modulus = BigInt::one();
    let mut image: Vec<BigInt> = Vec::new();
    for p in modp::large_primes() {
        let lf = modp::reduce_bigint(&f.lc(), p);
        let lg = modp::reduce_bigint(&g.lc(), p);
        if lf == 0 || lg == 0 {
            continue;
        }
        let gp = f.reduce_mod(p).gcd(&g.reduce_mod(p));
        let d = gp.degree().unwrap();
        if d == 0 {
            return ZPoly::one();
        }
        if d > best_deg {
            continue;
        }
        let gp = gp.scale(modp::reduce_bigint(&lc_gcd, p));
        if d < best_deg {
            best_deg = d;
            modulus = BigInt::from(p);
            image = gp.coeffs.iter().map(|&c| modp::symmetric(c, p)).collect();
            image.resize(d + 1, BigInt::zero());
            continue;
        }
        // CRT: image ← image + modulus·k, k ≡ (gp − image)/modulus (mod p), k symmetric.
        let m_inv = modp::inv_mod(modp::reduce_bigint(&modulus, p), p).expect("coprime moduli");
        let mut changed = false;
        for (i, h) in image.iter_mut().enumerate() {
            let target = gp.coeffs.get(i).copied().unwrap_or(0);
            let diff = modp::sub_mod(target, modp::reduce_bigint(h, p), p);
            if diff == 0 {
                continue;
            }
            changed = true;
            let k = modp::mul_mod(diff, m_inv, p);
            *h += &modulus * modp::symmetric(k, p);
        }
        modulus *= p;
        if !changed {
            let cand = ZPoly::new(image.clone()).primitive_part();
            if f.div_exact(&cand).is_some() && g.div_exact(&cand).is_some() {
                return cand;
            }
        }
    }
    unreachable!("prime supply is unbounded")
}
