use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::{denominator_lcm, Rational};
use super::zpoly::ZPoly;
use super::AlgebraError;

/// Dense univariate polynomial over ℚ.
///
/// Stored as `content · prim` where `prim` is a primitive integer polynomial with
/// positive leading coefficient. The representation is canonical: two equal
/// polynomials have identical fields. Coefficients are exposed as rationals
/// through [`Poly::coeff`] and [`Poly::coeffs`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    content: Rational,
    prim: ZPoly,
}

impl Poly {
    pub fn zero() -> Self {
        Poly {
            content: Rational::zero(),
            prim: ZPoly::zero(),
        }
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            content: c,
            prim: ZPoly::one(),
        }
    }

    /// The indeterminate `x`.
    pub fn x() -> Self {
        Poly::from_zpoly(ZPoly::monomial(1))
    }

    pub fn from_coeffs(coeffs: Vec<Rational>) -> Self {
        let l = denominator_lcm(&coeffs);
        let ints = coeffs
            .iter()
            .map(|c| c.numer() * (&l / c.denom()))
            .collect();
        Poly::from_scaled(Rational::new(BigInt::one(), l), ZPoly::new(ints))
    }

    pub fn from_i64s(cs: &[i64]) -> Self {
        Poly::from_zpoly(ZPoly::from_i64s(cs))
    }

    pub fn from_zpoly(z: ZPoly) -> Self {
        Poly::from_scaled(Rational::one(), z)
    }

    /// The polynomial `scale · z` in canonical form.
    pub fn from_scaled(scale: Rational, z: ZPoly) -> Self {
        if scale.is_zero() || z.is_zero() {
            return Poly::zero();
        }
        let (c, prim) = z.content_primitive();
        Poly {
            content: scale * Rational::from_integer(c),
            prim,
        }
    }

    /// Linear polynomial `x − root`.
    pub fn linear_root(root: &Rational) -> Self {
        Poly::from_coeffs(vec![-root, Rational::one()])
    }

    pub fn content(&self) -> &Rational {
        &self.content
    }

    /// Primitive integer part (positive leading coefficient).
    pub fn primitive(&self) -> &ZPoly {
        &self.prim
    }

    pub fn is_zero(&self) -> bool {
        self.content.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.content.is_one() && self.prim.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.prim.is_constant()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.prim.degree()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        match self.prim.coeffs().get(i) {
            Some(c) => &self.content * &Rational::from_integer(c.clone()),
            None => Rational::zero(),
        }
    }

    pub fn coeffs(&self) -> Vec<Rational> {
        (0..self.prim.coeffs().len()).map(|i| self.coeff(i)).collect()
    }

    pub fn lc(&self) -> Rational {
        match self.degree() {
            Some(d) => self.coeff(d),
            None => Rational::zero(),
        }
    }

    /// Integer polynomial `k·self` together with `k`, the least positive integer
    /// making every coefficient integral.
    pub fn to_integer_poly(&self) -> (ZPoly, BigInt) {
        if self.is_zero() {
            return (ZPoly::zero(), BigInt::one());
        }
        let d = self.content.denom().clone();
        (self.prim.scale(self.content.numer()), d)
    }

    pub fn neg(&self) -> Poly {
        Poly {
            content: -&self.content,
            prim: self.prim.clone(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() || self.is_zero() {
            return Poly::zero();
        }
        Poly {
            content: &self.content * k,
            prim: self.prim.clone(),
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (a1, b1) = (self.content.numer(), self.content.denom());
        let (a2, b2) = (other.content.numer(), other.content.denom());
        let g = b1.gcd(b2);
        let left = self.prim.scale(&(a1 * (b2 / &g)));
        let right = other.prim.scale(&(a2 * (b1 / &g)));
        let denom = b1 / &g * b2;
        Poly::from_scaled(Rational::new(BigInt::one(), denom), left.add(&right))
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        // Gauss: the product of primitive polynomials is primitive.
        Poly {
            content: &self.content * &other.content,
            prim: self.prim.mul(&other.prim),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        if e == 0 {
            return Poly::one();
        }
        Poly {
            content: self.content.pow(e as i32),
            prim: self.prim.pow(e),
        }
    }

    /// Euclidean division over ℚ.
    pub fn div_rem(&self, divisor: &Poly) -> Result<(Poly, Poly), AlgebraError> {
        if divisor.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let (q, r, k) = self.prim.pseudo_div_rem(&divisor.prim);
        let lck = Rational::from_integer(divisor.prim.lc().pow(k));
        let qs = &self.content / &divisor.content / &lck;
        let rs = &self.content / &lck;
        Ok((Poly::from_scaled(qs, q), Poly::from_scaled(rs, r)))
    }

    /// Exact quotient; `None` when `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Poly) -> Option<Poly> {
        if divisor.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let q = self.prim.div_exact(&divisor.prim)?;
        Some(Poly::from_scaled(&self.content / &divisor.content, q))
    }

    pub fn monic(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let lc = Rational::from_integer(self.prim.lc());
        Poly {
            content: Rational::one() / lc,
            prim: self.prim.clone(),
        }
    }

    /// Monic gcd over ℚ; `gcd(f, 0) = monic(f)`.
    pub fn gcd(&self, other: &Poly) -> Poly {
        Poly::from_zpoly(self.prim.gcd(&other.prim)).monic()
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_scaled(self.content.clone(), self.prim.derivative())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        let deg = self.degree().unwrap() as i32;
        let h = self.prim.eval_homogeneous(x.numer(), x.denom());
        &self.content * &Rational::new(h, x.denom().pow(deg as u32))
    }

    /// Composition `self(g)`.
    pub fn compose(&self, g: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs().iter().rev() {
            acc = acc.mul(g).add(&Poly::constant(c.clone()));
        }
        acc
    }

    /// Yun's squarefree decomposition: `self = lc · ∏ gᵢ^mᵢ` with monic, squarefree,
    /// pairwise coprime `gᵢ` and strictly increasing `mᵢ`.
    pub fn squarefree_decompose(&self) -> Result<Vec<(Poly, u32)>, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::ZeroInput("squarefree decomposition"));
        }
        Ok(yun(&self.prim)
            .into_iter()
            .map(|(g, m)| (Poly::from_zpoly(g).monic(), m))
            .collect())
    }

    /// Square root when `self` is a perfect square in ℚ[x]; leading coefficient positive.
    pub fn sqrt(&self) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let c = self.content.sqrt()?;
        let r = zpoly_sqrt(&self.prim)?;
        Some(Poly::from_scaled(c, r))
    }

    /// Squarefree kernel modulo squares: `self = k² · s` with `s` squarefree over ℚ,
    /// returned as `(s primitive part, k primitive part)`; constants are left to the caller.
    pub fn square_class(&self) -> (ZPoly, ZPoly) {
        let mut kernel = ZPoly::one();
        let mut root = ZPoly::one();
        for (g, m) in yun(&self.prim) {
            if m % 2 == 1 {
                kernel = kernel.mul(&g);
            }
            if m >= 2 {
                root = root.mul(&g.pow(m / 2));
            }
        }
        (kernel, root)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, c) in self.coeffs().iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if out.is_empty() {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let mono = match i {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{i}"),
            };
            if i == 0 || !a.is_one() {
                if !a.is_integer() && i > 0 {
                    out.push_str(&format!("({a})"));
                } else {
                    out.push_str(&a.to_string());
                }
                if i > 0 {
                    out.push('*');
                }
            }
            out.push_str(&mono);
        }
        out
    }
}

/// Yun's algorithm on a primitive integer polynomial; constant factors are dropped.
fn yun(f: &ZPoly) -> Vec<(ZPoly, u32)> {
    let mut out = Vec::new();
    if f.is_constant() {
        return out;
    }
    let df = f.derivative();
    let a0 = f.gcd(&df);
    // f primitive with positive lc, so f = ∏ aᵢ^i exactly over ℤ and every
    // quotient below stays integral.
    let mut b = f.div_exact(&a0).expect("gcd divides f");
    let mut c = df.div_exact(&a0).expect("gcd divides f'");
    let mut d = c.sub(&b.derivative());
    let mut m = 1;
    while !b.is_constant() {
        let a = b.gcd(&d);
        if !a.is_constant() {
            out.push((a.clone(), m));
        }
        b = b.div_exact(&a).expect("gcd divides b");
        c = d.div_exact(&a).expect("gcd divides d");
        d = c.sub(&b.derivative());
        m += 1;
    }
    out
}

/// Exact square root of an integer polynomial with positive leading coefficient.
fn zpoly_sqrt(f: &ZPoly) -> Option<ZPoly> {
    let mut root = ZPoly::one();
    let mut rebuilt = ZPoly::one();
    for (g, m) in yun(f) {
        if m % 2 == 1 {
            return None;
        }
        root = root.mul(&g.pow(m / 2));
        rebuilt = rebuilt.mul(&g.pow(m));
    }
    let cont = f.div_exact(&rebuilt)?;
    if !cont.is_constant() {
        return None;
    }
    let c = super::rational::exact_isqrt(&cont.lc())?;
    Some(root.scale(&c))
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x"))
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({})", self.to_string_in("x"))
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coeffs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let coeffs = Vec::<Rational>::deserialize(deserializer)?;
        Ok(Poly::from_coeffs(coeffs))
    }
}
