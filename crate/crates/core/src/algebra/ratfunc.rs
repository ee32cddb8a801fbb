use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::Poly;
use super::rational::Rational;
use super::zpoly::ZPoly;
use super::AlgebraError;

/// Reduced rational function `num / den` over ℚ.
///
/// Canonical form: `den` is a primitive integer polynomial with positive leading
/// coefficient, `num` carries the whole rational scale, and the two are coprime.
/// Equal functions therefore have identical representations.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn zero() -> Self {
        RatFunc {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        RatFunc::from_poly(Poly::one())
    }

    pub fn x() -> Self {
        RatFunc::from_poly(Poly::x())
    }

    pub fn constant(c: Rational) -> Self {
        RatFunc::from_poly(Poly::constant(c))
    }

    pub fn from_i64(n: i64) -> Self {
        RatFunc::constant(Rational::from_i64(n))
    }

    pub fn from_poly(p: Poly) -> Self {
        RatFunc {
            num: p,
            den: Poly::one(),
        }
    }

    pub fn new(num: Poly, den: Poly) -> Result<Self, AlgebraError> {
        if den.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(RatFunc::zero());
        }
        let g = num.primitive().gcd(den.primitive());
        let (n, d) = if g.is_one() {
            (num.primitive().clone(), den.primitive().clone())
        } else {
            (
                num.primitive().div_exact(&g).expect("gcd divides"),
                den.primitive().div_exact(&g).expect("gcd divides"),
            )
        };
        Ok(RatFunc::from_coprime(num.content() / den.content(), n, d))
    }

    /// Assemble from coprime primitive parts; `d` must have positive leading coefficient.
    fn from_coprime(scale: Rational, n: ZPoly, d: ZPoly) -> Self {
        RatFunc {
            num: Poly::from_scaled(scale, n),
            den: Poly::from_zpoly(d),
        }
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_constant(&self) -> bool {
        self.num.is_constant() && self.den.is_constant()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.is_constant() {
            Some(self.num.coeff(0))
        } else {
            None
        }
    }

    pub fn neg(&self) -> RatFunc {
        RatFunc {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn scale(&self, k: &Rational) -> RatFunc {
        if k.is_zero() {
            return RatFunc::zero();
        }
        RatFunc {
            num: self.num.scale(k),
            den: self.den.clone(),
        }
    }

    pub fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (b, d) = (self.den.primitive(), other.den.primitive());
        let g = b.gcd(d);
        if g.is_one() {
            let num = self
                .num
                .mul(&other.den)
                .add(&other.num.mul(&self.den));
            if num.is_zero() {
                return RatFunc::zero();
            }
            let den = b.mul(d);
            return RatFunc::from_coprime(num.content().clone(), num.primitive().clone(), den);
        }
        let b1 = b.div_exact(&g).unwrap();
        let d1 = d.div_exact(&g).unwrap();
        let num = self
            .num
            .mul(&Poly::from_zpoly(d1.clone()))
            .add(&other.num.mul(&Poly::from_zpoly(b1.clone())));
        if num.is_zero() {
            return RatFunc::zero();
        }
        let h = num.primitive().gcd(&g);
        let (n, g1) = if h.is_one() {
            (num.primitive().clone(), g)
        } else {
            (
                num.primitive().div_exact(&h).unwrap(),
                g.div_exact(&h).unwrap(),
            )
        };
        RatFunc::from_coprime(num.content().clone(), n, b1.mul(&d1).mul(&g1))
    }

    pub fn sub(&self, other: &RatFunc) -> RatFunc {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::zero();
        }
        let (a, b) = (self.num.primitive(), self.den.primitive());
        let (c, d) = (other.num.primitive(), other.den.primitive());
        let g1 = a.gcd(d);
        let g2 = c.gcd(b);
        let cut = |x: &ZPoly, g: &ZPoly| {
            if g.is_one() {
                x.clone()
            } else {
                x.div_exact(g).unwrap()
            }
        };
        let n = cut(a, &g1).mul(&cut(c, &g2));
        let dd = cut(b, &g2).mul(&cut(d, &g1));
        RatFunc::from_coprime(self.num.content() * other.num.content(), n, dd)
    }

    pub fn square(&self) -> RatFunc {
        RatFunc {
            num: self.num.mul(&self.num),
            den: self.den.mul(&self.den),
        }
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc, AlgebraError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let e = e.unsigned_abs();
        Ok(RatFunc {
            num: base.num.pow(e),
            den: base.den.pow(e),
        })
    }

    pub fn inv(&self) -> Result<RatFunc, AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::DivisionByZero);
        }
        let scale = Rational::one() / self.num.content();
        Ok(RatFunc::from_coprime(
            scale,
            self.den.primitive().clone(),
            self.num.primitive().clone(),
        ))
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, AlgebraError> {
        Ok(self.mul(&other.inv()?))
    }

    /// Value at a rational point, `None` at a pole.
    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return None;
        }
        Some(self.num.eval(x) / d)
    }

    /// Substitution `self(g)`, fully reduced.
    pub fn compose(&self, g: &RatFunc) -> Result<RatFunc, AlgebraError> {
        if let Some(c) = g.as_constant() {
            return self
                .eval(&c)
                .map(RatFunc::constant)
                .ok_or(AlgebraError::DegenerateSubstitution);
        }
        // Homogenize: f(p/q) = q^(m−n) · N_h(p, q) / D_h(p, q).
        let (p, q) = (g.num.clone(), g.den.clone());
        let n = self.num.degree().unwrap_or(0);
        let m = self.den.degree().unwrap_or(0);
        let top = n.max(m);
        let mut ppow = vec![Poly::one()];
        let mut qpow = vec![Poly::one()];
        for i in 1..=top {
            ppow.push(ppow[i - 1].mul(&p));
            qpow.push(qpow[i - 1].mul(&q));
        }
        let homogenize = |f: &Poly, deg: usize| {
            f.coeffs()
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .fold(Poly::zero(), |acc, (i, c)| {
                    acc.add(&ppow[i].mul(&qpow[deg - i]).scale(c))
                })
        };
        let mut num = homogenize(&self.num, n);
        let mut den = homogenize(&self.den, m);
        if den.is_zero() {
            return Err(AlgebraError::DegenerateSubstitution);
        }
        if m > n {
            num = num.mul(&qpow[m - n]);
        } else if n > m {
            den = den.mul(&qpow[n - m]);
        }
        RatFunc::new(num, den)
    }

    pub fn derivative(&self) -> RatFunc {
        let n = self.num.derivative().mul(&self.den);
        let d = self.num.mul(&self.den.derivative());
        RatFunc::new(n.sub(&d), self.den.mul(&self.den)).expect("nonzero denominator")
    }

    /// Square root in ℚ(x) when one exists; the root's numerator has positive leading
    /// coefficient.
    pub fn sqrt(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return Some(RatFunc::zero());
        }
        let n = self.num.sqrt()?;
        let d = self.den.sqrt()?;
        Some(RatFunc::from_coprime(
            n.content() / d.content(),
            n.primitive().clone(),
            d.primitive().clone(),
        ))
    }

    /// Square class `self = c · s · k²` with `s` a squarefree primitive integer
    /// polynomial and `c` a rational carrying the remaining constant; returns `(c, s)`.
    pub fn square_class(&self) -> (Rational, ZPoly) {
        let (sn, _) = self.num.square_class();
        let (sd, _) = self.den.square_class();
        let s = sn.mul(&sd);
        (self.num.content().clone(), s)
    }

    pub fn to_string_in(&self, var: &str) -> String {
        if self.den.is_one() {
            return self.num.to_string_in(var);
        }
        format!("({}) / ({})", self.num.to_string_in(var), self.den.to_string_in(var))
    }

    /// Common integer scaling helper: `(N, D)` integer polynomials with `self = N / D`.
    pub fn integer_parts(&self) -> (ZPoly, ZPoly) {
        let (n, k) = self.num.to_integer_poly();
        (n, self.den.primitive().scale(&k))
    }

    pub fn from_integer_parts(n: ZPoly, d: ZPoly) -> Result<RatFunc, AlgebraError> {
        RatFunc::new(Poly::from_zpoly(n), Poly::from_zpoly(d))
    }

    pub fn from_bigint(n: BigInt) -> RatFunc {
        RatFunc::constant(Rational::from_integer(n))
    }

}

/// Square test in ℚ(x).
pub fn is_square_ratfunc(f: &RatFunc) -> Option<RatFunc> {
    f.sqrt()
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_string_in("x"))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({})", self.to_string_in("x"))
    }
}

#[derive(Serialize, Deserialize)]
struct RatFuncRepr {
    num: Poly,
    den: Poly,
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        if self.den.is_one() {
            return self.num.serialize(serializer);
        }
        RatFuncRepr {
            num: self.num.clone(),
            den: self.den.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Either {
            Frac(RatFuncRepr),
            Poly(Poly),
        }
        match Either::deserialize(deserializer)? {
            Either::Frac(r) => RatFunc::new(r.num, r.den).map_err(serde::de::Error::custom),
            Either::Poly(p) => Ok(RatFunc::from_poly(p)),
        }
    }
}
