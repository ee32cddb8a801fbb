//! Curves `y² = x³ + A x² + B x` over an arbitrary coefficient field, their
//! chord–tangent group law, and the ℤ/4ℤ Tate normal form.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{RatFunc, Rational};
use crate::finite_field::Fp;

/// The arithmetic a coefficient domain must provide for the group law.
///
/// Elements carry whatever context they need (a prime field element knows its
/// modulus), so constants are built "like" an existing element.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// Canonical square root: nonnegative over ℚ, positive leading coefficient over
    /// ℚ(t), least residue over 𝔽_p.
    fn sqrt(&self) -> Option<Self>;

    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }

    fn square(&self) -> Self {
        self.mul(self)
    }

    fn div(&self, other: &Self) -> Option<Self> {
        Some(self.mul(&other.inv()?))
    }
}

impl Field for Rational {
    fn zero_like(&self) -> Self {
        Rational::zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Rational::from_i64(n)
    }
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        self.recip()
    }
    fn sqrt(&self) -> Option<Self> {
        Rational::sqrt(self)
    }
}

impl Field for RatFunc {
    fn zero_like(&self) -> Self {
        RatFunc::zero()
    }
    fn from_i64_like(&self, n: i64) -> Self {
        RatFunc::from_i64(n)
    }
    fn is_zero(&self) -> bool {
        RatFunc::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        RatFunc::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        RatFunc::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        RatFunc::mul(self, other)
    }
    fn neg(&self) -> Self {
        RatFunc::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        RatFunc::inv(self).ok()
    }
    fn sqrt(&self) -> Option<Self> {
        RatFunc::sqrt(self)
    }
    fn square(&self) -> Self {
        RatFunc::square(self)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurveError {
    #[error("singular curve: B·(A²−4B) = 0")]
    Singular,
    #[error("Tate parameters violate a·b·(a²−16b) ≠ 0")]
    DegenerateTate,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("internal check failed: {0}")]
    Check(&'static str),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum CurvePoint<F> {
    Infinity,
    Affine { x: F, y: F },
}

impl<F: Field> CurvePoint<F> {
    pub fn affine(x: F, y: F) -> Self {
        CurvePoint::Affine { x, y }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, CurvePoint::Infinity)
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            CurvePoint::Affine { x, .. } => Some(x),
            CurvePoint::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            CurvePoint::Affine { y, .. } => Some(y),
            CurvePoint::Infinity => None,
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            CurvePoint::Infinity => CurvePoint::Infinity,
            CurvePoint::Affine { x, y } => CurvePoint::Affine {
                x: x.clone(),
                y: y.neg(),
            },
        }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> Option<G>) -> Option<CurvePoint<G>> {
        match self {
            CurvePoint::Infinity => Some(CurvePoint::Infinity),
            CurvePoint::Affine { x, y } => Some(CurvePoint::Affine { x: f(x)?, y: f(y)? }),
        }
    }
}

/// `y² = x³ + A x² + B x`, nonsingular.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CurveAB<F> {
    a: F,
    b: F,
}

impl<F: Field> CurveAB<F> {
    pub fn new(a: F, b: F) -> Result<Self, CurveError> {
        let c = CurveAB { a, b };
        if c.discriminant_proxy().is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(c)
    }

    /// Coefficient `A`.
    pub fn a(&self) -> &F {
        &self.a
    }

    /// Coefficient `B`.
    pub fn b(&self) -> &F {
        &self.b
    }

    /// `A² − 4B`.
    pub fn a2_minus_4b(&self) -> F {
        self.a.square().sub(&self.b.mul(&self.b.from_i64_like(4)))
    }

    /// `B²(A² − 4B)`, zero exactly when the curve is singular.
    pub fn discriminant_proxy(&self) -> F {
        self.b.square().mul(&self.a2_minus_4b())
    }

    /// `x³ + A x² + B x`.
    pub fn rhs(&self, x: &F) -> F {
        x.square().add(&self.a.mul(x)).add(&self.b).mul(x)
    }

    pub fn contains(&self, p: &CurvePoint<F>) -> bool {
        match p {
            CurvePoint::Infinity => true,
            CurvePoint::Affine { x, y } => y.square() == self.rhs(x),
        }
    }

    /// The rational 2-torsion point `(0, 0)`.
    pub fn two_torsion(&self) -> CurvePoint<F> {
        CurvePoint::Affine {
            x: self.a.zero_like(),
            y: self.a.zero_like(),
        }
    }

    pub fn double(&self, p: &CurvePoint<F>) -> CurvePoint<F> {
        self.add(p, p)
    }

    /// Chord–tangent sum; both points are assumed to lie on this curve.
    pub fn add(&self, p: &CurvePoint<F>, q: &CurvePoint<F>) -> CurvePoint<F> {
        let (x1, y1, x2, y2) = match (p, q) {
            (CurvePoint::Infinity, _) => return q.clone(),
            (_, CurvePoint::Infinity) => return p.clone(),
            (CurvePoint::Affine { x: x1, y: y1 }, CurvePoint::Affine { x: x2, y: y2 }) => {
                (x1, y1, x2, y2)
            }
        };
        let lambda = if x1 == x2 {
            if y1.add(y2).is_zero() {
                return CurvePoint::Infinity;
            }
            // Tangent: (3x² + 2Ax + B) / 2y.
            let num = x1
                .square()
                .mul(&x1.from_i64_like(3))
                .add(&self.a.mul(x1).mul(&x1.from_i64_like(2)))
                .add(&self.b);
            num.div(&y1.mul(&y1.from_i64_like(2))).expect("y ≠ 0")
        } else {
            y2.sub(y1).div(&x2.sub(x1)).expect("x₁ ≠ x₂")
        };
        let x3 = lambda.square().sub(&self.a).sub(x1).sub(x2);
        let y3 = lambda.mul(&x1.sub(&x3)).sub(y1);
        CurvePoint::Affine { x: x3, y: y3 }
    }

    /// Sum with a membership check on both operands.
    pub fn checked_add(
        &self,
        p: &CurvePoint<F>,
        q: &CurvePoint<F>,
    ) -> Result<CurvePoint<F>, CurveError> {
        if !self.contains(p) || !self.contains(q) {
            return Err(CurveError::NotOnCurve);
        }
        Ok(self.add(p, q))
    }

    pub fn sub(&self, p: &CurvePoint<F>, q: &CurvePoint<F>) -> CurvePoint<F> {
        self.add(p, &q.neg())
    }

    /// `n·P` by double-and-add; negative `n` negates.
    pub fn mul_scalar(&self, n: i64, p: &CurvePoint<F>) -> CurvePoint<F> {
        self.mul_bigint(&BigInt::from(n), p)
    }

    pub fn mul_bigint(&self, n: &BigInt, p: &CurvePoint<F>) -> CurvePoint<F> {
        let base = if n.is_negative() { p.neg() } else { p.clone() };
        let k = n.abs();
        let mut acc = CurvePoint::Infinity;
        for i in (0..k.bits()).rev() {
            acc = self.double(&acc);
            if k.bit(i) {
                acc = self.add(&acc, &base);
            }
        }
        acc
    }

    /// Least `n ≤ bound` with `nP = ∞`.
    pub fn point_order_bounded(&self, p: &CurvePoint<F>, bound: u32) -> Option<u32> {
        let mut acc = p.clone();
        for n in 1..=bound {
            if acc.is_infinity() {
                return Some(n);
            }
            acc = self.add(&acc, p);
        }
        None
    }

    /// Point with abscissa `x`, using the field's canonical square root for `y`.
    pub fn lift_x(&self, x: &F) -> Option<CurvePoint<F>> {
        let y = self.rhs(x).sqrt()?;
        Some(CurvePoint::Affine { x: x.clone(), y })
    }

    /// An order-4 point `T` with `2T = (0, 0)`, searched among `x = ±√B`.
    pub fn order_four_point(&self) -> Option<CurvePoint<F>> {
        let s = self.b.sqrt()?;
        let target = self.two_torsion();
        for x in [s.clone(), s.neg()] {
            if let Some(t) = self.lift_x(&x) {
                if self.double(&t) == target {
                    return Some(t);
                }
            }
        }
        None
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> Option<G>) -> Option<Result<CurveAB<G>, CurveError>> {
        Some(CurveAB::new(f(&self.a)?, f(&self.b)?))
    }
}

impl CurveAB<RatFunc> {
    /// Fibre at `t = t0`; `None` when a coefficient has a pole there.
    pub fn specialize(&self, t0: &Rational) -> Option<Result<CurveAB<Rational>, CurveError>> {
        self.map(|f| f.eval(t0))
    }
}

/// Evaluates a point over ℚ(t) at `t0`; `None` at a pole of either coordinate.
pub fn specialize_point(p: &CurvePoint<RatFunc>, t0: &Rational) -> Option<CurvePoint<Rational>> {
    p.map(|f| f.eval(t0))
}

/// `Y² + aXY + abY = X³ + bX²`, whose point `(0, 0)` has order 4.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TateZ4Curve<F> {
    a: F,
    b: F,
}

impl<F: Field> TateZ4Curve<F> {
    pub fn new(a: F, b: F) -> Result<Self, CurveError> {
        let sixteen_b = b.mul(&b.from_i64_like(16));
        if a.mul(&b).mul(&a.square().sub(&sixteen_b)).is_zero() {
            return Err(CurveError::DegenerateTate);
        }
        Ok(TateZ4Curve { a, b })
    }

    pub fn a(&self) -> &F {
        &self.a
    }

    pub fn b(&self) -> &F {
        &self.b
    }

    pub fn contains(&self, x: &F, y: &F) -> bool {
        let (a, b) = (&self.a, &self.b);
        let lhs = y.square().add(&a.mul(x).mul(y)).add(&a.mul(b).mul(y));
        let rhs = x.square().mul(x).add(&b.mul(&x.square()));
        lhs == rhs
    }

    /// Converts to `y² = x³ + (a²−8b)x² + 16b²x` and returns the order-4 point
    /// `T = (4b, 4ab)`; checks `T` is on the curve and `2T = (0, 0)`.
    pub fn to_ab(&self) -> Result<(CurveAB<F>, CurvePoint<F>), CurveError> {
        let (a, b) = (&self.a, &self.b);
        let four = a.from_i64_like(4);
        let big_a = a.square().sub(&b.mul(&a.from_i64_like(8)));
        let big_b = b.square().mul(&a.from_i64_like(16));
        let curve = CurveAB::new(big_a, big_b)?;
        let t = CurvePoint::affine(four.mul(b), four.mul(a).mul(b));
        if !curve.contains(&t) {
            return Err(CurveError::Check("torsion point not on converted curve"));
        }
        if curve.double(&t) != curve.two_torsion() {
            return Err(CurveError::Check("2T ≠ (0, 0)"));
        }
        Ok((curve, t))
    }

    /// Image of a Tate-form point under `x = 4X + 4b`, `y = 8Y + 4aX + 4ab`.
    pub fn point_to_ab(&self, x: &F, y: &F) -> CurvePoint<F> {
        let (a, b) = (&self.a, &self.b);
        let four = a.from_i64_like(4);
        let nx = four.mul(x).add(&four.mul(b));
        let ny = a
            .from_i64_like(8)
            .mul(y)
            .add(&four.mul(a).mul(x))
            .add(&four.mul(a).mul(b));
        CurvePoint::affine(nx, ny)
    }
}

pub fn tate_to_ab<F: Field>(c: &TateZ4Curve<F>) -> Result<(CurveAB<F>, CurvePoint<F>), CurveError> {
    c.to_ab()
}

// Serialization: curves as {"A": .., "B": ..}, points as {"x": .., "y": ..} or "inf".

#[derive(Serialize, Deserialize)]
struct CurveRepr<F> {
    #[serde(rename = "A")]
    a: F,
    #[serde(rename = "B")]
    b: F,
}

impl<F: Field + Serialize> Serialize for CurveAB<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CurveRepr {
            a: &self.a,
            b: &self.b,
        }
        .serialize(serializer)
    }
}

impl<'de, F: Field + DeserializeOwned> Deserialize<'de> for CurveAB<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = CurveRepr::<F>::deserialize(deserializer)?;
        CurveAB::new(r.a, r.b).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PointRepr<F> {
    Inf(String),
    Affine { x: F, y: F },
}

impl<F: Field + Serialize> Serialize for CurvePoint<F> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            CurvePoint::Infinity => serializer.serialize_str("inf"),
            CurvePoint::Affine { x, y } => PointRepr::Affine { x, y }.serialize(serializer),
        }
    }
}

impl<'de, F: Field + DeserializeOwned> Deserialize<'de> for CurvePoint<F> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match PointRepr::<F>::deserialize(deserializer)? {
            PointRepr::Inf(s) if s == "inf" => Ok(CurvePoint::Infinity),
            PointRepr::Inf(s) => Err(serde::de::Error::custom(format!("unknown point {s:?}"))),
            PointRepr::Affine { x, y } => Ok(CurvePoint::Affine { x, y }),
        }
    }
}

impl Field for Fp {
    fn zero_like(&self) -> Self {
        Fp::new(0, self.p())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Fp::from_i64(n, self.p())
    }
    fn is_zero(&self) -> bool {
        self.value() == 0
    }
    fn add(&self, other: &Self) -> Self {
        Fp::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Fp::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Fp::mul(self, other)
    }
    fn neg(&self) -> Self {
        Fp::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        Fp::inv(self)
    }
    fn sqrt(&self) -> Option<Self> {
        Fp::sqrt(self)
    }
}
