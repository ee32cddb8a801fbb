//! Exact arithmetic: rationals, dense polynomials over ℤ and ℚ, reduced rational
//! functions, and word-sized modular arithmetic.

pub mod modp;
pub mod parse;
mod poly;
mod ratfunc;
mod rational;
mod zpoly;

pub use parse::{parse_ratfunc, parse_rational};
pub use poly::Poly;
pub use ratfunc::{is_square_ratfunc, RatFunc};
pub use rational::{exact_isqrt, is_square_rational, strip_square_part, Rational};
pub use zpoly::{ZPoly, KARATSUBA_THRESHOLD};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0}: zero input")]
    ZeroInput(&'static str),
    #[error("substitution makes the denominator vanish identically")]
    DegenerateSubstitution,
    #[error("parse error: {0}")]
    Parse(String),
}

/// Monic gcd over ℚ.
pub fn poly_gcd(f: &Poly, g: &Poly) -> Poly {
    f.gcd(g)
}

/// Yun squarefree decomposition; see [`Poly::squarefree_decompose`].
pub fn squarefree_decompose(f: &Poly) -> Result<Vec<(Poly, u32)>, AlgebraError> {
    f.squarefree_decompose()
}

/// Substitution `t ↦ g(r)` into `f(t)`.
pub fn ratfunc_compose(f: &RatFunc, g: &RatFunc) -> Result<RatFunc, AlgebraError> {
    f.compose(g)
}

/// Serde adapter writing big integers as decimal strings.
pub mod bigint_str {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(n)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.trim().parse().map_err(serde::de::Error::custom)
    }
}
