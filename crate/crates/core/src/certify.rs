//! Checkable evidence: independence modulo torsion via halving witnesses, the
//! non-square divisor conditions for injective specialization, relations with their
//! lattice index, and torsion classification.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::modp;
use crate::algebra::{Poly, RatFunc, Rational};
use crate::curve::{specialize_point, CurveAB, CurvePoint};
use crate::factor::{factor_with_hints, squarefree_divisors, FactorError};
use crate::finite_field::{
    count_points_naive, in_double_plus_torsion, is_halvable, reduce_curve, reduce_point,
};

/// Default upper limit on witness primes.
pub const DEFAULT_PRIME_BUDGET: u64 = 10_000;

/// Torsion orders over ℚ never exceed this.
pub const TORSION_ORDER_BOUND: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CertifyError {
    #[error("point {0} is not on the curve")]
    NotOnCurve(usize),
    #[error("point {0} is torsion")]
    TorsionPoint(usize),
    #[error("torsion generator does not have order 4")]
    BadTorsionGenerator,
    #[error("subset {0:#b} sums to a torsion point; the points are dependent")]
    Dependent(u64),
    #[error("no witness prime up to {budget} for subsets {masks:?}")]
    BudgetExhausted { budget: u64, masks: Vec<u64> },
    #[error("family coefficients must be polynomials")]
    NotPolynomial,
    #[error("specialization at {0} is singular or undefined")]
    BadSpecialization(String),
    #[error("x-coordinate {0} does not lift to a point")]
    NoLift(usize),
    #[error("no sign choice satisfies the relation")]
    RelationRefuted,
    #[error("matrix is singular or not square")]
    SingularMatrix,
    #[error("too many points: {0}")]
    TooManyPoints(usize),
    #[error(transparent)]
    Factor(#[from] FactorError),
}

// ---------------------------------------------------------------------------
// independence

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub mask: u64,
    pub prime: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndependenceCertificate {
    pub curve: CurveAB<Rational>,
    pub points: Vec<CurvePoint<Rational>>,
    pub torsion_gen: CurvePoint<Rational>,
    pub entries: Vec<Witness>,
    pub rank_lower_bound: usize,
}

/// `R_ε = Σ εᵢPᵢ` for every mask `ε` in `0..2ⁿ`, built by one addition per mask.
pub fn subset_sums(curve: &CurveAB<Rational>, points: &[CurvePoint<Rational>]) -> Vec<CurvePoint<Rational>> {
    let n = points.len();
    let mut sums = vec![CurvePoint::Infinity; 1 << n];
    for mask in 1usize..(1 << n) {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = curve.add(&sums[mask & (mask - 1)], &points[low]);
    }
    sums
}

/// Torsion test. On an integral model torsion points have integral coordinates
/// (Nagell–Lutz), which settles most points without computing multiples.
pub fn is_torsion(curve: &CurveAB<Rational>, p: &CurvePoint<Rational>) -> bool {
    if curve.a().is_integer() && curve.b().is_integer() {
        if let (Some(x), Some(y)) = (p.x(), p.y()) {
            if !x.is_integer() || !y.is_integer() {
                return false;
            }
        }
    }
    curve.point_order_bounded(p, TORSION_ORDER_BOUND).is_some()
}

/// Whether `p` certifies `r ∉ 2E(ℚ) + ⟨T⟩`: good reduction, affine reductions of `r`
/// and `T`, and `r̄ ∉ 2E(𝔽_p) + ⟨T̄⟩`.
pub fn is_witness(
    curve: &CurveAB<Rational>,
    r: &CurvePoint<Rational>,
    t: &CurvePoint<Rational>,
    p: u64,
) -> bool {
    let Ok(rc) = reduce_curve(curve, p) else {
        return false;
    };
    let (Some(rbar), Some(tbar)) = (reduce_point(r, &rc), reduce_point(t, &rc)) else {
        return false;
    };
    if rbar.is_infinity() {
        return false;
    }
    !in_double_plus_torsion(&rc, &rbar, &tbar)
}

/// Rank lower bound `n` for `n` points: for every nonzero mask, the smallest prime
/// `p ≤ prime_budget` (from 5 upward) at which the subset sum leaves `2E + ⟨T⟩`.
///
/// A witness for every mask means no nontrivial 𝔽₂-combination lies in
/// `2E(ℚ) + E(ℚ)_tors` (here `⟨T⟩`, which the caller has classified), so the images in
/// `E(ℚ)/(2E(ℚ) + tors)` are independent and the points generate a free subgroup of
/// rank `n` modulo torsion.
pub fn certify_independence(
    curve: &CurveAB<Rational>,
    points: &[CurvePoint<Rational>],
    torsion_gen: &CurvePoint<Rational>,
    prime_budget: u64,
) -> Result<IndependenceCertificate, CertifyError> {
    if points.len() > 20 {
        return Err(CertifyError::TooManyPoints(points.len()));
    }
    for (i, p) in points.iter().enumerate() {
        if !curve.contains(p) {
            return Err(CertifyError::NotOnCurve(i));
        }
        if is_torsion(curve, p) {
            return Err(CertifyError::TorsionPoint(i));
        }
    }
    if !curve.contains(torsion_gen) || curve.point_order_bounded(torsion_gen, 4) != Some(4) {
        return Err(CertifyError::BadTorsionGenerator);
    }
    let sums = subset_sums(curve, points);
    for (mask, r) in sums.iter().enumerate().skip(1) {
        if is_torsion(curve, r) {
            return Err(CertifyError::Dependent(mask as u64));
        }
    }
    let primes: Vec<u64> = modp::primes_from(5).take_while(|&p| p <= prime_budget).collect();
    let found: Vec<(u64, Option<u64>)> = (1..sums.len())
        .into_par_iter()
        .map(|mask| {
            let w = primes
                .iter()
                .copied()
                .find(|&p| is_witness(curve, &sums[mask], torsion_gen, p));
            (mask as u64, w)
        })
        .collect();
    let missing: Vec<u64> = found.iter().filter(|(_, w)| w.is_none()).map(|(m, _)| *m).collect();
    if !missing.is_empty() {
        return Err(CertifyError::BudgetExhausted {
            budget: prime_budget,
            masks: missing,
        });
    }
    Ok(IndependenceCertificate {
        curve: curve.clone(),
        points: points.to_vec(),
        torsion_gen: torsion_gen.clone(),
        entries: found
            .into_iter()
            .map(|(mask, w)| Witness { mask, prime: w.expect("checked") })
            .collect(),
        rank_lower_bound: points.len(),
    })
}

/// Re-validates every witness of a certificate without searching.
pub fn recheck_independence(cert: &IndependenceCertificate) -> Result<(), String> {
    let n = cert.points.len();
    if cert.rank_lower_bound != n {
        return Err("rank bound differs from the number of points".into());
    }
    for (i, p) in cert.points.iter().enumerate() {
        if !cert.curve.contains(p) {
            return Err(format!("point {i} is not on the curve"));
        }
    }
    if cert.curve.point_order_bounded(&cert.torsion_gen, 4) != Some(4) {
        return Err("torsion generator does not have order 4".into());
    }
    let masks: BTreeMap<u64, u64> = cert.entries.iter().map(|w| (w.mask, w.prime)).collect();
    if masks.len() != (1 << n) - 1 || !(1..(1u64 << n)).all(|m| masks.contains_key(&m)) {
        return Err("some nonzero subset has no witness".into());
    }
    let sums = subset_sums(&cert.curve, &cert.points);
    let bad: Vec<u64> = masks
        .par_iter()
        .filter(|(&m, &p)| !is_witness(&cert.curve, &sums[m as usize], &cert.torsion_gen, p))
        .map(|(&m, _)| m)
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(format!("witnesses fail for subsets {bad:?}"))
    }
}

// ---------------------------------------------------------------------------
// divisor conditions

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtHints {
    #[serde(default)]
    pub b: Vec<Poly>,
    #[serde(default)]
    pub disc: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorValue {
    pub h: Poly,
    /// `"B"`, `"A^2-4B"`, or both joined by `","`.
    pub source: String,
    pub value: Rational,
    pub square: bool,
    pub negative_square: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GtReport {
    pub family: CurveAB<RatFunc>,
    pub r0: Rational,
    pub b_factors: Vec<(Poly, u32)>,
    pub disc_factors: Vec<(Poly, u32)>,
    pub divisors: Vec<DivisorValue>,
    pub specialization_nonsingular: bool,
    pub unique_two_torsion: bool,
    pub verdict: bool,
}

/// Keeps the part of each hint shared with `f`; hints coprime to `f` are dropped.
fn relevant_hints(f: &Poly, hints: &[Poly]) -> Vec<Poly> {
    hints
        .iter()
        .filter(|h| !h.is_zero())
        .map(|h| Poly::from_zpoly(f.primitive().gcd(h.primitive())))
        .filter(|g| !g.is_constant())
        .collect()
}

/// Every nonconstant squarefree divisor `h` of `B(r)` and of `A(r)² − 4B(r)` must have
/// `h(r₀)` a non-square in ℚ. Values of `−h(r₀)` are recorded alongside.
pub fn gt_check(family: &CurveAB<RatFunc>, r0: &Rational, hints: Option<&GtHints>) -> Result<GtReport, CertifyError> {
    if !family.a().is_polynomial() || !family.b().is_polynomial() {
        return Err(CertifyError::NotPolynomial);
    }
    let special = family.specialize(r0);
    let specialization_nonsingular = matches!(special, Some(Ok(_)));
    if !specialization_nonsingular {
        return Err(CertifyError::BadSpecialization(r0.to_string()));
    }
    let b = family.b().num().clone();
    let disc = family.a2_minus_4b().num().clone();
    let empty = GtHints::default();
    let hints = hints.unwrap_or(&empty);
    let fb = factor_with_hints(&b, &relevant_hints(&b, &hints.b))?;
    let fd = factor_with_hints(&disc, &relevant_hints(&disc, &hints.disc))?;

    let mut divisors: Vec<DivisorValue> = Vec::new();
    for (fact, label) in [(&fb, "B"), (&fd, "A^2-4B")] {
        for h in squarefree_divisors(fact)? {
            if h.is_constant() {
                continue;
            }
            if let Some(d) = divisors.iter_mut().find(|d| d.h == h) {
                d.source.push(',');
                d.source.push_str(label);
                continue;
            }
            let value = h.eval(r0);
            divisors.push(DivisorValue {
                square: value.sqrt().is_some(),
                negative_square: (-&value).sqrt().is_some(),
                h,
                source: label.to_string(),
                value,
            });
        }
    }
    let curve0 = special.expect("checked").expect("checked");
    let unique_two_torsion = curve0.a2_minus_4b().sqrt().is_none();
    let verdict = divisors.iter().all(|d| !d.square);
    Ok(GtReport {
        family: family.clone(),
        r0: r0.clone(),
        b_factors: fb.factors,
        disc_factors: fd.factors,
        divisors,
        specialization_nonsingular,
        unique_two_torsion,
        verdict,
    })
}

/// Re-evaluates every recorded divisor and checks the count against the factor lists.
pub fn recheck_gt(report: &GtReport) -> Result<(), String> {
    let b = report.family.b().num().clone();
    let disc = report.family.a2_minus_4b().num().clone();
    for (target, facs, label) in [(&b, &report.b_factors, "B"), (&disc, &report.disc_factors, "A^2-4B")] {
        let prod = facs.iter().fold(Poly::one(), |acc, (f, e)| acc.mul(&f.pow(*e)));
        if target.monic() != prod.monic() {
            return Err(format!("factor list does not reproduce {label}"));
        }
    }
    for d in &report.divisors {
        let v = d.h.eval(&report.r0);
        if v != d.value || v.sqrt().is_some() != d.square || (-&v).sqrt().is_some() != d.negative_square {
            return Err(format!("divisor {} re-evaluates differently", d.h));
        }
    }
    let k1 = report.b_factors.len() as u32;
    let k2 = report.disc_factors.len() as u32;
    let shared = report.b_factors.iter().filter(|(f, _)| report.disc_factors.iter().any(|(g, _)| g == f)).count() as u32;
    let expected = (1usize << k1) + (1usize << k2) - 2 - ((1usize << shared) - 1);
    if report.divisors.len() != expected {
        return Err(format!("expected {expected} divisors, found {}", report.divisors.len()));
    }
    if report.verdict != report.divisors.iter().all(|d| !d.square) {
        return Err("verdict inconsistent with values".into());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// relations and lattice index

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCertificate {
    /// x-coordinates of the summands.
    pub lhs: Vec<RatFunc>,
    /// x-coordinate of `R` in `Σ ±Pᵢ = 2R`.
    pub half: RatFunc,
    /// Signs applied to the canonical lifts of the summands.
    pub sign_choices: Vec<i8>,
    pub verified: bool,
}

fn signed(p: &CurvePoint<RatFunc>, s: i8) -> CurvePoint<RatFunc> {
    if s < 0 {
        p.neg()
    } else {
        p.clone()
    }
}

fn sign_vector(bits: usize, k: usize) -> Vec<i8> {
    (0..k).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect()
}

/// Searches sign choices for canonical lifts so that `Σ ±Pᵢ = 2R` holds exactly over
/// ℚ(r). Candidates are screened at a few rational specializations first; the
/// surviving choice is then confirmed symbolically.
pub fn verify_relation(
    curve: &CurveAB<RatFunc>,
    lhs: &[RatFunc],
    half: &RatFunc,
) -> Result<RelationCertificate, CertifyError> {
    let lifts: Vec<CurvePoint<RatFunc>> = lhs
        .iter()
        .enumerate()
        .map(|(i, x)| curve.lift_x(x).ok_or(CertifyError::NoLift(i)))
        .collect::<Result<_, _>>()?;
    let r = curve.lift_x(half).ok_or(CertifyError::NoLift(lhs.len()))?;
    let k = lifts.len();

    let samples: Vec<(Rational, CurveAB<Rational>, Vec<CurvePoint<Rational>>, CurvePoint<Rational>)> = (2i64..)
        .take(60)
        .filter_map(|n| {
            let r0 = Rational::from_i64(n);
            let c = curve.specialize(&r0)?.ok()?;
            let ps = lifts.iter().map(|p| specialize_point(p, &r0)).collect::<Option<Vec<_>>>()?;
            let rr = specialize_point(&r, &r0)?;
            Some((r0, c, ps, rr))
        })
        .take(3)
        .collect();

    for bits in 0..(1usize << k) {
        let signs = sign_vector(bits, k);
        let plausible = samples.iter().all(|(_, c, ps, rr)| {
            let sum = ps
                .iter()
                .zip(&signs)
                .fold(CurvePoint::Infinity, |acc, (p, &s)| {
                    c.add(&acc, &if s < 0 { p.neg() } else { p.clone() })
                });
            sum == c.double(rr)
        });
        if !plausible {
            continue;
        }
        let sum = lifts
            .iter()
            .zip(&signs)
            .fold(CurvePoint::Infinity, |acc, (p, &s)| curve.add(&acc, &signed(p, s)));
        if sum == curve.double(&r) {
            return Ok(RelationCertificate {
                lhs: lhs.to_vec(),
                half: half.clone(),
                sign_choices: signs,
                verified: true,
            });
        }
    }
    Err(CertifyError::RelationRefuted)
}

/// Exact symbolic re-check of a recorded relation with its recorded signs.
pub fn recheck_relation(curve: &CurveAB<RatFunc>, cert: &RelationCertificate) -> bool {
    let Some(lifts) = cert.lhs.iter().map(|x| curve.lift_x(x)).collect::<Option<Vec<_>>>() else {
        return false;
    };
    let Some(r) = curve.lift_x(&cert.half) else {
        return false;
    };
    if cert.sign_choices.len() != lifts.len() {
        return false;
    }
    let sum = lifts
        .iter()
        .zip(&cert.sign_choices)
        .fold(CurvePoint::Infinity, |acc, (p, &s)| curve.add(&acc, &signed(p, s)));
    cert.verified && sum == curve.double(&r)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeIndex {
    pub matrix: Vec<Vec<i64>>,
    #[serde(with = "crate::algebra::bigint_str")]
    pub index: BigInt,
    #[serde(with = "crate::algebra::bigint_str")]
    pub regulator_ratio: BigInt,
}

/// Determinant by fraction-free Bareiss elimination.
pub fn determinant(m: &[Vec<i64>]) -> Result<BigInt, CertifyError> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(CertifyError::SingularMatrix);
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Index of the sublattice whose basis is expressed by the rows of `matrix` in terms of
/// a basis of the full lattice, and the corresponding regulator ratio `index²`.
pub fn lattice_index(matrix: &[Vec<i64>]) -> Result<LatticeIndex, CertifyError> {
    let det = determinant(matrix)?;
    if det.is_zero() {
        return Err(CertifyError::SingularMatrix);
    }
    let index = det.abs();
    let regulator_ratio = &index * &index;
    assert_eq!(regulator_ratio, &det * &det);
    Ok(LatticeIndex {
        matrix: matrix.to_vec(),
        index,
        regulator_ratio,
    })
}

/// Change-of-basis matrix for relations `Σ_{i∈Sⱼ} Pᵢ = 2Rⱼ` where `Rⱼ` replaces
/// `P_{replaces_j}` in the basis: row `i` writes `Pᵢ` in the new basis.
pub fn relation_matrix(n: usize, relations: &[(Vec<usize>, usize)]) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect();
    for (sum, rep) in relations {
        let row = &mut m[*rep];
        row.iter_mut().for_each(|v| *v = 0);
        for &i in sum {
            if i != *rep {
                row[i] -= 1;
            }
        }
        row[*rep] += 2;
    }
    m
}

// ---------------------------------------------------------------------------
// torsion

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorsionClaim {
    pub generator: Option<CurvePoint<Rational>>,
    pub generator_order: Option<u32>,
    pub primes: Vec<u64>,
    pub point_counts: Vec<u64>,
    pub gcd: u64,
    pub unique_two_torsion: bool,
    /// A sampled prime at which the generator is not halvable (rules out order 8).
    pub non_halving_prime: Option<u64>,
    pub exactly_z4: bool,
    pub summary: String,
}

/// Torsion classification: lower bound from an exhibited order-4 point, upper bound from
/// `gcd #E(𝔽_p)` over `sample_primes` good primes.
///
/// With a single rational 2-torsion point the torsion is cyclic; containing ℤ/4 it is
/// ℤ/4, ℤ/8 or ℤ/12. A 3 ∤ gcd excludes ℤ/12, and ℤ/8 is excluded when 8 ∤ gcd or the
/// order-4 point fails to halve modulo some good prime.
pub fn classify_torsion(curve: &CurveAB<Rational>, generator: Option<&CurvePoint<Rational>>, sample_primes: usize) -> TorsionClaim {
    let generator = generator.cloned().or_else(|| curve.order_four_point());
    let generator_order = generator
        .as_ref()
        .and_then(|g| curve.point_order_bounded(g, TORSION_ORDER_BOUND));
    let mut primes = Vec::new();
    let mut point_counts = Vec::new();
    let mut g = 0u64;
    let mut non_halving_prime = None;
    for p in modp::primes_from(3) {
        if primes.len() >= sample_primes {
            break;
        }
        let Ok(rc) = reduce_curve(curve, p) else {
            continue;
        };
        let Ok(n) = count_points_naive(&rc) else {
            break;
        };
        primes.push(p);
        point_counts.push(n);
        g = g.gcd(&n);
        if non_halving_prime.is_none() {
            if let Some(tb) = generator.as_ref().and_then(|t| reduce_point(t, &rc)) {
                if !is_halvable(&rc, &tb) {
                    non_halving_prime = Some(p);
                }
            }
        }
    }
    let unique_two_torsion = curve.a2_minus_4b().sqrt().is_none();
    let exactly_z4 = generator_order == Some(4)
        && unique_two_torsion
        && g % 3 != 0
        && g % 4 == 0
        && (g % 8 != 0 || non_halving_prime.is_some());
    let summary = if exactly_z4 {
        "torsion is exactly Z/4Z".to_string()
    } else {
        format!("torsion order divides {g}")
    };
    TorsionClaim {
        generator,
        generator_order,
        primes,
        point_counts,
        gcd: g,
        unique_two_torsion,
        non_halving_prime,
        exactly_z4,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::parse_ratfunc;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn t0_curve() -> CurveAB<Rational> {
        CurveAB::new(q(-3535), q(3211264)).unwrap()
    }

    #[test]
    fn lattice_examples() {
        let id: Vec<Vec<i64>> = (0..6).map(|i| (0..6).map(|j| (i == j) as i64).collect()).collect();
        let li = lattice_index(&id).unwrap();
        assert_eq!((li.index, li.regulator_ratio), (BigInt::from(1), BigInt::from(1)));
        let m = relation_matrix(6, &[(vec![2, 3, 4], 4), (vec![2, 3, 5], 5)]);
        assert_eq!(m[4], vec![0, 0, -1, -1, 2, 0]);
        let li = lattice_index(&m).unwrap();
        assert_eq!((li.index, li.regulator_ratio), (BigInt::from(4), BigInt::from(16)));
        let li = lattice_index(&[vec![2]]).unwrap();
        assert_eq!((li.index, li.regulator_ratio), (BigInt::from(2), BigInt::from(4)));
        assert!(lattice_index(&[vec![1, 2], vec![2, 4]]).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        fn cofactor(m: &[Vec<i64>]) -> i64 {
            if m.len() == 1 {
                return m[0][0];
            }
            (0..m.len())
                .map(|j| {
                    let minor: Vec<Vec<i64>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, &v)| v).collect())
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * cofactor(&minor)
                })
                .sum()
        }
        let m = vec![vec![0, 2, -1, 3], vec![1, 0, 4, -2], vec![5, -3, 0, 1], vec![2, 2, 2, 0]];
        assert_eq!(determinant(&m).unwrap(), BigInt::from(cofactor(&m)));
    }

    #[test]
    fn divisor_condition_examples() {
        let v = |s: &str| parse_ratfunc(s).unwrap().num().eval(&q(13));
        assert_eq!(v("r-224"), q(-211));
        assert_eq!(v("2r-7"), q(19));
        assert_eq!(v("r+3"), q(16));
        assert!(q(16).sqrt().is_some());

        // B = (r+3)^2 ⋅ 16: the divisor r+3 evaluates to a square at 13.
        let fam = CurveAB::new(
            parse_ratfunc("r^2+1").unwrap(),
            parse_ratfunc("16(r+3)^2").unwrap(),
        )
        .unwrap();
        let rep = gt_check(&fam, &q(13), None).unwrap();
        assert!(!rep.verdict);
        assert!(rep.divisors.iter().any(|d| d.h == parse_ratfunc("r+3").unwrap().num().clone() && d.square));
        recheck_gt(&rep).unwrap();
    }

    #[test]
    fn relation_p_plus_p() {
        let e = CurveAB::new(
            parse_ratfunc("65536t^4 - 17472t^3 - 10176t^2 + 18672t - 3535").unwrap(),
            parse_ratfunc("1024(t+1)^2(15t-8)^2(31t-7)^2").unwrap(),
        )
        .unwrap();
        let x1 = parse_ratfunc("-361(t+1)(31t-7)").unwrap();
        let p = e.lift_x(&x1).unwrap();
        let two_p = e.double(&p);
        let cert = verify_relation(&e, &[x1.clone(), x1.clone()], two_p.x().unwrap()).unwrap_err();
        // x(2P) halves P + P, but R must be P itself here:
        assert_eq!(cert, CertifyError::RelationRefuted);
        let cert = verify_relation(&e, &[x1.clone(), x1.clone()], &x1).unwrap();
        assert_eq!(cert.sign_choices, vec![1, 1]);
        assert!(recheck_relation(&e, &cert));
    }

    #[test]
    fn independence_on_small_curve() {
        // t = 0 fibre; x = −4(t+1)(15t−8)(16t−7)² specializes to 1568.
        let c = t0_curve();
        let t = CurvePoint::affine(q(1792), q(-12544));
        let p = c.lift_x(&q(1568)).expect("section specializes to a point");
        assert_eq!(c.point_order_bounded(&p, 12), None);
        // x = 2527 comes from −361(t+1)(31t−7) and satisfies P − T = 2Q with x(Q) = 2048,
        // so it must never be certified.
        let p1 = c.lift_x(&q(2527)).unwrap();
        let q2048 = c.lift_x(&q(2048)).unwrap();
        let r = c.sub(&p1, &t);
        assert!(c.double(&q2048) == r || c.double(&q2048.neg()) == r);
        assert!(certify_independence(&c, &[p1], &t, 2000).is_err());
        let cert = certify_independence(&c, &[p.clone()], &t, 1000).unwrap();
        assert_eq!(cert.entries.len(), 1);
        assert_eq!(cert.rank_lower_bound, 1);
        recheck_independence(&cert).unwrap();

        // {P, 2P}: the subset {2P} is always halvable, so no certificate exists.
        let p2 = c.double(&p);
        match certify_independence(&c, &[p.clone(), p2], &t, 300) {
            Err(CertifyError::BudgetExhausted { masks, .. }) => assert!(masks.contains(&2)),
            other => panic!("dependent points certified: {other:?}"),
        }
        // {P, P + T}: subset sum 2P + T, again never a witness.
        let pt = c.add(&p, &t);
        assert!(certify_independence(&c, &[p, pt], &t, 300).is_err());
    }

    #[test]
    fn halving_soundness_on_constructed_points() {
        let c = t0_curve();
        let t = CurvePoint::affine(q(1792), q(-12544));
        let qpt = c.lift_x(&q(1568)).unwrap();
        for k in 0..4 {
            let r = c.add(&c.double(&qpt), &c.mul_scalar(k, &t));
            let mut checked = 0;
            for p in modp::primes_from(5).take(80) {
                if let Ok(rc) = reduce_curve(&c, p) {
                    if let (Some(rb), Some(tb)) = (reduce_point(&r, &rc), reduce_point(&t, &rc)) {
                        assert!(in_double_plus_torsion(&rc, &rb, &tb), "p = {p}, k = {k}");
                        checked += 1;
                    }
                }
            }
            assert!(checked >= 50);
        }
    }

    #[test]
    fn torsion_of_t0_fibre() {
        let c = t0_curve();
        let claim = classify_torsion(&c, Some(&CurvePoint::affine(q(1792), q(-12544))), 8);
        assert_eq!(claim.generator_order, Some(4));
        assert!(claim.unique_two_torsion);
        // A² − 4B = 49 · (−7119)
        assert_eq!(c.a2_minus_4b(), q(49 * -7119));
        assert!(claim.exactly_z4, "{claim:?}");

        // y² = x(x − 1)(x − 4): A² − 4B = 9, full 2-torsion.
        let full = CurveAB::new(q(-5), q(4)).unwrap();
        let claim = classify_torsion(&full, None, 8);
        assert!(!claim.unique_two_torsion);
        assert!(!claim.exactly_z4);
    }

    #[test]
    fn integrality_shortcut_agrees_with_multiples() {
        let c = t0_curve();
        let t = CurvePoint::affine(q(1792), q(-12544));
        for k in 0..4 {
            assert!(is_torsion(&c, &c.mul_scalar(k, &t)));
        }
        let p = c.lift_x(&q(1568)).unwrap();
        let p3 = c.mul_scalar(3, &p);
        assert!(!p3.x().unwrap().is_integer());
        assert!(!is_torsion(&c, &p3));
        assert_eq!(c.point_order_bounded(&p3, 12), None);
        assert!(!is_torsion(&c, &p));
    }
}
