#![allow(dead_code)]

use std::path::PathBuf;

use mwforge::algebra::{parse_ratfunc, Poly, RatFunc, Rational};
use mwforge::curve::{CurveAB, CurvePoint};
use mwforge::factor::factor_over_q;
use mwforge::finite_field::{all_points, in_double_plus_torsion, is_halvable, reduce_curve, Fp};
use mwforge::pipeline::{LoadedManifest, Manifest};
use rand::Rng;

pub fn manifest_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("manifests").join(name)
}

pub fn load(name: &str) -> LoadedManifest {
    let text = std::fs::read_to_string(manifest_path(name)).expect("manifest file");
    Manifest::from_json(&text).expect("manifest parses")
}

pub fn rf(s: &str) -> RatFunc {
    parse_ratfunc(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

pub fn poly(s: &str) -> Poly {
    let f = rf(s);
    assert!(f.is_polynomial(), "{s}");
    f.num().clone()
}

pub fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

// Displayed formulas, typed in factored form exactly as stated.

pub const A_T: &str = "(8t-1)(32t+7)";
pub const B_T: &str = "8(t+1)(15t-8)(31t-7)";
pub const E_A: &str = "65536t^4 - 17472t^3 - 10176t^2 + 18672t - 3535";
pub const E_B: &str = "1024(t+1)^2(15t-8)^2(31t-7)^2";
pub const TORSION_X: &str = "32(t+1)(15t-8)(31t-7)";
pub const TORSION_Y: &str = "2^5(1+t)(-1+8t)(-8+15t)(-7+31t)(7+32t)";
pub const X_T: [&str; 4] = [
    "-361(t+1)(31t-7)",
    "-4(t+1)(15t-8)(16t-7)^2",
    "-16(t+1)(8t+7)^2(15t-8)",
    "4(15t-8)(16t+1)^2(31t-7)",
];
pub const ALT_A: &str = "4(9+80t)";
pub const ALT_B: &str = "(1/2)(-2+t)(-81+2t)(-1+2t)(-1+18t)";
pub const CAND_1: &str = "-64(1+t)^2(-4+7t)(4+17t)/(1+4t)^2";
pub const CAND_2: &str = "576(-4+7t)(-8+15t)^2(-1324+5551t)/(49(-39+28t)^2)";
pub const COND_1: &str = "-(-4+7t)(4+17t)";
pub const COND_2: &str = "(-4+7t)(-1324+5551t)";
pub const SUB_1: &str = "4(u^2-1)/(17+7u^2)";
pub const SUB_2: &str = "4(-331+u^2)/(7(-793+u^2))";
pub const COMBINED: &str = "-(-1863+539u^2)";
pub const U_OF_R: &str = "(-7007-28r+13r^2)/(7(539+r^2))";
pub const T_OF_R: &str = "4(3r^2-14r-5390)(10r^2-14r-1617)/(7(72r^4-182r^3-13279r^2+98098r+20917512))";

pub const A6: &str = "3(6637977907200r^16 - 327957190299648r^15 - 132939477324670464r^14 \
    + 1334557851651990784r^13 + 73205200037549219248r^12 - 1718125119359074284768r^11 \
    - 193538301177692188691736r^10 + 1905189555626165277886872r^9 \
    + 96624855648992854220247819r^8 - 1026897170482503084781024008r^7 \
    - 56226940796444312350911834456r^6 + 269042619584910197333660344992r^5 \
    + 6178698341397939354226782536368r^4 - 60712935351132451806093801142016r^3 \
    - 3259766993714464579957766495983104r^2 + 4334495070152077221968455683796992r \
    + 47287453161693896431461711200563200)";
pub const B6: &str = "7225344(r-224)^2(r+154)^2(2r-7)^2(32r+77)^2(18r^2+14r+16709)^2\
    (24r^2-1001r+14014)^2(26r^2+1001r+12936)^2(31r^2-14r+9702)^2\
    (72r^4-182r^3-13279r^2+98098r+20917512)^2";

pub const X_R: [&str; 6] = [
    "-53067(r-224)(r+154)(2r-7)(32r+77)(24r^2-1001r+14014)(26r^2+1001r+12936)\
     (72r^4-182r^3-13279r^2+98098r+20917512)^2",
    "-48(r-224)(r+154)(2r-7)(32r+77)(18r^2+14r+16709)(31r^2-14r+9702)\
     (2424r^4-12922r^3-3840473r^2+6964958r+704222904)^2",
    "144(16709+14r+18r^2)(14014-1001r+24r^2)(12936+1001r+26r^2)(9702-14r+31r^2)\
     (155719256-490490r+1032283r^2+910r^3+536r^4)^2",
    "576(16709+14r+18r^2)(14014-1001r+24r^2)(12936+1001r+26r^2)(9702-14r+31r^2)\
     (434619416+2648646r-841477r^2-4914r^3+1496r^4)^2",
    "(12936+1001r+26r^2)^2(20917512+98098r-13279r^2-182r^3+72r^4)^2\
     * 88510464(539+r^2)^2(-7007-28r+13r^2)^2(14014-1001r+24r^2)^2\
     / (285872664+2256254r-1029833r^2-4186r^3+984r^4)^2",
    "(9702-14r+31r^2)^2(20917512+98098r-13279r^2-182r^3+72r^4)^2\
     * 260112384(539+r^2)^2(-539+1001r+r^2)^2(16709+14r+18r^2)^2\
     / (676332888+2256254r+418999r^2-4186r^3+2328r^4)^2",
];
pub const X_R5: &str = "1344(72r^4-182r^3-13279r^2+98098r+20917512)(2r-7)^2(32r+77)^2\
    (18r^2+14r+16709)^2(11r^2+14r+12936)^2";
pub const X_R6: &str = "1344(18r^2+14r+16709)(26r^2+1001r+12936)(31r^2-14r+9702)\
    (24r^2-1001r+14014)(72r^4-182r^3-13279r^2+98098r+20917512)\
    * (r+154)^2(32r+77)^2(6r^2-91r+3332)^2/(30r^2-1001r+17248)^2";

// ---------------------------------------------------------------------------
// property checks shared by the proptest suite and the acceptance harness

/// Random nonsingular `y² = x³ + Ax² + Bx` over 𝔽_p with three random points.
pub fn random_triple(rng: &mut impl Rng, p: u64) -> (CurveAB<Fp>, [CurvePoint<Fp>; 3]) {
    loop {
        let (a, b) = (rng.gen_range(0..p), rng.gen_range(1..p));
        let Ok(c) = CurveAB::new(Fp::new(a, p), Fp::new(b, p)) else {
            continue;
        };
        let pts = all_points(&c);
        let pick = |rng: &mut dyn rand::RngCore| pts[rng.gen_range(0..pts.len())].clone();
        let t = [pick(rng), pick(rng), pick(rng)];
        return (c, t);
    }
}

/// Identity, inverse, commutativity and associativity for one triple.
pub fn group_axioms_hold(c: &CurveAB<Fp>, [p, q, r]: &[CurvePoint<Fp>; 3]) -> Result<(), String> {
    let o = CurvePoint::Infinity;
    if c.add(p, &o) != *p || c.add(&o, p) != *p {
        return Err(format!("identity fails for {p:?}"));
    }
    if !c.add(p, &p.neg()).is_infinity() {
        return Err(format!("inverse fails for {p:?}"));
    }
    if c.add(p, q) != c.add(q, p) {
        return Err(format!("commutativity fails for {p:?}, {q:?}"));
    }
    if c.add(&c.add(p, q), r) != c.add(p, &c.add(q, r)) {
        return Err(format!("associativity fails for {p:?}, {q:?}, {r:?}"));
    }
    for s in [p, q, r, &c.add(p, q)] {
        if !c.contains(s) {
            return Err(format!("{s:?} left the curve"));
        }
    }
    Ok(())
}

/// `(A, B)` over 𝔽_p covering every curve `y² = x³ + Ax² + Bx` up to the scaling
/// `(A, B) ↦ (u²A, u⁴B)`, which preserves halvability. Below `exhaustive_below` every
/// pair is listed.
pub fn curve_representatives(p: u64, exhaustive_below: u64) -> Vec<(u64, u64)> {
    let all = |a: u64| (1..p).map(move |b| (a, b));
    if p < exhaustive_below {
        return (0..p).flat_map(all).collect();
    }
    let nonresidue = (2..p).find(|&n| mwforge::finite_field::legendre(n, p) == -1).unwrap();
    let mut out: Vec<(u64, u64)> = [1, nonresidue].into_iter().flat_map(all).collect();
    // A = 0: B up to fourth powers.
    let mut seen = std::collections::BTreeSet::new();
    for b in 1..p {
        if seen.insert(b) {
            out.push((0, b));
            for u in 1..p {
                let u4 = mwforge::algebra::modp::pow_mod(u, 4, p);
                seen.insert(mwforge::algebra::modp::mul_mod(u4, b, p));
            }
        }
    }
    out
}

/// Compares `is_halvable` and `in_double_plus_torsion` with brute force on every point
/// of every listed curve. Returns the number of points checked.
pub fn halving_matches_brute_force(p: u64, exhaustive_below: u64) -> Result<usize, String> {
    let mut checked = 0;
    for (a, b) in curve_representatives(p, exhaustive_below) {
        // A² = 4B over ℤ stays singular mod p.
        let Ok(c) = CurveAB::new(q(a as i64), q(b as i64)) else {
            continue;
        };
        let Ok(rc) = reduce_curve(&c, p) else {
            continue;
        };
        let pts = all_points(&rc.curve);
        let doubles: Vec<CurvePoint<Fp>> = pts.iter().map(|x| rc.curve.double(x)).collect();
        let four = pts
            .iter()
            .find(|t| rc.curve.point_order_bounded(t, 4) == Some(4))
            .cloned();
        for pt in &pts {
            let brute = doubles.contains(pt);
            if is_halvable(&rc, pt) != brute {
                return Err(format!("p = {p}, (A, B) = ({a}, {b}), P = {pt:?}: brute force says {brute}"));
            }
            if let Some(t) = &four {
                let brute_t = (0..4).any(|k| doubles.contains(&rc.curve.sub(pt, &rc.curve.mul_scalar(k, t))));
                if in_double_plus_torsion(&rc, pt, t) != brute_t {
                    return Err(format!("p = {p}, (A, B) = ({a}, {b}), P = {pt:?}, T = {t:?}: coset test wrong"));
                }
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn random_poly(rng: &mut impl Rng, max_deg: usize, bound: i64) -> Poly {
    let d = rng.gen_range(0..=max_deg);
    let mut cs: Vec<i64> = (0..=d).map(|_| rng.gen_range(-bound..=bound)).collect();
    if cs[d] == 0 {
        cs[d] = 1;
    }
    Poly::from_i64s(&cs)
}

/// `c · ∏ fᵢ^eᵢ` from a few random factors with random multiplicities.
pub fn random_product(rng: &mut impl Rng) -> Poly {
    let mut f = Poly::constant(Rational::frac(rng.gen_range(1..20), rng.gen_range(1..6)));
    if rng.gen_bool(0.5) {
        f = f.neg();
    }
    for _ in 0..rng.gen_range(1..=4) {
        let g = random_poly(rng, 3, 9);
        if g.is_constant() {
            continue;
        }
        f = f.mul(&g.pow(rng.gen_range(1..=3)));
    }
    f
}

/// Yun output: pairwise coprime squarefree factors whose weighted product rebuilds `f`.
pub fn yun_reconstructs(f: &Poly) -> Result<(), String> {
    let parts = f.squarefree_decompose().map_err(|e| e.to_string())?;
    let mut prod = Poly::constant(f.lc());
    for (g, e) in &parts {
        if g.is_constant() {
            return Err("constant factor in decomposition".into());
        }
        if !g.gcd(&g.derivative()).is_constant() {
            return Err(format!("factor {g} is not squarefree"));
        }
        prod = prod.mul(&g.monic().pow(*e));
    }
    for (i, (g, _)) in parts.iter().enumerate() {
        for (h, _) in &parts[i + 1..] {
            if !g.gcd(h).is_constant() {
                return Err(format!("{g} and {h} share a factor"));
            }
        }
    }
    if prod != *f {
        return Err(format!("product {prod} differs from {f}"));
    }
    Ok(())
}

pub fn factorization_reconstructs(f: &Poly) -> Result<(), String> {
    let fact = factor_over_q(f).map_err(|e| e.to_string())?;
    if fact.expand() != *f {
        return Err(format!("expansion differs for {f}"));
    }
    if fact.certificates.len() != fact.factors.len() {
        return Err("one certificate per factor expected".into());
    }
    Ok(())
}
