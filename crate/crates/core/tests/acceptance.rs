//! Acceptance criteria 1–11, one line per criterion. Runs without the libtest harness so
//! the lines are always stated; exits nonzero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use mwforge::algebra::{Poly, RatFunc, Rational};
use mwforge::certify::{
    certify_independence, gt_check, lattice_index, recheck_gt, recheck_independence, recheck_relation,
    relation_matrix, verify_relation, CertifyError, GtHints,
};
use mwforge::curve::{specialize_point, CurveAB, CurvePoint, TateZ4Curve};
use mwforge::pipeline::{run_manifest, Manifest, StageRange, StageStatus, STAGES};
use mwforge::sections::{
    apply_substitution, condition_after_substitution, impose_x, is_square_scaling_equivalent, same_square_class,
};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

type Check = fn() -> Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn surface() -> (CurveAB<RatFunc>, CurvePoint<RatFunc>) {
    TateZ4Curve::new(rf(A_T), rf(B_T)).unwrap().to_ab().unwrap()
}

fn rank6() -> CurveAB<RatFunc> {
    CurveAB::new(rf(A6), rf(B6)).unwrap()
}

fn c1_surface() -> Result<String, String> {
    let (e, _) = surface();
    let (a, b) = (poly(E_A), poly(E_B));
    ensure(e.a().is_polynomial() && e.b().is_polynomial(), "coefficients not polynomial")?;
    ensure(e.a().num().coeffs() == a.coeffs(), format!("A differs: {}", e.a().to_string_in("t")))?;
    ensure(e.b().num().coeffs() == b.coeffs(), format!("B differs: {}", e.b().to_string_in("t")))?;
    Ok(format!(
        "A has {} and B has {} coefficients, all equal; A(0) = {}",
        a.coeffs().len(),
        b.coeffs().len(),
        a.coeff(0)
    ))
}

fn c2_torsion() -> Result<String, String> {
    let (e, t) = surface();
    ensure(t == CurvePoint::affine(rf(TORSION_X), rf(TORSION_Y)), "torsion point differs from the stated one")?;
    ensure(e.point_order_bounded(&t, 12) == Some(4), "order over Q(t) is not 4")?;
    for t0 in [0, 1] {
        let c = e.specialize(&q(t0)).unwrap().map_err(|e| e.to_string())?;
        let p = specialize_point(&t, &q(t0)).ok_or("torsion point does not specialize")?;
        ensure(c.point_order_bounded(&p, 12) == Some(4), format!("order at t = {t0} is not 4"))?;
    }
    Ok("order 4 over Q(t), at t = 0 and at t = 1".into())
}

fn c3_points() -> Result<String, String> {
    let (e, _) = surface();
    for (i, x) in X_T.iter().enumerate() {
        let p = e.lift_x(&rf(x)).ok_or(format!("X{} does not lift", i + 1))?;
        ensure(e.contains(&p), "lift not on curve")?;
    }
    Ok("X1..X4 lift over Q(t)".into())
}

fn c4_conditions() -> Result<String, String> {
    let (e, _) = surface();
    let s1 = impose_x(&e, &rf(CAND_1)).map_err(|e| e.to_string())?.s;
    let s2 = impose_x(&e, &rf(CAND_2)).map_err(|e| e.to_string())?.s;
    let as_rf = |p: &Poly| RatFunc::from_poly(p.clone());
    ensure(same_square_class(&as_rf(&s1), &rf(COND_1)), format!("first condition {s1}"))?;
    ensure(same_square_class(&as_rf(&s2), &rf(COND_2)), format!("second condition {s2}"))?;
    for (s, sub) in [(&s1, SUB_1), (&s2, SUB_2)] {
        let after = condition_after_substitution(s, &rf(sub)).map_err(|e| e.to_string())?;
        ensure(after.is_constant() && after.coeff(0).sqrt().is_some(), format!("{sub} leaves {after}"))?;
    }
    let combined = condition_after_substitution(&s2, &rf(SUB_1)).map_err(|e| e.to_string())?;
    ensure(same_square_class(&as_rf(&combined), &rf(COMBINED)), format!("combined {combined}"))?;
    Ok(format!(
        "conditions {} and {}; combined {}",
        s1.to_string_in("t"),
        s2.to_string_in("t"),
        combined.to_string_in("u")
    ))
}

fn c5_composition() -> Result<String, String> {
    let composed = rf(SUB_1).compose(&rf(U_OF_R)).map_err(|e| e.to_string())?;
    ensure(composed == rf(T_OF_R), "t(u(r)) differs from t(r)")?;
    // Direct evaluation of the stated factored t(r) at r = 0.
    let direct = Rational::from_i64(4 * -5390 * -1617) / Rational::from_i64(7 * 20917512);
    let at0 = composed.eval(&Rational::zero()).ok_or("t(r) has a pole at 0")?;
    ensure(at0 == direct && at0 == Rational::frac(5, 21), format!("t(0) = {at0}"))?;
    Ok(format!("canonical forms equal; t(0) = {at0}"))
}

fn c6_rank6_family() -> Result<String, String> {
    let (e, _) = surface();
    let composed = apply_substitution(&e, &rf(T_OF_R)).map_err(|e| e.to_string())?;
    let f = rank6();
    let mu = is_square_scaling_equivalent(&composed, &f).ok_or("not a square rescaling")?;
    // Independent confirmation of the twist: A6 = μ²A and B6 = μ⁴B.
    ensure(composed.a().mul(&mu.square()) == *f.a(), "A6 ≠ μ²A")?;
    ensure(composed.b().mul(&mu.square().square()) == *f.b(), "B6 ≠ μ⁴B")?;
    for (i, x) in X_R.iter().chain([&X_R5, &X_R6]).enumerate() {
        ensure(f.lift_x(&rf(x)).is_some(), format!("x number {} does not lift", i + 1))?;
    }
    let deg = mu.num().degree().map_or("-".to_string(), |d| d.to_string());
    Ok(format!("μ of degree {deg}; x1..x6, x(R5), x(R6) lift"))
}

fn c7_relations() -> Result<String, String> {
    let f = rank6();
    let xs: Vec<RatFunc> = X_R.iter().map(|s| rf(s)).collect();
    let mut signs = Vec::new();
    for (sum, half) in [([2, 3, 4], X_R5), ([2, 3, 5], X_R6)] {
        let lhs: Vec<RatFunc> = sum.iter().map(|&i| xs[i].clone()).collect();
        let cert = verify_relation(&f, &lhs, &rf(half)).map_err(|e| e.to_string())?;
        ensure(recheck_relation(&f, &cert), "recheck failed")?;
        signs.push(cert.sign_choices);
    }
    let li = lattice_index(&relation_matrix(6, &[(vec![2, 3, 4], 4), (vec![2, 3, 5], 5)])).map_err(|e| e.to_string())?;
    ensure(li.index == 4.into(), format!("index {}", li.index))?;
    ensure(li.regulator_ratio == 16.into(), format!("ratio {}", li.regulator_ratio))?;
    Ok(format!("both relations hold with signs {signs:?}; index 4, regulator ratio 16"))
}

fn c8_independence() -> Result<String, String> {
    let f = rank6();
    let r0 = q(1);
    let c = f.specialize(&r0).unwrap().map_err(|e| e.to_string())?;
    let basis: Vec<&str> = vec![X_R[0], X_R[1], X_R[2], X_R[3], X_R5, X_R6];
    let pts: Vec<CurvePoint<Rational>> = basis
        .iter()
        .map(|x| f.lift_x(&rf(x)).and_then(|p| specialize_point(&p, &r0)))
        .collect::<Option<_>>()
        .ok_or("a point does not specialize")?;
    let t = c.order_four_point().ok_or("no 4-torsion at r = 1")?;
    let cert = certify_independence(&c, &pts, &t, 10_000).map_err(|e| e.to_string())?;
    ensure(cert.entries.len() == 63, "not every subset covered")?;
    let mut masks: Vec<u64> = cert.entries.iter().map(|w| w.mask).collect();
    masks.sort();
    ensure(masks == (1..64).collect::<Vec<_>>(), "mask list incomplete")?;
    recheck_independence(&cert)?;
    Ok(format!(
        "63 subsets of P1,P2,P3,P4,R5,R6 at r = 1 have witnesses, largest prime {}; recheck ok",
        cert.entries.iter().map(|w| w.prime).max().unwrap()
    ))
}

fn c9_gt() -> Result<String, String> {
    let f = rank6();
    let r0 = q(13);
    // Structural hints: the factors stated in B6.
    let stated = [
        "r-224", "r+154", "2r-7", "32r+77", "18r^2+14r+16709", "24r^2-1001r+14014",
        "26r^2+1001r+12936", "31r^2-14r+9702", "72r^4-182r^3-13279r^2+98098r+20917512",
    ];
    let hints = GtHints {
        b: stated.iter().map(|s| poly(s)).collect(),
        disc: Vec::new(),
    };
    let start = Instant::now();
    let hinted = gt_check(&f, &r0, Some(&hints)).map_err(|e| e.to_string())?;
    let hinted_time = start.elapsed();
    let start = Instant::now();
    let free = gt_check(&f, &r0, None).map_err(|e| e.to_string())?;
    let free_time = start.elapsed();
    ensure(hinted == free, "hinted and hint-free reports differ")?;
    ensure(hinted_time < Duration::from_secs(600), "hinted run over 10 min")?;
    ensure(free_time < Duration::from_secs(3600), "hint-free run over 60 min")?;
    ensure(free.verdict, "a divisor evaluates to a square")?;
    recheck_gt(&free)?;
    // The distinct factors of B match the stated factorization.
    let mut ours: Vec<Poly> = free.b_factors.iter().map(|(g, _)| g.clone()).collect();
    let mut theirs: Vec<Poly> = stated.iter().map(|s| Poly::from_zpoly(poly(s).primitive().clone())).collect();
    ours.sort_by_key(|p| p.to_string());
    theirs.sort_by_key(|p| p.to_string());
    ensure(ours == theirs, "factors of B differ from the stated ones")?;
    let (kb, kd) = (free.b_factors.len() as u32, free.disc_factors.len() as u32);
    ensure(
        free.divisors.len() as u64 == (1u64 << kb) + (1u64 << kd) - 2,
        format!("{} divisors for {kb} and {kd} factors", free.divisors.len()),
    )?;
    Ok(format!(
        "{} divisors, none square; hinted {:?}, hint-free {:?}",
        free.divisors.len(),
        hinted_time,
        free_time
    ))
}

fn c10_properties() -> Result<String, String> {
    let mut rng = ChaCha20Rng::seed_from_u64(0x6d77);
    let primes: Vec<u64> = mwforge::algebra::modp::primes_from(5).take_while(|&p| p < 400).collect();
    for i in 0..120 {
        let p = primes[i % primes.len()];
        let (c, pts) = random_triple(&mut rng, p);
        group_axioms_hold(&c, &pts)?;
    }
    let mut halving = 0;
    for p in mwforge::algebra::modp::primes_from(3).take_while(|&p| p <= 101) {
        halving += halving_matches_brute_force(p, 30)?;
    }
    for _ in 0..1000 {
        yun_reconstructs(&random_product(&mut rng))?;
    }
    for _ in 0..200 {
        factorization_reconstructs(&random_product(&mut rng))?;
    }
    Ok(format!("120 group triples, {halving} halving checks, 1000 Yun, 200 factorizations"))
}

fn depends_on(id: u8, on: u8) -> bool {
    let deps = STAGES.iter().find(|s| s.0 == id).map(|s| s.2).unwrap_or(&[]);
    deps.iter().any(|&d| d == on || depends_on(d, on))
}

fn perturbed(edit: impl Fn(&mut Value)) -> mwforge::pipeline::VerificationReport {
    let text = std::fs::read_to_string(manifest_path("elkies_rank6.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    edit(&mut v);
    let loaded = Manifest::from_json(&v.to_string()).expect("perturbed manifest still parses");
    run_manifest(&loaded, StageRange::ALL)
}

fn c11_negative_controls() -> Result<String, String> {
    type Edit = fn(&mut Value);
    let single: [(&str, u8, Edit); 7] = [
        ("surface A", 1, |v| v["surface"]["A"][0] = "-3536".into()),
        ("torsion point", 2, |v| v["torsion_point"]["y"][0] = "-12545".into()),
        ("X2", 3, |v| v["claimed_points"][1][0] = "1569".into()),
        ("second condition", 4, |v| v["sections"][1]["expected_condition"][0] = "5297".into()),
        ("combined condition", 6, |v| v["combined"]["expected_condition"][0] = "1864".into()),
        ("expected index", 10, |v| v["expected_index"] = 8.into()),
        ("GT parameter", 12, |v| v["specializations"]["gt_at"] = "225".into()),
    ];
    for (what, stage, edit) in single {
        let r = perturbed(edit);
        for s in &r.stages {
            let ok = match s.status {
                StageStatus::Fail => s.id == stage,
                StageStatus::Pass => s.id != stage,
                // Halted only when it consumes the failed stage's output.
                StageStatus::Skipped => depends_on(s.id, stage),
                _ => false,
            };
            ensure(ok, format!("{what}: stage {} is {} ({})", s.id, s.status, s.summary))?;
        }
        ensure(r.overall == StageStatus::Fail, format!("{what}: overall {}", r.overall))?;
    }
    let r = perturbed(|v| v["final_family"]["B"][3] = "1".into());
    ensure(r.stage(8).unwrap().status == StageStatus::Fail, "perturbed B6 not caught at stage 8")?;
    for id in 9..=13 {
        ensure(r.stage(id).unwrap().status != StageStatus::Skipped, format!("stage {id} not evaluated"))?;
    }

    // Dependent inputs are never certified.
    let c = CurveAB::new(q(-3535), q(3211264)).unwrap();
    let t = CurvePoint::affine(q(1792), q(-12544));
    let p = c.lift_x(&q(1568)).unwrap();
    for (name, pts) in [
        ("{P, 2P}", vec![p.clone(), c.double(&p)]),
        ("{P, P+T}", vec![p.clone(), c.add(&p, &t)]),
        ("{P, -P}", vec![p.clone(), p.neg()]),
        ("{P, T}", vec![p.clone(), t.clone()]),
    ] {
        ensure(certify_independence(&c, &pts, &t, 2000).is_err(), format!("{name} certified"))?;
    }
    // The six points before exchanging P5, P6 for R5, R6: the relation subsets lie in 2E.
    let f = rank6();
    let c1 = f.specialize(&q(1)).unwrap().unwrap();
    let pts: Vec<CurvePoint<Rational>> = X_R
        .iter()
        .map(|x| specialize_point(&f.lift_x(&rf(x)).unwrap(), &q(1)).unwrap())
        .collect();
    match certify_independence(&c1, &pts, &c1.order_four_point().unwrap(), 2000) {
        Err(CertifyError::BudgetExhausted { masks, .. }) => {
            ensure(masks.contains(&0b011100) && masks.contains(&0b101100), format!("missing masks {masks:?}"))?;
        }
        other => return Err(format!("P1..P6 not refused: {other:?}")),
    }
    Ok("7 single-field perturbations fail only their stage (dependents halted); B6 perturbation caught at stage 8; 5 dependent inputs refused".into())
}

const CRITERIA: [(u32, &str, u64, Check); 11] = [
    (1, "surface reconstruction", 1, c1_surface),
    (2, "torsion point of order 4", 1, c2_torsion),
    (3, "four sections lift", 10, c3_points),
    (4, "section conditions", 30, c4_conditions),
    (5, "composition t(u(r))", 5, c5_composition),
    (6, "rank-6 family and points", 300, c6_rank6_family),
    (7, "relations and regulator ratio", 600, c7_relations),
    (8, "independence at r = 1", 900, c8_independence),
    (9, "GT conditions at r = 13", 3600, c9_gt),
    (10, "property suites", 300, c10_properties),
    (11, "negative controls", 600, c11_negative_controls),
];

fn main() -> ExitCode {
    // Under `cargo test -- --list` or filters, behave like an empty harness.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for (id, title, budget, check) in CRITERIA {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > Duration::from_secs(budget) => Err(format!("took {elapsed:?}, budget {budget} s")),
            r => r,
        };
        match result {
            Ok(detail) => println!("criterion {id:>2} PASS  {title} [{elapsed:.2?}]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {title} [{elapsed:.2?}]: {detail}");
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
