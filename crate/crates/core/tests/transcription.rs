//! The shipped manifests against the displayed factored formulas, parsed independently.

mod common;

use common::*;

#[test]
fn base_family_and_surface() {
    let m = load("elkies_rank6.json").manifest;
    assert_eq!(m.base_family.a, poly(A_T));
    assert_eq!(m.base_family.b, poly(B_T));
    let s = m.surface.as_ref().unwrap();
    assert_eq!(s.a, poly(E_A));
    assert_eq!(s.b, poly(E_B));
    let t = m.torsion_point.as_ref().unwrap();
    assert_eq!(t.x, rf(TORSION_X));
    assert_eq!(t.y, rf(TORSION_Y));
    for (x, stated) in m.claimed_points.iter().zip(X_T) {
        assert_eq!(*x, rf(stated), "{stated}");
    }
}

#[test]
fn sections_and_substitutions() {
    let m = load("elkies_rank6.json").manifest;
    assert_eq!(m.sections[0].candidate_x, rf(CAND_1));
    assert_eq!(m.sections[1].candidate_x, rf(CAND_2));
    assert_eq!(m.sections[0].expected_condition, poly(COND_1));
    assert_eq!(m.sections[1].expected_condition, poly(COND_2));
    assert_eq!(m.sections[0].substitution, rf(SUB_1));
    assert_eq!(m.sections[1].substitution, rf(SUB_2));
    let c = m.combined.as_ref().unwrap();
    assert_eq!(c.expected_condition, poly(COMBINED));
    assert_eq!(c.parametrization, rf(U_OF_R));
    assert_eq!((c.conic_point.0.to_string(), c.conic_point.1.to_string()), ("13/7".into(), "2".into()));
    assert_eq!(m.combined_substitution.as_ref().unwrap(), &rf(T_OF_R));
}

#[test]
fn rank_six_family_and_points() {
    let m = load("elkies_rank6.json").manifest;
    let f = m.final_family.as_ref().unwrap();
    assert_eq!(f.a, poly(A6));
    assert_eq!(f.b, poly(B6));
    assert_eq!(m.final_points.len(), 6);
    for (x, stated) in m.final_points.iter().zip(X_R) {
        assert_eq!(*x, rf(stated));
    }
    assert_eq!(m.relations[0].half_x, rf(X_R5));
    assert_eq!(m.relations[1].half_x, rf(X_R6));
    assert_eq!(m.relations[0].sum, [2, 3, 4]);
    assert_eq!(m.relations[1].sum, [2, 3, 5]);
    let s = m.specializations.as_ref().unwrap();
    assert_eq!((s.independence_at.to_string(), s.gt_at.to_string()), ("1".into(), "13".into()));
}

#[test]
fn alternative_parameters() {
    let m = load("elkl_alt.json").manifest;
    assert_eq!(m.base_family.a, poly(ALT_A));
    assert_eq!(m.base_family.b, poly(ALT_B));
    assert!(m.final_family.is_none() && m.sections.is_empty());
}

#[test]
fn manifest_round_trips() {
    for name in ["elkies_rank6.json", "elkl_alt.json"] {
        let loaded = load(name);
        let text = serde_json::to_string(&loaded.manifest).unwrap();
        let again = mwforge::pipeline::Manifest::from_json(&text).unwrap();
        assert_eq!(again.manifest, loaded.manifest);
    }
}
