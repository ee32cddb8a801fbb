//! Manifest-driven verification: thirteen stages over a JSON description of a family,
//! its sections and the resulting points, producing a deterministic report.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{Poly, RatFunc, Rational};
use crate::certify::{
    certify_independence, classify_torsion, gt_check, lattice_index, recheck_gt, recheck_independence,
    recheck_relation, relation_matrix, verify_relation, GtHints, GtReport, IndependenceCertificate, LatticeIndex,
    RelationCertificate, DEFAULT_PRIME_BUDGET, TORSION_ORDER_BOUND,
};
use crate::curve::{specialize_point, CurveAB, CurvePoint, TateZ4Curve};
use crate::sections::{
    apply_substitution, condition_after_substitution, impose_x, is_square_scaling_equivalent,
    normalize_to_polynomial_model, parametrize_conic, same_square_class, SectionCondition,
};

pub const TOOL_NAME: &str = "mwforge";
pub const STAGE_COUNT: u8 = 13;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Json(#[from] serde_json::Error),
    #[error("field {0} is not in canonical form")]
    NotCanonical(String),
    #[error("{0}")]
    Invalid(String),
}

// ---------------------------------------------------------------------------
// manifest

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TateParams {
    pub a: Poly,
    pub b: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbCoefficients {
    #[serde(rename = "A")]
    pub a: Poly,
    #[serde(rename = "B")]
    pub b: Poly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatedPoint {
    pub x: RatFunc,
    pub y: RatFunc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionSpec {
    pub candidate_x: RatFunc,
    pub expected_condition: Poly,
    pub substitution: RatFunc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinedSpec {
    pub expected_condition: Poly,
    /// A rational point `(u₀, z₀)` on `z² = expected_condition(u)`.
    pub conic_point: (Rational, Rational),
    pub parametrization: RatFunc,
}

/// `Σ_{i ∈ sum} Pᵢ = 2R` up to signs, with `R` taking the place of `P_replaces`.
/// Indices are 0-based into `final_points`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub sum: Vec<usize>,
    pub half_x: RatFunc,
    pub replaces: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Specializations {
    pub independence_at: Rational,
    pub gt_at: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub base_family: TateParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surface: Option<AbCoefficients>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_point: Option<StatedPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub torsion_checks_at: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claimed_points: Vec<RatFunc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sections: Vec<SectionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_substitution: Option<RatFunc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_family: Option<AbCoefficients>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub final_points: Vec<RatFunc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_regulator_ratio: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specializations: Option<Specializations>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prime_budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub torsion_sample_primes: Option<usize>,
}

/// A parsed manifest together with the SHA-256 of its source bytes.
#[derive(Clone, Debug)]
pub struct LoadedManifest {
    pub manifest: Manifest,
    pub sha256: String,
}

impl Manifest {
    /// Parses and insists that re-serialization reproduces the input value, so every
    /// polynomial and rational function is already in canonical form.
    pub fn from_json(text: &str) -> Result<LoadedManifest, ManifestError> {
        let raw: Value = serde_json::from_str(text)?;
        let manifest: Manifest = serde_json::from_value(raw.clone())?;
        let back = serde_json::to_value(&manifest)?;
        if let Some(path) = first_difference(&raw, &back, String::new()) {
            return Err(ManifestError::NotCanonical(path));
        }
        manifest.validate()?;
        Ok(LoadedManifest {
            manifest,
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }

    fn validate(&self) -> Result<(), ManifestError> {
        let n = self.final_points.len();
        for (j, rel) in self.relations.iter().enumerate() {
            if rel.replaces >= n || rel.sum.iter().any(|&i| i >= n) {
                return Err(ManifestError::Invalid(format!("relation {j} indexes past final_points")));
            }
            if !rel.sum.contains(&rel.replaces) {
                return Err(ManifestError::Invalid(format!("relation {j} replaces a point outside its sum")));
            }
        }
        Ok(())
    }

    pub fn prime_budget(&self) -> u64 {
        self.prime_budget.unwrap_or(DEFAULT_PRIME_BUDGET)
    }
}

fn first_difference(a: &Value, b: &Value, path: String) -> Option<String> {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) => {
            for (k, v) in x {
                let p = format!("{path}.{k}");
                match y.get(k) {
                    Some(w) => {
                        if let Some(d) = first_difference(v, w, p) {
                            return Some(d);
                        }
                    }
                    None => return Some(p),
                }
            }
            y.keys().find(|k| !x.contains_key(*k)).map(|k| format!("{path}.{k}"))
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Some(path);
            }
            x.iter()
                .zip(y)
                .enumerate()
                .find_map(|(i, (v, w))| first_difference(v, w, format!("{path}[{i}]")))
        }
        _ if a == b => None,
        _ => Some(if path.is_empty() { "<root>".into() } else { path }),
    }
}

// ---------------------------------------------------------------------------
// report

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
    NotApplicable,
}

impl StageStatus {
    /// Passing or not applicable to this manifest.
    pub fn is_ok(self) -> bool {
        matches!(self, StageStatus::Pass | StageStatus::NotApplicable)
    }
}

impl fmt::Display for StageStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StageStatus::Pass => "pass",
            StageStatus::Fail => "fail",
            StageStatus::Inconclusive => "inconclusive",
            StageStatus::Skipped => "skipped",
            StageStatus::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub id: u8,
    pub name: String,
    pub depends_on: Vec<u8>,
    pub status: StageStatus,
    pub summary: String,
    #[serde(default)]
    pub artifacts: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub manifest: String,
    pub manifest_sha256: String,
    pub stages: Vec<StageReport>,
    pub overall: StageStatus,
    /// SHA-256 of the report serialized with this field empty and no timings.
    pub digest: String,
    #[serde(default)]
    pub timings_ms: BTreeMap<String, u64>,
}

impl VerificationReport {
    pub fn compute_digest(&self) -> String {
        let mut bare = self.clone();
        bare.digest.clear();
        bare.timings_ms.clear();
        let bytes = serde_json::to_vec(&bare).expect("report serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn stage(&self, id: u8) -> Option<&StageReport> {
        self.stages.iter().find(|s| s.id == id)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {}  manifest {} (sha256 {})\n",
            self.tool,
            self.version,
            self.manifest,
            &self.manifest_sha256[..16.min(self.manifest_sha256.len())]
        );
        for s in &self.stages {
            let ms = self.timings_ms.get(&s.id.to_string()).copied().unwrap_or(0);
            out.push_str(&format!(
                "stage {:>2} {:<24} {:<14} {:>8} ms  {}\n",
                s.id,
                s.name,
                s.status.to_string(),
                ms,
                s.summary
            ));
        }
        out.push_str(&format!("overall: {}\n", self.overall));
        out
    }
}

pub fn overall_status(stages: &[StageReport]) -> StageStatus {
    if stages.iter().any(|s| s.status == StageStatus::Fail) {
        StageStatus::Fail
    } else if stages.iter().all(|s| s.status.is_ok()) {
        StageStatus::Pass
    } else {
        StageStatus::Inconclusive
    }
}

/// Stage names and the stages whose outputs they consume.
pub const STAGES: [(u8, &str, &[u8]); 13] = [
    (1, "surface", &[]),
    (2, "torsion_point", &[1]),
    (3, "claimed_points", &[1]),
    (4, "section_conditions", &[1]),
    (5, "section_substitutions", &[1]),
    (6, "combined_condition", &[1]),
    (7, "composition", &[]),
    (8, "final_family", &[1]),
    (9, "final_points", &[]),
    (10, "relations", &[]),
    (11, "independence", &[]),
    (12, "gt_conditions", &[]),
    (13, "torsion_classification", &[]),
];

/// Inclusive range of stage ids, parsed from `N` or `N..M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageRange {
    pub first: u8,
    pub last: u8,
}

impl StageRange {
    pub const ALL: StageRange = StageRange { first: 1, last: STAGE_COUNT };

    pub fn contains(&self, id: u8) -> bool {
        (self.first..=self.last).contains(&id)
    }
}

impl std::str::FromStr for StageRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| -> Result<u8, String> {
            let v: u8 = t.trim().parse().map_err(|_| format!("bad stage number {t:?}"))?;
            if v == 0 || v > STAGE_COUNT {
                return Err(format!("stage {v} out of range 1..{STAGE_COUNT}"));
            }
            Ok(v)
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if first > last {
            return Err(format!("empty stage range {s}"));
        }
        Ok(StageRange { first, last })
    }
}

// ---------------------------------------------------------------------------
// artifacts shared with the CLI and recheck

/// Relation certificates with the curve they live on, plus the lattice index if the
/// relations determine a change of basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationBundle {
    pub curve: CurveAB<RatFunc>,
    pub certificates: Vec<RelationCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeIndex>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct IndependenceArtifacts {
    at: Rational,
    basis: Vec<String>,
    certificate: IndependenceCertificate,
}

fn outcome(status: StageStatus, summary: impl Into<String>, artifacts: impl Serialize) -> Outcome {
    Outcome {
        status,
        summary: summary.into(),
        artifacts: serde_json::to_value(artifacts).unwrap_or(Value::Null),
    }
}

fn fail(summary: impl Into<String>) -> Outcome {
    outcome(StageStatus::Fail, summary, Value::Null)
}

fn not_applicable(what: &str) -> Outcome {
    outcome(StageStatus::NotApplicable, format!("manifest has no {what}"), Value::Null)
}

fn pass_if(ok: bool) -> StageStatus {
    if ok {
        StageStatus::Pass
    } else {
        StageStatus::Fail
    }
}

struct Outcome {
    status: StageStatus,
    summary: String,
    artifacts: Value,
}

// ---------------------------------------------------------------------------
// stages

fn poly_rf(p: &Poly) -> RatFunc {
    RatFunc::from_poly(p.clone())
}

/// Memoized intermediate data; each piece is derived from the manifest alone.
struct Context<'a> {
    m: &'a Manifest,
    surface: Option<Result<(CurveAB<RatFunc>, CurvePoint<RatFunc>), String>>,
    conditions: Option<Result<Vec<SectionCondition>, String>>,
    final_curve: Option<Result<CurveAB<RatFunc>, String>>,
}

impl<'a> Context<'a> {
    fn new(m: &'a Manifest) -> Self {
        Context {
            m,
            surface: None,
            conditions: None,
            final_curve: None,
        }
    }

    fn surface(&mut self) -> Result<(CurveAB<RatFunc>, CurvePoint<RatFunc>), String> {
        if self.surface.is_none() {
            let f = &self.m.base_family;
            let r = TateZ4Curve::new(poly_rf(&f.a), poly_rf(&f.b))
                .and_then(|c| c.to_ab())
                .map_err(|e| e.to_string());
            self.surface = Some(r);
        }
        self.surface.clone().expect("set")
    }

    fn conditions(&mut self) -> Result<Vec<SectionCondition>, String> {
        if self.conditions.is_none() {
            let r = self.surface().and_then(|(e, _)| {
                self.m
                    .sections
                    .iter()
                    .map(|s| impose_x(&e, &s.candidate_x).map_err(|e| e.to_string()))
                    .collect()
            });
            self.conditions = Some(r);
        }
        self.conditions.clone().expect("set")
    }

    fn final_curve(&mut self) -> Option<Result<CurveAB<RatFunc>, String>> {
        let fam = self.m.final_family.as_ref()?;
        if self.final_curve.is_none() {
            self.final_curve = Some(CurveAB::new(poly_rf(&fam.a), poly_rf(&fam.b)).map_err(|e| e.to_string()));
        }
        self.final_curve.clone()
    }
}

fn stage_surface(cx: &mut Context) -> Outcome {
    let (e, _) = match cx.surface() {
        Ok(v) => v,
        Err(e) => return fail(format!("conversion failed: {e}")),
    };
    let f = &cx.m.base_family;
    let (a, b) = (poly_rf(&f.a), poly_rf(&f.b));
    let identity = e.a2_minus_4b() == a.square().mul(&a.square().sub(&b.scale(&Rational::from_i64(16))));
    let stated = cx
        .m
        .surface
        .as_ref()
        .map(|s| (*e.a() == poly_rf(&s.a), *e.b() == poly_rf(&s.b)));
    let ok = identity && stated.is_none_or(|(x, y)| x && y);
    let summary = match stated {
        Some((true, true)) => "A and B match the stated coefficients".to_string(),
        Some((x, y)) => format!("mismatch against stated coefficients (A: {x}, B: {y})"),
        None => "converted; no stated coefficients to compare".to_string(),
    };
    #[derive(Serialize)]
    struct Art<'a> {
        curve: &'a CurveAB<RatFunc>,
        discriminant_identity: bool,
        matches_stated: Option<bool>,
    }
    outcome(
        pass_if(ok),
        summary,
        Art {
            curve: &e,
            discriminant_identity: identity,
            matches_stated: stated.map(|(x, y)| x && y),
        },
    )
}

fn stage_torsion_point(cx: &mut Context) -> Outcome {
    let (e, t) = match cx.surface() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let stated = cx
        .m
        .torsion_point
        .as_ref()
        .map(|p| CurvePoint::affine(p.x.clone(), p.y.clone()) == t);
    let order = e.point_order_bounded(&t, TORSION_ORDER_BOUND);
    #[derive(Serialize)]
    struct Check {
        at: Rational,
        order: Option<u32>,
    }
    let checks: Vec<Check> = cx
        .m
        .torsion_checks_at
        .iter()
        .map(|t0| {
            let order = match (e.specialize(t0), specialize_point(&t, t0)) {
                (Some(Ok(c)), Some(p)) => c.point_order_bounded(&p, TORSION_ORDER_BOUND),
                _ => None,
            };
            Check { at: t0.clone(), order }
        })
        .collect();
    let ok = stated != Some(false) && order == Some(4) && checks.iter().all(|c| c.order == Some(4));
    let summary = format!(
        "order {} over the function field; specializations {}; stated point {}",
        order.map_or("?".into(), |o| o.to_string()),
        checks
            .iter()
            .map(|c| format!("{}→{}", c.at, c.order.map_or("?".into(), |o| o.to_string())))
            .collect::<Vec<_>>()
            .join(", "),
        match stated {
            Some(true) => "matches",
            Some(false) => "differs",
            None => "absent",
        }
    );
    #[derive(Serialize)]
    struct Art<'a> {
        point: &'a CurvePoint<RatFunc>,
        order: Option<u32>,
        matches_stated: Option<bool>,
        specializations: Vec<Check>,
    }
    outcome(
        pass_if(ok),
        summary,
        Art {
            point: &t,
            order,
            matches_stated: stated,
            specializations: checks,
        },
    )
}

fn stage_claimed_points(cx: &mut Context) -> Outcome {
    if cx.m.claimed_points.is_empty() {
        return not_applicable("claimed points");
    }
    let (e, _) = match cx.surface() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let lifts: Vec<Option<CurvePoint<RatFunc>>> = cx.m.claimed_points.iter().map(|x| e.lift_x(x)).collect();
    let failed: Vec<usize> = (0..lifts.len()).filter(|&i| lifts[i].is_none()).collect();
    let summary = if failed.is_empty() {
        format!("all {} x-coordinates lift", lifts.len())
    } else {
        format!("x-coordinates {failed:?} do not lift")
    };
    outcome(pass_if(failed.is_empty()), summary, lifts)
}

fn stage_section_conditions(cx: &mut Context) -> Outcome {
    if cx.m.sections.is_empty() {
        return not_applicable("sections");
    }
    let conds = match cx.conditions() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    #[derive(Serialize)]
    struct Row<'a> {
        derived: &'a Poly,
        expected: &'a Poly,
        same_square_class: bool,
    }
    let rows: Vec<Row> = conds
        .iter()
        .zip(&cx.m.sections)
        .map(|(c, s)| Row {
            derived: &c.s,
            expected: &s.expected_condition,
            same_square_class: same_square_class(&poly_rf(&c.s), &poly_rf(&s.expected_condition)),
        })
        .collect();
    let ok = rows.iter().all(|r| r.same_square_class);
    let summary = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            format!(
                "section {}: {} {}",
                i + 1,
                r.derived.to_string_in("t"),
                if r.same_square_class { "≐ expected" } else { "≠ expected" }
            )
        })
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass_if(ok), summary, rows)
}

fn stage_section_substitutions(cx: &mut Context) -> Outcome {
    if cx.m.sections.is_empty() {
        return not_applicable("sections");
    }
    let (e, _) = match cx.surface() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let conds = match cx.conditions() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    #[derive(Serialize)]
    struct Row {
        condition_after: Option<Poly>,
        lifts_after: bool,
    }
    let mut rows = Vec::new();
    for (c, s) in conds.iter().zip(&cx.m.sections) {
        let condition_after = condition_after_substitution(&c.s, &s.substitution).ok();
        let lifts_after = apply_substitution(&e, &s.substitution)
            .ok()
            .and_then(|fam| {
                let x = s.candidate_x.compose(&s.substitution).ok()?;
                impose_x(&fam, &x).ok()
            })
            .is_some_and(|c| c.is_trivial());
        rows.push(Row {
            condition_after,
            lifts_after,
        });
    }
    let squared = |r: &Row| r.condition_after.as_ref().is_some_and(|p| p.is_constant() && p.coeff(0).sqrt().is_some());
    let ok = rows.iter().all(|r| squared(r) && r.lifts_after);
    let summary = format!(
        "{} of {} substitutions make their condition a square",
        rows.iter().filter(|r| squared(r) && r.lifts_after).count(),
        rows.len()
    );
    outcome(pass_if(ok), summary, rows)
}

fn stage_combined(cx: &mut Context) -> Outcome {
    let Some(comb) = cx.m.combined.as_ref() else {
        return not_applicable("combined condition");
    };
    if cx.m.sections.len() < 2 {
        return not_applicable("second section");
    }
    let conds = match cx.conditions() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let first_sub = &cx.m.sections[0].substitution;
    let derived = match condition_after_substitution(&conds[1].s, first_sub) {
        Ok(p) => p,
        Err(e) => return fail(format!("substitution failed: {e}")),
    };
    let expected = &comb.expected_condition;
    let matches = same_square_class(&poly_rf(&derived), &poly_rf(expected));
    let (u0, z0) = &comb.conic_point;
    let ours = parametrize_conic(expected, u0, z0);
    let stated_solves = condition_after_substitution(expected, &comb.parametrization)
        .is_ok_and(|p| p.is_constant() && p.coeff(0).sqrt().is_some());
    let agrees_with_ours = ours.as_ref().ok().and_then(|c| {
        let neg = RatFunc::x().neg();
        let flipped = c.t_of_m.compose(&neg).ok()?;
        Some(c.t_of_m == comb.parametrization || flipped == comb.parametrization)
    });
    let ok = matches && ours.is_ok() && stated_solves;
    let summary = format!(
        "combined condition {} {}; stated parametrization {}",
        derived.to_string_in("u"),
        if matches { "≐ expected" } else { "≠ expected" },
        if stated_solves { "solves it" } else { "does not solve it" }
    );
    #[derive(Serialize)]
    struct Art {
        derived: Poly,
        same_square_class: bool,
        parametrization: Option<RatFunc>,
        stated_solves_conic: bool,
        stated_equals_ours_up_to_sign: Option<bool>,
    }
    outcome(
        pass_if(ok),
        summary,
        Art {
            derived,
            same_square_class: matches,
            parametrization: ours.ok().map(|c| c.t_of_m),
            stated_solves_conic: stated_solves,
            stated_equals_ours_up_to_sign: agrees_with_ours,
        },
    )
}

fn stage_composition(cx: &mut Context) -> Outcome {
    let (Some(comb), Some(target), Some(first)) =
        (cx.m.combined.as_ref(), cx.m.combined_substitution.as_ref(), cx.m.sections.first())
    else {
        return not_applicable("combined substitution");
    };
    let composed = match first.substitution.compose(&comb.parametrization) {
        Ok(c) => c,
        Err(e) => return fail(format!("composition failed: {e}")),
    };
    let ok = composed == *target;
    let at_zero = composed.eval(&Rational::zero());
    #[derive(Serialize)]
    struct Art {
        composed: RatFunc,
        at_zero: Option<Rational>,
    }
    let summary = format!(
        "t(u(r)) {} the stated t(r); t(0) = {}",
        if ok { "equals" } else { "differs from" },
        at_zero.as_ref().map_or("undefined".into(), |v| v.to_string())
    );
    outcome(pass_if(ok), summary, Art { composed, at_zero })
}

fn stage_final_family(cx: &mut Context) -> Outcome {
    let Some(sub) = cx.m.combined_substitution.clone() else {
        return not_applicable("combined substitution");
    };
    let Some(target) = cx.final_curve() else {
        return not_applicable("final family");
    };
    let target = match target {
        Ok(c) => c,
        Err(e) => return fail(format!("final family is singular: {e}")),
    };
    let (e, _) = match cx.surface() {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let composed = match apply_substitution(&e, &sub) {
        Ok(c) => c,
        Err(e) => return fail(format!("substitution failed: {e}")),
    };
    let (normalized, lambda) = match normalize_to_polynomial_model(&composed) {
        Ok(v) => v,
        Err(e) => return fail(format!("normalization failed: {e}")),
    };
    let mu = is_square_scaling_equivalent(&composed, &target);
    #[derive(Serialize)]
    struct Art {
        mu: Option<RatFunc>,
        normalizing_lambda: RatFunc,
        normalized_equals_final: bool,
    }
    let summary = match &mu {
        Some(m) => format!("composed family ≅ final family with μ = {}", m.to_string_in("r")),
        None => "composed family is not a square rescaling of the final family".to_string(),
    };
    outcome(
        pass_if(mu.is_some()),
        summary,
        Art {
            normalized_equals_final: normalized == target,
            mu,
            normalizing_lambda: lambda,
        },
    )
}

fn stage_final_points(cx: &mut Context) -> Outcome {
    if cx.m.final_points.is_empty() {
        return not_applicable("final points");
    }
    let curve = match cx.final_curve() {
        None => return not_applicable("final family"),
        Some(Err(e)) => return fail(e),
        Some(Ok(c)) => c,
    };
    let xs: Vec<&RatFunc> = cx
        .m
        .final_points
        .iter()
        .chain(cx.m.relations.iter().map(|r| &r.half_x))
        .collect();
    let lifted: Vec<bool> = xs.iter().map(|x| curve.lift_x(x).is_some()).collect();
    let failed: Vec<usize> = (0..lifted.len()).filter(|&i| !lifted[i]).collect();
    let summary = if failed.is_empty() {
        format!(
            "{} points and {} halves lift",
            cx.m.final_points.len(),
            cx.m.relations.len()
        )
    } else {
        format!("x-coordinates {failed:?} do not lift")
    };
    outcome(pass_if(failed.is_empty()), summary, serde_json::json!({ "lifted": lifted }))
}

fn stage_relations(cx: &mut Context) -> Outcome {
    if cx.m.relations.is_empty() {
        return not_applicable("relations");
    }
    let curve = match cx.final_curve() {
        None => return not_applicable("final family"),
        Some(Err(e)) => return fail(e),
        Some(Ok(c)) => c,
    };
    let mut certificates = Vec::new();
    for (j, rel) in cx.m.relations.iter().enumerate() {
        let lhs: Vec<RatFunc> = rel.sum.iter().map(|&i| cx.m.final_points[i].clone()).collect();
        match verify_relation(&curve, &lhs, &rel.half_x) {
            Ok(c) => certificates.push(c),
            Err(e) => return fail(format!("relation {}: {e}", j + 1)),
        }
    }
    let spec: Vec<(Vec<usize>, usize)> = cx.m.relations.iter().map(|r| (r.sum.clone(), r.replaces)).collect();
    let lattice = match lattice_index(&relation_matrix(cx.m.final_points.len(), &spec)) {
        Ok(l) => l,
        Err(e) => return fail(format!("lattice index: {e}")),
    };
    let index_ok = cx.m.expected_index.is_none_or(|v| lattice.index == v.into());
    let ratio_ok = cx
        .m
        .expected_regulator_ratio
        .is_none_or(|v| lattice.regulator_ratio == v.into());
    let summary = format!(
        "{} relations hold; index {}, regulator ratio {}",
        certificates.len(),
        lattice.index,
        lattice.regulator_ratio
    );
    outcome(
        pass_if(index_ok && ratio_ok),
        summary,
        RelationBundle {
            curve,
            certificates,
            lattice: Some(lattice),
        },
    )
}

/// Points used for the independence certificate: the final points with each replaced
/// `Pᵢ` exchanged for its half `R`. A relation `ΣPᵢ = 2R` puts that subset sum in `2E`,
/// so only the exchanged basis can be 𝔽₂-independent modulo `2E + tors`.
fn independence_basis(m: &Manifest) -> (Vec<String>, Vec<RatFunc>) {
    let mut labels: Vec<String> = (1..=m.final_points.len()).map(|i| format!("P{i}")).collect();
    let mut xs = m.final_points.clone();
    for r in &m.relations {
        labels[r.replaces] = format!("R{}", r.replaces + 1);
        xs[r.replaces] = r.half_x.clone();
    }
    (labels, xs)
}

fn stage_independence(cx: &mut Context) -> Outcome {
    let Some(spec) = cx.m.specializations.as_ref() else {
        return not_applicable("specializations");
    };
    if cx.m.final_points.is_empty() {
        return not_applicable("final points");
    }
    let curve = match cx.final_curve() {
        None => return not_applicable("final family"),
        Some(Err(e)) => return fail(e),
        Some(Ok(c)) => c,
    };
    let r0 = &spec.independence_at;
    let Some(Ok(c0)) = curve.specialize(r0) else {
        return fail(format!("specialization at {r0} is singular"));
    };
    let (basis, xs) = independence_basis(cx.m);
    let mut points = Vec::new();
    for (label, x) in basis.iter().zip(&xs) {
        let Some(p) = curve.lift_x(x).and_then(|p| specialize_point(&p, r0)) else {
            return fail(format!("{label} does not specialize at {r0}"));
        };
        points.push(p);
    }
    let Some(t) = c0.order_four_point() else {
        return fail(format!("no rational 4-torsion point at {r0}"));
    };
    match certify_independence(&c0, &points, &t, cx.m.prime_budget()) {
        Ok(certificate) => {
            let summary = format!(
                "rank ≥ {} at r = {r0}: {} subsets of {} have witness primes (max {})",
                certificate.rank_lower_bound,
                certificate.entries.len(),
                basis.join(","),
                certificate.entries.iter().map(|w| w.prime).max().unwrap_or(0)
            );
            outcome(
                StageStatus::Pass,
                summary,
                IndependenceArtifacts {
                    at: r0.clone(),
                    basis,
                    certificate,
                },
            )
        }
        Err(e @ crate::certify::CertifyError::BudgetExhausted { .. }) => {
            outcome(StageStatus::Inconclusive, e.to_string(), Value::Null)
        }
        Err(e) => fail(e.to_string()),
    }
}

/// Factors the composed base coefficients contribute; they split `B(r)` and
/// `A(r)² − 4B(r)` of the final family into manageable pieces.
fn structural_hints(m: &Manifest) -> Option<GtHints> {
    let sub = m.combined_substitution.as_ref()?;
    let (a, b) = (poly_rf(&m.base_family.a), poly_rf(&m.base_family.b));
    let disc = a.square().sub(&b.scale(&Rational::from_i64(16)));
    let mut polys = Vec::new();
    for f in [&a, &b, &disc] {
        let g = f.compose(sub).ok()?;
        polys.push(Poly::from_zpoly(g.num().primitive().clone()));
        polys.push(Poly::from_zpoly(g.den().primitive().clone()));
    }
    polys.push(Poly::from_zpoly(sub.num().primitive().clone()));
    polys.push(Poly::from_zpoly(sub.den().primitive().clone()));
    polys.retain(|p| !p.is_constant());
    Some(GtHints {
        b: polys.clone(),
        disc: polys,
    })
}

fn stage_gt(cx: &mut Context) -> Outcome {
    let Some(spec) = cx.m.specializations.as_ref() else {
        return not_applicable("specializations");
    };
    let curve = match cx.final_curve() {
        None => return not_applicable("final family"),
        Some(Err(e)) => return fail(e),
        Some(Ok(c)) => c,
    };
    let hints = structural_hints(cx.m);
    match gt_check(&curve, &spec.gt_at, hints.as_ref()) {
        Ok(report) => {
            let squares = report.divisors.iter().filter(|d| d.square).count();
            let summary = format!(
                "{} divisors of B and A²−4B at r = {}: {} squares; unique 2-torsion {}",
                report.divisors.len(),
                report.r0,
                squares,
                report.unique_two_torsion
            );
            outcome(pass_if(report.verdict), summary, report)
        }
        Err(e) => fail(e.to_string()),
    }
}

fn stage_torsion_classification(cx: &mut Context) -> Outcome {
    let Some(spec) = cx.m.specializations.as_ref() else {
        return not_applicable("specializations");
    };
    let curve = match cx.final_curve() {
        None => return not_applicable("final family"),
        Some(Err(e)) => return fail(e),
        Some(Ok(c)) => c,
    };
    let Some(Ok(c0)) = curve.specialize(&spec.independence_at) else {
        return fail("specialization is singular");
    };
    let claim = classify_torsion(&c0, None, cx.m.torsion_sample_primes.unwrap_or(12));
    let status = if claim.exactly_z4 {
        StageStatus::Pass
    } else {
        StageStatus::Inconclusive
    };
    outcome(status, claim.summary.clone(), claim)
}

fn run_stage(id: u8, cx: &mut Context) -> Outcome {
    match id {
        1 => stage_surface(cx),
        2 => stage_torsion_point(cx),
        3 => stage_claimed_points(cx),
        4 => stage_section_conditions(cx),
        5 => stage_section_substitutions(cx),
        6 => stage_combined(cx),
        7 => stage_composition(cx),
        8 => stage_final_family(cx),
        9 => stage_final_points(cx),
        10 => stage_relations(cx),
        11 => stage_independence(cx),
        12 => stage_gt(cx),
        13 => stage_torsion_classification(cx),
        _ => unreachable!("stage ids are 1..=13"),
    }
}

/// Runs the selected stages in order. A stage whose dependency failed or was skipped
/// is skipped; unselected dependencies are recomputed on demand.
pub fn run_manifest(loaded: &LoadedManifest, range: StageRange) -> VerificationReport {
    let m = &loaded.manifest;
    let mut cx = Context::new(m);
    let mut stages: Vec<StageReport> = Vec::new();
    let mut timings = BTreeMap::new();
    for (id, name, deps) in STAGES {
        if !range.contains(id) {
            continue;
        }
        let blocked = deps.iter().find(|d| {
            stages
                .iter()
                .any(|s| s.id == **d && matches!(s.status, StageStatus::Fail | StageStatus::Skipped))
        });
        let start = Instant::now();
        let out = match blocked {
            Some(d) => outcome(StageStatus::Skipped, format!("stage {d} did not pass"), Value::Null),
            None => run_stage(id, &mut cx),
        };
        timings.insert(id.to_string(), start.elapsed().as_millis() as u64);
        stages.push(StageReport {
            id,
            name: name.to_string(),
            depends_on: deps.to_vec(),
            status: out.status,
            summary: out.summary,
            artifacts: out.artifacts,
        });
    }
    let mut report = VerificationReport {
        tool: TOOL_NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        manifest: m.name.clone(),
        manifest_sha256: loaded.sha256.clone(),
        overall: overall_status(&stages),
        stages,
        digest: String::new(),
        timings_ms: BTreeMap::new(),
    };
    report.digest = report.compute_digest();
    report.timings_ms = timings;
    report
}

// ---------------------------------------------------------------------------
// recheck

/// Outcome of re-validating one embedded certificate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RecheckItem {
    pub what: String,
    pub ok: bool,
    pub detail: String,
}

fn item(what: impl Into<String>, r: Result<(), String>) -> RecheckItem {
    let ok = r.is_ok();
    RecheckItem {
        what: what.into(),
        ok,
        detail: r.err().unwrap_or_default(),
    }
}

pub fn recheck_bundle(b: &RelationBundle) -> Vec<RecheckItem> {
    let mut out: Vec<RecheckItem> = b
        .certificates
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let ok = recheck_relation(&b.curve, c);
            item(
                format!("relation {}", i + 1),
                if ok { Ok(()) } else { Err("relation does not hold with recorded signs".into()) },
            )
        })
        .collect();
    if let Some(l) = &b.lattice {
        let r = lattice_index(&l.matrix)
            .map_err(|e| e.to_string())
            .and_then(|fresh| if fresh == *l { Ok(()) } else { Err("recorded index differs".into()) });
        out.push(item("lattice index", r));
    }
    out
}

/// Re-validates the digest and every certificate embedded in a report. Witness primes,
/// sign choices and factor lists are taken from the report; nothing is searched.
pub fn recheck_report(report: &VerificationReport) -> Vec<RecheckItem> {
    let mut out = vec![item(
        "digest",
        if report.compute_digest() == report.digest {
            Ok(())
        } else {
            Err("digest does not match report contents".into())
        },
    )];
    out.push(item(
        "overall",
        if overall_status(&report.stages) == report.overall {
            Ok(())
        } else {
            Err("overall status inconsistent with stages".into())
        },
    ));
    for s in &report.stages {
        if s.status != StageStatus::Pass {
            continue;
        }
        match s.id {
            10 => match serde_json::from_value::<RelationBundle>(s.artifacts.clone()) {
                Ok(b) => out.extend(recheck_bundle(&b)),
                Err(e) => out.push(item("relations", Err(e.to_string()))),
            },
            11 => {
                let r = serde_json::from_value::<IndependenceArtifacts>(s.artifacts.clone())
                    .map_err(|e| e.to_string())
                    .and_then(|a| recheck_independence(&a.certificate));
                out.push(item("independence", r));
            }
            12 => {
                let r = serde_json::from_value::<GtReport>(s.artifacts.clone())
                    .map_err(|e| e.to_string())
                    .and_then(|g| {
                        recheck_gt(&g)?;
                        if g.verdict {
                            Ok(())
                        } else {
                            Err("verdict is false".into())
                        }
                    });
                out.push(item("gt conditions", r));
            }
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SHIPPED: &str = include_str!("../manifests/elkies_rank6.json");
    const ALT: &str = include_str!("../manifests/elkl_alt.json");

    #[test]
    fn shipped_manifests_parse_canonically() {
        let m = Manifest::from_json(SHIPPED).unwrap();
        assert_eq!(m.manifest.final_points.len(), 6);
        assert_eq!(m.sha256.len(), 64);
        Manifest::from_json(ALT).unwrap();
    }

    #[test]
    fn non_canonical_input_is_rejected() {
        let text = ALT.replace("\"36\", \"320\"", "\"72/2\", \"320\"");
        assert!(matches!(Manifest::from_json(&text), Err(ManifestError::NotCanonical(_))));
        let text = ALT.replace("\"name\"", "\"nmae\"");
        assert!(Manifest::from_json(&text).is_err());
    }

    #[test]
    fn stage_range_parsing() {
        assert_eq!("3..5".parse::<StageRange>().unwrap(), StageRange { first: 3, last: 5 });
        assert_eq!("7".parse::<StageRange>().unwrap(), StageRange { first: 7, last: 7 });
        assert!("0..3".parse::<StageRange>().is_err());
        assert!("5..2".parse::<StageRange>().is_err());
        assert!("1..14".parse::<StageRange>().is_err());
    }

    #[test]
    fn alternative_parameters_stop_after_torsion() {
        let m = Manifest::from_json(ALT).unwrap();
        let r = run_manifest(&m, StageRange::ALL);
        for id in [1, 2] {
            let s = r.stage(id).unwrap();
            assert_eq!(s.status, StageStatus::Pass, "stage {id}: {}", s.summary);
        }
        for id in 3..=13 {
            assert_eq!(r.stage(id).unwrap().status, StageStatus::NotApplicable, "stage {id}");
        }
        assert_eq!(r.overall, StageStatus::Pass);
        assert!(recheck_report(&r).iter().all(|i| i.ok));
    }

    #[test]
    fn early_stages_of_shipped_manifest() {
        let m = Manifest::from_json(SHIPPED).unwrap();
        let r = run_manifest(&m, "1..7".parse().unwrap());
        assert_eq!(r.stages.len(), 7);
        for s in &r.stages {
            assert_eq!(s.status, StageStatus::Pass, "stage {} {}", s.id, s.summary);
        }
        let at_zero = &r.stage(7).unwrap().artifacts["at_zero"];
        assert_eq!(at_zero, "5/21");
    }

    #[test]
    fn digest_ignores_timings() {
        let m = Manifest::from_json(ALT).unwrap();
        let mut a = run_manifest(&m, StageRange::ALL);
        let b = run_manifest(&m, StageRange::ALL);
        a.timings_ms.insert("1".into(), 123_456);
        assert_eq!(a.digest, b.digest);
        assert_eq!(a.compute_digest(), a.digest);
    }

    #[test]
    fn independence_basis_swaps_replaced_points() {
        let m = Manifest::from_json(SHIPPED).unwrap().manifest;
        let (labels, xs) = independence_basis(&m);
        assert_eq!(labels, ["P1", "P2", "P3", "P4", "R5", "R6"]);
        assert_eq!(xs[4], m.relations[0].half_x);
        assert_eq!(xs[0], m.final_points[0]);
    }
}
