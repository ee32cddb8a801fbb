//! Command-line front end. `run` returns the process exit code:
//! 0 when everything checked passes, 1 for a verified failure, 2 for inconclusive
//! results and malformed input.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::algebra::{parse_ratfunc, parse_rational, RatFunc, Rational};
use crate::certify::{
    certify_independence, gt_check, lattice_index, recheck_gt, recheck_independence, relation_matrix,
    verify_relation, CertifyError, GtHints, GtReport, IndependenceCertificate, DEFAULT_PRIME_BUDGET,
};
use crate::curve::{CurveAB, CurvePoint, TateZ4Curve};
use crate::pipeline::{
    recheck_bundle, recheck_report, run_manifest, Manifest, RecheckItem, RelationBundle, RelationSpec, StageRange,
    StageStatus, VerificationReport,
};
use crate::sections::{apply_substitution, impose_x};

pub const THREADS_ENV: &str = "MWFORGE_THREADS";

#[derive(Parser, Debug)]
#[command(name = "mwforge", version, about = "Exact verification of Mordell-Weil lattices of elliptic surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the verification stages of a manifest.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        /// Stage or inclusive range, e.g. `4` or `8..10`.
        #[arg(long)]
        stage: Option<StageRange>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Square condition for an x-coordinate on a family.
    Impose {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
    },
    /// Base change of a family along a rational function.
    Substitute {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        sub: String,
    },
    /// The curve over ℚ at a rational parameter value.
    Specialize {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Independence certificate for rational points.
    Independence {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PRIME_BUDGET)]
        prime_budget: u64,
    },
    /// Non-square test of every squarefree divisor of B and A²−4B at a parameter value.
    GtCheck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[arg(long)]
        hints: Option<PathBuf>,
    },
    /// Verify `Σ ±Pᵢ = 2R` relations and the resulting lattice index.
    Relations {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        relations: PathBuf,
    },
    /// Re-validate a report or certificate without searching.
    Recheck {
        #[arg(long)]
        certificate: PathBuf,
    },
}

/// Failure modes mapped onto exit codes.
#[derive(Debug)]
enum CliError {
    Input(String),
    Refuted(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Input(e.to_string())
    }
}

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Accepts `{"A", "B"}`, `{"tate": {"a", "b"}}`, or a manifest (its final family, else
/// the converted base family).
pub fn family_from_json(v: &Value) -> Result<CurveAB<RatFunc>, String> {
    let ratfunc = |v: &Value| serde_json::from_value::<RatFunc>(v.clone()).map_err(|e| e.to_string());
    let tate = |t: &Value| -> Result<CurveAB<RatFunc>, String> {
        let (Some(a), Some(b)) = (t.get("a"), t.get("b")) else {
            return Err("Tate parameters need \"a\" and \"b\"".into());
        };
        let c = TateZ4Curve::new(ratfunc(a)?, ratfunc(b)?).map_err(|e| e.to_string())?;
        Ok(c.to_ab().map_err(|e| e.to_string())?.0)
    };
    if let (Some(a), Some(b)) = (v.get("A"), v.get("B")) {
        return CurveAB::new(ratfunc(a)?, ratfunc(b)?).map_err(|e| e.to_string());
    }
    if let Some(t) = v.get("tate") {
        return tate(t);
    }
    if let Some(base) = v.get("base_family") {
        return match v.get("final_family") {
            Some(f) => family_from_json(f),
            None => tate(base),
        };
    }
    Err("expected {\"A\", \"B\"}, {\"tate\": {\"a\", \"b\"}} or a manifest".into())
}

fn load_family(path: &Path) -> Result<CurveAB<RatFunc>, CliError> {
    family_from_json(&read_json(path)?).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn parse_expr(src: &str) -> Result<RatFunc, CliError> {
    parse_ratfunc(src).map_err(|e| input(format!("{src:?}: {e}")))
}

fn parse_value(src: &str) -> Result<Rational, CliError> {
    parse_rational(src).map_err(|e| input(format!("{src:?}: {e}")))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointInput {
    X(Rational),
    Point(CurvePoint<Rational>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum PointsFile {
    List(Vec<PointInput>),
    WithTorsion {
        points: Vec<PointInput>,
        torsion: Option<CurvePoint<Rational>>,
    },
}

#[derive(Deserialize)]
struct RelationsFile {
    points: Vec<RatFunc>,
    relations: Vec<RelationSpec>,
}

fn emit(out: &mut dyn Write, v: &impl Serialize) -> Result<(), CliError> {
    let s = serde_json::to_string_pretty(v)?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn recheck_exit(out: &mut dyn Write, items: &[RecheckItem]) -> Result<i32, CliError> {
    let ok = items.iter().all(|i| i.ok);
    emit(out, &serde_json::json!({ "pass": ok, "items": items }))?;
    Ok(if ok { 0 } else { 1 })
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match cmd {
        Command::Verify {
            manifest,
            stage,
            format,
        } => {
            let loaded = Manifest::from_json(&read(&manifest)?).map_err(|e| input(format!("{}: {e}", manifest.display())))?;
            let report = run_manifest(&loaded, stage.unwrap_or(StageRange::ALL));
            match format {
                Format::Json => emit(out, &report)?,
                Format::Text => write!(out, "{}", report.to_text())?,
            }
            Ok(match report.overall {
                StageStatus::Pass => 0,
                StageStatus::Fail => 1,
                _ => 2,
            })
        }
        Command::Impose { family, x } => {
            let fam = load_family(&family)?;
            let cond = impose_x(&fam, &parse_expr(&x)?)?;
            emit(
                out,
                &serde_json::json!({ "s": cond.s, "trivial": cond.is_trivial(), "source_x": cond.source_x }),
            )?;
            Ok(0)
        }
        Command::Substitute { family, sub } => {
            let fam = load_family(&family)?;
            emit(out, &apply_substitution(&fam, &parse_expr(&sub)?)?)?;
            Ok(0)
        }
        Command::Specialize { family, at } => {
            let fam = load_family(&family)?;
            let t0 = parse_value(&at)?;
            match fam.specialize(&t0) {
                Some(Ok(c)) => {
                    emit(out, &c)?;
                    Ok(0)
                }
                _ => Err(input(format!("specialization at {t0} is singular or undefined"))),
            }
        }
        Command::Independence {
            curve,
            points,
            prime_budget,
        } => {
            let c: CurveAB<Rational> = serde_json::from_value(read_json(&curve)?)?;
            let (inputs, torsion) = match serde_json::from_value::<PointsFile>(read_json(&points)?)? {
                PointsFile::List(p) => (p, None),
                PointsFile::WithTorsion { points, torsion } => (points, torsion),
            };
            let pts = inputs
                .into_iter()
                .enumerate()
                .map(|(i, p)| match p {
                    PointInput::Point(p) => Ok(p),
                    PointInput::X(x) => c.lift_x(&x).ok_or_else(|| input(format!("point {i}: x = {x} does not lift"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let t = torsion
                .or_else(|| c.order_four_point())
                .ok_or_else(|| input("curve has no rational point of order 4"))?;
            match certify_independence(&c, &pts, &t, prime_budget) {
                Ok(cert) => {
                    emit(out, &cert)?;
                    Ok(0)
                }
                Err(e @ (CertifyError::Dependent(_) | CertifyError::TorsionPoint(_))) => Err(CliError::Refuted(e.to_string())),
                Err(e @ CertifyError::BudgetExhausted { .. }) => {
                    writeln!(out, "{{\"inconclusive\": {}}}", serde_json::to_string(&e.to_string())?)?;
                    Ok(2)
                }
                Err(e) => Err(input(e.to_string())),
            }
        }
        Command::GtCheck { family, at, hints } => {
            let fam = load_family(&family)?;
            let hints: Option<GtHints> = match hints {
                Some(p) => Some(serde_json::from_value(read_json(&p)?)?),
                None => None,
            };
            let report = gt_check(&fam, &parse_value(&at)?, hints.as_ref())?;
            emit(out, &report)?;
            Ok(if report.verdict { 0 } else { 1 })
        }
        Command::Relations { curve, relations } => {
            let fam = load_family(&curve)?;
            let spec: RelationsFile = serde_json::from_value(read_json(&relations)?)?;
            let n = spec.points.len();
            let mut certificates = Vec::new();
            for (j, rel) in spec.relations.iter().enumerate() {
                if rel.replaces >= n || rel.sum.iter().any(|&i| i >= n) {
                    return Err(input(format!("relation {j} indexes past the point list")));
                }
                let lhs: Vec<RatFunc> = rel.sum.iter().map(|&i| spec.points[i].clone()).collect();
                match verify_relation(&fam, &lhs, &rel.half_x) {
                    Ok(c) => certificates.push(c),
                    Err(CertifyError::RelationRefuted) => {
                        return Err(CliError::Refuted(format!("relation {j}: no sign choice holds")))
                    }
                    Err(e) => return Err(input(format!("relation {j}: {e}"))),
                }
            }
            let pairs: Vec<(Vec<usize>, usize)> = spec.relations.iter().map(|r| (r.sum.clone(), r.replaces)).collect();
            let lattice = lattice_index(&relation_matrix(n, &pairs)).ok();
            emit(
                out,
                &RelationBundle {
                    curve: fam,
                    certificates,
                    lattice,
                },
            )?;
            Ok(0)
        }
        Command::Recheck { certificate } => {
            let v = read_json(&certificate)?;
            if v.get("stages").is_some() {
                let report: VerificationReport = serde_json::from_value(v)?;
                recheck_exit(out, &recheck_report(&report))
            } else if v.get("entries").is_some() {
                let cert: IndependenceCertificate = serde_json::from_value(v)?;
                let r = recheck_independence(&cert);
                recheck_exit(out, &[item("independence", r)])
            } else if v.get("divisors").is_some() {
                let report: GtReport = serde_json::from_value(v)?;
                let r = recheck_gt(&report).and_then(|_| if report.verdict { Ok(()) } else { Err("verdict is false".into()) });
                recheck_exit(out, &[item("gt conditions", r)])
            } else if v.get("certificates").is_some() {
                let bundle: RelationBundle = serde_json::from_value(v)?;
                recheck_exit(out, &recheck_bundle(&bundle))
            } else {
                Err(input("unrecognized certificate"))
            }
        }
    }
}

fn item(what: &str, r: Result<(), String>) -> RecheckItem {
    RecheckItem {
        what: what.into(),
        ok: r.is_ok(),
        detail: r.err().unwrap_or_default(),
    }
}

/// Sizes the global rayon pool from `MWFORGE_THREADS`; 0 or unset leaves the default.
pub fn configure_threads() {
    let n = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    if n > 0 {
        // Fails only if a pool already exists, which keeps its size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 2;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    configure_threads();
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(CliError::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(CliError::Refuted(msg)) => {
            let _ = writeln!(err, "refuted: {msg}");
            1
        }
    }
}
