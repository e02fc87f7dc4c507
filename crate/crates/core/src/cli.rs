//! Batch command line. Each subcommand loads its inputs, runs one operation or
//! battery and emits a report:
//!
//! ```text
//! {"report_version":1,"command":..,"inputs":{..},"tolerances":{..},
//!  "results":{..},"residuals":{..},"verdict":{"passed":..,"failures":[..]}}
//! ```
//!
//! Exit status: 0 when every asserted check held, 1 when a check failed,
//! 2 for usage and input errors (message on stderr).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::battery::{run_battery, run_sweep, Battery, BatteryInputs};
use crate::corpus::format::matrix_value;
use crate::corpus::{generate, operator_from_spec, read_document, serialize, to_canonical_json, Document, InstanceSpec};
use crate::error::{Error, Result};
use crate::frames::{duality_defect, is_pseudo_dual, WeightedFamily};
use crate::gram::{
    cross_gram, cross_gram_by_blocks, dual_riesz_check, gram_inverse, gram_pinv_formula,
    oblique_projection_check, reconstruct_operator, schatten_norm, GramTriple, InverseMode, PinvVariant,
};
use crate::linalg::{self, CMatrix, TolerancePolicy};
use crate::stability::{check_stability, corollary_check, PerturbationInstance};

pub const REPORT_VERSION: u64 = 1;

/// Relative agreement required between the two Gram assembly paths.
const ASSEMBLY_REL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "fusion-gram", version, about = "Cross Gram matrices of operators on fusion frames")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    pub format: OutputFormat,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// JSON object overriding any of rank_rel, invert_rel, identity_abs.
    #[arg(long, global = true)]
    pub tol_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct Inputs {
    /// Inline instance spec, e.g. riesz:seed=3,n=6,dims=2,2,2. Pairs fill W and V.
    #[arg(long)]
    pub spec: Option<String>,
    /// Family (or pair) document for W.
    #[arg(long)]
    pub w: Option<PathBuf>,
    /// Family document for V.
    #[arg(long)]
    pub v: Option<PathBuf>,
    /// Operator: matrix document path or a name such as identity, random_invertible:seed=9.
    #[arg(long)]
    pub u: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Frame, Riesz, Parseval and orthonormal-basis flags with frame bounds.
    Classify(Inputs),
    /// Assemble G_{U,W,V} (V defaults to W).
    Gram(Inputs),
    /// Closed-form inverse of G_{U,W,V}.
    Invert {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Pseudo-inverse of G against its Gram-form candidate.
    Pinv {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum)]
        variant: Option<VariantArg>,
    },
    /// Recover U from G_{U,V,W} for V a dual of W (V defaults to the canonical dual).
    Reconstruct(Inputs),
    /// Duality defect of V against W and the projection properties of G_{V,W}.
    Duality(Inputs),
    /// Perturbation bound for G_{U2,W,Z}; Z is taken from --v or the spec's second family.
    Stability {
        #[command(flatten)]
        inputs: Inputs,
        /// Unperturbed operator (default identity).
        #[arg(long)]
        u1: Option<String>,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda2: f64,
        /// Defaults to the smallest admissible value for lambda1 = lambda2 = 0.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Use the Riesz-basis specialization with V = W and U1 = I.
        #[arg(long)]
        corollary: bool,
        /// Corollary only: bound on ||U - I|| (default: its value).
        #[arg(long)]
        mu: Option<f64>,
    },
    /// Run a named battery on given inputs, or over seeded instances with --sweep.
    Battery {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        theorem: Option<String>,
        /// List battery names and the statements they check.
        #[arg(long)]
        list: bool,
        /// Number of seeds per battery.
        #[arg(long)]
        sweep: Option<u64>,
    },
    /// Write the generated family or pair as a document.
    Generate {
        #[arg(long)]
        spec: String,
    },
    /// Schatten p-norms of the operator given by --u.
    Schatten {
        #[command(flatten)]
        inputs: Inputs,
        /// Exponents (>= 1, or inf); default 1, 2, inf.
        #[arg(long, value_delimiter = ',')]
        p: Vec<String>,
        /// Dimension for named operators when no family is given.
        #[arg(long)]
        n: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Ww,
    DualVw,
    Wv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    DualVw,
    Ww,
}

/// A finished command: its report value, or a raw document for `generate`.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Report { value: Value, passed: bool },
    Document(String),
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Report { passed: false, .. } => 1,
            _ => 0,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TolOverrides {
    rank_rel: Option<f64>,
    invert_rel: Option<f64>,
    identity_abs: Option<f64>,
}

pub fn load_tolerances(path: Option<&Path>) -> Result<TolerancePolicy> {
    let mut tol = TolerancePolicy::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        let o: TolOverrides =
            serde_json::from_str(&text).map_err(|e| Error::InvalidTolerance(format!("{}: {e}", p.display())))?;
        tol = TolerancePolicy::new(
            o.rank_rel.unwrap_or(tol.rank_rel),
            o.invert_rel.unwrap_or(tol.invert_rel),
            o.identity_abs.unwrap_or(tol.identity_abs),
        )?;
    }
    Ok(tol)
}

struct Loaded {
    w: Option<WeightedFamily>,
    v: Option<WeightedFamily>,
    echo: Map<String, Value>,
}

impl Loaded {
    fn w(&self) -> Result<&WeightedFamily> {
        self.w
            .as_ref()
            .ok_or_else(|| Error::InvalidSpec("a family is required: pass --spec or --w".into()))
    }

    fn v_or_w(&self) -> Result<&WeightedFamily> {
        match &self.v {
            Some(v) => Ok(v),
            None => self.w(),
        }
    }

    fn n(&self) -> Option<usize> {
        self.w.as_ref().map(WeightedFamily::ambient_dim)
    }
}

fn load_family_doc(path: &Path, tol: &TolerancePolicy) -> Result<(WeightedFamily, Option<WeightedFamily>)> {
    match read_document(path, tol)? {
        Document::Family(f) => Ok((f, None)),
        Document::Pair(a, b) => Ok((a, Some(b))),
        Document::Matrix(_) => Err(Error::InvalidDocument(format!("{} holds a matrix, not a family", path.display()))),
    }
}

fn load_inputs(inputs: &Inputs, tol: &TolerancePolicy) -> Result<Loaded> {
    let mut echo = Map::new();
    let (mut w, mut v) = (None, None);
    if let Some(s) = &inputs.spec {
        let spec: InstanceSpec = s.parse()?;
        echo.insert("spec".into(), json!(spec.to_string()));
        let g = generate(&spec)?;
        w = Some(g.first().clone());
        v = g.second().cloned();
    }
    if let Some(p) = &inputs.w {
        if w.is_some() {
            return Err(Error::InvalidSpec("--spec and --w are mutually exclusive".into()));
        }
        echo.insert("w".into(), json!(p.display().to_string()));
        let (a, b) = load_family_doc(p, tol)?;
        w = Some(a);
        v = b;
    }
    if let Some(p) = &inputs.v {
        echo.insert("v".into(), json!(p.display().to_string()));
        v = Some(load_family_doc(p, tol)?.0);
    }
    if let Some(u) = &inputs.u {
        echo.insert("u".into(), json!(u));
    }
    Ok(Loaded { w, v, echo })
}

fn load_operator(text: &str, n: Option<usize>, tol: &TolerancePolicy) -> Result<CMatrix> {
    let path = Path::new(text);
    if text.ends_with(".json") || path.is_file() {
        return match read_document(path, tol)? {
            Document::Matrix(m) => {
                if let Some(n) = n {
                    if m.shape() != (n, n) {
                        return Err(Error::dims(format!("{n}x{n} operator"), format!("{:?}", m.shape())));
                    }
                }
                Ok(m)
            }
            _ => Err(Error::InvalidDocument(format!("{text} does not hold a matrix"))),
        };
    }
    let n = n.ok_or_else(|| Error::InvalidSpec(format!("cannot size operator '{text}' without a family or --n")))?;
    operator_from_spec(text, n)
}

fn operator_or_identity(text: Option<&String>, n: usize, tol: &TolerancePolicy) -> Result<CMatrix> {
    match text {
        Some(t) => load_operator(t, Some(n), tol),
        None => Ok(linalg::identity(n)),
    }
}

struct ReportBuilder {
    command: &'static str,
    inputs: Map<String, Value>,
    results: Map<String, Value>,
    residuals: BTreeMap<String, f64>,
    failures: Vec<String>,
}

impl ReportBuilder {
    fn new(command: &'static str, inputs: Map<String, Value>) -> Self {
        Self {
            command,
            inputs,
            results: Map::new(),
            residuals: BTreeMap::new(),
            failures: Vec::new(),
        }
    }

    fn result(&mut self, key: &str, value: impl serde::Serialize) -> Result<()> {
        self.results.insert(key.into(), serde_json::to_value(value)?);
        Ok(())
    }

    fn residual(&mut self, key: &str, value: f64) {
        self.residuals.insert(key.into(), value);
    }

    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failures.push(name.into());
        }
    }

    fn finish(self, tol: &TolerancePolicy) -> Result<Outcome> {
        let passed = self.failures.is_empty();
        let value = json!({
            "report_version": REPORT_VERSION,
            "command": self.command,
            "inputs": Value::Object(self.inputs),
            "tolerances": serde_json::to_value(tol)?,
            "results": Value::Object(self.results),
            "residuals": serde_json::to_value(self.residuals)?,
            "verdict": {"passed": passed, "failures": self.failures},
        });
        Ok(Outcome::Report { value, passed })
    }
}

fn mode_key(mode: InverseMode) -> Result<String> {
    Ok(serde_json::to_value(mode)?.as_str().unwrap_or_default().to_string())
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let tol = load_tolerances(cli.tol_file.as_deref())?;
    match &cli.command {
        Command::Classify(inputs) => {
            let l = load_inputs(inputs, &tol)?;
            let w = l.w()?;
            let mut r = ReportBuilder::new("classify", l.echo.clone());
            let c = w.classify(&tol);
            let eq = w.riesz_equivalences(&tol);
            r.result("classification", c)?;
            r.result("frame_bounds", w.frame_bounds())?;
            r.result("riesz_verdicts", eq.verdicts().iter().map(|(k, v)| (*k, *v)).collect::<BTreeMap<_, _>>())?;
            r.result("ambient_dim", w.ambient_dim())?;
            r.result("total_dim", w.total_dim())?;
            r.check("hierarchy", c.hierarchy_consistent());
            for name in eq.disagreements() {
                r.check(name, false);
            }
            r.finish(&tol)
        }
        Command::Gram(inputs) => {
            let l = load_inputs(inputs, &tol)?;
            let (w, v) = (l.w()?, l.v_or_w()?);
            let u = operator_or_identity(inputs.u.as_ref(), w.ambient_dim(), &tol)?;
            let t = GramTriple::new(u, w.clone(), v.clone(), &tol)?;
            let g = cross_gram(&t, &tol)?.into_matrix();
            let by_blocks = cross_gram_by_blocks(&t, &tol)?;
            let gap = (&g - &by_blocks).norm() / g.norm().max(f64::MIN_POSITIVE);
            let mut r = ReportBuilder::new("gram", l.echo.clone());
            r.result("gram", matrix_value(&g))?;
            r.result("identity_defect_frobenius", (&g - linalg::identity(g.nrows())).norm())?;
            r.residual("assembly_paths", gap);
            r.check("assembly_paths", gap <= ASSEMBLY_REL);
            r.finish(&tol)
        }
        Command::Invert { inputs, mode } => {
            let l = load_inputs(inputs, &tol)?;
            let (w, v) = (l.w()?, l.v_or_w()?);
            let u = operator_or_identity(inputs.u.as_ref(), w.ambient_dim(), &tol)?;
            let t = GramTriple::new(u, w.clone(), v.clone(), &tol)?;
            let modes = match mode {
                Some(ModeArg::Ww) => vec![InverseMode::WW],
                Some(ModeArg::DualVw) => vec![InverseMode::DualVW],
                Some(ModeArg::Wv) => vec![InverseMode::WV],
                None => vec![InverseMode::WW, InverseMode::DualVW, InverseMode::WV],
            };
            let mut r = ReportBuilder::new("invert", l.echo.clone());
            for m in modes {
                let key = mode_key(m)?;
                match gram_inverse(&t, m, &tol) {
                    Ok(inv) => {
                        r.residual(&format!("{key}.residual"), inv.residual);
                        r.residual(&format!("{key}.direct_discrepancy"), inv.direct_discrepancy);
                        r.check(&key, inv.within_tolerance());
                        r.result(
                            &key,
                            json!({
                                "kappa": inv.kappa,
                                "inverse": matrix_value(inv.inverse.matrix()),
                                "operator": matrix_value(&inv.operator),
                            }),
                        )?;
                    }
                    Err(e @ (Error::HypothesisViolated(_) | Error::NotInvertible { .. })) if mode.is_none() => {
                        r.result(&key, json!({"skipped": e.to_string()}))?;
                    }
                    Err(e) => return Err(e),
                }
            }
            r.finish(&tol)
        }
        Command::Pinv { inputs, variant } => {
            let l = load_inputs(inputs, &tol)?;
            let (w, v) = (l.w()?, l.v_or_w()?);
            let u = operator_or_identity(inputs.u.as_ref(), w.ambient_dim(), &tol)?;
            let t = GramTriple::new(u, w.clone(), v.clone(), &tol)?;
            let variants = match variant {
                Some(VariantArg::DualVw) => vec![PinvVariant::DualVW],
                Some(VariantArg::Ww) => vec![PinvVariant::WW],
                None => vec![PinvVariant::DualVW, PinvVariant::WW],
            };
            let mut r = ReportBuilder::new("pinv", l.echo.clone());
            let mut ran = 0;
            for var in variants {
                let key = serde_json::to_value(var)?.as_str().unwrap_or_default().to_string();
                match gram_pinv_formula(&t, var, &tol) {
                    Ok(p) => {
                        ran += 1;
                        r.residual(&format!("{key}.condition"), p.condition_residual);
                        r.residual(&format!("{key}.discrepancy"), p.discrepancy);
                        r.check(&format!("{key}.equivalence"), p.consistent);
                        r.result(
                            &key,
                            json!({
                                "condition_holds": p.condition_holds,
                                "formula_matches": p.formula_matches,
                                "residuals": p.residuals,
                                "range_angles": p.range_angles,
                                "pinv": matrix_value(&p.pinv),
                                "formula": matrix_value(&p.formula),
                            }),
                        )?;
                    }
                    Err(e @ Error::HypothesisViolated(_)) if variant.is_none() => {
                        r.result(&key, json!({"skipped": e.to_string()}))?;
                    }
                    Err(e) => return Err(e),
                }
            }
            if ran == 0 {
                return Err(Error::HypothesisViolated("no pseudo-inverse variant applies".into()));
            }
            r.finish(&tol)
        }
        Command::Reconstruct(inputs) => {
            let l = load_inputs(inputs, &tol)?;
            let w = l.w()?;
            let v = match &l.v {
                Some(v) => v.clone(),
                None => w.canonical_dual(&tol)?,
            };
            let u = operator_or_identity(inputs.u.as_ref(), w.ambient_dim(), &tol)?;
            let g = cross_gram(&GramTriple::new(u.clone(), v.clone(), w.clone(), &tol)?, &tol)?;
            let back = reconstruct_operator(&g, &v, w, &tol)?;
            let err = linalg::operator_norm(&(&back - &u));
            let scale = linalg::operator_norm(&u);
            let mut r = ReportBuilder::new("reconstruct", l.echo.clone());
            r.result("reconstructed", matrix_value(&back))?;
            r.residual("round_trip", if scale > 0.0 { err / scale } else { err });
            r.check("round_trip", err <= 1e-8 * scale + 1e-12);
            r.finish(&tol)
        }
        Command::Duality(inputs) => {
            let l = load_inputs(inputs, &tol)?;
            let w = l.w()?;
            let v = match &l.v {
                Some(v) => v.clone(),
                None => w.canonical_dual(&tol)?,
            };
            let defect = duality_defect(&v, w, &tol)?;
            let dual = defect <= tol.identity_abs;
            let mut r = ReportBuilder::new("duality", l.echo.clone());
            r.residual("duality_defect", defect);
            r.result("is_dual", dual)?;
            r.result("is_pseudo_dual", is_pseudo_dual(&v, w, &tol)?)?;
            if dual {
                let o = oblique_projection_check(&v, w, &tol)?;
                r.residual("idempotent", o.idempotent_residual);
                r.residual("synthesis", o.synthesis_residual);
                r.residual("kernel_angle", o.kernel_angle);
                r.check("idempotent", o.idempotent_residual <= 1e-9);
                r.check("synthesis", o.synthesis_residual <= 1e-9);
                r.check("kernel", o.kernel_angle <= 1e-7);
                r.result("oblique", o)?;
                let d = dual_riesz_check(&v, w, &tol)?;
                r.check("dual_riesz", d.agree());
                r.result("dual_riesz", d)?;
            }
            r.finish(&tol)
        }
        Command::Stability {
            inputs,
            u1,
            lambda1,
            lambda2,
            epsilon,
            corollary,
            mu,
        } => {
            let l = load_inputs(inputs, &tol)?;
            let w = l.w()?;
            let z = l.v_or_w()?;
            let n = w.ambient_dim();
            let u2 = operator_or_identity(inputs.u.as_ref(), n, &tol)?;
            let report = if *corollary {
                corollary_check(w, z, &u2, *mu, *lambda1, *lambda2, *epsilon, &tol)?
            } else {
                let u1 = operator_or_identity(u1.as_ref(), n, &tol)?;
                let inst = PerturbationInstance::new(w.clone(), w.clone(), z.clone(), u1, u2, &tol)?;
                check_stability(&inst, *lambda1, *lambda2, *epsilon, &tol)?
            };
            let mut echo = l.echo.clone();
            echo.insert("corollary".into(), json!(corollary));
            let mut r = ReportBuilder::new("stability", echo);
            r.residual("margin", report.margin);
            r.residual("purb", report.purb_residual);
            r.check("bound_implies_invertible", !report.counterexample());
            r.result("report", report)?;
            r.finish(&tol)
        }
        Command::Battery {
            inputs,
            theorem,
            list,
            sweep,
        } => {
            let selected: Vec<Battery> = match theorem {
                Some(t) => vec![t.parse()?],
                None => Battery::ALL.to_vec(),
            };
            if *list {
                let mut r = ReportBuilder::new("battery", Map::new());
                let listing: BTreeMap<&str, &str> = selected.iter().map(|b| (b.name(), b.description())).collect();
                r.result("batteries", listing)?;
                return r.finish(&tol);
            }
            if let Some(count) = sweep {
                let mut echo = Map::new();
                echo.insert("sweep".into(), json!(count));
                echo.insert("batteries".into(), json!(selected.iter().map(|b| b.name()).collect::<Vec<_>>()));
                eprintln!("sweep: {} batteries x {count} seeds", selected.len());
                let entries = run_sweep(&selected, *count, &tol);
                let mut r = ReportBuilder::new("battery", echo);
                for e in &entries {
                    if !e.passed() {
                        r.check(&format!("{}@{}", e.battery, e.seed), false);
                    }
                }
                r.result("passed_count", entries.iter().filter(|e| e.passed()).count())?;
                r.result("entries", entries)?;
                return r.finish(&tol);
            }
            let [battery] = selected.as_slice() else {
                return Err(Error::InvalidSpec("battery needs --theorem, --sweep or --list".into()));
            };
            let l = load_inputs(inputs, &tol)?;
            let w = l.w()?;
            let u = match &inputs.u {
                Some(t) => Some(load_operator(t, Some(w.ambient_dim()), &tol)?),
                None => None,
            };
            let out = run_battery(
                *battery,
                BatteryInputs {
                    w,
                    v: l.v.as_ref(),
                    u: u.as_ref(),
                },
                &tol,
            )?;
            let mut echo = l.echo.clone();
            echo.insert("theorem".into(), json!(battery.name()));
            let mut r = ReportBuilder::new("battery", echo);
            for (k, v) in &out.residuals {
                r.residual(k, *v);
            }
            for f in &out.failures {
                r.check(f, false);
            }
            r.result("details", &out.details)?;
            r.finish(&tol)
        }
        Command::Generate { spec } => {
            let spec: InstanceSpec = spec.parse()?;
            let doc = match generate(&spec)? {
                crate::corpus::Generated::Family(f) => Document::Family(f),
                crate::corpus::Generated::Pair(a, b) => Document::Pair(a, b),
            };
            Ok(Outcome::Document(serialize(&doc)))
        }
        Command::Schatten { inputs, p, n } => {
            let l = load_inputs(inputs, &tol)?;
            let text = inputs
                .u
                .as_ref()
                .ok_or_else(|| Error::InvalidSpec("schatten needs --u".into()))?;
            let m = load_operator(text, l.n().or(*n), &tol)?;
            let exps: Vec<f64> = if p.is_empty() {
                vec![1.0, 2.0, f64::INFINITY]
            } else {
                p.iter()
                    .map(|s| match s.as_str() {
                        "inf" | "infinity" => Ok(f64::INFINITY),
                        other => other.parse().map_err(|_| Error::InvalidSpec(format!("bad exponent '{other}'"))),
                    })
                    .collect::<Result<_>>()?
            };
            let mut r = ReportBuilder::new("schatten", l.echo.clone());
            let mut norms = BTreeMap::new();
            for e in exps {
                let key = if e.is_infinite() { "inf".to_string() } else { format!("{e}") };
                let a = schatten_norm(&m, e)?.value;
                let b = schatten_norm(&m.adjoint(), e)?.value;
                let gap = (a - b).abs() / a.max(f64::MIN_POSITIVE);
                r.residual(&format!("adjoint_gap.p={key}"), gap);
                r.check(&format!("adjoint.p={key}"), gap <= 1e-12);
                norms.insert(key, a);
            }
            r.result("norms", norms)?;
            r.finish(&tol)
        }
    }
}

fn render_text(value: &Value) -> String {
    let mut out = String::new();
    let field = |k: &str| value.get(k).cloned().unwrap_or(Value::Null);
    out.push_str(&format!("command: {}\n", field("command").as_str().unwrap_or_default()));
    let verdict = field("verdict");
    let passed = verdict.get("passed").and_then(Value::as_bool).unwrap_or(false);
    out.push_str(&format!("verdict: {}\n", if passed { "pass" } else { "FAIL" }));
    if let Some(f) = verdict.get("failures").and_then(Value::as_array) {
        for name in f {
            out.push_str(&format!("  failed: {}\n", name.as_str().unwrap_or_default()));
        }
    }
    for section in ["inputs", "results", "residuals"] {
        if let Some(map) = field(section).as_object().filter(|m| !m.is_empty()) {
            out.push_str(&format!("{section}:\n"));
            for (k, v) in map {
                render_entry(&mut out, k, v, 1);
            }
        }
    }
    out
}

fn render_entry(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    let shown = match v {
        Value::Object(o) if o.contains_key("data") => format!("<{}x{} matrix>", o["rows"], o["cols"]),
        Value::Object(o) if depth < 4 => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, inner) in o {
                render_entry(out, k, inner, depth + 1);
            }
            return;
        }
        Value::Array(a) if a.len() > 8 => format!("<{} entries>", a.len()),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    out.push_str(&format!("{pad}{key}: {shown}\n"));
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let text = match outcome {
        Outcome::Document(doc) => doc.clone(),
        Outcome::Report { value, .. } => match cli.format {
            OutputFormat::Json => to_canonical_json(value)?,
            OutputFormat::Text => render_text(value),
        },
    };
    match &cli.output {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli).and_then(|o| emit(&cli, &o).map(|_| o.exit_code())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
