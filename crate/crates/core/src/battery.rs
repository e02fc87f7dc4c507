//! Named theorem batteries: each runs the relevant checks on one instance and
//! reports pass/fail with residuals. Sweeps regenerate instances from seeds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::corpus::{generate, operator_from_spec, CorpusRng, InstanceSpec};
use crate::error::{Error, Result};
use crate::frames::{duality_defect, WeightedFamily};
use crate::gram::{
    adjoint_relation_residual, composition_check, cross_gram, dual_riesz_check, gram_inverse, gram_matrix,
    gram_pinv_formula, inv_equivalence_battery, lw_lower_bound_check, norm_bound_check, oblique_projection_check,
    ort_equivalences, reconstruct_operator, GramTriple, InverseMode, PinvVariant,
};
use crate::linalg::{self, CMatrix, TolerancePolicy};
use crate::stability::{check_stability, neumann_inverse, PerturbationInstance};

/// Reweighting trials per instance in the `weights` battery.
const REWEIGHT_TRIALS: usize = 20;
const NEUMANN_MAX_FACTOR: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Battery {
    Ort,
    Riesz,
    Inv,
    Inverse,
    Pinv,
    Norms,
    Reconstruct,
    Oblique,
    Compose,
    Stability,
    Neumann,
    Weights,
    Adjoint,
    DualRiesz,
}

impl Battery {
    pub const ALL: [Battery; 14] = [
        Battery::Ort,
        Battery::Riesz,
        Battery::Inv,
        Battery::Inverse,
        Battery::Pinv,
        Battery::Norms,
        Battery::Reconstruct,
        Battery::Oblique,
        Battery::Compose,
        Battery::Stability,
        Battery::Neumann,
        Battery::Weights,
        Battery::Adjoint,
        Battery::DualRiesz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Battery::Ort => "ort",
            Battery::Riesz => "riesz",
            Battery::Inv => "inv",
            Battery::Inverse => "inverse",
            Battery::Pinv => "pinv",
            Battery::Norms => "norms",
            Battery::Reconstruct => "reconstruct",
            Battery::Oblique => "oblique",
            Battery::Compose => "compose",
            Battery::Stability => "stability",
            Battery::Neumann => "neumann",
            Battery::Weights => "weights",
            Battery::Adjoint => "adjoint",
            Battery::DualRiesz => "dual-riesz",
        }
    }

    /// The statement each battery checks.
    pub fn description(self) -> &'static str {
        match self {
            Battery::Ort => "Riesz W: G_W = I <=> G_W' = I <=> W is a fusion orthonormal basis",
            Battery::Riesz => "Riesz basis <=> T_W injective <=> T_W* onto <=> local flattening invertible <=> delta test <=> Riesz inequality",
            Battery::Inv => "W Riesz and U invertible <=> G_{U,W,W} and G_{U,W~,W} invertible / onto / one-to-one",
            Battery::Inverse => "closed-form inverses of G in the modes V = W, W dual of V, and general V",
            Battery::Pinv => "G^+ = G_{U^+} (dual pair) and G^+ = G_{L^-1 U^+ L^-1} (V = W) iff the operator identities hold",
            Battery::Norms => "||G|| <= sqrt(B_W B_V)/A_V ||U||, ||phi|| <= ||S^-1||, lambda_min(L_W) >= A_W/B_W",
            Battery::Reconstruct => "U = T_V G_{U,V,W} T_V* S_V^-1 for a dual V of W",
            Battery::Oblique => "G_{V,W} is an oblique projection with T_V G = T_V and ker G = ker T_V",
            Battery::Compose => "G_{U1,W,V} G_{U2,W,Z} = G_{U1 T_W phi_WZ T_Z* U2,W,V}, and the dual-pair product law",
            Battery::Stability => "the perturbation bound implies that G_{U2,W,Z} stays invertible",
            Battery::Neumann => "G^-1 = sum_k [F^-1(F - G)]^k F^-1 when ||F^-1|| ||F - G|| < 1",
            Battery::Weights => "being a fusion Riesz basis does not depend on the weights",
            Battery::Adjoint => "phi_VW G*_{U,W,V} = G_{U*,V,W} phi*_WV",
            Battery::DualRiesz => "for a dual V of W: V Riesz <=> G_{V,W} = I <=> G_{V,W} has a left inverse",
        }
    }
}

impl fmt::Display for Battery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Battery {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .find(|b| b.name() == s || (s == "dual_riesz" && *b == Battery::DualRiesz))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown battery '{s}'")))
    }
}

/// Explicit inputs. `v` defaults to `w` (or its canonical dual where a dual
/// is required) and `u` to the identity.
#[derive(Debug, Clone, Copy)]
pub struct BatteryInputs<'a> {
    pub w: &'a WeightedFamily,
    pub v: Option<&'a WeightedFamily>,
    pub u: Option<&'a CMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatteryOutcome {
    pub battery: &'static str,
    pub passed: bool,
    /// Names of the checks that failed.
    pub failures: Vec<String>,
    pub residuals: BTreeMap<String, f64>,
    pub details: Value,
}

struct Collector {
    battery: Battery,
    failures: Vec<String>,
    residuals: BTreeMap<String, f64>,
    details: serde_json::Map<String, Value>,
}

impl Collector {
    fn new(battery: Battery) -> Self {
        Self {
            battery,
            failures: Vec::new(),
            residuals: BTreeMap::new(),
            details: serde_json::Map::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failures.push(name.to_string());
        }
    }

    fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.to_string(), value);
    }

    fn detail(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.details.insert(name.to_string(), v);
    }

    fn finish(self) -> BatteryOutcome {
        BatteryOutcome {
            battery: self.battery.name(),
            passed: self.failures.is_empty(),
            failures: self.failures,
            residuals: self.residuals,
            details: Value::Object(self.details),
        }
    }
}

fn dual_of<'a>(w: &WeightedFamily, v: Option<&'a WeightedFamily>, tol: &TolerancePolicy) -> Result<WeightedFamily> {
    match v {
        Some(v) => Ok(v.clone()),
        None => w.canonical_dual(tol),
    }
}

fn relative(diff: &CMatrix, reference: &CMatrix) -> f64 {
    linalg::operator_norm(diff) / linalg::operator_norm(reference).max(f64::MIN_POSITIVE)
}

pub fn run_battery(battery: Battery, inputs: BatteryInputs<'_>, tol: &TolerancePolicy) -> Result<BatteryOutcome> {
    let w = inputs.w;
    let n = w.ambient_dim();
    let id = linalg::identity(n);
    let u = inputs.u.cloned().unwrap_or_else(|| id.clone());
    let mut c = Collector::new(battery);
    match battery {
        Battery::Ort => {
            let r = ort_equivalences(w, tol)?;
            c.residual("gram_defect", r.gram_defect);
            c.residual("unit_gram_defect", r.unit_gram_defect);
            c.check("ort_equivalence", r.agree());
            c.detail("report", r);
        }
        Battery::Riesz => {
            let r = w.riesz_equivalences(tol);
            for name in r.disagreements() {
                c.check(name, false);
            }
            if let Some(d) = r.delta_residual {
                c.residual("delta_residual", d);
            }
            c.detail("verdicts", r.verdicts().iter().map(|(k, v)| (*k, *v)).collect::<BTreeMap<_, _>>());
            c.detail("report", r);
        }
        Battery::Inv => {
            let r = inv_equivalence_battery(&u, w, tol)?;
            for name in r.disagreements() {
                c.check(name, false);
            }
            c.residual("gram_sigma_ratio", r.gram_sigma_ratio);
            c.residual("dual_gram_sigma_ratio", r.dual_gram_sigma_ratio);
            c.residual("phi_self_adjoint", r.phi_self_adjoint_residual);
            c.detail("report", r);
        }
        Battery::Inverse => {
            let v = inputs.v.unwrap_or(w);
            let mut modes = BTreeMap::new();
            for mode in [InverseMode::WW, InverseMode::DualVW, InverseMode::WV] {
                let key = serde_json::to_value(mode)?.as_str().unwrap_or_default().to_string();
                let triple = GramTriple::new(u.clone(), w.clone(), v.clone(), tol)?;
                match gram_inverse(&triple, mode, tol) {
                    Ok(r) => {
                        c.residual(&format!("{key}_residual"), r.residual);
                        c.residual(&format!("{key}_direct_discrepancy"), r.direct_discrepancy);
                        c.check(&key, r.within_tolerance());
                        modes.insert(key, json!({"kappa": r.kappa, "applied": true}));
                    }
                    Err(Error::HypothesisViolated(reason)) => {
                        modes.insert(key, json!({"applied": false, "reason": reason}));
                    }
                    Err(Error::NotInvertible { ratio }) => {
                        // the theorem predicts no inverse: the Gram matrix must be singular too
                        let g = gram_matrix(&u, w, v, tol)?;
                        let singular = !linalg::inverse_checked(&g, tol)?.is_invertible();
                        c.check(&format!("{key}_singular"), singular);
                        modes.insert(key, json!({"applied": false, "ratio": ratio, "gram_singular": singular}));
                    }
                    Err(e) => return Err(e),
                }
            }
            c.detail("modes", modes);
        }
        Battery::Pinv => {
            let v = inputs.v.unwrap_or(w);
            let mut ran = 0;
            for variant in [PinvVariant::DualVW, PinvVariant::WW] {
                let triple = GramTriple::new(u.clone(), w.clone(), v.clone(), tol)?;
                let key = serde_json::to_value(variant)?.as_str().unwrap_or_default().to_string();
                match gram_pinv_formula(&triple, variant, tol) {
                    Ok(r) => {
                        ran += 1;
                        c.residual(&format!("{key}_condition"), r.condition_residual);
                        c.residual(&format!("{key}_discrepancy"), r.discrepancy);
                        c.check(&format!("{key}_equivalence"), r.consistent);
                        c.detail(
                            &key,
                            json!({
                                "condition_holds": r.condition_holds,
                                "formula_matches": r.formula_matches,
                                "range_angles": r.range_angles,
                            }),
                        );
                    }
                    Err(Error::HypothesisViolated(_)) => {}
                    Err(e) => return Err(e),
                }
            }
            if ran == 0 {
                return Err(Error::HypothesisViolated(
                    "pinv needs W dual of V or V = W".into(),
                ));
            }
        }
        Battery::Norms => {
            let v = inputs.v.unwrap_or(w);
            let r = norm_bound_check(&u, w, v, tol)?;
            let l = lw_lower_bound_check(w, tol)?;
            c.residual("gram_slack", r.gram_bound - r.gram_norm);
            c.residual("phi_slack", r.phi_bound - r.phi_norm);
            c.residual("lw_slack", l.lambda_min - l.bound);
            c.check("norm_bounds", r.holds());
            c.check("lw_lower_bound", l.holds());
            c.detail("norms", r);
            c.detail("lw", l);
        }
        Battery::Reconstruct => {
            let v = dual_of(w, inputs.v, tol)?;
            let g = cross_gram(&GramTriple::new(u.clone(), v.clone(), w.clone(), tol)?, tol)?;
            let back = reconstruct_operator(&g, &v, w, tol)?;
            let err = linalg::operator_norm(&(&back - &u));
            let scale = linalg::operator_norm(&u);
            c.residual("round_trip", if scale > 0.0 { err / scale } else { err });
            c.check("round_trip", err <= 1e-8 * scale + 1e-12);
        }
        Battery::Oblique => {
            let v = dual_of(w, inputs.v, tol)?;
            let r = oblique_projection_check(&v, w, tol)?;
            c.residual("idempotent", r.idempotent_residual);
            c.residual("synthesis", r.synthesis_residual);
            c.residual("range", r.range_residual);
            c.residual("kernel_angle", r.kernel_angle);
            c.check("idempotent", r.idempotent_residual <= 1e-9);
            c.check("synthesis", r.synthesis_residual <= 1e-9);
            c.check("range", r.range_residual <= 1e-9);
            c.check("kernel", r.kernel_angle <= 1e-7);
            c.detail("report", r);
        }
        Battery::Compose => {
            let v = dual_of(w, inputs.v, tol)?;
            let u2 = u.adjoint() + &id;
            let r = composition_check(&u, &u2, w, &v, w, tol)?;
            c.residual("general", r.general_residual);
            if let Some(d) = r.dual_residual {
                c.residual("dual", d);
            }
            c.check("composition", r.holds(1e-10));
            c.detail("report", r);
        }
        Battery::Stability => {
            let z = inputs.v.unwrap_or(w);
            let inst = PerturbationInstance::new(w.clone(), w.clone(), z.clone(), id.clone(), u.clone(), tol)?;
            let r = check_stability(&inst, 0.0, 0.0, None, tol)?;
            c.residual("margin", r.margin);
            c.residual("perturbed_sigma_ratio", r.perturbed_sigma_ratio);
            c.check("stability", !r.counterexample());
            c.detail("report", r);
        }
        Battery::Neumann => {
            let v = inputs.v.unwrap_or(w);
            let f = gram_matrix(&id, w, w, tol)?;
            let g = gram_matrix(&u, w, v, tol)?;
            match neumann_inverse(&f, &g, 10_000, 1e-14, tol) {
                Ok(r) => {
                    let direct = linalg::inverse_checked(&g, tol)?.into_result()?;
                    let err = relative(&(&r.inverse - &direct), &direct);
                    c.residual("factor", r.factor);
                    c.residual("direct_discrepancy", err);
                    if r.factor <= NEUMANN_MAX_FACTOR {
                        c.check("neumann", r.converged && err <= 1e-8);
                    }
                    c.detail("terms_used", r.terms_used);
                }
                Err(Error::DivergenceDetected { factor }) => {
                    c.residual("factor", factor);
                    c.detail("divergent", true);
                }
                Err(e) => return Err(e),
            }
        }
        Battery::Weights => {
            let base = w.classify(tol).is_riesz_basis;
            let mut rng = CorpusRng::new(0x0077_e1_6475);
            let mut flips = 0usize;
            for _ in 0..REWEIGHT_TRIALS {
                let weights = (0..w.len()).map(|_| rng.uniform_in(0.5, 2.0)).collect();
                if w.with_weights(weights)?.classify(tol).is_riesz_basis != base {
                    flips += 1;
                }
            }
            c.check("weight_independence", flips == 0);
            c.detail("riesz", base);
            c.detail("flips", flips);
        }
        Battery::Adjoint => {
            let v = inputs.v.unwrap_or(w);
            let r = adjoint_relation_residual(&u, w, v, tol)?;
            c.residual("adjoint", r);
            c.check("adjoint", r <= 1e-10);
        }
        Battery::DualRiesz => {
            let v = dual_of(w, inputs.v, tol)?;
            let r = dual_riesz_check(&v, w, tol)?;
            c.residual("gram_defect", r.gram_defect);
            c.check("dual_riesz_equivalence", r.agree());
            c.detail("report", r);
        }
    }
    Ok(c.finish())
}

/// One seeded instance of a battery's hypothesis class.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub description: String,
    pub w: WeightedFamily,
    pub v: Option<WeightedFamily>,
    pub u: Option<CMatrix>,
}

fn spec(text: &str) -> Result<InstanceSpec> {
    text.parse()
}

fn family(text: &str) -> Result<WeightedFamily> {
    Ok(generate(&spec(text)?)?.first().clone())
}

fn pair(text: &str) -> Result<(WeightedFamily, WeightedFamily)> {
    let g = generate(&spec(text)?)?;
    let second = g
        .second()
        .cloned()
        .ok_or_else(|| Error::InvalidSpec(format!("'{text}' does not generate a pair")))?;
    Ok((g.first().clone(), second))
}

/// Builds the sweep instance for `battery` at `seed`. Classes rotate with the seed.
pub fn sweep_case(battery: Battery, seed: u64) -> Result<SweepCase> {
    let n = 3 + (seed % 4) as usize;
    let split = |parts: usize| -> String {
        let mut dims = vec![n / parts; parts];
        dims[0] += n % parts;
        dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
    };
    let redundant = format!("{},{},1", n - 1, n - 1);
    let law = "uniform:0.5:2";
    let case = |description: String, w: WeightedFamily, v: Option<WeightedFamily>, u: Option<CMatrix>| SweepCase {
        description,
        w,
        v,
        u,
    };
    let invertible = || operator_from_spec(&format!("random_invertible:seed={seed}"), n);
    Ok(match battery {
        Battery::Ort => {
            let s = if seed % 2 == 0 {
                format!("fusion_onb:seed={seed},n={n},dims={}", split(2))
            } else {
                format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2))
            };
            case(s.clone(), family(&s)?, None, None)
        }
        Battery::Riesz | Battery::Weights => match seed % 3 {
            0 => {
                let s = format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2));
                case(s.clone(), family(&s)?, None, None)
            }
            1 => {
                let s = format!("frame:seed={seed},n={n},dims={redundant},weights={law}");
                case(s.clone(), family(&s)?, None, None)
            }
            _ => {
                let s = format!("riesz:seed={seed},n={n},dims={},weights={law}", split(3));
                let full = family(&s)?;
                let k = full.len() - 1;
                let w = WeightedFamily::new(full.subspaces()[..k].to_vec(), full.weights()[..k].to_vec())?;
                case(format!("{s} minus its last subspace"), w, None, None)
            }
        },
        Battery::Inv => {
            let s = if seed % 2 == 0 {
                format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2))
            } else {
                format!("frame:seed={seed},n={n},dims={redundant},weights={law}")
            };
            let u = if (seed / 2) % 2 == 0 {
                format!("random_invertible:seed={seed}")
            } else {
                format!("rank:r={},seed={seed}", n - 1)
            };
            case(format!("{s} with U = {u}"), family(&s)?, None, Some(operator_from_spec(&u, n)?))
        }
        Battery::Inverse => {
            let s = format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2));
            let w = family(&s)?;
            let tol = TolerancePolicy::default();
            let v = if seed % 2 == 0 { w.canonical_dual(&tol)? } else { w.clone() };
            case(s, w, Some(v), Some(invertible()?))
        }
        Battery::Pinv => match seed % 3 {
            0 => {
                let s = format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2));
                let w = family(&s)?;
                let v = w.canonical_dual(&TolerancePolicy::default())?;
                // roles: first family is the dual of the second
                case(format!("{s}, dual first, invertible U"), v, Some(w), Some(invertible()?))
            }
            1 => {
                let s = format!("parseval:seed={seed},n={n},dims={},{}", split(2), split(2));
                let w = family(&s)?;
                let u = operator_from_spec(&format!("rank:r=1,seed={seed}"), n)?;
                case(format!("{s} with rank-1 U"), w.clone(), Some(w), Some(u))
            }
            _ => {
                let s = format!("dual_pair:seed={seed},n={n},dims={redundant},weights={law}");
                let (w, d) = pair(&s)?;
                let u = operator_from_spec(&format!("rank:r=1,seed={seed}"), n)?;
                case(format!("{s}, dual first, rank-1 U"), d, Some(w), Some(u))
            }
        },
        Battery::Norms | Battery::Adjoint | Battery::Compose => {
            let s = format!("dual_pair:seed={seed},n={n},dims={redundant},weights={law}");
            let (w, d) = pair(&s)?;
            let u = operator_from_spec(&format!("random:seed={seed}"), n)?;
            if seed % 2 == 0 {
                case(s, w, Some(d), Some(u))
            } else {
                let other = family(&format!("frame:seed={},n={n},dims={redundant},weights={law}", seed + 1))?;
                case(format!("{s} against an unrelated frame"), w, Some(other), Some(u))
            }
        }
        Battery::Reconstruct | Battery::Oblique | Battery::DualRiesz => {
            let s = if seed % 2 == 0 {
                format!("dual_pair:seed={seed},n={n},dims={redundant},weights={law}")
            } else {
                format!("dual_pair:seed={seed},n={n},dims={},weights={law}", split(2))
            };
            let (w, d) = pair(&s)?;
            let u = operator_from_spec(&format!("random:seed={seed}"), n)?;
            case(s, w, Some(d), Some(u))
        }
        Battery::Stability => {
            let theta = 1e-4 * (1 + seed % 5) as f64;
            let s = format!("perturbation_pair:seed={seed},n={n},dims={},weights=uniform:0.5:1,theta={theta}", split(2));
            let (w, z) = pair(&s)?;
            let u = linalg::identity(n) + operator_from_spec(&format!("random:seed={seed}"), n)?.scale(1e-4);
            case(s, w, Some(z), Some(u))
        }
        Battery::Neumann => {
            let s = format!("riesz:seed={seed},n={n},dims={},weights={law}", split(2));
            let w = family(&s)?;
            let scale = [0.01, 0.1, 0.5, 5.0][(seed % 4) as usize];
            let u = linalg::identity(n) + operator_from_spec(&format!("random:seed={seed}"), n)?.scale(scale / n as f64);
            case(format!("{s}, U = I + {scale}/n * random"), w, None, Some(u))
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub seed: u64,
    pub battery: &'static str,
    pub instance: String,
    #[serde(flatten)]
    pub result: SweepResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepResult {
    Outcome(BatteryOutcome),
    Error(String),
}

impl SweepEntry {
    pub fn passed(&self) -> bool {
        matches!(&self.result, SweepResult::Outcome(o) if o.passed)
    }
}

/// Runs every battery on seeds `0..count` in parallel; entries come back
/// sorted by seed, then by battery order.
pub fn run_sweep(batteries: &[Battery], count: u64, tol: &TolerancePolicy) -> Vec<SweepEntry> {
    let jobs: Vec<(u64, Battery)> = (0..count).flat_map(|s| batteries.iter().map(move |&b| (s, b))).collect();
    let mut entries: Vec<(u64, Battery, SweepEntry)> = jobs
        .par_iter()
        .map(|&(seed, battery)| {
            let (instance, result) = match sweep_case(battery, seed) {
                Ok(case) => {
                    let inputs = BatteryInputs {
                        w: &case.w,
                        v: case.v.as_ref(),
                        u: case.u.as_ref(),
                    };
                    let result = match run_battery(battery, inputs, tol) {
                        Ok(o) => SweepResult::Outcome(o),
                        Err(e) => SweepResult::Error(e.to_string()),
                    };
                    (case.description, result)
                }
                Err(e) => (String::new(), SweepResult::Error(e.to_string())),
            };
            let entry = SweepEntry {
                seed,
                battery: battery.name(),
                instance,
                result,
            };
            (seed, battery, entry)
        })
        .collect();
    entries.sort_by_key(|(s, b, _)| (*s, *b));
    entries.into_iter().map(|(_, _, e)| e).collect()
}

/// True when `v` is a dual of `w` within the policy.
pub fn is_dual_pair(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> bool {
    duality_defect(v, w, tol).is_ok_and(|d| d <= tol.identity_abs)
}
