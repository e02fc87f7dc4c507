//! Invertibility of cross Gram matrices under perturbation of the second
//! family and of the operator, and the Neumann-series inverse.
//!
//! The perturbation inequality ("purb") for `V`, `Z` with common weights `υ`:
//!
//! ```text
//! sqrt(Σ υ_i² ||(P_Zi − P_Vi) f||²)
//!     ≤ λ1 sqrt(Σ υ_i² ||P_Zi f||²) + λ2 sqrt(Σ υ_i² ||P_Vi f||²) + ε ||f||
//! ```
//!
//! and the sufficient condition for `𝒢_{U2,W,Z}` to stay invertible:
//!
//! ```text
//! μ + (λ1 + λ2 + ε/√B)(√B ||S_Z⁻¹|| sqrt(Σ υ_i²) ||U2|| + ||U2||)
//!     < ||𝒢_{U1,W,V}⁻¹||⁻¹ / (B ||S_V⁻¹||)
//! ```
//!
//! with `μ = ||U1 − U2||` and `B = max(B_W, B_V, B_Z)`. Only that direction is
//! asserted; a failed bound says nothing about invertibility.

use serde::{Deserialize, Serialize};

use crate::corpus::rng::CorpusRng;
use crate::error::{Error, Result};
use crate::frames::{check_compatible, WeightedFamily};
use crate::gram::{check_operator, gram_matrix};
use crate::linalg::{self, CMatrix, CVector, Svd, TolerancePolicy};

/// Number of random unit probes used to verify the purb inequality.
pub const PURB_PROBES: usize = 200;
/// Seed of the probe stream; fixed so reports are reproducible.
pub const PURB_PROBE_SEED: u64 = 0x5eed_0f_9b0be;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationInstance {
    pub w: WeightedFamily,
    pub v: WeightedFamily,
    pub z: WeightedFamily,
    pub u1: CMatrix,
    pub u2: CMatrix,
}

impl PerturbationInstance {
    pub fn new(
        w: WeightedFamily,
        v: WeightedFamily,
        z: WeightedFamily,
        u1: CMatrix,
        u2: CMatrix,
        tol: &TolerancePolicy,
    ) -> Result<Self> {
        check_compatible(&w, &v)?;
        check_compatible(&w, &z)?;
        if v.weights() != w.weights() || z.weights() != w.weights() {
            return Err(Error::HypothesisViolated(
                "W, V and Z must carry the same weights".into(),
            ));
        }
        v.require_frame(tol)?;
        z.require_frame(tol)?;
        check_operator(&u1, w.ambient_dim())?;
        check_operator(&u2, w.ambient_dim())?;
        Ok(Self { w, v, z, u1, u2 })
    }
}

/// Stacked map `f ↦ {υ_i (P_Zi − P_Vi) f}` as an `(N·n) × n` matrix.
fn difference_map(v: &WeightedFamily, z: &WeightedFamily) -> CMatrix {
    let n = v.ambient_dim();
    let mut d = CMatrix::zeros(n * v.len(), n);
    for (i, ((sv, sz), &wi)) in v.subspaces().iter().zip(z.subspaces()).zip(v.weights()).enumerate() {
        let block = (sz.projection() - sv.projection()).scale(wi);
        d.view_mut((i * n, 0), (n, n)).copy_from(&block);
    }
    d
}

/// Smallest `ε` for which purb holds with `λ1 = λ2 = 0`.
pub fn perturbation_epsilon(v: &WeightedFamily, z: &WeightedFamily) -> Result<f64> {
    check_compatible(v, z)?;
    if v.weights() != z.weights() {
        return Err(Error::HypothesisViolated("V and Z must carry the same weights".into()));
    }
    let d = difference_map(v, z);
    // taking both signs makes the value independent of argument order bit for bit
    Ok(linalg::operator_norm(&d).max(linalg::operator_norm(&(-d))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    /// Bound holds and the perturbed Gram matrix is invertible.
    Stable,
    /// Bound fails; the perturbed matrix may or may not be invertible.
    Inconclusive,
    /// Bound holds but the perturbed matrix is singular.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub mu: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
    pub b: f64,
    pub sum_weights_sq: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Largest `lhs(f) − rhs(f)` of purb over unit probes (≤ 0 when it holds).
    pub purb_residual: f64,
    pub probe_seed: u64,
    pub bound_holds: bool,
    pub perturbed_sigma_ratio: f64,
    pub perturbed_invertible: bool,
    pub verdict: bool,
    pub outcome: StabilityVerdict,
    /// Right-hand side of the general inequality, when `rhs` is a specialization.
    pub theorem_rhs: Option<f64>,
    /// `||𝒢_{I,W,W}⁻¹||⁻¹ − A_W` for the corollary.
    pub gram_gap: Option<f64>,
}

impl StabilityReport {
    pub fn counterexample(&self) -> bool {
        self.outcome == StabilityVerdict::Counterexample
    }
}

struct Constants {
    b: f64,
    sum_weights_sq: f64,
    s_z_inv_norm: f64,
    u2_norm: f64,
}

fn constants(w: &WeightedFamily, v: &WeightedFamily, z: &WeightedFamily, u2: &CMatrix, tol: &TolerancePolicy) -> Result<Constants> {
    let b = [w, v, z]
        .iter()
        .map(|f| f.frame_bounds().upper)
        .fold(0.0, f64::max);
    Ok(Constants {
        b,
        sum_weights_sq: w.weights().iter().map(|x| x * x).sum(),
        s_z_inv_norm: linalg::operator_norm(&z.frame_operator_inverse(tol)?),
        u2_norm: linalg::operator_norm(u2),
    })
}

fn lhs_value(mu: f64, l1: f64, l2: f64, eps: f64, c: &Constants) -> f64 {
    let sb = c.b.sqrt();
    let factor = if sb > 0.0 { l1 + l2 + eps / sb } else { l1 + l2 };
    mu + factor * (sb * c.s_z_inv_norm * c.sum_weights_sq.sqrt() * c.u2_norm + c.u2_norm)
}

/// Worst purb violation over right singular vectors of the difference map and
/// seeded random unit vectors.
fn purb_residual(v: &WeightedFamily, z: &WeightedFamily, l1: f64, l2: f64, eps: f64) -> f64 {
    let n = v.ambient_dim();
    let d = difference_map(v, z);
    let (az, av) = (z.analysis(), v.analysis());
    let excess = |f: &CVector| (&d * f).norm() - (l1 * (&az * f).norm() + l2 * (&av * f).norm() + eps);

    let svd = Svd::new(&d);
    let mut worst = f64::NEG_INFINITY;
    for r in 0..svd.v_t.nrows() {
        let f: CVector = svd.v_t.row(r).adjoint();
        worst = worst.max(excess(&f.unscale(f.norm())));
    }
    let mut rng = CorpusRng::new(PURB_PROBE_SEED);
    for _ in 0..PURB_PROBES {
        worst = worst.max(excess(&rng.unit_vector(n)));
    }
    worst
}

fn purb_slack(eps: f64, l1: f64, l2: f64) -> f64 {
    1e-12 + 1e-9 * (eps + l1 + l2)
}

fn assemble(
    inst: &PerturbationInstance,
    mu: f64,
    lambda1: f64,
    lambda2: f64,
    epsilon: Option<f64>,
    rhs_of: impl FnOnce(&Constants, f64) -> Result<(f64, Option<f64>)>,
    tol: &TolerancePolicy,
) -> Result<StabilityReport> {
    if !(lambda1 >= 0.0 && lambda2 >= 0.0) || !lambda1.is_finite() || !lambda2.is_finite() {
        return Err(Error::HypothesisViolated("lambda1, lambda2 must be finite and nonnegative".into()));
    }
    let g1 = gram_matrix(&inst.u1, &inst.w, &inst.v, tol)?;
    let g1_inv = match linalg::inverse_checked(&g1, tol)? {
        linalg::Inversion::Invertible(m) => m,
        linalg::Inversion::NotInvertible { ratio } => {
            return Err(Error::HypothesisViolated(format!(
                "unperturbed Gram matrix is not invertible (sigma ratio {ratio:e})"
            )))
        }
    };
    let g1_inv_norm_inv = 1.0 / linalg::operator_norm(&g1_inv);

    let epsilon = match epsilon {
        Some(e) if e >= 0.0 && e.is_finite() => e,
        Some(e) => return Err(Error::HypothesisViolated(format!("epsilon must be nonnegative, got {e}"))),
        None => perturbation_epsilon(&inst.v, &inst.z)?,
    };
    let purb = purb_residual(&inst.v, &inst.z, lambda1, lambda2, epsilon);
    if purb > purb_slack(epsilon, lambda1, lambda2) {
        return Err(Error::PurbViolated { residual: purb });
    }

    let c = constants(&inst.w, &inst.v, &inst.z, &inst.u2, tol)?;
    let lhs = lhs_value(mu, lambda1, lambda2, epsilon, &c);
    let (rhs, theorem_rhs) = rhs_of(&c, g1_inv_norm_inv)?;
    let bound_holds = lhs < rhs;

    let g2 = gram_matrix(&inst.u2, &inst.w, &inst.z, tol)?;
    let ratio = linalg::sigma_ratio(&g2);
    let perturbed_invertible = ratio > tol.invert_rel;
    let outcome = match (bound_holds, perturbed_invertible) {
        (true, true) => StabilityVerdict::Stable,
        (true, false) => StabilityVerdict::Counterexample,
        (false, _) => StabilityVerdict::Inconclusive,
    };
    Ok(StabilityReport {
        mu,
        lambda1,
        lambda2,
        epsilon,
        b: c.b,
        sum_weights_sq: c.sum_weights_sq,
        lhs,
        rhs,
        margin: rhs - lhs,
        purb_residual: purb,
        probe_seed: PURB_PROBE_SEED,
        bound_holds,
        perturbed_sigma_ratio: ratio,
        perturbed_invertible,
        verdict: bound_holds && perturbed_invertible,
        outcome,
        theorem_rhs,
        gram_gap: None,
    })
}

/// Evaluates the stability bound. `epsilon = None` uses [`perturbation_epsilon`].
pub fn check_stability(
    inst: &PerturbationInstance,
    lambda1: f64,
    lambda2: f64,
    epsilon: Option<f64>,
    tol: &TolerancePolicy,
) -> Result<StabilityReport> {
    let mu = linalg::operator_norm(&(&inst.u1 - &inst.u2));
    let s_v_inv_norm = linalg::operator_norm(&inst.v.frame_operator_inverse(tol)?);
    assemble(
        inst,
        mu,
        lambda1,
        lambda2,
        epsilon,
        |c, g| Ok((g / (c.b * s_v_inv_norm), None)),
        tol,
    )
}

/// Specialization to `V = W` Riesz, `U1 = I`, `U2 = U`, with right-hand side
/// `A_W / (B ||S_W⁻¹||)`, `B = max(B_W, B_Z)`. `mu = None` takes `||U − I||`.
pub fn corollary_check(
    w: &WeightedFamily,
    z: &WeightedFamily,
    u: &CMatrix,
    mu: Option<f64>,
    lambda1: f64,
    lambda2: f64,
    epsilon: Option<f64>,
    tol: &TolerancePolicy,
) -> Result<StabilityReport> {
    if !w.classify(tol).is_riesz_basis {
        return Err(Error::HypothesisViolated("W must be a fusion Riesz basis".into()));
    }
    let n = w.ambient_dim();
    let inst = PerturbationInstance::new(w.clone(), w.clone(), z.clone(), linalg::identity(n), u.clone(), tol)?;
    let deviation = linalg::operator_norm(&(u - linalg::identity(n)));
    let mu = match mu {
        Some(m) if m >= deviation => m,
        Some(m) => {
            return Err(Error::HypothesisViolated(format!(
                "mu = {m} is below ||U - I|| = {deviation}"
            )))
        }
        None => deviation,
    };
    let bounds = w.frame_bounds();
    let s_w_inv_norm = linalg::operator_norm(&w.frame_operator_inverse(tol)?);
    let mut gap = None;
    let mut report = assemble(
        &inst,
        mu,
        lambda1,
        lambda2,
        epsilon,
        |c, g| {
            // V = W, so B_V adds nothing to the max
            let denom = c.b * s_w_inv_norm;
            gap = Some(g - bounds.lower);
            Ok((bounds.lower / denom, Some(g / denom)))
        },
        tol,
    )?;
    report.gram_gap = gap;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeumannResult {
    pub inverse: CMatrix,
    pub terms_used: usize,
    pub converged: bool,
    /// `||F⁻¹|| · ||F − G||`.
    pub factor: f64,
}

/// `G⁻¹ = Σ_k [F⁻¹(F − G)]^k F⁻¹`, summed until a term has norm `≤ tol` or
/// `k_max` terms are used.
pub fn neumann_inverse(
    f: &CMatrix,
    g: &CMatrix,
    k_max: usize,
    tol: f64,
    policy: &TolerancePolicy,
) -> Result<NeumannResult> {
    if f.shape() != g.shape() {
        return Err(Error::dims(format!("{:?}", f.shape()), format!("{:?}", g.shape())));
    }
    linalg::ensure_finite(g)?;
    let f_inv = linalg::inverse_checked(f, policy)?.into_result()?;
    let diff = f - g;
    let factor = linalg::operator_norm(&f_inv) * linalg::operator_norm(&diff);
    if factor >= 1.0 {
        return Err(Error::DivergenceDetected { factor });
    }
    let step = &f_inv * &diff;
    let mut term = f_inv.clone();
    let mut sum = f_inv;
    let mut terms_used = 1;
    let mut converged = false;
    while terms_used < k_max.max(1) {
        term = &step * &term;
        if term.norm() <= tol {
            converged = true;
            break;
        }
        sum += &term;
        terms_used += 1;
    }
    if !converged {
        converged = (&step * &term).norm() <= tol;
    }
    Ok(NeumannResult {
        inverse: sum,
        terms_used,
        converged,
        factor,
    })
}
