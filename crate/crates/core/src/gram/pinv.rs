use serde::{Deserialize, Serialize};

use super::{alternate_operator, gram_matrix, phi_block, GramTriple};
use crate::error::{Error, Result};
use crate::frames::duality_defect;
use crate::linalg::{self, CMatrix, TolerancePolicy};

/// Relative agreement required between `𝒢†` and the Gram-form candidate.
const FORMULA_MATCH_REL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinvVariant {
    /// `W` a dual of `V`; candidate `𝒢_{U†,W,V}`.
    #[serde(rename = "dual_vw")]
    DualVW,
    /// `V = W`; candidate `𝒢_{L_W⁻¹ U† L_W⁻¹, W, W}`.
    WW,
}

/// Outcome of comparing the Moore–Penrose inverse of a Gram matrix with its
/// Gram-form candidate, alongside the operator identities that are supposed
/// to characterize when they coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct PinvReport {
    pub variant: PinvVariant,
    pub gram: CMatrix,
    pub pinv: CMatrix,
    pub formula: CMatrix,
    /// Raw residuals of the two operator identities (adjoint one first).
    pub residuals: [f64; 2],
    /// `max(residuals) / max(1, ||U||)`.
    pub condition_residual: f64,
    pub condition_holds: bool,
    /// Principal angles for the two range equalities (dual variant only).
    pub range_angles: Option<[f64; 2]>,
    /// `||𝒢† − 𝒢_formula|| / ||𝒢†||` (absolute when `𝒢† = 0`).
    pub discrepancy: f64,
    pub formula_matches: bool,
    /// Whether the identities and the formula gave the same answer.
    pub consistent: bool,
}

pub fn gram_pinv_formula(t: &GramTriple, variant: PinvVariant, tol: &TolerancePolicy) -> Result<PinvReport> {
    let (w, v, u) = (&t.w, &t.v, &t.u);
    let u_star = u.adjoint();
    let u_dag = linalg::pseudo_inverse(u, tol);
    let gram = gram_matrix(u, w, v, tol)?;

    let (formula, residuals, range_angles) = match variant {
        PinvVariant::DualVW => {
            let defect = duality_defect(w, v, tol)?;
            if defect > tol.identity_abs {
                return Err(Error::HypothesisViolated(format!(
                    "variant dual_vw needs W dual of V (defect {defect:e})"
                )));
            }
            let a = phi_block(w, v, tol)?.into_matrix() * v.analysis();
            let tw_star = w.analysis();
            let b = &tw_star * w.frame_operator_inverse(tol)?;
            let r1 = linalg::operator_norm(&(&a * &u_star - &b * &u_star));
            let r2 = linalg::operator_norm(&(&a * u - &b * u));
            let angles = [
                linalg::range_angle(&(&a * &u_star), &(&tw_star * &u_star), tol),
                linalg::range_angle(&(&a * u), &(&tw_star * u), tol),
            ];
            (gram_matrix(&u_dag, w, v, tol)?, [r1, r2], Some(angles))
        }
        PinvVariant::WW => {
            if w != v {
                return Err(Error::HypothesisViolated("variant WW needs V = W".into()));
            }
            let l_inv = linalg::inverse_checked(&alternate_operator(w, w, tol)?, tol)?.into_result()?;
            let a = phi_block(w, w, tol)?.into_matrix() * w.analysis();
            let b = w.analysis() * w.frame_operator_inverse(tol)?;
            let r1 = linalg::operator_norm(&(&a * &l_inv * &u_star - &b * &u_star));
            let r2 = linalg::operator_norm(&(&a * u - &b * u));
            let x = &l_inv * &u_dag * &l_inv;
            (gram_matrix(&x, w, w, tol)?, [r1, r2], None)
        }
    };

    let pinv = linalg::pseudo_inverse(&gram, tol);
    let pinv_norm = pinv.norm();
    let diff = (&pinv - &formula).norm();
    let discrepancy = if pinv_norm > 0.0 { diff / pinv_norm } else { diff };
    let formula_matches = discrepancy <= FORMULA_MATCH_REL;
    let condition_residual = residuals[0].max(residuals[1]) / linalg::operator_norm(u).max(1.0);
    let condition_holds = condition_residual <= tol.identity_abs;
    Ok(PinvReport {
        variant,
        gram,
        pinv,
        formula,
        residuals,
        condition_residual,
        condition_holds,
        range_angles,
        discrepancy,
        formula_matches,
        consistent: condition_holds == formula_matches,
    })
}
