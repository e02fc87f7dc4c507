use serde::{Deserialize, Serialize};

use super::{check_operator, gram_matrix, phi_block, alternate_operator, GramTriple};
use crate::error::{Error, Result};
use crate::frames::{duality_defect, WeightedFamily};
use crate::hilbert::BlockOperator;
use crate::linalg::{self, CMatrix, Inversion, TolerancePolicy};

/// Which closed-form inverse to build for a triple `(U, W, V)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseMode {
    /// `V = W`: `𝒢_{U,W,W}⁻¹ = 𝒢_{S_{W'}⁻¹ U⁻¹ S_{W'}⁻¹, W, W}`.
    WW,
    /// `W` a dual of `V`: `𝒢_{U,W,V}⁻¹ = 𝒢_{U⁻¹, W, V}`.
    #[serde(rename = "dual_vw")]
    DualVW,
    /// `𝒢_{U,W,V}⁻¹ = 𝒢_{(L_{WV} U S_{W'})⁻¹, W, W}`.
    WV,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramInverse {
    pub inverse: BlockOperator,
    /// The operator argument of the inverse Gram matrix.
    pub operator: CMatrix,
    /// `max(||𝒢 𝒢⁻¹ − I||, ||𝒢⁻¹ 𝒢 − I||)`.
    pub residual: f64,
    /// `κ(𝒢)`.
    pub kappa: f64,
    /// `||𝒢⁻¹_formula − 𝒢⁻¹_direct|| / ||𝒢⁻¹_direct||`.
    pub direct_discrepancy: f64,
}

impl GramInverse {
    pub fn within_tolerance(&self) -> bool {
        self.residual <= 1e-8 * self.kappa.max(1.0) && self.direct_discrepancy <= 1e-7
    }
}

fn not_invertible(m: &CMatrix) -> Error {
    Error::NotInvertible {
        ratio: linalg::sigma_ratio(m),
    }
}

fn invert(m: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
    linalg::inverse_checked(m, tol)?.into_result()
}

/// Closed-form inverse of `𝒢_{U,W,V}` for the chosen mode.
///
/// Fails with `HypothesisViolated` when the mode's structural precondition
/// is not met and with `NotInvertible` when `U` is singular or `W` is not a
/// fusion Riesz basis.
pub fn gram_inverse(t: &GramTriple, mode: InverseMode, tol: &TolerancePolicy) -> Result<GramInverse> {
    let (w, v) = (&t.w, &t.v);
    match mode {
        InverseMode::WW if w != v => {
            return Err(Error::HypothesisViolated("mode WW needs V = W".into()));
        }
        InverseMode::DualVW => {
            let defect = duality_defect(w, v, tol)?;
            if defect > tol.identity_abs {
                return Err(Error::HypothesisViolated(format!(
                    "mode dual_vw needs W dual of V (defect {defect:e})"
                )));
            }
        }
        _ => {}
    }
    let g = gram_matrix(&t.u, w, v, tol)?;
    let u_inv = match linalg::inverse_checked(&t.u, tol)? {
        Inversion::Invertible(m) => m,
        Inversion::NotInvertible { ratio } => return Err(Error::NotInvertible { ratio }),
    };
    if !w.classify(tol).is_riesz_basis {
        return Err(not_invertible(&g));
    }

    let (operator, inv) = match mode {
        InverseMode::WW => {
            let s_unit_inv = invert(&w.unit_weight_family().frame_operator(), tol)?;
            let x = &s_unit_inv * &u_inv * &s_unit_inv;
            let inv = gram_matrix(&x, w, w, tol)?;
            (x, inv)
        }
        InverseMode::DualVW => {
            let inv = gram_matrix(&u_inv, w, v, tol)?;
            (u_inv, inv)
        }
        InverseMode::WV => {
            let l = alternate_operator(w, v, tol)?;
            let inner = l * &t.u * w.unit_weight_family().frame_operator();
            let x = invert(&inner, tol).map_err(|_| not_invertible(&g))?;
            let inv = gram_matrix(&x, w, w, tol)?;
            (x, inv)
        }
    };

    let d = g.nrows();
    let id = linalg::identity(d);
    let residual = linalg::operator_norm(&(&g * &inv - &id)).max(linalg::operator_norm(&(&inv * &g - &id)));
    let direct = invert(&g, tol)?;
    let direct_discrepancy = (&inv - &direct).norm() / direct.norm();
    Ok(GramInverse {
        inverse: BlockOperator::new(w.space().clone(), w.space().clone(), inv)?,
        operator,
        residual,
        kappa: linalg::condition_number(&g),
        direct_discrepancy,
    })
}

/// The seven invertibility conditions for `𝒢_{U,W,W}` and `𝒢_{U,W̃,W}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvReport {
    pub riesz_and_invertible: bool,
    pub gram_invertible: bool,
    pub gram_onto: bool,
    pub gram_injective: bool,
    pub dual_gram_invertible: bool,
    pub dual_gram_onto: bool,
    pub dual_gram_injective: bool,
    pub gram_sigma_ratio: f64,
    pub dual_gram_sigma_ratio: f64,
    /// `||φ_{WW} − φ_{WW}*||`, checked rather than assumed.
    pub phi_self_adjoint_residual: f64,
}

impl InvReport {
    pub fn verdicts(&self) -> [(&'static str, bool); 7] {
        [
            ("riesz_and_u_invertible", self.riesz_and_invertible),
            ("gram_invertible", self.gram_invertible),
            ("gram_onto", self.gram_onto),
            ("gram_one_to_one", self.gram_injective),
            ("dual_gram_invertible", self.dual_gram_invertible),
            ("dual_gram_onto", self.dual_gram_onto),
            ("dual_gram_one_to_one", self.dual_gram_injective),
        ]
    }

    pub fn agree(&self) -> bool {
        let v = self.verdicts();
        v.iter().all(|(_, b)| *b == v[0].1)
    }

    pub fn disagreements(&self) -> Vec<&'static str> {
        let v = self.verdicts();
        let majority = v.iter().filter(|(_, b)| *b).count() * 2 > v.len();
        v.iter().filter(|(_, b)| *b != majority).map(|(n, _)| *n).collect()
    }
}

fn onto(m: &CMatrix, tol: &TolerancePolicy) -> bool {
    linalg::range_basis(m, tol).ncols() == m.nrows()
}

fn injective(m: &CMatrix, tol: &TolerancePolicy) -> bool {
    linalg::null_space(m, tol).ncols() == 0
}

/// Evaluates every condition independently. `W` must be a frame.
pub fn inv_equivalence_battery(u: &CMatrix, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<InvReport> {
    check_operator(u, w.ambient_dim())?;
    w.require_frame(tol)?;
    let dual = w.canonical_dual(tol)?;
    let g = gram_matrix(u, w, w, tol)?;
    let gd = gram_matrix(u, &dual, w, tol)?;
    let phi = phi_block(w, w, tol)?.into_matrix();
    let riesz = w.classify(tol).is_riesz_basis;
    let u_inv = linalg::inverse_checked(u, tol)?.is_invertible();
    Ok(InvReport {
        riesz_and_invertible: riesz && u_inv,
        gram_invertible: linalg::inverse_checked(&g, tol)?.is_invertible(),
        gram_onto: onto(&g, tol),
        gram_injective: injective(&g, tol),
        dual_gram_invertible: linalg::inverse_checked(&gd, tol)?.is_invertible(),
        dual_gram_onto: onto(&gd, tol),
        dual_gram_injective: injective(&gd, tol),
        gram_sigma_ratio: linalg::sigma_ratio(&g),
        dual_gram_sigma_ratio: linalg::sigma_ratio(&gd),
        phi_self_adjoint_residual: linalg::operator_norm(&(&phi - phi.adjoint())),
    })
}
