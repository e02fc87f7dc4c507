//! Reconstruction and the structural identities of Gram matrices, each
//! evaluated numerically and reported with its residual.

use serde::{Deserialize, Serialize};

use super::{alternate_operator, check_operator, gram_matrix, phi_block};
use crate::error::{Error, Result};
use crate::frames::{check_compatible, duality_defect, WeightedFamily};
use crate::hilbert::BlockOperator;
use crate::linalg::{self, CMatrix, TolerancePolicy};

fn require_dual(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<f64> {
    let defect = duality_defect(v, w, tol)?;
    if defect > tol.identity_abs {
        return Err(Error::NotDual { defect });
    }
    Ok(defect)
}

fn relative(diff: &CMatrix, reference: &CMatrix) -> f64 {
    linalg::operator_norm(diff) / linalg::operator_norm(reference).max(1.0)
}

/// Recovers `U` from `g = 𝒢_{U,W,V}` as `T_W g T_W* S_W⁻¹`; `W` must be a dual of `V`.
pub fn reconstruct_operator(
    g: &BlockOperator,
    w: &WeightedFamily,
    v: &WeightedFamily,
    tol: &TolerancePolicy,
) -> Result<CMatrix> {
    require_dual(w, v, tol)?;
    if g.domain() != w.space() || g.codomain() != w.space() {
        return Err(Error::SpaceMismatch);
    }
    let t = w.synthesis();
    Ok(&t * g.matrix() * t.adjoint() * w.frame_operator_inverse(tol)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    /// `𝒢_{U1,W,V} 𝒢_{U2,W,Z}` against `𝒢_{U1 T_W φ_{WZ} T_Z* U2, W, V}`.
    pub general_residual: f64,
    /// `𝒢_{U1,V,W} 𝒢_{U2,V,Z}` against `𝒢_{U1 U2, V, W}`, when `V` is a dual of `Z`.
    pub dual_residual: Option<f64>,
}

impl CompositionReport {
    pub fn holds(&self, bound: f64) -> bool {
        self.general_residual <= bound && self.dual_residual.is_none_or(|r| r <= bound)
    }
}

/// Both composition laws, each side assembled separately. Residuals are
/// relative to `max(1, ||lhs||)`.
pub fn composition_check(
    u1: &CMatrix,
    u2: &CMatrix,
    w: &WeightedFamily,
    v: &WeightedFamily,
    z: &WeightedFamily,
    tol: &TolerancePolicy,
) -> Result<CompositionReport> {
    check_compatible(v, w)?;
    check_compatible(z, w)?;
    check_operator(u1, w.ambient_dim())?;
    check_operator(u2, w.ambient_dim())?;

    let lhs = gram_matrix(u1, w, v, tol)? * gram_matrix(u2, w, z, tol)?;
    let middle = w.synthesis() * phi_block(w, z, tol)?.matrix() * z.analysis();
    let rhs = gram_matrix(&(u1 * middle * u2), w, v, tol)?;
    let general_residual = relative(&(&lhs - &rhs), &lhs);

    let dual_residual = if w.is_frame(tol) && duality_defect(v, z, tol)? <= tol.identity_abs {
        let lhs = gram_matrix(u1, v, w, tol)? * gram_matrix(u2, v, z, tol)?;
        let rhs = gram_matrix(&(u1 * u2), v, w, tol)?;
        Some(relative(&(&lhs - &rhs), &lhs))
    } else {
        None
    };
    Ok(CompositionReport {
        general_residual,
        dual_residual,
    })
}

/// Properties of `𝒢_{V,W}` for a dual `V` of `W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObliqueReport {
    /// `||𝒢² − 𝒢||`.
    pub idempotent_residual: f64,
    /// `||T_V 𝒢 − T_V||`.
    pub synthesis_residual: f64,
    /// `||𝒢 φ_{VW} T_W* − φ_{VW} T_W*||`.
    pub range_residual: f64,
    /// Largest principal angle between `ker 𝒢` and `ker T_V`.
    pub kernel_angle: f64,
    pub kernel_dim: usize,
    /// `||𝒢 − 𝒢*||`; generally nonzero.
    pub self_adjoint_residual: f64,
    pub is_self_adjoint: bool,
}

pub fn oblique_projection_check(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<ObliqueReport> {
    require_dual(v, w, tol)?;
    let g = gram_matrix(&linalg::identity(v.ambient_dim()), v, w, tol)?;
    let tv = v.synthesis();
    let factor = phi_block(v, w, tol)?.into_matrix() * w.analysis();
    let ker_g = linalg::null_space(&g, tol);
    let ker_t = linalg::null_space(&tv, tol);
    let self_adjoint_residual = linalg::operator_norm(&(&g - g.adjoint()));
    Ok(ObliqueReport {
        idempotent_residual: linalg::operator_norm(&(&g * &g - &g)),
        synthesis_residual: linalg::operator_norm(&(&tv * &g - &tv)),
        range_residual: linalg::operator_norm(&(&g * &factor - &factor)),
        kernel_angle: linalg::largest_principal_angle(&ker_g, &ker_t),
        kernel_dim: ker_g.ncols(),
        self_adjoint_residual,
        is_self_adjoint: self_adjoint_residual <= tol.identity_abs,
    })
}

/// For a fusion Riesz basis: orthonormality of the subspaces against
/// `𝒢_W = I` and `𝒢_{W'} = I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrtReport {
    pub orthonormal_subspaces: bool,
    /// `||𝒢_W − I||_F`.
    pub gram_defect: f64,
    /// `||𝒢_{W'} − I||_F`.
    pub unit_gram_defect: f64,
    pub gram_is_identity: bool,
    pub unit_gram_is_identity: bool,
}

impl OrtReport {
    pub fn agree(&self) -> bool {
        self.orthonormal_subspaces == self.gram_is_identity && self.gram_is_identity == self.unit_gram_is_identity
    }
}

/// Orthonormality here is that of the subspaces, `H = ⊕ W_i` orthogonally,
/// so it is read off the unit-weight family: `𝒢_W` does not see the weights
/// of an orthogonal decomposition.
pub fn ort_equivalences(w: &WeightedFamily, tol: &TolerancePolicy) -> Result<OrtReport> {
    if !w.classify(tol).is_riesz_basis {
        return Err(Error::HypothesisViolated("W must be a fusion Riesz basis".into()));
    }
    let n = w.ambient_dim();
    let id = linalg::identity(n);
    let unit = w.unit_weight_family();
    let gram_defect = (gram_matrix(&id, w, w, tol)? - linalg::identity(w.total_dim())).norm();
    let unit_gram_defect = (gram_matrix(&id, &unit, &unit, tol)? - linalg::identity(w.total_dim())).norm();
    Ok(OrtReport {
        orthonormal_subspaces: unit.classify(tol).is_orthonormal_basis,
        gram_defect,
        unit_gram_defect,
        gram_is_identity: gram_defect <= tol.identity_abs,
        unit_gram_is_identity: unit_gram_defect <= tol.identity_abs,
    })
}

/// For a dual `V` of `W`: `V` Riesz, `𝒢_{V,W} = I`, `𝒢_{V,W}` left-invertible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualRieszReport {
    pub v_riesz: bool,
    pub gram_defect: f64,
    pub gram_is_identity: bool,
    pub has_left_inverse: bool,
}

impl DualRieszReport {
    pub fn agree(&self) -> bool {
        self.v_riesz == self.gram_is_identity && self.gram_is_identity == self.has_left_inverse
    }
}

pub fn dual_riesz_check(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<DualRieszReport> {
    require_dual(v, w, tol)?;
    let g = gram_matrix(&linalg::identity(v.ambient_dim()), v, w, tol)?;
    let gram_defect = linalg::identity_defect(&g);
    Ok(DualRieszReport {
        v_riesz: v.classify(tol).is_riesz_basis,
        gram_defect,
        gram_is_identity: gram_defect <= tol.identity_abs,
        has_left_inverse: linalg::null_space(&g, tol).ncols() == 0,
    })
}

/// `||φ_{VW} 𝒢_{U,W,V}* − 𝒢_{U*,V,W} φ_{WV}*||`, relative to the left side.
pub fn adjoint_relation_residual(
    u: &CMatrix,
    w: &WeightedFamily,
    v: &WeightedFamily,
    tol: &TolerancePolicy,
) -> Result<f64> {
    let lhs = phi_block(v, w, tol)?.into_matrix() * gram_matrix(u, w, v, tol)?.adjoint();
    let rhs = gram_matrix(&u.adjoint(), v, w, tol)? * phi_block(w, v, tol)?.into_matrix().adjoint();
    Ok(relative(&(&lhs - &rhs), &lhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedRangeReport {
    pub gram_rank: usize,
    pub factor_rank: usize,
    pub range_angle: f64,
}

impl ClosedRangeReport {
    pub fn holds(&self) -> bool {
        self.gram_rank == self.factor_rank && self.range_angle <= 1e-7
    }
}

/// `ran 𝒢_{U,V,W}` against `ran φ_{VW} T_W*` for a dual `V` of `W`.
pub fn closed_range_check(u: &CMatrix, v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<ClosedRangeReport> {
    require_dual(v, w, tol)?;
    let g = gram_matrix(u, v, w, tol)?;
    let factor = phi_block(v, w, tol)?.into_matrix() * w.analysis();
    Ok(ClosedRangeReport {
        gram_rank: linalg::rank(&g, tol),
        factor_rank: linalg::rank(&factor, tol),
        range_angle: linalg::range_angle(&g, &factor, tol),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LwBoundReport {
    pub lambda_min: f64,
    /// `A_W / λ_max(S_W)`.
    pub bound: f64,
    pub self_adjoint_residual: f64,
}

impl LwBoundReport {
    pub fn holds(&self) -> bool {
        self.lambda_min >= self.bound - 1e-9
    }
}

pub fn lw_lower_bound_check(w: &WeightedFamily, tol: &TolerancePolicy) -> Result<LwBoundReport> {
    let bounds = w.require_frame(tol)?;
    let l = alternate_operator(w, w, tol)?;
    let self_adjoint_residual = linalg::operator_norm(&(&l - l.adjoint()));
    let h = (&l + l.adjoint()).scale(0.5);
    let eig = linalg::hermitian_eigenvalues(&h, tol)?;
    Ok(LwBoundReport {
        lambda_min: eig[0],
        bound: bounds.lower / bounds.upper,
        self_adjoint_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBoundReport {
    pub gram_norm: f64,
    /// `sqrt(B_W B_V) / A_V · ||U||`.
    pub gram_bound: f64,
    /// `||φ_{WV}||`.
    pub phi_norm: f64,
    /// `||S_V⁻¹||`.
    pub phi_bound: f64,
    pub alternate_norm: f64,
    /// `sqrt(B_W B_V) / A_V`, the bound for `||L_{WV}||`.
    pub alternate_bound: f64,
}

impl NormBoundReport {
    pub fn holds(&self) -> bool {
        self.gram_norm <= self.gram_bound + 1e-9
            && self.phi_norm <= self.phi_bound + 1e-12
            && self.alternate_norm <= self.alternate_bound + 1e-9
    }
}

pub fn norm_bound_check(u: &CMatrix, w: &WeightedFamily, v: &WeightedFamily, tol: &TolerancePolicy) -> Result<NormBoundReport> {
    let bv = v.require_frame(tol)?;
    let bw = w.frame_bounds();
    let c = (bw.upper * bv.upper).sqrt() / bv.lower;
    Ok(NormBoundReport {
        gram_norm: linalg::operator_norm(&gram_matrix(u, w, v, tol)?),
        gram_bound: c * linalg::operator_norm(u),
        phi_norm: linalg::operator_norm(phi_block(w, v, tol)?.matrix()),
        phi_bound: linalg::operator_norm(&v.frame_operator_inverse(tol)?),
        alternate_norm: linalg::operator_norm(&alternate_operator(w, v, tol)?),
        alternate_bound: c,
    })
}
