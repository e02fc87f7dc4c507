//! The connector `φ_{VW}`, the cross Gram matrix of an operator
//! `𝒢_{U,W,V} = φ_{WV} T_V* U T_W` and the operators built from it.
//!
//! Every Gram matrix acts on `Σ⊕W_i` in local coordinates (see
//! [`crate::hilbert`]), so with `D = Σ dim W_i` it is a `D x D` matrix.

mod checks;
mod inverse;
mod pinv;

pub use checks::{
    adjoint_relation_residual, closed_range_check, composition_check, dual_riesz_check,
    lw_lower_bound_check, norm_bound_check, oblique_projection_check, ort_equivalences,
    reconstruct_operator, ClosedRangeReport, CompositionReport, DualRieszReport, LwBoundReport,
    NormBoundReport, ObliqueReport, OrtReport,
};
pub use inverse::{gram_inverse, inv_equivalence_battery, GramInverse, InvReport, InverseMode};
pub use pinv::{gram_pinv_formula, PinvReport, PinvVariant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{check_compatible, WeightedFamily};
use crate::hilbert::BlockOperator;
use crate::linalg::{self, CMatrix, TolerancePolicy};

/// `(U, W, V)` with `V` a fusion frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GramTriple {
    pub u: CMatrix,
    pub w: WeightedFamily,
    pub v: WeightedFamily,
}

impl GramTriple {
    pub fn new(u: CMatrix, w: WeightedFamily, v: WeightedFamily, tol: &TolerancePolicy) -> Result<Self> {
        check_operator(&u, w.ambient_dim())?;
        check_compatible(&v, &w)?;
        v.require_frame(tol)?;
        Ok(Self { u, w, v })
    }

    pub fn gram(&self, tol: &TolerancePolicy) -> Result<BlockOperator> {
        cross_gram(self, tol)
    }

    pub fn block(&self, j: usize, i: usize, tol: &TolerancePolicy) -> Result<CMatrix> {
        gram_block(self, j, i, tol)
    }
}

pub(crate) fn check_operator(u: &CMatrix, n: usize) -> Result<()> {
    if u.shape() != (n, n) {
        return Err(Error::dims(format!("({n}, {n}) operator"), format!("{:?}", u.shape())));
    }
    linalg::ensure_finite(u)
}

/// `φ_{VW}: Σ⊕W_i -> Σ⊕V_i`, block-diagonal with blocks `Q^V_i* S_W⁻¹ Q^W_i`.
pub fn phi_block(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<BlockOperator> {
    check_compatible(v, w)?;
    let s_inv = w.frame_operator_inverse(tol)?;
    let mut m = CMatrix::zeros(v.total_dim(), w.total_dim());
    for (i, (vs, ws)) in v.subspaces().iter().zip(w.subspaces()).enumerate() {
        let r = v.space().block_range(i);
        let c = w.space().block_range(i);
        let block = vs.basis().adjoint() * &s_inv * ws.basis();
        m.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(&block);
    }
    BlockOperator::new(w.space().clone(), v.space().clone(), m)
}

/// `𝒢_{U,W,V}` assembled as the product `φ_{WV} · T_V* · U · T_W`.
pub fn cross_gram(t: &GramTriple, tol: &TolerancePolicy) -> Result<BlockOperator> {
    let m = gram_matrix(&t.u, &t.w, &t.v, tol)?;
    BlockOperator::new(t.w.space().clone(), t.w.space().clone(), m)
}

/// Matrix of `𝒢_{U,W,V}` without building a [`GramTriple`].
pub fn gram_matrix(u: &CMatrix, w: &WeightedFamily, v: &WeightedFamily, tol: &TolerancePolicy) -> Result<CMatrix> {
    check_operator(u, w.ambient_dim())?;
    let phi = phi_block(w, v, tol)?;
    Ok(phi.matrix() * v.analysis() * u * w.synthesis())
}

/// `𝒢_{U,W,V}` assembled block by block from
/// `B_{j,i} = w_i v_j π_{W_j} S_V⁻¹ π_{V_j} U` restricted to `W_i`.
pub fn cross_gram_by_blocks(t: &GramTriple, tol: &TolerancePolicy) -> Result<CMatrix> {
    let s_inv = t.v.frame_operator_inverse(tol)?;
    let space = t.w.space();
    let d = space.total_dim();
    let mut m = CMatrix::zeros(d, d);
    for j in 0..t.w.len() {
        let left = t.w.subspaces()[j].basis().adjoint() * &s_inv * t.v.subspaces()[j].projection() * &t.u;
        for i in 0..t.w.len() {
            let scale = t.w.weights()[i] * t.v.weights()[j];
            let block = (&left * t.w.subspaces()[i].basis()).scale(scale);
            let (r, c) = (space.block_range(j), space.block_range(i));
            m.view_mut((r.start, c.start), (r.len(), c.len())).copy_from(&block);
        }
    }
    Ok(m)
}

/// The `(j, i)` block `W_i -> W_j` of `𝒢_{U,W,V}`.
pub fn gram_block(t: &GramTriple, j: usize, i: usize, tol: &TolerancePolicy) -> Result<CMatrix> {
    cross_gram(t, tol)?.block(j, i)
}

/// `L_{VW} = T_V φ_{VW} T_W*`.
pub fn alternate_operator(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<CMatrix> {
    let phi = phi_block(v, w, tol)?;
    Ok(v.synthesis() * phi.matrix() * w.analysis())
}

/// `L_{VW}*` summed as `Σ v_i w_i π_{W_i} S_W⁻¹ π_{V_i}`.
pub fn alternate_adjoint_by_projectors(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<CMatrix> {
    check_compatible(v, w)?;
    let s_inv = w.frame_operator_inverse(tol)?;
    let n = w.ambient_dim();
    let mut out = CMatrix::zeros(n, n);
    for i in 0..w.len() {
        let scale = v.weights()[i] * w.weights()[i];
        out += (w.subspaces()[i].projection() * &s_inv * v.subspaces()[i].projection()).scale(scale);
    }
    Ok(out)
}

/// Schatten `p`-norm: the `ℓ^p` norm of the singular values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchattenNorm {
    pub p: f64,
    pub value: f64,
}

/// `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(m: &CMatrix, p: f64) -> Result<SchattenNorm> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::BadExponent(p));
    }
    let s = linalg::singular_values(m);
    let value = if p.is_infinite() {
        s.first().copied().unwrap_or(0.0)
    } else {
        // scale by σ_max so large p does not overflow
        let top = s.first().copied().unwrap_or(0.0);
        if top == 0.0 {
            0.0
        } else {
            top * s.iter().map(|x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    Ok(SchattenNorm { p, value })
}

#[cfg(test)]
pub(crate) mod testutil {
    use crate::frames::WeightedFamily;
    use crate::linalg::{real_matrix, CMatrix, TolerancePolicy, C64};

    pub fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    pub fn lcg(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut s = seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 0x9e37_79b9_7f4a_7c15;
        CMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            C64::new(a, b)
        })
    }

    pub fn family(n: usize, dims: &[usize], weights: &[f64], seed: u64) -> WeightedFamily {
        let spans: Vec<CMatrix> = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| lcg(n, d, seed * 31 + i as u64))
            .collect();
        WeightedFamily::from_spans(&spans, weights.to_vec(), &tol()).unwrap()
    }

    pub fn lines(vectors: &[&[f64]], weights: &[f64]) -> WeightedFamily {
        let spans: Vec<CMatrix> = vectors.iter().map(|v| real_matrix(v.len(), 1, v)).collect();
        WeightedFamily::from_spans(&spans, weights.to_vec(), &tol()).unwrap()
    }

    /// Coordinate blocks of `C^n` rotated by a random unitary.
    pub fn fusion_onb(n: usize, dims: &[usize], weights: &[f64], seed: u64) -> WeightedFamily {
        let q = crate::linalg::orthonormal_basis(&lcg(n, n, seed), &tol()).unwrap();
        let mut start = 0;
        let spans: Vec<CMatrix> = dims
            .iter()
            .map(|&d| {
                let s = q.columns(start, d).into_owned();
                start += d;
                s
            })
            .collect();
        WeightedFamily::from_spans(&spans, weights.to_vec(), &tol()).unwrap()
    }

    /// Three equiangular lines in R^2 with weights sqrt(2/3).
    pub fn mercedes() -> WeightedFamily {
        let (c, s) = (0.5, 0.75f64.sqrt());
        let w = (2.0f64 / 3.0).sqrt();
        lines(&[&[1.0, 0.0], &[-c, s], &[-c, -s]], &[w, w, w])
    }

    pub fn invertible(n: usize, seed: u64) -> CMatrix {
        lcg(n, n, seed) + crate::linalg::identity(n).scale(1.5)
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::linalg::{identity, real_matrix};

    #[test]
    fn phi_examples() {
        let t = tol();
        let onb = lines(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0]);
        let phi = phi_block(&onb, &onb, &t).unwrap();
        assert!(linalg::identity_defect(phi.matrix()) < 1e-14);

        let w = family(5, &[2, 1, 2], &[0.6, 1.4, 1.9], 1);
        let phi = phi_block(&w, &w, &t).unwrap();
        // oracle: direct S_W⁻¹ computation per block
        let s_inv = w.frame_operator().try_inverse().unwrap();
        for (i, (s, &wi)) in w.subspaces().iter().zip(w.weights()).enumerate() {
            let direct = s.basis().adjoint() * &s_inv * s.basis();
            assert!((phi.block(i, i).unwrap() - &direct).norm() <= 1e-10);
            assert!((direct - identity(s.dim()).scale(1.0 / (wi * wi))).norm() <= 1e-10);
        }

        let v = family(5, &[3, 2, 2], &[1.0, 0.5, 1.2], 2);
        let w = family(5, &[2, 2, 3], &[0.8, 1.1, 0.9], 3);
        let phi = phi_block(&v, &w, &t).unwrap();
        let bound = linalg::operator_norm(&w.frame_operator_inverse(&t).unwrap());
        assert!(linalg::operator_norm(phi.matrix()) <= bound + 1e-12);
        assert_eq!(phi.block(0, 1).unwrap().norm(), 0.0);
    }

    #[test]
    fn cross_gram_examples() {
        let t = tol();
        let onb = fusion_onb(4, &[2, 2], &[1.0, 1.0], 4);
        let g = cross_gram(&GramTriple::new(identity(4), onb.clone(), onb.clone(), &t).unwrap(), &t).unwrap();
        assert!(linalg::identity_defect(g.matrix()) <= 1e-12);

        let w = family(5, &[2, 2, 3], &[1.0, 0.7, 1.3], 5);
        let v = family(5, &[3, 1, 2], &[0.9, 1.2, 0.6], 6);
        let zero = GramTriple::new(CMatrix::zeros(5, 5), w.clone(), v.clone(), &t).unwrap();
        assert_eq!(cross_gram(&zero, &t).unwrap().matrix().norm(), 0.0);

        let u = lcg(5, 5, 7);
        let triple = GramTriple::new(u.clone(), w.clone(), v.clone(), &t).unwrap();
        let g = cross_gram(&triple, &t).unwrap();
        let (bw, bv) = (w.frame_bounds(), v.frame_bounds());
        let bound = (bw.upper * bv.upper).sqrt() / bv.lower * linalg::operator_norm(&u);
        assert!(linalg::operator_norm(g.matrix()) <= bound + 1e-9);
    }

    #[test]
    fn two_assembly_paths_agree() {
        let t = tol();
        let w = family(6, &[2, 3, 2], &[1.0, 0.7, 1.3], 8);
        let v = family(6, &[3, 2, 3], &[0.9, 1.2, 0.6], 9);
        let triple = GramTriple::new(lcg(6, 6, 10), w, v, &t).unwrap();
        let a = cross_gram(&triple, &t).unwrap().into_matrix();
        let b = cross_gram_by_blocks(&triple, &t).unwrap();
        assert!((&a - &b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn gram_block_examples() {
        let t = tol();
        let onb = fusion_onb(5, &[2, 3], &[1.0, 1.0], 11);
        let triple = GramTriple::new(identity(5), onb.clone(), onb, &t).unwrap();
        assert!(linalg::identity_defect(&gram_block(&triple, 1, 1, &t).unwrap()) <= 1e-12);
        assert!(gram_block(&triple, 0, 1, &t).unwrap().norm() <= 1e-12);
        assert!(matches!(gram_block(&triple, 2, 0, &t), Err(Error::IndexOutOfRange { .. })));

        let w = family(5, &[2, 1, 2], &[1.0, 0.7, 1.3], 12);
        let v = family(5, &[2, 2, 2], &[0.9, 1.2, 0.6], 13);
        let triple = GramTriple::new(lcg(5, 5, 14), w.clone(), v.clone(), &t).unwrap();
        let zero = GramTriple::new(CMatrix::zeros(5, 5), w.clone(), v.clone(), &t).unwrap();
        let s_inv = v.frame_operator().try_inverse().unwrap();
        for j in 0..3 {
            for i in 0..3 {
                let direct = (w.subspaces()[j].basis().adjoint() * &s_inv * v.subspaces()[j].projection() * &triple.u * w.subspaces()[i].basis())
                    .scale(w.weights()[i] * v.weights()[j]);
                assert!((gram_block(&triple, j, i, &t).unwrap() - direct).norm() <= 1e-12);
                assert_eq!(gram_block(&zero, j, i, &t).unwrap().norm(), 0.0);
            }
        }
    }

    #[test]
    fn triple_requires_frame_v() {
        let t = tol();
        let w = lines(&[&[1.0, 0.0], &[0.0, 1.0]], &[1.0, 1.0]);
        let degenerate = lines(&[&[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0]);
        assert!(matches!(
            GramTriple::new(identity(2), w.clone(), degenerate, &t),
            Err(Error::NotAFrame { .. })
        ));
        assert!(matches!(
            GramTriple::new(identity(3), w.clone(), w, &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn alternate_operator_examples() {
        let t = tol();
        let w = family(5, &[2, 3, 2], &[1.0, 0.5, 1.5], 15);
        let dual = w.canonical_dual(&t).unwrap();
        assert!(linalg::identity_defect(&alternate_operator(&dual, &w, &t).unwrap()) <= 1e-9);

        let lw = alternate_operator(&w, &w, &t).unwrap();
        assert!((&lw - lw.adjoint()).norm() <= 1e-12);
        assert!(linalg::hermitian_eigenvalues(&lw, &t).unwrap()[0] > 0.0);

        let r = family(5, &[2, 1, 2], &[0.6, 1.4, 1.9], 16);
        let lr = alternate_operator(&r, &r, &t).unwrap();
        assert!((lr - r.unit_weight_family().frame_operator()).norm() <= 1e-10);

        let v = family(5, &[3, 2, 2], &[1.0, 0.8, 1.1], 17);
        let l = alternate_operator(&v, &w, &t).unwrap();
        let adj = alternate_adjoint_by_projectors(&v, &w, &t).unwrap();
        assert!((l.adjoint() - adj).norm() <= 1e-12);
        let (bw, bv) = (w.frame_bounds(), v.frame_bounds());
        assert!(linalg::operator_norm(&l) <= (bw.upper * bv.upper).sqrt() / bw.lower + 1e-12);
        // the projector-sum route used by duality checks agrees
        let l2 = crate::frames::alternate_by_projectors(&v, &w, &t).unwrap();
        assert!((l - l2).norm() <= 1e-12);
    }

    #[test]
    fn schatten_examples() {
        let id = identity(3);
        assert!((schatten_norm(&id, 2.0).unwrap().value - 3f64.sqrt()).abs() < 1e-14);
        assert_eq!(schatten_norm(&id, f64::INFINITY).unwrap().value, 1.0);
        assert_eq!(schatten_norm(&id, 0.5), Err(Error::BadExponent(0.5)));
        assert!(matches!(schatten_norm(&id, f64::NAN), Err(Error::BadExponent(_))));

        let m = lcg(5, 4, 18);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let a = schatten_norm(&m, p).unwrap().value;
            let b = schatten_norm(&m.adjoint(), p).unwrap().value;
            assert!((a - b).abs() <= 1e-12 * a);
            assert!(linalg::operator_norm(&m) <= a + 1e-12);
        }
        let s = lcg(4, 4, 19);
        let tm = lcg(4, 4, 20);
        for p in [1.0, 2.0] {
            let lhs = schatten_norm(&(&s * &tm), p).unwrap().value;
            let rhs = linalg::operator_norm(&s) * schatten_norm(&tm, p).unwrap().value;
            assert!(lhs <= rhs + 1e-12);
        }
        // p = 2 is the Frobenius norm
        assert!((schatten_norm(&m, 2.0).unwrap().value - m.norm()).abs() <= 1e-12);
        let d = real_matrix(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        assert!((schatten_norm(&d, 1.0).unwrap().value - 7.0).abs() < 1e-13);
    }
}
