//! Weighted families of subspaces and their frame operators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{DirectSumSpace, Subspace};
use crate::linalg::{self, CMatrix, CVector, TolerancePolicy};

/// Relative spread below which weights count as equal.
const UNIFORM_REL: f64 = 1e-12;

/// `{(W_i, ω_i)}`: an ordered list of subspaces of `C^n` with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedFamily {
    space: DirectSumSpace,
    weights: Vec<f64>,
}

impl WeightedFamily {
    pub fn new(subspaces: Vec<Subspace>, weights: Vec<f64>) -> Result<Self> {
        if subspaces.len() != weights.len() {
            return Err(Error::dims(
                format!("{} weights", subspaces.len()),
                weights.len(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w <= 0.0) {
            return Err(Error::InvalidFamily(format!(
                "weights must be finite and positive, got {w}"
            )));
        }
        let space = DirectSumSpace::new(subspaces)?;
        Ok(Self { space, weights })
    }

    /// Orthonormalize each span and attach the weights.
    pub fn from_spans(spans: &[CMatrix], weights: Vec<f64>, tol: &TolerancePolicy) -> Result<Self> {
        let subspaces = spans
            .iter()
            .map(|s| Subspace::from_span(s, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(subspaces, weights)
    }

    pub fn space(&self) -> &DirectSumSpace {
        &self.space
    }

    pub fn subspaces(&self) -> &[Subspace] {
        self.space.subspaces()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn total_dim(&self) -> usize {
        self.space.total_dim()
    }

    /// Same subspaces, new weights.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        Self::new(self.subspaces().to_vec(), weights)
    }

    /// `W'`: the same subspaces with every weight set to 1.
    pub fn unit_weight_family(&self) -> Self {
        Self {
            space: self.space.clone(),
            weights: vec![1.0; self.len()],
        }
    }

    /// `T_W`, an `n x D` matrix whose column block `i` is `ω_i Q_i`.
    pub fn synthesis(&self) -> CMatrix {
        let mut t = CMatrix::zeros(self.ambient_dim(), self.total_dim());
        for (i, (s, &w)) in self.subspaces().iter().zip(&self.weights).enumerate() {
            let r = self.space.block_range(i);
            t.columns_mut(r.start, r.len()).copy_from(&s.basis().scale(w));
        }
        t
    }

    /// `T_W*`.
    pub fn analysis(&self) -> CMatrix {
        self.synthesis().adjoint()
    }

    /// `S_W = Σ ω_i² π_{W_i}`, summed projector by projector.
    pub fn frame_operator(&self) -> CMatrix {
        let n = self.ambient_dim();
        let mut s = CMatrix::zeros(n, n);
        for (sub, &w) in self.subspaces().iter().zip(&self.weights) {
            s += sub.projection().scale(w * w);
        }
        // exact Hermitian symmetry for the eigensolver
        (&s + s.adjoint()).scale(0.5)
    }

    /// Optimal bounds: extreme eigenvalues of `S_W`.
    pub fn frame_bounds(&self) -> FrameBounds {
        let s = self.frame_operator();
        let eig = linalg::hermitian_eigenvalues(&s, &TolerancePolicy::default())
            .expect("frame operator is Hermitian by construction");
        FrameBounds {
            lower: eig.first().copied().unwrap_or(0.0).max(0.0),
            upper: eig.last().copied().unwrap_or(0.0).max(0.0),
        }
    }

    pub fn is_frame(&self, tol: &TolerancePolicy) -> bool {
        self.frame_bounds().is_frame(tol)
    }

    /// `S_W⁻¹`, or `NotAFrame` when the lower bound vanishes.
    pub fn frame_operator_inverse(&self, tol: &TolerancePolicy) -> Result<CMatrix> {
        let bounds = self.require_frame(tol)?;
        match linalg::inverse_checked(&self.frame_operator(), tol)? {
            linalg::Inversion::Invertible(inv) => Ok(inv),
            linalg::Inversion::NotInvertible { .. } => Err(bounds.not_a_frame()),
        }
    }

    pub(crate) fn require_frame(&self, tol: &TolerancePolicy) -> Result<FrameBounds> {
        let bounds = self.frame_bounds();
        if bounds.is_frame(tol) {
            Ok(bounds)
        } else {
            Err(bounds.not_a_frame())
        }
    }

    pub fn classify(&self, tol: &TolerancePolicy) -> Classification {
        let n = self.ambient_dim();
        let bounds = self.frame_bounds();
        let is_complete = linalg::rank(&self.unit_weight_family().synthesis(), tol) == n;
        let is_frame = bounds.is_frame(tol);
        let is_riesz_basis = is_frame
            && self.total_dim() == n
            && linalg::inverse_checked(&self.synthesis(), tol)
                .map(|inv| inv.is_invertible())
                .unwrap_or(false);
        let is_parseval = linalg::identity_defect(&self.frame_operator()) <= tol.identity_abs;
        let is_uniform = weights_uniform(&self.weights);
        let one_uniform = self.weights.iter().all(|w| (w - 1.0).abs() <= UNIFORM_REL);
        Classification {
            is_bessel: true,
            is_frame,
            is_riesz_basis,
            is_parseval,
            is_orthonormal_basis: is_parseval && one_uniform,
            is_uniform,
            is_complete,
        }
    }

    /// `W̃ = {(S_W⁻¹ W_i, ω_i)}`.
    pub fn canonical_dual(&self, tol: &TolerancePolicy) -> Result<Self> {
        let s_inv = self.frame_operator_inverse(tol)?;
        let mut subspaces = Vec::with_capacity(self.len());
        for (i, sub) in self.subspaces().iter().enumerate() {
            let image = sub.image(&s_inv, tol)?;
            if image.dim() != sub.dim() {
                return Err(Error::HypothesisViolated(format!(
                    "S_W^-1 collapsed subspace {i} from dimension {} to {}",
                    sub.dim(),
                    image.dim()
                )));
            }
            subspaces.push(image);
        }
        Self::new(subspaces, self.weights.clone())
    }

    /// Checks `ω_i² π_i S_W⁻¹ π_j = δ_ij π_j` for every pair.
    pub fn riesz_delta_test(&self, tol: &TolerancePolicy) -> Result<DeltaTest> {
        let s_inv = self.frame_operator_inverse(tol)?;
        let projections: Vec<CMatrix> = self.subspaces().iter().map(Subspace::projection).collect();
        let mut residual = 0.0f64;
        for (i, (pi, &wi)) in projections.iter().zip(&self.weights).enumerate() {
            let left = (pi * &s_inv).scale(wi * wi);
            for (j, pj) in projections.iter().enumerate() {
                let mut diff = &left * pj;
                if i == j {
                    diff -= pj;
                }
                residual = residual.max(linalg::operator_norm(&diff));
            }
        }
        Ok(DeltaTest {
            holds: residual <= tol.identity_abs,
            residual,
        })
    }

    /// Columns `ω_i f_ij`, with `f_ij` the supplied local bases or the stored
    /// orthonormal ones.
    pub fn flatten_local(&self, local: Option<&[CMatrix]>, tol: &TolerancePolicy) -> Result<CMatrix> {
        let Some(local) = local else {
            return Ok(self.synthesis());
        };
        if local.len() != self.len() {
            return Err(Error::dims(self.len(), local.len()));
        }
        let n = self.ambient_dim();
        let mut out = CMatrix::zeros(n, self.total_dim());
        for (i, (f, sub)) in local.iter().zip(self.subspaces()).enumerate() {
            if f.nrows() != n || f.ncols() != sub.dim() {
                return Err(Error::LocalBasisMismatch { index: i });
            }
            linalg::ensure_finite(f)?;
            // f must lie in W_i and have full column rank there
            let outside = f - sub.projection() * f;
            let spans = linalg::rank(f, tol) == sub.dim();
            if !spans || linalg::operator_norm(&outside) > tol.identity_abs * linalg::operator_norm(f).max(1.0) {
                return Err(Error::LocalBasisMismatch { index: i });
            }
            let r = self.space.block_range(i);
            out.columns_mut(r.start, r.len()).copy_from(&f.scale(self.weights[i]));
        }
        Ok(out)
    }

    /// Every Riesz characterization evaluated independently.
    pub fn riesz_equivalences(&self, tol: &TolerancePolicy) -> RieszEquivalences {
        let n = self.ambient_dim();
        let d = self.total_dim();
        let is_frame = self.is_frame(tol);
        let t = self.synthesis();
        let t_star = self.analysis();

        // Remark: uniqueness of f = Σ f_i does not depend on the weights.
        let unit = self.unit_weight_family().synthesis();
        let decomposition_unique = linalg::rank(&unit, tol) == d && d == n;

        let synthesis_injective = linalg::rank(&t, tol) == d;
        let analysis_surjective = linalg::rank(&t_star, tol) == d;
        let synthesis_bijective = d == n && linalg::inverse_checked(&t, tol).is_ok_and(|r| r.is_invertible());
        let analysis_bijective =
            d == n && linalg::inverse_checked(&t_star, tol).is_ok_and(|r| r.is_invertible());

        // optimal constants in C Σ||f_j||² ≤ ||Σ ω_j f_j||² ≤ D Σ||f_j||²
        let gram = linalg::hermitian_eigenvalues(&(t.adjoint() * &t), tol).unwrap_or_default();
        let c = gram.first().copied().unwrap_or(0.0).max(0.0);
        let dd = gram.last().copied().unwrap_or(0.0);
        let complete = linalg::rank(&unit, tol) == n;
        let inequality_holds = complete && dd > 0.0 && c > tol.invert_rel * dd;

        let flat = self.flatten_local(None, tol).expect("stored bases are valid");
        let flatten_invertible =
            d == n && linalg::inverse_checked(&flat, tol).is_ok_and(|r| r.is_invertible());

        let delta = self.riesz_delta_test(tol).ok();

        RieszEquivalences {
            is_frame,
            decomposition_unique,
            synthesis_injective,
            analysis_surjective,
            synthesis_bijective,
            analysis_bijective,
            inequality_lower: c,
            inequality_upper: dd,
            inequality_holds,
            flatten_invertible,
            delta_residual: delta.map(|t| t.residual),
            delta_holds: delta.is_some_and(|t| t.holds),
            classify_riesz: self.classify(tol).is_riesz_basis,
        }
    }
}

fn weights_uniform(weights: &[f64]) -> bool {
    let max = weights.iter().copied().fold(0.0f64, f64::max);
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    max - min <= UNIFORM_REL * max
}

/// Optimal fusion frame bounds `A_W ≤ B_W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_frame(&self, tol: &TolerancePolicy) -> bool {
        self.upper > 0.0 && self.lower > tol.invert_rel * self.upper
    }

    fn not_a_frame(&self) -> Error {
        Error::NotAFrame {
            lower: self.lower,
            upper: self.upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub is_bessel: bool,
    pub is_frame: bool,
    pub is_riesz_basis: bool,
    pub is_parseval: bool,
    pub is_orthonormal_basis: bool,
    pub is_uniform: bool,
    pub is_complete: bool,
}

impl Classification {
    /// The implications ONB ⇒ Riesz ⇒ frame ⇒ complete and ONB ⇒ Parseval.
    pub fn hierarchy_consistent(&self) -> bool {
        let imp = |a: bool, b: bool| !a || b;
        imp(self.is_orthonormal_basis, self.is_riesz_basis)
            && imp(self.is_riesz_basis, self.is_frame)
            && imp(self.is_frame, self.is_complete)
            && imp(self.is_orthonormal_basis, self.is_parseval)
            && imp(self.is_orthonormal_basis, self.is_uniform)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaTest {
    pub holds: bool,
    pub residual: f64,
}

/// Independent verdicts for "W is a fusion Riesz basis".
///
/// The injectivity of `T_W` and surjectivity of `T_W*` characterize Riesz
/// bases only among fusion frames, so [`RieszEquivalences::verdicts`] gates
/// them on `is_frame`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszEquivalences {
    pub is_frame: bool,
    pub decomposition_unique: bool,
    pub synthesis_injective: bool,
    pub analysis_surjective: bool,
    pub synthesis_bijective: bool,
    pub analysis_bijective: bool,
    pub inequality_lower: f64,
    pub inequality_upper: f64,
    pub inequality_holds: bool,
    pub flatten_invertible: bool,
    pub delta_residual: Option<f64>,
    pub delta_holds: bool,
    pub classify_riesz: bool,
}

impl RieszEquivalences {
    pub fn verdicts(&self) -> [(&'static str, bool); 9] {
        [
            ("riesz_decomposition", self.decomposition_unique),
            ("synthesis_injective", self.is_frame && self.synthesis_injective),
            ("analysis_surjective", self.is_frame && self.analysis_surjective),
            ("synthesis_bijective", self.synthesis_bijective),
            ("analysis_bijective", self.analysis_bijective),
            ("riesz_inequality", self.inequality_holds),
            ("flattened_riesz_basis", self.flatten_invertible),
            ("delta_identity", self.delta_holds),
            ("classify", self.classify_riesz),
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

/// `L_{VW} = Σ v_i w_i π_{V_i} S_W⁻¹ π_{W_i}`.
pub(crate) fn alternate_by_projectors(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<CMatrix> {
    check_compatible(v, w)?;
    let s_inv = w.frame_operator_inverse(tol)?;
    let n = w.ambient_dim();
    let mut l = CMatrix::zeros(n, n);
    for ((vs, &vw), (ws, &ww)) in v.subspaces().iter().zip(v.weights()).zip(w.subspaces().iter().zip(w.weights())) {
        l += (vs.projection() * &s_inv * ws.projection()).scale(vw * ww);
    }
    Ok(l)
}

pub(crate) fn check_compatible(v: &WeightedFamily, w: &WeightedFamily) -> Result<()> {
    if v.ambient_dim() != w.ambient_dim() {
        return Err(Error::dims(
            format!("ambient dimension {}", w.ambient_dim()),
            v.ambient_dim(),
        ));
    }
    if v.len() != w.len() {
        return Err(Error::dims(format!("{} subspaces", w.len()), v.len()));
    }
    Ok(())
}

/// `||T_V φ_{VW} T_W* − I||`; `V` is a dual of `W` when this is within tolerance.
pub fn duality_defect(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<f64> {
    Ok(linalg::identity_defect(&alternate_by_projectors(v, w, tol)?))
}

pub fn is_dual(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<bool> {
    Ok(duality_defect(v, w, tol)? <= tol.identity_abs)
}

/// `V` is a pseudo-dual of `W` when `T_V φ_{VW} T_W*` is invertible.
pub fn is_pseudo_dual(v: &WeightedFamily, w: &WeightedFamily, tol: &TolerancePolicy) -> Result<bool> {
    Ok(linalg::inverse_checked(&alternate_by_projectors(v, w, tol)?, tol)?.is_invertible())
}

/// Weighted frame energy `Σ ω_i² ||π_{W_i} f||²`.
pub fn frame_energy(w: &WeightedFamily, f: &CVector) -> f64 {
    w.subspaces()
        .iter()
        .zip(w.weights())
        .map(|(s, &wi)| wi * wi * (s.basis().adjoint() * f).norm_squared())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_matrix, C64};

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    fn lcg(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut s = seed.wrapping_mul(0x2545_f491_4f6c_dd1d) ^ 0x9e37_79b9_7f4a_7c15;
        CMatrix::from_fn(rows, cols, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
            C64::new(a, b)
        })
    }

    fn family(n: usize, dims: &[usize], weights: &[f64], seed: u64) -> WeightedFamily {
        let spans: Vec<CMatrix> = dims
            .iter()
            .enumerate()
            .map(|(i, &d)| lcg(n, d, seed * 31 + i as u64))
            .collect();
        WeightedFamily::from_spans(&spans, weights.to_vec(), &tol()).unwrap()
    }

    fn lines(vectors: &[&[f64]], weights: &[f64]) -> WeightedFamily {
        let spans: Vec<CMatrix> = vectors
            .iter()
            .map(|v| real_matrix(v.len(), 1, v))
            .collect();
        WeightedFamily::from_spans(&spans, weights.to_vec(), &tol()).unwrap()
    }

    fn onb_pair(weights: &[f64]) -> WeightedFamily {
        lines(&[&[1.0, 0.0], &[0.0, 1.0]], weights)
    }

    fn skew_pair() -> WeightedFamily {
        let r = 0.5f64.sqrt();
        lines(&[&[1.0, 0.0], &[r, r]], &[1.0, 1.0])
    }

    fn onb_plus_diagonal() -> WeightedFamily {
        let r = 0.5f64.sqrt();
        lines(&[&[1.0, 0.0], &[0.0, 1.0], &[r, r]], &[1.0, 1.0, 1.0])
    }

    fn three_lines() -> WeightedFamily {
        let (c, s) = (0.5, 0.75f64.sqrt());
        lines(&[&[1.0, 0.0], &[-c, s], &[-c, -s]], &[1.0, 1.0, 1.0])
    }

    #[test]
    fn rejects_bad_weights() {
        let sub = Subspace::from_span(&linalg::identity(2), &tol()).unwrap();
        assert!(matches!(
            WeightedFamily::new(vec![sub.clone()], vec![0.0]),
            Err(Error::InvalidFamily(_))
        ));
        assert!(matches!(
            WeightedFamily::new(vec![sub], vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn synthesis_examples() {
        assert!((onb_pair(&[1.0, 1.0]).synthesis() - linalg::identity(2)).norm() < 1e-15);
        let t = onb_pair(&[2.0, 1.0]).synthesis();
        assert!((t - linalg::real_diagonal(&[2.0, 1.0])).norm() < 1e-15);
        let w = family(6, &[2, 2, 3], &[1.0, 0.7, 1.3], 1);
        let t = w.synthesis();
        assert_eq!(t.shape(), (6, 7));
        let b = w.frame_bounds().upper;
        assert!(linalg::operator_norm(&t).powi(2) <= b + 1e-10);
    }

    #[test]
    fn analysis_is_adjoint() {
        assert!((onb_pair(&[2.0, 1.0]).analysis() - linalg::real_diagonal(&[2.0, 1.0])).norm() < 1e-15);
        let w = family(6, &[2, 2, 3], &[1.0, 0.7, 1.3], 2);
        assert_eq!(w.analysis(), w.synthesis().adjoint());
    }

    #[test]
    fn frame_operator_examples() {
        assert!(linalg::identity_defect(&onb_pair(&[1.0, 1.0]).frame_operator()) < 1e-15);
        let expected = real_matrix(2, 2, &[1.5, 0.5, 0.5, 0.5]);
        assert!((skew_pair().frame_operator() - expected).norm() < 1e-14);
        let expected = real_matrix(2, 2, &[1.5, 0.5, 0.5, 1.5]);
        assert!((onb_plus_diagonal().frame_operator() - expected).norm() < 1e-14);
        let w = family(6, &[2, 2, 3], &[1.0, 0.7, 1.3], 3);
        let s = w.frame_operator();
        let t = w.synthesis();
        assert!((&s - &t * t.adjoint()).norm() <= 1e-12 * s.norm());
    }

    #[test]
    fn frame_bounds_examples() {
        let b = onb_pair(&[1.0, 1.0]).frame_bounds();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 1.0).abs() < 1e-14);
        let b = onb_plus_diagonal().frame_bounds();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 2.0).abs() < 1e-14);
        let b = skew_pair().frame_bounds();
        let h = 0.5f64.sqrt();
        assert!((b.lower - (1.0 - h)).abs() < 1e-14 && (b.upper - (1.0 + h)).abs() < 1e-14);

        let w = family(6, &[2, 2, 3], &[1.0, 0.7, 1.3], 4);
        let b = w.frame_bounds();
        let samples = lcg(6, 100, 99);
        for k in 0..100 {
            let f = samples.column(k).normalize();
            let e = frame_energy(&w, &f);
            assert!(b.lower - 1e-9 <= e && e <= b.upper + 1e-9);
        }
    }

    #[test]
    fn frame_bounds_are_attained() {
        let w = family(5, &[2, 1, 3], &[0.8, 1.1, 1.6], 5);
        let b = w.frame_bounds();
        let (vals, vecs) = linalg::hermitian_eigen(&w.frame_operator(), &tol()).unwrap();
        let lo: CVector = vecs.column(0).into_owned();
        let hi: CVector = vecs.column(vals.len() - 1).into_owned();
        assert!((frame_energy(&w, &lo) - b.lower).abs() <= 1e-9);
        assert!((frame_energy(&w, &hi) - b.upper).abs() <= 1e-9);
    }

    #[test]
    fn classify_examples() {
        let c = onb_pair(&[1.0, 1.0]).classify(&tol());
        assert!(c.is_orthonormal_basis && c.is_riesz_basis && c.is_parseval && c.is_frame && c.is_complete);

        let same = lines(&[&[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0]).classify(&tol());
        assert!(!same.is_complete && !same.is_frame && !same.is_riesz_basis);

        let skew = skew_pair();
        let c = skew.classify(&tol());
        assert!(c.is_riesz_basis && !c.is_parseval && !c.is_orthonormal_basis);
        assert!(linalg::sigma_ratio(&skew.synthesis()) > 0.1);

        let c = onb_pair(&[2.0, 1.0]).classify(&tol());
        assert!(c.is_riesz_basis && !c.is_parseval && !c.is_uniform);
        for cls in [c, same, three_lines().classify(&tol())] {
            assert!(cls.is_bessel && cls.hierarchy_consistent());
        }
    }

    #[test]
    fn riesz_delta_examples() {
        let t = onb_pair(&[1.0, 1.0]).riesz_delta_test(&tol()).unwrap();
        assert!(t.holds && t.residual <= 1e-12);

        let red = three_lines();
        assert!(!red.classify(&tol()).is_riesz_basis);
        assert!(!red.riesz_delta_test(&tol()).unwrap().holds);

        let riesz = family(5, &[2, 1, 2], &[0.6, 1.4, 1.9], 6);
        assert!(riesz.classify(&tol()).is_riesz_basis);
        assert!(riesz.riesz_delta_test(&tol()).unwrap().holds);

        let same = lines(&[&[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0]);
        assert!(matches!(same.riesz_delta_test(&tol()), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn canonical_dual_examples() {
        let t = tol();
        let onb = onb_pair(&[1.0, 1.0]);
        let dual = onb.canonical_dual(&t).unwrap();
        for (a, b) in dual.subspaces().iter().zip(onb.subspaces()) {
            assert!((a.projection() - b.projection()).norm() < 1e-13);
        }
        assert_eq!(dual.weights(), onb.weights());

        let parseval = three_lines().with_weights(vec![(2.0f64 / 3.0).sqrt(); 3]).unwrap();
        assert!(parseval.classify(&t).is_parseval);
        let dual = parseval.canonical_dual(&t).unwrap();
        for (a, b) in dual.subspaces().iter().zip(parseval.subspaces()) {
            assert!((a.projection() - b.projection()).norm() < 1e-12);
        }

        let w = family(6, &[2, 3, 2, 2], &[1.0, 0.5, 1.5, 0.8], 7);
        let dual = w.canonical_dual(&t).unwrap();
        assert!(duality_defect(&dual, &w, &t).unwrap() <= 1e-9);
        assert!(dual.is_frame(&t));
        // oracle: reconstruction f = Σ ω_i² π_{W̃_i} S⁻¹ π_{W_i} f on random vectors
        let s_inv = w.frame_operator_inverse(&t).unwrap();
        let f = lcg(6, 100, 8);
        let mut weighted = CMatrix::zeros(6, 100);
        for ((dv, wv), &wi) in dual.subspaces().iter().zip(w.subspaces()).zip(w.weights()) {
            weighted += (dv.projection() * &s_inv * wv.projection() * &f).scale(wi * wi);
        }
        assert!((weighted - &f).norm() <= 1e-9 * f.norm());
    }

    #[test]
    fn canonical_dual_rejects_non_frames() {
        let same = lines(&[&[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0]);
        assert!(matches!(same.canonical_dual(&tol()), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn duality_defect_examples() {
        let t = tol();
        let p = three_lines().with_weights(vec![(2.0f64 / 3.0).sqrt(); 3]).unwrap();
        assert!(duality_defect(&p, &p, &t).unwrap() <= 1e-12);

        // ONB pair against the same pair rotated by 90 degrees: the lines swap
        // roles, so L = π_{e2} π_{e1} + π_{e1} π_{e2} = 0
        let a = onb_pair(&[1.0, 1.0]);
        let b = lines(&[&[0.0, 1.0], &[-1.0, 0.0]], &[1.0, 1.0]);
        assert!(duality_defect(&b, &a, &t).unwrap() >= 0.5);
        assert!(!is_pseudo_dual(&b, &a, &t).unwrap());
    }

    #[test]
    fn pseudo_dual_examples() {
        let t = tol();
        let w = family(5, &[2, 2, 3], &[1.0, 0.9, 1.2], 10);
        let dual = w.canonical_dual(&t).unwrap();
        assert!(is_pseudo_dual(&dual, &w, &t).unwrap());
        assert!(is_pseudo_dual(&w, &w, &t).unwrap());

        // every V_i inside the e1-e2 plane of C^3: rank(L_VW) ≤ 2
        let plane = lines(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]], &[1.0; 3]);
        let w3 = lines(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]], &[1.0; 3]);
        assert!(!is_pseudo_dual(&plane, &w3, &t).unwrap());
        assert!(linalg::rank(&alternate_by_projectors(&plane, &w3, &t).unwrap(), &t) < 3);
    }

    #[test]
    fn unit_weight_family_examples() {
        let t = tol();
        let w = onb_pair(&[2.0, 1.0]);
        let u = w.unit_weight_family();
        assert_eq!(u.weights(), &[1.0, 1.0]);
        assert_eq!(u.subspaces(), w.subspaces());
        assert_eq!(u.unit_weight_family(), u);
        for seed in 0..5 {
            let r = family(4, &[1, 2, 1], &[0.5, 1.7, 1.1], 20 + seed);
            assert_eq!(r.classify(&t).is_riesz_basis, r.unit_weight_family().classify(&t).is_riesz_basis);
        }
    }

    #[test]
    fn flatten_local_examples() {
        let t = tol();
        assert!(linalg::identity_defect(&onb_pair(&[1.0, 1.0]).flatten_local(None, &t).unwrap()) < 1e-15);

        let w = family(5, &[2, 1, 2], &[0.6, 1.4, 1.9], 11);
        // non-orthonormal local Riesz bases: mix each basis by an invertible matrix
        let local: Vec<CMatrix> = w
            .subspaces()
            .iter()
            .enumerate()
            .map(|(i, s)| s.basis() * (linalg::identity(s.dim()).scale(2.0) + lcg(s.dim(), s.dim(), 40 + i as u64)))
            .collect();
        let flat = w.flatten_local(Some(&local), &t).unwrap();
        assert!(linalg::inverse_checked(&flat, &t).unwrap().is_invertible());
        assert!(w.classify(&t).is_riesz_basis);

        let red = three_lines();
        assert_eq!(red.flatten_local(None, &t).unwrap().shape(), (2, 3));

        let mut bad = local.clone();
        bad[1] = lcg(5, 1, 77);
        assert_eq!(w.flatten_local(Some(&bad), &t), Err(Error::LocalBasisMismatch { index: 1 }));
    }

    #[test]
    fn riesz_weight_bound() {
        let w = family(6, &[2, 2, 2], &[0.6, 1.4, 1.9], 12);
        let eq = w.riesz_equivalences(&tol());
        assert!(eq.agree() && eq.classify_riesz);
        for &wi in w.weights() {
            assert!(eq.inequality_lower.sqrt() <= wi + 1e-12);
            assert!(wi <= eq.inequality_upper.sqrt() + 1e-12);
        }
    }

    #[test]
    fn riesz_equivalences_agree_on_mixed_families() {
        let t = tol();
        let cases = vec![
            onb_pair(&[1.0, 1.0]),
            skew_pair(),
            three_lines(),
            lines(&[&[1.0, 0.0], &[1.0, 0.0]], &[1.0, 1.0]),
            lines(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]], &[1.0, 2.0]),
            family(6, &[2, 2, 2], &[0.6, 1.4, 1.9], 13),
            family(6, &[3, 2, 3], &[1.0, 1.0, 1.0], 14),
        ];
        for w in cases {
            let eq = w.riesz_equivalences(&t);
            assert!(eq.agree(), "{:?}", eq.disagreements());
        }
    }

    #[test]
    fn riesz_basis_phi_acts_by_inverse_square_weights() {
        // φ_{WW} block i = Q_i* S_W⁻¹ Q_i = I / ω_i²
        let t = tol();
        let w = family(5, &[2, 1, 2], &[0.6, 1.4, 1.9], 15);
        let s_inv = w.frame_operator_inverse(&t).unwrap();
        for (s, &wi) in w.subspaces().iter().zip(w.weights()) {
            let block = s.basis().adjoint() * &s_inv * s.basis();
            let expected = linalg::identity(s.dim()).scale(1.0 / (wi * wi));
            assert!((block - expected).norm() <= 1e-10);
        }
    }
}
