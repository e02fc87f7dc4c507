//! Dense complex linear-algebra kernel.
//!
//! Everything above this module works with [`CMatrix`] values and asks this
//! module for rank, invertibility and norm decisions. Those decisions are
//! always made relative to the largest singular value so that rescaling an
//! operator never changes its classification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Entries whose modulus is below this are skipped when fixing the phase of
/// an orthonormal column (columns have unit norm, so some entry is at least
/// `1/sqrt(n)`).
const PHASE_PIVOT_MIN: f64 = 1e-8;

/// Numerical thresholds shared by every rank, invertibility and identity
/// decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    /// Singular values at or below `rank_rel * sigma_max * max(rows, cols)`
    /// count as zero.
    pub rank_rel: f64,
    /// A square matrix is invertible iff `sigma_min / sigma_max > invert_rel`.
    pub invert_rel: f64,
    /// Absolute tolerance for "equals identity / zero" checks.
    pub identity_abs: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            rank_rel: 1e-12,
            invert_rel: 1e-10,
            identity_abs: 1e-9,
        }
    }
}

impl TolerancePolicy {
    pub fn new(rank_rel: f64, invert_rel: f64, identity_abs: f64) -> Result<Self> {
        let tol = Self {
            rank_rel,
            invert_rel,
            identity_abs,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.rank_rel, self.invert_rel, self.identity_abs];
        if all.iter().any(|t| !t.is_finite() || *t <= 0.0) {
            return Err(Error::InvalidTolerance(
                "all tolerances must be finite and strictly positive".into(),
            ));
        }
        if self.rank_rel > self.invert_rel {
            return Err(Error::InvalidTolerance(
                "rank_rel must not exceed invert_rel".into(),
            ));
        }
        Ok(())
    }

    /// Absolute singular-value cutoff for a `rows x cols` matrix.
    pub fn rank_cutoff(&self, sigma_max: f64, rows: usize, cols: usize) -> f64 {
        self.rank_rel * sigma_max * rows.max(cols) as f64
    }
}

/// Thin singular value decomposition with singular values sorted descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: CMatrix,
}

impl Svd {
    pub fn new(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let k = rows.min(cols);
        if k == 0 {
            return Self {
                u: CMatrix::zeros(rows, 0),
                singular_values: Vec::new(),
                v_t: CMatrix::zeros(0, cols),
            };
        }
        let svd = to_faer(m).thin_svd().expect("SVD of a finite matrix");
        let u = from_faer(svd.U());
        let v_t = from_faer(svd.V()).adjoint();
        let s: Vec<f64> = (0..k).map(|i| svd.S().column_vector()[i].re).collect();

        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));

        let mut u_sorted = CMatrix::zeros(rows, k);
        let mut v_sorted = CMatrix::zeros(k, cols);
        let mut values = Vec::with_capacity(k);
        for (dst, &src) in order.iter().enumerate() {
            u_sorted.set_column(dst, &u.column(src));
            v_sorted.set_row(dst, &v_t.row(src));
            values.push(s[src].max(0.0));
        }
        Self {
            u: u_sorted,
            singular_values: values,
            v_t: v_sorted,
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank under the policy's relative cutoff.
    pub fn rank(&self, tol: &TolerancePolicy) -> usize {
        let smax = self.sigma_max();
        if smax == 0.0 {
            return 0;
        }
        let cutoff = tol.rank_cutoff(smax, self.u.nrows(), self.v_t.ncols());
        self.singular_values.iter().filter(|&&s| s > cutoff).count()
    }
}

/// Orthonormal basis of `range(m)`, ordered by descending singular value,
/// with each column's first non-negligible entry made real and positive.
pub fn orthonormal_basis(m: &CMatrix, tol: &TolerancePolicy) -> Result<CMatrix> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Err(Error::dims("at least one row and column", format!("{:?}", m.shape())));
    }
    ensure_finite(m)?;
    let q = range_basis(m, tol);
    if q.ncols() == 0 {
        return Err(Error::AllZero);
    }
    Ok(q)
}

/// Like [`orthonormal_basis`] but returns an `n x 0` matrix for rank zero.
pub fn range_basis(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let svd = Svd::new(m);
    let r = svd.rank(tol);
    let mut q = svd.u.columns(0, r).into_owned();
    normalize_phase(&mut q);
    q
}

/// Orthonormal basis of `ker(m)` (an `cols x k` matrix, possibly `k = 0`).
pub fn null_space(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return CMatrix::identity(cols, cols);
    }
    // ker(m) = range(m*)^perp
    let svd = Svd::new(&m.adjoint());
    let r = svd.rank(tol);
    let range = svd.u.columns(0, r).into_owned();
    let mut q = orthogonal_complement(&range, cols);
    normalize_phase(&mut q);
    q
}

/// Orthonormal basis for the orthogonal complement of the orthonormal columns `q`.
pub fn orthogonal_complement(q: &CMatrix, n: usize) -> CMatrix {
    let r = q.ncols();
    if r == 0 {
        return CMatrix::identity(n, n);
    }
    if r >= n {
        return CMatrix::zeros(n, 0);
    }
    let projector = CMatrix::identity(n, n) - q * q.adjoint();
    let svd = Svd::new(&projector);
    svd.u.columns(0, n - r).into_owned()
}

/// Make the first non-negligible entry of each column real and positive.
pub fn normalize_phase(q: &mut CMatrix) {
    for mut col in q.column_iter_mut() {
        if let Some(pivot) = col.iter().find(|z| z.norm() > PHASE_PIVOT_MIN).copied() {
            let phase = pivot.conj() / pivot.norm();
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

/// Real spectrum of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix, tol: &TolerancePolicy) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m, tol)?.0)
}

/// Ascending eigenvalues with the matching unit eigenvectors as columns.
pub fn hermitian_eigen(m: &CMatrix, tol: &TolerancePolicy) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::dims("square matrix", format!("{:?}", m.shape())));
    }
    ensure_finite(m)?;
    let residual = (m - m.adjoint()).norm();
    if residual > tol.identity_abs * m.norm().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let h = (m + m.adjoint()).scale(0.5);
    let eig = to_faer(&h)
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition of a finite Hermitian matrix");
    let raw: Vec<f64> = (0..n).map(|i| eig.S().column_vector()[i].re).collect();
    let basis = from_faer(eig.U());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].total_cmp(&raw[b]));
    let values = order.iter().map(|&i| raw[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &basis.column(src));
    }
    Ok((values, vectors))
}

/// Singular values in descending order (`min(rows, cols)` of them).
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let k = m.nrows().min(m.ncols());
    if k == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = to_faer(m)
        .singular_values()
        .expect("singular values of a finite matrix")
        .into_iter()
        .map(|s| s.max(0.0))
        .collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Spectral norm; zero for the zero (or empty) matrix.
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// `sigma_max / sigma_min`, infinite when singular.
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Numerical rank under the policy's relative cutoff.
pub fn rank(m: &CMatrix, tol: &TolerancePolicy) -> usize {
    Svd::new(m).rank(tol)
}

/// Moore–Penrose pseudo-inverse by singular-value thresholding.
pub fn pseudo_inverse(m: &CMatrix, tol: &TolerancePolicy) -> CMatrix {
    let (rows, cols) = m.shape();
    let svd = Svd::new(m);
    let r = svd.rank(tol);
    let mut out = CMatrix::zeros(cols, rows);
    for k in 0..r {
        let inv = 1.0 / svd.singular_values[k];
        let v = svd.v_t.row(k).adjoint();
        let u_star = svd.u.column(k).adjoint();
        out += (v * u_star).scale(inv);
    }
    out
}

/// Outcome of [`inverse_checked`]. Non-invertibility is a result, not a failure.
#[derive(Debug, Clone, PartialEq)]
pub enum Inversion {
    Invertible(CMatrix),
    NotInvertible { ratio: f64 },
}

impl Inversion {
    pub fn is_invertible(&self) -> bool {
        matches!(self, Inversion::Invertible(_))
    }

    pub fn into_result(self) -> Result<CMatrix> {
        match self {
            Inversion::Invertible(m) => Ok(m),
            Inversion::NotInvertible { ratio } => Err(Error::NotInvertible { ratio }),
        }
    }
}

/// `sigma_min / sigma_max`, or 0 for the zero matrix.
pub fn sigma_ratio(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if hi > 0.0 => lo / hi,
        _ => 0.0,
    }
}

pub fn inverse_checked(m: &CMatrix, tol: &TolerancePolicy) -> Result<Inversion> {
    if m.nrows() != m.ncols() {
        return Err(Error::dims("square matrix", format!("{:?}", m.shape())));
    }
    ensure_finite(m)?;
    let ratio = sigma_ratio(m);
    if ratio <= tol.invert_rel {
        return Ok(Inversion::NotInvertible { ratio });
    }
    match m.clone().try_inverse() {
        Some(inv) => Ok(Inversion::Invertible(inv)),
        None => Ok(Inversion::NotInvertible { ratio }),
    }
}

/// Largest principal angle (radians) between the spans of two orthonormal
/// column sets. Spaces of different dimension are `pi/2` apart.
pub fn largest_principal_angle(a: &CMatrix, b: &CMatrix) -> f64 {
    if a.ncols() != b.ncols() {
        return std::f64::consts::FRAC_PI_2;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    // sin(theta_max) = || (I - a a*) b ||, accurate for small angles.
    let residual = b - a * (a.adjoint() * b);
    operator_norm(&residual).min(1.0).asin()
}

/// Principal angle between `range(a)` and `range(b)` for arbitrary matrices.
pub fn range_angle(a: &CMatrix, b: &CMatrix, tol: &TolerancePolicy) -> f64 {
    largest_principal_angle(&range_basis(a, tol), &range_basis(b, tol))
}

fn to_faer(m: &CMatrix) -> faer::Mat<C64> {
    faer::Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, C64>) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `|| m - I ||` in operator norm.
pub fn identity_defect(m: &CMatrix) -> f64 {
    operator_norm(&(m - CMatrix::identity(m.nrows(), m.ncols())))
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Real matrix from row-major data, embedded in the complex field.
pub fn real_matrix(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    CMatrix::from_row_iterator(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)))
}

pub fn real_diagonal(values: &[f64]) -> CMatrix {
    let n = values.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = C64::new(v, 0.0);
    }
    m
}
