//! Subspaces of `C^n` and the direct-sum space built from a list of them.
//!
//! An element `{f_i}` of the direct sum is stored in local coordinates: block
//! `i` holds the coefficients of `f_i` in subspace `i`'s orthonormal basis.
//! That keeps `f_i ∈ W_i` true by construction and makes every operator
//! between direct sums a small dense matrix.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, TolerancePolicy};

/// A subspace of `C^n` represented by a column-orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: CMatrix,
}

impl Subspace {
    /// Orthonormalize `span`; the dimension is its numerical rank.
    pub fn from_span(span: &CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        let basis = linalg::orthonormal_basis(span, tol)?;
        Ok(Self { basis })
    }

    /// Keep `basis` bit-for-bit after checking `basis* basis = I`.
    pub fn from_orthonormal(basis: CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        linalg::ensure_finite(&basis)?;
        let (n, d) = basis.shape();
        if d == 0 || d > n {
            return Err(Error::dims(format!("1..={n} basis columns"), d));
        }
        let defect = (basis.adjoint() * &basis - linalg::identity(d)).norm();
        if defect > tol.identity_abs {
            return Err(Error::InvalidFamily(format!(
                "basis columns are not orthonormal (defect {defect:e})"
            )));
        }
        Ok(Self { basis })
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// Orthogonal projection `basis * basis*`.
    pub fn projection(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Local coordinates to the ambient vector they describe.
    pub fn embed(&self, local: &CVector) -> Result<CVector> {
        if local.len() != self.dim() {
            return Err(Error::dims(self.dim(), local.len()));
        }
        Ok(&self.basis * local)
    }

    /// Coordinates of the orthogonal projection of `ambient` onto the subspace.
    pub fn restrict(&self, ambient: &CVector) -> Result<CVector> {
        if ambient.len() != self.ambient_dim() {
            return Err(Error::dims(self.ambient_dim(), ambient.len()));
        }
        Ok(self.basis.adjoint() * ambient)
    }

    /// Image of the subspace under `op`, re-orthonormalized.
    pub fn image(&self, op: &CMatrix, tol: &TolerancePolicy) -> Result<Self> {
        if op.ncols() != self.ambient_dim() {
            return Err(Error::dims(self.ambient_dim(), op.ncols()));
        }
        Self::from_span(&(op * &self.basis), tol)
    }
}

pub fn make_subspace(span: &CMatrix, tol: &TolerancePolicy) -> Result<Subspace> {
    Subspace::from_span(span, tol)
}

pub fn projection(sub: &Subspace) -> CMatrix {
    sub.projection()
}

/// The direct sum `(Σ⊕W_i)_{ℓ²}` over a finite, ordered list of subspaces.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumSpace {
    ambient_dim: usize,
    subspaces: Vec<Subspace>,
    offsets: Vec<usize>,
}

impl DirectSumSpace {
    pub fn new(subspaces: Vec<Subspace>) -> Result<Self> {
        let first = subspaces
            .first()
            .ok_or_else(|| Error::InvalidFamily("at least one subspace is required".into()))?;
        let ambient_dim = first.ambient_dim();
        if let Some(bad) = subspaces.iter().find(|s| s.ambient_dim() != ambient_dim) {
            return Err(Error::dims(ambient_dim, bad.ambient_dim()));
        }
        let mut offsets = Vec::with_capacity(subspaces.len() + 1);
        offsets.push(0);
        for s in &subspaces {
            offsets.push(offsets.last().unwrap() + s.dim());
        }
        Ok(Self {
            ambient_dim,
            subspaces,
            offsets,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn block_dims(&self) -> Vec<usize> {
        self.subspaces.iter().map(Subspace::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Coordinate range of block `i`.
    pub fn block_range(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Maps `{f_i}` (local coordinates) to the stacked ambient vectors `[f_1; ...; f_N]`.
    pub fn stacked_embedding(&self) -> CMatrix {
        let n = self.ambient_dim;
        let mut out = CMatrix::zeros(n * self.len(), self.total_dim());
        for (i, s) in self.subspaces.iter().enumerate() {
            out.view_mut((i * n, self.offsets[i]), (n, s.dim()))
                .copy_from(s.basis());
        }
        out
    }
}

/// An element `{f_i}` of a direct-sum space, in local coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectSumVector {
    space: DirectSumSpace,
    coords: CVector,
}

impl DirectSumVector {
    pub fn new(space: DirectSumSpace, coords: CVector) -> Result<Self> {
        if coords.len() != space.total_dim() {
            return Err(Error::dims(space.total_dim(), coords.len()));
        }
        Ok(Self { space, coords })
    }

    pub fn zeros(space: DirectSumSpace) -> Self {
        let coords = CVector::zeros(space.total_dim());
        Self { space, coords }
    }

    /// Build from ambient vectors, projecting each onto its subspace.
    pub fn from_ambient(space: DirectSumSpace, parts: &[CVector]) -> Result<Self> {
        if parts.len() != space.len() {
            return Err(Error::dims(space.len(), parts.len()));
        }
        let mut coords = CVector::zeros(space.total_dim());
        for (i, (s, f)) in space.subspaces().iter().zip(parts).enumerate() {
            coords
                .rows_mut(space.block_range(i).start, s.dim())
                .copy_from(&s.restrict(f)?);
        }
        Ok(Self { space, coords })
    }

    pub fn space(&self) -> &DirectSumSpace {
        &self.space
    }

    pub fn coords(&self) -> &CVector {
        &self.coords
    }

    pub fn block(&self, i: usize) -> CVector {
        let r = self.space.block_range(i);
        self.coords.rows(r.start, r.len()).into_owned()
    }

    /// `f_i` as a vector of the ambient space.
    pub fn embedded(&self, i: usize) -> CVector {
        self.space.subspaces()[i].basis() * self.block(i)
    }

    /// `sqrt(Σ ||f_i||²)`.
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }
}

/// A bounded operator between two direct-sum spaces, as a dense block matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    domain: DirectSumSpace,
    codomain: DirectSumSpace,
    matrix: CMatrix,
}

impl BlockOperator {
    pub fn new(domain: DirectSumSpace, codomain: DirectSumSpace, matrix: CMatrix) -> Result<Self> {
        let expected = (codomain.total_dim(), domain.total_dim());
        if matrix.shape() != expected {
            return Err(Error::dims(format!("{expected:?}"), format!("{:?}", matrix.shape())));
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(space: DirectSumSpace) -> Self {
        let matrix = linalg::identity(space.total_dim());
        Self {
            domain: space.clone(),
            codomain: space,
            matrix,
        }
    }

    pub fn zeros(domain: DirectSumSpace, codomain: DirectSumSpace) -> Self {
        let matrix = CMatrix::zeros(codomain.total_dim(), domain.total_dim());
        Self {
            domain,
            codomain,
            matrix,
        }
    }

    pub fn domain(&self) -> &DirectSumSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &DirectSumSpace {
        &self.codomain
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    /// The block `B_{j,i}: W_i -> V_j` (row block `j`, column block `i`).
    pub fn block(&self, j: usize, i: usize) -> Result<CMatrix> {
        if j >= self.codomain.len() || i >= self.domain.len() {
            return Err(Error::IndexOutOfRange {
                row: j,
                col: i,
                blocks: self.codomain.len().max(self.domain.len()),
            });
        }
        let rows = self.codomain.block_range(j);
        let cols = self.domain.block_range(i);
        Ok(self
            .matrix
            .view((rows.start, cols.start), (rows.len(), cols.len()))
            .into_owned())
    }

    pub fn apply(&self, v: &DirectSumVector) -> Result<DirectSumVector> {
        if v.space() != &self.domain {
            return Err(Error::SpaceMismatch);
        }
        Ok(DirectSumVector {
            space: self.codomain.clone(),
            coords: &self.matrix * v.coords(),
        })
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &BlockOperator) -> Result<BlockOperator> {
        if rhs.codomain != self.domain {
            return Err(Error::SpaceMismatch);
        }
        Ok(BlockOperator {
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn adjoint(&self) -> BlockOperator {
        BlockOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: self.matrix.adjoint(),
        }
    }
}

pub fn apply_block(op: &BlockOperator, v: &DirectSumVector) -> Result<DirectSumVector> {
    op.apply(v)
}
