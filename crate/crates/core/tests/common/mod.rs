//! Oracles built straight from the definitions with plain nalgebra, sharing
//! nothing with the library beyond the family accessors.
#![allow(dead_code)]

use fusion_gram::corpus::{generate, InstanceSpec};
use fusion_gram::frames::WeightedFamily;
use fusion_gram::linalg::{CMatrix, C64};
use nalgebra::DMatrix;

pub fn family(spec: &str) -> WeightedFamily {
    generate(&spec.parse::<InstanceSpec>().unwrap()).unwrap().first().clone()
}

pub fn pair(spec: &str) -> (WeightedFamily, WeightedFamily) {
    let g = generate(&spec.parse::<InstanceSpec>().unwrap()).unwrap();
    (g.first().clone(), g.second().unwrap().clone())
}

pub fn projector(q: &CMatrix) -> CMatrix {
    q * q.adjoint()
}

/// `Σ ω_i² Q_i Q_i*`.
pub fn frame_operator(f: &WeightedFamily) -> CMatrix {
    let n = f.ambient_dim();
    let mut s = CMatrix::zeros(n, n);
    for (sub, w) in f.subspaces().iter().zip(f.weights()) {
        s += projector(sub.basis()).scale(w * w);
    }
    s
}

pub fn inverse(m: &CMatrix) -> CMatrix {
    m.clone().try_inverse().expect("oracle inverse")
}

/// `[ω_1 Q_1, ..., ω_N Q_N]`.
pub fn synthesis(f: &WeightedFamily) -> CMatrix {
    let n = f.ambient_dim();
    let cols: usize = f.subspaces().iter().map(|s| s.dim()).sum();
    let mut t = CMatrix::zeros(n, cols);
    let mut c = 0;
    for (sub, w) in f.subspaces().iter().zip(f.weights()) {
        let d = sub.dim();
        t.view_mut((0, c), (n, d)).copy_from(&sub.basis().scale(*w));
        c += d;
    }
    t
}

fn offsets(f: &WeightedFamily) -> Vec<usize> {
    let mut out = vec![0];
    for s in f.subspaces() {
        out.push(out.last().unwrap() + s.dim());
    }
    out
}

/// Block `(j, i)`: `ω_i υ_j Q^W_j* S_V⁻¹ P_{V_j} U Q^W_i`.
pub fn gram(u: &CMatrix, w: &WeightedFamily, v: &WeightedFamily) -> CMatrix {
    let s_inv = inverse(&frame_operator(v));
    let off = offsets(w);
    let d = *off.last().unwrap();
    let mut g = CMatrix::zeros(d, d);
    let (ws, vs) = (w.subspaces(), v.subspaces());
    for j in 0..ws.len() {
        for i in 0..ws.len() {
            let b = (ws[j].basis().adjoint() * &s_inv * projector(vs[j].basis()) * u * ws[i].basis())
                .scale(w.weights()[i] * v.weights()[j]);
            g.view_mut((off[j], off[i]), (b.nrows(), b.ncols())).copy_from(&b);
        }
    }
    g
}

/// Block diagonal with blocks `Q^V_i* S_W⁻¹ Q^W_i`.
pub fn phi(v: &WeightedFamily, w: &WeightedFamily) -> CMatrix {
    let s_inv = inverse(&frame_operator(w));
    let (ov, ow) = (offsets(v), offsets(w));
    let mut m = CMatrix::zeros(*ov.last().unwrap(), *ow.last().unwrap());
    for (i, (a, b)) in v.subspaces().iter().zip(w.subspaces()).enumerate() {
        let blk = a.basis().adjoint() * &s_inv * b.basis();
        m.view_mut((ov[i], ow[i]), (blk.nrows(), blk.ncols())).copy_from(&blk);
    }
    m
}

/// Eigenvalues of a Hermitian matrix, ascending, via its real symmetric embedding.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.nrows();
    let h = (m + m.adjoint()).scale(0.5);
    let r = real_embedding(&h);
    debug_assert_eq!(r.nrows(), 2 * n);
    let mut e: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    // each eigenvalue appears twice in the embedding
    e.into_iter().step_by(2).collect()
}

fn real_embedding(m: &CMatrix) -> DMatrix<f64> {
    let (r, c) = m.shape();
    DMatrix::<f64>::from_fn(2 * r, 2 * c, |a, b| {
        let z = m[(a % r, b % c)];
        match (a < r, b < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Singular values, descending, from a real SVD of the real embedding.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = real_embedding(m).singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s.into_iter().step_by(2).collect()
}

pub fn sigma_ratio(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    if s[0] == 0.0 {
        0.0
    } else {
        s[s.len() - 1] / s[0]
    }
}

pub fn op_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Frobenius distance from satisfying the four Penrose equations.
pub fn penrose_defect(g: &CMatrix, x: &CMatrix) -> f64 {
    let gx = g * x;
    let xg = x * g;
    [
        (&gx * g - g).norm() / g.norm().max(1e-300),
        (&xg * x - x).norm() / x.norm().max(1e-300),
        (&gx - gx.adjoint()).norm() / gx.norm().max(1e-300),
        (&xg - xg.adjoint()).norm() / xg.norm().max(1e-300),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}
