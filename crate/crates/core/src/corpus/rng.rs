//! The corpus random stream.
//!
//! xoshiro256** seeded through SplitMix64 (`seed_from_u64`). On top of the
//! raw 64-bit outputs:
//!
//! * uniform: `(x >> 11) * 2^-53`, in `[0, 1)`;
//! * Gaussian: Box–Muller on two consecutive uniforms `u1, u2`,
//!   `r = sqrt(-2 ln(1 - u1))`, emitting `r cos(2π u2)` and then
//!   `r sin(2π u2)` on the next call;
//! * complex Gaussian: real part then imaginary part, each standard normal;
//! * matrices are filled row-major.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::linalg::{CMatrix, CVector, C64};

#[derive(Debug, Clone)]
pub struct CorpusRng {
    inner: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl CorpusRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        let re = self.gaussian();
        let im = self.gaussian();
        C64::new(re, im)
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize) -> CMatrix {
        let data: Vec<C64> = (0..rows * cols).map(|_| self.complex_gaussian()).collect();
        CMatrix::from_row_slice(rows, cols, &data)
    }

    pub fn unit_vector(&mut self, n: usize) -> CVector {
        loop {
            let v = CVector::from_iterator(n, (0..n).map(|_| self.complex_gaussian()));
            let norm = v.norm();
            if norm > 1e-300 {
                return v.unscale(norm);
            }
        }
    }
}
