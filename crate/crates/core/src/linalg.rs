//! Dense complex numerics shared by the steering, channel and solver code.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type ComplexVector = DVector<Complex64>;
pub type ComplexMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// A square complex matrix equal to its own conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Wraps `m` after checking `m == m^H` entrywise to `1e-12` (scaled by the largest entry).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidArgument(format!(
                "hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let n = m.nrows();
        for i in 0..n {
            for j in i..n {
                if (m[(i, j)] - m[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                    return Err(Error::InvalidArgument(format!("matrix is not hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(Self(m))
    }

    /// Builds `(m + m^H) / 2` without checking.
    pub fn symmetrize(m: &ComplexMatrix) -> Self {
        Self((m + m.adjoint()) * Complex64::new(0.5, 0.0))
    }

    pub fn zeros(n: usize) -> Self {
        Self(ComplexMatrix::zeros(n, n))
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(ComplexMatrix::from_fn(
            n,
            n,
            |i, j| {
                if i == j {
                    Complex64::new(d[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        ))
    }

    /// Rank-one `s * v v^H`.
    pub fn outer(v: &ComplexVector, s: f64) -> Self {
        Self(v * v.adjoint() * Complex64::new(s, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Smallest eigenvalue and a unit eigenvector for it.
    pub fn min_eigenpair(&self) -> (f64, ComplexVector) {
        let eig = self.0.clone().symmetric_eigen();
        let (idx, val) =
            eig.eigenvalues.iter().copied().enumerate().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty matrix");
        (val, eig.eigenvectors.column(idx).into_owned())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl std::ops::Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix(&self.0 + &rhs.0)
    }
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]`.
///
/// `H >= 0` iff the embedding is, and every eigenvalue of `H` appears twice in it.
pub fn real_embed(h: &HermitianMatrix) -> DMatrix<f64> {
    let n = h.dim();
    let m = h.as_matrix();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Checked variant of [`real_embed`] for matrices that are not yet known to be Hermitian.
pub fn real_embed_checked(m: &ComplexMatrix) -> Result<DMatrix<f64>> {
    HermitianMatrix::new(m.clone()).map(|h| real_embed(&h))
}

/// Kronecker product of two column vectors, first factor varying slowest.
pub fn kron(a: &ComplexVector, b: &ComplexVector) -> ComplexVector {
    let nb = b.len();
    ComplexVector::from_fn(a.len() * nb, |i, _| a[i / nb] * b[i % nb])
}

/// Unconjugated bilinear product `a^T b`.
pub fn dot_t(a: &ComplexVector, b: &ComplexVector) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
