use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::StealthInstance;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ComplexVector, HermitianMatrix};

/// Multipliers for the sample constraints (`lambda`) and the amplitude constraints (`mu`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualVariables {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualVariables {
    pub fn new(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let d = Self { lambda, mu };
        d.validate()?;
        Ok(d)
    }

    /// `lambda` on the simplex (to `1e-9`) and `mu >= 0`.
    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_empty() {
            return Err(Error::InvalidArgument("lambda must be non-empty".into()));
        }
        if self.lambda.iter().chain(&self.mu).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidArgument("dual variables must be finite and non-negative".into()));
        }
        let sum: f64 = self.lambda.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("lambda must sum to one, got {sum}")));
        }
        Ok(())
    }

    pub fn uniform(k: usize, n: usize, mu: f64) -> Self {
        Self { lambda: vec![1.0 / k as f64; k], mu: vec![mu; n] }
    }
}

/// `Q = sum_k lambda_k c_k c_k^H + diag(mu)`, `v = sum_k lambda_k c_k` and the dual value
/// `f = |tau|^2 - |tau|^2 v^H Q^{-1} v - sum_n mu_n`, where `c_k = conj(u_k)`.
///
/// The gain is `u_k^T theta + tau = c_k^H theta + tau`, so the conjugated
/// steering is what makes `theta = -tau Q^{-1} v` the Lagrangian minimizer.
/// `f` itself is the same with or without the conjugation.
#[derive(Debug, Clone)]
pub struct DualAssembly {
    pub q: HermitianMatrix,
    pub v: ComplexVector,
    pub f: f64,
    chol: Cholesky<Complex64, nalgebra::Dyn>,
}

impl DualAssembly {
    /// `Q^{-1} b`.
    pub fn solve(&self, b: &ComplexVector) -> ComplexVector {
        self.chol.solve(b)
    }
}

fn check_shapes(duals: &DualVariables, instance: &StealthInstance) -> Result<()> {
    if duals.lambda.len() != instance.k() {
        return Err(Error::DimensionMismatch {
            expected: instance.k(),
            actual: duals.lambda.len(),
            context: "lambda vs number of samples",
        });
    }
    if duals.mu.len() != instance.n() {
        return Err(Error::DimensionMismatch {
            expected: instance.n(),
            actual: duals.mu.len(),
            context: "mu vs number of elements",
        });
    }
    Ok(())
}

pub fn assemble_dual(duals: &DualVariables, instance: &StealthInstance) -> Result<DualAssembly> {
    duals.validate()?;
    check_shapes(duals, instance)?;
    let n = instance.n();
    let mut q = ComplexMatrix::from_diagonal(&ComplexVector::from_iterator(
        n,
        duals.mu.iter().map(|m| Complex64::new(*m, 0.0)),
    ));
    let mut v = ComplexVector::zeros(n);
    for (lam, u) in duals.lambda.iter().zip(instance.u_vectors()) {
        if *lam == 0.0 {
            continue;
        }
        let l = Complex64::new(*lam, 0.0);
        let c = u.conjugate();
        q += &c * c.adjoint() * l;
        v += c * l;
    }
    let q = HermitianMatrix::symmetrize(&q);
    let chol = Cholesky::new(q.as_matrix().clone())
        .ok_or_else(|| Error::Singular("Q is not positive definite; keep every mu_n above a positive floor".into()))?;
    let qinv_v = chol.solve(&v);
    let quad = v.dotc(&qinv_v).re;
    let tau2 = instance.tau().norm_sqr();
    let f = tau2 - tau2 * quad - duals.mu.iter().sum::<f64>();
    Ok(DualAssembly { q, v, f, chol })
}

/// Minimizer of the Lagrangian in `theta`: `-tau Q^{-1} v`.
pub fn stationary_theta(duals: &DualVariables, instance: &StealthInstance) -> Result<ComplexVector> {
    let asm = assemble_dual(duals, instance)?;
    Ok(theta_from_assembly(&asm, instance.tau()))
}

pub(crate) fn theta_from_assembly(asm: &DualAssembly, tau: Complex64) -> ComplexVector {
    asm.solve(&asm.v) * (-tau)
}
