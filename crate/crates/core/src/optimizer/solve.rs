use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::dual::{assemble_dual, theta_from_assembly, DualVariables};
use super::StealthInstance;
use crate::error::{Error, Result};
use crate::gain::ReflectionVector;
use crate::linalg::{ComplexMatrix, ComplexVector, HermitianMatrix};
use crate::lmi::{solve_lmi, LmiOptions, LmiProblem};

/// Lower bound imposed on every `mu_n`, keeping `Q` invertible at the optimum.
pub fn default_mu_floor(tau: Complex64) -> f64 {
    1e-8 * (1.0 + tau.norm_sqr())
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Barrier gap tolerance handed to the LMI kernel.
    pub tol: f64,
    /// Overrides [`default_mu_floor`].
    pub mu_floor: Option<f64>,
    /// `lambda_k` counts as effective when above this fraction of the largest multiplier.
    pub lambda_threshold: f64,
    pub max_newton: usize,
    pub trace: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-7, mu_floor: None, lambda_threshold: 1e-5, max_newton: 2000, trace: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveStats {
    pub newton_steps: usize,
    pub centerings: usize,
    /// Optimal value of the LMI itself (a lower bound on the dual value).
    pub lmi_objective: f64,
    pub lmi_gap_bound: f64,
    pub lmi_min_eigenvalue: f64,
    pub mu_floor: f64,
    /// Fraction of elements with amplitude above 0.99.
    pub unit_amplitude_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct StealthSolution {
    pub theta_star: ReflectionVector,
    /// `max_k |u_k^T theta* + tau|^2`, recomputed from `theta_star`.
    pub eta_star: f64,
    pub duals: DualVariables,
    pub dual_objective: f64,
    /// `eta_star - dual_objective`.
    pub duality_gap: f64,
    /// `max_k lambda_k |eta* - g_k|`.
    pub complementary_slackness: f64,
    /// Largest of the complementary-slackness, amplitude and stationarity residuals.
    pub kkt_residual: f64,
    pub effective_samples: Vec<usize>,
    pub sample_gains: Vec<f64>,
    pub stats: SolveStats,
}

/// Dual LMI over `(q, lambda_1..lambda_K, mu_1..mu_N)`, with `Q` and `v` built
/// from the conjugated steering vectors as in [`assemble_dual`]:
///
/// ```text
/// max q  s.t.  [ |tau|^2 - sum mu - q   conj(tau) v^H ]
///              [ tau v                  Q             ]  >= 0,
///              sum lambda = 1,  lambda >= 0,  mu >= mu_floor.
/// ```
///
/// The attached start point (uniform `lambda`, large `mu`, very negative `q`)
/// is strictly feasible.
pub fn build_p4(instance: &StealthInstance, mu_floor: f64) -> Result<LmiProblem> {
    if !(mu_floor.is_finite() && mu_floor >= 0.0) {
        return Err(Error::InvalidArgument(format!("mu floor must be non-negative, got {mu_floor}")));
    }
    let n = instance.n();
    let k = instance.k();
    let dim = n + 1;
    let tau = instance.tau();
    let tau2 = tau.norm_sqr();
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut f0 = ComplexMatrix::zeros(dim, dim);
    f0[(0, 0)] = Complex64::new(tau2, 0.0);

    let mut coefficients = Vec::with_capacity(1 + k + n);
    let mut fq = ComplexMatrix::zeros(dim, dim);
    fq[(0, 0)] = -one;
    coefficients.push(HermitianMatrix::symmetrize(&fq));

    for u in instance.u_vectors() {
        let mut w = ComplexVector::zeros(dim);
        w[0] = tau.conj();
        w.rows_mut(1, n).copy_from(&u.conjugate());
        let mut f = &w * w.adjoint();
        f[(0, 0)] = zero;
        coefficients.push(HermitianMatrix::symmetrize(&f));
    }
    for i in 0..n {
        let mut f = ComplexMatrix::zeros(dim, dim);
        f[(0, 0)] = -one;
        f[(i + 1, i + 1)] = one;
        coefficients.push(HermitianMatrix::symmetrize(&f));
    }

    let p = 1 + k + n;
    let mut objective = vec![0.0; p];
    objective[0] = 1.0;
    let mut eq = DMatrix::zeros(1, p);
    for j in 0..k {
        eq[(0, 1 + j)] = 1.0;
    }

    let mu0 = (tau.norm() * (n as f64).sqrt() + 1.0).max(2.0 * mu_floor + 1.0);
    let q0 = tau2 - n as f64 * mu0 - tau2 * n as f64 / mu0 - 1.0;
    let mut start = vec![q0];
    start.extend(std::iter::repeat_n(1.0 / k as f64, k));
    start.extend(std::iter::repeat_n(mu0, n));

    let mut problem = LmiProblem::new(objective, HermitianMatrix::symmetrize(&f0), coefficients)?
        .with_equalities(eq, vec![1.0])?
        .with_start(start)?;
    for j in 0..k {
        problem = problem.with_nonnegative(1 + j)?;
    }
    for i in 0..n {
        problem = problem.with_lower_bound(1 + k + i, mu_floor)?;
    }
    Ok(problem)
}

/// Solves the sampled min-max problem through its dual and recovers the primal optimum.
pub fn solve_stealth(instance: &StealthInstance, opts: &SolveOptions) -> Result<StealthSolution> {
    let n = instance.n();
    let k = instance.k();
    let tau = instance.tau();
    let mu_floor = opts.mu_floor.unwrap_or_else(|| default_mu_floor(tau));
    let problem = build_p4(instance, mu_floor)?;
    let lmi = solve_lmi(&problem, &LmiOptions { tol: opts.tol, max_newton: opts.max_newton, trace: opts.trace })?;

    let x = &lmi.variables;
    let mut lambda: Vec<f64> = x[1..=k].iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = lambda.iter().sum();
    lambda.iter_mut().for_each(|l| *l /= sum);
    let mu: Vec<f64> = x[1 + k..].iter().map(|v| v.max(mu_floor)).collect();
    let duals = DualVariables::new(lambda, mu)?;

    let asm = assemble_dual(&duals, instance)?;
    let theta = theta_from_assembly(&asm, tau);
    let stationarity = (asm.q.as_matrix() * &theta + &asm.v * tau).norm();

    let sample_gains = instance.sample_gains(&theta);
    let eta_star = sample_gains.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dual_objective = asm.f;
    let complementary_slackness =
        duals.lambda.iter().zip(&sample_gains).map(|(l, g)| l * (eta_star - g).abs()).fold(0.0, f64::max);
    let amplitude_cs =
        duals.mu.iter().zip(theta.iter()).map(|(m, z)| m * (1.0 - z.norm_sqr()).abs()).fold(0.0, f64::max);
    let amplitude_violation = theta.iter().map(|z| (z.norm() - 1.0).max(0.0)).fold(0.0, f64::max);

    let lam_max = duals.lambda.iter().copied().fold(0.0, f64::max);
    let effective_samples = (0..k).filter(|&j| duals.lambda[j] > opts.lambda_threshold * lam_max).collect();
    let unit_amplitude_fraction = theta.iter().filter(|z| z.norm() > 0.99).count() as f64 / n as f64;
    log::debug!(
        "solved N={n} K={k}: eta*={eta_star:.9e} gap={:.3e} unit-amplitude fraction {unit_amplitude_fraction:.3}",
        eta_star - dual_objective
    );

    let theta_star = ReflectionVector::new(theta)?;
    Ok(StealthSolution {
        theta_star,
        eta_star,
        dual_objective,
        duality_gap: eta_star - dual_objective,
        complementary_slackness,
        kkt_residual: complementary_slackness.max(amplitude_cs).max(amplitude_violation).max(stationarity),
        effective_samples,
        sample_gains,
        duals,
        stats: SolveStats {
            newton_steps: lmi.iterations,
            centerings: lmi.centerings,
            lmi_objective: lmi.objective,
            lmi_gap_bound: lmi.gap_bound,
            lmi_min_eigenvalue: lmi.min_eigenvalue,
            mu_floor,
            unit_amplitude_fraction,
        },
    })
}
