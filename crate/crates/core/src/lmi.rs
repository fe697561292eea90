//! Small dense LMI solver.
//!
//! Solves
//!
//! ```text
//! maximize   c^T x
//! subject to F_0 + sum_i x_i F_i  >= 0      (one Hermitian block)
//!            A x = b
//!            x_j >= l_j                      (j in the bounded set)
//! ```
//!
//! with a log-det barrier path-following method. Hermitian data is embedded
//! into real symmetric matrices once; every Newton step works on the
//! embedding. The certified gap at exit is `nu / t` with
//! `nu = 2 * dim + #bounds`, the barrier parameter of the embedded problem.
//!
//! When no strictly feasible start is supplied, a phase-I problem
//! `max s  s.t.  F(x) - s I >= 0, x_j - l_j >= s, A x = b` is solved first
//! until `s > 0`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::linalg::{real_embed, HermitianMatrix};

#[derive(Debug, Clone)]
pub struct LmiProblem {
    objective: DVector<f64>,
    constant: HermitianMatrix,
    coefficients: Vec<HermitianMatrix>,
    eq_matrix: DMatrix<f64>,
    eq_rhs: DVector<f64>,
    lower_bounds: Vec<(usize, f64)>,
    start: Option<DVector<f64>>,
}

impl LmiProblem {
    pub fn new(objective: Vec<f64>, constant: HermitianMatrix, coefficients: Vec<HermitianMatrix>) -> Result<Self> {
        let p = objective.len();
        if p == 0 {
            return Err(Error::InvalidArgument("LMI problem needs at least one variable".into()));
        }
        if coefficients.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                actual: coefficients.len(),
                context: "coefficient matrices vs objective length",
            });
        }
        let dim = constant.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("LMI block must be non-empty".into()));
        }
        if let Some(f) = coefficients.iter().find(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: f.dim(),
                context: "coefficient matrix dimension",
            });
        }
        Ok(Self {
            objective: DVector::from_vec(objective),
            constant,
            coefficients,
            eq_matrix: DMatrix::zeros(0, p),
            eq_rhs: DVector::zeros(0),
            lower_bounds: Vec::new(),
            start: None,
        })
    }

    pub fn with_equalities(mut self, a: DMatrix<f64>, b: Vec<f64>) -> Result<Self> {
        if a.ncols() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                actual: a.ncols(),
                context: "equality matrix columns",
            });
        }
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                actual: b.len(),
                context: "equality right-hand side",
            });
        }
        self.eq_matrix = a;
        self.eq_rhs = DVector::from_vec(b);
        Ok(self)
    }

    pub fn with_lower_bound(mut self, index: usize, bound: f64) -> Result<Self> {
        if index >= self.num_vars() {
            return Err(Error::InvalidArgument(format!("bound on variable {index} out of range")));
        }
        if !bound.is_finite() {
            return Err(Error::InvalidArgument("lower bounds must be finite".into()));
        }
        self.lower_bounds.retain(|(i, _)| *i != index);
        self.lower_bounds.push((index, bound));
        self.lower_bounds.sort_by_key(|(i, _)| *i);
        Ok(self)
    }

    pub fn with_nonnegative(self, index: usize) -> Result<Self> {
        self.with_lower_bound(index, 0.0)
    }

    /// Suggested starting point; used when strictly feasible, otherwise phase I runs from it.
    pub fn with_start(mut self, x: Vec<f64>) -> Result<Self> {
        if x.len() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                actual: x.len(),
                context: "starting point length",
            });
        }
        self.start = Some(DVector::from_vec(x));
        Ok(self)
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn block_dim(&self) -> usize {
        self.constant.dim()
    }

    pub fn start(&self) -> Option<&[f64]> {
        self.start.as_ref().map(|s| s.as_slice())
    }

    pub fn lower_bounds(&self) -> &[(usize, f64)] {
        &self.lower_bounds
    }

    pub fn objective(&self) -> &DVector<f64> {
        &self.objective
    }

    pub fn equality_matrix(&self) -> &DMatrix<f64> {
        &self.eq_matrix
    }

    /// `F_0 + sum_i x_i F_i`.
    pub fn lmi_at(&self, x: &[f64]) -> HermitianMatrix {
        let mut m = self.constant.as_matrix().clone();
        for (xi, f) in x.iter().zip(&self.coefficients) {
            if *xi != 0.0 {
                m += f.as_matrix() * num_complex::Complex64::new(*xi, 0.0);
            }
        }
        HermitianMatrix::symmetrize(&m)
    }

    /// Real embedding of the block at `x`.
    pub fn embedded_lmi_at(&self, x: &[f64]) -> DMatrix<f64> {
        real_embed(&self.lmi_at(x))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LmiOptions {
    /// Target bound on `nu / t`.
    pub tol: f64,
    pub max_newton: usize,
    /// Emit one debug log line per Newton step.
    pub trace: bool,
}

impl Default for LmiOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_newton: 2000, trace: false }
    }
}

#[derive(Debug, Clone)]
pub struct LmiSolution {
    pub variables: Vec<f64>,
    pub objective: f64,
    /// Total Newton steps over phase I and the main path.
    pub iterations: usize,
    pub centerings: usize,
    /// Smallest eigenvalue of the complex block at the solution, computed independently.
    pub min_eigenvalue: f64,
    pub lmi_norm: f64,
    pub equality_residual: f64,
    pub bound_violation: f64,
    /// Newton decrement at the last centering.
    pub stationarity_residual: f64,
    pub gap_bound: f64,
}

/// Real-arithmetic barrier data: `E(z) = E_0 + sum z_i E_i`, rows `G z - h > 0`, `A z = b`.
struct Barrier {
    c: DVector<f64>,
    e0: DMatrix<f64>,
    ei: Vec<DMatrix<f64>>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

struct Local {
    chol: Cholesky<f64, Dyn>,
    slacks: DVector<f64>,
}

enum StopReason {
    Converged,
    Predicate,
}

struct PathOutcome {
    z: DVector<f64>,
    newton: usize,
    centerings: usize,
    decrement: f64,
    gap: f64,
    reason: StopReason,
}

impl Barrier {
    fn nu(&self) -> f64 {
        (self.e0.nrows() + self.g.nrows()) as f64
    }

    fn matrix_at(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let mut m = self.e0.clone();
        for (zi, e) in z.iter().zip(&self.ei) {
            if *zi != 0.0 {
                m += e * *zi;
            }
        }
        m
    }

    fn local(&self, z: &DVector<f64>) -> Option<Local> {
        let slacks = &self.g * z - &self.h;
        if slacks.iter().any(|s| !(*s > 0.0)) {
            return None;
        }
        let m = self.matrix_at(z);
        let chol = Cholesky::new(m)?;
        if chol.l_dirty().diagonal().iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return None;
        }
        Some(Local { chol, slacks })
    }

    fn log_barrier(local: &Local) -> f64 {
        let logdet: f64 = local.chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let logs: f64 = local.slacks.iter().map(|s| s.ln()).sum();
        -logdet - logs
    }

    /// Gradient and Hessian of `phi(z) = -log det E(z) - sum log(G z - h)`.
    fn derivatives(&self, local: &Local) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.c.len();
        let l = local.chol.l();
        let ws: Vec<DMatrix<f64>> = self
            .ei
            .iter()
            .map(|e| {
                let x = l.solve_lower_triangular(e).expect("cholesky factor is nonsingular");
                let w = l.solve_lower_triangular(&x.transpose()).expect("cholesky factor is nonsingular");
                (&w + w.transpose()) * 0.5
            })
            .collect();
        let mut grad = DVector::from_fn(p, |i, _| -ws[i].trace());
        let mut hess = DMatrix::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = ws[i].dot(&ws[j]);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        for (r, s) in local.slacks.iter().enumerate() {
            let row = self.g.row(r);
            for i in 0..p {
                let gi = row[i];
                if gi == 0.0 {
                    continue;
                }
                grad[i] -= gi / s;
                for j in 0..p {
                    hess[(i, j)] += gi * row[j] / (s * s);
                }
            }
        }
        (grad, hess)
    }

    fn newton_direction(&self, grad: &DVector<f64>, hess: &DMatrix<f64>, z: &DVector<f64>) -> Option<DVector<f64>> {
        let p = grad.len();
        let e = self.a.nrows();
        // symmetric Jacobi scaling: barrier terms of nearly active bounds dominate the diagonal
        let d = DVector::from_fn(p, |i, _| {
            let h = hess[(i, i)];
            if h > 0.0 && h.is_finite() {
                1.0 / h.sqrt()
            } else {
                1.0
            }
        });
        let ad = DMatrix::from_fn(e, p, |r, c| self.a[(r, c)] * d[c]);
        let mut kkt = DMatrix::zeros(p + e, p + e);
        for i in 0..p {
            for j in 0..p {
                kkt[(i, j)] = d[i] * hess[(i, j)] * d[j];
            }
        }
        kkt.view_mut((p, 0), (e, p)).copy_from(&ad);
        kkt.view_mut((0, p), (p, e)).copy_from(&ad.transpose());
        let mut rhs = DVector::zeros(p + e);
        rhs.rows_mut(0, p).copy_from(&(-grad.component_mul(&d)));
        rhs.rows_mut(p, e).copy_from(&(&self.b - &self.a * z));

        for attempt in 0..4 {
            let mut m = kkt.clone();
            if attempt > 0 {
                let delta = 10f64.powi(-14 + 2 * attempt);
                for i in 0..p {
                    m[(i, i)] += delta;
                }
            }
            let lu = m.clone().lu();
            if let Some(mut sol) = lu.solve(&rhs) {
                if let Some(fix) = lu.solve(&(&rhs - &m * &sol)) {
                    sol += fix;
                }
                if sol.iter().all(|v| v.is_finite()) {
                    return Some(sol.rows(0, p).component_mul(&d));
                }
            }
        }
        None
    }

    /// Path following from a strictly feasible `z`, stopping when `nu / t <= tol`
    /// or as soon as `stop(z)` holds.
    fn follow_path(
        &self,
        mut z: DVector<f64>,
        opts: &LmiOptions,
        budget: usize,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Result<PathOutcome> {
        let nu = self.nu();
        let mut t = 1.0f64;
        let mut factor = 20.0f64;
        let mut newton = 0usize;
        let mut centerings = 0usize;
        let mut local = self.local(&z).expect("starting point is strictly feasible");
        let mut decrement;
        let eq_tol = 1e-12 * (1.0 + self.b.amax());
        let pinv = (self.a.nrows() > 0)
            .then(|| self.a.clone().pseudo_inverse(1e-12).expect("pseudo-inverse of a finite matrix"));
        loop {
            let mut steps_this_centering = 0usize;
            loop {
                if newton >= budget {
                    return Err(Error::NonConvergence {
                        iterations: newton,
                        gap: nu / t,
                        best: z.iter().copied().collect(),
                    });
                }
                let (gphi, hess) = self.derivatives(&local);
                let grad = &gphi - &self.c * t;
                let Some(dz) = self.newton_direction(&grad, &hess, &z) else {
                    decrement = f64::NAN;
                    break;
                };
                let slope = grad.dot(&dz);
                decrement = (-slope).max(dz.dot(&(&hess * &dz))).max(0.0);
                let eq_res = (&self.b - &self.a * &z).amax();
                let eq_ok = eq_res <= eq_tol;
                if eq_ok && (decrement / 2.0 <= 1e-9 || slope >= 0.0) {
                    break;
                }

                let base = Self::log_barrier(&local);
                let mut step = 1.0;
                let mut accepted = None;
                while step > 1e-14 {
                    let trial = &z + &dz * step;
                    if let Some(tl) = self.local(&trial) {
                        let delta = -t * self.c.dot(&(&dz * step)) + (Self::log_barrier(&tl) - base);
                        if delta <= 0.01 * step * slope + 1e-12 * (1.0 + base.abs()) || !eq_ok && step == 1.0 {
                            accepted = Some((trial, tl));
                            break;
                        }
                    }
                    step *= 0.5;
                }
                newton += 1;
                steps_this_centering += 1;
                if opts.trace {
                    log::debug!(
                        "newton {newton:4}  t={t:.3e}  gap={:.3e}  dec={decrement:.3e}  step={step:.3e}",
                        nu / t
                    );
                }
                match accepted {
                    Some((nz, nl)) => {
                        z = nz;
                        local = nl;
                        if let Some(pinv) = &pinv {
                            let fixed = &z + pinv * (&self.b - &self.a * &z);
                            if let Some(fl) = self.local(&fixed) {
                                z = fixed;
                                local = fl;
                            }
                        }
                    }
                    None => break,
                }
                if !z.iter().all(|v| v.is_finite()) || self.c.dot(&z).abs() > 1e15 {
                    return Err(Error::Unbounded);
                }
                if stop(&z) {
                    centerings += 1;
                    return Ok(PathOutcome {
                        z,
                        newton,
                        centerings,
                        decrement,
                        gap: nu / t,
                        reason: StopReason::Predicate,
                    });
                }
                if steps_this_centering >= 100 {
                    break;
                }
            }
            centerings += 1;
            if stop(&z) {
                return Ok(PathOutcome {
                    z,
                    newton,
                    centerings,
                    decrement,
                    gap: nu / t,
                    reason: StopReason::Predicate,
                });
            }
            if nu / t <= opts.tol {
                return Ok(PathOutcome {
                    z,
                    newton,
                    centerings,
                    decrement,
                    gap: nu / t,
                    reason: StopReason::Converged,
                });
            }
            if steps_this_centering <= 4 {
                factor = (factor * 2.0).min(200.0);
            } else if steps_this_centering > 25 {
                factor = (factor / 2.0).max(4.0);
            }
            t = (t * factor).min(nu / opts.tol * 1.000_001);
        }
    }
}

fn embed_all(problem: &LmiProblem) -> (DMatrix<f64>, Vec<DMatrix<f64>>) {
    (real_embed(&problem.constant), problem.coefficients.iter().map(real_embed).collect())
}

fn bound_rows(problem: &LmiProblem, extra_cols: usize) -> (DMatrix<f64>, DVector<f64>) {
    let p = problem.num_vars();
    let r = problem.lower_bounds.len();
    let mut g = DMatrix::zeros(r, p + extra_cols);
    let mut h = DVector::zeros(r);
    for (row, (idx, lb)) in problem.lower_bounds.iter().enumerate() {
        g[(row, *idx)] = 1.0;
        h[row] = *lb;
    }
    (g, h)
}

fn project_equalities(a: &DMatrix<f64>, b: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    if a.nrows() == 0 {
        return z.clone();
    }
    let pinv = a.clone().pseudo_inverse(1e-12).expect("pseudo-inverse of a finite matrix");
    z + pinv * (b - a * z)
}

fn min_sym_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn phase_one(
    problem: &LmiProblem,
    e0: &DMatrix<f64>,
    ei: &[DMatrix<f64>],
    x0: &DVector<f64>,
    opts: &LmiOptions,
) -> Result<(DVector<f64>, usize)> {
    let p = problem.num_vars();
    let n = e0.nrows();
    let mut coeffs: Vec<DMatrix<f64>> = ei.to_vec();
    coeffs.push(-DMatrix::identity(n, n));
    let (mut g, h) = bound_rows(problem, 1);
    for r in 0..g.nrows() {
        g[(r, p)] = -1.0;
    }
    let mut a = DMatrix::zeros(problem.eq_matrix.nrows(), p + 1);
    a.view_mut((0, 0), (problem.eq_matrix.nrows(), p)).copy_from(&problem.eq_matrix);
    let mut c = DVector::zeros(p + 1);
    c[p] = 1.0;

    let m0 = {
        let mut m = e0.clone();
        for (xi, e) in x0.iter().zip(ei) {
            m += e * *xi;
        }
        m
    };
    let lmi_margin = min_sym_eigenvalue(&m0);
    let bound_margin = problem.lower_bounds.iter().map(|(i, lb)| x0[*i] - lb).fold(f64::INFINITY, f64::min);
    let margin = lmi_margin.min(bound_margin);
    let mut z0 = DVector::zeros(p + 1);
    z0.rows_mut(0, p).copy_from(x0);
    z0[p] = margin - 1.0 - 0.1 * margin.abs();

    let barrier = Barrier { c, e0: e0.clone(), ei: coeffs, g, h, a, b: problem.eq_rhs.clone() };
    let phase_opts = LmiOptions { tol: 1e-10, ..*opts };
    let outcome = barrier.follow_path(z0, &phase_opts, opts.max_newton, &|z: &DVector<f64>| z[p] > 0.0)?;
    let s = outcome.z[p];
    if matches!(outcome.reason, StopReason::Converged) && s <= 0.0 {
        let x: Vec<f64> = outcome.z.rows(0, p).iter().copied().collect();
        let (_, vec) = problem.lmi_at(&x).min_eigenpair();
        return Err(Error::Infeasible { margin: s, certificate: vec.iter().copied().collect() });
    }
    Ok((outcome.z.rows(0, p).into_owned(), outcome.newton))
}

/// Maximizes the objective to within `opts.tol` (certified by the barrier gap).
pub fn solve_lmi(problem: &LmiProblem, opts: &LmiOptions) -> Result<LmiSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let p = problem.num_vars();
    let (e0, ei) = embed_all(problem);
    let (g, h) = bound_rows(problem, 0);
    let barrier = Barrier {
        c: problem.objective.clone(),
        e0: e0.clone(),
        ei: ei.clone(),
        g,
        h,
        a: problem.eq_matrix.clone(),
        b: problem.eq_rhs.clone(),
    };

    let guess = problem.start.clone().unwrap_or_else(|| DVector::zeros(p));
    let guess = project_equalities(&barrier.a, &barrier.b, &guess);
    let (start, phase_one_steps) =
        if barrier.local(&guess).is_some() { (guess, 0) } else { phase_one(problem, &e0, &ei, &guess, opts)? };

    let budget = opts.max_newton.saturating_sub(phase_one_steps).max(1);
    let outcome = barrier.follow_path(start, opts, budget, &|_| false)?;
    let x: Vec<f64> = outcome.z.iter().copied().collect();
    let block = problem.lmi_at(&x);
    let (min_eig, _) = block.min_eigenpair();
    let eq_res =
        if problem.eq_matrix.nrows() == 0 { 0.0 } else { (&problem.eq_rhs - &problem.eq_matrix * &outcome.z).amax() };
    let bound_violation = problem.lower_bounds.iter().map(|(i, lb)| (lb - x[*i]).max(0.0)).fold(0.0, f64::max);
    Ok(LmiSolution {
        objective: problem.objective.dot(&outcome.z),
        variables: x,
        iterations: outcome.newton + phase_one_steps,
        centerings: outcome.centerings,
        min_eigenvalue: min_eig,
        lmi_norm: block.max_abs(),
        equality_residual: eq_res,
        bound_violation,
        stationarity_residual: outcome.decrement,
        gap_bound: outcome.gap,
    })
}
