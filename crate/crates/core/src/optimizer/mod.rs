//! Min-max reflection design over a sampled angular window.
//!
//! The sampled problem is
//!
//! ```text
//! min eta  s.t.  |u_k^T theta + tau|^2 <= eta  (k = 1..K),   |theta_n| <= 1.
//! ```
//!
//! It is solved through its Lagrange dual: the dual function has a closed
//! form in `(lambda, mu)`, its maximization is a single LMI (Schur
//! complement), and the primal optimum is recovered from the stationarity
//! condition of the Lagrangian.

mod baselines;
mod dual;
mod oracle;
mod solve;

pub use baselines::{baseline_no_irs, baseline_random_phase, baseline_single_point};
pub use dual::{assemble_dual, stationary_theta, DualAssembly, DualVariables};
pub use oracle::{primal_oracle, StepSchedule};
pub use solve::{build_p4, default_mu_floor, solve_stealth, SolveOptions, SolveStats, StealthSolution};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gain::{gain_of_steering, sample_window, steering_of_sample, SamplingPlan, TargetRcs};
use crate::geometry::{AngularWindow, ArrayGeometry};
use crate::linalg::ComplexVector;

/// One sampled min-max problem.
#[derive(Debug, Clone)]
pub struct StealthInstance {
    geom: ArrayGeometry,
    tau_s: TargetRcs,
    window: AngularWindow,
    plan: SamplingPlan,
    u_vectors: Vec<ComplexVector>,
}

impl StealthInstance {
    pub fn new(geom: ArrayGeometry, tau_s: TargetRcs, window: AngularWindow, plan: SamplingPlan) -> Result<Self> {
        window.validate()?;
        if plan.is_empty() {
            return Err(Error::InvalidArgument("sampling plan must contain at least one point".into()));
        }
        if let Some(p) = plan.points.iter().find(|p| !window.contains(p, 1e-12)) {
            return Err(Error::InvalidArgument(format!("sample {p:?} lies outside the window")));
        }
        let u_vectors = plan.points.iter().map(|p| steering_of_sample(p, &geom)).collect();
        Ok(Self { geom, tau_s, window, plan, u_vectors })
    }

    /// Uniform `k_x * k_y` grid over `window`.
    pub fn uniform(
        geom: ArrayGeometry,
        tau_s: TargetRcs,
        window: AngularWindow,
        k_x: usize,
        k_y: usize,
    ) -> Result<Self> {
        let plan = sample_window(&window, k_x, k_y)?;
        Self::new(geom, tau_s, window, plan)
    }

    pub fn geometry(&self) -> &ArrayGeometry {
        &self.geom
    }

    pub fn rcs(&self) -> &TargetRcs {
        &self.tau_s
    }

    pub fn tau(&self) -> Complex64 {
        self.tau_s.value()
    }

    pub fn window(&self) -> &AngularWindow {
        &self.window
    }

    pub fn plan(&self) -> &SamplingPlan {
        &self.plan
    }

    pub fn u_vectors(&self) -> &[ComplexVector] {
        &self.u_vectors
    }

    pub fn n(&self) -> usize {
        self.geom.len()
    }

    pub fn k(&self) -> usize {
        self.u_vectors.len()
    }

    /// Same samples with the RCS phase replaced.
    pub fn with_rcs(&self, tau_s: TargetRcs) -> Self {
        Self { tau_s, ..self.clone() }
    }

    /// `|u_k^T theta + tau|^2` for every sample.
    pub fn sample_gains(&self, theta: &ComplexVector) -> Vec<f64> {
        let tau = self.tau();
        self.u_vectors.iter().map(|u| gain_of_steering(u, theta, tau).norm_sqr()).collect()
    }

    pub fn max_sample_gain(&self, theta: &ComplexVector) -> f64 {
        self.sample_gains(theta).into_iter().fold(f64::NEG_INFINITY, f64::max)
    }
}
