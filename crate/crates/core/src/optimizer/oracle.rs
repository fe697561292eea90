use num_complex::Complex64;

use super::StealthInstance;
use crate::error::{Error, Result};
use crate::gain::{gain_of_steering, ReflectionVector};
use crate::linalg::ComplexVector;

/// Step size for iteration `t = 1, 2, ...`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `c / sqrt(t)`.
    InverseSqrt {
        c: f64,
    },
    Constant {
        c: f64,
    },
    /// `c * ratio^(t - 1)`.
    Geometric {
        c: f64,
        ratio: f64,
    },
}

impl StepSchedule {
    /// `0.1 (1 + |tau|) / N / sqrt(t)`.
    pub fn default_for(instance: &StealthInstance) -> Self {
        StepSchedule::InverseSqrt { c: 0.1 * (1.0 + instance.tau().norm()) / instance.n() as f64 }
    }

    /// Same initial step as [`StepSchedule::default_for`], decaying by `e^-15` over `iterations`.
    ///
    /// Converges much faster than `c / sqrt(t)` in practice when the run length is known up front.
    pub fn geometric_for(instance: &StealthInstance, iterations: usize) -> Self {
        let StepSchedule::InverseSqrt { c } = Self::default_for(instance) else { unreachable!() };
        StepSchedule::Geometric { c, ratio: (-15.0 / iterations.max(1) as f64).exp() }
    }

    fn step(&self, t: usize) -> f64 {
        match *self {
            StepSchedule::InverseSqrt { c } => c / (t as f64).sqrt(),
            StepSchedule::Constant { c } => c,
            StepSchedule::Geometric { c, ratio } => c * ratio.powi((t - 1) as i32),
        }
    }
}

/// Projected subgradient descent on `max_k |u_k^T theta + tau|^2` over the unit polydisk.
///
/// Starts from `theta = 0`, steps along the gradient of the currently worst
/// sample (lowest index on ties) and projects each coefficient back onto the
/// unit disk. Returns the best iterate seen and its objective.
pub fn primal_oracle(
    instance: &StealthInstance,
    iterations: usize,
    schedule: StepSchedule,
) -> Result<(ReflectionVector, f64)> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("primal oracle needs at least one iteration".into()));
    }
    let n = instance.n();
    let tau = instance.tau();
    let us = instance.u_vectors();
    let mut theta = ComplexVector::zeros(n);
    let mut best_theta = theta.clone();
    let mut best = f64::INFINITY;

    for t in 1..=iterations + 1 {
        let mut worst = (0usize, f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
        for (k, u) in us.iter().enumerate() {
            let r = gain_of_steering(u, &theta, tau);
            let g = r.norm_sqr();
            if g > worst.1 {
                worst = (k, g, r);
            }
        }
        if worst.1 < best {
            best = worst.1;
            best_theta.copy_from(&theta);
        }
        if t > iterations {
            break;
        }
        let (k, _, r) = worst;
        let gamma = schedule.step(t);
        for (z, u) in theta.iter_mut().zip(us[k].iter()) {
            *z -= r * u.conj() * gamma;
            let a = z.norm();
            if a > 1.0 {
                *z /= a;
            }
        }
    }
    Ok((ReflectionVector::new(best_theta)?, best))
}
