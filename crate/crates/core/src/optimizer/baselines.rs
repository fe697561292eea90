//! Reference designs: no surface, single-point cancellation, random phases.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::StealthInstance;
use crate::gain::ReflectionVector;
use crate::geometry::{upa_response, SpatialFrequencyPair};
use crate::linalg::ComplexVector;

/// `theta = 0`.
pub fn baseline_no_irs(instance: &StealthInstance) -> ReflectionVector {
    ReflectionVector::zeros(instance.n())
}

/// Reverse alignment against the broadside deviation `(0, 0)`:
/// `theta_n = beta exp(i (pi + arg tau - arg u0_n))` with `beta = min(1, |tau| / N)`.
pub fn baseline_single_point(instance: &StealthInstance) -> ReflectionVector {
    let n = instance.n();
    let tau = instance.tau();
    let u0 = upa_response(&SpatialFrequencyPair::new(0.0, 0.0), instance.geometry());
    let beta = (tau.norm() / n as f64).min(1.0);
    let theta = ComplexVector::from_fn(n, |i, _| Complex64::from_polar(beta, PI + tau.arg() - u0[i].arg()));
    ReflectionVector::new(theta).expect("amplitudes are at most one")
}

/// Unit-amplitude coefficients with phases uniform on `[0, 2 pi)`, drawn from
/// `ChaCha20Rng::seed_from_u64(seed)` as `2 pi (w >> 11) 2^-53`.
pub fn baseline_random_phase(instance: &StealthInstance, seed: u64) -> ReflectionVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let theta = ComplexVector::from_fn(instance.n(), |_, _| {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        Complex64::from_polar(1.0, 2.0 * PI * u)
    });
    ReflectionVector::new(theta).expect("unit amplitudes")
}
