//! Reflection gain in the angular domain.
//!
//! For deviation `(phi, omega)` the complex gain is `u^T theta + tau_s`, where
//! `u` is the planar response evaluated at the deviation itself.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{upa_response, AngularWindow, ArrayGeometry, SpatialFrequencyPair};
use crate::linalg::{dot_t, ComplexVector};

/// Isotropic complex radar cross-section of the bare target surface,
/// `4 pi S^2 / lambda^2 * e^{i xi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetRcs {
    pub surface_area: f64,
    pub lambda: f64,
    pub phase: f64,
}

impl TargetRcs {
    pub fn new(surface_area: f64, lambda: f64, phase: f64) -> Result<Self> {
        if !(surface_area.is_finite() && surface_area >= 0.0) {
            return Err(Error::InvalidArgument(format!("surface area must be non-negative, got {surface_area}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("wavelength must be positive, got {lambda}")));
        }
        if !phase.is_finite() {
            return Err(Error::InvalidArgument("rcs phase must be finite".into()));
        }
        Ok(Self { surface_area, lambda, phase })
    }

    /// RCS with a prescribed complex value; `surface_area` is back-filled for `lambda = 1`.
    pub fn from_value(value: Complex64) -> Self {
        let (mag, phase) = value.to_polar();
        Self { surface_area: (mag / (4.0 * PI)).sqrt(), lambda: 1.0, phase }
    }

    pub fn magnitude(&self) -> f64 {
        4.0 * PI * self.surface_area * self.surface_area / (self.lambda * self.lambda)
    }

    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.magnitude(), self.phase)
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        Self { phase, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    UniformGrid,
    Custom,
}

/// Discrete sample set standing in for the continuous window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub k_x: usize,
    pub k_y: usize,
    pub points: Vec<SpatialFrequencyPair>,
    pub mode: SamplingMode,
}

impl SamplingPlan {
    /// Caller-supplied points; all must lie in `window`.
    pub fn custom(points: Vec<SpatialFrequencyPair>, window: &AngularWindow) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument("sampling plan needs at least one point".into()));
        }
        if let Some(p) = points.iter().find(|p| !window.contains(p, 1e-12)) {
            return Err(Error::InvalidArgument(format!("sample {p:?} lies outside the window")));
        }
        Ok(Self { k_x: points.len(), k_y: 1, points, mode: SamplingMode::Custom })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// IRS reflection coefficients, one per element, amplitude at most one.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionVector {
    theta: ComplexVector,
}

impl ReflectionVector {
    pub const AMPLITUDE_TOL: f64 = 1e-9;

    pub fn new(theta: ComplexVector) -> Result<Self> {
        if let Some((n, z)) = theta.iter().enumerate().find(|(_, z)| !(z.norm() <= 1.0 + Self::AMPLITUDE_TOL)) {
            return Err(Error::InvalidArgument(format!("reflection coefficient {n} has amplitude {} > 1", z.norm())));
        }
        Ok(Self { theta })
    }

    pub fn zeros(n: usize) -> Self {
        Self { theta: ComplexVector::zeros(n) }
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.theta
    }

    pub fn into_vector(self) -> ComplexVector {
        self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = f64> + '_ {
        self.theta.iter().map(|z| z.norm())
    }
}

fn grid_axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        vec![0.5 * (lo + hi)]
    } else {
        (0..count).map(|k| if k + 1 == count { hi } else { lo + k as f64 * (hi - lo) / (count - 1) as f64 }).collect()
    }
}

/// Uniform `k_x * k_y` tensor grid over `window`, endpoints included.
pub fn sample_window(window: &AngularWindow, k_x: usize, k_y: usize) -> Result<SamplingPlan> {
    window.validate()?;
    if k_x == 0 || k_y == 0 {
        return Err(Error::InvalidArgument(format!("sample counts must be positive, got k_x={k_x}, k_y={k_y}")));
    }
    if k_x >= 2 && window.phi_width() == 0.0 {
        return Err(Error::InvalidArgument("k_x >= 2 on a zero-width phi range".into()));
    }
    if k_y >= 2 && window.omega_width() == 0.0 {
        return Err(Error::InvalidArgument("k_y >= 2 on a zero-width omega range".into()));
    }
    let phis = grid_axis(window.phi_min, window.phi_max, k_x);
    let omegas = grid_axis(window.omega_min, window.omega_max, k_y);
    let points = phis.iter().flat_map(|&p| omegas.iter().map(move |&o| SpatialFrequencyPair::new(p, o))).collect();
    Ok(SamplingPlan { k_x, k_y, points, mode: SamplingMode::UniformGrid })
}

/// Array response `u_k` at a sampled deviation. Deviations beyond the unit
/// disk are legal here.
pub fn steering_of_sample(point: &SpatialFrequencyPair, geom: &ArrayGeometry) -> ComplexVector {
    upa_response(point, geom)
}

/// `u^T theta + tau_s` at `point`.
pub fn reflection_gain(
    theta: &ReflectionVector,
    point: &SpatialFrequencyPair,
    tau_s: &TargetRcs,
    geom: &ArrayGeometry,
) -> Result<Complex64> {
    if theta.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            actual: theta.len(),
            context: "reflection vector vs array size",
        });
    }
    Ok(gain_of_steering(&steering_of_sample(point, geom), theta.as_vector(), tau_s.value()))
}

pub(crate) fn gain_of_steering(u: &ComplexVector, theta: &ComplexVector, tau: Complex64) -> Complex64 {
    dot_t(u, theta) + tau
}

/// Evaluates `|R|^2` along one axis without materialising steering vectors.
struct GainEvaluator<'a> {
    theta: &'a ComplexVector,
    tau: Complex64,
    n_x: usize,
    n_y: usize,
    d_e: f64,
}

impl GainEvaluator<'_> {
    fn power(&self, phi: f64, omega: f64) -> f64 {
        let mut acc = self.tau;
        for mx in 0..self.n_x {
            for my in 0..self.n_y {
                let phase = -PI * self.d_e * (mx as f64 * phi + my as f64 * omega);
                acc += Complex64::from_polar(1.0, phase) * self.theta[mx * self.n_y + my];
            }
        }
        acc.norm_sqr()
    }
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Maximum of `|R|^2` over the continuous window.
///
/// A tensor grid with `grid_density` points per unit of spatial frequency
/// (endpoints included) locates the peak; golden-section passes along each
/// axis then polish it inside the neighbouring grid cells. Among equal grid
/// values the lexicographically smallest `(phi, omega)` wins, and the
/// refinement only moves the argmax on a strict improvement.
pub fn window_max_gain(
    theta: &ReflectionVector,
    window: &AngularWindow,
    tau_s: &TargetRcs,
    geom: &ArrayGeometry,
    grid_density: f64,
) -> Result<(f64, SpatialFrequencyPair)> {
    window.validate()?;
    if !(grid_density >= 100.0) {
        return Err(Error::InvalidArgument(format!("grid density must be at least 100, got {grid_density}")));
    }
    if theta.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            actual: theta.len(),
            context: "reflection vector vs array size",
        });
    }
    let eval = GainEvaluator {
        theta: theta.as_vector(),
        tau: tau_s.value(),
        n_x: geom.n_x(),
        n_y: geom.n_y(),
        d_e: geom.d_e(),
    };
    let count = |w: f64| if w == 0.0 { 1 } else { ((w * grid_density).ceil() as usize + 1).max(2) };
    let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
        if n == 1 {
            vec![lo]
        } else {
            grid_axis(lo, hi, n)
        }
    };
    let phis = axis(window.phi_min, window.phi_max, count(window.phi_width()));
    let omegas = axis(window.omega_min, window.omega_max, count(window.omega_width()));

    let (mut best, mut ip, mut io) = (f64::NEG_INFINITY, 0usize, 0usize);
    for (i, &p) in phis.iter().enumerate() {
        for (j, &o) in omegas.iter().enumerate() {
            let g = eval.power(p, o);
            if g > best {
                best = g;
                ip = i;
                io = j;
            }
        }
    }
    let mut arg = SpatialFrequencyPair::new(phis[ip], omegas[io]);

    let bracket = |grid: &[f64], i: usize| (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
    let (p_lo, p_hi) = bracket(&phis, ip);
    let (o_lo, o_hi) = bracket(&omegas, io);
    for _ in 0..3 {
        if p_hi > p_lo {
            let (p, g) = golden_max(|p| eval.power(p, arg.omega), p_lo, p_hi, 60);
            if g > best {
                best = g;
                arg.phi = p;
            }
        }
        if o_hi > o_lo {
            let (o, g) = golden_max(|o| eval.power(arg.phi, o), o_lo, o_hi, 60);
            if g > best {
                best = g;
                arg.omega = o;
            }
        }
    }
    Ok((best, arg))
}

/// `|R|^2` at every point of an arbitrary list; used by sweeps and reports.
pub fn gain_profile(
    theta: &ReflectionVector,
    points: &[SpatialFrequencyPair],
    tau_s: &TargetRcs,
    geom: &ArrayGeometry,
) -> Result<Vec<f64>> {
    if theta.len() != geom.len() {
        return Err(Error::DimensionMismatch {
            expected: geom.len(),
            actual: theta.len(),
            context: "reflection vector vs array size",
        });
    }
    let eval = GainEvaluator {
        theta: theta.as_vector(),
        tau: tau_s.value(),
        n_x: geom.n_x(),
        n_y: geom.n_y(),
        d_e: geom.d_e(),
    };
    Ok(points.iter().map(|p| eval.power(p.phi, p.omega)).collect())
}
