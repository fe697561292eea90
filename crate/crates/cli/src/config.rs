//! Experiment configuration.
//!
//! A TOML file with one table per concern. Every key has a default, so an
//! empty file reproduces the reference setup: 2 GHz (lambda = 0.15 m),
//! half-wavelength spacing, a 16-element ULA, S = 0.1 m^2, the window
//! Phi in [-0.25, 0.25], and K = 20 uniform samples. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::Path;

use irs_stealth::{AngularWindow, ArrayGeometry, RegionRect, SolveOptions, StealthInstance, TargetRcs, Vec3};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Free-space propagation speed. 3e8 m/s is what makes 2 GHz map to exactly 0.15 m.
pub const SPEED_OF_LIGHT: f64 = 3e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RcsPhaseMode {
    /// `xi = 0`.
    Zero,
    /// `xi` uniform on `[0, 2 pi)`, drawn from the run seed.
    SeededUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub array: ArraySection,
    pub target: TargetSection,
    pub window: WindowSection,
    pub sampling: SamplingSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub simulate: SimulateSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArraySection {
    pub frequency_hz: f64,
    /// Element spacing in meters.
    pub delta_e: f64,
    pub n_x: usize,
    pub n_y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetSection {
    /// Effective reflecting area `S` in m^2.
    pub surface_area_s: f64,
    pub rcs_phase_mode: RcsPhaseMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub phi_min: f64,
    pub phi_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSection {
    pub k_x: usize,
    pub k_y: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    /// Grid points per unit of spatial frequency for continuous-window maxima.
    pub fine_density: f64,
    pub max_newton: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// `sweep-gain`: evaluation grid over Phi.
    pub phi_start: f64,
    pub phi_stop: f64,
    pub phi_points: usize,
    /// `sweep-elements`.
    pub n_x_values: Vec<usize>,
    /// Random-phase draws averaged per point in `sweep-elements`.
    pub random_trials: usize,
    /// `sweep-samples`.
    pub k_values: Vec<usize>,
    /// `(N_x, Phi_max)` pairs for `sweep-samples`; each uses the window `[-Phi_max, Phi_max]`.
    pub sample_cases: Vec<(usize, f64)>,
    /// Worker threads; 0 picks the number of CPUs.
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Target (surface) position `[x, y, z]` in meters.
    pub target: [f64; 3],
    pub region_x: [f64; 2],
    pub region_y: [f64; 2],
    pub region_z: f64,
    /// Grid per axis used when mapping the region to its angular window.
    pub window_grid: usize,
    pub trials: usize,
    pub m_antennas: usize,
    pub alpha: f64,
    pub speed: f64,
    pub sigma2: f64,
    /// Snapshot spacing in seconds.
    pub time_step: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// Written to stdout when empty.
    pub path: String,
}

impl Default for ArraySection {
    fn default() -> Self {
        Self { frequency_hz: 2e9, delta_e: 0.075, n_x: 16, n_y: 1 }
    }
}

impl Default for TargetSection {
    fn default() -> Self {
        Self { surface_area_s: 0.1, rcs_phase_mode: RcsPhaseMode::Zero }
    }
}

impl Default for WindowSection {
    fn default() -> Self {
        Self { phi_min: -0.25, phi_max: 0.25, omega_min: 0.0, omega_max: 0.0 }
    }
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self { k_x: 20, k_y: 1 }
    }
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { tol: 1e-7, fine_density: 1000.0, max_newton: 2000 }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            phi_start: -0.5,
            phi_stop: 0.5,
            phi_points: 1001,
            n_x_values: vec![4, 8, 16, 32],
            random_trials: 100,
            k_values: vec![2, 5, 10, 20, 40],
            sample_cases: vec![(8, 0.25), (16, 0.25), (32, 0.25), (16, 0.4)],
            workers: 0,
        }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self {
            target: [0.0, 0.0, 1000.0],
            region_x: [-100.0, 100.0],
            region_y: [-100.0, 100.0],
            region_z: 0.0,
            window_grid: 101,
            trials: 100,
            m_antennas: 8,
            alpha: 1e-3,
            speed: 100.0,
            sigma2: 1e-13,
            time_step: 1e-3,
        }
    }
}

/// Independent random streams carved out of the run seed.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    RcsPhase = 1,
    RandomBaseline = 2,
    RadarPlacement = 3,
    Noise = 4,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::from_toml(&e, text))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    /// The resolved configuration, as embedded in every output.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always serializable")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, message: String| Err(CliError::config(field, message));
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                bad(field, format!("must be positive and finite, got {v}"))
            }
        };
        positive("array.frequency_hz", self.array.frequency_hz)?;
        positive("array.delta_e", self.array.delta_e)?;
        if self.array.delta_e > self.lambda() / 2.0 * (1.0 + 1e-12) {
            return bad("array.delta_e", format!("must not exceed lambda / 2 = {}", self.lambda() / 2.0));
        }
        if self.array.n_x == 0 {
            return bad("array.n_x", "must be at least 1".into());
        }
        if self.array.n_y == 0 {
            return bad("array.n_y", "must be at least 1".into());
        }
        positive("target.surface_area_s", self.target.surface_area_s)?;
        let w = &self.window;
        for (field, lo, hi) in [("phi", w.phi_min, w.phi_max), ("omega", w.omega_min, w.omega_max)] {
            for (end, v) in [("min", lo), ("max", hi)] {
                if !(-2.0..=2.0).contains(&v) {
                    return bad(&format!("window.{field}_{end}"), format!("must lie in [-2, 2], got {v}"));
                }
            }
            if lo > hi {
                return bad(&format!("window.{field}_max"), format!("must be at least {field}_min = {lo}, got {hi}"));
            }
        }
        AngularWindow::new(self.window.phi_min, self.window.phi_max, self.window.omega_min, self.window.omega_max)
            .map_err(|e| CliError::config("window", e.to_string()))?;
        if self.sampling.k_x == 0 {
            return bad("sampling.k_x", "must be at least 1".into());
        }
        if self.sampling.k_y == 0 {
            return bad("sampling.k_y", "must be at least 1".into());
        }
        positive("solver.tol", self.solver.tol)?;
        if self.solver.fine_density < 100.0 || !self.solver.fine_density.is_finite() {
            return bad("solver.fine_density", format!("must be at least 100, got {}", self.solver.fine_density));
        }
        if self.solver.max_newton == 0 {
            return bad("solver.max_newton", "must be at least 1".into());
        }
        if !(self.sweep.phi_start < self.sweep.phi_stop) || self.sweep.phi_start < -2.0 || self.sweep.phi_stop > 2.0 {
            return bad("sweep.phi_start", "need -2 <= phi_start < phi_stop <= 2".into());
        }
        if self.sweep.phi_points < 2 {
            return bad("sweep.phi_points", "must be at least 2".into());
        }
        if self.sweep.n_x_values.contains(&0) {
            return bad("sweep.n_x_values", "entries must be at least 1".into());
        }
        if self.sweep.k_values.contains(&0) {
            return bad("sweep.k_values", "entries must be at least 1".into());
        }
        if self.sweep.random_trials == 0 {
            return bad("sweep.random_trials", "must be at least 1".into());
        }
        for (n, phi) in &self.sweep.sample_cases {
            if *n == 0 || !(*phi >= 0.0 && *phi <= 1.0) {
                return bad("sweep.sample_cases", format!("need N_x >= 1 and 0 <= Phi_max <= 1, got ({n}, {phi})"));
            }
        }
        let s = &self.simulate;
        if s.trials == 0 {
            return bad("simulate.trials", "must be at least 1".into());
        }
        if s.m_antennas == 0 {
            return bad("simulate.m_antennas", "must be at least 1".into());
        }
        positive("simulate.alpha", s.alpha)?;
        positive("simulate.sigma2", s.sigma2)?;
        if !(s.speed >= 0.0 && s.speed.is_finite()) {
            return bad("simulate.speed", format!("must be non-negative, got {}", s.speed));
        }
        if !(s.time_step >= 0.0 && s.time_step.is_finite()) {
            return bad("simulate.time_step", format!("must be non-negative, got {}", s.time_step));
        }
        if s.window_grid < 2 {
            return bad("simulate.window_grid", "must be at least 2".into());
        }
        self.region().map_err(|e| CliError::config("simulate.region_x", e.to_string()))?;
        if !(s.target[2] > s.region_z) {
            return bad("simulate.target", "target must lie above the region plane".into());
        }
        Ok(())
    }

    pub fn lambda(&self) -> f64 {
        SPEED_OF_LIGHT / self.array.frequency_hz
    }

    pub fn geometry(&self, n_x: usize, n_y: usize) -> Result<ArrayGeometry, CliError> {
        Ok(ArrayGeometry::new(n_x, n_y, self.array.delta_e, self.lambda())?)
    }

    pub fn window(&self) -> AngularWindow {
        AngularWindow {
            phi_min: self.window.phi_min,
            phi_max: self.window.phi_max,
            omega_min: self.window.omega_min,
            omega_max: self.window.omega_max,
        }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(stream as u64);
        rng
    }

    /// RCS phase `xi` for this run.
    pub fn rcs_phase(&self) -> f64 {
        match self.target.rcs_phase_mode {
            RcsPhaseMode::Zero => 0.0,
            RcsPhaseMode::SeededUniform => {
                let w = self.rng(Stream::RcsPhase).next_u64();
                2.0 * PI * ((w >> 11) as f64 / (1u64 << 53) as f64)
            }
        }
    }

    pub fn rcs(&self) -> Result<TargetRcs, CliError> {
        Ok(TargetRcs::new(self.target.surface_area_s, self.lambda(), self.rcs_phase())?)
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions { tol: self.solver.tol, max_newton: self.solver.max_newton, ..SolveOptions::default() }
    }

    /// Instance for the configured array, window and sampling.
    pub fn instance(&self) -> Result<StealthInstance, CliError> {
        self.instance_with(self.array.n_x, self.window(), self.sampling.k_x)
    }

    /// Instance with `N_x`, the window and `k_x` replaced.
    pub fn instance_with(&self, n_x: usize, window: AngularWindow, k_x: usize) -> Result<StealthInstance, CliError> {
        Ok(StealthInstance::uniform(self.geometry(n_x, self.array.n_y)?, self.rcs()?, window, k_x, self.sampling.k_y)?)
    }

    pub fn region(&self) -> Result<RegionRect, irs_stealth::Error> {
        let s = &self.simulate;
        RegionRect::new(s.region_x[0], s.region_x[1], s.region_y[0], s.region_y[1], s.region_z)
    }

    pub fn target_position(&self) -> Vec3 {
        let [x, y, z] = self.simulate.target;
        Vec3::new(x, y, z)
    }

    pub fn worker_pool(&self) -> Result<rayon::ThreadPool, CliError> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.sweep.workers)
            .build()
            .map_err(|e| CliError::Internal(e.to_string()))
    }
}
