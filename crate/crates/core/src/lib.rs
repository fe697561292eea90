//! Passive reflection design for a target-mounted intelligent reflecting
//! surface (IRS).
//!
//! The surface reflection vector `theta` is chosen to minimize the largest
//! radar echo reflection gain `|u(phi, omega)^T theta + tau|^2` over a
//! window of transmit/receive spatial-frequency deviations. The window is
//! sampled, the sampled min-max problem is solved exactly through its
//! Lagrange dual (one small LMI), and the primal optimum is recovered in
//! closed form from the optimal multipliers.
//!
//! Modules:
//!
//! * [`geometry`]: steering vectors, direction cosines, region-to-window mapping
//! * [`channel`]: bistatic line-of-sight echo simulation used to cross-check gains
//! * [`gain`]: reflection gain, window sampling and continuous-window maxima
//! * [`lmi`]: dense log-det barrier solver for a single Hermitian LMI
//! * [`optimizer`]: dual assembly, primal recovery, KKT checks, oracle and baselines

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod error;
pub mod gain;
pub mod geometry;
pub mod linalg;
pub mod lmi;
pub mod optimizer;

pub use error::{Error, Result};
pub use gain::{
    gain_profile, reflection_gain, sample_window, steering_of_sample, window_max_gain, ReflectionVector, SamplingMode,
    SamplingPlan, TargetRcs,
};
pub use geometry::{
    angular_window, direction_cosines, ula_steering, upa_response, AngularWindow, ArrayGeometry, RegionRect,
    SpatialFrequencyPair, Vec3,
};
pub use linalg::{real_embed, ComplexMatrix, ComplexVector, HermitianMatrix};
pub use lmi::{solve_lmi, LmiOptions, LmiProblem, LmiSolution};
pub use num_complex::Complex64;
pub use optimizer::{
    assemble_dual, baseline_no_irs, baseline_random_phase, baseline_single_point, build_p4, primal_oracle,
    solve_stealth, stationary_theta, DualVariables, SolveOptions, StealthInstance, StealthSolution, StepSchedule,
};
