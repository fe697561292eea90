//! Bistatic line-of-sight channels and echo simulation.
//!
//! The radar arrays are modeled as half-wavelength ULAs along x whose
//! responses are normalized to unit norm (entries `1/sqrt(M)`), so the
//! noiseless echo power satisfies `|y|^2 = G |R|^2 / M` with
//! `G = M |rho_R rho_T a_T^H x|^2`.
//!
//! Noise is drawn from ChaCha20 seeded with `ChaCha20Rng::seed_from_u64(seed)`.
//! Each antenna consumes two `u64` words `(a, b)`; with `u = (a >> 11) 2^-53`
//! and `v = (b >> 11) 2^-53`, Box-Muller gives
//! `r = sqrt(-2 ln(1 - u))`, `n = sqrt(sigma2 / 2) r (cos 2 pi v + i sin 2 pi v)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gain::{gain_of_steering, ReflectionVector, TargetRcs};
use crate::geometry::{direction_cosines, ula_steering, upa_response, ArrayGeometry, Vec3};
use crate::linalg::{ComplexMatrix, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Linear path gain at the 1 m reference distance.
    pub alpha: f64,
    pub lambda: f64,
    /// Target speed in m/s.
    pub speed: f64,
    /// Noise variance per receive antenna.
    pub sigma2: f64,
    pub m_antennas: usize,
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be positive, got {}", self.lambda)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return Err(Error::InvalidArgument(format!("speed must be non-negative, got {}", self.speed)));
        }
        if self.m_antennas == 0 {
            return Err(Error::InvalidArgument("m_antennas must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarWaveform {
    x: ComplexVector,
}

impl RadarWaveform {
    pub fn new(x: ComplexVector) -> Result<Self> {
        if x.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidArgument("waveform entries must be finite".into()));
        }
        if x.iter().all(|z| z.norm_sqr() == 0.0) {
            return Err(Error::InvalidArgument("waveform must not be all zero".into()));
        }
        Ok(Self { x })
    }

    /// Unit pulse on the first antenna.
    pub fn first_antenna(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument("m_antennas must be at least 1".into()));
        }
        let mut x = ComplexVector::zeros(m);
        x[0] = Complex64::new(1.0, 0.0);
        Ok(Self { x })
    }

    pub fn as_vector(&self) -> &ComplexVector {
        &self.x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Transmit,
    Receive,
}

/// One radar-target hop.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkChannel {
    pub rho: Complex64,
    pub doppler: f64,
    /// Planar response at the surface, unit-modulus entries.
    pub array_response_irs: ComplexVector,
    /// Radar ULA response, unit norm.
    pub array_response_radar: ComplexVector,
    pub distance: f64,
}

impl LinkChannel {
    pub fn new(q: &Vec3, w: &Vec3, geom: &ArrayGeometry, params: &ChannelParams) -> Result<Self> {
        params.validate()?;
        let distance = w.sub(q).norm();
        let sf = direction_cosines(q, w)?;
        Ok(Self {
            rho: path_gain(q, w, params)?,
            doppler: doppler_shift(q, w, params, Link::Transmit)?,
            array_response_irs: upa_response(&sf, geom),
            array_response_radar: radar_response(q, w, params.m_antennas)?,
            distance,
        })
    }

    /// `rho * exp(i 2 pi f t)`.
    pub fn phasor(&self, t: f64) -> Complex64 {
        self.rho * Complex64::from_polar(1.0, 2.0 * PI * self.doppler * t)
    }
}

/// `sqrt(alpha) / d * exp(-i 2 pi d / lambda)`.
pub fn path_gain(q: &Vec3, w: &Vec3, params: &ChannelParams) -> Result<Complex64> {
    let d = w.sub(q).norm();
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::DegenerateGeometry(format!("coincident points {q:?} and {w:?}")));
    }
    let phase = (-2.0 * PI * d / params.lambda).rem_euclid(2.0 * PI);
    Ok(Complex64::from_polar(params.alpha.sqrt() / d, phase))
}

/// Zenith (from the surface normal) and azimuth of `w` seen from `q`.
fn link_angles(q: &Vec3, w: &Vec3) -> Result<(f64, f64)> {
    let d = w.sub(q);
    let r = d.norm();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::DegenerateGeometry(format!("coincident points {q:?} and {w:?}")));
    }
    let zenith = (d.z.abs() / r).clamp(0.0, 1.0).acos();
    let azimuth = d.y.atan2(d.x);
    Ok((zenith, azimuth))
}

/// `v cos(zenith) cos(azimuth) / lambda`. Both links use the same formula on
/// their own geometry.
pub fn doppler_shift(q: &Vec3, w: &Vec3, params: &ChannelParams, _link: Link) -> Result<f64> {
    let (zenith, azimuth) = link_angles(q, w)?;
    Ok(doppler_from_angles(params.speed, zenith, azimuth, params.lambda))
}

pub fn doppler_from_angles(speed: f64, zenith: f64, azimuth: f64, lambda: f64) -> f64 {
    speed * zenith.cos() * azimuth.cos() / lambda
}

fn radar_response(q: &Vec3, w: &Vec3, m: usize) -> Result<ComplexVector> {
    // departure direction from the radar towards the target
    let sf = direction_cosines(w, q)?;
    let scale = Complex64::new(1.0 / (m as f64).sqrt(), 0.0);
    Ok(ula_steering(sf.phi, m)? * scale)
}

/// Radar-to-surface channel `H_T` (N x M) and the direct radar-to-target row `h_T^H` (length M).
pub fn build_transmit_channel(
    q: &Vec3,
    w_t: &Vec3,
    t: f64,
    geom: &ArrayGeometry,
    params: &ChannelParams,
) -> Result<(ComplexMatrix, ComplexVector)> {
    let link = LinkChannel::new(q, w_t, geom, params)?;
    let ph = link.phasor(t);
    let row = link.array_response_radar.map(|z| z.conj() * ph);
    let h = &link.array_response_irs * row.transpose();
    Ok((h, row))
}

/// Surface-to-radar channel `H_R` (M x N) and the direct target-to-radar column `h_R` (length M).
pub fn build_receive_channel(
    q: &Vec3,
    w_r: &Vec3,
    t: f64,
    geom: &ArrayGeometry,
    params: &ChannelParams,
) -> Result<(ComplexMatrix, ComplexVector)> {
    let link = LinkChannel::new(q, w_r, geom, params)?;
    let ph = link.phasor(t);
    let col = &link.array_response_radar * ph;
    let h = &col * link.array_response_irs.adjoint();
    Ok((h, col))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoSnapshot {
    pub y: ComplexVector,
    pub snr: f64,
    pub g_norm: f64,
    pub reflection_gain: Complex64,
    pub noise_seed: u64,
}

/// Everything one echo evaluation needs besides the noise.
#[derive(Debug, Clone)]
pub struct EchoScene<'a> {
    pub q: Vec3,
    pub w_t: Vec3,
    pub w_r: Vec3,
    pub theta: &'a ReflectionVector,
    pub waveform: &'a RadarWaveform,
    pub t: f64,
    pub geom: &'a ArrayGeometry,
    pub params: &'a ChannelParams,
    pub tau_s: &'a TargetRcs,
}

struct EchoParts {
    y: ComplexVector,
    g_norm: f64,
    gain: Complex64,
}

fn noiseless_echo(scene: &EchoScene<'_>) -> Result<EchoParts> {
    let m = scene.params.m_antennas;
    let n = scene.geom.len();
    if scene.theta.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: scene.theta.len(),
            context: "reflection vector vs array size",
        });
    }
    if scene.waveform.as_vector().len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: scene.waveform.as_vector().len(),
            context: "waveform vs radar antennas",
        });
    }
    let x = scene.waveform.as_vector();
    let theta = scene.theta.as_vector();
    let (h_t, h_t_row) = build_transmit_channel(&scene.q, &scene.w_t, scene.t, scene.geom, scene.params)?;
    let (h_r, h_r_col) = build_receive_channel(&scene.q, &scene.w_r, scene.t, scene.geom, scene.params)?;

    let incident = &h_t * x;
    let reflected = ComplexVector::from_fn(n, |i, _| theta[i] * incident[i]);
    let direct: Complex64 = h_t_row.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let tau = scene.tau_s.value();
    let y = &h_r * reflected + &h_r_col * (tau * direct);

    let tx = LinkChannel::new(&scene.q, &scene.w_t, scene.geom, scene.params)?;
    let rx = LinkChannel::new(&scene.q, &scene.w_r, scene.geom, scene.params)?;
    let ax: Complex64 = tx.array_response_radar.iter().zip(x.iter()).map(|(a, b)| a.conj() * b).sum();
    let g_norm = m as f64 * (rx.rho * tx.rho * ax).norm_sqr();

    // Hadamard form a_T^H diag(theta) a_R + tau
    let hadamard = rx
        .array_response_irs
        .iter()
        .zip(tx.array_response_irs.iter())
        .map(|(a_t, a_r)| a_t.conj() * a_r)
        .collect::<Vec<_>>();
    let gain = gain_of_steering(&ComplexVector::from_vec(hadamard), theta, tau);
    Ok(EchoParts { y, g_norm, gain })
}

fn gaussian_noise(m: usize, sigma2: f64, seed: u64) -> ComplexVector {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let unit = |w: u64| (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let scale = (sigma2 / 2.0).sqrt();
    ComplexVector::from_fn(m, |_, _| {
        let u = unit(rng.next_u64());
        let v = unit(rng.next_u64());
        let r = (-2.0 * (1.0 - u).ln()).sqrt();
        Complex64::from_polar(scale * r, 2.0 * PI * v)
    })
}

/// Received echo `H_R diag(theta) H_T x + tau h_R h_T^H x + n`.
///
/// `snr` is computed from the noiseless part as `(G / (M sigma2)) |R|^2`.
pub fn simulate_echo(scene: &EchoScene<'_>, noise_seed: u64) -> Result<EchoSnapshot> {
    let parts = noiseless_echo(scene)?;
    let noise = gaussian_noise(scene.params.m_antennas, scene.params.sigma2, noise_seed);
    let snr = snr_from_gain(parts.g_norm, parts.gain, scene.params);
    Ok(EchoSnapshot { y: parts.y + noise, snr, g_norm: parts.g_norm, reflection_gain: parts.gain, noise_seed })
}

fn snr_from_gain(g_norm: f64, gain: Complex64, params: &ChannelParams) -> f64 {
    g_norm / (params.m_antennas as f64 * params.sigma2) * gain.norm_sqr()
}

/// Receiver SNR `(G / (M sigma2)) |R|^2` of the scene.
pub fn receiver_snr(scene: &EchoScene<'_>) -> Result<f64> {
    let parts = noiseless_echo(scene)?;
    Ok(snr_from_gain(parts.g_norm, parts.gain, scene.params))
}

/// Noiseless echo power over the noise variance, `|y_noiseless|^2 / sigma2`.
pub fn echo_power_snr(scene: &EchoScene<'_>) -> Result<f64> {
    let parts = noiseless_echo(scene)?;
    Ok(parts.y.norm_squared() / scene.params.sigma2)
}
