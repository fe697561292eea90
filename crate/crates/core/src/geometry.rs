//! Array geometry, steering vectors and the region-to-window mapping.
//!
//! The surface lies parallel to the x-y plane. Element `(m_x, m_y)` sits at
//! flat index `m_x * n_y + m_y`, so the x-factor of every Kronecker product
//! varies slowest.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{kron, ComplexVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn sub(&self, other: &Vec3) -> Vec3 {
        Vec3::new(self.x - other.x, self.y - other.y, self.z - other.z)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Uniform planar array of `n_x * n_y` elements with spacing `delta_e`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    n_x: usize,
    n_y: usize,
    delta_e: f64,
    lambda: f64,
}

impl ArrayGeometry {
    pub fn new(n_x: usize, n_y: usize, delta_e: f64, lambda: f64) -> Result<Self> {
        if n_x == 0 || n_y == 0 {
            return Err(Error::InvalidArgument(format!("element counts must be positive, got n_x={n_x}, n_y={n_y}")));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidArgument(format!("wavelength must be positive, got {lambda}")));
        }
        if !(delta_e.is_finite() && delta_e > 0.0 && delta_e <= lambda / 2.0 * (1.0 + 1e-12)) {
            return Err(Error::InvalidArgument(format!(
                "element spacing must lie in (0, lambda/2], got {delta_e} with lambda={lambda}"
            )));
        }
        Ok(Self { n_x, n_y, delta_e, lambda })
    }

    /// Geometry with a prescribed normalized spacing `d_e = 2 delta_e / lambda` and unit wavelength.
    pub fn with_normalized_spacing(n_x: usize, n_y: usize, d_e: f64) -> Result<Self> {
        Self::new(n_x, n_y, d_e / 2.0, 1.0)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_e(&self) -> f64 {
        self.delta_e
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn d_e(&self) -> f64 {
        (2.0 * self.delta_e / self.lambda).min(1.0)
    }
}

/// Direction-cosine pair along x and y. Single links stay in the unit disk,
/// transmit/receive deviations in `[-2, 2]^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialFrequencyPair {
    pub phi: f64,
    pub omega: f64,
}

impl SpatialFrequencyPair {
    pub const fn new(phi: f64, omega: f64) -> Self {
        Self { phi, omega }
    }

    /// Deviation `self - other`, i.e. receive-side minus transmit-side frequency.
    pub fn deviation(&self, other: &SpatialFrequencyPair) -> SpatialFrequencyPair {
        SpatialFrequencyPair::new(self.phi - other.phi, self.omega - other.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub z: f64,
}

impl RegionRect {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, z: f64) -> Result<Self> {
        let r = Self { x_min, x_max, y_min, y_max, z };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max, self.z].iter().all(|v| v.is_finite());
        if !finite || self.x_min > self.x_max || self.y_min > self.y_max {
            return Err(Error::InvalidArgument(format!("malformed region {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, w: &Vec3) -> bool {
        (self.x_min..=self.x_max).contains(&w.x) && (self.y_min..=self.y_max).contains(&w.y)
    }
}

/// Box `[phi_min, phi_max] x [omega_min, omega_max]` of spatial-frequency deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularWindow {
    pub phi_min: f64,
    pub phi_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl AngularWindow {
    pub fn new(phi_min: f64, phi_max: f64, omega_min: f64, omega_max: f64) -> Result<Self> {
        let w = Self { phi_min, phi_max, omega_min, omega_max };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let in_range = [self.phi_min, self.phi_max, self.omega_min, self.omega_max]
            .iter()
            .all(|v| v.is_finite() && v.abs() <= 2.0);
        if !in_range || self.phi_min > self.phi_max || self.omega_min > self.omega_max {
            return Err(Error::InvalidArgument(format!("malformed angular window {self:?}")));
        }
        Ok(())
    }

    /// Horizontal window `[phi_min, phi_max] x {0}` used by linear arrays.
    pub fn horizontal(phi_min: f64, phi_max: f64) -> Result<Self> {
        Self::new(phi_min, phi_max, 0.0, 0.0)
    }

    pub fn phi_width(&self) -> f64 {
        self.phi_max - self.phi_min
    }

    pub fn omega_width(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    pub fn contains(&self, p: &SpatialFrequencyPair, tol: f64) -> bool {
        p.phi >= self.phi_min - tol
            && p.phi <= self.phi_max + tol
            && p.omega >= self.omega_min - tol
            && p.omega <= self.omega_max + tol
    }

    pub fn contains_window(&self, inner: &AngularWindow, tol: f64) -> bool {
        inner.phi_min >= self.phi_min - tol
            && inner.phi_max <= self.phi_max + tol
            && inner.omega_min >= self.omega_min - tol
            && inner.omega_max <= self.omega_max + tol
    }
}

/// ULA steering vector `[1, e^{-i pi phi}, ..., e^{-i pi (n-1) phi}]`.
pub fn ula_steering(phi: f64, n: usize) -> Result<ComplexVector> {
    if n == 0 {
        return Err(Error::InvalidArgument("steering vector length must be positive".into()));
    }
    Ok(ComplexVector::from_fn(n, |m, _| {
        if m == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::from_polar(1.0, -PI * m as f64 * phi)
        }
    }))
}

/// Direction cosines of `w` as seen from `q`.
pub fn direction_cosines(q: &Vec3, w: &Vec3) -> Result<SpatialFrequencyPair> {
    let d = w.sub(q);
    let dist = d.norm();
    if !(dist.is_finite() && dist > 0.0) {
        return Err(Error::DegenerateGeometry(format!("coincident points {q:?} and {w:?}")));
    }
    Ok(SpatialFrequencyPair::new(d.x / dist, d.y / dist))
}

/// Planar array response `e(d_e phi, n_x) ⊗ e(d_e omega, n_y)`.
pub fn upa_response(sf: &SpatialFrequencyPair, geom: &ArrayGeometry) -> ComplexVector {
    let d_e = geom.d_e();
    // lengths are validated by ArrayGeometry
    let ex = ula_steering(d_e * sf.phi, geom.n_x()).expect("n_x >= 1");
    let ey = ula_steering(d_e * sf.omega, geom.n_y()).expect("n_y >= 1");
    kron(&ex, &ey)
}

/// Deviation window covering every transmitter/receiver pair inside `region`.
///
/// Both endpoints range over the region independently, so each bound is the
/// extreme of one direction cosine minus the opposite extreme of the other.
/// The search grid always includes the four corners plus the lines through
/// the projection of `q` onto the region, where the cross-axis extremes lie.
pub fn angular_window(region: &RegionRect, q: &Vec3, grid_per_axis: usize) -> Result<AngularWindow> {
    region.validate()?;
    if grid_per_axis < 2 {
        return Err(Error::InvalidArgument(format!("grid_per_axis must be at least 2, got {grid_per_axis}")));
    }
    if !q.is_finite() || q.z <= region.z {
        return Err(Error::DegenerateGeometry(format!(
            "target height {} must lie strictly above the region plane {}",
            q.z, region.z
        )));
    }

    let axis = |lo: f64, hi: f64, anchor: f64| -> Vec<f64> {
        let mut pts: Vec<f64> =
            (0..grid_per_axis).map(|i| lo + (hi - lo) * i as f64 / (grid_per_axis - 1) as f64).collect();
        pts.push(anchor.clamp(lo, hi));
        pts
    };
    let xs = axis(region.x_min, region.x_max, q.x);
    let ys = axis(region.y_min, region.y_max, q.y);

    let (mut px_lo, mut px_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut py_lo, mut py_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in &xs {
        for &y in &ys {
            let sf = direction_cosines(q, &Vec3::new(x, y, region.z))?;
            px_lo = px_lo.min(sf.phi);
            px_hi = px_hi.max(sf.phi);
            py_lo = py_lo.min(sf.omega);
            py_hi = py_hi.max(sf.omega);
        }
    }
    AngularWindow::new(px_lo - px_hi, px_hi - px_lo, py_lo - py_hi, py_hi - py_lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_vec_eq(got: &ComplexVector, want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() <= tol, "{g} != {w}");
        }
    }

    #[test]
    fn ula_examples() {
        assert_vec_eq(&ula_steering(0.0, 3).unwrap(), &[c(1.0, 0.0); 3], 0.0);
        assert_vec_eq(&ula_steering(1.0, 2).unwrap(), &[c(1.0, 0.0), c(-1.0, 0.0)], 1e-15);
        assert_vec_eq(&ula_steering(0.5, 4).unwrap(), &[c(1.0, 0.0), c(0.0, -1.0), c(-1.0, 0.0), c(0.0, 1.0)], 1e-15);
        assert_eq!(ula_steering(0.37, 5).unwrap()[0], c(1.0, 0.0));
        assert!(matches!(ula_steering(0.1, 0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn direction_cosine_examples() {
        let q = Vec3::new(0.0, 0.0, 100.0);
        let nadir = direction_cosines(&q, &Vec3::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(nadir, SpatialFrequencyPair::new(0.0, 0.0));
        let east = direction_cosines(&q, &Vec3::new(100.0, 0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(east.phi, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(east.omega, 0.0);
        let south = direction_cosines(&q, &Vec3::new(0.0, -100.0, 0.0)).unwrap();
        assert_abs_diff_eq!(south.phi, 0.0);
        assert_abs_diff_eq!(south.omega, -std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(matches!(direction_cosines(&q, &q), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn upa_examples() {
        let g = ArrayGeometry::with_normalized_spacing(3, 4, 0.8).unwrap();
        assert_vec_eq(&upa_response(&SpatialFrequencyPair::new(0.0, 0.0), &g), &[c(1.0, 0.0); 12], 0.0);

        let g = ArrayGeometry::with_normalized_spacing(2, 2, 1.0).unwrap();
        assert_vec_eq(
            &upa_response(&SpatialFrequencyPair::new(1.0, 0.0), &g),
            &[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0)],
            1e-15,
        );

        let g = ArrayGeometry::with_normalized_spacing(3, 2, 1.0).unwrap();
        let got = upa_response(&SpatialFrequencyPair::new(0.3, 0.7), &g);
        let mut want = Vec::new();
        for mx in 0..3 {
            for my in 0..2 {
                want.push(Complex64::from_polar(1.0, -PI * (mx as f64 * 0.3 + my as f64 * 0.7)));
            }
        }
        assert_vec_eq(&got, &want, 1e-12);
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::new(0, 1, 0.075, 0.15).is_err());
        assert!(ArrayGeometry::new(4, 1, 0.1, 0.15).is_err());
        assert!(ArrayGeometry::new(4, 1, 0.0, 0.15).is_err());
        let g = ArrayGeometry::new(16, 1, 0.075, 0.15).unwrap();
        assert_eq!(g.d_e(), 1.0);
        assert_eq!(g.len(), 16);
    }

    #[test]
    fn window_of_single_point_region_is_zero() {
        let r = RegionRect::new(30.0, 30.0, -10.0, -10.0, 0.0).unwrap();
        let w = angular_window(&r, &Vec3::new(0.0, 0.0, 100.0), 5).unwrap();
        assert_eq!(w, AngularWindow { phi_min: 0.0, phi_max: 0.0, omega_min: 0.0, omega_max: 0.0 });
    }

    #[test]
    fn window_of_centered_square_is_symmetric() {
        let r = RegionRect::new(-40.0, 40.0, -40.0, 40.0, 0.0).unwrap();
        let w = angular_window(&r, &Vec3::new(0.0, 0.0, 120.0), 7).unwrap();
        assert_abs_diff_eq!(w.phi_min, -w.phi_max, epsilon = 1e-15);
        assert_abs_diff_eq!(w.omega_min, -w.omega_max, epsilon = 1e-15);
        assert!(w.phi_max > 0.0);
    }

    #[test]
    fn window_matches_exhaustive_grid() {
        let r = RegionRect::new(-50.0, 50.0, -50.0, 50.0, 0.0).unwrap();
        let q = Vec3::new(0.0, 0.0, 100.0);
        let w = angular_window(&r, &q, 101).unwrap();

        // independent oracle: exhaustive 1001 x 1001 evaluation
        let n = 1001;
        let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
        for i in 0..n {
            for j in 0..n {
                let x = -50.0 + 100.0 * i as f64 / (n - 1) as f64;
                let y = -50.0 + 100.0 * j as f64 / (n - 1) as f64;
                let d = ((x - q.x).powi(2) + (y - q.y).powi(2) + q.z.powi(2)).sqrt();
                let (p, o) = ((x - q.x) / d, (y - q.y) / d);
                lo = (lo.0.min(p), lo.1.min(o));
                hi = (hi.0.max(p), hi.1.max(o));
            }
        }
        assert_abs_diff_eq!(w.phi_min, lo.0 - hi.0, epsilon = 1e-3);
        assert_abs_diff_eq!(w.phi_max, hi.0 - lo.0, epsilon = 1e-3);
        assert_abs_diff_eq!(w.omega_min, lo.1 - hi.1, epsilon = 1e-3);
        assert_abs_diff_eq!(w.omega_max, hi.1 - lo.1, epsilon = 1e-3);
    }

    #[test]
    fn window_rejects_target_below_plane() {
        let r = RegionRect::new(-1.0, 1.0, -1.0, 1.0, 10.0).unwrap();
        assert!(matches!(angular_window(&r, &Vec3::new(0.0, 0.0, 10.0), 4), Err(Error::DegenerateGeometry(_))));
        assert!(angular_window(&r, &Vec3::new(0.0, 0.0, 20.0), 1).is_err());
    }

    proptest! {
        #[test]
        fn ula_entries_are_unimodular(phi in -2.0f64..2.0, n in 1usize..64) {
            for z in ula_steering(phi, n).unwrap().iter() {
                prop_assert!((z.norm() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn upa_matches_double_loop(
            phi in -2.0f64..2.0, omega in -2.0f64..2.0,
            nx in 1usize..9, ny in 1usize..9, d_e in 0.05f64..1.0,
        ) {
            let g = ArrayGeometry::with_normalized_spacing(nx, ny, d_e).unwrap();
            let got = upa_response(&SpatialFrequencyPair::new(phi, omega), &g);
            for mx in 0..nx {
                for my in 0..ny {
                    let want = Complex64::from_polar(1.0, -PI * d_e * (mx as f64 * phi + my as f64 * omega));
                    prop_assert!((got[mx * ny + my] - want).norm() <= 1e-12);
                }
            }
        }

        #[test]
        fn direction_cosines_in_unit_disk(
            qx in -1e3f64..1e3, qy in -1e3f64..1e3, qz in -1e3f64..1e3,
            wx in -1e3f64..1e3, wy in -1e3f64..1e3, wz in -1e3f64..1e3,
        ) {
            let (q, w) = (Vec3::new(qx, qy, qz), Vec3::new(wx, wy, wz));
            prop_assume!(w.sub(&q).norm() > 1e-9);
            let sf = direction_cosines(&q, &w).unwrap();
            prop_assert!(sf.phi * sf.phi + sf.omega * sf.omega <= 1.0 + 1e-12);
        }

        #[test]
        fn window_refinement_is_monotone(
            x0 in -200.0f64..200.0, wx in 0.0f64..300.0,
            y0 in -200.0f64..200.0, wy in 0.0f64..300.0,
            qx in -100.0f64..100.0, qy in -100.0f64..100.0, qz in 20.0f64..500.0,
            g in 2usize..12,
        ) {
            let r = RegionRect::new(x0, x0 + wx, y0, y0 + wy, 0.0).unwrap();
            let q = Vec3::new(qx, qy, qz);
            let coarse = angular_window(&r, &q, g).unwrap();
            let fine = angular_window(&r, &q, 2 * g).unwrap();
            prop_assert!(fine.contains_window(&coarse, 1e-12));
            let origin = SpatialFrequencyPair::new(0.0, 0.0);
            prop_assert!(coarse.contains(&origin, 0.0) && fine.contains(&origin, 0.0));
        }
    }
}
