//! Explicit component primitives and their topology description functions.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// A geometric primitive whose parameters are design variables.
///
/// Points are always passed as `[f64; 3]`; 2D components ignore the z entry.
pub trait Component: Clone + Send + Sync + std::fmt::Debug + 'static {
    /// Spatial dimension (2 or 3).
    const DIM: usize;
    /// Number of design parameters per component.
    const NUM_PARAMS: usize;
    /// Parameter names in design-vector order.
    const PARAM_NAMES: &'static [&'static str];
    /// Indices of the center coordinates within the parameter vector.
    const CENTER_PARAMS: &'static [usize];
    /// Indices of size-like parameters (half-lengths, thicknesses).
    const SIZE_PARAMS: &'static [usize];
    /// Indices of angle parameters.
    const ANGLE_PARAMS: &'static [usize];
    /// Admissible closed angle range used for optimizer bounds.
    const ANGLE_RANGE: (f64, f64);

    fn from_params(params: &[f64]) -> Result<Self>;

    fn params(&self) -> Vec<f64>;

    fn center(&self) -> [f64; 3];

    /// Component-level TDF value at `x`.
    fn tdf(&self, x: &[f64; 3], p_exp: i32) -> f64;

    /// TDF value together with its partial derivatives with respect to every
    /// parameter, written into `grad` (length `NUM_PARAMS`).
    fn tdf_with_partials(&self, x: &[f64; 3], p_exp: i32, grad: &mut [f64]) -> f64;

    /// Center and half-extents of an axis-aligned box containing every point
    /// with `tdf >= -epsilon`.
    fn bounding_box(&self, epsilon: f64, p_exp: i32) -> ([f64; 3], [f64; 3]);
}

#[inline]
fn ipow(x: f64, p: i32) -> f64 {
    x.powi(p)
}

/// 2D hyperelliptic bar with linearly varying half-width.
///
/// Parameters in order: `x0, y0, a, t1, t2, theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component2D {
    pub x0: f64,
    pub y0: f64,
    /// Half-length.
    pub a: f64,
    pub t1: f64,
    pub t2: f64,
    /// Inclination, measured anti-clockwise from the x axis.
    pub theta: f64,
    cos: f64,
    sin: f64,
}

impl Component2D {
    pub fn new(x0: f64, y0: f64, a: f64, t1: f64, t2: f64, theta: f64) -> Result<Self> {
        let vals = [x0, y0, a, t1, t2, theta];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidComponent(format!("non-finite parameter in {vals:?}")));
        }
        if !(a > 0.0 && t1 > 0.0 && t2 > 0.0) {
            return Err(Error::InvalidComponent(format!(
                "half-length and thicknesses must be positive (a={a}, t1={t1}, t2={t2})"
            )));
        }
        Ok(Self { x0, y0, a, t1, t2, theta, cos: theta.cos(), sin: theta.sin() })
    }

    /// Local coordinates `(x', y')` of a global point.
    #[inline]
    pub fn local(&self, x: &[f64; 3]) -> (f64, f64) {
        let dx = x[0] - self.x0;
        let dy = x[1] - self.y0;
        (self.cos * dx + self.sin * dy, -self.sin * dx + self.cos * dy)
    }

    /// Half-width `b(x')`.
    #[inline]
    pub fn half_width(&self, xl: f64) -> f64 {
        0.5 * (self.t1 + self.t2) + (self.t2 - self.t1) / (2.0 * self.a) * xl
    }
}

// Far outside the tips b(x') can reach zero; clamping keeps the TDF finite
// and strongly negative there.
const MIN_HALF_WIDTH: f64 = 1e-12;

impl Component for Component2D {
    const DIM: usize = 2;
    const NUM_PARAMS: usize = 6;
    const PARAM_NAMES: &'static [&'static str] = &["x0", "y0", "a", "t1", "t2", "theta"];
    const CENTER_PARAMS: &'static [usize] = &[0, 1];
    const SIZE_PARAMS: &'static [usize] = &[2, 3, 4];
    const ANGLE_PARAMS: &'static [usize] = &[5];
    const ANGLE_RANGE: (f64, f64) = (-std::f64::consts::PI, std::f64::consts::PI);

    fn from_params(p: &[f64]) -> Result<Self> {
        if p.len() != Self::NUM_PARAMS {
            return Err(Error::Dimension(format!("2D component needs 6 parameters, got {}", p.len())));
        }
        Self::new(p[0], p[1], p[2], p[3], p[4], p[5])
    }

    fn params(&self) -> Vec<f64> {
        vec![self.x0, self.y0, self.a, self.t1, self.t2, self.theta]
    }

    fn center(&self) -> [f64; 3] {
        [self.x0, self.y0, 0.0]
    }

    #[inline]
    fn tdf(&self, x: &[f64; 3], p_exp: i32) -> f64 {
        let (xl, yl) = self.local(x);
        let b = self.half_width(xl).max(MIN_HALF_WIDTH);
        1.0 - ipow(xl / self.a, p_exp) - ipow(yl / b, p_exp)
    }

    fn tdf_with_partials(&self, x: &[f64; 3], p_exp: i32, grad: &mut [f64]) -> f64 {
        let (xl, yl) = self.local(x);
        let (c, s, a) = (self.cos, self.sin, self.a);
        let p = p_exp as f64;
        let b_raw = self.half_width(xl);
        let b = b_raw.max(MIN_HALF_WIDTH);
        let clamped = b_raw < MIN_HALF_WIDTH;

        let u = xl / a;
        let v = yl / b;
        let u_pm1 = ipow(u, p_exp - 1);
        let v_pm1 = ipow(v, p_exp - 1);
        let phi = 1.0 - u_pm1 * u - v_pm1 * v;

        // d(phi)/d(b) at fixed (x', y')
        let dphi_db = if clamped { 0.0 } else { p * v_pm1 * v / b };
        let db_dxl = (self.t2 - self.t1) / (2.0 * a);
        let dphi_dxl = -p * u_pm1 / a + dphi_db * db_dxl;
        let dphi_dyl = -p * v_pm1 / b;

        grad[0] = -c * dphi_dxl + s * dphi_dyl;
        grad[1] = -s * dphi_dxl - c * dphi_dyl;
        grad[2] = p * u_pm1 * u / a + dphi_db * (-(self.t2 - self.t1) * xl / (2.0 * a * a));
        grad[3] = dphi_db * (0.5 - xl / (2.0 * a));
        grad[4] = dphi_db * (0.5 + xl / (2.0 * a));
        // dx'/dtheta = y', dy'/dtheta = -x'
        grad[5] = dphi_dxl * yl - dphi_dyl * xl;
        phi
    }

    fn bounding_box(&self, epsilon: f64, p_exp: i32) -> ([f64; 3], [f64; 3]) {
        let scale = (1.0 + epsilon).powf(1.0 / p_exp as f64);
        let half_len = self.a * scale;
        // largest |b(x')| over |x'| <= half_len
        let b_max = 0.5 * (self.t1 + self.t2) + 0.5 * (self.t2 - self.t1).abs() * scale;
        let half_wid = b_max * scale;
        let (c, s) = (self.cos.abs(), self.sin.abs());
        ([self.x0, self.y0, 0.0], [c * half_len + s * half_wid, s * half_len + c * half_wid, 0.0])
    }
}

/// Rotation matrix taking global offsets to the local frame of a 3D component.
///
/// Cosines are taken as `sqrt(1 - sin^2)`, which matches the ordinary cosine
/// on `(-pi/2, pi/2]`; angles outside that range are rejected.
pub fn rotation_matrix(alpha: f64, beta: f64, theta: f64) -> Result<[[f64; 3]; 3]> {
    for (name, value) in [("alpha", alpha), ("beta", beta), ("theta", theta)] {
        if !(value > -FRAC_PI_2 && value <= FRAC_PI_2) {
            return Err(Error::AngleOutOfRange { name, value });
        }
    }
    let (sa, sb, st) = (alpha.sin(), beta.sin(), theta.sin());
    let (ca, cb, ct) = ((1.0 - sa * sa).max(0.0).sqrt(), (1.0 - sb * sb).max(0.0).sqrt(), (1.0 - st * st).max(0.0).sqrt());
    Ok([
        [cb * ct, -cb * st, sb],
        [sa * sb * ct + ca * st, -sa * sb * st + ca * ct, -sa * cb],
        [-ca * sb * ct + sa * st, ca * sb * st + sa * ct, ca * cb],
    ])
}

/// Derivatives of [`rotation_matrix`] with respect to alpha, beta and theta.
fn rotation_derivatives(alpha: f64, beta: f64, theta: f64) -> [[[f64; 3]; 3]; 3] {
    let (sa, sb, st) = (alpha.sin(), beta.sin(), theta.sin());
    let (ca, cb, ct) = (alpha.cos(), beta.cos(), theta.cos());
    let d_alpha = [
        [0.0, 0.0, 0.0],
        [ca * sb * ct - sa * st, -ca * sb * st - sa * ct, -ca * cb],
        [sa * sb * ct + ca * st, -sa * sb * st + ca * ct, -sa * cb],
    ];
    let d_beta = [
        [-sb * ct, sb * st, cb],
        [sa * cb * ct, -sa * cb * st, sa * sb],
        [-ca * cb * ct, ca * cb * st, -ca * sb],
    ];
    let d_theta = [
        [-cb * st, -cb * ct, 0.0],
        [-sa * sb * st + ca * ct, -sa * sb * ct - ca * st, 0.0],
        [ca * sb * st + sa * ct, ca * sb * ct - sa * st, 0.0],
    ];
    [d_alpha, d_beta, d_theta]
}

/// 3D hyperelliptic box with constant thickness profiles.
///
/// Parameters in order: `x0, y0, z0, l1, l2, l3, alpha, beta, theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component3D {
    pub center: [f64; 3],
    /// Half-length along local x', followed by the half-thicknesses along y' and z'.
    pub half_sizes: [f64; 3],
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    rot: [[f64; 3]; 3],
    drot: [[[f64; 3]; 3]; 3],
}

impl Component3D {
    pub fn new(center: [f64; 3], half_sizes: [f64; 3], alpha: f64, beta: f64, theta: f64) -> Result<Self> {
        if center.iter().chain(half_sizes.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidComponent("non-finite parameter".into()));
        }
        if half_sizes.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidComponent(format!("half sizes must be positive, got {half_sizes:?}")));
        }
        let rot = rotation_matrix(alpha, beta, theta)?;
        let drot = rotation_derivatives(alpha, beta, theta);
        Ok(Self { center, half_sizes, alpha, beta, theta, rot, drot })
    }

    pub fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rot
    }

    #[inline]
    fn offset(&self, x: &[f64; 3]) -> [f64; 3] {
        [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]]
    }

    #[inline]
    pub fn local(&self, x: &[f64; 3]) -> [f64; 3] {
        let d = self.offset(x);
        let r = &self.rot;
        [
            r[0][0] * d[0] + r[0][1] * d[1] + r[0][2] * d[2],
            r[1][0] * d[0] + r[1][1] * d[1] + r[1][2] * d[2],
            r[2][0] * d[0] + r[2][1] * d[1] + r[2][2] * d[2],
        ]
    }
}

impl Component for Component3D {
    const DIM: usize = 3;
    const NUM_PARAMS: usize = 9;
    const PARAM_NAMES: &'static [&'static str] = &["x0", "y0", "z0", "l1", "l2", "l3", "alpha", "beta", "theta"];
    const CENTER_PARAMS: &'static [usize] = &[0, 1, 2];
    const SIZE_PARAMS: &'static [usize] = &[3, 4, 5];
    const ANGLE_PARAMS: &'static [usize] = &[6, 7, 8];
    const ANGLE_RANGE: (f64, f64) = (-FRAC_PI_2 + 1e-9, FRAC_PI_2);

    fn from_params(p: &[f64]) -> Result<Self> {
        if p.len() != Self::NUM_PARAMS {
            return Err(Error::Dimension(format!("3D component needs 9 parameters, got {}", p.len())));
        }
        Self::new([p[0], p[1], p[2]], [p[3], p[4], p[5]], p[6], p[7], p[8])
    }

    fn params(&self) -> Vec<f64> {
        let [x, y, z] = self.center;
        let [l1, l2, l3] = self.half_sizes;
        vec![x, y, z, l1, l2, l3, self.alpha, self.beta, self.theta]
    }

    fn center(&self) -> [f64; 3] {
        self.center
    }

    #[inline]
    fn tdf(&self, x: &[f64; 3], p_exp: i32) -> f64 {
        let xl = self.local(x);
        let mut phi = 1.0;
        for (c, l) in xl.iter().zip(self.half_sizes.iter()) {
            phi -= ipow(c / l, p_exp);
        }
        phi
    }

    fn tdf_with_partials(&self, x: &[f64; 3], p_exp: i32, grad: &mut [f64]) -> f64 {
        let d = self.offset(x);
        let xl = self.local(x);
        let p = p_exp as f64;
        let mut phi = 1.0;
        let mut dphi_dl = [0.0; 3];
        for m in 0..3 {
            let u = xl[m] / self.half_sizes[m];
            let u_pm1 = ipow(u, p_exp - 1);
            phi -= u_pm1 * u;
            dphi_dl[m] = -p * u_pm1 / self.half_sizes[m];
            grad[3 + m] = p * u_pm1 * u / self.half_sizes[m];
        }
        // center: x' = R (x - x0) so dx'/dx0 = -R
        for k in 0..3 {
            grad[k] = -(0..3).map(|m| dphi_dl[m] * self.rot[m][k]).sum::<f64>();
        }
        for (a, dr) in self.drot.iter().enumerate() {
            let mut acc = 0.0;
            for m in 0..3 {
                let dxm = dr[m][0] * d[0] + dr[m][1] * d[1] + dr[m][2] * d[2];
                acc += dphi_dl[m] * dxm;
            }
            grad[6 + a] = acc;
        }
        phi
    }

    fn bounding_box(&self, epsilon: f64, p_exp: i32) -> ([f64; 3], [f64; 3]) {
        let scale = (1.0 + epsilon).powf(1.0 / p_exp as f64);
        let mut half = [0.0; 3];
        // x = x0 + R^T x', |x'_m| <= L_m * scale
        for (k, h) in half.iter_mut().enumerate() {
            *h = (0..3).map(|m| self.rot[m][k].abs() * self.half_sizes[m] * scale).sum();
        }
        (self.center, half)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn center_value_is_one() {
        let c = Component2D::new(0.0, 0.0, 1.0, 0.2, 0.2, 0.0).unwrap();
        assert_eq!(c.tdf(&[0.0, 0.0, 0.0], 6), 1.0);
        assert_eq!(c.tdf(&[1.0, 0.0, 0.0], 6), 0.0);
    }

    #[test]
    fn rejects_nonpositive_sizes() {
        assert!(Component2D::new(0.0, 0.0, 0.0, 0.1, 0.1, 0.0).is_err());
        assert!(Component2D::new(0.0, 0.0, 1.0, -0.1, 0.1, 0.0).is_err());
        assert!(Component3D::new([0.0; 3], [1.0, 0.0, 1.0], 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn rotation_identity_and_quarter_turn() {
        let r = rotation_matrix(0.0, 0.0, 0.0).unwrap();
        assert_eq!(r, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let r = rotation_matrix(0.0, 0.0, PI / 2.0).unwrap();
        assert_eq!(r, [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
    }

    #[test]
    fn rotation_rejects_wrapped_angles() {
        assert!(rotation_matrix(-PI / 2.0, 0.0, 0.0).is_err());
        assert!(rotation_matrix(0.0, 2.0, 0.0).is_err());
        assert!(rotation_matrix(0.0, 0.0, PI / 2.0).is_ok());
    }

    #[test]
    fn uniform_thickness_partials_match_at_midline() {
        let c = Component2D::new(0.3, -0.2, 1.5, 0.2, 0.2, 0.4).unwrap();
        // a point on the local y' axis
        let (s, co) = (0.4f64.sin(), 0.4f64.cos());
        let x = [0.3 - s * 0.1, -0.2 + co * 0.1, 0.0];
        let mut g = [0.0; 6];
        c.tdf_with_partials(&x, 6, &mut g);
        assert!((g[3] - g[4]).abs() < 1e-12 * g[3].abs().max(1.0));
    }

    #[test]
    fn center_gradient_vanishes() {
        let c = Component2D::new(1.0, 2.0, 0.7, 0.1, 0.3, 0.9).unwrap();
        let mut g = [0.0; 6];
        let phi = c.tdf_with_partials(&[1.0, 2.0, 0.0], 6, &mut g);
        assert_eq!(phi, 1.0);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.0);
    }
}
