//! Method of Moving Asymptotes for one inequality constraint.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmaSettings {
    /// Initial asymptote distance as a fraction of the bound range.
    pub asy_init: f64,
    pub asy_incr: f64,
    pub asy_decr: f64,
    /// Regularization of the objective approximation.
    pub raa0: f64,
    /// Smallest asymptote distance as a fraction of the bound range.
    pub asy_min: f64,
}

impl Default for MmaSettings {
    fn default() -> Self {
        Self { asy_init: 0.5, asy_incr: 1.2, asy_decr: 0.7, raa0: 1e-5, asy_min: 0.01 }
    }
}

/// Asymptotes and iterate history carried between updates.
#[derive(Debug, Clone)]
pub struct MmaState {
    pub settings: MmaSettings,
    /// Maximum step per variable (absolute).
    pub move_limits: Vec<f64>,
    pub low: Vec<f64>,
    pub upp: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub x_prev2: Vec<f64>,
    pub iteration: usize,
}

/// Result of one update: the new iterate and the constraint multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct MmaStep {
    pub x: Vec<f64>,
    pub lambda: f64,
    /// Value of the convex constraint approximation at the new iterate.
    pub approx_constraint: f64,
}

impl MmaState {
    pub fn new(n: usize, move_limits: Vec<f64>, settings: MmaSettings) -> Result<Self> {
        if move_limits.len() != n {
            return Err(Error::Dimension(format!("{} move limits for {n} variables", move_limits.len())));
        }
        Ok(Self {
            settings,
            move_limits,
            low: vec![0.0; n],
            upp: vec![0.0; n],
            x_prev: vec![0.0; n],
            x_prev2: vec![0.0; n],
            iteration: 0,
        })
    }

    /// One MMA step for `min f0 s.t. g <= 0, lower <= x <= upper`, where `f0`
    /// enters only through its gradient `df0`.
    pub fn update(&mut self, x: &[f64], df0: &[f64], g: f64, dg: &[f64], lower: &[f64], upper: &[f64]) -> Result<MmaStep> {
        let n = x.len();
        for (len, what) in [(df0.len(), "df0"), (dg.len(), "dg"), (lower.len(), "lower"), (upper.len(), "upper")] {
            if len != n {
                return Err(Error::Dimension(format!("{what} has length {len}, expected {n}")));
            }
        }
        if self.move_limits.len() != n {
            return Err(Error::Dimension(format!("state sized for {} variables, got {n}", self.move_limits.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design variables"));
        }
        if df0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective gradient"));
        }
        if !g.is_finite() || dg.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("constraint"));
        }
        let s = self.settings;

        for j in 0..n {
            let range = (upper[j] - lower[j]).max(1e-12);
            if self.iteration < 2 {
                self.low[j] = x[j] - s.asy_init * range;
                self.upp[j] = x[j] + s.asy_init * range;
            } else {
                let trend = (x[j] - self.x_prev[j]) * (self.x_prev[j] - self.x_prev2[j]);
                let gamma = if trend > 0.0 {
                    s.asy_incr
                } else if trend < 0.0 {
                    s.asy_decr
                } else {
                    1.0
                };
                let low = x[j] - gamma * (self.x_prev[j] - self.low[j]);
                let upp = x[j] + gamma * (self.upp[j] - self.x_prev[j]);
                self.low[j] = low.clamp(x[j] - 10.0 * range, x[j] - s.asy_min * range);
                self.upp[j] = upp.clamp(x[j] + s.asy_min * range, x[j] + 10.0 * range);
            }
        }

        let mut alpha = vec![0.0; n];
        let mut beta = vec![0.0; n];
        let mut p0 = vec![0.0; n];
        let mut q0 = vec![0.0; n];
        let mut p1 = vec![0.0; n];
        let mut q1 = vec![0.0; n];
        let mut r1 = g;
        for j in 0..n {
            let (l, u) = (self.low[j], self.upp[j]);
            let range = (upper[j] - lower[j]).max(1e-12);
            alpha[j] = lower[j].max(l + 0.1 * (x[j] - l)).max(x[j] - self.move_limits[j]);
            beta[j] = upper[j].min(u - 0.1 * (u - x[j])).min(x[j] + self.move_limits[j]);
            if alpha[j] > beta[j] {
                // only possible when x lies outside its bounds
                let v = x[j].clamp(lower[j], upper[j]);
                alpha[j] = v;
                beta[j] = v;
            }
            let (ux2, xl2) = ((u - x[j]).powi(2), (x[j] - l).powi(2));
            let reg = s.raa0 / range;
            p0[j] = ux2 * (1.001 * df0[j].max(0.0) + 0.001 * (-df0[j]).max(0.0) + reg);
            q0[j] = xl2 * (0.001 * df0[j].max(0.0) + 1.001 * (-df0[j]).max(0.0) + reg);
            p1[j] = ux2 * dg[j].max(0.0);
            q1[j] = xl2 * (-dg[j]).max(0.0);
            r1 -= p1[j] / (u - x[j]) + q1[j] / (x[j] - l);
        }

        let primal = |lambda: f64, out: &mut [f64]| -> f64 {
            let mut gval = r1;
            for j in 0..n {
                let (l, u) = (self.low[j], self.upp[j]);
                let pp = (p0[j] + lambda * p1[j]).sqrt();
                let qq = (q0[j] + lambda * q1[j]).sqrt();
                let xj = if pp + qq > 0.0 { (pp * l + qq * u) / (pp + qq) } else { x[j] };
                let xj = xj.clamp(alpha[j], beta[j]);
                out[j] = xj;
                gval += p1[j] / (u - xj) + q1[j] / (xj - l);
            }
            gval
        };

        let mut xn = vec![0.0; n];
        let mut lambda = 0.0;
        let mut gval = primal(0.0, &mut xn);
        if gval > 0.0 {
            let mut lo = 0.0;
            let mut hi = 1.0;
            let mut ghi = primal(hi, &mut xn);
            while ghi > 0.0 && hi < 1e30 {
                lo = hi;
                hi *= 4.0;
                ghi = primal(hi, &mut xn);
            }
            if ghi > 0.0 {
                // the approximated constraint cannot be met inside the move
                // limits; take the least-violating step
                lambda = hi;
                gval = ghi;
            } else {
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if primal(mid, &mut xn) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lambda = hi;
                gval = primal(hi, &mut xn);
            }
        }

        self.x_prev2 = std::mem::replace(&mut self.x_prev, x.to_vec());
        self.iteration += 1;
        Ok(MmaStep { x: xn, lambda, approx_constraint: gval })
    }
}
