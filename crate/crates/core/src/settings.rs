use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_NODES: &str = "AF_NODES";
pub const ENV_TRUNCATION: &str = "AF_TRUNCATION";
pub const ENV_LAMBDA_MAX: &str = "AF_LAMBDA_MAX";
pub const ENV_Z_RADIUS: &str = "AF_Z_RADIUS";
pub const ENV_TOL: &str = "AF_TOL";

/// Quadrature parameters shared by every pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Gauss–Legendre nodes per panel of a contour ray.
    pub nodes: usize,
    /// Arc length of one panel.
    pub panel_length: f64,
    /// Smallest arc-length truncation of a contour ray; rays are extended
    /// further when the integrand has not decayed by then.
    pub truncation: f64,
    /// Right end of the half-line `(0, lambda_max]` in the real-side determinants.
    pub lambda_max: f64,
    /// Nyström nodes per point index on the half-line.
    pub nystrom_nodes: usize,
    /// Gauss–Legendre nodes for the `γ` integrals inside the half-line kernels.
    pub gamma_nodes: usize,
    /// Nodes per panel for the multi-fold contour integrals of the sum pipeline.
    pub chain_nodes: usize,
    pub z_radius: f64,
    pub z_nodes: usize,
    pub left_angle: f64,
    pub right_angle: f64,
    /// Right ray angle of the contour family in the sum pipeline. Its right
    /// contours carry Gaussian weights, which decay only below `π/4`.
    pub chain_right_angle: f64,
    /// Convergence tolerance for refinement checks.
    pub tol: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            nodes: 12,
            panel_length: 1.0,
            truncation: 4.0,
            lambda_max: 18.0,
            nystrom_nodes: 64,
            gamma_nodes: 96,
            chain_nodes: 12,
            z_radius: 0.5,
            z_nodes: 32,
            left_angle: 2.0 * PI / 3.0,
            right_angle: PI / 3.0,
            chain_right_angle: 0.22 * PI,
            tol: 1e-6,
        }
    }
}

impl Settings {
    /// Defaults overridden by any `AF_*` variables present in the environment.
    pub fn from_env() -> Result<Self> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup<F: Fn(&str) -> Option<String>>(lookup: F) -> Result<Self> {
        let mut s = Settings::default();
        if let Some(v) = lookup(ENV_NODES) {
            s.nodes = parse_env(ENV_NODES, &v)?;
        }
        if let Some(v) = lookup(ENV_TRUNCATION) {
            s.truncation = parse_env(ENV_TRUNCATION, &v)?;
        }
        if let Some(v) = lookup(ENV_LAMBDA_MAX) {
            s.lambda_max = parse_env(ENV_LAMBDA_MAX, &v)?;
        }
        if let Some(v) = lookup(ENV_Z_RADIUS) {
            s.z_radius = parse_env(ENV_Z_RADIUS, &v)?;
        }
        if let Some(v) = lookup(ENV_TOL) {
            s.tol = parse_env(ENV_TOL, &v)?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(what.to_string()));
        if self.nodes < 2 || self.nystrom_nodes < 2 || self.gamma_nodes < 2 || self.chain_nodes < 2 || self.z_nodes < 2 {
            return bad("node counts must be at least 2");
        }
        if !(self.panel_length.is_finite() && self.panel_length > 0.0) {
            return bad("panel length must be positive");
        }
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return bad("truncation must be positive");
        }
        if !(self.lambda_max.is_finite() && self.lambda_max > 0.0) {
            return bad("lambda_max must be positive");
        }
        if !(self.z_radius > 0.0 && self.z_radius < 1.0) {
            return bad("z radius must lie in (0, 1)");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tolerance must be positive");
        }
        if !(self.left_angle > PI / 2.0 && self.left_angle < PI) {
            return bad("left angle must lie in (π/2, π)");
        }
        if !(self.right_angle > 0.0 && self.right_angle < PI / 2.0) {
            return bad("right angle must lie in (0, π/2)");
        }
        if !(self.chain_right_angle > PI / 6.0 && self.chain_right_angle < PI / 4.0) {
            return bad("chain right angle must lie in (π/6, π/4)");
        }
        Ok(())
    }

    /// Every node count doubled.
    pub fn refined(&self) -> Self {
        Settings {
            nodes: self.nodes * 2,
            nystrom_nodes: self.nystrom_nodes * 2,
            gamma_nodes: self.gamma_nodes * 2,
            chain_nodes: self.chain_nodes * 2,
            z_nodes: self.z_nodes * 2,
            ..*self
        }
    }
}

fn parse_env<T: std::str::FromStr>(name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("{name}={raw:?} is not a valid value")))
}
