//! Point configurations and every kernel of the three determinant formulas.
//!
//! Indices `i, j` in the public functions are 1-based point indices, as in
//! the formulas; internally everything is 0-based.

mod contour_side;
mod contours;
mod halfline;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use contour_side::{
    eval_h, h_matrix, kernel_b_vertical, kernel_k, kernel_l, kernel_l_decomposed, ContourKernel, LKernel,
};
pub use contours::{ContourFamily, ContourLayout, ContourRole};
pub use halfline::{
    gamma_rule, kernel_a_tilde, kernel_b_tilde, kernel_ext_airy, BMinusAKernel, ExtAiryKernel, Negated,
};

/// The points `(αᵢ, βᵢ)` of a joint distribution, `α₁ < ⋯ < α_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl PointConfig {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidConfig("at least one point is required".into()));
        }
        if alpha.len() != beta.len() {
            return Err(Error::InvalidConfig(format!(
                "{} alpha values but {} beta values",
                alpha.len(),
                beta.len()
            )));
        }
        if alpha.iter().chain(&beta).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("alpha and beta must be finite".into()));
        }
        if alpha.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::NonIncreasingAlpha);
        }
        Ok(PointConfig { alpha, beta })
    }

    pub fn single(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![alpha], vec![beta])
    }

    /// Parses `"a1:b1,a2:b2,..."`.
    pub fn parse(points: &str) -> Result<Self> {
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for item in points.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (a, b) = item
                .split_once(':')
                .ok_or_else(|| Error::InvalidConfig(format!("point {item:?} is not of the form alpha:beta")))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("{s:?} is not a number")))
            };
            alpha.push(parse(a)?);
            beta.push(parse(b)?);
        }
        Self::new(alpha, beta)
    }

    pub fn m(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `βᵢ + αᵢ²` for the 0-based index `i0`.
    pub fn shift(&self, i0: usize) -> f64 {
        self.beta[i0] + self.alpha[i0] * self.alpha[i0]
    }

    /// Same configuration with `βᵢ` replaced (1-based `i`).
    pub fn with_beta(&self, i: usize, value: f64) -> Result<Self> {
        let i0 = self.index(i)?;
        let mut beta = self.beta.clone();
        beta[i0] = value;
        Self::new(self.alpha.clone(), beta)
    }

    /// 1-based index to 0-based, checked.
    pub fn index(&self, i: usize) -> Result<usize> {
        if i == 0 || i > self.m() {
            Err(Error::IndexOutOfRange { index: i, m: self.m() })
        } else {
            Ok(i - 1)
        }
    }

    /// `log fᵢ(w) = −w³/3 + αᵢw² + βᵢw`, 0-based.
    pub(crate) fn log_f(&self, i0: usize, w: Complex64) -> Complex64 {
        let w2 = w * w;
        -w2 * w / 3.0 + self.alpha[i0] * w2 + self.beta[i0] * w
    }

    /// `log Fᵢ(w)`, 0-based.
    pub(crate) fn log_big_f(&self, i0: usize, w: Complex64) -> Complex64 {
        if i0 == 0 {
            self.log_f(0, w)
        } else {
            (self.alpha[i0] - self.alpha[i0 - 1]) * w * w + (self.beta[i0] - self.beta[i0 - 1]) * w
        }
    }

    /// `log ∏_{ℓ=i+1}^{j} F_ℓ(w)`, 0-based `i < j`.
    pub(crate) fn log_f_ratio(&self, i0: usize, j0: usize, w: Complex64) -> Complex64 {
        (self.alpha[j0] - self.alpha[i0]) * w * w + (self.beta[j0] - self.beta[i0]) * w
    }
}

/// `fᵢ(w) = exp(−w³/3 + αᵢw² + βᵢw)`.
pub fn eval_f(cfg: &PointConfig, i: usize, w: Complex64) -> Result<Complex64> {
    Ok(cfg.log_f(cfg.index(i)?, w).exp())
}

/// `F₁ = f₁` and `Fᵢ = fᵢ / fᵢ₋₁` for `i ≥ 2`.
#[allow(non_snake_case)]
pub fn eval_F(cfg: &PointConfig, i: usize, w: Complex64) -> Result<Complex64> {
    Ok(cfg.log_big_f(cfg.index(i)?, w).exp())
}

/// Where a kernel's variables live.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    HalfLine,
    LeftContour,
}

/// A kernel on `{1..m} × domain`, the unit consumed by the Fredholm routines.
pub trait BlockKernel: Sync {
    fn m(&self) -> usize;

    fn domain(&self) -> Domain;

    /// Kernel value at `(i, s; j, t)`, 1-based indices.
    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64>;

    /// `[K(i, rows[a]; j, cols[b])]`; implementors override this with a fast path.
    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let mut out = DMatrix::zeros(rows.len(), cols.len());
        for (a, &s) in rows.iter().enumerate() {
            for (b, &t) in cols.iter().enumerate() {
                out[(a, b)] = self.evaluate(i, s, j, t)?;
            }
        }
        Ok(out)
    }
}
