//! Real kernels on `{1..m} × (0, ∞)`, stored with the exponential
//! conjugation factors stripped so that nothing overflows.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::airy::airy_ai;
use crate::error::Result;
use crate::quadrature::GaussLegendre;
use crate::settings::Settings;

use super::{BlockKernel, Domain, PointConfig};

/// Airy arguments beyond this contribute below `1e−18` relative.
const AIRY_HORIZON: f64 = 18.0;
/// `e^{−NEG_HORIZON} < 1e−18`: where the weight of the negative half-line integral ends.
const NEG_HORIZON: f64 = 41.5;
const NEG_PANEL: f64 = 0.5;
const NEG_PANEL_NODES: usize = 12;

/// The `γ` rule on `[0, 18 − min cᵢ]` shared by `Ã` and the `𝐋` expansion.
pub fn gamma_rule(cfg: &PointConfig, settings: &Settings) -> GaussLegendre {
    let cmin = (0..cfg.m()).map(|i| cfg.shift(i)).fold(f64::INFINITY, f64::min);
    let top = (AIRY_HORIZON - cmin).max(4.0);
    GaussLegendre::on_interval(0.0, top, settings.gamma_nodes)
}

/// Rule on `[−41.5/Δα, 0]` for the negative half-line integral of index pair `i < j`.
fn negative_rule(delta_alpha: f64) -> GaussLegendre {
    let bottom = -NEG_HORIZON / delta_alpha;
    let panels = (-bottom / NEG_PANEL).ceil() as usize;
    GaussLegendre::composite(bottom, 0.0, panels, NEG_PANEL_NODES)
}

/// `Ã(i, λ; j, θ) = ∫₀^∞ e^{−(αᵢ−αⱼ)γ} Ai(λ+cᵢ+γ) Ai(θ+cⱼ+γ) dγ`, `cᵢ = βᵢ+αᵢ²`.
pub fn kernel_a_tilde(cfg: &PointConfig, i: usize, lambda: f64, j: usize, theta: f64, settings: &Settings) -> Result<f64> {
    let (i0, j0) = (cfg.index(i)?, cfg.index(j)?);
    let rule = gamma_rule(cfg, settings);
    let (ci, cj) = (cfg.shift(i0), cfg.shift(j0));
    let da = cfg.alpha()[i0] - cfg.alpha()[j0];
    Ok(rule.integrate(|g| (-da * g).exp() * airy_ai(lambda + ci + g) * airy_ai(theta + cj + g)))
}

/// Conjugation-stripped Gaussian link; zero unless `i < j`.
pub fn kernel_b_tilde(cfg: &PointConfig, i: usize, lambda: f64, j: usize, theta: f64) -> Result<f64> {
    let (i0, j0) = (cfg.index(i)?, cfg.index(j)?);
    if i0 >= j0 {
        return Ok(0.0);
    }
    Ok(b_tilde(cfg, i0, lambda, j0, theta))
}

fn b_tilde(cfg: &PointConfig, i0: usize, lambda: f64, j0: usize, theta: f64) -> f64 {
    let (ai, aj) = (cfg.alpha()[i0], cfg.alpha()[j0]);
    let (bi, bj) = (cfg.beta()[i0], cfg.beta()[j0]);
    let da = aj - ai;
    let x = bj + theta - bi - lambda;
    let expo = 2.0 / 3.0 * ai.powi(3) + (lambda + bi) * ai - 2.0 / 3.0 * aj.powi(3) - (theta + bj) * aj - x * x / (4.0 * da);
    expo.exp() / (2.0 * (std::f64::consts::PI * da).sqrt())
}

/// The conjugated extended Airy kernel on offsets `λ, θ ≥ 0`: `Ã` for
/// `i ≥ j`, `−∫_{−∞}^0` of the same integrand for `i < j`.
pub fn kernel_ext_airy(cfg: &PointConfig, i: usize, x_offset: f64, j: usize, y_offset: f64, settings: &Settings) -> Result<f64> {
    let (i0, j0) = (cfg.index(i)?, cfg.index(j)?);
    if i0 >= j0 {
        return kernel_a_tilde(cfg, i, x_offset, j, y_offset, settings);
    }
    let (ci, cj) = (cfg.shift(i0), cfg.shift(j0));
    let da = cfg.alpha()[j0] - cfg.alpha()[i0];
    let rule = negative_rule(da);
    Ok(-rule.integrate(|g| (da * g).exp() * airy_ai(x_offset + ci + g) * airy_ai(y_offset + cj + g)))
}

/// `[Ai(c + x_a + γ_g)]` and the weighted inner product of two such tables.
fn airy_table(c: f64, xs: &[Complex64], gammas: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(xs.len(), gammas.len(), |a, g| airy_ai(c + xs[a].re + gammas[g]))
}

fn weighted_gram(p: &DMatrix<f64>, w: &[f64], q: &DMatrix<f64>) -> DMatrix<f64> {
    let mut pw = p.clone();
    for (g, wg) in w.iter().enumerate() {
        pw.column_mut(g).scale_mut(*wg);
    }
    pw * q.transpose()
}

fn to_complex(m: DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

fn a_tilde_block(cfg: &PointConfig, i0: usize, j0: usize, rows: &[Complex64], cols: &[Complex64], rule: &GaussLegendre) -> DMatrix<f64> {
    let da = cfg.alpha()[i0] - cfg.alpha()[j0];
    let w: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(g, w)| w * (-da * g).exp()).collect();
    let p = airy_table(cfg.shift(i0), rows, &rule.nodes);
    let q = airy_table(cfg.shift(j0), cols, &rule.nodes);
    weighted_gram(&p, &w, &q)
}

/// `K_ext` as a block kernel on the half-line.
pub struct ExtAiryKernel {
    cfg: PointConfig,
    settings: Settings,
}

impl ExtAiryKernel {
    pub fn new(cfg: &PointConfig, settings: &Settings) -> Self {
        ExtAiryKernel { cfg: cfg.clone(), settings: *settings }
    }
}

impl BlockKernel for ExtAiryKernel {
    fn m(&self) -> usize {
        self.cfg.m()
    }

    fn domain(&self) -> Domain {
        Domain::HalfLine
    }

    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(kernel_ext_airy(&self.cfg, i, s.re, j, t.re, &self.settings)?, 0.0))
    }

    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let (i0, j0) = (self.cfg.index(i)?, self.cfg.index(j)?);
        if i0 >= j0 {
            let rule = gamma_rule(&self.cfg, &self.settings);
            return Ok(to_complex(a_tilde_block(&self.cfg, i0, j0, rows, cols, &rule)));
        }
        let da = self.cfg.alpha()[j0] - self.cfg.alpha()[i0];
        let rule = negative_rule(da);
        let w: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(g, w)| -w * (da * g).exp()).collect();
        let p = airy_table(self.cfg.shift(i0), rows, &rule.nodes);
        let q = airy_table(self.cfg.shift(j0), cols, &rule.nodes);
        Ok(to_complex(weighted_gram(&p, &w, &q)))
    }
}

/// `B̃ − Ã` as a block kernel on the half-line.
pub struct BMinusAKernel {
    cfg: PointConfig,
    settings: Settings,
}

impl BMinusAKernel {
    pub fn new(cfg: &PointConfig, settings: &Settings) -> Self {
        BMinusAKernel { cfg: cfg.clone(), settings: *settings }
    }

    /// The `B̃` part alone on the given nodes.
    pub fn b_block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let (i0, j0) = (self.cfg.index(i)?, self.cfg.index(j)?);
        Ok(DMatrix::from_fn(rows.len(), cols.len(), |a, b| {
            let v = if i0 < j0 { b_tilde(&self.cfg, i0, rows[a].re, j0, cols[b].re) } else { 0.0 };
            Complex64::new(v, 0.0)
        }))
    }

    /// The `Ã` part alone on the given nodes.
    pub fn a_block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        let (i0, j0) = (self.cfg.index(i)?, self.cfg.index(j)?);
        let rule = gamma_rule(&self.cfg, &self.settings);
        Ok(to_complex(a_tilde_block(&self.cfg, i0, j0, rows, cols, &rule)))
    }
}

impl BlockKernel for BMinusAKernel {
    fn m(&self) -> usize {
        self.cfg.m()
    }

    fn domain(&self) -> Domain {
        Domain::HalfLine
    }

    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
        let b = kernel_b_tilde(&self.cfg, i, s.re, j, t.re)?;
        let a = kernel_a_tilde(&self.cfg, i, s.re, j, t.re, &self.settings)?;
        Ok(Complex64::new(b - a, 0.0))
    }

    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        Ok(self.b_block(i, j, rows, cols)? - self.a_block(i, j, rows, cols)?)
    }
}

/// `−K` for any block kernel `K`.
pub struct Negated<K>(pub K);

impl<K: BlockKernel> BlockKernel for Negated<K> {
    fn m(&self) -> usize {
        self.0.m()
    }

    fn domain(&self) -> Domain {
        self.0.domain()
    }

    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
        Ok(-self.0.evaluate(i, s, j, t)?)
    }

    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<DMatrix<Complex64>> {
        Ok(-self.0.block(i, j, rows, cols)?)
    }
}
