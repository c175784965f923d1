//! Kernels built from nested contour integrals: the chain functions `hᵢ`,
//! the left-contour kernel `𝐊` and its Laplace-side form `𝐋`.

use num_complex::Complex64;

use crate::airy::airy_ai;
use crate::error::{Error, Result};
use crate::linalg::{cauchy_matrix, matmul, scale_cols, scale_rows, CMatrix};
use crate::quadrature::{build_contour, ContourSpec};
use crate::settings::Settings;

use super::contours::left_of;
use super::halfline::gamma_rule;
use super::{BlockKernel, ContourFamily, Domain, PointConfig};

const VERTICAL_NODES: usize = 96;

/// `diag(w_ℓ F_ℓ(U_ℓ)) C(U_ℓ, U_{ℓ+1}) ⋯ diag(w_i F_i(U_i)) C(U_i, V)` for
/// `ℓ = 2`, with `U_ℓ` the inner left contours; `None` when `i = 1`.
fn chain_tail(cfg: &PointConfig, fam: &ContourFamily, i0: usize, v: &[Complex64]) -> Result<Option<CMatrix>> {
    if i0 == 0 {
        return Ok(None);
    }
    let mut acc: Option<CMatrix> = None;
    for l in 2..=i0 + 1 {
        let c = fam.left_in(l)?;
        let d: Vec<Complex64> =
            c.points.iter().zip(&c.weights).map(|(&u, &w)| w * cfg.log_big_f(l - 1, u).exp()).collect();
        let next: &[Complex64] = if l == i0 + 1 { v } else { &fam.left_in(l + 1)?.points };
        let step = scale_rows(&d, cauchy_matrix(&c.points, next));
        acc = Some(match acc {
            None => step,
            Some(a) => matmul(&a, &step),
        });
    }
    Ok(acc)
}

fn h_from_tail(cfg: &PointConfig, fam: &ContourFamily, tail: Option<&CMatrix>, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
    let f1: Vec<Complex64> = z.iter().map(|&w| cfg.log_f(0, w).exp()).collect();
    Ok(match tail {
        None => scale_rows(&f1, cauchy_matrix(z, v)),
        Some(t) => {
            let first = scale_rows(&f1, cauchy_matrix(z, &fam.left_in(2)?.points));
            matmul(&first, t)
        }
    })
}

/// `[hᵢ(z_a, v_b)]` computed by quadrature over the inner left contours.
pub fn h_matrix(cfg: &PointConfig, fam: &ContourFamily, i: usize, z: &[Complex64], v: &[Complex64]) -> Result<CMatrix> {
    let i0 = cfg.index(i)?;
    let tail = chain_tail(cfg, fam, i0, v)?;
    h_from_tail(cfg, fam, tail.as_ref(), z, v)
}

/// `hᵢ(z, v)`; `z` must lie to the right of the second inner contour and `v`
/// to the right of the `i`-th.
pub fn eval_h(cfg: &PointConfig, fam: &ContourFamily, i: usize, z: Complex64, v: Complex64) -> Result<Complex64> {
    let i0 = cfg.index(i)?;
    if i0 >= 1 {
        if left_of(fam.left_in(2)?, z) || fam.left_in(2)?.points.contains(&z) {
            return Err(Error::ContourOrdering(format!("z = {z} is not to the right of the inner contours")));
        }
        if left_of(fam.left_in(i)?, v) {
            return Err(Error::ContourOrdering(format!("v = {v} is not to the right of the inner contours")));
        }
    }
    Ok(h_matrix(cfg, fam, i, &[z], &[v])?[(0, 0)])
}

/// The left-contour kernel, with `hᵢ` precomputed against the main right
/// contour. Its value does not depend on the column index `j`.
pub struct ContourKernel {
    cfg: PointConfig,
    fam: ContourFamily,
    /// Per index: `diag(w_v / fᵢ(v))` on the main right contour.
    right_weights: Vec<Vec<Complex64>>,
    tails: Vec<Option<CMatrix>>,
}

impl ContourKernel {
    pub fn new(cfg: &PointConfig, settings: &Settings) -> Result<Self> {
        let fam = ContourFamily::new(cfg, settings, settings.nodes)?;
        Self::with_family(cfg, fam)
    }

    pub fn with_family(cfg: &PointConfig, fam: ContourFamily) -> Result<Self> {
        let right = fam.right_main();
        let right_weights = (0..cfg.m())
            .map(|i0| right.points.iter().zip(&right.weights).map(|(&v, &w)| w * (-cfg.log_f(i0, v)).exp()).collect())
            .collect();
        let tails = (0..cfg.m())
            .map(|i0| chain_tail(cfg, &fam, i0, &right.points))
            .collect::<Result<_>>()?;
        Ok(ContourKernel { cfg: cfg.clone(), fam, right_weights, tails })
    }

    pub fn family(&self) -> &ContourFamily {
        &self.fam
    }

    pub fn config(&self) -> &PointConfig {
        &self.cfg
    }

    /// `[hᵢ(z_a, v_b) w_b / fᵢ(v_b)]` with `v` the main right contour nodes.
    fn weighted_h(&self, i0: usize, rows: &[Complex64]) -> Result<CMatrix> {
        let h = h_from_tail(&self.cfg, &self.fam, self.tails[i0].as_ref(), rows, &self.fam.right_main().points)?;
        Ok(scale_cols(h, &self.right_weights[i0]))
    }
}

impl BlockKernel for ContourKernel {
    fn m(&self) -> usize {
        self.cfg.m()
    }

    fn domain(&self) -> Domain {
        Domain::LeftContour
    }

    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
        Ok(self.block(i, j, &[s], &[t])?[(0, 0)])
    }

    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<CMatrix> {
        let i0 = self.cfg.index(i)?;
        self.cfg.index(j)?;
        let wh = self.weighted_h(i0, rows)?;
        Ok(matmul(&wh, &cauchy_matrix(&self.fam.right_main().points, cols)))
    }
}

/// `𝐊(i, z; j, u)` on a freshly built contour family.
pub fn kernel_k(cfg: &PointConfig, settings: &Settings, i: usize, z: Complex64, j: usize, u: Complex64) -> Result<Complex64> {
    ContourKernel::new(cfg, settings)?.evaluate(i, z, j, u)
}

/// The scalar half-line kernel
/// `𝐋(λ, θ) = Σᵢ ∫∫ e^{λz} hᵢ(z, v) e^{−θv} / fᵢ(v)` over the main contours.
pub struct LKernel {
    left: Vec<Complex64>,
    right: Vec<Complex64>,
    /// `Σᵢ diag(w_z) hᵢ diag(w_v / fᵢ(v))`.
    core: CMatrix,
}

impl LKernel {
    pub fn new(cfg: &PointConfig, settings: &Settings) -> Result<Self> {
        let k = ContourKernel::new(cfg, settings)?;
        let left = k.fam.left_main();
        let mut core = CMatrix::zeros(left.len(), k.fam.right_main().len());
        for i0 in 0..cfg.m() {
            core += k.weighted_h(i0, &left.points)?;
        }
        let core = scale_rows(&left.weights, core);
        Ok(LKernel { left: left.points.clone(), right: k.fam.right_main().points.clone(), core })
    }
}

impl BlockKernel for LKernel {
    fn m(&self) -> usize {
        1
    }

    fn domain(&self) -> Domain {
        Domain::HalfLine
    }

    fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
        Ok(self.block(i, j, &[s], &[t])?[(0, 0)])
    }

    fn block(&self, i: usize, j: usize, rows: &[Complex64], cols: &[Complex64]) -> Result<CMatrix> {
        if i != 1 || j != 1 {
            return Err(Error::IndexOutOfRange { index: i.max(j), m: 1 });
        }
        let el = CMatrix::from_fn(rows.len(), self.left.len(), |a, b| (rows[a] * self.left[b]).exp());
        let er = CMatrix::from_fn(self.right.len(), cols.len(), |a, b| (-cols[b] * self.right[a]).exp());
        Ok(matmul(&matmul(&el, &self.core), &er))
    }
}

/// `𝐋(λ, θ)` on a freshly built contour family.
pub fn kernel_l(cfg: &PointConfig, settings: &Settings, lambda: f64, theta: f64) -> Result<Complex64> {
    LKernel::new(cfg, settings)?.evaluate(1, Complex64::new(lambda, 0.0), 1, Complex64::new(theta, 0.0))
}

/// `∫_{iℝ} e^{(γ' − γ)w} ∏_{ℓ=i+1}^{j} F_ℓ(w) dw/(2πi)` for `i < j` (1-based),
/// by Gauss–Legendre quadrature on the vertical line through the saddle.
pub fn kernel_b_vertical(cfg: &PointConfig, i: usize, gamma: f64, j: usize, gamma_p: f64) -> Result<f64> {
    let (i0, j0) = (cfg.index(i)?, cfg.index(j)?);
    if i0 >= j0 {
        return Err(Error::InvalidArgument(format!("vertical-line kernel needs i < j, got {i}, {j}")));
    }
    let da = cfg.alpha()[j0] - cfg.alpha()[i0];
    let db = cfg.beta()[j0] - cfg.beta()[i0];
    let saddle = -(gamma_p - gamma + db) / (2.0 * da);
    let half_height = (45.0 / da).sqrt();
    let line = build_contour(&ContourSpec::vertical_line(Complex64::new(saddle, 0.0), half_height, VERTICAL_NODES).normalized())?;
    let v = line.integrate(|w| ((gamma_p - gamma) * w + cfg.log_f_ratio(i0, j0, w)).exp())?;
    Ok(v.re)
}

/// `𝐋(λ, θ)` through its expansion in Airy factors and Gaussian links:
/// `Σ_k (−1)^k Σ_{i₁<⋯<i_k} ∫ A₁(λ; i₁) B(i₁; i₂) ⋯ B(i_{k−1}; i_k) A₂(i_k; θ)`.
pub fn kernel_l_decomposed(cfg: &PointConfig, settings: &Settings, lambda: f64, theta: f64) -> Result<f64> {
    let m = cfg.m();
    let rule = gamma_rule(cfg, settings);
    let g = rule.len();
    let a1: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let (a, c) = (cfg.alpha()[i], cfg.shift(i));
            rule.nodes
                .iter()
                .map(|&y| (2.0 / 3.0 * a.powi(3) + a * (cfg.beta()[i] + lambda + y)).exp() * airy_ai(c + lambda + y))
                .collect()
        })
        .collect();
    let a2: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let (a, c) = (cfg.alpha()[i], cfg.shift(i));
            rule.nodes
                .iter()
                .map(|&y| (-2.0 / 3.0 * a.powi(3) - a * (cfg.beta()[i] + theta + y)).exp() * airy_ai(c + theta + y))
                .collect()
        })
        .collect();
    // links[i][j][(a, b)] = B(i, γ_a; j, γ_b) w_b
    let mut links = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let mut mat = vec![0.0; g * g];
            for a in 0..g {
                for b in 0..g {
                    mat[a * g + b] = kernel_b_vertical(cfg, i + 1, rule.nodes[a], j + 1, rule.nodes[b])? * rule.weights[b];
                }
            }
            links[i][j] = Some(mat);
        }
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|k| mask & (1 << k) != 0).collect();
        let mut vec: Vec<f64> = a1[idx[0]].iter().zip(&rule.weights).map(|(x, w)| x * w).collect();
        for pair in idx.windows(2) {
            let mat = links[pair[0]][pair[1]].as_ref().expect("link computed for i < j");
            let mut next = vec![0.0; g];
            for a in 0..g {
                let va = vec[a];
                for b in 0..g {
                    next[b] += va * mat[a * g + b];
                }
            }
            vec = next;
        }
        let term: f64 = vec.iter().zip(&a2[*idx.last().unwrap()]).map(|(x, y)| x * y).sum();
        total += if idx.len() % 2 == 1 { -term } else { term };
    }
    if !total.is_finite() {
        return Err(Error::NonFinite { node: Complex64::new(lambda, theta), value: Complex64::new(total, 0.0) });
    }
    Ok(total)
}
