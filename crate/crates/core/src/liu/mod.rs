//! The multiple-sum representation of the joint distribution.
//!
//! `P = Σ_n D̂ₙ / ∏ nᵢ!²` where `D̂ₙ` is a contour integral over the
//! auxiliary variables `z₁, …, z_{m−1}` of a multi-fold integral `𝒟ₙ(z)`.
//! Three further forms of `D̂ₙ` arise as the `z` integrals are carried out
//! and as the right-hand variables are collapsed by residues; all four are
//! available here so they can be checked against each other.

mod cycles;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{det_lu, FredholmResult};
use crate::kernels::{ContourFamily, ContourRole, PointConfig};
use crate::linalg::cauchy_matrix;
use crate::settings::Settings;

use cycles::{CycleEvaluator, EdgeKind, Factor, ProductIntegral, VarClass, Weight};

/// Largest `Σ nᵢ` accepted.
pub const MAX_TOTAL: usize = 4;
/// Largest number of points accepted by the sum pipeline.
pub const MAX_POINTS: usize = 3;
/// Largest cutoff of the sum.
pub const MAX_CUTOFF: usize = 3;

/// `n = (n₁, …, n_m)` with `Σ nᵢ ≤ 4`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(n: Vec<usize>) -> Result<Self> {
        if n.is_empty() {
            return Err(Error::InvalidArgument("empty multi-index".into()));
        }
        let total: usize = n.iter().sum();
        if total > MAX_TOTAL {
            return Err(Error::CostGuard(format!("multi-index total {total} exceeds {MAX_TOTAL}")));
        }
        Ok(MultiIndex(n))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn m(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// `n₁ ≥ n₂ ≥ ⋯ ≥ n_m`.
    pub fn is_admissible(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// `kᵢ = nᵢ − nᵢ₊₁` with `n_{m+1} = 0`; `None` unless admissible.
    pub fn k(&self) -> Option<Vec<usize>> {
        if !self.is_admissible() {
            return None;
        }
        let n = &self.0;
        Some((0..n.len()).map(|i| n[i] - n.get(i + 1).copied().unwrap_or(0)).collect())
    }

    /// All multi-indices with `m` parts and total exactly `t`.
    pub fn with_total(m: usize, t: usize) -> Result<Vec<Self>> {
        fn go(m: usize, t: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if prefix.len() + 1 == m {
                prefix.push(t);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for a in (0..=t).rev() {
                prefix.push(a);
                go(m, t - a, prefix, out);
                prefix.pop();
            }
        }
        if m == 0 {
            return Err(Error::InvalidArgument("multi-index needs at least one part".into()));
        }
        let mut out = Vec::new();
        go(m, t, &mut Vec::new(), &mut out);
        out.into_iter().map(MultiIndex::new).collect()
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// An ordered list of complex numbers.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `self ⊔ other`: entries of `self` followed by those of `other`.
    pub fn conjunction(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().chain(&other.0).copied().collect())
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexVector(v)
    }
}

fn check_cauchy(w: &ComplexVector, wt: &ComplexVector) -> Result<()> {
    if w.len() != wt.len() {
        return Err(Error::DimensionMismatch(format!("{} rows and {} columns", w.len(), wt.len())));
    }
    for (a, x) in w.0.iter().enumerate() {
        for (b, y) in wt.0.iter().enumerate() {
            if x == y {
                return Err(Error::CoincidentEntries { row: a, col: b });
            }
        }
    }
    Ok(())
}

/// `det[1/(wₐ − w̃_b)]` by the product formula
/// `(−1)^{n(n−1)/2} ∏_{a<b}(w_a−w_b)(w̃_a−w̃_b) / ∏_{a,b}(w_a−w̃_b)`.
/// The empty determinant is 1.
pub fn cauchy_det(w: &ComplexVector, wt: &ComplexVector) -> Result<Complex64> {
    check_cauchy(w, wt)?;
    let n = w.len();
    let (w, wt) = (&w.0, &wt.0);
    let mut num = Complex64::new(1.0, 0.0);
    for a in 0..n {
        for b in a + 1..n {
            num *= (w[a] - w[b]) * (wt[a] - wt[b]);
        }
    }
    let mut den = Complex64::new(1.0, 0.0);
    for &x in w {
        for &y in wt {
            den *= x - y;
        }
    }
    let sign = if (n * n.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign * num / den)
}

/// The same determinant by LU on the explicit matrix.
pub fn cauchy_det_direct(w: &ComplexVector, wt: &ComplexVector) -> Result<Complex64> {
    check_cauchy(w, wt)?;
    if w.is_empty() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    det_lu(&cauchy_matrix(&w.0, &wt.0))
}

/// The intermediate forms of `D̂ₙ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// `z` integrals done: left variables on the inner contours, right
    /// variables on the outer ones.
    InOutCollapsed,
    /// Right variables of every index collapsed onto the main right contour.
    ResiduesTaken,
    /// Left variables collapsed too, leaving determinants of `hᵢ`.
    HKernel,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::InOutCollapsed, Stage::ResiduesTaken, Stage::HKernel];

    pub fn name(self) -> &'static str {
        match self {
            Stage::InOutCollapsed => "in-out-collapsed",
            Stage::ResiduesTaken => "residues-taken",
            Stage::HKernel => "h-kernel",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown stage {s:?}")))
    }
}

/// A point configuration with the contour family used by every form of `D̂ₙ`.
#[derive(Debug, Clone)]
pub struct Chain {
    cfg: PointConfig,
    fam: ContourFamily,
    settings: Settings,
}

/// Counts of left and right variables of index `i ≥ 2` on the outer contours.
type OutCounts = Vec<(usize, usize)>;

/// `𝒟ₙ(z)` as a polynomial combination of `z`-free integrals.
#[derive(Debug, Clone)]
pub struct ExpandedIntegrand {
    n: MultiIndex,
    terms: Vec<(OutCounts, Complex64)>,
}

impl ExpandedIntegrand {
    /// `𝒟ₙ(z)` at `z = (z₁, …, z_{m−1})`.
    pub fn eval(&self, z: &[Complex64]) -> Result<Complex64> {
        let n = self.n.parts();
        let m = n.len();
        if z.len() + 1 != m {
            return Err(Error::DimensionMismatch(format!("{} points need {} z values, got {}", m, m - 1, z.len())));
        }
        for &zi in z {
            let r = zi.norm();
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("|z| = {r} is not in (0, 1)")));
            }
        }
        let one = Complex64::new(1.0, 0.0);
        let mut pre = one;
        for i in 0..m - 1 {
            pre *= (one - z[i]).powu(n[i] as u32) * (one - one / z[i]).powu(n[i + 1] as u32);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (outs, value) in &self.terms {
            let mut coef = one;
            for (idx, &(qu, qv)) in outs.iter().enumerate() {
                let i = idx + 1; // 0-based point index
                let zi = z[i - 1];
                let inn = one / (one - zi);
                let out = -zi / (one - zi);
                for q in [qu, qv] {
                    coef *= binomial(n[i], q) * inn.powu((n[i] - q) as u32) * out.powu(q as u32);
                }
            }
            sum += coef * value;
        }
        Ok(pre * sum)
    }

    /// `∮ 𝒟ₙ(z) ∏ dzᵢ / (2πi zᵢ(1 − zᵢ))` by the trapezoid rule on circles.
    pub fn integrate_z(&self, radius: f64, nodes: usize) -> Result<Complex64> {
        if !(radius > 0.0 && radius < 1.0) || nodes == 0 {
            return Err(Error::InvalidArgument(format!("z circle radius {radius} with {nodes} nodes")));
        }
        let dims = self.n.m() - 1;
        let circle: Vec<Complex64> =
            (0..nodes).map(|k| Complex64::from_polar(radius, 2.0 * PI * (k as f64 + 0.5) / nodes as f64)).collect();
        let mut idx = vec![0usize; dims];
        let mut total = Complex64::new(0.0, 0.0);
        loop {
            let z: Vec<Complex64> = idx.iter().map(|&k| circle[k]).collect();
            let mut w = Complex64::new(1.0, 0.0);
            for &zi in &z {
                w /= (1.0 - zi) * nodes as f64;
            }
            total += w * self.eval(&z)?;
            let mut d = 0;
            loop {
                if d == dims {
                    return Ok(total);
                }
                idx[d] += 1;
                if idx[d] < nodes {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }
}

fn left_class(role: ContourRole, weight: Weight) -> VarClass {
    VarClass { role, weight }
}

impl Chain {
    pub fn new(cfg: &PointConfig, settings: &Settings) -> Result<Self> {
        if cfg.m() > MAX_POINTS {
            return Err(Error::CostGuard(format!("{} points, at most {MAX_POINTS} supported", cfg.m())));
        }
        let mut family_settings = *settings;
        family_settings.right_angle = settings.chain_right_angle;
        let fam = ContourFamily::new(cfg, &family_settings, settings.chain_nodes)?;
        Ok(Chain { cfg: cfg.clone(), fam, settings: *settings })
    }

    pub fn config(&self) -> &PointConfig {
        &self.cfg
    }

    fn check_index(&self, n: &MultiIndex) -> Result<()> {
        if n.m() != self.cfg.m() {
            return Err(Error::DimensionMismatch(format!(
                "multi-index has {} parts for {} points",
                n.m(),
                self.cfg.m()
            )));
        }
        Ok(())
    }

    /// The integrand `C(V¹;U¹) ∏ᵢ C(Uⁱ ⊔ Vⁱ⁺¹; Vⁱ ⊔ Uⁱ⁺¹) ∏ Fᵢ(u)/Fᵢ(v)` with
    /// the given counts of index-`i` variables on the outer contours.
    fn base_integral(&self, n: &[usize], outs: &[(usize, usize)], collapsed: bool) -> ProductIntegral {
        let m = n.len();
        let mut pi = ProductIntegral::default();
        let mut u = Vec::with_capacity(m);
        let mut v = Vec::with_capacity(m);
        for i in 0..m {
            let (lin, lout, rin, rout) = if i == 0 {
                (ContourRole::LeftMain, ContourRole::LeftMain, ContourRole::RightMain, ContourRole::RightMain)
            } else {
                let p = i + 1;
                (ContourRole::LeftIn(p), ContourRole::LeftOut(p), ContourRole::RightIn(p), ContourRole::RightOut(p))
            };
            let (qu, qv) = if i == 0 { (0, 0) } else { outs[i - 1] };
            let mut ui = pi.add_vars(left_class(lin, Weight::BigF(i)), n[i] - qu);
            ui.extend(pi.add_vars(left_class(lout, Weight::BigF(i)), qu));
            let (qv_in, qv_out) = if collapsed { (0, n[i]) } else { (n[i] - qv, qv) };
            let mut vi = pi.add_vars(left_class(rin, Weight::InvBigF(i)), qv_in);
            vi.extend(pi.add_vars(left_class(rout, Weight::InvBigF(i)), qv_out));
            u.push(ui);
            v.push(vi);
        }
        pi.factors.push(Factor::cauchy(v[0].clone(), u[0].clone()));
        for i in 0..m {
            let mut rows = u[i].clone();
            let mut cols = v[i].clone();
            if i + 1 < m {
                rows.extend(&v[i + 1]);
                cols.extend(&u[i + 1]);
            }
            pi.factors.push(Factor::cauchy(rows, cols));
        }
        pi
    }

    /// Expands `𝒟ₙ` over the inner/outer contour choices and evaluates each
    /// `z`-free integral once. Variables within one block are exchangeable,
    /// so only the number on the outer contour matters.
    pub fn expand(&self, n: &MultiIndex) -> Result<ExpandedIntegrand> {
        self.check_index(n)?;
        let parts = n.parts();
        let m = parts.len();
        let mut choices: Vec<OutCounts> = vec![Vec::new()];
        for &ni in &parts[1..] {
            let mut next = Vec::new();
            for c in &choices {
                for qu in 0..=ni {
                    for qv in 0..=ni {
                        let mut c = c.clone();
                        c.push((qu, qv));
                        next.push(c);
                    }
                }
            }
            choices = next;
        }
        debug_assert!(choices.iter().all(|c| c.len() + 1 == m));
        let mut ev = CycleEvaluator::new(&self.cfg, &self.fam);
        let terms = choices
            .into_iter()
            .map(|c| {
                let v = ev.evaluate(&self.base_integral(parts, &c, false))?;
                Ok((c, v))
            })
            .collect::<Result<_>>()?;
        Ok(ExpandedIntegrand { n: n.clone(), terms })
    }

    /// `𝒟ₙ(z)`.
    pub fn eval_d_n(&self, n: &MultiIndex, z: &[Complex64]) -> Result<Complex64> {
        self.expand(n)?.eval(z)
    }

    /// `D̂ₙ` from `𝒟ₙ` by the trapezoid rule on `|zᵢ| = radius`.
    pub fn hat_d_direct_radius(&self, n: &MultiIndex, radius: f64) -> Result<Complex64> {
        self.expand(n)?.integrate_z(radius, self.settings.z_nodes)
    }

    pub fn hat_d_direct(&self, n: &MultiIndex) -> Result<Complex64> {
        self.hat_d_direct_radius(n, self.settings.z_radius)
    }

    /// `D̂ₙ` in one of its reduced forms. The two residue forms vanish
    /// identically for non-admissible `n`.
    pub fn hat_d_stage(&self, n: &MultiIndex, stage: Stage) -> Result<Complex64> {
        self.check_index(n)?;
        let parts = n.parts();
        let m = parts.len();
        let mut ev = CycleEvaluator::new(&self.cfg, &self.fam);
        if stage == Stage::InOutCollapsed {
            let outs: OutCounts = parts[1..].iter().map(|&ni| (0, ni)).collect();
            return ev.evaluate(&self.base_integral(parts, &outs, true));
        }
        let Some(k) = n.k() else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let ratio: f64 = (0..m - 1).map(|i| factorial(parts[i]) / factorial(k[i])).product();
        let mut pi = ProductIntegral::default();
        let right = |i| left_class(ContourRole::RightMain, Weight::InvF(i));
        // V̂ = V̂ᵐ ⊔ ⋯ ⊔ V̂¹
        let vhat: Vec<Vec<usize>> = (0..m).map(|i| pi.add_vars(right(i), k[i])).collect();
        let vall: Vec<usize> = vhat.iter().rev().flatten().copied().collect();
        match stage {
            Stage::ResiduesTaken => {
                let u: Vec<Vec<usize>> = (0..m)
                    .map(|i| {
                        let role = if i == 0 { ContourRole::LeftMain } else { ContourRole::LeftIn(i + 1) };
                        pi.add_vars(left_class(role, Weight::BigF(i)), parts[i])
                    })
                    .collect();
                pi.factors.push(Factor::cauchy(vall, u[0].clone()));
                for i in 0..m {
                    let mut cols = u.get(i + 1).cloned().unwrap_or_default();
                    cols.extend(&vhat[i]);
                    pi.factors.push(Factor::cauchy(u[i].clone(), cols));
                }
                Ok(ratio * ev.evaluate(&pi)?)
            }
            Stage::HKernel => {
                let uhat: Vec<Vec<usize>> =
                    (0..m).map(|i| pi.add_vars(left_class(ContourRole::LeftMain, Weight::One), k[i])).collect();
                let uall: Vec<usize> = uhat.iter().rev().flatten().copied().collect();
                pi.factors.push(Factor::cauchy(vall, uall));
                for i in 0..m {
                    pi.factors.push(Factor { rows: uhat[i].clone(), cols: vhat[i].clone(), kind: EdgeKind::H(i) });
                }
                Ok(ratio * ratio * ev.evaluate(&pi)?)
            }
            Stage::InOutCollapsed => unreachable!(),
        }
    }

    /// `Σ_{Σn ≤ c} D̂ₙ / ∏ nᵢ!²` for `c = 0..=cutoff`, using the `h`-kernel
    /// form for each admissible `n`.
    pub fn airy_cdf_via_sum(&self, cutoff: usize) -> Result<FredholmResult> {
        if cutoff > MAX_CUTOFF {
            return Err(Error::CostGuard(format!("cutoff {cutoff} exceeds {MAX_CUTOFF}")));
        }
        let m = self.cfg.m();
        let mut partial = Complex64::new(1.0, 0.0);
        let mut history = vec![(0, partial)];
        for t in 1..=cutoff {
            for n in MultiIndex::with_total(m, t)? {
                if !n.is_admissible() {
                    continue;
                }
                let weight: f64 = n.parts().iter().map(|&ni| factorial(ni).powi(2)).product();
                let v = self.hat_d_stage(&n, Stage::HKernel)?;
                partial += v / weight;
            }
            history.push((t, partial));
        }
        Ok(FredholmResult::from_history(history))
    }
}

/// `𝒟ₙ(z)` for one configuration; `m ≤ 3` and `0 < |zᵢ| < 1`.
pub fn eval_d_n(cfg: &PointConfig, n: &MultiIndex, z: &[Complex64], settings: &Settings) -> Result<Complex64> {
    Chain::new(cfg, settings)?.eval_d_n(n, z)
}

/// `D̂ₙ` by direct `z` integration of `𝒟ₙ`.
pub fn hat_d_direct(cfg: &PointConfig, n: &MultiIndex, settings: &Settings) -> Result<Complex64> {
    Chain::new(cfg, settings)?.hat_d_direct(n)
}

pub fn hat_d_stage(cfg: &PointConfig, n: &MultiIndex, stage: Stage, settings: &Settings) -> Result<Complex64> {
    Chain::new(cfg, settings)?.hat_d_stage(n, stage)
}

/// Partial sums of the multiple-sum representation up to `cutoff ≤ 3`.
pub fn airy_cdf_via_sum(cfg: &PointConfig, cutoff: usize, settings: &Settings) -> Result<FredholmResult> {
    Chain::new(cfg, settings)?.airy_cdf_via_sum(cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fredholm::{fredholm_det_contour_nystrom, series_partial_sums, contour_matrix};
    use crate::kernels::ContourKernel;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cv(xs: &[f64]) -> ComplexVector {
        ComplexVector(xs.iter().map(|&x| c(x, 0.0)).collect())
    }

    fn two_point() -> PointConfig {
        PointConfig::new(vec![0.0, 1.0], vec![-0.5, 0.0]).unwrap()
    }

    #[test]
    fn multi_index_basics() {
        let n = MultiIndex::new(vec![2, 1]).unwrap();
        assert!(n.is_admissible());
        assert_eq!(n.k(), Some(vec![1, 1]));
        assert_eq!(MultiIndex::new(vec![1, 2]).unwrap().k(), None);
        assert!(matches!(MultiIndex::new(vec![3, 2]), Err(Error::CostGuard(_))));
        assert_eq!(MultiIndex::with_total(2, 2).unwrap().len(), 3);
        assert_eq!(MultiIndex::with_total(3, 2).unwrap().len(), 6);
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_det(&cv(&[2.0]), &cv(&[1.0])).unwrap(), c(1.0, 0.0));
        let d = cauchy_det(&cv(&[0.0, 1.0]), &cv(&[2.0, 3.0])).unwrap();
        assert!((d - c(-1.0 / 12.0, 0.0)).norm() < 1e-15);
        assert_eq!(cauchy_det(&cv(&[]), &cv(&[])).unwrap(), c(1.0, 0.0));
        assert!(matches!(cauchy_det(&cv(&[1.0]), &cv(&[1.0, 2.0])), Err(Error::DimensionMismatch(_))));
        assert_eq!(
            cauchy_det(&cv(&[1.0, 2.0]), &cv(&[3.0, 2.0])),
            Err(Error::CoincidentEntries { row: 1, col: 1 })
        );
    }

    #[test]
    fn conjunction_concatenates() {
        let a = cv(&[1.0, 2.0]).conjunction(&cv(&[3.0]));
        assert_eq!(a, cv(&[1.0, 2.0, 3.0]));
        assert_eq!(cv(&[]).conjunction(&cv(&[])), cv(&[]));
    }

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::ALL {
            assert_eq!(s.name().parse::<Stage>().unwrap(), s);
        }
        assert!("unknown".parse::<Stage>().is_err());
    }

    #[test]
    fn empty_index_gives_one() {
        let cfg = two_point();
        let n = MultiIndex::new(vec![0, 0]).unwrap();
        let v = eval_d_n(&cfg, &n, &[c(0.3, 0.1)], &Settings::default()).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn z_arguments_are_checked() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let n = MultiIndex::new(vec![1, 0]).unwrap();
        assert!(chain.eval_d_n(&n, &[c(1.2, 0.0)]).is_err());
        assert!(chain.eval_d_n(&n, &[c(0.0, 0.0)]).is_err());
        assert!(chain.eval_d_n(&n, &[]).is_err());
        let four = PointConfig::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0; 4]).unwrap();
        assert!(matches!(Chain::new(&four, &Settings::default()), Err(Error::CostGuard(_))));
    }

    #[test]
    fn core_of_first_term_is_z_free() {
        // 𝒟_(1,0)(z) / (1 − z) does not depend on z
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let n = MultiIndex::new(vec![1, 0]).unwrap();
        let core = |z: Complex64| chain.eval_d_n(&n, &[z]).unwrap() / (1.0 - z);
        let (a, b) = (core(c(0.3, 0.0)), core(c(0.0, 0.5)));
        assert!((a - b).norm() < 1e-10, "{a} vs {b}");
    }

    #[test]
    fn stable_under_node_doubling() {
        let s = Settings::default();
        let n = MultiIndex::new(vec![1, 1]).unwrap();
        let z = [c(0.4, 0.0)];
        let a = eval_d_n(&two_point(), &n, &z, &s).unwrap();
        let b = eval_d_n(&two_point(), &n, &z, &s.refined()).unwrap();
        assert!((a - b).norm() < 1e-7, "{a} vs {b}");
    }

    #[test]
    fn direct_form_vanishes_off_admissible() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let v = chain.hat_d_direct(&MultiIndex::new(vec![0, 1]).unwrap()).unwrap();
        assert!(v.norm() < 1e-6, "{v}");
    }

    #[test]
    fn residue_forms_are_exactly_zero_off_admissible() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let n = MultiIndex::new(vec![1, 2]).unwrap();
        assert_eq!(chain.hat_d_stage(&n, Stage::ResiduesTaken).unwrap(), c(0.0, 0.0));
        assert_eq!(chain.hat_d_stage(&n, Stage::HKernel).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn direct_matches_collapsed_for_first_term() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let n = MultiIndex::new(vec![1, 0]).unwrap();
        let a = chain.hat_d_direct(&n).unwrap();
        let b = chain.hat_d_stage(&n, Stage::InOutCollapsed).unwrap();
        assert!((a - b).norm() < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn single_point_term_is_trace_of_contour_kernel() {
        let cfg = PointConfig::single(0.0, -1.0).unwrap();
        let s = Settings::default();
        let d = hat_d_direct(&cfg, &MultiIndex::new(vec![1]).unwrap(), &s).unwrap();
        let k = contour_matrix(&ContourKernel::new(&cfg, &s).unwrap()).unwrap();
        let sums = series_partial_sums(&k, 1).unwrap();
        let tr = sums[1] - sums[0];
        assert!((d - tr).norm() < 1e-7, "{d} vs {tr}");
    }

    #[test]
    fn circle_radius_does_not_matter() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        let n = MultiIndex::new(vec![1, 1]).unwrap();
        let e = chain.expand(&n).unwrap();
        let a = e.integrate_z(0.4, 32).unwrap();
        let b = e.integrate_z(0.6, 32).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }

    #[test]
    fn all_forms_agree() {
        let chain = Chain::new(&two_point(), &Settings::default()).unwrap();
        for parts in [vec![1, 0], vec![1, 1], vec![2, 1]] {
            let n = MultiIndex::new(parts).unwrap();
            let mut vals = vec![chain.hat_d_direct(&n).unwrap()];
            for st in Stage::ALL {
                vals.push(chain.hat_d_stage(&n, st).unwrap());
            }
            for a in &vals {
                for b in &vals {
                    assert!((a - b).norm() < 1e-5, "{:?}: {vals:?}", n);
                }
            }
        }
    }

    #[test]
    fn sum_starts_at_one_and_approaches_gue() {
        let cfg = PointConfig::single(0.0, 0.0).unwrap();
        let r = airy_cdf_via_sum(&cfg, 3, &Settings::default()).unwrap();
        assert_eq!(r.history[0], (0, c(1.0, 0.0)));
        let f = crate::airy::f_gue(0.0).unwrap();
        assert!((r.value.re - f).abs() < 5e-3, "{} vs {f}", r.value);
        assert!(airy_cdf_via_sum(&cfg, 4, &Settings::default()).is_err());
    }

    #[test]
    fn two_point_sum_tracks_nystrom() {
        let cfg = two_point();
        let s = Settings::default();
        let r = airy_cdf_via_sum(&cfg, 2, &s).unwrap();
        let exact = fredholm_det_contour_nystrom(&cfg, &s).unwrap().value;
        // the last included order bounds the tail
        assert!((r.value - exact).norm() <= r.error_estimate, "{:?} vs {exact}", r.history);
    }
}
