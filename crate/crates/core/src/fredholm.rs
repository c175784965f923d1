//! Fredholm determinants: dense LU, Nyström on half-lines and contours, and
//! the truncated series.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{BMinusAKernel, BlockKernel, ContourKernel, LKernel, PointConfig};
use crate::linalg::{matmul, CMatrix};
use crate::quadrature::GaussLegendre;
use crate::settings::Settings;

/// Largest truncation order accepted by the series evaluator.
pub const SERIES_MAX_ORDER: usize = 6;

/// A determinant together with how it was reached.
#[derive(Debug, Clone, PartialEq)]
pub struct FredholmResult {
    pub value: Complex64,
    /// `(resolution or truncation order, value)`, in the order computed.
    pub history: Vec<(usize, Complex64)>,
    /// `|last − previous|` over the history, 0 for a single entry.
    pub error_estimate: f64,
}

impl FredholmResult {
    pub fn from_history(history: Vec<(usize, Complex64)>) -> Self {
        assert!(!history.is_empty(), "a result needs at least one entry");
        let value = history[history.len() - 1].1;
        let error_estimate = if history.len() > 1 {
            (value - history[history.len() - 2].1).norm()
        } else {
            0.0
        };
        FredholmResult { value, history, error_estimate }
    }
}

/// `(log|det M|, det M / |det M|)` by row-pivoted LU.
pub fn det_lu_log(m: &DMatrix<Complex64>) -> Result<(f64, Complex64)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    // row-major working copy
    let mut a: Vec<Complex64> = Vec::with_capacity(n * n);
    for r in 0..n {
        for c in 0..n {
            let v = m[(r, c)];
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { node: Complex64::new(r as f64, c as f64), value: v });
            }
            a.push(v);
        }
    }
    let mut log_mag = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].norm();
        for r in k + 1..n {
            let v = a[r * n + k].norm();
            if v > best {
                best = v;
                p = r;
            }
        }
        if best < 1e-300 {
            return Err(Error::Singular { column: k, pivot: best });
        }
        if p != k {
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            phase = -phase;
        }
        let pivot = a[k * n + k];
        log_mag += best.ln();
        phase *= pivot / best;
        let inv = 1.0 / pivot;
        let (top, rest) = a.split_at_mut((k + 1) * n);
        let pivot_row = &top[k * n..(k + 1) * n];
        for row in rest.chunks_mut(n) {
            let factor = row[k] * inv;
            if factor == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in k + 1..n {
                row[c] -= factor * pivot_row[c];
            }
        }
    }
    Ok((log_mag, phase))
}

/// Determinant by row-pivoted LU; fails on pivots below `1e-300`.
pub fn det_lu(m: &DMatrix<Complex64>) -> Result<Complex64> {
    if m.nrows() == 0 && m.ncols() == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let (log_mag, phase) = det_lu_log(m)?;
    Ok(phase * log_mag.exp())
}

fn check_finite(v: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { node: Complex64::new(0.0, 0.0), value: v })
    }
}

/// `I + [√w_a K(i, x_a; j, x_b) √w_b]` on `n` Gauss–Legendre nodes per index
/// in `(0, lambda_max)`, blocks indexed `(i − 1)·n + a`.
pub fn halfline_matrix<K: BlockKernel + ?Sized>(kernel: &K, lambda_max: f64, n: usize) -> Result<CMatrix> {
    let m = kernel.m();
    let rule = GaussLegendre::on_interval(0.0, lambda_max, n);
    let x: Vec<Complex64> = rule.nodes.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut out = CMatrix::identity(m * n, m * n);
    for i in 1..=m {
        for j in 1..=m {
            let b = kernel.block(i, j, &x, &x)?;
            for a in 0..n {
                for c in 0..n {
                    out[((i - 1) * n + a, (j - 1) * n + c)] += sw[a] * b[(a, c)] * sw[c];
                }
            }
        }
    }
    Ok(out)
}

/// `det(I + K)` on `(0, lambda_max)` with `n` and `2n` nodes per index.
pub fn fredholm_det_halfline<K: BlockKernel + ?Sized>(kernel: &K, lambda_max: f64, n: usize) -> Result<FredholmResult> {
    if !(lambda_max.is_finite() && lambda_max > 0.0) || n < 2 {
        return Err(Error::InvalidArgument("need lambda_max > 0 and at least 2 nodes".into()));
    }
    let mut history = Vec::new();
    for nodes in [n, 2 * n] {
        let d = det_lu(&halfline_matrix(kernel, lambda_max, nodes)?)?;
        history.push((nodes, check_finite(d)?));
    }
    Ok(FredholmResult::from_history(history))
}

/// The Nyström matrix `[𝐊(i, z_a; j, u_b) w_b]` on the main left contour,
/// blocks indexed `(i − 1)·N + a`.
pub fn contour_matrix(kernel: &ContourKernel) -> Result<CMatrix> {
    let m = kernel.m();
    let left = kernel.family().left_main();
    let n = left.len();
    let mut out = CMatrix::zeros(m * n, m * n);
    for i in 1..=m {
        // the kernel does not depend on j, so one block serves the whole row
        let mut b = kernel.block(i, 1, &left.points, &left.points)?;
        for (c, w) in left.weights.iter().enumerate() {
            b.column_mut(c).iter_mut().for_each(|x| *x *= w);
        }
        for j in 0..m {
            out.view_mut(((i - 1) * n, j * n), (n, n)).copy_from(&b);
        }
    }
    Ok(out)
}

fn contour_det(cfg: &PointConfig, settings: &Settings) -> Result<Complex64> {
    let kernel = ContourKernel::new(cfg, settings)?;
    let k = contour_matrix(&kernel)?;
    let n = k.nrows();
    check_finite(det_lu(&(CMatrix::identity(n, n) + k))?)
}

/// `det(I + 𝐊)` on the main left contour at `settings` and at doubled panel nodes.
pub fn fredholm_det_contour_nystrom(cfg: &PointConfig, settings: &Settings) -> Result<FredholmResult> {
    let fine = Settings { nodes: settings.nodes * 2, ..*settings };
    Ok(FredholmResult::from_history(vec![
        (settings.nodes, contour_det(cfg, settings)?),
        (fine.nodes, contour_det(cfg, &fine)?),
    ]))
}

/// Partial sums `Σ_{k ≤ K} e_k(M)` of `det(I + M) = Σ_k e_k(M)`, where `e_k` is
/// the sum of the `k × k` principal minors, via Newton's identities on `tr(Mʲ)`.
pub fn series_partial_sums(m: &CMatrix, k_max: usize) -> Result<Vec<Complex64>> {
    if k_max > SERIES_MAX_ORDER {
        return Err(Error::CostGuard(format!("series order {k_max} exceeds {SERIES_MAX_ORDER}")));
    }
    let mut p = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let mut power = m.clone();
    for j in 1..=k_max {
        if j > 1 {
            power = matmul(&power, m);
        }
        p[j] = power.trace();
    }
    let mut e = vec![Complex64::new(1.0, 0.0)];
    for k in 1..=k_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            let term = e[k - j] * p[j];
            acc += if j % 2 == 1 { term } else { -term };
        }
        e.push(acc / k as f64);
    }
    let mut sums = Vec::with_capacity(k_max + 1);
    let mut total = Complex64::new(0.0, 0.0);
    for ek in e {
        total += ek;
        sums.push(check_finite(total)?);
    }
    Ok(sums)
}

/// Truncated series of `det(I + 𝐊)`; the history holds the partial sums `k = 0..=k_max`.
pub fn fredholm_det_contour_series(cfg: &PointConfig, settings: &Settings, k_max: usize) -> Result<FredholmResult> {
    if k_max > SERIES_MAX_ORDER {
        return Err(Error::CostGuard(format!("series order {k_max} exceeds {SERIES_MAX_ORDER}")));
    }
    if k_max == 0 {
        return Ok(FredholmResult::from_history(vec![(0, Complex64::new(1.0, 0.0))]));
    }
    let kernel = ContourKernel::new(cfg, settings)?;
    let m = contour_matrix(&kernel)?;
    let sums = series_partial_sums(&m, k_max)?;
    Ok(FredholmResult::from_history(sums.into_iter().enumerate().collect()))
}

/// `det(I + 𝐋)` on the half-line, the transposed form of the contour determinant.
pub fn fredholm_det_l(cfg: &PointConfig, settings: &Settings) -> Result<FredholmResult> {
    let kernel = LKernel::new(cfg, settings)?;
    fredholm_det_halfline(&kernel, settings.lambda_max, settings.nystrom_nodes)
}

/// Sum of all `k × k` principal minors by enumeration; small matrices only.
pub fn principal_minor_sum(m: &CMatrix, k: usize) -> Result<Complex64> {
    let n = m.nrows();
    if k > n {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut idx: Vec<usize> = (0..k).collect();
    let mut total = Complex64::new(0.0, 0.0);
    loop {
        let sub = CMatrix::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
        total += det_lu(&sub).or_else(|e| match e {
            Error::Singular { .. } => Ok(Complex64::new(0.0, 0.0)),
            other => Err(other),
        })?;
        // next k-subset in lexicographic order
        let mut pos = k;
        loop {
            if pos == 0 {
                return Ok(total);
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
            if pos == 0 && idx[0] >= n - k {
                return Ok(total);
            }
        }
        idx[pos] += 1;
        for q in pos + 1..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// `det(I + B̃ − Ã)` computed directly and through the factorization
/// `(I + B̃)(I − Σ_{k<m} (−B̃)ᵏ Ã)`, which holds because `B̃` is strictly block
/// upper triangular, on `n` nodes per index.
pub fn upper_factorization_pair(cfg: &PointConfig, settings: &Settings, n: usize) -> Result<(Complex64, Complex64)> {
    let kernel = BMinusAKernel::new(cfg, settings);
    let m = cfg.m();
    let rule = GaussLegendre::on_interval(0.0, settings.lambda_max, n);
    let x: Vec<Complex64> = rule.nodes.iter().map(|&t| Complex64::new(t, 0.0)).collect();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut a = CMatrix::zeros(m * n, m * n);
    let mut b = CMatrix::zeros(m * n, m * n);
    for i in 1..=m {
        for j in 1..=m {
            let ab = kernel.a_block(i, j, &x, &x)?;
            let bb = kernel.b_block(i, j, &x, &x)?;
            for r in 0..n {
                for c in 0..n {
                    a[((i - 1) * n + r, (j - 1) * n + c)] = sw[r] * ab[(r, c)] * sw[c];
                    b[((i - 1) * n + r, (j - 1) * n + c)] = sw[r] * bb[(r, c)] * sw[c];
                }
            }
        }
    }
    let id = CMatrix::identity(m * n, m * n);
    let direct = det_lu(&(&id + &b - &a))?;
    // Σ_{k<m} (−B)^k
    let mut neumann = id.clone();
    let mut power = id.clone();
    for _ in 1..m {
        power = -matmul(&power, &b);
        neumann += &power;
    }
    let factored = det_lu(&(&id + &b))? * det_lu(&(&id - matmul(&neumann, &a)))?;
    Ok((direct, factored))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::f_gue;
    use crate::kernels::{ExtAiryKernel, Negated};
    use crate::linalg::matmul;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(n: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |i, j| {
            let t = seed + 0.91 * i as f64 + 0.37 * j as f64 + 0.05 * (i * j) as f64;
            c(t.sin(), (1.3 * t).cos()) * 0.4
        })
    }

    #[test]
    fn det_of_identity_and_diagonal() {
        assert_eq!(det_lu(&CMatrix::identity(5, 5)).unwrap(), c(1.0, 0.0));
        let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 3.0)]));
        assert!((det_lu(&d).unwrap() - c(0.0, 6.0)).norm() < 1e-15);
        assert_eq!(det_lu(&CMatrix::zeros(0, 0)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn row_swap_negates() {
        let m = sample(6, 0.3);
        let mut p = m.clone();
        p.swap_rows(1, 4);
        let (a, b) = (det_lu(&m).unwrap(), det_lu(&p).unwrap());
        assert!((a + b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn singular_and_bad_shapes() {
        let mut m = sample(4, 0.1);
        let r = m.row(0).clone_owned();
        m.row_mut(2).copy_from(&(r * c(2.0, 0.0)));
        assert!(det_lu(&m).map_or(true, |d| d.norm() < 1e-14));
        assert!(matches!(det_lu(&CMatrix::zeros(3, 3)), Err(Error::Singular { .. })));
        assert!(matches!(det_lu(&CMatrix::zeros(2, 3)), Err(Error::DimensionMismatch(_))));
        let mut bad = CMatrix::identity(2, 2);
        bad[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(det_lu(&bad), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn det_of_product_is_product_of_dets() {
        let shift = CMatrix::identity(7, 7) * c(1.5, 0.5);
        let (a, b) = (sample(7, 0.2) + &shift, sample(7, 1.9) + &shift);
        let lhs = det_lu(&matmul(&a, &b)).unwrap();
        let rhs = det_lu(&a).unwrap() * det_lu(&b).unwrap();
        assert!((lhs - rhs).norm() < 1e-12 * rhs.norm(), "{lhs} vs {rhs}");
    }

    struct Zero;
    impl BlockKernel for Zero {
        fn m(&self) -> usize {
            2
        }
        fn domain(&self) -> crate::kernels::Domain {
            crate::kernels::Domain::HalfLine
        }
        fn evaluate(&self, _: usize, _: Complex64, _: usize, _: Complex64) -> Result<Complex64> {
            Ok(c(0.0, 0.0))
        }
    }

    struct RankOne;
    impl BlockKernel for RankOne {
        fn m(&self) -> usize {
            1
        }
        fn domain(&self) -> crate::kernels::Domain {
            crate::kernels::Domain::HalfLine
        }
        fn evaluate(&self, _: usize, s: Complex64, _: usize, t: Complex64) -> Result<Complex64> {
            Ok((-s - t).exp())
        }
    }

    #[test]
    fn trivial_halfline_kernels() {
        let z = fredholm_det_halfline(&Zero, 10.0, 8).unwrap();
        assert_eq!(z.value, c(1.0, 0.0));
        let r = fredholm_det_halfline(&RankOne, 40.0, 64).unwrap();
        assert!((r.value - c(1.5, 0.0)).norm() < 1e-10, "{}", r.value);
        assert_eq!(r.history.len(), 2);
    }

    #[test]
    fn airy_kernel_gives_tracy_widom() {
        let cfg = PointConfig::single(0.0, 0.0).unwrap();
        let s = Settings::default();
        let ext = Negated(ExtAiryKernel::new(&cfg, &s));
        let r = fredholm_det_halfline(&ext, s.lambda_max, s.nystrom_nodes).unwrap();
        assert!((r.value.re - 0.96937282835526).abs() < 1e-9, "{}", r.value);
        assert!((r.value.re - f_gue(0.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn newton_identities_match_minor_sums() {
        let m = sample(6, 0.7);
        let sums = series_partial_sums(&m, 6).unwrap();
        let mut brute = c(0.0, 0.0);
        for k in 0..=6 {
            brute += if k == 0 { c(1.0, 0.0) } else { principal_minor_sum(&m, k).unwrap() };
            assert!((sums[k] - brute).norm() < 1e-12, "k={k}");
        }
        let full = det_lu(&(CMatrix::identity(6, 6) + &m)).unwrap();
        assert!((sums[6] - full).norm() < 1e-12);
        assert!(matches!(series_partial_sums(&m, 7), Err(Error::CostGuard(_))));
    }

    #[test]
    fn series_order_zero_is_one() {
        let cfg = PointConfig::single(0.0, 0.0).unwrap();
        let r = fredholm_det_contour_series(&cfg, &Settings::default(), 0).unwrap();
        assert_eq!(r.value, c(1.0, 0.0));
        assert!(matches!(
            fredholm_det_contour_series(&cfg, &Settings::default(), 7),
            Err(Error::CostGuard(_))
        ));
    }

    #[test]
    fn contour_determinant_gives_tracy_widom() {
        for s in [-2.0, 0.0, 1.0] {
            let cfg = PointConfig::single(0.0, s).unwrap();
            let r = fredholm_det_contour_nystrom(&cfg, &Settings::default()).unwrap();
            assert!((r.value - c(f_gue(s).unwrap(), 0.0)).norm() < 1e-7, "{s}: {} vs {:?}", r.value, f_gue(s));
        }
    }

    #[test]
    fn two_point_pipelines_agree() {
        let s = Settings::default();
        for (gap, beta) in [(0.5, -1.0), (1.0, 0.0), (2.0, -1.0)] {
            let cfg = PointConfig::new(vec![0.0, gap], vec![beta, beta]).unwrap();
            let ext = fredholm_det_halfline(&Negated(ExtAiryKernel::new(&cfg, &s)), s.lambda_max, s.nystrom_nodes).unwrap();
            let bma = fredholm_det_halfline(&BMinusAKernel::new(&cfg, &s), s.lambda_max, s.nystrom_nodes).unwrap();
            let k = fredholm_det_contour_nystrom(&cfg, &s).unwrap();
            let l = fredholm_det_l(&cfg, &s).unwrap();
            assert!((ext.value - bma.value).norm() < 1e-6);
            assert!((k.value - bma.value).norm() < 1e-6);
            assert!((l.value - bma.value).norm() < 1e-6);
        }
    }

    struct Conjugated<K>(K);
    impl<K: BlockKernel> BlockKernel for Conjugated<K> {
        fn m(&self) -> usize {
            self.0.m()
        }
        fn domain(&self) -> crate::kernels::Domain {
            self.0.domain()
        }
        fn evaluate(&self, i: usize, s: Complex64, j: usize, t: Complex64) -> Result<Complex64> {
            Ok(self.0.evaluate(i, s, j, t)? * (s / 2.0).exp() / (t / 2.0).exp())
        }
    }

    #[test]
    fn conjugation_leaves_determinant_unchanged() {
        let s = Settings { nystrom_nodes: 32, ..Settings::default() };
        let cfg = PointConfig::new(vec![0.0, 1.0], vec![-1.0, 0.0]).unwrap();
        let plain = fredholm_det_halfline(&BMinusAKernel::new(&cfg, &s), s.lambda_max, s.nystrom_nodes).unwrap();
        let conj = fredholm_det_halfline(&Conjugated(BMinusAKernel::new(&cfg, &s)), s.lambda_max, s.nystrom_nodes).unwrap();
        assert!((plain.value - conj.value).norm() < 1e-10);
    }

    #[test]
    fn upper_triangular_factorization() {
        let s = Settings::default();
        for cfg in [
            PointConfig::new(vec![0.0, 1.0], vec![-1.0, 0.0]).unwrap(),
            PointConfig::new(vec![-0.5, 0.0, 0.8], vec![0.0, -0.5, 0.5]).unwrap(),
        ] {
            let (direct, factored) = upper_factorization_pair(&cfg, &s, 48).unwrap();
            assert!((direct - factored).norm() < 1e-9, "{direct} vs {factored}");
        }
    }

    #[test]
    fn contour_series_converges_to_nystrom() {
        let cfg = PointConfig::single(0.0, 0.0).unwrap();
        let s = Settings::default();
        let series = fredholm_det_contour_series(&cfg, &s, 6).unwrap();
        let nystrom = fredholm_det_contour_nystrom(&cfg, &s).unwrap();
        assert_eq!(series.history.len(), 7);
        assert_eq!(series.history[0].1, c(1.0, 0.0));
        assert!((series.value - nystrom.value).norm() < 1e-6);
        let steps: Vec<f64> = series.history.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
        for k in 2..steps.len() {
            assert!(steps[k] < steps[k - 1], "{steps:?}");
        }
    }

    #[test]
    fn reduced_contour_determinant() {
        // the column blocks repeat, so det(I + [P_i]_{ij}) = det(I + Σ_i P_i)
        let cfg = PointConfig::new(vec![0.0, 1.0], vec![0.0, -0.5]).unwrap();
        let kernel = ContourKernel::new(&cfg, &Settings::default()).unwrap();
        let full = contour_matrix(&kernel).unwrap();
        let n = full.nrows() / 2;
        let reduced = full.view((0, 0), (n, n)) + full.view((n, 0), (n, n));
        let a = det_lu(&(CMatrix::identity(2 * n, 2 * n) + &full)).unwrap();
        let b = det_lu(&(CMatrix::identity(n, n) + reduced)).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn far_threshold_gives_the_marginal() {
        let s = Settings::default();
        let cfg = PointConfig::new(vec![0.0, 1.0], vec![-1.0, 8.0]).unwrap();
        let joint = fredholm_det_contour_nystrom(&cfg, &s).unwrap().value.re;
        assert!((joint - f_gue(-1.0).unwrap()).abs() < 1e-5, "{joint}");
        let cfg = PointConfig::new(vec![0.0, 1.0], vec![8.0, -1.0]).unwrap();
        let joint = fredholm_det_contour_nystrom(&cfg, &s).unwrap().value.re;
        assert!((joint - f_gue(0.0).unwrap()).abs() < 1e-5, "{joint}");
    }
}
