//! Brute-force checks of the algebraic identities behind the sum formula:
//! the block form of Andreief's identity, the antisymmetrization rules used
//! to simplify the multi-fold integrals, and the Gaussian–Airy integral.
//!
//! Andreief and antisymmetry are measure-agnostic, so they are checked on
//! atomic measures by full enumeration, in exact integer arithmetic where
//! the inputs allow it.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::airy;
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

/// Largest `n` accepted by the enumerations (`|atoms|ⁿ` assignments).
pub const MAX_ANDREIEF_N: usize = 7;
pub const MAX_ANTISYMMETRY_N: usize = 5;

/// Atoms with positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{} atoms with {} weights",
                atoms.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidArgument("measure weights must be positive".into()));
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    /// Unit weights on `atoms`.
    pub fn counting(atoms: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; atoms.len()];
        Self::new(atoms, w)
    }

    pub fn atoms(&self) -> &[f64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

/// Disjoint blocks covering `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
    block_of: Vec<usize>,
}

impl BlockPartition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut block_of = vec![usize::MAX; n];
        for (k, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            for &i in b {
                if i >= n || block_of[i] != usize::MAX {
                    return Err(Error::InvalidArgument(format!("index {i} is out of range or repeated")));
                }
                block_of[i] = k;
            }
        }
        if block_of.contains(&usize::MAX) {
            return Err(Error::InvalidArgument("blocks do not cover every index".into()));
        }
        Ok(BlockPartition { n, blocks, block_of })
    }

    /// One block holding everything: the classical identity.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(n, vec![(0..n).collect()])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// 1 when `i` and `j` share a block.
    pub fn phi(&self, i: usize, j: usize) -> bool {
        self.block_of[i] == self.block_of[j]
    }

    /// `∏ |I_k|!`.
    pub fn symmetry_factor(&self) -> u64 {
        self.blocks.iter().map(|b| (1..=b.len() as u64).product::<u64>()).product()
    }
}

/// Both sides of the identity; the right side in its masked and block-product forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AndreiefPair {
    pub lhs: f64,
    pub rhs_masked: f64,
    pub rhs_blocks: f64,
    /// `Σ |term|` of the enumerated right side plus the Hadamard bound of the
    /// left side: the scale for rounding errors.
    pub term_magnitude: f64,
}

/// Exact version: the right sides are `numerator / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactAndreiefPair {
    pub lhs: i128,
    pub rhs_masked_numerator: i128,
    pub rhs_blocks_numerator: i128,
    pub denominator: i128,
}

impl ExactAndreiefPair {
    pub fn holds(&self) -> bool {
        self.rhs_masked_numerator == self.rhs_blocks_numerator && self.lhs * self.denominator == self.rhs_masked_numerator
    }
}

/// Determinant by fraction-free elimination.
pub fn det_exact(m: &[Vec<i128>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

fn det_float(rows: usize, f: impl Fn(usize, usize) -> f64) -> f64 {
    if rows == 0 {
        return 1.0;
    }
    DMatrix::from_fn(rows, rows, f).determinant()
}

fn check_tables<T>(p: &BlockPartition, a: &[Vec<T>], b: &[Vec<T>], atoms: usize) -> Result<()> {
    let n = p.n();
    if n > MAX_ANDREIEF_N {
        return Err(Error::CostGuard(format!("n = {n} exceeds {MAX_ANDREIEF_N}")));
    }
    if a.len() != n || b.len() != n || a.iter().chain(b).any(|row| row.len() != atoms) {
        return Err(Error::DimensionMismatch(format!("need {n} functions tabulated on {atoms} atoms")));
    }
    Ok(())
}

/// Calls `f` with every assignment `x ∈ {0..atoms}ⁿ`.
fn for_each_assignment(n: usize, atoms: usize, mut f: impl FnMut(&[usize])) {
    let mut x = vec![0usize; n];
    loop {
        f(&x);
        let mut d = 0;
        loop {
            if d == n {
                return;
            }
            x[d] += 1;
            if x[d] < atoms {
                break;
            }
            x[d] = 0;
            d += 1;
        }
    }
}

fn has_repeats(x: &[usize]) -> bool {
    (0..x.len()).any(|i| x[i + 1..].contains(&x[i]))
}

/// Both sides of the block Andreief identity for functions tabulated on the
/// atoms of `mu` (`a[i][x] = Aᵢ(atom x)`).
pub fn andreief_pair(p: &BlockPartition, a: &[Vec<f64>], b: &[Vec<f64>], mu: &DiscreteMeasure) -> Result<AndreiefPair> {
    let n = p.n();
    let atoms = mu.len();
    check_tables(p, a, b, atoms)?;
    let w = mu.weights();
    let gram = DMatrix::from_fn(n, n, |i, j| (0..atoms).map(|x| a[i][x] * b[j][x] * w[x]).sum::<f64>());
    let lhs = if n == 0 { 1.0 } else { gram.determinant() };
    // Hadamard's bound, the scale of rounding errors on the left side
    let hadamard: f64 = gram.row_iter().map(|r| r.norm()).product();
    let mut masked = 0.0;
    let mut blocks = 0.0;
    let mut magnitude = hadamard;
    for_each_assignment(n, atoms, |x| {
        if has_repeats(x) {
            // equal columns: det[Aᵢ(xⱼ)] vanishes
            return;
        }
        let weight: f64 = x.iter().map(|&k| w[k]).product();
        let da = det_float(n, |i, j| a[i][x[j]]);
        let dm = det_float(n, |i, j| if p.phi(i, j) { b[i][x[j]] } else { 0.0 });
        let db: f64 = p.blocks().iter().map(|blk| det_float(blk.len(), |r, c| b[blk[r]][x[blk[c]]])).product();
        masked += weight * da * dm;
        blocks += weight * da * db;
        magnitude += (weight * da * db).abs();
    });
    let f = p.symmetry_factor() as f64;
    Ok(AndreiefPair { lhs, rhs_masked: masked / f, rhs_blocks: blocks / f, term_magnitude: magnitude / f })
}

/// Exact version for integer tables and integer weights.
pub fn andreief_pair_exact(p: &BlockPartition, a: &[Vec<i64>], b: &[Vec<i64>], weights: &[i64]) -> Result<ExactAndreiefPair> {
    let n = p.n();
    let atoms = weights.len();
    check_tables(p, a, b, atoms)?;
    if atoms == 0 || weights.iter().any(|&w| w <= 0) {
        return Err(Error::InvalidArgument("measure weights must be positive".into()));
    }
    let a: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let b: Vec<Vec<i128>> = b.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect();
    let w: Vec<i128> = weights.iter().map(|&v| v as i128).collect();
    let gram: Vec<Vec<i128>> =
        (0..n).map(|i| (0..n).map(|j| (0..atoms).map(|x| a[i][x] * b[j][x] * w[x]).sum()).collect()).collect();
    let lhs = det_exact(&gram);
    let mut masked = 0i128;
    let mut blocks = 0i128;
    for_each_assignment(n, atoms, |x| {
        if has_repeats(x) {
            return;
        }
        let weight: i128 = x.iter().map(|&k| w[k]).product();
        let ma: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| a[i][x[j]]).collect()).collect();
        let mm: Vec<Vec<i128>> =
            (0..n).map(|i| (0..n).map(|j| if p.phi(i, j) { b[i][x[j]] } else { 0 }).collect()).collect();
        let da = det_exact(&ma);
        let db: i128 = p
            .blocks()
            .iter()
            .map(|blk| det_exact(&blk.iter().map(|&r| blk.iter().map(|&c| b[r][x[c]]).collect()).collect::<Vec<_>>()))
            .product();
        masked += weight * da * det_exact(&mm);
        blocks += weight * da * db;
    });
    Ok(ExactAndreiefPair {
        lhs,
        rhs_masked_numerator: masked,
        rhs_blocks_numerator: blocks,
        denominator: p.symmetry_factor() as i128,
    })
}

/// A random instance: `n ≤ 6`, at most 3 blocks, at most 4 atoms, small integer data.
#[derive(Debug, Clone, PartialEq)]
pub struct AndreiefInstance {
    pub partition: BlockPartition,
    pub atoms: Vec<i64>,
    pub weights: Vec<i64>,
    pub a: Vec<Vec<i64>>,
    pub b: Vec<Vec<i64>>,
}

impl AndreiefInstance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..=6);
        let q = rng.gen_range(1..=3.min(n));
        // every block gets one index, the rest land anywhere
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.gen_range(0..=i));
        }
        let mut blocks = vec![Vec::new(); q];
        for (pos, &i) in order.iter().enumerate() {
            let k = if pos < q { pos } else { rng.gen_range(0..q) };
            blocks[k].push(i);
        }
        let partition = BlockPartition::new(n, blocks).expect("generated partition is valid");
        let count = rng.gen_range(1..=4);
        let mut atoms: Vec<i64> = (-3..=3).collect();
        for i in (1..atoms.len()).rev() {
            atoms.swap(i, rng.gen_range(0..=i));
        }
        atoms.truncate(count);
        let weights = (0..count).map(|_| rng.gen_range(1..=3)).collect();
        let mut table = || -> Vec<Vec<i64>> {
            (0..n).map(|_| (0..count).map(|_| rng.gen_range(-3..=3)).collect()).collect()
        };
        let a = table();
        let b = table();
        AndreiefInstance { partition, atoms, weights, a, b }
    }

    pub fn measure(&self) -> DiscreteMeasure {
        DiscreteMeasure::new(
            self.atoms.iter().map(|&x| x as f64).collect(),
            self.weights.iter().map(|&w| w as f64).collect(),
        )
        .expect("generated measure is valid")
    }

    fn float_tables(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let conv = |t: &Vec<Vec<i64>>| t.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
        (conv(&self.a), conv(&self.b))
    }
}

/// Outcome of a seeded sweep over random instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AndreiefSweep {
    pub instances: usize,
    pub exact_failures: Vec<u64>,
    /// Largest `|lhs − rhs|` over both float forms, relative to the sum of
    /// the absolute values of the enumerated terms.
    pub max_float_error: f64,
}

impl AndreiefSweep {
    pub fn passed(&self, float_tol: f64) -> bool {
        self.exact_failures.is_empty() && self.max_float_error <= float_tol
    }
}

/// Checks instances with seeds `seed, seed+1, …`.
pub fn andreief_sweep(instances: usize, seed: u64) -> Result<AndreiefSweep> {
    let results: Vec<(u64, bool, f64)> = (0..instances as u64)
        .into_par_iter()
        .map(|k| {
            let s = seed + k;
            let inst = AndreiefInstance::random(s);
            let exact = andreief_pair_exact(&inst.partition, &inst.a, &inst.b, &inst.weights)?;
            let (a, b) = inst.float_tables();
            let fl = andreief_pair(&inst.partition, &a, &b, &inst.measure())?;
            let scale = fl.term_magnitude.max(f64::MIN_POSITIVE);
            let err = (fl.lhs - fl.rhs_masked).abs().max((fl.lhs - fl.rhs_blocks).abs()) / scale;
            Ok((s, exact.holds(), err))
        })
        .collect::<Result<_>>()?;
    Ok(AndreiefSweep {
        instances,
        exact_failures: results.iter().filter(|r| !r.1).map(|r| r.0).collect(),
        max_float_error: results.iter().map(|r| r.2).fold(0.0, f64::max),
    })
}

/// Integer polynomial, coefficients in increasing degree.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Poly(Vec<i128>);

impl Poly {
    fn random(rng: &mut ChaCha8Rng, degree: usize) -> Self {
        Poly((0..=degree).map(|_| rng.gen_range(-2..=2)).collect())
    }

    fn eval(&self, x: i128) -> i128 {
        self.0.iter().rev().fold(0, |acc, &c| acc * x + c)
    }
}

/// Results of the antisymmetrization checks; all integers are exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntisymmetryReport {
    pub n: usize,
    pub k: usize,
    /// `∫ F det[pᵢ(wⱼ)]` and `n! ∫ F ∏ pᵢ(wᵢ)`.
    pub expansion: (i128, i128),
    /// `G(w′)` and `G` after swapping `w′_j, w′_{j+1}`, for each adjacent pair.
    pub swaps: Vec<(i128, i128)>,
}

impl AntisymmetryReport {
    pub fn passed(&self) -> bool {
        self.expansion.0 == self.expansion.1 && self.swaps.iter().all(|&(g, h)| g == -h)
    }
}

/// Checks, over the integer atoms with unit weights, that a determinant
/// against an antisymmetric `F` may be replaced by `n!` times its diagonal,
/// and that contracting `F` against `∏ q(wⱼ, w′ⱼ)` is antisymmetric in `w′`.
///
/// `F(w) = ∏_{a<b}(w_b − w_a) ∏ g(wᵢ)`, with `g`, `pᵢ` and `q` random
/// low-degree integer polynomials drawn from `seed`.
pub fn antisymmetry_check(n: usize, k: usize, atoms: &[i64], seed: u64) -> Result<AntisymmetryReport> {
    if n > MAX_ANTISYMMETRY_N {
        return Err(Error::CostGuard(format!("n = {n} exceeds {MAX_ANTISYMMETRY_N}")));
    }
    if k > n || n == 0 || atoms.is_empty() {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n, k ≤ n and atoms, got n = {n}, k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Poly::random(&mut rng, 1);
    let p: Vec<Poly> = (0..n).map(|_| Poly::random(&mut rng, 2)).collect();
    // q(w, w′) = Σ c_{ab} wᵃ w′ᵇ
    let qc: Vec<Vec<i128>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-2..=2)).collect()).collect();
    let q = |w: i128, wp: i128| -> i128 {
        let mut s = 0;
        for (a, row) in qc.iter().enumerate() {
            for (b, &c) in row.iter().enumerate() {
                s += c * w.pow(a as u32) * wp.pow(b as u32);
            }
        }
        s
    };
    let wprime: Vec<i128> = (0..k).map(|j| 10 + 3 * j as i128 + rng.gen_range(0..3)).collect();
    let pts: Vec<i128> = atoms.iter().map(|&x| x as i128).collect();
    let f = |w: &[i128]| -> i128 {
        let mut v: i128 = w.iter().map(|&x| g.eval(x)).product();
        for a in 0..w.len() {
            for b in a + 1..w.len() {
                v *= w[b] - w[a];
            }
        }
        v
    };
    let nfact: i128 = (1..=n as i128).product();
    let (mut lhs, mut diag) = (0i128, 0i128);
    let contraction = |wp: &[i128]| -> i128 {
        let mut s = 0;
        for_each_assignment(n, pts.len(), |x| {
            let w: Vec<i128> = x.iter().map(|&i| pts[i]).collect();
            s += f(&w) * (0..k).map(|j| q(w[j], wp[j])).product::<i128>();
        });
        s
    };
    let swaps = (0..k.saturating_sub(1))
        .map(|j| {
            let mut swapped = wprime.clone();
            swapped.swap(j, j + 1);
            (contraction(&wprime), contraction(&swapped))
        })
        .collect();
    for_each_assignment(n, pts.len(), |x| {
        let w: Vec<i128> = x.iter().map(|&i| pts[i]).collect();
        let fw = f(&w);
        let m: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| p[i].eval(w[j])).collect()).collect();
        lhs += fw * det_exact(&m);
        diag += fw * (0..n).map(|i| p[i].eval(w[i])).product::<i128>();
    });
    Ok(AntisymmetryReport { n, k, expansion: (lhs, nfact * diag), swaps })
}

/// `e^{x³/12 − (a+b)x/2 − (a−b)²/(4x)} / (2√(πx))`.
pub fn gaussian_airy_closed_form(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::InvalidArgument(format!("x must be positive, got {x}")));
    }
    let e = x.powi(3) / 12.0 - (a + b) * x / 2.0 - (a - b).powi(2) / (4.0 * x);
    Ok(e.exp() / (2.0 * (std::f64::consts::PI * x).sqrt()))
}

/// Left end of the window: where `e^{xz} |z|^{−1/2}` drops below `1e−18`.
fn left_end(x: f64, a: f64, b: f64) -> f64 {
    let shift = a.max(b);
    let mut z = -1.0;
    while (x * z).exp() / (-z).sqrt() >= 1e-18 {
        z -= 0.5;
    }
    z - shift.max(0.0)
}

/// Right end: where `e^{xz}` times the Airy decay of both factors is below `1e−20`.
fn right_end(x: f64, a: f64, b: f64) -> f64 {
    let lo = a.min(b);
    let mut z = 1.0_f64.max(-lo);
    loop {
        let s = z + lo;
        if s > 0.0 && x * z - 4.0 / 3.0 * s.powf(1.5) < -46.0 {
            return z;
        }
        z += 0.5;
    }
}

/// `∫_ℝ e^{xz} Ai(z+a) Ai(z+b) dz` on `[left, right]` by composite Gauss–Legendre.
pub fn gaussian_airy_integral_on(x: f64, a: f64, b: f64, left: f64, right: f64) -> f64 {
    let panels = ((right - left) / 0.5).ceil() as usize;
    let rule = GaussLegendre::composite(left, right, panels, 20);
    rule.integrate(|z| (x * z).exp() * airy(z + a).ai * airy(z + b).ai)
}

/// Quadrature value and closed form of the Gaussian–Airy identity.
pub fn okounkov_pair(x: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let closed = gaussian_airy_closed_form(x, a, b)?;
    let integral = gaussian_airy_integral_on(x, a, b, left_end(x, a, b), right_end(x, a, b));
    Ok((integral, closed))
}
