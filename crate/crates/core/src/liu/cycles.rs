//! Multi-fold contour integrals of products of determinants.
//!
//! Every integrand handled here is a product of determinants in which each
//! integration variable occurs exactly once as a row and once as a column.
//! Expanding all determinants, each term pairs every variable with the next
//! one, so the integral of a term factors into traces of matrix products
//! around the cycles of that pairing. Traces depend only on the sequence of
//! (contour, weight, edge kind) labels and are cached.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernels::{h_matrix, ContourFamily, ContourRole, PointConfig};
use crate::linalg::{cauchy_matrix, matmul, scale_rows, trace_of_product, CMatrix};

/// Weight multiplying the quadrature weight of a variable; indices 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum Weight {
    /// `Fᵢ(w)`
    BigF(usize),
    /// `1/Fᵢ(w)`
    InvBigF(usize),
    /// `1/fᵢ(w)`
    InvF(usize),
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct VarClass {
    pub role: ContourRole,
    pub weight: Weight,
}

/// Entry function of a determinant: `1/(row − col)` or `hᵢ(row, col)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum EdgeKind {
    Cauchy,
    H(usize),
}

/// `det[E(rows[a], cols[b])]` over variable ids.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub kind: EdgeKind,
}

impl Factor {
    pub fn cauchy(rows: Vec<usize>, cols: Vec<usize>) -> Self {
        Factor { rows, cols, kind: EdgeKind::Cauchy }
    }
}

/// `∫ ∏_f det(factor f) ∏_x w(x) dx/(2πi)` with variable `x` on `classes[x]`.
#[derive(Debug, Clone, Default)]
pub(crate) struct ProductIntegral {
    pub classes: Vec<VarClass>,
    pub factors: Vec<Factor>,
}

impl ProductIntegral {
    pub fn add_vars(&mut self, class: VarClass, count: usize) -> Vec<usize> {
        let start = self.classes.len();
        self.classes.extend(std::iter::repeat(class).take(count));
        (start..start + count).collect()
    }

    /// Every variable must be a row exactly once and a column exactly once.
    fn row_pairing(&self) -> Result<Vec<(usize, usize, usize)>> {
        let n = self.classes.len();
        let mut as_row = vec![None; n];
        let mut as_col = vec![0usize; n];
        for (fi, f) in self.factors.iter().enumerate() {
            if f.rows.len() != f.cols.len() {
                return Err(Error::DimensionMismatch(format!(
                    "determinant with {} rows and {} columns",
                    f.rows.len(),
                    f.cols.len()
                )));
            }
            for (a, &r) in f.rows.iter().enumerate() {
                if as_row[r].replace((fi, a, 0)).is_some() {
                    return Err(Error::InvalidArgument(format!("variable {r} is a row twice")));
                }
            }
            for &c in &f.cols {
                as_col[c] += 1;
            }
        }
        if as_col.iter().any(|&k| k != 1) || as_row.iter().any(Option::is_none) {
            return Err(Error::InvalidArgument("every variable must be one row and one column".into()));
        }
        Ok(as_row.into_iter().map(|x| x.unwrap()).collect())
    }
}

/// All permutations of `0..n` with their signs.
pub(crate) fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn go(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, f64)>) {
        let n = used.len();
        if prefix.len() == n {
            // sign from the inversion count
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if prefix[i] > prefix[j] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1.0 } else { -1.0 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

type CycleKey = Vec<(VarClass, EdgeKind)>;

fn canonical_rotation(seq: &[(VarClass, EdgeKind)]) -> CycleKey {
    (0..seq.len())
        .map(|s| seq[s..].iter().chain(&seq[..s]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// Evaluates product integrals on one contour family, caching step matrices
/// and cycle traces across calls.
pub(crate) struct CycleEvaluator<'a> {
    cfg: &'a PointConfig,
    fam: &'a ContourFamily,
    h: HashMap<usize, CMatrix>,
    weights: HashMap<VarClass, Vec<Complex64>>,
    steps: HashMap<(VarClass, EdgeKind, VarClass), CMatrix>,
    traces: HashMap<CycleKey, Complex64>,
}

impl<'a> CycleEvaluator<'a> {
    pub fn new(cfg: &'a PointConfig, fam: &'a ContourFamily) -> Self {
        CycleEvaluator {
            cfg,
            fam,
            h: HashMap::new(),
            weights: HashMap::new(),
            steps: HashMap::new(),
            traces: HashMap::new(),
        }
    }

    fn class_weights(&mut self, c: VarClass) -> Result<&Vec<Complex64>> {
        if !self.weights.contains_key(&c) {
            let contour = self.fam.get(c.role)?;
            let cfg = self.cfg;
            let w: Vec<Complex64> = contour
                .points
                .iter()
                .zip(&contour.weights)
                .map(|(&p, &w)| {
                    w * match c.weight {
                        Weight::BigF(i) => cfg.log_big_f(i, p).exp(),
                        Weight::InvBigF(i) => (-cfg.log_big_f(i, p)).exp(),
                        Weight::InvF(i) => (-cfg.log_f(i, p)).exp(),
                        Weight::One => Complex64::new(1.0, 0.0),
                    }
                })
                .collect();
            self.weights.insert(c, w);
        }
        Ok(&self.weights[&c])
    }

    fn step(&mut self, from: VarClass, kind: EdgeKind, to: VarClass) -> Result<CMatrix> {
        let key = (from, kind, to);
        if let Some(s) = self.steps.get(&key) {
            return Ok(s.clone());
        }
        let edge = match kind {
            EdgeKind::Cauchy => {
                if from.role == to.role {
                    return Err(Error::InvalidArgument("Cauchy entry between variables on one contour".into()));
                }
                cauchy_matrix(&self.fam.get(from.role)?.points, &self.fam.get(to.role)?.points)
            }
            EdgeKind::H(i) => {
                if from.role != ContourRole::LeftMain || to.role != ContourRole::RightMain {
                    return Err(Error::ContourOrdering("h entries need left-main rows and right-main columns".into()));
                }
                if !self.h.contains_key(&i) {
                    let left = &self.fam.left_main().points;
                    let right = &self.fam.right_main().points;
                    self.h.insert(i, h_matrix(self.cfg, self.fam, i + 1, left, right)?);
                }
                self.h[&i].clone()
            }
        };
        let d = self.class_weights(from)?.clone();
        let s = scale_rows(&d, edge);
        self.steps.insert(key, s.clone());
        Ok(s)
    }

    fn cycle_trace(&mut self, seq: &[(VarClass, EdgeKind)]) -> Result<Complex64> {
        let key = canonical_rotation(seq);
        if let Some(&t) = self.traces.get(&key) {
            return Ok(t);
        }
        let len = key.len();
        let mut mats = Vec::with_capacity(len);
        for k in 0..len {
            let (from, kind) = key[k];
            let to = key[(k + 1) % len].0;
            mats.push(self.step(from, kind, to)?);
        }
        let t = if len == 1 {
            mats[0].trace()
        } else {
            let mut acc = mats[0].clone();
            for m in &mats[1..len - 1] {
                acc = matmul(&acc, m);
            }
            trace_of_product(&acc, &mats[len - 1])
        };
        self.traces.insert(key, t);
        Ok(t)
    }

    /// Value of the product integral.
    pub fn evaluate(&mut self, integral: &ProductIntegral) -> Result<Complex64> {
        let n = integral.classes.len();
        if n == 0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let rows = integral.row_pairing()?;
        let perms: Vec<Vec<(Vec<usize>, f64)>> =
            integral.factors.iter().map(|f| signed_permutations(f.rows.len())).collect();
        let mut total = Complex64::new(0.0, 0.0);
        let mut choice = vec![0usize; perms.len()];
        let mut partner = vec![0usize; n];
        loop {
            let mut sign = 1.0;
            for (fi, f) in integral.factors.iter().enumerate() {
                let (p, s) = &perms[fi][choice[fi]];
                sign *= s;
                for (a, &r) in f.rows.iter().enumerate() {
                    partner[r] = f.cols[p[a]];
                }
            }
            let mut seen = vec![false; n];
            let mut term = Complex64::new(sign, 0.0);
            for start in 0..n {
                if seen[start] {
                    continue;
                }
                let mut seq = Vec::new();
                let mut x = start;
                while !seen[x] {
                    seen[x] = true;
                    let kind = integral.factors[rows[x].0].kind;
                    seq.push((integral.classes[x], kind));
                    x = partner[x];
                }
                term *= self.cycle_trace(&seq)?;
            }
            total += term;
            // next tuple of permutations
            let mut k = 0;
            loop {
                if k == choice.len() {
                    if !(total.re.is_finite() && total.im.is_finite()) {
                        return Err(Error::NonFinite { node: Complex64::new(0.0, 0.0), value: total });
                    }
                    return Ok(total);
                }
                choice[k] += 1;
                if choice[k] < perms[k].len() {
                    break;
                }
                choice[k] = 0;
                k += 1;
            }
        }
    }
}
