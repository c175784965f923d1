//! The nested family of left and right contours used by the contour-side
//! kernels and the multi-fold integrals.
//!
//! Left contours open to the left with vertices, from left to right,
//! `in_m, …, in_2, main, out_2, …, out_m`, all in the left half-plane.
//! Right contours open to the right with vertices, from right to left,
//! `in_m, …, in_2, main, out_2, …, out_m`, all in the right half-plane.
//! Every contour is a translate of the main one on its side, so truncated
//! rays never cross.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{build_ray_pair, ray_cutoff, ContourSpec, QuadratureContour};
use crate::settings::Settings;

use super::PointConfig;

/// Vertex positions of the family on the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourLayout {
    pub left_main: f64,
    /// Spacing of the inner left contours, leftwards from the main one.
    pub left_in_step: f64,
    /// Distance from the main left vertex to the outermost left vertex.
    pub left_out_span: f64,
    pub right_main: f64,
    pub right_in_step: f64,
    pub right_out_span: f64,
}

impl Default for ContourLayout {
    fn default() -> Self {
        ContourLayout {
            left_main: -0.7,
            left_in_step: 0.75,
            left_out_span: 0.5,
            right_main: 1.5,
            right_in_step: 1.0,
            right_out_span: 1.2,
        }
    }
}

/// Magnitude drop (natural log) at which a ray is truncated.
const CUTOFF_DROP: f64 = 40.0;
const CUTOFF_SCAN: f64 = 60.0;

/// Phase change of the weights allowed across one panel.
const PHASE_PER_PANEL: f64 = 6.0;

/// Panel breakpoints on `[0, truncation]`: panels are at most `panel_length`
/// long and shorter where the weights oscillate, so that the phase of each
/// weight turns by at most `PHASE_PER_PANEL` across a panel.
fn graded_breaks(
    vertex: Complex64,
    angle: f64,
    truncation: f64,
    panel_length: f64,
    logs: &dyn Fn(Complex64) -> Vec<Complex64>,
) -> Vec<f64> {
    let dir = Complex64::from_polar(1.0, angle);
    let steps = ((truncation / 0.01).ceil() as usize).max(1);
    let dr = truncation / steps as f64;
    let mut breaks = vec![0.0];
    let mut cost = 0.0;
    let mut prev = logs(vertex);
    for k in 1..=steps {
        let r = k as f64 * dr;
        let cur = logs(vertex + dir * r);
        let turn = cur.iter().zip(&prev).map(|(a, b)| (a.im - b.im).abs()).fold(0.0, f64::max);
        cost += dr / panel_length + turn / PHASE_PER_PANEL;
        prev = cur;
        if cost >= 1.0 {
            breaks.push(r);
            cost = 0.0;
        }
    }
    if *breaks.last().unwrap() < truncation {
        if cost < 0.25 && breaks.len() > 1 {
            breaks.pop();
        }
        breaks.push(truncation);
    }
    breaks
}

/// Which contour of the family. Indices are 1-based point indices `2..=m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContourRole {
    LeftMain,
    LeftIn(usize),
    LeftOut(usize),
    RightMain,
    RightIn(usize),
    RightOut(usize),
}

impl ContourRole {
    pub fn is_left(self) -> bool {
        matches!(self, ContourRole::LeftMain | ContourRole::LeftIn(_) | ContourRole::LeftOut(_))
    }
}

#[derive(Debug, Clone)]
pub struct ContourFamily {
    m: usize,
    left_main: QuadratureContour,
    right_main: QuadratureContour,
    left_in: Vec<QuadratureContour>,
    left_out: Vec<QuadratureContour>,
    /// Right contours of index `≥ 2` carry Gaussian weights and exist only
    /// when the right angle is below `π/4`; otherwise the build error is kept.
    right_in: Vec<Result<QuadratureContour>>,
    right_out: Vec<Result<QuadratureContour>>,
}

fn vertex(l: &ContourLayout, role: ContourRole, m: usize) -> f64 {
    let frac = |i: usize| if m > 1 { (i - 1) as f64 / (m - 1) as f64 } else { 0.0 };
    match role {
        ContourRole::LeftMain => l.left_main,
        ContourRole::LeftIn(i) => l.left_main - l.left_in_step * (i - 1) as f64,
        ContourRole::LeftOut(i) => l.left_main + l.left_out_span * frac(i),
        ContourRole::RightMain => l.right_main,
        ContourRole::RightIn(i) => l.right_main + l.right_in_step * (i - 1) as f64,
        ContourRole::RightOut(i) => l.right_main - l.right_out_span * frac(i),
    }
}

impl ContourFamily {
    /// Builds the family with `nodes_per_panel` Gauss–Legendre nodes on each
    /// panel of length `settings.panel_length`.
    pub fn new(cfg: &PointConfig, settings: &Settings, nodes_per_panel: usize) -> Result<Self> {
        Self::with_layout(cfg, settings, nodes_per_panel, &ContourLayout::default())
    }

    pub fn with_layout(cfg: &PointConfig, settings: &Settings, nodes_per_panel: usize, layout: &ContourLayout) -> Result<Self> {
        settings.validate()?;
        let m = cfg.m();
        let build = |role: ContourRole| -> Result<QuadratureContour> {
            let v = Complex64::new(vertex(layout, role, m), 0.0);
            // the logarithms of the weights a contour carries
            let (angle, logs): (f64, Box<dyn Fn(Complex64) -> Vec<Complex64>>) = match role {
                ContourRole::LeftMain => {
                    (settings.left_angle, Box::new(move |w| (0..m).map(|i| cfg.log_f(i, w)).collect()))
                }
                ContourRole::RightMain => {
                    (settings.right_angle, Box::new(move |w| (0..m).map(|i| -cfg.log_f(i, w)).collect()))
                }
                ContourRole::LeftIn(i) | ContourRole::LeftOut(i) => {
                    (settings.left_angle, Box::new(move |w| vec![cfg.log_big_f(i - 1, w)]))
                }
                ContourRole::RightIn(i) | ContourRole::RightOut(i) => {
                    (settings.right_angle, Box::new(move |w| vec![-cfg.log_big_f(i - 1, w)]))
                }
            };
            let envelope = |w| logs(w).iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
            let cut = ray_cutoff(v, angle, envelope, CUTOFF_DROP, CUTOFF_SCAN);
            if cut >= CUTOFF_SCAN {
                return Err(Error::InvalidContour(format!("weights do not decay along the {role:?} contour")));
            }
            let truncation = cut.max(settings.truncation);
            let breaks = graded_breaks(v, angle, truncation, settings.panel_length, &*logs);
            let spec = ContourSpec::ray_pair(v, angle, truncation, nodes_per_panel).normalized();
            build_ray_pair(&spec, &breaks)
        };
        let family = ContourFamily {
            m,
            left_main: build(ContourRole::LeftMain)?,
            right_main: build(ContourRole::RightMain)?,
            left_in: (2..=m).map(|i| build(ContourRole::LeftIn(i))).collect::<Result<_>>()?,
            left_out: (2..=m).map(|i| build(ContourRole::LeftOut(i))).collect::<Result<_>>()?,
            right_in: (2..=m).map(|i| build(ContourRole::RightIn(i))).collect(),
            right_out: (2..=m).map(|i| build(ContourRole::RightOut(i))).collect(),
        };
        family.check_ordering()?;
        Ok(family)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Contour for `role`; indices must lie in `2..=m`.
    pub fn get(&self, role: ContourRole) -> Result<&QuadratureContour> {
        fn pick(v: &[QuadratureContour], i: usize, m: usize) -> Result<&QuadratureContour> {
            if i < 2 || i > m {
                Err(Error::IndexOutOfRange { index: i, m })
            } else {
                Ok(&v[i - 2])
            }
        }
        fn pick_built(v: &[Result<QuadratureContour>], i: usize, m: usize) -> Result<&QuadratureContour> {
            if i < 2 || i > m {
                Err(Error::IndexOutOfRange { index: i, m })
            } else {
                v[i - 2].as_ref().map_err(Clone::clone)
            }
        }
        match role {
            ContourRole::LeftMain => Ok(&self.left_main),
            ContourRole::RightMain => Ok(&self.right_main),
            ContourRole::LeftIn(i) => pick(&self.left_in, i, self.m),
            ContourRole::LeftOut(i) => pick(&self.left_out, i, self.m),
            ContourRole::RightIn(i) => pick_built(&self.right_in, i, self.m),
            ContourRole::RightOut(i) => pick_built(&self.right_out, i, self.m),
        }
    }

    /// The inner left contour for index `i`, the main one when `i = 1`.
    pub fn left_in(&self, i: usize) -> Result<&QuadratureContour> {
        if i == 1 {
            Ok(&self.left_main)
        } else {
            self.get(ContourRole::LeftIn(i))
        }
    }

    /// The outer right contour for index `i`, the main one when `i = 1`.
    pub fn right_out(&self, i: usize) -> Result<&QuadratureContour> {
        if i == 1 {
            Ok(&self.right_main)
        } else {
            self.get(ContourRole::RightOut(i))
        }
    }

    pub fn left_main(&self) -> &QuadratureContour {
        &self.left_main
    }

    pub fn right_main(&self) -> &QuadratureContour {
        &self.right_main
    }

    /// All roles present in this family.
    pub fn roles(&self) -> Vec<ContourRole> {
        let mut out = vec![ContourRole::LeftMain, ContourRole::RightMain];
        for i in 2..=self.m {
            out.extend([
                ContourRole::LeftIn(i),
                ContourRole::LeftOut(i),
                ContourRole::RightIn(i),
                ContourRole::RightOut(i),
            ]);
        }
        out
    }

    /// Vertices must be strictly ordered, left ones in the open left
    /// half-plane and right ones in the open right half-plane.
    pub fn check_ordering(&self) -> Result<()> {
        let v = |c: &QuadratureContour| c.spec.vertex.re;
        let mut left: Vec<f64> = self.left_in.iter().rev().map(v).collect();
        left.push(v(&self.left_main));
        left.extend(self.left_out.iter().map(v));
        let rv = |r: &Result<QuadratureContour>| r.as_ref().map_or(f64::NAN, v);
        let mut right: Vec<f64> = self.right_out.iter().rev().map(rv).filter(|x| !x.is_nan()).collect();
        right.push(v(&self.right_main));
        right.extend(self.right_in.iter().map(rv).filter(|x| !x.is_nan()));
        let increasing = |xs: &[f64]| xs.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&left) || !increasing(&right) {
            return Err(Error::ContourOrdering("contour vertices are not strictly nested".into()));
        }
        if left.last().is_some_and(|&x| x >= 0.0) || right.first().is_some_and(|&x| x <= 0.0) {
            return Err(Error::ContourOrdering("contours cross the imaginary axis".into()));
        }
        Ok(())
    }

    /// Total number of nodes over all contours.
    pub fn total_nodes(&self) -> usize {
        self.roles().iter().map(|&r| self.get(r).map_or(0, |c| c.len())).sum()
    }
}

/// Whether `p` lies strictly to the left of the contour `c` (which is a
/// translate of a ray pair with vertex on the real axis).
pub(crate) fn left_of(c: &QuadratureContour, p: Complex64) -> bool {
    let spec = &c.spec;
    let rel = p - spec.vertex;
    if rel.norm() == 0.0 {
        return false;
    }
    // upward traversal on either side keeps the negative real axis on the left
    rel.im.atan2(rel.re).abs() > spec.angle
}
