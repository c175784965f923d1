//! Gauss–Legendre rules and discretized complex contours.
//!
//! Every contour integral in the crate goes through [`QuadratureContour`]:
//! a list of nodes and complex weights that already carry the direction
//! factor `dζ/dt` (and optionally the `1/(2πi)` normalization), so an
//! integral is a plain weighted sum.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `2πi`.
pub const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// Gauss–Legendre nodes and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// The `n`-point rule on `[-1, 1]`.
    ///
    /// Roots of `P_n` by Newton iteration from the Tricomi initial guess;
    /// accurate to a few ulps for the sizes used here (n ≤ 1000).
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let theta = PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// The `n`-point rule mapped affinely onto `[a, b]`.
    pub fn on_interval(a: f64, b: f64, n: usize) -> Self {
        let base = Self::new(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GaussLegendre {
            nodes: base.nodes.iter().map(|x| mid + half * x).collect(),
            weights: base.weights.iter().map(|w| half * w).collect(),
        }
    }

    /// `panels` equal panels on `[a, b]`, each carrying an `n`-point rule.
    pub fn composite(a: f64, b: f64, panels: usize, n: usize) -> Self {
        let base = Self::new(n);
        let h = (b - a) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * n);
        let mut weights = Vec::with_capacity(panels * n);
        for p in 0..panels {
            let lo = a + h * p as f64;
            for (x, w) in base.nodes.iter().zip(&base.weights) {
                nodes.push(lo + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContourKind {
    /// Two rays from a common vertex, traversed from the lower ray to the upper ray.
    RayPair,
    /// A segment of the vertical line through the vertex.
    VerticalLine,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    Upward,
    Counterclockwise,
}

/// Parameters of a discretized contour.
///
/// For a ray pair, `angle` is the half-opening angle measured from the
/// positive real axis: rays `vertex + r e^{±i angle}`, `0 ≤ r ≤ truncation`.
/// Angles in `(π/2, π)` open to the left, angles in `(0, π/2)` to the right.
///
/// Rays and vertical lines are cut into `panels` equal segments, each
/// carrying `nodes_per_segment` Gauss–Legendre nodes. Panels keep the rule
/// accurate when another contour runs parallel at a short distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub kind: ContourKind,
    pub vertex: Complex64,
    pub angle: f64,
    pub truncation: f64,
    pub nodes_per_segment: usize,
    pub panels: usize,
    pub orientation: Orientation,
    /// Divide every weight by `2πi`.
    pub normalized: bool,
}

impl ContourSpec {
    pub fn ray_pair(vertex: Complex64, angle: f64, truncation: f64, nodes_per_segment: usize) -> Self {
        ContourSpec {
            kind: ContourKind::RayPair,
            vertex,
            angle,
            truncation,
            nodes_per_segment,
            panels: 1,
            orientation: Orientation::Upward,
            normalized: false,
        }
    }

    pub fn vertical_line(anchor: Complex64, half_height: f64, nodes: usize) -> Self {
        ContourSpec {
            kind: ContourKind::VerticalLine,
            vertex: anchor,
            angle: PI / 2.0,
            truncation: half_height,
            nodes_per_segment: nodes,
            panels: 1,
            orientation: Orientation::Upward,
            normalized: false,
        }
    }

    pub fn circle(center: Complex64, radius: f64, nodes: usize) -> Self {
        ContourSpec {
            kind: ContourKind::Circle,
            vertex: center,
            angle: 0.0,
            truncation: radius,
            nodes_per_segment: nodes,
            panels: 1,
            orientation: Orientation::Counterclockwise,
            normalized: false,
        }
    }

    /// Same contour with weights carrying the `1/(2πi)` factor.
    pub fn normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    /// Same contour split into `panels` segments.
    pub fn with_panels(mut self, panels: usize) -> Self {
        self.panels = panels;
        self
    }

    /// Same contour with twice the nodes per segment.
    pub fn refined(mut self) -> Self {
        self.nodes_per_segment *= 2;
        self
    }

    pub fn opens_left(&self) -> bool {
        self.kind == ContourKind::RayPair && self.angle > PI / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.truncation.is_finite() && self.truncation > 0.0) {
            return Err(Error::InvalidContour(format!(
                "truncation must be positive, got {}",
                self.truncation
            )));
        }
        if self.nodes_per_segment < 2 {
            return Err(Error::InvalidContour(format!(
                "need at least 2 nodes per segment, got {}",
                self.nodes_per_segment
            )));
        }
        if self.panels == 0 {
            return Err(Error::InvalidContour("need at least one panel".into()));
        }
        if !(self.vertex.re.is_finite() && self.vertex.im.is_finite()) {
            return Err(Error::InvalidContour("vertex is not finite".into()));
        }
        if self.kind == ContourKind::RayPair
            && !(self.angle > 0.0 && self.angle < PI && (self.angle - PI / 2.0).abs() > 1e-12)
        {
            return Err(Error::InvalidContour(format!(
                "ray angle {} must lie in (0, π/2) or (π/2, π)",
                self.angle
            )));
        }
        Ok(())
    }
}

/// Nodes and weights of a contour rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureContour {
    pub points: Vec<Complex64>,
    pub weights: Vec<Complex64>,
    pub spec: ContourSpec,
}

/// Discretizes `spec`.
///
/// Ray pairs get a Gauss–Legendre rule on `[0, truncation]` per ray, vertical
/// lines a Gauss–Legendre rule on `[-truncation, truncation]`, circles the
/// equispaced trapezoid rule.
pub fn build_contour(spec: &ContourSpec) -> Result<QuadratureContour> {
    spec.validate()?;
    let n = spec.nodes_per_segment;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match spec.kind {
        ContourKind::RayPair => {
            let rule = GaussLegendre::composite(0.0, spec.truncation, spec.panels, n);
            return Ok(ray_pair_from_rule(spec, &rule));
        }
        ContourKind::VerticalLine => {
            let rule = GaussLegendre::composite(-spec.truncation, spec.truncation, spec.panels, n);
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                points.push(spec.vertex + Complex64::new(0.0, *t));
                weights.push(Complex64::new(0.0, *w));
            }
        }
        ContourKind::Circle => {
            let h = 2.0 * PI / n as f64;
            for k in 0..n {
                let e = Complex64::from_polar(1.0, h * k as f64);
                points.push(spec.vertex + e * spec.truncation);
                weights.push(Complex64::i() * e * spec.truncation * h);
            }
        }
    }
    if spec.normalized {
        for w in &mut weights {
            *w /= TWO_PI_I;
        }
    }
    Ok(QuadratureContour {
        points,
        weights,
        spec: *spec,
    })
}

/// A ray pair whose rays are cut at the arc lengths `breaks`
/// (`0 = breaks[0] < ⋯ < breaks[last] = truncation`), each piece carrying
/// `nodes_per_segment` Gauss–Legendre nodes.
pub fn build_ray_pair(spec: &ContourSpec, breaks: &[f64]) -> Result<QuadratureContour> {
    let mut spec = *spec;
    spec.panels = breaks.len().saturating_sub(1);
    spec.validate()?;
    if spec.kind != ContourKind::RayPair {
        return Err(Error::InvalidContour("breakpoints apply to ray pairs only".into()));
    }
    if breaks.first() != Some(&0.0)
        || (breaks[breaks.len() - 1] - spec.truncation).abs() > 1e-12 * spec.truncation
        || breaks.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::InvalidContour("breakpoints must increase from 0 to the truncation".into()));
    }
    let base = GaussLegendre::new(spec.nodes_per_segment);
    let mut rule = GaussLegendre { nodes: Vec::new(), weights: Vec::new() };
    for w in breaks.windows(2) {
        let h = w[1] - w[0];
        for (x, wt) in base.nodes.iter().zip(&base.weights) {
            rule.nodes.push(w[0] + 0.5 * h * (x + 1.0));
            rule.weights.push(0.5 * h * wt);
        }
    }
    Ok(ray_pair_from_rule(&spec, &rule))
}

fn ray_pair_from_rule(spec: &ContourSpec, rule: &GaussLegendre) -> QuadratureContour {
    let m = rule.len();
    let up = Complex64::from_polar(1.0, spec.angle);
    let down = up.conj();
    let mut points = Vec::with_capacity(2 * m);
    let mut weights = Vec::with_capacity(2 * m);
    // lower ray, traversed inward
    for k in (0..m).rev() {
        points.push(spec.vertex + down * rule.nodes[k]);
        weights.push(-down * rule.weights[k]);
    }
    for k in 0..m {
        points.push(spec.vertex + up * rule.nodes[k]);
        weights.push(up * rule.weights[k]);
    }
    if spec.normalized {
        for w in &mut weights {
            *w /= TWO_PI_I;
        }
    }
    QuadratureContour { points, weights, spec: *spec }
}

impl QuadratureContour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `Σ wₖ f(ζₖ)`; fails on the first non-finite value of `f`.
    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&z, &w) in self.points.iter().zip(&self.weights) {
            let v = f(z);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite { node: z, value: v });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// The same nodes traversed in the opposite direction.
    ///
    /// Node order is kept so sums negate bit for bit.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        for w in &mut out.weights {
            *w = -*w;
        }
        out
    }
}

/// Integral on the refined rule together with `|I(2n) − I(n)|`.
pub fn integrate_with_estimate<F: Fn(Complex64) -> Complex64>(
    spec: &ContourSpec,
    f: F,
) -> Result<(Complex64, f64)> {
    let coarse = build_contour(spec)?.integrate(&f)?;
    let fine = build_contour(&spec.refined())?.integrate(&f)?;
    Ok((fine, (fine - coarse).norm()))
}

/// Arc length along a ray after which `log_mag` stays `drop` below its running maximum.
///
/// Scans `vertex + r e^{i angle}` on a fine grid up to `r_max`. Used to pick
/// truncations for integrands that decay super-exponentially along a ray.
pub fn ray_cutoff<F: Fn(Complex64) -> f64>(
    vertex: Complex64,
    angle: f64,
    log_mag: F,
    drop: f64,
    r_max: f64,
) -> f64 {
    let dir = Complex64::from_polar(1.0, angle);
    let step = 0.05;
    let steps = (r_max / step).ceil() as usize;
    let mut peak = f64::NEG_INFINITY;
    let mut last_significant = 0.0;
    for k in 0..=steps {
        let r = k as f64 * step;
        let v = log_mag(vertex + dir * r);
        if v > peak {
            peak = v;
        }
        if v >= peak - drop {
            last_significant = r;
        }
    }
    last_significant + step
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let rule = GaussLegendre::new(12);
        // degree 23 is exact for 12 nodes
        let v = rule.integrate(|x| x.powi(22) + 3.0 * x.powi(5));
        assert_abs_diff_eq!(v, 2.0 / 23.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights.iter().sum::<f64>(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn large_legendre_rule_is_accurate() {
        let rule = GaussLegendre::on_interval(0.0, 1.0, 400);
        assert_abs_diff_eq!(rule.integrate(|x| (3.0 * x).cos()), (3.0f64).sin() / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn composite_rule_matches_exact_integral() {
        let rule = GaussLegendre::composite(-2.0, 3.0, 7, 10);
        assert_eq!(rule.len(), 70);
        assert_abs_diff_eq!(rule.integrate(f64::exp), 3f64.exp() - (-2f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn residue_on_circle() {
        let qc = build_contour(&ContourSpec::circle(Complex64::new(0.0, 0.0), 0.5, 32).normalized()).unwrap();
        let v = qc.integrate(|z| 1.0 / z).unwrap();
        assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn closed_contour_kills_constants_and_is_exact_on_monomials() {
        let qc = build_contour(&ContourSpec::circle(Complex64::new(0.0, 0.0), 0.7, 16)).unwrap();
        assert!(qc.integrate(|_| Complex64::new(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(qc.integrate(|z| z).unwrap().norm() < 1e-14);
        for k in -7i32..=7 {
            let v = qc.integrate(|z| z.powi(k)).unwrap();
            let expected = if k == -1 { TWO_PI_I } else { Complex64::new(0.0, 0.0) };
            assert!((v - expected).norm() < 1e-13, "k = {k}: {v}");
        }
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        let qc = build_contour(&ContourSpec::ray_pair(Complex64::new(-1.0, 0.0), 2.0 * PI / 3.0, 8.0, 8)).unwrap();
        assert_eq!(qc.integrate(|_| Complex64::new(0.0, 0.0)).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn ray_pair_gives_airy_at_zero() {
        let spec = ContourSpec::ray_pair(Complex64::new(-1.0, 0.0), 2.0 * PI / 3.0, 8.0, 48).normalized();
        let qc = build_contour(&spec).unwrap();
        let v = qc.integrate(|u| (-u * u * u / 3.0).exp()).unwrap();
        // independent value: 1/(3^{2/3} Γ(2/3))
        assert_abs_diff_eq!(v.re, 0.355_028_053_887_817_2, epsilon = 1e-10);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn ray_pair_refinement_is_stable() {
        let spec = ContourSpec::ray_pair(Complex64::new(-1.0, 0.0), 2.0 * PI / 3.0, 8.0, 48);
        let (_, est) = integrate_with_estimate(&spec, |u| (-u * u * u / 3.0).exp()).unwrap();
        assert!(est < 1e-12, "{est}");
    }

    #[test]
    fn vertical_line_even_integrand_is_real() {
        let qc = build_contour(&ContourSpec::vertical_line(Complex64::new(0.0, 0.0), 10.0, 64).normalized()).unwrap();
        // w = it, so e^{w²} = e^{-t²}
        let v = qc.integrate(|w| (w * w).exp()).unwrap();
        assert!(v.im.abs() < 1e-12 * v.norm());
        assert_abs_diff_eq!(v.re, 1.0 / (2.0 * PI.sqrt()), epsilon = 1e-12);
    }

    #[test]
    fn paneled_ray_pair_resolves_nearby_pole() {
        // pole at distance ~0.5 from the rays of a contour through -1
        let pole = Complex64::new(-0.4, 0.0);
        let f = |u: Complex64| (-u * u * u / 3.0).exp() / (u - pole);
        let spec = ContourSpec::ray_pair(Complex64::new(-1.0, 0.0), 2.0 * PI / 3.0, 8.0, 12).with_panels(8);
        let a = build_contour(&spec).unwrap().integrate(f).unwrap();
        let b = build_contour(&spec.refined()).unwrap().integrate(f).unwrap();
        assert!((a - b).norm() < 1e-10, "{}", (a - b).norm());
        assert_eq!(build_contour(&spec).unwrap().len(), 2 * 8 * 12);
    }

    #[test]
    fn reversing_negates() {
        let qc = build_contour(&ContourSpec::ray_pair(Complex64::new(1.0, 0.0), PI / 5.0, 12.0, 40)).unwrap();
        let f = |v: Complex64| (v * v * v / 3.0 - v).exp();
        let a = qc.integrate(f).unwrap();
        let b = qc.reversed().integrate(f).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn rejects_bad_specs() {
        let base = ContourSpec::ray_pair(Complex64::new(-1.0, 0.0), 2.0 * PI / 3.0, 8.0, 48);
        assert!(build_contour(&ContourSpec { truncation: 0.0, ..base }).is_err());
        assert!(build_contour(&ContourSpec { truncation: -1.0, ..base }).is_err());
        assert!(build_contour(&ContourSpec { nodes_per_segment: 1, ..base }).is_err());
        assert!(build_contour(&ContourSpec { angle: PI / 2.0, ..base }).is_err());
        assert!(build_contour(&ContourSpec { panels: 0, ..base }).is_err());
    }

    #[test]
    fn non_finite_values_are_reported() {
        let qc = build_contour(&ContourSpec::circle(Complex64::new(0.0, 0.0), 1.0, 4)).unwrap();
        let err = qc.integrate(|z| if z.re > 0.5 { Complex64::new(f64::NAN, 0.0) } else { z }).unwrap_err();
        match err {
            Error::NonFinite { node, .. } => assert!((node - Complex64::new(1.0, 0.0)).norm() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }
}
