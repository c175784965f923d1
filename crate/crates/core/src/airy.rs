//! The Airy function by two independent routes, and the GUE Tracy–Widom law.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::fredholm::{det_lu, FredholmResult};
use crate::quadrature::{build_contour, ray_cutoff, ContourSpec, GaussLegendre, QuadratureContour, TWO_PI_I};

/// Below this |x| the Maclaurin series is summed in double-double arithmetic.
pub const SERIES_LIMIT: f64 = 8.0;

const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
const NEG_AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AiryMethod {
    Series,
    Asymptotic,
    Contour,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AiryValue {
    pub x: f64,
    pub ai: f64,
    pub ai_prime: f64,
    pub method: AiryMethod,
}

/// `Ai(x)` and `Ai'(x)`.
pub fn airy(x: f64) -> AiryValue {
    if x.is_nan() {
        return AiryValue { x, ai: f64::NAN, ai_prime: f64::NAN, method: AiryMethod::Series };
    }
    if x.abs() <= SERIES_LIMIT {
        let (ai, ai_prime) = maclaurin(x);
        AiryValue { x, ai, ai_prime, method: AiryMethod::Series }
    } else {
        let (ai, ai_prime) = if x > 0.0 { asymptotic_right(x) } else { asymptotic_left(-x) };
        AiryValue { x, ai, ai_prime, method: AiryMethod::Asymptotic }
    }
}

pub fn airy_ai(x: f64) -> f64 {
    airy(x).ai
}

pub fn airy_ai_prime(x: f64) -> f64 {
    airy(x).ai_prime
}

fn dd(pair: (f64, f64)) -> TwoFloat {
    TwoFloat::try_from(pair).expect("valid double-double constant")
}

pub(crate) fn maclaurin(x: f64) -> (f64, f64) {
    let one = TwoFloat::from(1.0);
    let xd = TwoFloat::from(x);
    let x3 = xd * xd * xd;
    let (mut f, mut t) = (one, one);
    let (mut g, mut s) = (xd, xd);
    let (mut fp, mut tp) = (TwoFloat::from(0.0), TwoFloat::from(0.0));
    let (mut gp, mut sp) = (one, one);
    for k in 1..400u32 {
        let k3 = 3.0 * k as f64;
        t = t * x3 / ((k3 - 1.0) * k3);
        s = s * x3 / (k3 * (k3 + 1.0));
        tp = if k == 1 { xd * xd / 2.0 } else { tp * x3 / ((k3 - 3.0) * (k3 - 1.0)) };
        sp = sp * x3 / ((k3 - 2.0) * k3);
        f += t;
        g += s;
        fp += tp;
        gp += sp;
        let largest = [t, s, tp, sp].iter().map(|v| v.hi().abs()).fold(0.0, f64::max);
        if k > 2 && largest < 1e-40 {
            break;
        }
    }
    let c1 = dd(AI0);
    let c2 = dd(NEG_AIP0);
    let ai = c1 * f - c2 * g;
    let aip = c1 * fp - c2 * gp;
    (ai.into(), aip.into())
}

/// `(u_k, v_k)` of the standard large-argument expansions.
fn asymptotic_coefficients(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    let mut u = 1.0;
    out.push((1.0, 1.0));
    for k in 1..n {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        out.push((u, v));
    }
    out
}

/// Terms `c_k ζ^{-k}` up to the smallest one.
fn truncated_terms(coeffs: &[(f64, f64)], zeta: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut p = 1.0;
    let mut prev = f64::INFINITY;
    for &(u, v) in coeffs {
        let tu = u * p;
        let size = tu.abs();
        if size > prev {
            break;
        }
        out.push((tu, v * p));
        if size < 1e-18 {
            break;
        }
        prev = size;
        p /= zeta;
    }
    out
}

fn asymptotic_right(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let terms = truncated_terms(&asymptotic_coefficients(60), zeta);
    let (mut su, mut sv) = (0.0, 0.0);
    for (k, (tu, tv)) in terms.iter().enumerate().rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        su += sign * tu;
        sv += sign * tv;
    }
    let pref = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (pref / q * su, -pref * q * sv)
}

fn asymptotic_left(y: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * y * y.sqrt();
    let terms = truncated_terms(&asymptotic_coefficients(60), zeta);
    let (mut eu, mut ou, mut ev, mut ov) = (0.0, 0.0, 0.0, 0.0);
    for (k, (tu, tv)) in terms.iter().enumerate().rev() {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            eu += sign * tu;
            ev += sign * tv;
        } else {
            ou += sign * tu;
            ov += sign * tv;
        }
    }
    let phase = zeta - PI / 4.0;
    let (sn, cs) = phase.sin_cos();
    let q = y.powf(0.25);
    let sp = PI.sqrt();
    let ai = (cs * eu + sn * ou) / (sp * q);
    let aip = q / sp * (sn * ev - cs * ov);
    (ai, aip)
}

/// A left ray pair through the relevant saddle points of `e^{-u³/3 + xu}`.
///
/// For `x ≥ 0` the vertex sits on the saddle `-√x`; for `x < 0` the rays pass
/// through the conjugate saddles `±i√|x|`.
pub fn airy_contour(x: f64, nodes_per_ray: usize) -> ContourSpec {
    let angle = 2.0 * PI / 3.0;
    let vertex = if x >= 0.0 { -x.sqrt() } else { (x.abs() / 3.0).sqrt() };
    let vertex = Complex64::new(vertex, 0.0);
    let cutoff = ray_cutoff(vertex, angle, |u| (-u * u * u / 3.0 + x * u).re, 40.0, 60.0).max(6.0);
    let nodes = ((nodes_per_ray as f64) * (cutoff / 8.0).max(1.0)).ceil() as usize;
    ContourSpec::ray_pair(vertex, angle, cutoff, nodes)
}

/// `∫ e^{-u³/3 + xu} du/(2πi)` over a left ray pair.
///
/// Fails when doubling the rule changes the value by more than `1e-8`.
pub fn airy_ai_via_contour(x: f64, qc: &QuadratureContour) -> Result<Complex64> {
    if !qc.spec.opens_left() {
        return Err(Error::InvalidContour("the Airy integral needs a left ray pair".into()));
    }
    let integrand = |u: Complex64| (-u * u * u / 3.0 + x * u).exp();
    let scale = if qc.spec.normalized { Complex64::new(1.0, 0.0) } else { 1.0 / TWO_PI_I };
    let value = qc.integrate(integrand)? * scale;
    let fine = build_contour(&qc.spec.refined())?.integrate(integrand)? * scale;
    let estimate = (fine - value).norm();
    if estimate > 1e-8 {
        return Err(Error::NotConverged { estimate, tol: 1e-8 });
    }
    Ok(value)
}

/// Contour route with the saddle-adapted contour at 64 nodes per ray.
pub fn airy_ai_contour(x: f64) -> Result<Complex64> {
    let qc = build_contour(&airy_contour(x, 64))?;
    airy_ai_via_contour(x, &qc)
}

/// Default node count of the Tracy–Widom Nyström rule.
pub const F_GUE_NODES: usize = 96;

/// `det(I - K_Ai)` on `(s, ∞)` by Nyström with `n` Gauss–Legendre nodes.
///
/// The Airy kernel is used in its Christoffel–Darboux form, so this route
/// shares nothing with the `γ`-integral kernels used elsewhere.
pub fn f_gue_nystrom(s: f64, n: usize) -> Result<f64> {
    if !s.is_finite() {
        return Err(Error::InvalidArgument(format!("s must be finite, got {s}")));
    }
    let upper = s.max(0.0) + 16.0;
    let rule = GaussLegendre::on_interval(s, upper, n);
    let vals: Vec<AiryValue> = rule.nodes.iter().map(|&x| airy(x)).collect();
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let (xa, xb) = (rule.nodes[a], rule.nodes[b]);
            let k = if a == b {
                vals[a].ai_prime * vals[a].ai_prime - xa * vals[a].ai * vals[a].ai
            } else {
                (vals[a].ai * vals[b].ai_prime - vals[a].ai_prime * vals[b].ai) / (xa - xb)
            };
            let delta = if a == b { 1.0 } else { 0.0 };
            m[(a, b)] = Complex64::new(delta - sw[a] * k * sw[b], 0.0);
        }
    }
    Ok(det_lu(&m)?.re)
}

/// Tracy–Widom value with the `n`/`2n` refinement history.
pub fn f_gue_result(s: f64, n: usize) -> Result<FredholmResult> {
    let coarse = f_gue_nystrom(s, n)?;
    let fine = f_gue_nystrom(s, 2 * n)?;
    Ok(FredholmResult::from_history(vec![
        (n, Complex64::new(coarse, 0.0)),
        (2 * n, Complex64::new(fine, 0.0)),
    ]))
}

/// `F_GUE(s)`, clamped to `[0, 1]`.
pub fn f_gue(s: f64) -> Result<f64> {
    if s > 40.0 {
        return Ok(1.0);
    }
    Ok(f_gue_nystrom(s, 2 * F_GUE_NODES)?.clamp(0.0, 1.0))
}
