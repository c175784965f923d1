//! One entry point for the joint distribution function by any of the four
//! pipelines, plus a side-by-side comparison.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fredholm::{fredholm_det_contour_nystrom, fredholm_det_halfline, FredholmResult};
use crate::kernels::{BMinusAKernel, ExtAiryKernel, Negated, PointConfig};
use crate::liu::airy_cdf_via_sum;
use crate::settings::Settings;

/// Cutoff of the multiple sum used by [`Method::LiuSum`].
pub const LIU_CUTOFF: usize = 3;

/// Imaginary parts above this are reported as a numerical failure.
const IMAGINARY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// `det(I − K_ext)` on the half-line.
    ExtAiry,
    /// `det(I + 𝐊)` on the left contour.
    ContourK,
    /// `det(I + B̃ − Ã)` on the half-line.
    BMinusA,
    /// The multiple sum truncated at total order 3.
    LiuSum,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::ExtAiry, Method::ContourK, Method::BMinusA, Method::LiuSum];

    pub fn name(self) -> &'static str {
        match self {
            Method::ExtAiry => "ext-airy",
            Method::ContourK => "contour-k",
            Method::BMinusA => "b-minus-a",
            Method::LiuSum => "liu-sum",
        }
    }

    /// Whether the error estimate is a refinement difference checked against
    /// the tolerance (as opposed to a series tail bound).
    pub fn is_refined(self) -> bool {
        self != Method::LiuSum
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method {s:?}")))
    }
}

/// A joint probability `P(𝒜(αᵢ) ≤ βᵢ for all i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfValue {
    pub method: Method,
    pub value: f64,
    /// Refinement difference, or the tail bound for the multiple sum.
    pub error_estimate: f64,
    /// `(resolution or order, value)` pairs behind the estimate.
    pub history: Vec<(usize, f64)>,
    pub seconds: f64,
}

fn real_result(method: Method, r: FredholmResult, seconds: f64) -> Result<CdfValue> {
    if r.value.im.abs() > IMAGINARY_TOL {
        return Err(Error::NonFinite { node: Default::default(), value: r.value });
    }
    Ok(CdfValue {
        method,
        value: r.value.re,
        error_estimate: r.error_estimate,
        history: r.history.iter().map(|&(k, v)| (k, v.re)).collect(),
        seconds,
    })
}

/// The joint distribution function by `method`, without a convergence check.
pub fn joint_cdf_unchecked(cfg: &PointConfig, method: Method, settings: &Settings) -> Result<CdfValue> {
    settings.validate()?;
    let start = Instant::now();
    let r = match method {
        Method::ExtAiry => {
            let k = Negated(ExtAiryKernel::new(cfg, settings));
            fredholm_det_halfline(&k, settings.lambda_max, settings.nystrom_nodes)?
        }
        Method::BMinusA => {
            fredholm_det_halfline(&BMinusAKernel::new(cfg, settings), settings.lambda_max, settings.nystrom_nodes)?
        }
        Method::ContourK => fredholm_det_contour_nystrom(cfg, settings)?,
        Method::LiuSum => airy_cdf_via_sum(cfg, LIU_CUTOFF, settings)?,
    };
    real_result(method, r, start.elapsed().as_secs_f64())
}

/// The joint distribution function by `method`. Refined pipelines fail with
/// [`Error::NotConverged`] when their refinement difference exceeds `settings.tol`.
pub fn joint_cdf(cfg: &PointConfig, method: Method, settings: &Settings) -> Result<CdfValue> {
    let v = joint_cdf_unchecked(cfg, method, settings)?;
    if method.is_refined() && v.error_estimate > settings.tol {
        return Err(Error::NotConverged { estimate: v.error_estimate, tol: settings.tol });
    }
    Ok(v)
}

/// All four pipelines on one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub values: Vec<CdfValue>,
    pub max_deviation: f64,
}

impl Comparison {
    /// Whether every pair agrees within `tol` plus the tail bounds involved.
    pub fn agrees(&self, tol: f64) -> bool {
        self.values.iter().all(|a| {
            self.values.iter().all(|b| {
                let slack = |v: &CdfValue| if v.method.is_refined() { 0.0 } else { v.error_estimate };
                (a.value - b.value).abs() <= tol + slack(a) + slack(b)
            })
        })
    }
}

pub fn compare(cfg: &PointConfig, settings: &Settings) -> Result<Comparison> {
    let values: Vec<CdfValue> =
        Method::ALL.iter().map(|&m| joint_cdf_unchecked(cfg, m, settings)).collect::<Result<_>>()?;
    let mut max_deviation: f64 = 0.0;
    for a in &values {
        for b in &values {
            max_deviation = max_deviation.max((a.value - b.value).abs());
        }
    }
    Ok(Comparison { values, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
            assert_eq!(m.to_string(), m.name());
        }
        assert!("nystrom".parse::<Method>().is_err());
    }

    #[test]
    fn one_point_matches_gue() {
        let s = Settings::default();
        let cfg = PointConfig::single(0.0, -1.0).unwrap();
        let want = crate::airy::f_gue(-1.0).unwrap();
        for m in [Method::BMinusA, Method::ExtAiry, Method::ContourK] {
            let v = joint_cdf(&cfg, m, &s).unwrap();
            assert!((v.value - want).abs() < 1e-7, "{m}: {} vs {want}", v.value);
        }
    }

    #[test]
    fn two_point_comparison_agrees() {
        let cfg = PointConfig::parse("0:0,1:0").unwrap();
        let c = compare(&cfg, &Settings::default()).unwrap();
        assert_eq!(c.values.len(), 4);
        assert!(c.agrees(1e-6), "{c:?}");
        assert!(c.max_deviation < 1e-3);
    }

    #[test]
    fn tight_tolerance_reports_non_convergence() {
        let s = Settings { nystrom_nodes: 6, tol: 1e-14, ..Settings::default() };
        let cfg = PointConfig::single(0.0, -1.0).unwrap();
        assert!(matches!(joint_cdf(&cfg, Method::BMinusA, &s), Err(Error::NotConverged { .. })));
    }
}
