//! Verification suites behind `parabolic-airy verify`.
//!
//! Each check is independent; checks of a suite run in parallel and the
//! report is ordered by check name so identical runs print identical bytes.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_ai, airy_ai_contour, f_gue};
use crate::error::{Error, Result};
use crate::fredholm::{fredholm_det_contour_series, fredholm_det_contour_nystrom};
use crate::identities::{andreief_sweep, antisymmetry_check, okounkov_pair};
use crate::kernels::PointConfig;
use crate::liu::{Chain, MultiIndex, Stage};
use crate::pipeline::{joint_cdf_unchecked, Method};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Identities,
    Chain,
    Equivalence,
    Airy,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Identities => "identities",
            Suite::Chain => "chain",
            Suite::Equivalence => "equivalence",
            Suite::Airy => "airy",
            Suite::All => "all",
        }
    }
}

/// One named check with the values it compared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// The statement being checked.
    pub anchor: String,
    pub values: Vec<(String, f64)>,
    /// Largest observed discrepancy.
    pub deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Wall time; kept out of the serialized report so it stays reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub settings: Settings,
    pub checks: Vec<Check>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Line-oriented `key=value` rendering.
    pub fn to_key_value(&self) -> String {
        let mut out = format!("command={}\n", self.command);
        out.push_str(&settings_key_value(&self.settings));
        for c in &self.checks {
            out.push_str(&format!(
                "check={} status={} deviation={:.3e} tolerance={:.1e} anchor=\"{}\"",
                c.name,
                if c.passed { "pass" } else { "fail" },
                c.deviation,
                c.tolerance,
                c.anchor
            ));
            for (k, v) in &c.values {
                if v.fract() == 0.0 && v.abs() < 1e15 {
                    out.push_str(&format!(" {k}={}", *v as i64));
                } else {
                    out.push_str(&format!(" {k}={}", format_sig(*v, 12)));
                }
            }
            out.push('\n');
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("summary checks={} failed={}\n", self.checks.len(), failed));
        out
    }
}

/// Every quadrature parameter as `settings.<name>=<value>` lines.
pub fn settings_key_value(s: &Settings) -> String {
    let v = serde_json::to_value(s).expect("settings serialize");
    let mut out = String::new();
    if let serde_json::Value::Object(map) = v {
        let mut keys: Vec<_> = map.keys().cloned().collect();
        keys.sort();
        for k in keys {
            out.push_str(&format!("settings.{k}={}\n", map[&k]));
        }
    }
    out
}

/// `v` with `digits` significant digits in positional notation.
pub fn format_sig(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let mag = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - mag).max(0) as usize;
    format!("{v:.decimals$}")
}

type CheckFn = Box<dyn Fn(&Settings) -> Result<Check> + Send + Sync>;

fn check(name: &str, anchor: &str, values: Vec<(String, f64)>, deviation: f64, tolerance: f64) -> Check {
    Check {
        name: name.to_string(),
        anchor: anchor.to_string(),
        values,
        deviation,
        tolerance,
        passed: deviation.is_finite() && deviation <= tolerance,
        seconds: 0.0,
    }
}

fn identity_checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        (
            "andreief-200-instances",
            Box::new(|_| {
                let sweep = andreief_sweep(200, 0)?;
                let dev = if sweep.exact_failures.is_empty() { sweep.max_float_error } else { f64::INFINITY };
                Ok(check(
                    "andreief-200-instances",
                    "block Andreief identity on random atomic measures",
                    vec![
                        ("exact_failures".into(), sweep.exact_failures.len() as f64),
                        ("max_float_error".into(), sweep.max_float_error),
                    ],
                    dev,
                    1e-12,
                ))
            }),
        ),
        (
            "antisymmetrization",
            Box::new(|_| {
                let mut failures = 0;
                let mut runs = vec![antisymmetry_check(3, 2, &[-1, 0, 2], 0)?];
                for seed in 1..20 {
                    runs.push(antisymmetry_check(4, 3, &[-2, -1, 1, 3], seed)?);
                }
                for r in &runs {
                    if !r.passed() {
                        failures += 1;
                    }
                }
                Ok(check(
                    "antisymmetrization",
                    "determinant against an antisymmetric function reduces to its diagonal",
                    vec![("runs".into(), runs.len() as f64), ("failures".into(), failures as f64)],
                    failures as f64,
                    0.0,
                ))
            }),
        ),
        (
            "gaussian-airy-identity",
            Box::new(|_| {
                let mut dev: f64 = 0.0;
                for x in [0.5, 1.0, 2.0] {
                    for a in [-1.0, 0.0, 1.0] {
                        for b in [-1.0, 0.0, 1.0] {
                            let (i, c) = okounkov_pair(x, a, b)?;
                            dev = dev.max((i - c).abs());
                        }
                    }
                }
                Ok(check(
                    "gaussian-airy-identity",
                    "integral of e^{xz}Ai(z+a)Ai(z+b) against its closed form",
                    vec![("grid_points".into(), 27.0)],
                    dev,
                    1e-10,
                ))
            }),
        ),
    ]
}

/// The configuration used by the chain suite.
pub fn chain_config() -> PointConfig {
    PointConfig::new(vec![0.0, 1.0], vec![-0.5, 0.0]).expect("valid configuration")
}

fn chain_checks() -> Vec<(&'static str, CheckFn)> {
    let mut out: Vec<(&'static str, CheckFn)> = Vec::new();
    for (name, parts) in [("forms-agree-1-0", vec![1, 0]), ("forms-agree-1-1", vec![1, 1]), ("forms-agree-2-1", vec![2, 1])] {
        out.push((
            name,
            Box::new(move |s| {
                let chain = Chain::new(&chain_config(), s)?;
                let n = MultiIndex::new(parts.clone())?;
                let mut vals = vec![("direct".to_string(), chain.hat_d_direct(&n)?)];
                for st in Stage::ALL {
                    vals.push((st.name().to_string(), chain.hat_d_stage(&n, st)?));
                }
                let mut dev: f64 = 0.0;
                for (_, a) in &vals {
                    for (_, b) in &vals {
                        dev = dev.max((a - b).norm());
                    }
                }
                Ok(check(
                    name,
                    "four forms of one term of the multiple sum agree",
                    vals.into_iter().map(|(k, v)| (k, v.re)).collect(),
                    dev,
                    1e-5,
                ))
            }),
        ));
    }
    for (name, anchor, parts) in [
        ("vanishing-0-1", "hat_D (0,1) ≈ 0", vec![0, 1]),
        ("vanishing-1-2", "hat_D (1,2) ≈ 0", vec![1, 2]),
    ] {
        out.push((
            name,
            Box::new(move |s| {
                let chain = Chain::new(&chain_config(), s)?;
                let v = chain.hat_d_direct(&MultiIndex::new(parts.clone())?)?;
                Ok(check(
                    name,
                    anchor,
                    vec![("hat_d_re".into(), v.re), ("hat_d_im".into(), v.im)],
                    v.norm(),
                    1e-6,
                ))
            }),
        ));
    }
    out.push((
        "sum-within-tail",
        Box::new(|s| {
            let cfg = chain_config();
            let sum = Chain::new(&cfg, s)?.airy_cdf_via_sum(2)?;
            let exact = fredholm_det_contour_nystrom(&cfg, s)?.value;
            let dev = (sum.value - exact).norm();
            Ok(check(
                "sum-within-tail",
                "multiple sum at cutoff 2 against the contour determinant",
                vec![("sum".into(), sum.value.re), ("determinant".into(), exact.re), ("tail_bound".into(), sum.error_estimate)],
                dev,
                sum.error_estimate,
            ))
        }),
    ));
    out
}

/// The two-point grid of the equivalence suite: gaps `{0.5, 1, 2}`, `β ∈ {−1, 0}`.
pub fn equivalence_grid() -> Vec<PointConfig> {
    let mut out = Vec::new();
    for gap in [0.5, 1.0, 2.0] {
        for beta in [-1.0, 0.0] {
            out.push(PointConfig::new(vec![0.0, gap], vec![beta, beta]).expect("valid configuration"));
        }
    }
    out
}

fn equivalence_checks() -> Vec<(&'static str, CheckFn)> {
    const NAMES: [&str; 6] = [
        "two-point-gap0.5-beta-1",
        "two-point-gap0.5-beta0",
        "two-point-gap1-beta-1",
        "two-point-gap1-beta0",
        "two-point-gap2-beta-1",
        "two-point-gap2-beta0",
    ];
    NAMES
        .iter()
        .enumerate()
        .map(|(k, &name)| -> (&'static str, CheckFn) {
            (
                name,
                Box::new(move |s| {
                    let cfg = &equivalence_grid()[k];
                    let ext = joint_cdf_unchecked(cfg, Method::ExtAiry, s)?.value;
                    let bma = joint_cdf_unchecked(cfg, Method::BMinusA, s)?.value;
                    let ck = joint_cdf_unchecked(cfg, Method::ContourK, s)?.value;
                    let dev = (bma - ext).abs().max((ck - bma).abs());
                    Ok(check(
                        name,
                        "extended Airy, B minus A and contour determinants agree",
                        vec![("ext_airy".into(), ext), ("b_minus_a".into(), bma), ("contour_k".into(), ck)],
                        dev,
                        s.tol,
                    ))
                }),
            )
        })
        .collect()
}

fn airy_checks() -> Vec<(&'static str, CheckFn)> {
    vec![
        (
            "airy-series-vs-contour",
            Box::new(|_| {
                let mut dev: f64 = 0.0;
                for k in 0..=40 {
                    let x = -10.0 + 0.5 * k as f64;
                    dev = dev.max((airy_ai_contour(x)? - Complex64::new(airy_ai(x), 0.0)).norm());
                }
                Ok(check(
                    "airy-series-vs-contour",
                    "Airy function by series and asymptotics against contour quadrature",
                    vec![("points".into(), 41.0)],
                    dev,
                    1e-11,
                ))
            }),
        ),
        (
            "one-point-law",
            Box::new(|s| {
                let mut dev: f64 = 0.0;
                for alpha in [-1.0, 0.0, 1.0] {
                    for beta in [-2.0, -1.0, 0.0, 1.0] {
                        let cfg = PointConfig::single(alpha, beta)?;
                        let v = fredholm_det_contour_nystrom(&cfg, s)?.value;
                        dev = dev.max((v - f_gue(beta + alpha * alpha)?).norm());
                    }
                }
                Ok(check(
                    "one-point-law",
                    "one-point contour determinant equals F_GUE(beta + alpha^2)",
                    vec![("grid_points".into(), 12.0)],
                    dev,
                    1e-7,
                ))
            }),
        ),
        (
            "series-order-six",
            Box::new(|s| {
                let cfg = PointConfig::single(0.0, 0.0)?;
                let series = fredholm_det_contour_series(&cfg, s, 6)?;
                let exact = fredholm_det_contour_nystrom(&cfg, s)?.value;
                let dev = (series.value - exact).norm();
                Ok(check(
                    "series-order-six",
                    "truncated series of the contour determinant at order 6",
                    vec![("series".into(), series.value.re), ("determinant".into(), exact.re)],
                    dev,
                    1e-6,
                ))
            }),
        ),
    ]
}

fn suite_checks(suite: Suite) -> Vec<(&'static str, CheckFn)> {
    match suite {
        Suite::Identities => identity_checks(),
        Suite::Chain => chain_checks(),
        Suite::Equivalence => equivalence_checks(),
        Suite::Airy => airy_checks(),
        Suite::All => {
            let mut all = identity_checks();
            all.extend(chain_checks());
            all.extend(equivalence_checks());
            all.extend(airy_checks());
            all
        }
    }
}

/// Runs a suite. Numerical failures inside a check abort with that error.
pub fn run_suite(suite: Suite, settings: &Settings, command: &str) -> Result<RunReport> {
    settings.validate()?;
    let checks = suite_checks(suite);
    let mut results: Vec<Check> = checks
        .par_iter()
        .map(|(_, f)| {
            let start = Instant::now();
            let mut c = f(settings)?;
            c.seconds = start.elapsed().as_secs_f64();
            Ok(c)
        })
        .collect::<Result<_>>()?;
    results.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(RunReport { command: command.to_string(), settings: *settings, checks: results })
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Suite::Identities, Suite::Chain, Suite::Equivalence, Suite::Airy, Suite::All]
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.969372828355262, 12), "0.969372828355");
        assert_eq!(format_sig(1.0, 12), "1.00000000000");
        assert_eq!(format_sig(-12.5, 4), "-12.50");
        assert_eq!(format_sig(0.0, 12), "0");
        assert_eq!(format_sig(1.5e-9, 3), "1.50e-9");
    }

    #[test]
    fn identities_suite_passes_and_is_ordered() {
        let r = run_suite(Suite::Identities, &Settings::default(), "verify --suite identities").unwrap();
        assert!(r.passed(), "{}", r.to_key_value());
        let names: Vec<_> = r.checks.iter().map(|c| c.name.clone()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
        let text = r.to_key_value();
        assert!(text.contains("settings.nodes=12"));
        assert!(text.ends_with("summary checks=3 failed=0\n"));
    }

    #[test]
    fn chain_suite_includes_vanishing_check() {
        let r = run_suite(Suite::Chain, &Settings::default(), "verify --suite chain").unwrap();
        assert!(r.checks.iter().any(|c| c.anchor == "hat_D (0,1) ≈ 0" && c.passed));
        assert!(r.passed(), "{}", r.to_key_value());
    }

    #[test]
    fn suite_names_parse() {
        assert_eq!("all".parse::<Suite>().unwrap(), Suite::All);
        assert!("none".parse::<Suite>().is_err());
    }
}
