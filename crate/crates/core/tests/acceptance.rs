//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary so
//! the lines reach the terminal in order; exits nonzero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;

use parabolic_airy::airy::{airy_ai, airy_ai_contour, f_gue};
use parabolic_airy::fredholm::{fredholm_det_contour_nystrom, fredholm_det_contour_series};
use parabolic_airy::identities::{andreief_sweep, okounkov_pair};
use parabolic_airy::kernels::PointConfig;
use parabolic_airy::liu::{Chain, MultiIndex, Stage};
use parabolic_airy::pipeline::{joint_cdf_unchecked, Method};
use parabolic_airy::verify::{chain_config, equivalence_grid};
use parabolic_airy::{Result, Settings};

struct Outcome {
    passed: bool,
    detail: String,
}

fn airy_self_consistency(_: &Settings) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for k in 0..=40 {
        let x = -10.0 + 0.5 * k as f64;
        dev = dev.max((airy_ai_contour(x)? - Complex64::new(airy_ai(x), 0.0)).norm());
    }
    Ok(Outcome { passed: dev <= 1e-11, detail: format!("max |series - contour| = {dev:.2e} on 41 points, tol 1e-11") })
}

fn one_point_law(s: &Settings) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for alpha in [-1.0, 0.0, 1.0] {
        for beta in [-2.0, -1.0, 0.0, 1.0] {
            let v = fredholm_det_contour_nystrom(&PointConfig::single(alpha, beta)?, s)?.value;
            dev = dev.max((v - f_gue(beta + alpha * alpha)?).norm());
        }
    }
    Ok(Outcome { passed: dev <= 1e-7, detail: format!("max |det(I+K) - F_GUE| = {dev:.2e} on 12 points, tol 1e-7") })
}

fn two_point_equivalence(s: &Settings) -> Result<Outcome> {
    let (mut d1, mut d2, mut refine): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for cfg in equivalence_grid() {
        let ext = joint_cdf_unchecked(&cfg, Method::ExtAiry, s)?;
        let bma = joint_cdf_unchecked(&cfg, Method::BMinusA, s)?;
        let ck = joint_cdf_unchecked(&cfg, Method::ContourK, s)?;
        d1 = d1.max((bma.value - ext.value).abs());
        d2 = d2.max((ck.value - bma.value).abs());
        refine = refine.max(ext.error_estimate).max(bma.error_estimate).max(ck.error_estimate);
    }
    Ok(Outcome {
        passed: d1 <= 1e-6 && d2 <= 1e-6,
        detail: format!(
            "6 configs: max |bma - ext| = {d1:.2e}, max |K - bma| = {d2:.2e}, tol 1e-6 (largest doubling change {refine:.1e})"
        ),
    })
}

fn derivation_chain(s: &Settings) -> Result<Outcome> {
    let chain = Chain::new(&chain_config(), s)?;
    let mut agree: f64 = 0.0;
    for parts in [vec![1, 0], vec![1, 1], vec![2, 1]] {
        let n = MultiIndex::new(parts)?;
        let mut vals = vec![chain.hat_d_direct(&n)?];
        for st in Stage::ALL {
            vals.push(chain.hat_d_stage(&n, st)?);
        }
        for a in &vals {
            for b in &vals {
                agree = agree.max((a - b).norm());
            }
        }
    }
    let mut vanish: f64 = 0.0;
    for parts in [vec![0, 1], vec![1, 2]] {
        vanish = vanish.max(chain.hat_d_direct(&MultiIndex::new(parts)?)?.norm());
    }
    Ok(Outcome {
        passed: agree <= 1e-5 && vanish <= 1e-6,
        detail: format!("four forms agree within {agree:.2e} (tol 1e-5); vanishing terms {vanish:.2e} (tol 1e-6)"),
    })
}

fn series_expansion(s: &Settings) -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for beta in [-2.0, -1.0, 0.0, 1.0] {
        let cfg = PointConfig::single(0.0, beta)?;
        let exact = fredholm_det_contour_nystrom(&cfg, s)?.value;
        let s6 = fredholm_det_contour_series(&cfg, s, 6)?.value;
        worst = worst.max((s6 - exact).norm());
    }
    Ok(Outcome { passed: worst <= 1e-6, detail: format!("max |S_6 - Nystrom| = {worst:.2e} for beta in -2..1, tol 1e-6") })
}

fn generalized_andreief(_: &Settings) -> Result<Outcome> {
    let sweep = andreief_sweep(200, 0)?;
    Ok(Outcome {
        passed: sweep.passed(1e-12),
        detail: format!(
            "{} instances, {} exact failures, max float relative error {:.2e}",
            sweep.instances,
            sweep.exact_failures.len(),
            sweep.max_float_error
        ),
    })
}

fn gaussian_airy(_: &Settings) -> Result<Outcome> {
    let mut dev: f64 = 0.0;
    for x in [0.5, 1.0, 2.0] {
        for a in [-1.0, 0.0, 1.0] {
            for b in [-1.0, 0.0, 1.0] {
                let (q, closed) = okounkov_pair(x, a, b)?;
                dev = dev.max((q - closed).abs());
            }
        }
    }
    Ok(Outcome { passed: dev <= 1e-10, detail: format!("max |quadrature - closed form| = {dev:.2e} on 27 points, tol 1e-10") })
}

fn cdf_sanity(s: &Settings) -> Result<Outcome> {
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut all_values = Vec::new();
    let mut monotone = true;
    for base in [
        PointConfig::new(vec![0.0, 1.0], vec![0.0, 0.0])?,
        PointConfig::new(vec![-1.0, 0.0, 1.0], vec![0.0, 0.0, 0.0])?,
    ] {
        for i in 1..=base.m() {
            let row: Vec<f64> = grid
                .iter()
                .map(|&b| Ok(joint_cdf_unchecked(&base.with_beta(i, b)?, Method::BMinusA, s)?.value))
                .collect::<Result<_>>()?;
            monotone &= row.windows(2).all(|w| w[1] >= w[0] - 1e-9);
            all_values.extend(row);
        }
    }
    let bounded = all_values.iter().all(|v| (-1e-8..=1.0 + 1e-8).contains(v));
    let mut marginal_dev: f64 = 0.0;
    for beta1 in [-2.0, -1.0, 0.0] {
        let v = joint_cdf_unchecked(&PointConfig::new(vec![0.0, 1.0], vec![beta1, 8.0])?, Method::BMinusA, s)?.value;
        marginal_dev = marginal_dev.max((v - f_gue(beta1)?).abs());
    }
    Ok(Outcome {
        passed: bounded && monotone && marginal_dev <= 1e-5,
        detail: format!(
            "{} values bounded: {bounded}; monotone on 5-point grids: {monotone}; beta2 = 8 vs marginal {marginal_dev:.2e} (tol 1e-5)",
            all_values.len()
        ),
    })
}

type Criterion = (&'static str, f64, fn(&Settings) -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("airy self-consistency", 5.0, airy_self_consistency),
        ("one-point law", 60.0, one_point_law),
        ("two-point pipeline equivalence", 600.0, two_point_equivalence),
        ("derivation chain of the multiple sum", 900.0, derivation_chain),
        ("series expansion", 120.0, series_expansion),
        ("generalized Andreief identity", 30.0, generalized_andreief),
        ("Gaussian-Airy identity", 10.0, gaussian_airy),
        ("distribution function sanity", f64::INFINITY, cdf_sanity),
    ];
    let settings = Settings::default();
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run(&settings);
        let secs = start.elapsed().as_secs_f64();
        let (passed, detail) = match outcome {
            Ok(o) => (o.passed && secs <= *budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !passed {
            failures += 1;
        }
        let budget_text = if budget.is_finite() { format!(", budget {budget:.0}s") } else { String::new() };
        println!(
            "{} {}. {name}: {detail} [{secs:.2}s{budget_text}]",
            if passed { "PASS" } else { "FAIL" },
            k + 1
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
