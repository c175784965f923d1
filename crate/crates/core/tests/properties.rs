use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use parabolic_airy::airy::{airy_ai, f_gue};
use parabolic_airy::fredholm::det_lu;
use parabolic_airy::kernels::{eval_F, eval_f, PointConfig};
use parabolic_airy::liu::{cauchy_det, cauchy_det_direct, ComplexVector};
use parabolic_airy::pipeline::{joint_cdf_unchecked, Method};
use parabolic_airy::quadrature::{build_contour, ContourSpec};
use parabolic_airy::Settings;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Strictly increasing times with gaps at least 0.3.
fn times(m: usize) -> impl Strategy<Value = Vec<f64>> {
    (-1.0..0.5f64, proptest::collection::vec(0.3..1.2f64, m - 1)).prop_map(|(a0, gaps)| {
        let mut a = vec![a0];
        for g in gaps {
            a.push(a.last().unwrap() + g);
        }
        a
    })
}

fn config(m: usize) -> impl Strategy<Value = PointConfig> {
    (times(m), proptest::collection::vec(-2.5..1.5f64, m))
        .prop_map(|(a, b)| PointConfig::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn big_f_telescopes_to_f(cfg in config(3), r in 0.0..3.0f64, t in 0.0..(2.0 * PI)) {
        let w = Complex64::from_polar(r, t);
        for i in 1..=3 {
            let mut prod = c(1.0, 0.0);
            for l in 1..=i {
                prod *= eval_F(&cfg, l, w).unwrap();
            }
            let f = eval_f(&cfg, i, w).unwrap();
            prop_assert!((prod - f).norm() <= 1e-13 * f.norm());
        }
    }

    #[test]
    fn cauchy_product_form_matches_lu(
        re in proptest::collection::vec(-2.0..2.0f64, 8),
        im in proptest::collection::vec(-2.0..2.0f64, 8),
    ) {
        // Rows left of the imaginary axis, columns right of it, each set spread
        // out so LU on the explicit matrix stays well conditioned.
        let w = ComplexVector((0..4).map(|k| c(-1.0 - 0.3 * re[k].abs(), 2.0 * k as f64 - 3.0 + 0.3 * im[k])).collect());
        let wt = ComplexVector((4..8).map(|k| c(1.0 + 0.3 * re[k].abs(), 2.0 * (k - 4) as f64 - 3.0 + 0.3 * im[k])).collect());
        let a = cauchy_det(&w, &wt).unwrap();
        let b = cauchy_det_direct(&w, &wt).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * b.norm(), "{a} vs {b}");
    }

    #[test]
    fn determinant_swaps_factor_order(
        n in 1usize..6,
        k in 1usize..6,
        seed in proptest::collection::vec(-0.5..0.5f64, 72),
    ) {
        let a = DMatrix::from_fn(n, k, |i, j| c(seed[i * 6 + j], seed[36 + i * 6 + j]));
        let b = DMatrix::from_fn(k, n, |i, j| c(seed[36 + j * 6 + i], -seed[j * 6 + i]));
        let lhs = det_lu(&(DMatrix::identity(n, n) + &a * &b)).unwrap();
        let rhs = det_lu(&(DMatrix::identity(k, k) + &b * &a)).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }

    #[test]
    fn circle_rule_is_exact_on_monomials(radius in 0.2..2.0f64, k in -15i32..=15) {
        let rule = build_contour(&ContourSpec::circle(c(0.0, 0.0), radius, 32)).unwrap();
        let v = rule.integrate(|z| z.powi(k)).unwrap();
        let expect = if k == -1 { c(0.0, 2.0 * PI) } else { c(0.0, 0.0) };
        let size = 2.0 * PI * radius * radius.powi(k);
        prop_assert!((v - expect).norm() <= 1e-13 * (1.0 + size));
    }

    #[test]
    fn reversal_negates_exactly(angle in 0.2..1.3f64, x in -1.0..1.0f64) {
        let rule = build_contour(&ContourSpec::ray_pair(c(x, 0.0), angle, 4.0, 12)).unwrap();
        let f = |z: Complex64| (-(z * z * z) / 3.0 + z).exp();
        let fwd = rule.integrate(f).unwrap();
        let back = rule.reversed().integrate(f).unwrap();
        prop_assert_eq!(fwd, -back);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn joint_values_are_probabilities(cfg in config(2)) {
        let v = joint_cdf_unchecked(&cfg, Method::BMinusA, &Settings::default()).unwrap().value;
        prop_assert!((-1e-8..=1.0 + 1e-8).contains(&v), "{v}");
        // The joint law lies below each marginal.
        for i in 0..2 {
            let marginal = f_gue(cfg.shift(i)).unwrap();
            prop_assert!(v <= marginal + 1e-7, "{v} > {marginal}");
        }
    }

    #[test]
    fn joint_values_grow_with_each_level(cfg in config(2), i in 1usize..=2, step in 0.1..1.0f64) {
        let s = Settings::default();
        let lo = joint_cdf_unchecked(&cfg, Method::BMinusA, &s).unwrap().value;
        let raised = cfg.with_beta(i, cfg.beta()[i - 1] + step).unwrap();
        let hi = joint_cdf_unchecked(&raised, Method::BMinusA, &s).unwrap().value;
        prop_assert!(hi >= lo - 1e-9, "{lo} -> {hi}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn contour_and_halfline_determinants_agree(cfg in config(2)) {
        let s = Settings::default();
        let k = joint_cdf_unchecked(&cfg, Method::ContourK, &s).unwrap();
        let l = joint_cdf_unchecked(&cfg, Method::BMinusA, &s).unwrap();
        prop_assert!((k.value - l.value).abs() <= 1e-8 + k.error_estimate + l.error_estimate);
    }
}

#[test]
fn airy_equation_residual_is_small() {
    let h = 1e-3;
    let mut k = 0;
    while k <= 160 {
        let x = -8.0 + 0.1 * k as f64;
        let second = (airy_ai(x + h) - 2.0 * airy_ai(x) + airy_ai(x - h)) / (h * h);
        let scale = 1.0 + (x * airy_ai(x)).abs();
        assert!((second - x * airy_ai(x)).abs() / scale <= 1e-6, "x = {x}");
        k += 1;
    }
}
