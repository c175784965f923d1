use std::process::{Command, Output};

use parabolic_airy::airy::f_gue;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parabolic-airy"))
        .args(args)
        .env_remove("AF_NODES")
        .env_remove("AF_TRUNCATION")
        .env_remove("AF_LAMBDA_MAX")
        .env_remove("AF_Z_RADIUS")
        .env_remove("AF_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn csv(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect()
}

#[test]
fn one_point_cdf_matches_tracy_widom() {
    let o = run(&["cdf", "--points", "0:-1", "--method", "b-minus-a"]);
    assert!(o.status.success());
    let v = field(&stdout(&o), "value");
    assert!((v - f_gue(-1.0).unwrap()).abs() < 1e-7);
}

#[test]
fn compare_reports_four_close_values() {
    let o = run(&["cdf", "--points", "0:0,1:0", "--compare"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("method=")).count(), 4);
    let line = text.lines().find(|l| l.starts_with("max_deviation=")).unwrap();
    let dev: f64 = line["max_deviation=".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert!(dev < 1e-5, "{dev}");
}

#[test]
fn decreasing_alpha_is_a_usage_error() {
    let o = run(&["cdf", "--points", "1:0,0:0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("alpha must be strictly increasing"));
}

#[test]
fn bad_range_is_a_usage_error() {
    assert_eq!(run(&["table", "tw", "--from", "2", "--to", "-5", "--step", "1"]).status.code(), Some(2));
    assert_eq!(run(&["table", "tw", "--from", "0", "--to", "1", "--step", "0"]).status.code(), Some(2));
}

#[test]
fn tracy_widom_table_is_monotone() {
    let o = run(&["table", "tw", "--from", "-5", "--to", "2", "--step", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("s,F_GUE(s)\n"));
    let rows = csv(&text);
    assert_eq!(rows.len(), 8);
    assert_eq!(rows[0].0, -5.0);
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn tracy_widom_tail_is_one() {
    let rows = csv(&stdout(&run(&["table", "tw", "--from", "8", "--to", "8", "--step", "1"])));
    assert_eq!(rows.len(), 1);
    assert!((rows[0].1 - 1.0).abs() < 1e-9);
}

#[test]
fn joint_slice_stays_below_the_marginal() {
    let o = run(&["table", "joint-slice", "--fix", "0:-1", "--from", "-3", "--to", "3", "--step", "1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("beta2,P\n"));
    let rows = csv(&text);
    assert_eq!(rows.len(), 7);
    let bound = f_gue(-1.0).unwrap() + 1e-7;
    assert!(rows.iter().all(|r| r.1 <= bound));
    assert!(rows.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-9));
}

#[test]
fn identical_invocations_give_identical_bytes() {
    let args = ["table", "tw", "--from", "-2", "--to", "0.5", "--step", "0.1"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    // Grid values print short rather than as accumulated sums.
    assert!(stdout(&a).contains("\n-1.7,"));
}

#[test]
fn flag_beats_environment_beats_default() {
    let default = stdout(&run(&["cdf", "--points", "0:0"]));
    assert_eq!(field(&default, "settings.nodes"), 12.0);

    let env = Command::new(env!("CARGO_BIN_EXE_parabolic-airy"))
        .args(["cdf", "--points", "0:0"])
        .env("AF_NODES", "14")
        .output()
        .unwrap();
    assert_eq!(field(&stdout(&env), "settings.nodes"), 14.0);

    let flag = Command::new(env!("CARGO_BIN_EXE_parabolic-airy"))
        .args(["--nodes", "16", "cdf", "--points", "0:0"])
        .env("AF_NODES", "14")
        .output()
        .unwrap();
    assert_eq!(field(&stdout(&flag), "settings.nodes"), 16.0);
}

#[test]
fn unconverged_quadrature_exits_with_numeric_code() {
    // No refinement difference in double precision reaches 1e-300.
    let o = run(&["--tol", "1e-300", "--lambda-max", "40", "cdf", "--points", "0:-2,1:-2", "--method", "ext-airy"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_identities_suite_passes() {
    let o = run(&["verify", "--suite", "identities"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("check=andreief-200-instances status=pass"));
    assert!(text.contains("settings.lambda_max=18.0"));
}

#[test]
fn verify_json_mirrors_the_report() {
    let o = run(&["verify", "--suite", "identities", "--out", "json"]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["checks"].as_array().unwrap().len(), 3);
    assert_eq!(doc["settings"]["nodes"], 12);
}

#[test]
fn cdf_json_output_parses() {
    let o = run(&["cdf", "--points", "0:0", "--out", "json"]);
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["method"], "b-minus-a");
    assert!((doc["value"].as_f64().unwrap() - f_gue(0.0).unwrap()).abs() < 1e-7);
}
