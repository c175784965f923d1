use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use parabolic_airy::airy::f_gue;
use parabolic_airy::kernels::PointConfig;
use parabolic_airy::pipeline::{compare, joint_cdf, Method};
use parabolic_airy::settings::{ENV_LAMBDA_MAX, ENV_NODES, ENV_TOL, ENV_TRUNCATION, ENV_Z_RADIUS};
use parabolic_airy::verify::{format_sig, run_suite, settings_key_value, Suite};
use parabolic_airy::{Error, Settings};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

/// Multipoint distribution of the parabolic Airy process.
#[derive(Parser, Debug)]
#[command(name = "parabolic-airy", version)]
struct Cli {
    #[command(flatten)]
    quad: QuadArgs,
    #[command(subcommand)]
    command: Command,
}

/// Quadrature overrides. A flag beats its environment variable, which beats the default.
#[derive(Args, Debug)]
struct QuadArgs {
    /// Gauss–Legendre nodes per contour panel.
    #[arg(long, global = true, env = ENV_NODES)]
    nodes: Option<usize>,
    /// Minimal arc-length truncation of the contour rays.
    #[arg(long, global = true, env = ENV_TRUNCATION)]
    truncation: Option<f64>,
    /// Right end of the half-line in the real-side determinants.
    #[arg(long, global = true, env = ENV_LAMBDA_MAX)]
    lambda_max: Option<f64>,
    /// Radius of the circle carrying the auxiliary z-integrals.
    #[arg(long, global = true, env = ENV_Z_RADIUS)]
    z_radius: Option<f64>,
    /// Refinement tolerance.
    #[arg(long, global = true, env = ENV_TOL)]
    tol: Option<f64>,
}

impl QuadArgs {
    fn settings(&self) -> Result<Settings, Error> {
        let mut s = Settings::default();
        if let Some(v) = self.nodes {
            s.nodes = v;
        }
        if let Some(v) = self.truncation {
            s.truncation = v;
        }
        if let Some(v) = self.lambda_max {
            s.lambda_max = v;
        }
        if let Some(v) = self.z_radius {
            s.z_radius = v;
        }
        if let Some(v) = self.tol {
            s.tol = v;
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportFormat {
    Kv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableKind {
    /// `s, F_GUE(s)`.
    Tw,
    /// `β₂ ↦ P(𝒜(α₁) ≤ β₁, 𝒜(α₂) ≤ β₂)`.
    JointSlice,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Joint distribution function at the given points.
    Cdf {
        /// Points as `alpha:beta` pairs separated by commas.
        #[arg(long, allow_hyphen_values = true)]
        points: String,
        #[arg(long, value_enum, default_value_t = Method::BMinusA)]
        method: Method,
        /// Evaluate all four pipelines and report their spread.
        #[arg(long)]
        compare: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        out: Format,
    },
    /// CSV table on a uniform grid.
    Table {
        #[arg(value_enum)]
        kind: TableKind,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// First point `alpha:beta` of a joint slice.
        #[arg(long, allow_hyphen_values = true)]
        fix: Option<String>,
        /// Time of the varying point of a joint slice.
        #[arg(long, allow_hyphen_values = true, default_value_t = 1.0)]
        alpha2: f64,
        #[arg(long, value_enum, default_value_t = Method::BMinusA)]
        method: Method,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long, value_enum, default_value_t = ReportFormat::Kv)]
        out: ReportFormat,
    },
}

enum Failure {
    Check,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command_line = std::env::args().skip(1).collect::<Vec<_>>().join(" ");
    match run(&cli, &command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(EXIT_CHECK_FAILED),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { EXIT_NUMERIC } else { EXIT_USAGE })
        }
    }
}

fn run(cli: &Cli, command_line: &str) -> Result<(), Failure> {
    let settings = cli.quad.settings()?;
    match &cli.command {
        Command::Cdf { points, method, compare: cmp, out } => {
            let cfg = PointConfig::parse(points)?;
            cdf(&cfg, *method, *cmp, *out, &settings, command_line)
        }
        Command::Table { kind, from, to, step, fix, alpha2, method } => {
            let grid = grid(*from, *to, *step)?;
            let mut out = String::new();
            match kind {
                TableKind::Tw => {
                    out.push_str("s,F_GUE(s)\n");
                    for s in grid {
                        out.push_str(&format!("{s},{}\n", format_sig(f_gue(s)?, 12)));
                    }
                }
                TableKind::JointSlice => {
                    let fix = fix
                        .as_deref()
                        .ok_or_else(|| Error::InvalidArgument("joint-slice needs --fix alpha:beta".into()))?;
                    let first = PointConfig::parse(fix)?;
                    if first.m() != 1 {
                        return Err(Error::InvalidArgument("--fix takes exactly one point".into()).into());
                    }
                    out.push_str("beta2,P\n");
                    for b2 in grid {
                        let cfg = PointConfig::new(vec![first.alpha()[0], *alpha2], vec![first.beta()[0], b2])?;
                        let v = joint_cdf(&cfg, *method, &settings)?;
                        out.push_str(&format!("{b2},{}\n", format_sig(v.value, 12)));
                    }
                }
            }
            emit(&out);
            Ok(())
        }
        Command::Verify { suite, out } => {
            let report = run_suite(*suite, &settings, command_line)?;
            for c in &report.checks {
                eprintln!("{} took {:.2}s", c.name, c.seconds);
            }
            match out {
                ReportFormat::Kv => emit(&report.to_key_value()),
                ReportFormat::Json => emit(&pretty(&report)),
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Failure::Check)
            }
        }
    }
}

fn cdf(
    cfg: &PointConfig,
    method: Method,
    cmp: bool,
    out: Format,
    settings: &Settings,
    command_line: &str,
) -> Result<(), Failure> {
    if cmp {
        let c = compare(cfg, settings)?;
        let agrees = c.agrees(settings.tol);
        for v in &c.values {
            eprintln!("{} took {:.2}s", v.method, v.seconds);
        }
        match out {
            Format::Json => {
                let doc = json!({
                    "command": command_line,
                    "points": cfg,
                    "settings": settings,
                    "values": c.values.iter().map(|v| json!({
                        "method": v.method,
                        "value": v.value,
                        "error_estimate": v.error_estimate,
                    })).collect::<Vec<_>>(),
                    "max_deviation": c.max_deviation,
                    "agrees": agrees,
                });
                emit(&pretty(&doc));
            }
            Format::Text => {
                let mut text = header(cfg, settings, command_line);
                for v in &c.values {
                    text.push_str(&format!(
                        "method={} value={} error_estimate={:.3e}\n",
                        v.method,
                        format_sig(v.value, 12),
                        v.error_estimate
                    ));
                }
                text.push_str(&format!("max_deviation={:.3e} agrees={agrees}\n", c.max_deviation));
                emit(&text);
            }
        }
        return if agrees { Ok(()) } else { Err(Failure::Check) };
    }
    let v = joint_cdf(cfg, method, settings)?;
    eprintln!("{} took {:.2}s", v.method, v.seconds);
    match out {
        Format::Json => {
            let doc = json!({
                "command": command_line,
                "points": cfg,
                "settings": settings,
                "method": v.method,
                "value": v.value,
                "error_estimate": v.error_estimate,
                "history": v.history,
            });
            emit(&pretty(&doc));
        }
        Format::Text => {
            let mut text = header(cfg, settings, command_line);
            text.push_str(&format!("method={}\n", v.method));
            text.push_str(&format!("value={}\n", format_sig(v.value, 12)));
            text.push_str(&format!("error_estimate={:.3e}\n", v.error_estimate));
            emit(&text);
        }
    }
    Ok(())
}

fn pretty<T: serde::Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("json serializes") + "\n"
}

/// Writes to stdout; a closed pipe (as with `| head`) ends the process quietly.
fn emit(text: &str) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: {e}");
        std::process::exit(EXIT_USAGE.into());
    }
}

fn header(cfg: &PointConfig, settings: &Settings, command_line: &str) -> String {
    let pts: Vec<String> = cfg.alpha().iter().zip(cfg.beta()).map(|(a, b)| format!("{a}:{b}")).collect();
    format!("command={command_line}\npoints={}\n{}", pts.join(","), settings_key_value(settings))
}

/// `from, from + step, …` up to `to`, each rounded to 12 decimals so the
/// printed values are short.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Error> {
    if !(from.is_finite() && to.is_finite() && step.is_finite() && step > 0.0 && to >= from) {
        return Err(Error::InvalidArgument("need finite from <= to and step > 0".into()));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize + 1;
    if n > 100_000 {
        return Err(Error::InvalidArgument(format!("grid of {n} points is too large")));
    }
    Ok((0..n)
        .map(|k| {
            let v = ((from + k as f64 * step) * 1e12).round() / 1e12;
            if v == 0.0 {
                0.0
            } else {
                v
            }
        })
        .collect())
}
