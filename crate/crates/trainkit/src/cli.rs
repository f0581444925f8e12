//! Command line front end. Subcommands sample families over ranges, evaluate
//! them at points, measure norms and distances, build certified approximants,
//! factor integer indices into monomials, and run the self-check suite.
//!
//! Exit codes: 0 on success, 1 when a check or certification fails (or a
//! runtime fault like an unwritable output path), 2 on usage errors such as
//! unknown families or malformed ranges.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::approx::polygonal_approximant;
use crate::families::{p_index_to_monomial, FamilySpec};
use crate::metrics::{dx_distance, l1_norm, sup_norm_window, MetricValue, ToleranceConfig};
use crate::piecewise::CombinedFunction;
use crate::verify::{run_all, Report};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Half-open sampling description `a:b:step`; the grid is a, a+step, ... up
/// to and including b when b lies on the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRange {
    pub a: f64,
    pub b: f64,
    pub step: f64,
}

const MAX_ROWS: u64 = 10_000_000;

impl SampleRange {
    /// Number of grid points. The endpoint counts when (b-a)/step is within
    /// relative 1e-9 of an integer, so decimal steps like 0.01 behave as
    /// written instead of dropping the last row to rounding.
    pub fn rows(&self) -> u64 {
        let ratio = (self.b - self.a) / self.step;
        let rounded = ratio.round();
        let steps = if (ratio - rounded).abs() <= 1e-9 * rounded.max(1.0) {
            rounded
        } else {
            ratio.floor()
        };
        steps as u64 + 1
    }

    fn validate(&self) -> Result<()> {
        if !self.a.is_finite() || !self.b.is_finite() || !self.step.is_finite() {
            return Err(Error::Parse("range bounds must be finite".into()));
        }
        if self.a < 0.0 {
            return Err(Error::Parse(format!("range start must be >= 0, got {}", self.a)));
        }
        if self.step <= 0.0 {
            return Err(Error::Parse(format!("range step must be > 0, got {}", self.step)));
        }
        if self.b < self.a {
            return Err(Error::Parse(format!("range end {} lies before start {}", self.b, self.a)));
        }
        if self.rows() > MAX_ROWS {
            return Err(Error::Parameter(format!(
                "range asks for {} rows, cap is {MAX_ROWS}",
                self.rows()
            )));
        }
        Ok(())
    }
}

impl FromStr for SampleRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(format!("range must be a:b:step, got {s:?}")));
        }
        let num = |txt: &str| -> Result<f64> {
            txt.parse().map_err(|_| Error::Parse(format!("bad range number {txt:?}")))
        };
        let range = SampleRange { a: num(parts[0])?, b: num(parts[1])?, step: num(parts[2])? };
        range.validate()?;
        Ok(range)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "trainkit",
    about = "Lazy piecewise function trains: sampling, certified metrics, approximants, self checks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a family over a range and emit (x, value) rows
    Gen(GenArgs),
    /// Evaluate a family at a single point
    Eval(EvalArgs),
    /// Integral norm of a family, optionally with a windowed sup norm
    Norm(NormArgs),
    /// Certified distance between two families in the combined metric
    Dist(DistArgs),
    /// Build a polygonal approximant with a certified distance budget
    Approx(ApproxArgs),
    /// Factor an integer index into its monomial
    Factor(FactorArgs),
    /// Run verification checks and emit the report
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Family text, e.g. triangle, triangle:t=0.05:start=3, power:p=2, smooth
    #[arg(long)]
    family: String,
    /// Sampling grid a:b:step
    #[arg(long)]
    range: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write to this path instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    family: String,
    /// Evaluation point
    #[arg(long)]
    x: f64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormArgs {
    #[arg(long)]
    family: String,
    /// Also report the sup norm over [0, n]
    #[arg(long)]
    n: Option<u32>,
    /// Accuracy target for the certified integral
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DistArgs {
    /// Given twice: the two families to compare
    #[arg(long, action = clap::ArgAction::Append)]
    family: Vec<String>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ApproxArgs {
    #[arg(long)]
    family: String,
    /// Distance the approximant must certify
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FactorArgs {
    /// Integer index to factor, at least 2
    #[arg(long)]
    n: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// A check name, a name prefix such as growth-alpha, or all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Writes (x, f(x)) rows over the grid into `sink` and reports the row count.
/// Values are printed with 17 significant digits so binary64 round-trips.
pub fn emit_samples(
    label: &str,
    f: &CombinedFunction,
    range: &SampleRange,
    format: OutputFormat,
    sink: &mut String,
) -> Result<u64> {
    range.validate()?;
    let rows = range.rows();
    match format {
        OutputFormat::Csv => {
            sink.push_str("x,value\n");
            for i in 0..rows {
                let x = range.a + i as f64 * range.step;
                let _ = writeln!(sink, "{:.16e},{:.16e}", x, tidy(f.value_at(x)));
            }
        }
        OutputFormat::Json => {
            let _ = write!(sink, "{{\"family\":{},\"samples\":[", json_text(label));
            for i in 0..rows {
                let x = range.a + i as f64 * range.step;
                if i > 0 {
                    sink.push(',');
                }
                let _ = write!(sink, "[{:.16e},{:.16e}]", x, tidy(f.value_at(x)));
            }
            sink.push_str("]}\n");
        }
    }
    Ok(rows)
}

fn json_text(s: &str) -> String {
    serde_json::to_string(s).expect("strings always serialize")
}

// empty sums produce -0.0, which would print with a stray sign
fn tidy(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn parse_family(text: &str) -> Result<CombinedFunction> {
    let spec: FamilySpec = text.parse()?;
    Ok(spec.make_train()?.into())
}

fn config_with(tol: Option<f64>) -> Result<ToleranceConfig> {
    let mut cfg = ToleranceConfig::default();
    if let Some(t) = tol {
        cfg.metric_tol = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn metric_rows(sink: &mut String, rows: &[(&str, &MetricValue)]) {
    sink.push_str("quantity,value,error_bound,truncation_index\n");
    for (label, m) in rows {
        let _ = writeln!(sink, "{label},{:.16e},{:.16e},{}", m.value, m.error_bound, m.truncation_index);
    }
}

enum Outcome {
    Success,
    CheckFailed,
}

fn dispatch(cli: Cli, sink: &mut String) -> Result<(Outcome, Option<PathBuf>)> {
    match cli.command {
        Command::Gen(a) => {
            let f = parse_family(&a.family)?;
            let range: SampleRange = a.range.parse()?;
            emit_samples(&a.family, &f, &range, a.format, sink)?;
            Ok((Outcome::Success, a.out))
        }
        Command::Eval(a) => {
            if !a.x.is_finite() {
                return Err(Error::Parameter(format!("evaluation point must be finite, got {}", a.x)));
            }
            let f = parse_family(&a.family)?;
            let v = tidy(f.value_at(a.x));
            match a.format {
                OutputFormat::Csv => {
                    let _ = write!(sink, "x,value\n{:.16e},{:.16e}\n", a.x, v);
                }
                OutputFormat::Json => {
                    let _ = writeln!(
                        sink,
                        "{{\"family\":{},\"samples\":[[{:.16e},{:.16e}]]}}",
                        json_text(&a.family),
                        a.x,
                        v
                    );
                }
            }
            Ok((Outcome::Success, a.out))
        }
        Command::Norm(a) => {
            let f = parse_family(&a.family)?;
            let cfg = config_with(a.tol)?;
            let l1 = l1_norm(&f, &cfg)?;
            let sup = match a.n {
                Some(n) => Some((n, sup_norm_window(&f, n)?)),
                None => None,
            };
            match a.format {
                OutputFormat::Csv => {
                    let mut rows: Vec<(String, &MetricValue)> = vec![("l1".to_string(), &l1)];
                    if let Some((n, ref m)) = sup {
                        rows.push((format!("sup:n={n}"), m));
                    }
                    let borrowed: Vec<(&str, &MetricValue)> =
                        rows.iter().map(|(s, m)| (s.as_str(), *m)).collect();
                    metric_rows(sink, &borrowed);
                }
                OutputFormat::Json => {
                    let mut doc = serde_json::Map::new();
                    doc.insert("family".into(), serde_json::Value::String(a.family.clone()));
                    doc.insert("l1".into(), serde_json::to_value(&l1).expect("serializable"));
                    if let Some((n, ref m)) = sup {
                        doc.insert("sup_window".into(), serde_json::Value::from(n));
                        doc.insert("sup".into(), serde_json::to_value(m).expect("serializable"));
                    }
                    let _ = writeln!(sink, "{}", serde_json::Value::Object(doc));
                }
            }
            Ok((Outcome::Success, a.out))
        }
        Command::Dist(a) => {
            if a.family.len() != 2 {
                return Err(Error::Parameter(format!(
                    "dist needs --family exactly twice, got {}",
                    a.family.len()
                )));
            }
            let f = parse_family(&a.family[0])?;
            let g = parse_family(&a.family[1])?;
            let cfg = config_with(a.tol)?;
            let d = dx_distance(&f, &g, &cfg)?;
            match a.format {
                OutputFormat::Csv => metric_rows(sink, &[("dx", &d)]),
                OutputFormat::Json => {
                    let doc = serde_json::json!({
                        "first": a.family[0],
                        "second": a.family[1],
                        "dx": d,
                    });
                    let _ = writeln!(sink, "{doc}");
                }
            }
            Ok((Outcome::Success, a.out))
        }
        Command::Approx(a) => {
            let f = parse_family(&a.family)?;
            let cfg = config_with(a.tol)?;
            let (_, cert) = polygonal_approximant(&f, a.eps, &cfg)?;
            match a.format {
                OutputFormat::Csv => {
                    sink.push_str("label,value,bound\n");
                    let _ = writeln!(
                        sink,
                        "achieved-plus-error,{:.16e},{:.16e}",
                        cert.achieved.value + cert.achieved.error_bound,
                        cert.epsilon
                    );
                    for item in &cert.budget {
                        let _ = writeln!(sink, "{},{:.16e},{:.16e}", item.label, item.value, item.bound);
                    }
                }
                OutputFormat::Json => {
                    let doc = serde_json::json!({
                        "family": a.family,
                        "certificate": cert,
                    });
                    let _ = writeln!(sink, "{}", serde_json::to_string_pretty(&doc).expect("serializable"));
                }
            }
            Ok((Outcome::Success, a.out))
        }
        Command::Factor(a) => {
            let m = p_index_to_monomial(a.n)?;
            let _ = writeln!(sink, "{m}");
            Ok((Outcome::Success, a.out))
        }
        Command::Verify(a) => {
            let cfg = config_with(a.tol)?;
            let mut report = run_all(&cfg, a.seed)?;
            if a.suite != "all" {
                report.results.retain(|r| {
                    r.name == a.suite || r.name.starts_with(&format!("{}-", a.suite))
                });
                if report.results.is_empty() {
                    return Err(Error::Parameter(format!("no checks match suite {:?}", a.suite)));
                }
            }
            let ok = report.all_passed();
            emit_report(&report, a.format, sink);
            Ok((if ok { Outcome::Success } else { Outcome::CheckFailed }, a.out))
        }
    }
}

fn emit_report(report: &Report, format: OutputFormat, sink: &mut String) {
    match format {
        OutputFormat::Json => {
            let _ = writeln!(sink, "{}", serde_json::to_string_pretty(report).expect("serializable"));
        }
        OutputFormat::Csv => {
            sink.push_str("name,passed\n");
            for r in &report.results {
                let _ = writeln!(sink, "{},{}", r.name, r.passed);
            }
        }
    }
}

fn usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Parameter(_) | Error::Parse(_) | Error::Domain(_) | Error::Unsupported(_)
    )
}

/// Parses argv (program name first), runs the sub-command, and writes the
/// artifact to --out or standard output. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders help and version through the same error path
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let mut sink = String::new();
    match dispatch(cli, &mut sink) {
        Ok((outcome, dest)) => {
            let written = match dest {
                Some(path) => std::fs::write(&path, &sink)
                    .map_err(|e| Error::Io(e))
                    .map_err(|e| {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        e
                    }),
                None => {
                    print!("{sink}");
                    Ok(())
                }
            };
            if written.is_err() {
                return 1;
            }
            match outcome {
                Outcome::Success => 0,
                Outcome::CheckFailed => 1,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}
