//! Command-line front end.
//!
//! JSON objects are passed inline (anything starting with `{`) or as a file
//! path. Complex scalars are written `re,im`. Exit codes: 0 on success, 1 on
//! parse or configuration errors, 2 on domain errors and failed checks.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::bernstein::{is_bernstein_numeric, BernsteinRepr};
use crate::branching::{conditional_mean, conditional_variance, laplace_exponent, transition_laplace, MechanismSpec};
use crate::error::Error;
use crate::evolution::{HerglotzField, InverseOutcome};
use crate::flow::flow;
use crate::generator::{check_generator_numeric, parse_unchecked, ConditionReport, GeneratorRepr};
use crate::numerics::{Complex, SolverConfig};

/// Environment variable overriding the default ODE relative tolerance.
pub const RTOL_ENV: &str = "LOEWNER_DEFAULT_RTOL";

const CHECK_DEPTH: usize = 6;

#[derive(Debug, Parser)]
#[command(name = "loewner", version, about = "Bernstein generators and Loewner-Kufarev evolution families")]
pub struct RunSpec {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Csv)]
    pub output: OutputFormat,
    /// Write output here instead of standard output.
    #[arg(long = "out", global = true)]
    pub out_path: Option<PathBuf>,
    /// ODE relative tolerance (overrides LOEWNER_DEFAULT_RTOL).
    #[arg(long, global = true)]
    pub rtol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a Bernstein function, generator or mechanism at z.
    Eval(EvalArgs),
    /// Autonomous flow v_t(z) of a generator.
    Flow(FlowArgs),
    /// Forward evolution family w_{s,t}(z).
    Evolve(SolveArgs),
    /// Reverse evolution family v_{s,t}(z).
    Reverse(SolveArgs),
    /// Inverse of the forward (or, with --reverse, the reverse) family.
    Inverse(InverseArgs),
    /// Boundary classification of a generator.
    Classify(ObjectArgs),
    /// Run the invariant suite of a Bernstein function, generator or field.
    Check(ObjectArgs),
    /// Tabulate a quantity over (s, t, zeta) grids.
    Table(TableArgs),
    /// Expand a branching mechanism into its generator.
    Mech(MechArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Bernstein function JSON.
    #[arg(long)]
    pub bern: Option<String>,
    /// Generator JSON.
    #[arg(long)]
    pub gen: Option<String>,
    /// Mechanism JSON.
    #[arg(long)]
    pub mech: Option<String>,
    /// Field JSON.
    #[arg(long)]
    pub field: Option<String>,
}

#[derive(Debug, Args)]
pub struct ObjectArgs {
    #[command(flatten)]
    pub source: Source,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub z: Option<Complex>,
    /// Derivative order (Bernstein functions only).
    #[arg(long, default_value_t = 0)]
    pub deriv: u32,
    /// Print boundary data instead of a value (Bernstein functions only).
    #[arg(long)]
    pub boundary: bool,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, conflicts_with = "mech", required_unless_present = "mech")]
    pub gen: Option<String>,
    #[arg(long)]
    pub mech: Option<String>,
    #[arg(long)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub z: Complex,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub field: String,
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    #[arg(long)]
    pub t: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    pub z: Complex,
}

#[derive(Debug, Args)]
pub struct InverseArgs {
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Invert the reverse family instead of the forward one.
    #[arg(long)]
    pub reverse: bool,
    /// Report a domain exit as output instead of failing.
    #[arg(long)]
    pub allow_exit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    V,
    Transition,
    Mean,
    Variance,
    Deriv0,
    #[value(name = "deriv0_2")]
    Deriv02,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(long)]
    pub field: String,
    /// Comma-separated s values.
    #[arg(long, default_value = "0")]
    pub s: String,
    /// Comma-separated t values.
    #[arg(long)]
    pub t: String,
    /// Semicolon-separated `re,im` pairs.
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub zeta: String,
    #[arg(long, value_enum, default_value_t = Quantity::V)]
    pub quantity: Quantity,
    /// Initial mass for transition, mean and variance.
    #[arg(long, default_value_t = 1.0)]
    pub x: f64,
}

#[derive(Debug, Args)]
pub struct MechArgs {
    #[arg(long)]
    pub mech: String,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    /// Output still written on failure (the report of a failed check).
    output: Option<String>,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into(), output: None }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into(), output: None }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidInput(_) => Failure::config(e.to_string()),
            _ => Failure::domain(e.to_string()),
        }
    }
}

/// Loading errors are configuration errors whatever their kind.
fn loading(e: Error) -> Failure {
    Failure::config(e.to_string())
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunSpec::try_parse_from(args) {
        Ok(spec) => run(&spec, stdout, stderr),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = stdout.write_all(text.as_bytes());
                0
            } else {
                let _ = stderr.write_all(text.as_bytes());
                1
            }
        }
    }
}

/// Runs one command and returns its exit code.
pub fn run(spec: &RunSpec, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (text, failure) = match solver_config(spec.rtol).and_then(|cfg| execute(spec, &cfg)) {
        Ok(out) => (Some(out), None),
        Err(mut f) => (f.output.take(), Some(f)),
    };
    if let Some(text) = text {
        let written = match &spec.out_path {
            Some(path) => std::fs::write(path, text.as_bytes()),
            None => stdout.write_all(text.as_bytes()),
        };
        if let Err(e) = written {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            return 1;
        }
    }
    match failure {
        None => 0,
        Some(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn solver_config(flag: Option<f64>) -> Result<SolverConfig, Failure> {
    let mut rtol = SolverConfig::default().ode.rtol;
    if let Ok(v) = std::env::var(RTOL_ENV) {
        rtol = v.trim().parse().map_err(|_| Failure::config(format!("{RTOL_ENV} is not a number: {v:?}")))?;
    }
    if let Some(r) = flag {
        rtol = r;
    }
    let cfg = SolverConfig::default().with_rtol(rtol);
    cfg.ode.validate().map_err(loading)?;
    Ok(cfg)
}

fn execute(spec: &RunSpec, cfg: &SolverConfig) -> Result<String, Failure> {
    let json = spec.output == OutputFormat::Json;
    match &spec.command {
        Command::Eval(args) => eval(args, cfg, json),
        Command::Flow(args) => {
            let g = match (&args.gen, &args.mech) {
                (Some(text), _) => load_generator(text)?,
                (None, Some(text)) => load_mechanism(text)?,
                (None, None) => return Err(Failure::config("flow needs --gen or --mech")),
            };
            Ok(point(flow(&g, args.t, args.z, cfg)?.w, json))
        }
        Command::Evolve(args) => {
            let f = load_field(&args.field)?;
            Ok(point(f.evolve(args.s, args.t, args.z, cfg)?, json))
        }
        Command::Reverse(args) => {
            let f = load_field(&args.field)?;
            Ok(point(f.reverse_evolve(args.s, args.t, args.z, cfg)?, json))
        }
        Command::Inverse(args) => inverse(args, cfg, json),
        Command::Classify(args) => {
            let g = match &args.source {
                Source { gen: Some(text), .. } => load_generator(text)?,
                Source { mech: Some(text), .. } => load_mechanism(text)?,
                Source { bern: Some(text), .. } => GeneratorRepr::from_bernstein(&load_bernstein(text)?),
                _ => return Err(Failure::config("classify needs --gen, --mech or --bern")),
            };
            let c = g.classify(&cfg.quad);
            Ok(to_json(&c))
        }
        Command::Check(args) => check(&args.source, cfg, json),
        Command::Table(args) => table(args, cfg),
        Command::Mech(args) => {
            let g = load_mechanism(&args.mech)?;
            Ok(to_json(&g))
        }
    }
}

fn eval(args: &EvalArgs, cfg: &SolverConfig, json: bool) -> Result<String, Failure> {
    if let Some(text) = &args.source.bern {
        let f = load_bernstein(text)?;
        if args.boundary {
            return Ok(to_json(&f.boundary_data()));
        }
        let z = args.z.ok_or_else(|| Failure::config("eval needs --z"))?;
        let value = if args.deriv == 0 { f.eval(z, &cfg.quad)? } else { f.deriv(z, args.deriv, &cfg.quad)? };
        return Ok(point(value, json));
    }
    if args.boundary || args.deriv != 0 {
        return Err(Failure::config("--boundary and --deriv apply to Bernstein functions only"));
    }
    let g = match &args.source {
        Source { gen: Some(text), .. } => load_generator(text)?,
        Source { mech: Some(text), .. } => load_mechanism(text)?,
        _ => return Err(Failure::config("eval needs --bern, --gen or --mech")),
    };
    let z = args.z.ok_or_else(|| Failure::config("eval needs --z"))?;
    Ok(point(g.eval(z, &cfg.quad)?, json))
}

fn inverse(args: &InverseArgs, cfg: &SolverConfig, json: bool) -> Result<String, Failure> {
    let a = &args.solve;
    let f = load_field(&a.field)?;
    let outcome = if args.reverse {
        f.inverse_reverse_evolve(a.s, a.t, a.z, cfg)?
    } else {
        f.inverse_evolve(a.s, a.t, a.z, cfg)?
    };
    match outcome {
        InverseOutcome::Point(p) => Ok(point(p, json)),
        InverseOutcome::DomainExit { t_exit } if args.allow_exit => Ok(if json {
            format!("{{\"domain_exit\":{}}}\n", num(t_exit))
        } else {
            format!("exit,{}\n", num(t_exit))
        }),
        InverseOutcome::DomainExit { t_exit } => Err(Error::LeftHalfPlane { t_exit }.into()),
    }
}

fn table(args: &TableArgs, cfg: &SolverConfig) -> Result<String, Failure> {
    let f = load_field(&args.field)?;
    let s_grid = parse_reals(&args.s)?;
    let t_grid = parse_reals(&args.t)?;
    let zeta_grid = parse_complexes(&args.zeta)?;
    let with_zeta = matches!(args.quantity, Quantity::V | Quantity::Transition);
    let mut out = String::from(if with_zeta { "s,t,re_zeta,im_zeta,re_val,im_val\n" } else { "s,t,re_val,im_val\n" });
    for &s in &s_grid {
        for &t in &t_grid {
            if s > t {
                continue;
            }
            if with_zeta {
                for &zeta in &zeta_grid {
                    let v = match args.quantity {
                        Quantity::V => laplace_exponent(&f, s, t, zeta, cfg)?,
                        _ => transition_laplace(&f, s, t, args.x, zeta, cfg)?,
                    };
                    let _ = writeln!(out, "{},{},{},{},{}", num(s), num(t), num(zeta.re), num(zeta.im), pair(v));
                }
            } else {
                let v = match args.quantity {
                    Quantity::Mean => conditional_mean(&f, s, t, args.x)?,
                    Quantity::Variance => conditional_variance(&f, s, t, args.x)?,
                    Quantity::Deriv0 => f.brfp0_derivative(s, t)?,
                    _ => f.brfp0_second_derivative(s, t)?,
                };
                let _ = writeln!(out, "{},{},{},0", num(s), num(t), num(v));
            }
        }
    }
    Ok(out)
}

struct CheckLine {
    scope: String,
    report: ConditionReport,
}

fn check(source: &Source, cfg: &SolverConfig, json: bool) -> Result<String, Failure> {
    let grid = check_grid();
    let mut lines = Vec::new();
    match source {
        Source { gen: Some(text), .. } => {
            let g = parse_unchecked(&read_source(text)?).map_err(loading)?;
            push_generator(&mut lines, "generator", &g, &grid, cfg);
        }
        Source { mech: Some(text), .. } => {
            let g = load_mechanism(text)?;
            push_generator(&mut lines, "mechanism", &g, &grid, cfg);
        }
        Source { bern: Some(text), .. } => check_bernstein(&mut lines, &load_bernstein(text)?, &grid, cfg)?,
        Source { field: Some(text), .. } => check_field(&mut lines, text, &grid, cfg)?,
        _ => return Err(Failure::config("check needs --bern, --gen, --mech or --field")),
    }
    let pass = lines.iter().all(|l| l.report.pass);
    let out = if json {
        let items: Vec<Value> = lines
            .iter()
            .map(|l| {
                serde_json::json!({
                    "scope": l.scope,
                    "label": l.report.label,
                    "pass": l.report.pass,
                    "worst": json_value(l.report.worst),
                    "at": json_value(l.report.at),
                })
            })
            .collect();
        to_json(&serde_json::json!({ "pass": pass, "conditions": items }))
    } else {
        let mut out = String::new();
        for l in &lines {
            let verdict = if l.report.pass { "ok" } else { "VIOLATED" };
            let _ = write!(out, "{} {}: {verdict} (worst {}", l.scope, l.report.label, num(l.report.worst));
            if l.report.at.is_nan() {
                out.push_str(")\n");
            } else {
                let _ = writeln!(out, " at x = {})", num(l.report.at));
            }
        }
        let _ = writeln!(out, "result: {}", if pass { "pass" } else { "fail" });
        out
    };
    if pass {
        Ok(out)
    } else {
        Err(Failure { code: 2, message: "check failed".into(), output: Some(out) })
    }
}

fn check_grid() -> Vec<(f64, f64)> {
    (0..10).map(|i| (0.2 + 0.7 * i as f64, 0.1)).collect()
}

fn push_generator(lines: &mut Vec<CheckLine>, scope: &str, g: &GeneratorRepr, grid: &[(f64, f64)], cfg: &SolverConfig) {
    let quad = cfg.quad;
    let result = check_generator_numeric(|x| g.eval(Complex::new(x, 0.0), &quad), grid, CHECK_DEPTH);
    lines.extend(result.conditions.into_iter().map(|report| CheckLine { scope: scope.to_string(), report }));
}

fn line(scope: &str, label: &'static str, pass: bool, worst: f64, at: f64) -> CheckLine {
    CheckLine { scope: scope.to_string(), report: ConditionReport { label, pass, worst, at } }
}

fn check_bernstein(lines: &mut Vec<CheckLine>, f: &BernsteinRepr, grid: &[(f64, f64)], cfg: &SolverConfig) -> Result<(), Failure> {
    let quad = cfg.quad;
    let numeric = is_bernstein_numeric(|x| f.eval(Complex::new(x, 0.0), &quad).map_or(f64::NAN, |v| v.re), grid, CHECK_DEPTH);
    lines.push(line("bernstein", "BF-numeric", numeric.pass, numeric.worst_violation, f64::NAN));
    let samples = sample_points();
    let (ratio, pass) = f.julia_check(&samples, &quad)?;
    lines.push(line("bernstein", "julia", pass, ratio - f.beta(), f64::NAN));
    let bd = f.boundary_data();
    if bd.fprime0.is_finite() && bd.fsecond0.is_finite() {
        let mut worst = f64::INFINITY;
        let mut at = f64::NAN;
        for &z in &samples {
            let gap = f.rigidity_gap(z, &quad)?;
            if gap < worst {
                worst = gap;
                at = z.re;
            }
        }
        lines.push(line("bernstein", "rigidity", worst >= -1e-10, worst, at));
    }
    Ok(())
}

fn sample_points() -> Vec<Complex> {
    let mut out = Vec::new();
    for re in [0.05, 0.5, 2.0, 10.0] {
        for im in [0.0, 1.0, -3.0, 20.0] {
            out.push(Complex::new(re, im));
        }
    }
    out
}

fn check_field(lines: &mut Vec<CheckLine>, text: &str, grid: &[(f64, f64)], cfg: &SolverConfig) -> Result<(), Failure> {
    let (breakpoints, slices) = field_parts(&read_source(text)?, true)?;
    for (k, g) in slices.iter().enumerate() {
        push_generator(lines, &format!("slice {k}"), g, grid, cfg);
    }
    if !lines.iter().all(|l| l.report.pass) {
        return Ok(());
    }
    let f = HerglotzField::new(breakpoints, slices).map_err(loading)?;
    let span = f.span();
    let triples = [(0.0, span / 3.0, span), (span / 4.0, span / 2.0, 0.9 * span)];
    let mut ef = (0.0_f64, f64::NAN);
    let mut re = (0.0_f64, f64::NAN);
    for z in [Complex::new(1.0, 0.0), Complex::new(0.5, 2.0), Complex::new(3.0, -1.0)] {
        for &(s, t, u) in &triples {
            let r = f.ef2_residual(s, t, u, z, cfg)?;
            if r > ef.0 {
                ef = (r, z.re);
            }
            let r = f.ref2_residual(s, t, u, z, cfg)?;
            if r > re.0 {
                re = (r, z.re);
            }
        }
    }
    lines.push(line("field", "EF2", ef.0 <= 1e-7, ef.0, ef.1));
    lines.push(line("field", "REF2", re.0 <= 1e-7, re.0, re.1));
    let forward = is_bernstein_numeric(|x| real_solve(&f, x, false, cfg), grid, CHECK_DEPTH);
    lines.push(line("field", "BF-evolve", forward.pass, forward.worst_violation, f64::NAN));
    let reverse = is_bernstein_numeric(|x| real_solve(&f, x, true, cfg), grid, CHECK_DEPTH);
    lines.push(line("field", "BF-reverse", reverse.pass, reverse.worst_violation, f64::NAN));
    Ok(())
}

fn real_solve(f: &HerglotzField, x: f64, reverse: bool, cfg: &SolverConfig) -> f64 {
    let z = Complex::new(x, 0.0);
    let r = if reverse { f.reverse_evolve(0.0, f.span(), z, cfg) } else { f.evolve(0.0, f.span(), z, cfg) };
    r.map_or(f64::NAN, |w| w.re)
}

fn read_source(arg: &str) -> Result<String, Failure> {
    if arg.trim_start().starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure::config(format!("cannot read {arg}: {e}")))
}

fn load_bernstein(arg: &str) -> Result<BernsteinRepr, Failure> {
    serde_json::from_str(&read_source(arg)?).map_err(|e| Failure::config(format!("bad Bernstein function: {e}")))
}

fn load_generator(arg: &str) -> Result<GeneratorRepr, Failure> {
    serde_json::from_str(&read_source(arg)?).map_err(|e| Failure::config(format!("bad generator: {e}")))
}

fn load_mechanism(arg: &str) -> Result<GeneratorRepr, Failure> {
    let m: MechanismSpec =
        serde_json::from_str(&read_source(arg)?).map_err(|e| Failure::config(format!("bad mechanism: {e}")))?;
    m.generator().map_err(loading)
}

fn load_field(arg: &str) -> Result<HerglotzField, Failure> {
    let (breakpoints, slices) = field_parts(&read_source(arg)?, false)?;
    HerglotzField::new(breakpoints, slices).map_err(loading)
}

/// Field JSON whose slices are generator or mechanism objects. With
/// `lenient`, generator slices skip the sign checks so they can be
/// diagnosed.
fn field_parts(text: &str, lenient: bool) -> Result<(Vec<f64>, Vec<GeneratorRepr>), Failure> {
    let bad = |msg: String| Failure::config(format!("bad field: {msg}"));
    let value: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| bad("expected an object".into()))?;
    if let Some(key) = obj.keys().find(|k| *k != "breakpoints" && *k != "slices") {
        return Err(bad(format!("unknown field `{key}`")));
    }
    let breakpoints: Vec<f64> = serde_json::from_value(obj.get("breakpoints").cloned().unwrap_or(Value::Null))
        .map_err(|e| bad(format!("breakpoints: {e}")))?;
    let raw = obj.get("slices").and_then(Value::as_array).ok_or_else(|| bad("missing `slices` array".into()))?;
    let slices = raw
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let slice = |e: String| bad(format!("slice {k}: {e}"));
            if v.get("kind").is_some() {
                let m: MechanismSpec = serde_json::from_value(v.clone()).map_err(|e| slice(e.to_string()))?;
                m.generator().map_err(|e| slice(e.to_string()))
            } else if lenient {
                parse_unchecked(&v.to_string()).map_err(|e| slice(e.to_string()))
            } else {
                serde_json::from_value(v.clone()).map_err(|e| slice(e.to_string()))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((breakpoints, slices))
}

fn parse_complex(text: &str) -> Result<Complex, String> {
    let mut parts = text.split(',');
    let re = parts.next().unwrap_or("").trim();
    let im = parts.next().map(str::trim).unwrap_or("0");
    if parts.next().is_some() {
        return Err(format!("expected re,im, got {text:?}"));
    }
    let re: f64 = re.parse().map_err(|_| format!("bad real part in {text:?}"))?;
    let im: f64 = im.parse().map_err(|_| format!("bad imaginary part in {text:?}"))?;
    Ok(Complex::new(re, im))
}

fn parse_reals(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Failure::config(format!("bad number {s:?}"))))
        .collect()
}

fn parse_complexes(text: &str) -> Result<Vec<Complex>, Failure> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_complex(s).map_err(Failure::config))
        .collect()
}

/// Shortest round-trip decimal, `0` for both zeros; exponent notation
/// outside `[1e-5, 1e16)`.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else if (1e-5..1e16).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Serializes with every `-0.0` replaced by `0`.
fn to_json<T: serde::Serialize>(v: &T) -> String {
    fn scrub(v: &mut Value) {
        match v {
            Value::Number(n) if n.as_f64() == Some(0.0) => *v = Value::from(0),
            Value::Array(items) => items.iter_mut().for_each(scrub),
            Value::Object(map) => map.values_mut().for_each(scrub),
            _ => {}
        }
    }
    let mut value = serde_json::to_value(v).expect("output serializes");
    scrub(&mut value);
    value.to_string() + "\n"
}

fn pair(z: Complex) -> String {
    format!("{},{}", num(z.re), num(z.im))
}

fn point(z: Complex, json: bool) -> String {
    if json {
        format!("{{\"re\":{},\"im\":{}}}\n", json_num(z.re), json_num(z.im))
    } else {
        pair(z) + "\n"
    }
}

fn json_value(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::Null
    } else {
        Value::from(num(x))
    }
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        format!("\"{}\"", num(x))
    }
}
