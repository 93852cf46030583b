use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use slack_window::hll::HllSketch;
use slack_window::space::shll_mode;
use slack_window::{
    algo_bits, mean_output, AnySummer, Epsilon, Error, SlackConfig, SlackHll, SlackMax,
    SlackStdDev, SpaceMode, SumKind, WindowOracle, WindowSum,
};

#[derive(Parser)]
#[command(name = "slackwin", version, about = "Slack-window stream aggregates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Feed a stream through a sketch and print estimates.
    Run(RunArgs),
    /// Run a sketch next to a brute-force oracle and report its worst error.
    Verify(RunArgs),
    /// Print the bit accounting of a sketch configuration.
    Space(SpaceArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Additive,
    Mult,
    MultCompact,
    Max,
    Mean,
    Stddev,
    Distinct,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Inner {
    Exact,
    Additive,
    Mult,
    MultCompact,
}

impl From<Inner> for SumKind {
    fn from(i: Inner) -> Self {
        match i {
            Inner::Exact => SumKind::Exact,
            Inner::Additive => SumKind::Additive,
            Inner::Mult => SumKind::Mult,
            Inner::MultCompact => SumKind::MultCompact,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct WindowArgs {
    /// Window size W.
    #[arg(short = 'W', long = "window")]
    window: u64,
    /// Blocks per window q = 1/tau.
    #[arg(short = 'q', long = "inv-tau")]
    inv_tau: u64,
    /// Value range R.
    #[arg(short = 'R', long = "range", default_value_t = 1)]
    range: u64,
    /// Error parameter as NUM/DEN.
    #[arg(short = 'e', long = "epsilon")]
    epsilon: Option<String>,
    /// Accept values in [-R, R].
    #[arg(long)]
    general: bool,
    /// log2 of the register count for distinct counting.
    #[arg(long, default_value_t = 6)]
    bucket_bits: u32,
}

impl WindowArgs {
    fn config(&self) -> Result<SlackConfig, Failure> {
        let mut cfg = SlackConfig::new(self.window, self.inv_tau, self.range)?.with_signed(self.general);
        if let Some(e) = &self.epsilon {
            cfg = cfg.with_epsilon(e.parse::<Epsilon>()?);
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Summing sketch behind mean and stddev.
    #[arg(long, value_enum, default_value = "exact")]
    inner: Inner,
    /// Query after every N elements; by default only at the end.
    #[arg(long)]
    query_every: Option<u64>,
    /// Hash seed for distinct counting, in hex.
    #[arg(long, default_value = "0")]
    seed: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Input file; standard input when absent.
    input: Option<PathBuf>,
}

#[derive(Args)]
struct SpaceArgs {
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, value_enum)]
    mode: Mode,
}

enum Failure {
    Usage(String),
    Range(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::OutOfRange { .. } => Failure::Range(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn at_line(line: usize, f: Failure) -> Failure {
    match f {
        Failure::Usage(m) => Failure::Usage(format!("line {line}: {m}")),
        Failure::Range(m) => Failure::Range(format!("line {line}: {m}")),
        other => other,
    }
}

fn rational_json(r: &BigRational) -> (Value, Option<String>) {
    if r.is_integer() {
        if let Some(i) = r.to_integer().to_i64() {
            return (json!(i), None);
        }
    }
    (json!(r.to_f64().unwrap_or(f64::NAN)), Some(r.to_string()))
}

/// The sketch a `run` or `verify` drives.
enum Runner {
    Sum(AnySummer),
    Max(SlackMax),
    Mean(AnySummer),
    StdDev(SlackStdDev<AnySummer>),
    Distinct(SlackHll),
}

impl Runner {
    fn new(mode: Mode, inner: Inner, cfg: SlackConfig, bucket_bits: u32, seed: u64) -> Result<Self, Error> {
        Ok(match mode {
            Mode::Exact => Runner::Sum(AnySummer::new(SumKind::Exact, cfg)?),
            Mode::Additive => Runner::Sum(AnySummer::new(SumKind::Additive, cfg)?),
            Mode::Mult => Runner::Sum(AnySummer::new(SumKind::Mult, cfg)?),
            Mode::MultCompact => Runner::Sum(AnySummer::new(SumKind::MultCompact, cfg)?),
            Mode::Max => Runner::Max(SlackMax::new(cfg)),
            Mode::Mean => Runner::Mean(AnySummer::new(inner.into(), cfg)?),
            Mode::Stddev => Runner::StdDev(SlackStdDev::with_summers(cfg, |c| AnySummer::new(inner.into(), c))?),
            Mode::Distinct => Runner::Distinct(SlackHll::new(cfg, bucket_bits, seed)?),
        })
    }

    fn update(&mut self, token: &str) -> Result<(), Failure> {
        if let Runner::Distinct(h) = self {
            h.update(token.as_bytes());
            return Ok(());
        }
        let x: i64 = token.parse().map_err(|_| Failure::Usage(format!("`{token}` is not an integer")))?;
        match self {
            Runner::Sum(s) | Runner::Mean(s) => s.update(x)?,
            Runner::Max(m) => m.update(x)?,
            Runner::StdDev(s) => s.update(x)?,
            Runner::Distinct(_) => unreachable!(),
        }
        Ok(())
    }

    /// Estimate fields of a query record.
    fn query(&self, window: u64) -> Map<String, Value> {
        let mut rec = Map::new();
        let (estimate, slack, extra): (Value, u64, Vec<(&str, Value)>) = match self {
            Runner::Sum(s) => {
                let out = s.output();
                let (v, exact) = rational_json(&out.estimate);
                (v, out.slack, exact.map(|e| ("estimate_exact", json!(e))).into_iter().collect())
            }
            Runner::Mean(s) => {
                let out = s.output();
                let (v, exact) = rational_json(&mean_output(&out));
                (v, out.slack, exact.map(|e| ("estimate_exact", json!(e))).into_iter().collect())
            }
            Runner::Max(m) => match m.output() {
                Ok(out) => (json!(out.estimate), out.slack, vec![]),
                Err(_) => (Value::Null, m.offset(), vec![]),
            },
            Runner::StdDev(s) => match s.output() {
                Ok(out) => {
                    let mean = rational_json(&out.mean).0;
                    (json!(out.sigma), out.slack, vec![("mean", mean), ("clamped", json!(out.clamped))])
                }
                Err(_) => {
                    let slack = s.inner().0.output().slack;
                    (Value::Null, slack, vec![])
                }
            },
            Runner::Distinct(h) => {
                let out = h.query();
                (json!(out.estimate), out.slack, vec![])
            }
        };
        rec.insert("estimate".into(), estimate);
        rec.insert("slack".into(), json!(slack));
        rec.insert("window".into(), json!(window + slack));
        for (k, v) in extra {
            rec.insert(k.into(), v);
        }
        rec
    }
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    let digits = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")).unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|_| Failure::Usage(format!("seed `{s}` is not a hex number")))
}

fn open_input(path: &Option<PathBuf>) -> Result<Box<dyn BufRead>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufReader::new(io::stdin().lock())),
    })
}

/// Calls `f(line_number, token)` for every whitespace-separated token.
fn for_each_token(input: Box<dyn BufRead>, mut f: impl FnMut(usize, &str) -> Result<(), Failure>) -> Result<(), Failure> {
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        for tok in line.split_whitespace() {
            f(n + 1, tok).map_err(|e| at_line(n + 1, e))?;
        }
    }
    Ok(())
}

struct RecordWriter<W: Write> {
    out: W,
    format: Format,
    header_done: bool,
}

impl<W: Write> RecordWriter<W> {
    fn write(&mut self, rec: &Map<String, Value>) -> io::Result<()> {
        match self.format {
            Format::Json => writeln!(self.out, "{}", Value::Object(rec.clone())),
            Format::Csv => {
                if !self.header_done {
                    let keys: Vec<&str> = rec.keys().map(String::as_str).collect();
                    writeln!(self.out, "{}", keys.join(","))?;
                    self.header_done = true;
                }
                let vals: Vec<String> = rec
                    .values()
                    .map(|v| match v {
                        Value::String(s) => s.clone(),
                        Value::Null => String::new(),
                        other => other.to_string(),
                    })
                    .collect();
                writeln!(self.out, "{}", vals.join(","))
            }
        }
    }
}

fn record(t: u64, fields: Map<String, Value>) -> Map<String, Value> {
    let mut rec = Map::new();
    rec.insert("t".into(), json!(t));
    rec.extend(fields);
    rec
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let cfg = args.window.config()?;
    let seed = parse_seed(&args.seed)?;
    if args.query_every == Some(0) {
        return Err(Failure::Usage("--query-every must be positive".into()));
    }
    let mut runner = Runner::new(args.mode, args.inner, cfg.clone(), args.window.bucket_bits, seed)?;
    let stdout = io::stdout();
    let mut w = RecordWriter { out: BufWriter::new(stdout.lock()), format: args.format, header_done: false };
    let mut t = 0u64;
    let mut last_query = None;
    for_each_token(open_input(&args.input)?, |_, tok| {
        runner.update(tok)?;
        t += 1;
        if args.query_every.is_some_and(|n| t.is_multiple_of(n)) {
            w.write(&record(t, runner.query(cfg.window())))?;
            last_query = Some(t);
        }
        Ok(())
    })?;
    if last_query != Some(t) {
        w.write(&record(t, runner.query(cfg.window())))?;
    }
    w.out.flush()?;
    Ok(())
}

/// Worst-case tracking for `verify`.
#[derive(Default)]
struct ErrorStats {
    max_abs: f64,
    max_rel: f64,
    violations: u64,
    steps: u64,
}

impl ErrorStats {
    fn observe(&mut self, est: f64, truth: f64, ok: bool) {
        let abs = (est - truth).abs();
        self.max_abs = self.max_abs.max(abs);
        if truth != 0.0 {
            self.max_rel = self.max_rel.max(abs / truth.abs());
        } else if est != 0.0 {
            self.max_rel = f64::INFINITY;
        }
        if !ok {
            self.violations += 1;
        }
        self.steps += 1;
    }
}

const FLOAT_SLACK: f64 = 1e-9;

fn big(x: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Whether a sum estimate meets its mode's guarantee against the true sum.
fn sum_ok(kind: SumKind, cfg: &SlackConfig, est: &BigRational, truth: &BigRational, scale: &BigRational) -> bool {
    match kind {
        SumKind::Exact => est == truth,
        SumKind::Additive => {
            let eps = cfg.epsilon().expect("validated").as_ratio();
            let bound = big(cfg.range() as i128 * cfg.window() as i128) * big(*eps.numer()) / big(*eps.denom());
            (est - truth).abs() < bound / scale
        }
        SumKind::Mult | SumKind::MultCompact => {
            let eps = cfg.epsilon().expect("validated").as_ratio();
            let one_eps = BigRational::new(BigInt::from(eps.numer() + eps.denom()), BigInt::from(*eps.denom()));
            if kind == SumKind::Mult {
                if truth.is_zero() {
                    est.is_zero()
                } else {
                    truth / &one_eps < *est && est <= truth
                }
            } else {
                let (e, s) = (est.to_f64().unwrap(), truth.to_f64().unwrap());
                let one_eps = one_eps.to_f64().unwrap();
                if s == 0.0 {
                    e == 0.0
                } else {
                    s / one_eps * (1.0 - FLOAT_SLACK) < e && e <= s * (1.0 + FLOAT_SLACK)
                }
            }
        }
    }
}

fn bound_description(mode: Mode, inner: Inner, cfg: &SlackConfig) -> Value {
    let eps = cfg.epsilon().map(|e| e.to_f64());
    let rw = cfg.range() as f64 * cfg.window() as f64;
    let kind = match mode {
        Mode::Exact => SumKind::Exact,
        Mode::Additive => SumKind::Additive,
        Mode::Mult => SumKind::Mult,
        Mode::MultCompact => SumKind::MultCompact,
        Mode::Mean | Mode::Stddev => inner.into(),
        Mode::Max => return json!({"kind": "exact", "value": 0}),
        Mode::Distinct => return json!({"kind": "equals-hll-of-suffix"}),
    };
    let e = eps.unwrap_or(0.0);
    match (mode, kind) {
        (_, SumKind::Exact) => json!({"kind": "exact", "value": 0}),
        (Mode::Stddev, SumKind::Additive) => json!({"kind": "absolute", "value": cfg.range() as f64 * e.sqrt()}),
        (Mode::Stddev, _) => json!({"kind": "factor", "value": (1.0 + e).sqrt()}),
        (Mode::Mean, SumKind::Additive) => json!({"kind": "absolute", "value": cfg.range() as f64 * e}),
        (_, SumKind::Additive) => json!({"kind": "absolute", "value": rw * e}),
        _ => json!({"kind": "relative", "value": e}),
    }
}

fn cmd_verify(args: &RunArgs) -> Result<bool, Failure> {
    let cfg = args.window.config()?;
    let seed = parse_seed(&args.seed)?;
    let mut runner = Runner::new(args.mode, args.inner, cfg.clone(), args.window.bucket_bits, seed)?;
    let mut oracle = WindowOracle::<i64>::new(cfg.clone());
    let mut ids = WindowOracle::<Vec<u8>>::new(cfg.clone());
    let mut stats = ErrorStats::default();
    let inner: SumKind = args.inner.into();
    for_each_token(open_input(&args.input)?, |_, tok| {
        runner.update(tok)?;
        match &runner {
            Runner::Distinct(h) => {
                ids.push(tok.as_bytes().to_vec());
                let out = h.query();
                let suffix = ids.suffix(out.slack)?;
                let mut fresh = HllSketch::new(args.window.bucket_bits, seed)?;
                for id in &suffix {
                    fresh.update(id);
                }
                let truth = ids.distinct(out.slack)? as f64;
                stats.observe(out.estimate, truth, fresh.query() == out.estimate);
            }
            Runner::Sum(s) => {
                oracle.push(tok.parse().expect("parsed by update"));
                let out = s.output();
                let truth = big(oracle.sum(out.slack)?);
                let ok = sum_ok(s.kind(), &cfg, &out.estimate, &truth, &big(1));
                stats.observe(out.estimate.to_f64().unwrap(), truth.to_f64().unwrap(), ok);
            }
            Runner::Mean(s) => {
                oracle.push(tok.parse().expect("parsed by update"));
                let out = s.output();
                let est = mean_output(&out);
                let truth = oracle.mean(out.slack)?;
                let scale = big(out.covered as i128);
                let ok = sum_ok(s.kind(), &cfg, &est, &truth, &scale);
                stats.observe(est.to_f64().unwrap(), truth.to_f64().unwrap(), ok);
            }
            Runner::Max(m) => {
                oracle.push(tok.parse().expect("parsed by update"));
                let out = m.output()?;
                let truth = oracle.max(out.slack)?.expect("non-empty");
                stats.observe(out.estimate as f64, truth as f64, out.estimate == truth);
            }
            Runner::StdDev(s) => {
                oracle.push(tok.parse().expect("parsed by update"));
                let slack = s.inner().0.output().slack;
                if cfg.window() + slack < 2 {
                    return Ok(());
                }
                let out = s.output()?;
                let truth = oracle.stddev(out.slack)?;
                let ok = stddev_ok(inner, &cfg, out.sigma, truth);
                stats.observe(out.sigma, truth, ok);
            }
        }
        Ok(())
    })?;
    let summary = json!({
        "steps": stats.steps,
        "max_abs_error": stats.max_abs,
        "max_rel_error": if stats.max_rel.is_finite() { json!(stats.max_rel) } else { Value::Null },
        "bound": bound_description(args.mode, args.inner, &cfg),
        "violations": stats.violations,
    });
    let mut w = RecordWriter { out: io::stdout().lock(), format: args.format, header_done: false };
    let Value::Object(map) = summary else { unreachable!() };
    w.write(&map)?;
    Ok(stats.violations == 0)
}

fn stddev_ok(inner: SumKind, cfg: &SlackConfig, est: f64, truth: f64) -> bool {
    let eps = cfg.epsilon().map_or(0.0, |e| e.to_f64());
    match inner {
        SumKind::Exact => (est - truth).abs() <= FLOAT_SLACK * truth.max(1.0),
        SumKind::Additive => (est - truth).abs() < cfg.range() as f64 * eps.sqrt() * (1.0 + FLOAT_SLACK),
        SumKind::Mult | SumKind::MultCompact => {
            let f = (1.0 + eps).sqrt();
            truth / f * (1.0 - FLOAT_SLACK) < est && est <= truth * f * (1.0 + FLOAT_SLACK)
        }
    }
}

fn cmd_space(args: &SpaceArgs) -> Result<(), Failure> {
    let cfg = args.window.config()?;
    let mode = match args.mode {
        Mode::Exact => SpaceMode::Exact,
        Mode::Additive => SpaceMode::Additive,
        Mode::Mult => SpaceMode::Mult,
        Mode::MultCompact => SpaceMode::MultCompact,
        Mode::Max => SpaceMode::Max,
        Mode::Distinct => shll_mode(args.window.bucket_bits)?,
        Mode::Mean | Mode::Stddev => {
            return Err(Failure::Usage("space reports cover the underlying sketches; use a summing mode".into()))
        }
    };
    let report = algo_bits(&cfg, mode)?;
    let text = serde_json::to_string(&report).map_err(|e| Failure::Usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
        Command::Space(a) => cmd_space(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("slackwin: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Range(m)) => {
            eprintln!("slackwin: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("slackwin: {e}");
            ExitCode::from(2)
        }
    }
}
