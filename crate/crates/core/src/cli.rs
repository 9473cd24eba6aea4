//! The `fdrlab` command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 for
//! usage, parse and configuration errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::distributions::AlternativeModel;
use crate::error::{FdrError, Result};
use crate::montecarlo::{self, SimConfig};
use crate::procedures::{self, PValueBatch};
use crate::theory::{self, FigureKind};

#[derive(Debug, Parser)]
#[command(name = "fdrlab", version, about = "False discovery rate procedures, asymptotics and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bh,
    BhStrict,
    Bhs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply a step-up procedure to a CSV of p-values.
    Reject {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "bh")]
        method: Method,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Asymptotic rejection fraction and, with --delta/--x, adaptive bounds.
    Theory {
        #[arg(long)]
        model: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long, conflicts_with_all = ["delta", "x"])]
        q: Option<f64>,
        #[arg(long, requires = "x")]
        delta: Option<f64>,
        #[arg(long, requires = "delta")]
        x: Option<f64>,
    },
    /// Run a simulation described by a JSON config (file path or inline).
    Simulate {
        #[arg(long)]
        config: String,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        /// Include wall-clock time in the report.
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the verification battery.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write figure tables as CSV files into a directory.
    Figures {
        /// fig1, fig2 or fig3; all three when omitted.
        #[arg(long)]
        which: Option<FigureKind>,
        #[arg(long)]
        model: String,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out`, diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (stdout, stderr) = (std::io::stdout(), std::io::stderr());
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

fn io_err(path: &Path, e: std::io::Error) -> FdrError {
    FdrError::Config(format!("{}: {e}", path.display()))
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| io_err(p, e)),
        None => out.write_all(text.as_bytes()).map_err(|e| FdrError::Config(e.to_string())),
    }
}

fn in_thread_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(FdrError::Config("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| FdrError::Config(e.to_string())),
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Reject { input, method, q, delta, x, out: path } => {
            let text = fs::read_to_string(&input).map_err(|e| io_err(&input, e))?;
            let batch = parse_pvalue_csv(&text)?;
            let report = reject_report(&batch, method, q, delta, x)?;
            emit(&report, path.as_deref(), out)?;
            Ok(0)
        }
        Command::Theory { model, gamma, q, delta, x } => {
            let model: AlternativeModel = model.parse()?;
            let doc = theory_json(&model, gamma, q, delta.zip(x))?;
            emit(&(serde_json::to_string_pretty(&doc).expect("json") + "\n"), None, out)?;
            Ok(0)
        }
        Command::Simulate { config, seed, threads, timing, out: path } => {
            let text = if config.trim_start().starts_with('{') {
                config
            } else {
                let p = Path::new(&config);
                fs::read_to_string(p).map_err(|e| io_err(p, e))?
            };
            let mut cfg: SimConfig =
                serde_json::from_str(&text).map_err(|e| FdrError::Parse(format!("config: {e}")))?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let start = Instant::now();
            let mut report = in_thread_pool(threads, || montecarlo::run(&cfg))??;
            if timing {
                report.wall_time_secs = Some(start.elapsed().as_secs_f64());
            }
            emit(&(report.to_json() + "\n"), path.as_deref(), out)?;
            Ok(0)
        }
        Command::Verify { quick, seed, threads } => {
            let checks = in_thread_pool(threads, || montecarlo::verify_suite(quick, seed))??;
            let mut all = true;
            let mut text = String::new();
            for c in &checks {
                all &= c.passed;
                let tag = if c.passed { "PASS" } else { "FAIL" };
                text.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
            }
            emit(&text, None, out)?;
            Ok(if all { 0 } else { 1 })
        }
        Command::Figures { which, model, gamma, delta, out: dir } => {
            let model: AlternativeModel = model.parse()?;
            let kinds: Vec<FigureKind> = match which {
                Some(k) => vec![k],
                None => FigureKind::ALL.to_vec(),
            };
            let tables = kinds
                .iter()
                .map(|&k| theory::figure_data(k, &model, gamma, delta, &k.default_grid()))
                .collect::<Result<Vec<_>>>()?;
            fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
            for table in tables {
                let path = dir.join(format!("{}.csv", table.kind.name()));
                fs::write(&path, table.to_csv()).map_err(|e| io_err(&path, e))?;
                writeln!(out, "{}", path.display()).map_err(|e| FdrError::Config(e.to_string()))?;
            }
            Ok(0)
        }
    }
}

/// Reads a header-led CSV with a `p` column and an optional `is_null`
/// column of 0/1 flags. Empty input is an empty batch.
pub fn parse_pvalue_csv(text: &str) -> Result<PValueBatch> {
    if text.trim().is_empty() {
        return PValueBatch::new(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| FdrError::Parse(e.to_string()))?.clone();
    let p_col = headers
        .iter()
        .position(|h| h == "p")
        .ok_or_else(|| FdrError::Parse("missing column 'p'".into()))?;
    let null_col = headers.iter().position(|h| h == "is_null");
    let (mut values, mut labels) = (Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| FdrError::Parse(e.to_string()))?;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let p: f64 = cell(p_col)
            .parse()
            .map_err(|_| FdrError::Parse(format!("row {}: bad p-value '{}'", row + 1, cell(p_col))))?;
        values.push(p);
        if let Some(c) = null_col {
            labels.push(match cell(c) {
                "1" => true,
                "0" => false,
                other => return Err(FdrError::Parse(format!("row {}: is_null must be 0 or 1, got '{other}'", row + 1))),
            });
        }
    }
    if null_col.is_some() {
        PValueBatch::with_labels(values, labels)
    } else {
        PValueBatch::new(values)
    }
}

fn required(v: Option<f64>, flag: &str, method: &str) -> Result<f64> {
    v.ok_or_else(|| FdrError::Config(format!("--{flag} is required for method {method}")))
}

/// The `reject` output: `index,p,rejected` rows followed by a `#` summary
/// line. Numbers use the shortest representation that round-trips.
pub fn reject_report(
    batch: &PValueBatch,
    method: Method,
    q: Option<f64>,
    delta: Option<f64>,
    x: Option<f64>,
) -> Result<String> {
    let outcome = match method {
        Method::Bh => procedures::bh_count(batch, required(q, "q", "bh")?)?,
        Method::BhStrict => procedures::bh_count_strict(batch, required(q, "q", "bh-strict")?)?,
        Method::Bhs => procedures::bhs(batch, required(delta, "delta", "bhs")?, required(x, "x", "bhs")?)?,
    };
    let mut flags = vec![false; batch.len()];
    for &i in &outcome.rejected {
        flags[i] = true;
    }
    let mut text = String::from("index,p,rejected\n");
    for (i, (p, r)) in batch.values().iter().zip(&flags).enumerate() {
        text.push_str(&format!("{i},{p},{}\n", *r as u8));
    }
    text.push_str(&format!("# R={} threshold={} q_used={}", outcome.r, outcome.threshold, outcome.q_used));
    if let Some(g) = outcome.gamma_hat {
        text.push_str(&format!(" gamma_hat={g}"));
    }
    if let Some(p) = outcome.proportions {
        let pi2 = p.pi2.map_or_else(|| "NA".to_string(), |v| v.to_string());
        text.push_str(&format!(" S={} pi1={} pi2={pi2} pi3={}", p.s, p.pi1, p.pi3));
    }
    text.push('\n');
    Ok(text)
}

/// JSON document for `theory`: the asymptotic summary at `q`, or at the
/// limiting adaptive level together with the adaptive bounds.
pub fn theory_json(
    model: &AlternativeModel,
    gamma: f64,
    q: Option<f64>,
    bhs: Option<(f64, f64)>,
) -> Result<Value> {
    match (q, bhs) {
        (Some(q), None) => {
            let summary = theory::rho(model, q, gamma)?;
            let mut doc = json!({
                "model": model.to_string(),
                "summary": summary,
                "power_limit": summary.power_limit(),
            });
            if summary.borderline {
                doc["borderline_limits"] = json!(theory::borderline_limits(q, gamma));
            }
            Ok(doc)
        }
        (None, Some((delta, x))) => {
            let mut doc = json!({ "model": model.to_string(), "delta": delta, "x": x });
            match theory::bhs_bounds(model, gamma, delta, x) {
                Ok(bounds) => {
                    doc["summary"] = json!(theory::rho(model, bounds.q_limit, gamma)?);
                    doc["bounds"] = json!(bounds);
                }
                Err(FdrError::PremiseViolated(msg)) => {
                    doc["bounds"] = Value::Null;
                    doc["diagnostic"] = json!(msg);
                }
                Err(e) => return Err(e),
            }
            Ok(doc)
        }
        _ => Err(FdrError::Config("give either --q or both --delta and --x".into())),
    }
}
