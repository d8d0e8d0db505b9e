//! `qdirac`: normalize expressions, check assertion files, run benchmarks.

use std::path::PathBuf;
use std::process::ExitCode;

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use qdirac_core::bench;
use qdirac_core::corpus::{self, CheckConfig, Report, Verdict};
use qdirac_core::oracle::OracleConfig;
use qdirac_core::rewrite::{operate_reduce_with, EngineConfig};
use qdirac_core::syntax::{self, Ctx, Value};

// Writes to stdout, ignoring a closed pipe.
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! outp {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Parser, Debug)]
#[command(name = "qdirac", version, about = "Symbolic Dirac-notation rewriting and circuit equivalence checking")]
struct Cli {
    /// Oracle comparison tolerance.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    /// Sampled environments for terms with free atoms.
    #[arg(long, global = true, default_value_t = 3)]
    samples: usize,
    /// Seed for sampled environments.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Print rewrite traces.
    #[arg(long, global = true)]
    trace: bool,
    /// Structured output.
    #[arg(long, global = true)]
    json: bool,
    /// Cross-check with the dense oracle (default on for check, off for bench).
    #[arg(long, global = true, value_enum, require_equals = true, num_args = 0..=1, default_missing_value = "on")]
    oracle: Option<Switch>,
    /// Rewrite step budget.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    fuel: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Print the normal form of an expression.
    Normalize {
        expr: String,
    },
    /// Run assertion files.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Record wall times in reports.
        #[arg(long)]
        timing: bool,
    },
    /// Time the symbolic and dense paths.
    Bench {
        /// Cases to run; all when empty.
        cases: Vec<String>,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
    },
}

fn oracle_cfg(cli: &Cli) -> OracleConfig {
    OracleConfig { samples: cli.samples, tol: cli.tol, seed: cli.seed, hyps: Vec::new() }
}

fn input_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn normalize(cli: &Cli, expr: &str) -> ExitCode {
    let value = match syntax::parse_value(expr, &Ctx::default(), 1) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    match value {
        Value::Scalar(s) => {
            if cli.json {
                out!("{}", serde_json::json!({ "input": expr, "scalar": s.to_string() }));
            } else {
                out!("{s}");
            }
            ExitCode::SUCCESS
        }
        Value::Mix(m) => {
            if cli.json {
                out!("{}", serde_json::json!({ "input": expr, "mix": m }));
            } else {
                out!("{m}");
            }
            ExitCode::SUCCESS
        }
        Value::Term(t) => {
            let ecfg = EngineConfig { fuel: cli.fuel, trace: cli.trace, ..EngineConfig::default() };
            let (nf, red) = match operate_reduce_with(&t, &ecfg) {
                Ok(x) => x,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            let text = syntax::render_nf(&nf);
            if cli.json {
                let doc = serde_json::json!({
                    "input": expr,
                    "output": text,
                    "steps": red.steps,
                    "normal_form": nf,
                    "trace": red.trace,
                });
                out!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                if let Some(tr) = &red.trace {
                    outp!("{}", tr.to_text());
                }
                out!("{text}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn check(cli: &Cli, files: &[PathBuf], timing: bool) -> ExitCode {
    let cfg = CheckConfig {
        oracle: oracle_cfg(cli),
        use_oracle: cli.oracle != Some(Switch::Off),
        timing,
        trace: cli.trace,
        fuel: cli.fuel,
    };
    let mut all: Vec<(String, Vec<Report>)> = Vec::new();
    for f in files {
        match corpus::check_path(f, &cfg) {
            Ok(r) => all.push((f.display().to_string(), r)),
            Err(e) => return input_error(format!("{}: {e}", f.display())),
        }
    }
    let reports: Vec<Report> = all.iter().flat_map(|(_, r)| r.iter().cloned()).collect();
    if cli.json {
        let doc: Vec<serde_json::Value> =
            all.iter().map(|(f, r)| serde_json::json!({ "file": f, "reports": r })).collect();
        out!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        for (f, rs) in &all {
            out!("{f}");
            for r in rs {
                out!("  {r}");
                if let Some(t) = &r.trace {
                    for line in t.lines() {
                        out!("    {line}");
                    }
                }
            }
        }
        let count = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
        out!("{} passed, {} failed, {} errors", count(Verdict::Pass), count(Verdict::Fail), count(Verdict::Error));
    }
    ExitCode::from(corpus::exit_code(&reports) as u8)
}

fn run_bench(cli: &Cli, cases: &[String], repeat: usize) -> ExitCode {
    let names: Vec<String> =
        if cases.is_empty() { bench::CASES.iter().map(|s| s.to_string()).collect() } else { cases.to_vec() };
    let mut rows = Vec::new();
    for n in &names {
        match bench::run_case(n, repeat, &oracle_cfg(cli)) {
            Ok(r) => rows.push(r),
            Err(e) => return input_error(e),
        }
    }
    if cli.json {
        out!("{}", serde_json::to_string_pretty(&rows).expect("serializable"));
    } else {
        out!("{:<12} {:>14} {:>22}", "case", "symbolic (ms)", "computational (ms)");
        for r in &rows {
            let dense = match (r.dense_ms, &r.dense_note) {
                (Some(ms), _) => format!("{ms:.3}"),
                (None, Some(note)) => note.clone(),
                (None, None) => "-".into(),
            };
            out!("{:<12} {:>14.3} {:>22}", r.case, r.symbolic_ms, dense);
        }
    }
    let ok = rows.iter().all(|r| r.symbolic_ok && r.dense_ok != Some(false));
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    qdirac_core::par::in_pool(|| match &cli.cmd {
        Cmd::Normalize { expr } => normalize(&cli, expr),
        Cmd::Check { files, timing } => check(&cli, files, *timing),
        Cmd::Bench { cases, repeat } => run_bench(&cli, cases, *repeat),
    })
}
