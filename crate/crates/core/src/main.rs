use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use dixlab::harness::{
    emit_report, parse_config, run_experiment, run_invariant_suite, OutputFormat, RunReport, MODEL_KINDS,
    SCHEMA_VERSION,
};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "dixlab", version, about = "Estimate singular traces of model operators")]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's output format.
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the accepted model kinds and exit.
    #[arg(long)]
    list_models: bool,
    /// Run only the invariant suite.
    #[arg(long)]
    check: bool,
}

fn budget_cap() -> Result<Option<u64>, String> {
    match std::env::var("DIXLAB_BUDGET_MB") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("DIXLAB_BUDGET_MB={v:?} is not a whole number")),
        Err(_) => Ok(None),
    }
}

fn peak_rss_kb() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    line.split_whitespace().nth(1)?.parse().ok()
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}

fn run(cli: Cli) -> Result<u8, (u8, String)> {
    if cli.list_models {
        for kind in MODEL_KINDS {
            println!("{kind}");
        }
        return Ok(0);
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| (EXIT_CONFIG, format!("--threads: {e}")))?;
    }
    let cap = budget_cap().map_err(|e| (EXIT_CONFIG, e))?;
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| (EXIT_IO, format!("{}: {e}", path.display())))?;
            Some(parse_config(&text).map_err(|e| (EXIT_CONFIG, format!("invalid config {}:\n{e}", path.display())))?)
        }
        None => None,
    };
    let format = cli.format.or(config.as_ref().map(|c| c.format)).unwrap_or_default();
    let seed = cli.seed.or(config.as_ref().map(|c| c.seed)).unwrap_or(0);
    let started = Instant::now();
    let report = if cli.check {
        RunReport {
            schema_version: SCHEMA_VERSION,
            rows: Vec::new(),
            measurability: None,
            invariants: Some(run_invariant_suite(seed)),
            truncated: None,
        }
    } else {
        let Some(mut config) = config else {
            return Err((EXIT_CONFIG, "--config is required unless --check or --list-models is given".into()));
        };
        config.seed = seed;
        run_experiment(&config, cap)
    };
    let bytes = emit_report(&report, format).map_err(|e| (EXIT_IO, e.to_string()))?;
    write_output(&bytes, cli.out.as_ref()).map_err(|e| (EXIT_IO, format!("writing report: {e}")))?;
    let elapsed = started.elapsed().as_secs_f64();
    match peak_rss_kb() {
        Some(kb) => eprintln!("wall-clock {elapsed:.3} s, peak RSS {} MiB", kb / 1024),
        None => eprintln!("wall-clock {elapsed:.3} s"),
    }
    Ok(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("dixlab: {msg}");
            ExitCode::from(code)
        }
    }
}
