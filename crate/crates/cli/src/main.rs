//! `stablerate`: reproducible experiment runs over the core library.
//!
//! Exit codes: 0 pass, 1 assertion failure, 2 usage error, 3 numeric error.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numeric(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
        }
    }
}

impl From<stablerate::Error> for CliError {
    fn from(e: stablerate::Error) -> Self {
        use stablerate::Error as E;
        match e {
            E::Domain(_) | E::Model(_) | E::Parse(_) | E::Witness(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Numeric(format!("serialization: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(format!("csv: {e}"))
    }
}

/// Outcome of a command that ran to completion.
pub struct Verdict {
    pub passed: bool,
    pub summary: String,
}

impl Verdict {
    pub fn pass(summary: impl Into<String>) -> Self {
        Verdict { passed: true, summary: summary.into() }
    }

    pub fn check(passed: bool, summary: impl Into<String>) -> Self {
        Verdict { passed, summary: summary.into() }
    }
}

#[derive(Parser, Debug)]
#[command(name = "stablerate", version, about = "Heavy-tailed stable limit experiments: samples, exact TV, rates, decompositions, probes")]
struct Cli {
    /// JSON experiment config, or a run manifest to reproduce.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts (overrides the config; default `out`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a sample batch from a model, its stable limit, or a normalized sum.
    Sample(SampleArgs),
    /// Total variation between a normalized sum and its stable limit.
    Tv(TvArgs),
    /// Δ_n sequence for symmetric Pareto against its closed-form limit.
    Delta(DeltaArgs),
    /// TV sweep over n with a log–log rate fit.
    Rate(RateArgs),
    /// Light or heavy mixture decomposition with χ² certification.
    Decompose(DecomposeArgs),
    /// One-step gap, gradient-decay, generator-error or bound probes.
    Probe(ProbeArgs),
    /// Summarize the run manifests in an output directory.
    Report(ReportArgs),
}

/// Accepts integers written as `1000`, `1e6` or `2^14`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let v = if let Some((b, e)) = s.split_once('^') {
        let b: f64 = b.trim().parse().map_err(|e| format!("'{s}': {e}"))?;
        let e: f64 = e.trim().parse().map_err(|e| format!("'{s}': {e}"))?;
        b.powf(e)
    } else {
        s.trim().parse::<f64>().map_err(|e| format!("'{s}': {e}"))?
    };
    if !(v >= 0.0 && v.fract() == 0.0 && v < 9.0e15) {
        return Err(format!("'{s}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

fn parse_usize(s: &str) -> Result<usize, String> {
    parse_count(s).map(|v| v as usize)
}

#[derive(Args, Debug)]
pub struct SampleArgs {
    /// Model spec, e.g. `pareto:d=1,alpha=1.5`.
    #[arg(long)]
    pub model: Option<String>,
    /// Number of points.
    #[arg(long = "n", value_parser = parse_usize)]
    pub count: Option<usize>,
    /// `model`, `limit` or `sum`.
    #[arg(long)]
    pub source: Option<String>,
    /// Number of summands for `--source sum`.
    #[arg(long, value_parser = parse_count)]
    pub terms: Option<u64>,
}

#[derive(Args, Debug)]
pub struct TvArgs {
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long = "n", value_parser = parse_count)]
    pub n: Option<u64>,
    /// `exact` (d = 1) or `histogram`.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, value_parser = parse_usize)]
    pub nodes: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DeltaArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_parser = parse_count)]
    pub n_min: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub n_max: Option<u64>,
    /// `printed` (default) or `corrected`.
    #[arg(long)]
    pub limit: Option<String>,
    /// Relative tolerance on the final row.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Args, Debug)]
pub struct RateArgs {
    /// `pareto-a1`, `pareto-a15` or `pareto-a08`; omit to use `--model`.
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, value_parser = parse_count)]
    pub n_min: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub n_max: Option<u64>,
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, value_parser = parse_usize)]
    pub nodes: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub bins: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub model: Option<String>,
    /// `light` or `heavy`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub alpha_tilde: Option<f64>,
    #[arg(long, value_parser = parse_usize)]
    pub samples: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub bins: Option<usize>,
    /// Override the switch probability (negative controls).
    #[arg(long)]
    pub switch: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    /// `gap`, `gradient`, `generator` or `bound`.
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Test function, e.g. `cos`, `holder:2.1`, `tanh:0.001`, or `@name` from the registry.
    #[arg(long)]
    pub f: Option<String>,
    /// Global n for the gradient probe.
    #[arg(long = "n", value_parser = parse_count)]
    pub n: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub n_min: Option<u64>,
    #[arg(long, value_parser = parse_count)]
    pub n_max: Option<u64>,
    #[arg(long, value_parser = parse_usize)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub x: Option<f64>,
    /// Derivative order for the gradient probe.
    #[arg(long)]
    pub order: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Directory holding `*.manifest.json` files (default: the output directory).
    #[arg(long)]
    pub dir: Option<PathBuf>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::Tv(_) => "tv",
        Command::Delta(_) => "delta",
        Command::Rate(_) => "rate",
        Command::Decompose(_) => "decompose",
        Command::Probe(_) => "probe",
        Command::Report(_) => "report",
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    cfg.seed = Some(cfg.seed());
    if let Some(d) = &cli.out_dir {
        cfg.output_dir = Some(d.display().to_string());
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    let dir = PathBuf::from(cfg.output_dir.clone().unwrap_or_else(|| "out".into()));
    let name = command_name(&cli.command);
    let workers = cfg.workers.unwrap_or(0);
    let start = std::time::Instant::now();
    let outcome = stablerate::rng::with_workers(workers, || -> Result<(Verdict, output::Output, ExperimentConfig), CliError> {
        let mut cfg = cfg;
        let (verdict, out) = match &cli.command {
            Command::Sample(a) => commands::sample(&mut cfg, a, &dir)?,
            Command::Tv(a) => commands::tv(&mut cfg, a, &dir)?,
            Command::Delta(a) => commands::delta(&mut cfg, a, &dir)?,
            Command::Rate(a) => commands::rate(&mut cfg, a, &dir)?,
            Command::Decompose(a) => commands::decompose(&mut cfg, a, &dir)?,
            Command::Probe(a) => commands::probe(&mut cfg, a, &dir)?,
            Command::Report(a) => commands::report(&mut cfg, a, &dir)?,
        };
        Ok((verdict, out, cfg))
    })?;
    let (verdict, out, cfg) = outcome;
    let code = if verdict.passed { 0 } else { 1 };
    let hash = out.hash().to_string();
    let manifest = out.manifest(name, &cfg, start.elapsed().as_secs_f64(), if verdict.passed { "pass" } else { "fail" }, code)?;
    println!("{} {name}: {}", if verdict.passed { "PASS" } else { "FAIL" }, verdict.summary);
    println!("config_hash={hash} manifest={}", manifest.display());
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("stablerate: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => 2,
                CliError::Numeric(_) => 3,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_scientific_and_powers() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("2^14"), Ok(16_384));
        assert_eq!(parse_count("1000"), Ok(1000));
        assert!(parse_count("1.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn core_errors_map_to_exit_classes() {
        assert!(matches!(CliError::from(stablerate::Error::Parse("x".into())), CliError::Usage(_)));
        assert!(matches!(
            CliError::from(stablerate::Error::Numeric { what: "x".into(), achieved: 1.0 }),
            CliError::Numeric(_)
        ));
    }
}
