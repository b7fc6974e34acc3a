//! Command-line entry point. Exit codes: 0 when every verdict passes, 1 when
//! any fails, 2 on usage or input errors.

mod commands;
mod manifest;
#[cfg(test)]
mod tests;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use manifest::{now_ms, RunManifest};
use stein_ising::Verdict;

#[derive(Debug, Parser)]
#[command(name = "stein-ising", version, about = "Compare Ising stationary laws via Glauber dynamics")]
pub struct Cli {
    /// Master seed; every random stream is derived from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: machine parallelism).
    #[arg(long, global = true, env = "STEIN_ISING_JOBS")]
    pub jobs: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// `key = value` file. For `experiment` it is an experiment config; for
    /// other subcommands each key sets the flag of the same name.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and write it in edge-list text form.
    GenGraph(GenGraphArgs),
    /// Spectrum, expansion and the deviation bound for a regular graph.
    Spectral(SpectralArgs),
    /// Exact-enumeration self-check.
    Verify(VerifyArgs),
    /// Run a sampler and record the magnetization law.
    Sample(SampleArgs),
    /// Coupled restricted chains: contraction check.
    Couple(CoupleArgs),
    /// Birth-death walk: hitting probabilities and tail envelope.
    Birthdeath(BirthDeathArgs),
    /// Run a scripted study.
    Experiment(ExperimentArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenGraph(_) => "gen-graph",
            Command::Spectral(_) => "spectral",
            Command::Verify(_) => "verify",
            Command::Sample(_) => "sample",
            Command::Couple(_) => "couple",
            Command::Birthdeath(_) => "birthdeath",
            Command::Experiment(_) => "experiment",
        }
    }
}

const SUBCOMMANDS: &[&str] = &["gen-graph", "spectral", "verify", "sample", "couple", "birthdeath", "experiment"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Random,
    Cliques,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerArg {
    Plain,
    Restricted,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct GenGraphArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value = "random")]
    pub kind: GraphKind,
    /// Output file name inside the output directory.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct SpectralArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct SampleArgs {
    #[arg(long, default_value_t = 64)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,
    /// Sample a random `d`-regular model with couplings `beta/d`.
    #[arg(long, conflicts_with = "graph")]
    pub d: Option<usize>,
    /// Regular graph file; couplings `beta/d`.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, value_enum, default_value = "plain")]
    pub sampler: SamplerArg,
    /// Single-site updates between samples (default `n`).
    #[arg(long)]
    pub thin: Option<u64>,
    #[arg(long)]
    pub burn_in: Option<u64>,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct CoupleArgs {
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 1.2)]
    pub beta: f64,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Checkpoints in single-site updates (default `n, 5n, 10n, 20n, 50n`).
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Vec<u64>,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct BirthDeathArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 10)]
    pub r: usize,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 10_000)]
    pub runs: usize,
    #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
    pub ks: Vec<u64>,
}

#[derive(Debug, Args, serde::Serialize)]
#[command(args_override_self = true)]
pub struct ExperimentArgs {
    /// One of the study names listed by `--help`.
    pub name: String,
}

/// What a subcommand produced.
pub struct Outcome {
    pub config: serde_json::Value,
    pub seed: u64,
    pub files: Vec<PathBuf>,
    pub verdicts: Vec<Verdict>,
    /// Stem of the manifest file.
    pub stem: String,
}

/// Read `key = value` pairs, ignoring `#` comments.
fn config_flags(path: &PathBuf) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", k + 1);
        };
        out.push(format!("--{}", key.trim().replace('_', "-")).into());
        out.push(value.trim().replace(' ', "").into());
    }
    Ok(out)
}

/// Parse argv; a config file for a non-experiment subcommand is spliced in
/// right after the subcommand so explicit flags still win.
fn parse(argv: Vec<OsString>) -> std::result::Result<Result<Cli>, clap::Error> {
    let cli = Cli::try_parse_from(&argv)?;
    let Some(path) = cli.config.clone() else { return Ok(Ok(cli)) };
    if matches!(cli.command, Command::Experiment(_)) {
        return Ok(Ok(cli));
    }
    let extra = match config_flags(&path) {
        Ok(e) => e,
        Err(e) => return Ok(Err(e)),
    };
    let pos = argv
        .iter()
        .skip(1)
        .position(|a| a.to_str().is_some_and(|s| SUBCOMMANDS.contains(&s)))
        .map(|p| p + 1)
        .expect("subcommand present after a successful parse");
    let mut spliced: Vec<OsString> = argv[..=pos].to_vec();
    spliced.extend(extra);
    spliced.extend(argv[pos + 1..].iter().cloned());
    Ok(Ok(Cli::try_parse_from(spliced)?))
}

fn execute(cli: &Cli) -> Result<Outcome> {
    if let Some(j) = cli.jobs {
        if j == 0 {
            bail!("--jobs must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(j).build_global().context("configuring worker pool")?;
    }
    std::fs::create_dir_all(&cli.out_dir).with_context(|| format!("creating {}", cli.out_dir.display()))?;
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::GenGraph(a) => commands::gen_graph(a, seed, &cli.out_dir),
        Command::Spectral(a) => commands::spectral(a, seed, &cli.out_dir),
        Command::Verify(a) => commands::verify(a, seed, &cli.out_dir),
        Command::Sample(a) => commands::sample(a, seed, &cli.out_dir),
        Command::Couple(a) => commands::couple(a, seed, &cli.out_dir),
        Command::Birthdeath(a) => commands::birthdeath(a, seed, &cli.out_dir),
        Command::Experiment(a) => commands::experiment(a, cli.seed, cli.config.as_ref(), &cli.out_dir),
    }
}

/// Run the tool on `argv` (program name first) and return the exit code.
pub fn run(argv: Vec<OsString>) -> u8 {
    let cli = match parse(argv) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            return 2;
        }
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let started = now_ms();
    let outcome = match execute(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 2;
        }
    };
    for v in &outcome.verdicts {
        println!("{}", v.to_json());
    }
    let all_pass = stein_ising::report::all_pass(&outcome.verdicts);
    let manifest = RunManifest::digests(&cli.out_dir, &outcome.files).map(|outputs| RunManifest {
        subcommand: cli.command.name().to_string(),
        config: outcome.config,
        seed: outcome.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at_unix_ms: started,
        finished_at_unix_ms: now_ms(),
        outputs,
        all_pass,
    });
    let written = manifest.and_then(|m| m.write(&cli.out_dir.join(format!("{}.manifest.json", outcome.stem))));
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return 2;
    }
    if all_pass {
        0
    } else {
        1
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os().collect()))
}
