//! `displearn`: experiment runner writing CSV/JSON data files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod failure;
mod output;

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::*;
use failure::Failure;
use output::Format;

const ARTIFACT_HELP: &str = "\
Every CSV starts with two comment lines:
  # displearn <kind> schema v1
  # config: <the resolved config as JSON>
JSON output is one document {\"schema\", \"config\", \"tables\": {name: {kind, columns, rows}}}.

Exit codes: 0 success, 1 i/o error, 2 config error,
3 numeric-validity error (only with --strict, or internal failures).";

#[derive(Parser)]
#[command(name = "displearn", version, about = "Learning random displacement channels: sampling, estimation and bounds")]
#[command(after_long_help = ARTIFACT_HELP)]
struct Cli {
    /// JSON config file with a "command" field; replaces the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed for all random streams.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (output does not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path; stdout when absent. Multi-table CSV output writes
    /// `<stem>_<table>.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Exit with code 3 when results violate a numeric premise.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Option<Cmd>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Density and characteristic-function grids of the five-peak channel.
    #[command(after_long_help = "\
Tables:
  density: alpha_re, alpha_im, p_true, p_ea, p_vh
  charfn:  beta_re, beta_im, lambda_re, lambda_im, lambda_ea_re, lambda_ea_im,
           lambda_vh_re, lambda_vh_im, est_ea_re, est_ea_im, se_ea,
           est_vh_re, est_vh_im, se_vh
p_ea/p_vh are outcome densities; lambda_ea/lambda_vh the outcome
characteristic functions; est_* are Monte Carlo estimates of lambda.
--strict: every density must integrate to 1 +- 1e-4 on the grid.")]
    Fig2(Fig2Params),
    /// Lower/upper sample-complexity bounds and their ratio on an (n, kappa) or (n, r) grid.
    #[command(after_long_help = "\
Columns: n, kappa, eps, delta, sigma, r, T_b, T_a, log10_N_lower,
log10_N_upper, log10_ratio, valid_flags
valid_flags is `ok` or the failed premises joined by `|`.
--strict: any invalid cell.")]
    Advantage(AdvantageParams),
    /// Empirical failure rate at the Hoeffding sample count.
    #[command(after_long_help = "\
Columns: r, T_a, r_eff, beta_norm_sq, eps, delta, N, trials, failure_rate,
within_delta
--strict: any failure_rate above delta.")]
    Complexity(ComplexityParams),
    /// Tail probability Q(n, n/0.99) of the hidden peak location.
    #[command(after_long_help = "\
Columns: n, tail, log10_tail, bound, below_half, below_bound
bound is (k e^(1-k))^n with k = 1/0.99.
--strict: any value above 0.5 or above the bound.")]
    Tail(TailParams),
    /// Phase-diffusion and crosstalk envelopes |g|^2 against |beta|^2.
    #[command(after_long_help = "\
Columns: kind, angle_deg, beta_norm_sq, g_sq, noiseless_g_sq, ratio, overhead
kind is phase_diffusion or crosstalk; overhead = 1/g_sq.")]
    Noise(NoiseParams),
    /// Hypothesis-testing game between a hidden three-peak channel and the depolarizing one.
    #[command(after_long_help = "\
Columns: label, rounds, N, success_rate, ci_low, ci_high, in_range_fraction,
in_range_success_rate, std_error
label is main or control (eps0 = 0 at the main run's N); ci_* is a 95%
Wilson interval.")]
    Game(GameParams),
    /// Draw measurement outcomes for a channel spec into a binary outcome file (needs --out).
    #[command(after_long_help = "\
Outcome file: one JSON header line (format, version, n, N, scheme, model,
seed, chunk_size, channel_digest) followed by N*n little-endian f64 pairs.")]
    Sample(SampleParams),
    /// Characteristic-function estimates from an outcome file.
    #[command(after_long_help = "\
Columns: beta_re_1..n, beta_im_1..n, lambda_re, lambda_im, se, N, envelope")]
    Estimate(EstimateParams),
}

fn resolve(cli: Cli) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(Failure::Config("give either --config or a subcommand, not both".into())),
        (None, None) => return Err(Failure::Config("missing subcommand (see --help)".into())),
        (Some(path), None) => load_config(&path)?,
        (None, Some(cmd)) => ExperimentConfig {
            command: match cmd {
                Cmd::Fig2(p) => Command::Fig2(p),
                Cmd::Advantage(p) => Command::Advantage(p),
                Cmd::Complexity(p) => Command::Complexity(p),
                Cmd::Tail(p) => Command::Tail(p),
                Cmd::Noise(p) => Command::Noise(p),
                Cmd::Game(p) => Command::Game(p),
                Cmd::Sample(p) => Command::Sample(p),
                Cmd::Estimate(p) => Command::Estimate(p),
            },
            seed: DEFAULT_SEED,
            format: Format::default(),
            strict: false,
            threads: None,
            out: None,
        },
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = cli.format {
        cfg.format = f;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.out = cli.out;
    }
    cfg.strict |= cli.strict;
    Ok(cfg)
}

fn setup_threads(threads: Option<usize>) -> Result<(), Failure> {
    match threads {
        Some(0) => Err(Failure::config("threads", "must be at least 1")),
        #[cfg(feature = "parallel")]
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Numeric(format!("thread pool: {e}"))),
        _ => Ok(()),
    }
}

fn execute(cfg: &ExperimentConfig) -> Result<(), Failure> {
    setup_threads(cfg.threads)?;
    let outcome = match &cfg.command {
        Command::Fig2(p) => commands::fig2(p, cfg.seed)?,
        Command::Advantage(p) => commands::advantage(p)?,
        Command::Complexity(p) => commands::complexity(p, cfg.seed)?,
        Command::Tail(p) => commands::tail(p)?,
        Command::Noise(p) => commands::noise(p)?,
        Command::Game(p) => commands::game(p, cfg.seed)?,
        Command::Estimate(p) => commands::estimate(p)?,
        Command::Sample(p) => {
            let out = cfg.out.as_ref().ok_or_else(|| Failure::config("out", "sample writes a binary file and needs --out"))?;
            let samples = commands::sample(p, cfg.seed)?;
            let file = File::create(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
            displearn::measurement::write_outcomes(BufWriter::new(file), &samples)?;
            return Ok(());
        }
    };
    outcome.artifact.write(cfg.out.as_deref(), cfg.format, &cfg.echo())?;
    if cfg.strict && !outcome.violations.is_empty() {
        return Err(Failure::Numeric(outcome.violations.join("; ")));
    }
    for v in &outcome.violations {
        eprintln!("warning: {v}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match resolve(cli).and_then(|cfg| execute(&cfg)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("displearn: {e}");
            ExitCode::from(e.code())
        }
    }
}
