//! Command parameters, shared by the argument parser and JSON config files.
//!
//! A config file looks like
//!
//! ```json
//! {"command": "tail", "seed": 7, "format": "csv", "params": {"n_max": 14000}}
//! ```
//!
//! Every `params` field is optional and defaults to the matching flag's
//! default. Flags given on the command line override the file.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::failure::Failure;
use crate::output::Format;

pub const DEFAULT_SEED: u64 = 1;

/// Implements `Default` through the flag defaults so both entry points
/// share one source of truth.
macro_rules! defaults_from_flags {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                #[derive(Parser)]
                struct Wrap {
                    #[command(flatten)]
                    inner: $t,
                }
                Wrap::parse_from(["displearn"]).inner
            }
        }
    )*};
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Placement {
    /// Loss between the channel and the measurement.
    After,
    /// Loss between the probe source and the channel.
    Before,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Kappa,
    R,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `main` for sigma = 0, `finite-sigma` otherwise.
    Auto,
    Main,
    FiniteSigma,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Shape {
    /// `|β|²` spread evenly over the modes.
    Uniform,
    /// `|β|²` in the first mode.
    Concentrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    /// Hoeffding count at `|β|² = κn`.
    Worst,
    /// Hoeffding count at the revealed `|γ|²`.
    Gamma,
    /// `--samples` per round.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Folded,
    Physical,
    Crosstalk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct Fig2Params {
    /// Peak width of the five-peak channel.
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.6, allow_negative_numbers = true)]
    pub gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma_im: f64,
    /// Squeezing of the entanglement-assisted scheme.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 10.0)]
    pub density_half_width: f64,
    #[arg(long, default_value_t = 201)]
    pub density_points: usize,
    #[arg(long, default_value_t = 3.0)]
    pub charfn_half_width: f64,
    #[arg(long, default_value_t = 61)]
    pub charfn_points: usize,
    /// Monte Carlo outcomes per scheme.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct AdvantageParams {
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub delta: f64,
    /// Channel width; 0 selects the main lower bound.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Grid axis next to `n`.
    #[arg(long, value_enum, default_value_t = Axis::Kappa)]
    pub axis: Axis,
    /// Squeezing used on the kappa axis.
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    /// Cutoff used on the r axis.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])]
    pub kappas: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])]
    pub rs: Vec<f64>,
    /// Loss fraction `1 − T`.
    #[arg(long, default_value_t = 0.1)]
    pub loss: f64,
    #[arg(long, value_enum, default_value_t = Placement::After)]
    pub placement: Placement,
    /// Measurement squeezing; absent means an ideal Bell measurement.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub n_min: u32,
    #[arg(long, default_value_t = 100)]
    pub n_max: u32,
    #[arg(long, value_enum, default_value_t = Variant::Auto)]
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct ComplexityParams {
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Squeezing values, paired with `--beta-norm-sq`.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0])]
    pub r_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
    pub beta_norm_sq: Vec<f64>,
    /// Transmission after the channel.
    #[arg(long, default_value_t = 1.0)]
    pub t_a: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.6, allow_negative_numbers = true)]
    pub gamma_re: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma_im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct TailParams {
    #[arg(long, default_value_t = 8)]
    pub n_min: u32,
    #[arg(long, default_value_t = 14_000)]
    pub n_max: u32,
    /// Log-spaced points; duplicates after rounding are dropped.
    #[arg(long, default_value_t = 40)]
    pub points: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseParams {
    #[arg(long, default_value_t = 1.5)]
    pub r: f64,
    #[arg(long, default_value_t = 50)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = Shape::Uniform)]
    pub shape: Shape,
    #[arg(long, default_value_t = 130.0)]
    pub b2_max: f64,
    #[arg(long, default_value_t = 27)]
    pub b2_points: usize,
    /// Phase-diffusion widths in degrees.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1.0, 2.0])]
    pub deltas_deg: Vec<f64>,
    /// Crosstalk angles in degrees.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 1.0, 2.0])]
    pub thetas_deg: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct GameParams {
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0.3)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.245)]
    pub eps0: f64,
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_b: f64,
    #[arg(long, default_value_t = 10_000)]
    pub rounds: usize,
    #[arg(long, value_enum, default_value_t = Policy::Worst)]
    pub policy: Policy,
    /// Samples per round for `--policy fixed`.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Also run the eps0 = 0 control with the main run's sample count.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub control: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct SampleParams {
    /// Channel spec JSON file.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t_b: f64,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long, value_enum, default_value_t = Model::Folded)]
    pub model: Model,
    /// Beam-splitter angle error for the crosstalk model, in degrees.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta_deg: f64,
    #[arg(long, default_value_t = displearn::measurement::DEFAULT_CHUNK_SIZE)]
    pub chunk_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct EstimateParams {
    /// Outcome file written by `sample`.
    #[arg(long)]
    pub samples: Option<PathBuf>,
    /// JSON list of β vectors, each `[[re, im], ...]`.
    #[arg(long)]
    pub betas: Option<PathBuf>,
}

defaults_from_flags!(
    Fig2Params,
    AdvantageParams,
    ComplexityParams,
    TailParams,
    NoiseParams,
    GameParams,
    SampleParams,
    EstimateParams
);

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Fig2(Fig2Params),
    Advantage(AdvantageParams),
    Complexity(ComplexityParams),
    Tail(TailParams),
    Noise(NoiseParams),
    Game(GameParams),
    Sample(SampleParams),
    Estimate(EstimateParams),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fig2(_) => "fig2",
            Command::Advantage(_) => "advantage",
            Command::Complexity(_) => "complexity",
            Command::Tail(_) => "tail",
            Command::Noise(_) => "noise",
            Command::Game(_) => "game",
            Command::Sample(_) => "sample",
            Command::Estimate(_) => "estimate",
        }
    }

    fn params_json(&self) -> Value {
        let v = match self {
            Command::Fig2(p) => serde_json::to_value(p),
            Command::Advantage(p) => serde_json::to_value(p),
            Command::Complexity(p) => serde_json::to_value(p),
            Command::Tail(p) => serde_json::to_value(p),
            Command::Noise(p) => serde_json::to_value(p),
            Command::Game(p) => serde_json::to_value(p),
            Command::Sample(p) => serde_json::to_value(p),
            Command::Estimate(p) => serde_json::to_value(p),
        };
        v.expect("params serialize")
    }

    fn from_params(name: &str, params: Value) -> Result<Self, Failure> {
        fn parse<T: DeserializeOwned>(v: Value) -> Result<T, Failure> {
            serde_path_to_error::deserialize(v).map_err(|e| {
                let path = e.path().to_string();
                Failure::Config(format!("params.{path}: {}", e.into_inner()))
            })
        }
        Ok(match name {
            "fig2" => Command::Fig2(parse(params)?),
            "advantage" => Command::Advantage(parse(params)?),
            "complexity" => Command::Complexity(parse(params)?),
            "tail" => Command::Tail(parse(params)?),
            "noise" => Command::Noise(parse(params)?),
            "game" => Command::Game(parse(params)?),
            "sample" => Command::Sample(parse(params)?),
            "estimate" => Command::Estimate(parse(params)?),
            other => return Err(Failure::Config(format!("command: unknown command `{other}`"))),
        })
    }
}

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub format: Format,
    pub strict: bool,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The part of the config that determines output bytes; embedded in
    /// every artifact. Thread count and output path are left out.
    pub fn echo(&self) -> Value {
        json!({
            "command": self.command.name(),
            "seed": self.seed,
            "format": self.format,
            "strict": self.strict,
            "params": self.command.params_json(),
        })
    }

    #[cfg(test)]
    pub fn to_file_json(&self) -> Value {
        let mut v = self.echo();
        if let Some(t) = self.threads {
            v["threads"] = json!(t);
        }
        if let Some(o) = &self.out {
            v["out"] = json!(o);
        }
        v
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: String,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    threads: Option<usize>,
    #[serde(default)]
    out: Option<PathBuf>,
    #[serde(default)]
    format: Option<Format>,
    #[serde(default)]
    strict: bool,
    #[serde(default)]
    params: Option<Value>,
}

pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: FileConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Config(format!("{path}: {}", e.into_inner()))
    })?;
    let params = file.params.unwrap_or_else(|| json!({}));
    Ok(ExperimentConfig {
        command: Command::from_params(&file.command, params)?,
        seed: file.seed.unwrap_or(DEFAULT_SEED),
        format: file.format.unwrap_or_default(),
        strict: file.strict,
        threads: file.threads,
        out: file.out,
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_config_str(&text)
}
