//! Partially revealed hypothesis-testing game.
//!
//! Alice draws a hidden peak location `γ ~ N(0, σ_γ²)` per quadrature with
//! `2σ_γ² = 0.99κ`, then picks either the depolarizing channel or the
//! three-peak channel at `sγ`, `s = ±1`, with equal probability. Bob probes
//! the chosen channel `N` times with the TMSV plus Bell-measurement scheme,
//! learns `γ`, and guesses "depolarizing" iff `|Im λ̃(γ)| < ε`, `ε = 0.98ε₀`.
//! Outside `2σ² < |γ|² ≤ κn` he guesses at random.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelSpec;
use crate::error::{domain, Error, Result};
use crate::estimation::{estimate_lambda, hoeffding_n_from_noise};
use crate::exec::Exec;
use crate::measurement::{sample_outcomes_with, SamplingOptions, SchemeConfig};
use crate::numerics::{gaussian_complex, ComplexVec, RandomStream};

/// Failure probability the Hoeffding-sized policies target.
pub const GAME_DELTA: f64 = 1.0 / 3.0;
/// Largest per-round sample count a policy may request.
pub const MAX_ROUND_SAMPLES: u64 = 1 << 32;
const WILSON_Z: f64 = 1.959_963_984_540_054;

/// How many channel uses Bob spends per round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplePolicy {
    Fixed { samples: u64 },
    /// Hoeffding count at the worst case `|β|² = κn`.
    HoeffdingWorstCase,
    /// Hoeffding count at the revealed `|γ|²`.
    HoeffdingAtGamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub n: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub eps0: f64,
    pub scheme: SchemeConfig,
    pub policy: SamplePolicy,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("n must be at least 1".into()));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {}", self.sigma)));
        }
        if !(0.0..=0.25).contains(&self.eps0) {
            return Err(Error::Config(format!("eps0 must lie in [0, 0.25], got {}", self.eps0)));
        }
        if self.eps0 == 0.0 && !matches!(self.policy, SamplePolicy::Fixed { .. }) {
            return Err(Error::Config("Hoeffding policies need eps0 > 0; use a fixed sample count".into()));
        }
        if let SamplePolicy::HoeffdingWorstCase = self.policy {
            self.samples_for(self.kappa * self.n as f64)?;
        }
        Ok(())
    }

    /// `ε = 0.98ε₀`.
    pub fn eps(&self) -> f64 {
        0.98 * self.eps0
    }

    /// `σ_γ² = 0.99κ/2`.
    pub fn sigma_gamma_sq(&self) -> f64 {
        0.99 * self.kappa / 2.0
    }

    pub fn in_range(&self, gamma_norm_sq: f64) -> bool {
        2.0 * self.sigma * self.sigma < gamma_norm_sq && gamma_norm_sq <= self.kappa * self.n as f64
    }

    fn samples_for(&self, gamma_norm_sq: f64) -> Result<u64> {
        let n = match self.policy {
            SamplePolicy::Fixed { samples } => samples,
            SamplePolicy::HoeffdingWorstCase => {
                hoeffding_n_from_noise(self.eps(), GAME_DELTA, self.scheme.noise_var(), self.kappa * self.n as f64)?
            }
            SamplePolicy::HoeffdingAtGamma => {
                hoeffding_n_from_noise(self.eps(), GAME_DELTA, self.scheme.noise_var(), gamma_norm_sq)?
            }
        };
        if n > MAX_ROUND_SAMPLES {
            return Err(Error::Config(format!("policy asks for {n} samples per round")));
        }
        Ok(n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Depolarizing,
    Signal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundOutcome {
    pub gamma: ComplexVec,
    pub truth: Hypothesis,
    /// `±1` for a signal round, `0` for depolarizing.
    pub sign: i8,
    pub guess: Hypothesis,
    pub in_range: bool,
    pub samples: u64,
}

impl RoundOutcome {
    pub fn success(&self) -> bool {
        self.truth == self.guess
    }
}

fn coin(bit: bool) -> Hypothesis {
    if bit {
        Hypothesis::Signal
    } else {
        Hypothesis::Depolarizing
    }
}

/// Plays one round. Alice's draws come from `stream`, Bob's outcomes from
/// `stream.child(0)`.
pub fn play_round(cfg: &GameConfig, stream: RandomStream) -> Result<RoundOutcome> {
    cfg.validate()?;
    let gamma = gaussian_complex(stream.child(1), cfg.n, cfg.sigma_gamma_sq())?;
    let mut rng = stream.rng();
    let truth = coin(rng.random::<bool>());
    let sign: i8 = if rng.random::<bool>() { 1 } else { -1 };
    let fallback = coin(rng.random::<bool>());
    let b2 = gamma.norm_sq();
    let in_range = cfg.in_range(b2);
    let mut out = RoundOutcome {
        gamma,
        truth,
        sign: if truth == Hypothesis::Signal { sign } else { 0 },
        guess: fallback,
        in_range,
        samples: 0,
    };
    if !in_range {
        return Ok(out);
    }
    let samples = cfg.samples_for(b2)?;
    if samples == 0 {
        return Ok(out);
    }
    let spec = match truth {
        Hypothesis::Depolarizing => ChannelSpec::depolarizing(cfg.n, cfg.sigma)?,
        Hypothesis::Signal => {
            let center = if sign > 0 { out.gamma.clone() } else { out.gamma.neg() };
            ChannelSpec::three_peak(cfg.n, &center, cfg.eps0, cfg.sigma)?
        }
    };
    let opts = SamplingOptions::with_exec(Exec::Sequential);
    let data = sample_outcomes_with(&spec, &cfg.scheme, samples as usize, stream.child(0), &opts)?;
    let est = estimate_lambda(&data, &out.gamma)?;
    out.guess = if est.lambda_hat.im.abs() < cfg.eps() { Hypothesis::Depolarizing } else { Hypothesis::Signal };
    out.samples = samples;
    Ok(out)
}

/// Aggregate of a game run with a 95% Wilson interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameSummary {
    pub rounds: usize,
    /// Largest per-round sample count used.
    #[serde(rename = "N")]
    pub n_samples: u64,
    pub success_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub in_range_fraction: f64,
    /// Success rate restricted to in-range rounds; `null` when there are none.
    pub in_range_success_rate: Option<f64>,
    pub std_error: f64,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Plays `rounds ≥ 1000` rounds; round `t` uses `stream.child(t)`.
pub fn run_game(cfg: &GameConfig, rounds: usize, stream: RandomStream) -> Result<GameSummary> {
    run_game_with(cfg, rounds, stream, Exec::default())
}

pub fn run_game_with(cfg: &GameConfig, rounds: usize, stream: RandomStream, exec: Exec) -> Result<GameSummary> {
    if rounds < 1000 {
        return Err(domain(format!("need at least 1000 rounds, got {rounds}")));
    }
    cfg.validate()?;
    let results = exec.try_map_range(rounds, |t| play_round(cfg, stream.child(t as u64)))?;
    Ok(summarize(&results))
}

pub fn summarize(results: &[RoundOutcome]) -> GameSummary {
    let rounds = results.len();
    let wins = results.iter().filter(|r| r.success()).count();
    let in_range: Vec<&RoundOutcome> = results.iter().filter(|r| r.in_range).collect();
    let in_wins = in_range.iter().filter(|r| r.success()).count();
    let p = wins as f64 / rounds.max(1) as f64;
    let (ci_low, ci_high) = wilson_interval(wins, rounds);
    GameSummary {
        rounds,
        n_samples: results.iter().map(|r| r.samples).max().unwrap_or(0),
        success_rate: p,
        ci_low,
        ci_high,
        in_range_fraction: in_range.len() as f64 / rounds.max(1) as f64,
        in_range_success_rate: (!in_range.is_empty()).then(|| in_wins as f64 / in_range.len() as f64),
        std_error: (p * (1.0 - p) / rounds.max(1) as f64).sqrt(),
    }
}

/// `|λ_dep(γ) − λ_{±γ}(γ)| = 2ε₀|1 − e^{−2|γ|²/σ²}|`.
pub fn distinguishing_margin(gamma_norm_sq: f64, eps0: f64, sigma: f64) -> f64 {
    2.0 * eps0 * (-(-2.0 * gamma_norm_sq / (sigma * sigma)).exp_m1()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps0: f64, policy: SamplePolicy) -> GameConfig {
        GameConfig {
            n: 8,
            kappa: 1.0,
            sigma: 0.3,
            eps0,
            scheme: SchemeConfig::ideal(2.0).unwrap(),
            policy,
        }
    }

    #[test]
    fn wilson_known() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }

    #[test]
    fn validation() {
        assert!(cfg(0.0, SamplePolicy::HoeffdingWorstCase).validate().is_err());
        assert!(cfg(0.3, SamplePolicy::Fixed { samples: 1 }).validate().is_err());
        assert!(cfg(0.0, SamplePolicy::Fixed { samples: 10 }).validate().is_ok());
        let mut bad = cfg(0.2, SamplePolicy::HoeffdingWorstCase);
        bad.scheme = SchemeConfig::vacuum_heterodyne();
        bad.kappa = 3.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn margin_matches_channels() {
        let c = cfg(0.245, SamplePolicy::Fixed { samples: 0 });
        for t in 0..20u64 {
            let g = gaussian_complex(RandomStream::new(3, t), 8, c.sigma_gamma_sq()).unwrap();
            let dep = ChannelSpec::depolarizing(8, 0.3).unwrap().eval_lambda(&g).unwrap();
            for center in [g.clone(), g.neg()] {
                let sig = ChannelSpec::three_peak(8, &center, 0.245, 0.3).unwrap().eval_lambda(&g).unwrap();
                let m = distinguishing_margin(g.norm_sq(), 0.245, 0.3);
                assert!(((dep - sig).norm() - m).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn round_is_deterministic() {
        let c = cfg(0.245, SamplePolicy::HoeffdingWorstCase);
        let a = play_round(&c, RandomStream::new(1, 5)).unwrap();
        let b = play_round(&c, RandomStream::new(1, 5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.samples > 0, a.in_range);
    }

    #[test]
    fn runs_agree_across_exec() {
        let c = cfg(0.245, SamplePolicy::Fixed { samples: 40 });
        let a = run_game_with(&c, 1000, RandomStream::root(2), Exec::Sequential).unwrap();
        let b = run_game(&c, 1000, RandomStream::root(2)).unwrap();
        assert_eq!(a, b);
        assert!(a.ci_low <= a.success_rate && a.success_rate <= a.ci_high);
        assert!(run_game(&c, 999, RandomStream::root(2)).is_err());
    }
}
