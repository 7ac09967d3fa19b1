//! Unbiased characteristic-function estimators and Hoeffding planning.
//!
//! For folded or physical outcomes the estimator is
//! `λ̃(β) = e^{ν|β|²} · (1/N) Σ_i e^{(ζ_i†β − β†ζ_i)/√T_a}`.
//! Crosstalk outcomes are first mapped by the crosstalk transform and the
//! empirical mean is divided by `g(β^θ, β, r)` instead.

use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::channels::ChannelSpec;
use crate::error::{check_len, domain, Error, Result};
use crate::exec::Exec;
use crate::export::{fmt_f64, write_header};
use crate::measurement::{sample_outcomes_with, OutcomeModel, OutcomeSamples, SamplingOptions, SchemeConfig};
use crate::noise::{crosstalk_beta, g_tmsv};
use crate::numerics::{ComplexVec, RandomStream};

/// One estimate `λ̃(β)` with its standard error and envelope.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateResult {
    pub beta: ComplexVec,
    pub lambda_hat: Complex64,
    /// `envelope · sqrt(Var Re + Var Im)/√N` with population variances of
    /// the unit-modulus kernel terms.
    pub std_error: f64,
    pub n_samples: usize,
    pub envelope: f64,
}

/// Mean of `e^{2i Im(φ(ζ)†β)}` over rows, where `φ` rescales each
/// quadrature by `(kr, ki)`; returns the mean and the combined population
/// variance of the real and imaginary parts.
fn kernel_moments(samples: &OutcomeSamples, beta: &[Complex64], kr: f64, ki: f64) -> (Complex64, f64) {
    let (mut sr, mut si, mut srr, mut sii) = (0.0, 0.0, 0.0, 0.0);
    for row in samples.rows() {
        let im: f64 = row.iter().zip(beta).map(|(z, b)| kr * z.re * b.im - ki * z.im * b.re).sum();
        let (s, c) = (2.0 * im).sin_cos();
        sr += c;
        si += s;
        srr += c * c;
        sii += s * s;
    }
    let n = samples.len() as f64;
    let mean = Complex64::new(sr / n, si / n);
    let var = (srr / n - mean.re * mean.re).max(0.0) + (sii / n - mean.im * mean.im).max(0.0);
    (mean, var)
}

fn finish(beta: &ComplexVec, mean: Complex64, var: f64, n: usize, envelope: f64) -> EstimateResult {
    EstimateResult {
        beta: beta.clone(),
        lambda_hat: mean * envelope,
        std_error: envelope * (var / n as f64).sqrt(),
        n_samples: n,
        envelope,
    }
}

/// `λ̃(β)` from folded or physical outcomes.
pub fn estimate_lambda(samples: &OutcomeSamples, beta: &ComplexVec) -> Result<EstimateResult> {
    check_len(samples.n, beta.len())?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if let OutcomeModel::Crosstalk { .. } = samples.model {
        return Err(Error::Config("crosstalk outcomes need estimate_lambda_crosstalk".into()));
    }
    let k = 1.0 / samples.scheme.t_a().sqrt();
    let (mean, var) = kernel_moments(samples, beta.as_slice(), k, k);
    Ok(finish(beta, mean, var, samples.len(), samples.scheme.envelope(beta.norm_sq())))
}

/// [`estimate_lambda`] over many `β`; element `i` equals the single call on
/// `betas[i]` exactly.
pub fn estimate_lambda_batch(samples: &OutcomeSamples, betas: &[ComplexVec]) -> Result<Vec<EstimateResult>> {
    estimate_lambda_batch_with(samples, betas, Exec::default())
}

pub fn estimate_lambda_batch_with(samples: &OutcomeSamples, betas: &[ComplexVec], exec: Exec) -> Result<Vec<EstimateResult>> {
    exec.map_slice(betas, |b| estimate_lambda(samples, b)).into_iter().collect()
}

/// Crosstalk-aware estimator: transformed outcomes, normalized by
/// `g(β^θ, β, r)`.
pub fn estimate_lambda_crosstalk(samples: &OutcomeSamples, beta: &ComplexVec) -> Result<EstimateResult> {
    check_len(samples.n, beta.len())?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let OutcomeModel::Crosstalk { theta } = samples.model else {
        return Err(Error::Config("outcomes were not produced by the crosstalk model".into()));
    };
    let (s, c) = theta.sin_cos();
    let (mean, var) = kernel_moments(samples, beta.as_slice(), 1.0 / (c - s), 1.0 / (c + s));
    let g = g_tmsv(&crosstalk_beta(beta, theta)?, beta, samples.scheme.r())?;
    Ok(finish(beta, mean, var, samples.len(), 1.0 / g))
}

/// `⌈8 e^{2e^{−2 r_eff}|β|²} ε⁻² ln(4/δ)⌉`, saturating at `u64::MAX`.
pub fn hoeffding_n(eps: f64, delta: f64, r_eff: f64, beta_norm_sq: f64) -> Result<u64> {
    let nu = (-2.0 * r_eff).exp();
    hoeffding_n_from_noise(eps, delta, nu, beta_norm_sq)
}

/// [`hoeffding_n`] with `ν = e^{−2 r_eff}` given directly.
pub fn hoeffding_n_from_noise(eps: f64, delta: f64, nu: f64, beta_norm_sq: f64) -> Result<u64> {
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("need eps > 0 and delta in (0, 1), got eps={eps}, delta={delta}")));
    }
    if !(beta_norm_sq >= 0.0) || !(nu >= 0.0) {
        return Err(domain("|beta|^2 and the noise variance must be nonnegative"));
    }
    let n = (8.0 * (2.0 * nu * beta_norm_sq).exp() / (eps * eps) * (4.0 / delta).ln()).ceil();
    Ok(if n >= u64::MAX as f64 { u64::MAX } else { n as u64 })
}

/// Fraction of `trials` independent `N`-sample runs with
/// `|λ̃(β) − λ(β)| > ε`.
pub fn empirical_failure_rate(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    beta: &ComplexVec,
    eps: f64,
    n: usize,
    trials: usize,
    stream: RandomStream,
) -> Result<f64> {
    empirical_failure_rate_with(spec, cfg, beta, eps, n, trials, stream, Exec::default())
}

#[allow(clippy::too_many_arguments)]
pub fn empirical_failure_rate_with(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    beta: &ComplexVec,
    eps: f64,
    n: usize,
    trials: usize,
    stream: RandomStream,
    exec: Exec,
) -> Result<f64> {
    if trials < 100 {
        return Err(domain(format!("need at least 100 trials, got {trials}")));
    }
    let target = spec.eval_lambda(beta)?;
    let inner = SamplingOptions::with_exec(Exec::Sequential);
    let failed = exec.try_map_range(trials, |t| {
        let s = sample_outcomes_with(spec, cfg, n, stream.child(t as u64), &inner)?;
        Ok::<_, Error>((estimate_lambda(&s, beta)?.lambda_hat - target).norm() > eps)
    })?;
    Ok(failed.iter().filter(|&&f| f).count() as f64 / trials as f64)
}

#[derive(Serialize)]
struct NoConfig {}

/// Writes estimates as CSV with columns
/// `beta_re_1..n, beta_im_1..n, lambda_re, lambda_im, se, N, envelope`.
pub fn write_estimates_csv<W: Write, C: Serialize>(mut w: W, config: Option<&C>, results: &[EstimateResult]) -> Result<()> {
    match config {
        Some(c) => write_header(&mut w, "estimates", c)?,
        None => write_header(&mut w, "estimates", &NoConfig {})?,
    }
    let n = results.first().map_or(1, |r| r.beta.len());
    let mut out = csv::Writer::from_writer(w);
    let mut head: Vec<String> = (1..=n).map(|j| format!("beta_re_{j}")).collect();
    head.extend((1..=n).map(|j| format!("beta_im_{j}")));
    head.extend(["lambda_re", "lambda_im", "se", "N", "envelope"].map(String::from));
    out.write_record(&head)?;
    for r in results {
        check_len(n, r.beta.len())?;
        let mut row: Vec<String> = r.beta.as_slice().iter().map(|z| fmt_f64(z.re)).collect();
        row.extend(r.beta.as_slice().iter().map(|z| fmt_f64(z.im)));
        row.extend([
            fmt_f64(r.lambda_hat.re),
            fmt_f64(r.lambda_hat.im),
            fmt_f64(r.std_error),
            r.n_samples.to_string(),
            fmt_f64(r.envelope),
        ]);
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
