//! Measurement outcomes of the learning schemes.
//!
//! The Bell measurement on a TMSV probe is simulated through its Gaussian
//! operational model: `ζ = √T_a (α + w)` with `α ~ p` and `w` complex
//! Gaussian of per-quadrature variance `ν/2`, `ν = e^{−2 r_eff}`. The
//! explicit quadrature chain (squeezed pair, beam-splitter losses,
//! general-dyne noise) is also available and gives the same distribution.
//! A third sampler models crosstalk in the Bell measurement's beam splitter.
//!
//! Sampling is split into chunks of `chunk_size` outcomes; chunk `k` draws
//! from `stream.child(k)`, so output depends only on the seed and chunk size.

mod io;
mod scheme;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use io::{read_outcomes, write_outcomes, OUTCOME_FORMAT};
pub use scheme::SchemeConfig;

use crate::channels::ChannelSpec;
use crate::error::{check_len, Error, Result};
use crate::exec::Exec;
use crate::numerics::{fill_gaussian, ComplexVec, RandomStream, StreamRng};

pub const DEFAULT_CHUNK_SIZE: usize = 4096;

/// Chunking and scheduling of a sampling run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SamplingOptions {
    pub chunk_size: usize,
    pub exec: Exec,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self { chunk_size: DEFAULT_CHUNK_SIZE, exec: Exec::default() }
    }
}

impl SamplingOptions {
    pub fn with_exec(exec: Exec) -> Self {
        Self { exec, ..Self::default() }
    }
}

/// Which outcome model produced a sample set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum OutcomeModel {
    /// `ζ = √T_a (α + w)`.
    Folded,
    /// Explicit squeezed-pair quadrature chain.
    Physical,
    /// Ideal scheme with a beam-splitter angle error `theta` (radians).
    Crosstalk { theta: f64 },
}

/// A seeded batch of outcomes `ζ ∈ ℂⁿ`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeSamples {
    pub n: usize,
    pub scheme: SchemeConfig,
    pub model: OutcomeModel,
    pub channel_digest: String,
    pub stream: RandomStream,
    pub chunk_size: usize,
    zeta: Vec<Complex64>,
}

impl OutcomeSamples {
    pub fn from_raw(
        n: usize,
        scheme: SchemeConfig,
        model: OutcomeModel,
        channel_digest: String,
        stream: RandomStream,
        chunk_size: usize,
        zeta: Vec<Complex64>,
    ) -> Result<Self> {
        if n == 0 || zeta.len() % n != 0 {
            return Err(Error::Format(format!("{} values do not form rows of {n} modes", zeta.len())));
        }
        if zeta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Format("non-finite outcome".into()));
        }
        Ok(Self { n, scheme, model, channel_digest, stream, chunk_size, zeta })
    }

    /// Number of outcomes `N`.
    pub fn len(&self) -> usize {
        self.zeta.len() / self.n
    }

    pub fn is_empty(&self) -> bool {
        self.zeta.is_empty()
    }

    pub fn get(&self, i: usize) -> &[Complex64] {
        &self.zeta[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.zeta.chunks_exact(self.n)
    }

    pub fn as_flat(&self) -> &[Complex64] {
        &self.zeta
    }

    /// Outcomes scaled by `1/√T_a`, as consumed by the estimator.
    pub fn rescaled(&self) -> Vec<Complex64> {
        let k = 1.0 / self.scheme.t_a().sqrt();
        self.zeta.iter().map(|z| z * k).collect()
    }
}

/// Draws `count` outcomes with the folded model.
pub fn sample_outcomes(spec: &ChannelSpec, cfg: &SchemeConfig, count: usize, stream: RandomStream) -> Result<OutcomeSamples> {
    sample_outcomes_with(spec, cfg, count, stream, &SamplingOptions::default())
}

pub fn sample_outcomes_with(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    count: usize,
    stream: RandomStream,
    opts: &SamplingOptions,
) -> Result<OutcomeSamples> {
    run_sampler(spec, cfg, OutcomeModel::Folded, count, stream, opts)
}

/// Draws `count` outcomes by propagating explicit quadratures through the
/// squeezed pair, the losses and a finite-squeezing Bell measurement.
/// Requires finite `r`.
pub fn sample_outcomes_physical(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    count: usize,
    stream: RandomStream,
    opts: &SamplingOptions,
) -> Result<OutcomeSamples> {
    if !cfg.r().is_finite() {
        return Err(Error::Config("the quadrature chain needs finite squeezing".into()));
    }
    run_sampler(spec, cfg, OutcomeModel::Physical, count, stream, opts)
}

/// Draws raw outcomes of an ideal scheme (squeezing `r`) whose Bell
/// measurement mixes the two modes at angle `π/4 + theta`.
pub fn sample_outcomes_crosstalk(
    spec: &ChannelSpec,
    r: f64,
    theta: f64,
    count: usize,
    stream: RandomStream,
    opts: &SamplingOptions,
) -> Result<OutcomeSamples> {
    check_crosstalk_angle(theta)?;
    if !r.is_finite() {
        return Err(Error::Config("the quadrature chain needs finite squeezing".into()));
    }
    let cfg = SchemeConfig::ideal(r)?;
    run_sampler(spec, &cfg, OutcomeModel::Crosstalk { theta }, count, stream, opts)
}

fn run_sampler(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    model: OutcomeModel,
    count: usize,
    stream: RandomStream,
    opts: &SamplingOptions,
) -> Result<OutcomeSamples> {
    if count == 0 {
        return Err(Error::Config("sample count must be at least 1".into()));
    }
    if opts.chunk_size == 0 {
        return Err(Error::Config("chunk size must be at least 1".into()));
    }
    if !spec.is_samplable() {
        return Err(Error::NotSamplable("peaks do not share a common width".into()));
    }
    let n = spec.n();
    let chunks = count.div_ceil(opts.chunk_size);
    let parts = opts.exec.try_map_range(chunks, |k| {
        let len = opts.chunk_size.min(count - k * opts.chunk_size);
        sample_chunk(spec, cfg, model, len, &mut stream.child(k as u64).rng())
    })?;
    let mut zeta = Vec::with_capacity(count * n);
    for p in parts {
        zeta.extend_from_slice(&p);
    }
    Ok(OutcomeSamples { n, scheme: *cfg, model, channel_digest: spec.digest(), stream, chunk_size: opts.chunk_size, zeta })
}

fn normal(rng: &mut StreamRng) -> f64 {
    StandardNormal.sample(rng)
}

fn sample_chunk(
    spec: &ChannelSpec,
    cfg: &SchemeConfig,
    model: OutcomeModel,
    len: usize,
    rng: &mut StreamRng,
) -> Result<Vec<Complex64>> {
    let n = spec.n();
    let mut out = Vec::with_capacity(len * n);
    let mut alpha = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for _ in 0..len {
        spec.draw_into(rng, &mut alpha)?;
        match model {
            OutcomeModel::Folded => {
                fill_gaussian(rng, &mut w, 0.5 * cfg.noise_var());
                let k = cfg.t_a().sqrt();
                out.extend(alpha.iter().zip(&w).map(|(a, w)| (a + w) * k));
            }
            OutcomeModel::Physical => {
                for a in &alpha {
                    out.push(physical_mode(cfg, *a, rng));
                }
            }
            OutcomeModel::Crosstalk { theta } => {
                for a in &alpha {
                    out.push(crosstalk_mode(cfg.r(), theta, *a, rng));
                }
            }
        }
    }
    Ok(out)
}

/// Quadratures `(x_A, x_B, p_A, p_B)` of one TMSV mode pair. Vacuum has
/// quadrature variance 1/4; `x_B − x_A` and `p_A + p_B` are squeezed to
/// variance `e^{−2r}/2`.
fn tmsv_quadratures(r: f64, rng: &mut StreamRng) -> [f64; 4] {
    let sq = (0.5 * (-2.0 * r).exp()).sqrt();
    let anti = (0.5 * (2.0 * r).exp()).sqrt();
    let (dx, sx) = (sq * normal(rng), anti * normal(rng));
    let (sp, dp) = (sq * normal(rng), anti * normal(rng));
    [0.5 * (sx - dx), 0.5 * (sx + dx), 0.5 * (sp - dp), 0.5 * (sp + dp)]
}

/// Beam-splitter loss of transmission `t` on all four quadratures.
fn apply_loss(q: &mut [f64; 4], t: f64, rng: &mut StreamRng) {
    let keep = t.sqrt();
    let leak = 0.5 * (1.0 - t).sqrt();
    for x in q.iter_mut() {
        *x = keep * *x + leak * normal(rng);
    }
}

fn physical_mode(cfg: &SchemeConfig, alpha: Complex64, rng: &mut StreamRng) -> Complex64 {
    let mut q = tmsv_quadratures(cfg.r(), rng);
    apply_loss(&mut q, cfg.t_b(), rng);
    q[1] += alpha.re;
    q[3] += alpha.im;
    apply_loss(&mut q, cfg.t_a(), rng);
    let [xa, xb, pa, pb] = q;
    let dyne = (0.5 * (-2.0 * cfg.s()).exp()).sqrt();
    let (e1, e2) = (normal(rng), normal(rng));
    Complex64::new(xb - xa + dyne * e1, pa + pb + dyne * e2)
}

fn crosstalk_mode(r: f64, theta: f64, alpha: Complex64, rng: &mut StreamRng) -> Complex64 {
    let [xa, xb, pa, pb] = tmsv_quadratures(r, rng);
    let (s, c) = theta.sin_cos();
    Complex64::new((xb + alpha.re) * (c - s) - xa * (c + s), (pb + alpha.im) * (c + s) + pa * (c - s))
}

pub(crate) fn check_crosstalk_angle(theta: f64) -> Result<()> {
    if theta.is_finite() && theta.abs() < std::f64::consts::FRAC_PI_4 {
        Ok(())
    } else {
        Err(Error::Singular(format!("crosstalk angle {theta} outside (-pi/4, pi/4)")))
    }
}

/// Maps a raw crosstalk outcome to the coordinates consumed by the
/// crosstalk-aware estimator: `Re ζ/(cos θ − sin θ) + i·Im ζ/(cos θ + sin θ)`.
///
/// `θ = 0` is the identity.
pub fn crosstalk_sample_transform(zeta: &ComplexVec, theta: f64) -> Result<ComplexVec> {
    check_crosstalk_angle(theta)?;
    let mut v = zeta.as_slice().to_vec();
    crosstalk_transform_in_place(&mut v, theta);
    ComplexVec::new(v)
}

pub(crate) fn crosstalk_transform_in_place(v: &mut [Complex64], theta: f64) {
    let (s, c) = theta.sin_cos();
    let (kr, ki) = (1.0 / (c - s), 1.0 / (c + s));
    for z in v {
        *z = Complex64::new(z.re * kr, z.im * ki);
    }
}

/// Closed-form density of folded-model outcomes for a fixed channel and
/// scheme.
#[derive(Clone, Debug)]
pub struct MeasuredDensity {
    convolved: ChannelSpec,
    inv_sqrt_ta: f64,
    jacobian: f64,
}

impl MeasuredDensity {
    pub fn new(spec: &ChannelSpec, cfg: &SchemeConfig) -> Result<Self> {
        Ok(Self {
            convolved: spec.convolved(cfg.noise_var())?,
            inv_sqrt_ta: 1.0 / cfg.t_a().sqrt(),
            jacobian: cfg.t_a().powi(-(spec.n() as i32)),
        })
    }

    pub fn eval(&self, zeta: &ComplexVec) -> Result<f64> {
        check_len(self.convolved.n(), zeta.len())?;
        let y: Vec<Complex64> = zeta.as_slice().iter().map(|z| z * self.inv_sqrt_ta).collect();
        Ok(self.jacobian * self.convolved.p_slice(&y))
    }

    /// Characteristic function of `ζ/√T_a`: `λ(β) e^{−ν|β|²}`.
    pub fn convolved_channel(&self) -> &ChannelSpec {
        &self.convolved
    }
}

/// Density of `ζ` under the folded model.
pub fn eval_p_meas(spec: &ChannelSpec, cfg: &SchemeConfig, zeta: &ComplexVec) -> Result<f64> {
    MeasuredDensity::new(spec, cfg)?.eval(zeta)
}
