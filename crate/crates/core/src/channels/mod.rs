//! Random displacement channels as Hermitian Gaussian mixtures.
//!
//! A channel is stored through its characteristic function
//! `λ(β) = Σ_k c_k exp(−|β−γ_k|²/(2σ_k²))`. Peaks off the origin come in
//! conjugate pairs `(c, γ)`, `(c̄, −γ)`, which makes `λ(−β) = conj(λ(β))`
//! hold bit for bit and the density `p(α)` real.
//!
//! With a common width `σ` the density is
//! `p(α) = (2σ²/π)ⁿ e^{−2σ²|α|²} m(α)` with the real modulation
//! `m(α) = Σ_k c_k e^{γ_k†α − α†γ_k}`. If the off-origin weights satisfy
//! `Σ|c_k| ≤ c_0` then `m ≥ 0`, and `α` can be drawn exactly by rejection
//! from the Gaussian envelope.

mod json;

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_len, domain, Error, Result};
use crate::numerics::{norm_sq, phase_kernel_slices, ComplexVec, RandomStream, StreamRng};

/// Tolerance on `λ(0) = 1` and on the nonnegativity certificate.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Rejection-sampling trial cap.
pub const MAX_TRIALS: u64 = 1_000_000;

/// One Gaussian peak of the characteristic function.
#[derive(Clone, Debug, PartialEq)]
pub struct Peak {
    pub weight: Complex64,
    pub center: ComplexVec,
    /// Overrides the channel's common width for this peak. Channels with
    /// overrides can be evaluated but not sampled.
    pub width: Option<f64>,
}

impl Peak {
    pub fn new(weight: Complex64, center: ComplexVec) -> Self {
        Self { weight, center, width: None }
    }
}

#[derive(Clone, Debug)]
struct OriginTerm {
    weight: f64,
    width: f64,
}

#[derive(Clone, Debug)]
struct PairTerm {
    weight: Complex64,
    center: Vec<Complex64>,
    width: f64,
}

/// A validated random displacement channel.
#[derive(Clone, Debug)]
pub struct ChannelSpec {
    n: usize,
    sigma: f64,
    peaks: Vec<Peak>,
    origin: Vec<OriginTerm>,
    pairs: Vec<PairTerm>,
    common_width: bool,
}

/// A displacement drawn from `p(α)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisplacementSample {
    pub alpha: ComplexVec,
    pub acceptance_trials: u64,
}

impl PartialEq for ChannelSpec {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.sigma == other.sigma && self.peaks == other.peaks
    }
}

fn gaussian(dist_sq: f64, width: f64) -> f64 {
    (-dist_sq / (2.0 * width * width)).exp()
}

fn dist_sq(a: &[Complex64], b: &[Complex64], sign: f64) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y * sign).norm_sqr()).sum()
}

impl ChannelSpec {
    /// Validates and builds a channel.
    ///
    /// Checks Hermitian closure, `λ(0) = 1`, and for common-width channels
    /// the certificate `Σ_{γ_k≠0} |c_k| ≤ c_0`.
    pub fn new(n: usize, sigma: f64, peaks: Vec<Peak>) -> Result<Self> {
        if n == 0 {
            return Err(domain("channel needs at least one mode"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(domain(format!("sigma must be positive and finite, got {sigma}")));
        }
        if peaks.is_empty() {
            return Err(Error::InvalidChannel("no peaks".into()));
        }
        for (k, p) in peaks.iter().enumerate() {
            check_len(n, p.center.len())?;
            if !p.weight.re.is_finite() || !p.weight.im.is_finite() {
                return Err(Error::InvalidChannel(format!("peak {k}: weight not finite")));
            }
            if let Some(w) = p.width {
                if !(w > 0.0) || !w.is_finite() {
                    return Err(Error::InvalidChannel(format!("peak {k}: width must be positive")));
                }
            }
        }

        let width_of = |p: &Peak| p.width.unwrap_or(sigma);
        let common_width = peaks.iter().all(|p| width_of(p) == sigma);

        let mut origin = Vec::new();
        let mut pairs = Vec::new();
        let mut used = vec![false; peaks.len()];
        for i in 0..peaks.len() {
            if used[i] {
                continue;
            }
            let p = &peaks[i];
            used[i] = true;
            if p.center.is_zero() {
                if p.weight.im != 0.0 {
                    return Err(Error::InvalidChannel(format!("peak {i}: origin weight must be real")));
                }
                origin.push(OriginTerm { weight: p.weight.re, width: width_of(p) });
                continue;
            }
            let mirror = p.center.neg();
            let partner = (0..peaks.len()).find(|&j| {
                !used[j]
                    && peaks[j].center == mirror
                    && peaks[j].weight == p.weight.conj()
                    && width_of(&peaks[j]) == width_of(p)
            });
            match partner {
                Some(j) => {
                    used[j] = true;
                    pairs.push(PairTerm {
                        weight: p.weight,
                        center: p.center.as_slice().to_vec(),
                        width: width_of(p),
                    });
                }
                None => {
                    return Err(Error::InvalidChannel(format!(
                        "peak {i} has no Hermitian partner (conj weight at -center)"
                    )))
                }
            }
        }

        let spec = Self { n, sigma, peaks, origin, pairs, common_width };
        let l0 = spec.lambda_slice(&vec![Complex64::new(0.0, 0.0); n]);
        if (l0 - Complex64::new(1.0, 0.0)).norm() > NORMALIZATION_TOL {
            return Err(Error::InvalidChannel(format!("lambda(0) = {l0}, expected 1")));
        }
        if common_width {
            let c0 = spec.origin_weight();
            let off: f64 = spec.pairs.iter().map(|t| 2.0 * t.weight.norm()).sum();
            if !(c0 > 0.0) || off > c0 + NORMALIZATION_TOL {
                return Err(Error::Nonnegativity(format!(
                    "off-origin weight mass {off} exceeds origin weight {c0}"
                )));
            }
        }
        Ok(spec)
    }

    /// Single Gaussian peak at the origin: `λ(β) = e^{−|β|²/(2σ²)}`.
    pub fn depolarizing(n: usize, sigma: f64) -> Result<Self> {
        Self::new(n, sigma, vec![Peak::new(Complex64::new(1.0, 0.0), ComplexVec::zeros(n.max(1)))])
    }

    /// Three-peak family
    /// `λ_γ(β) = e^{−|β|²/2σ²} + 2iε₀ e^{−|β−γ|²/2σ²} − 2iε₀ e^{−|β+γ|²/2σ²}`.
    ///
    /// `γ = 0` or `ε₀ = 0` returns the depolarizing channel.
    pub fn three_peak(n: usize, gamma: &ComplexVec, eps0: f64, sigma: f64) -> Result<Self> {
        check_len(n, gamma.len())?;
        if !(eps0 >= 0.0) {
            return Err(domain(format!("eps0 must be nonnegative, got {eps0}")));
        }
        if eps0 > 0.25 {
            return Err(Error::Nonnegativity(format!("eps0 = {eps0} exceeds 0.25")));
        }
        if gamma.is_zero() || eps0 == 0.0 {
            return Self::depolarizing(n, sigma);
        }
        let c = Complex64::new(0.0, 2.0 * eps0);
        Self::new(
            n,
            sigma,
            vec![
                Peak::new(Complex64::new(1.0, 0.0), ComplexVec::zeros(n)),
                Peak::new(c, gamma.clone()),
                Peak::new(c.conj(), gamma.neg()),
            ],
        )
    }

    /// Single-mode five-peak channel with weights
    /// `{1 at 0, ¼ at ±γ, −¼ at ±iγ}`.
    pub fn five_peak_example(sigma: f64, gamma: Complex64) -> Result<Self> {
        let g = ComplexVec::new(vec![gamma])?;
        let ig = g.scale(Complex64::new(0.0, 1.0));
        let q = Complex64::new(0.25, 0.0);
        Self::new(
            1,
            sigma,
            vec![
                Peak::new(Complex64::new(1.0, 0.0), ComplexVec::zeros(1)),
                Peak::new(q, g.clone()),
                Peak::new(q, g.neg()),
                Peak::new(-q, ig.clone()),
                Peak::new(-q, ig.neg()),
            ],
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn peaks(&self) -> &[Peak] {
        &self.peaks
    }

    /// `true` when every peak uses the common width.
    pub fn is_samplable(&self) -> bool {
        self.common_width
    }

    /// `c_0`, the total weight at the origin.
    pub fn origin_weight(&self) -> f64 {
        self.origin.iter().map(|t| t.weight).sum()
    }

    /// `M = Σ_k |c_k|`, the modulation bound used by the sampler.
    pub fn weight_bound(&self) -> f64 {
        self.origin.iter().map(|t| t.weight.abs()).sum::<f64>()
            + self.pairs.iter().map(|t| 2.0 * t.weight.norm()).sum::<f64>()
    }

    /// `λ(β)`.
    pub fn eval_lambda(&self, beta: &ComplexVec) -> Result<Complex64> {
        check_len(self.n, beta.len())?;
        Ok(self.lambda_slice(beta.as_slice()))
    }

    pub(crate) fn lambda_slice(&self, beta: &[Complex64]) -> Complex64 {
        let b2 = norm_sq(beta);
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.origin {
            acc += t.weight * gaussian(b2, t.width);
        }
        for t in &self.pairs {
            let a = gaussian(dist_sq(beta, &t.center, 1.0), t.width);
            let b = gaussian(dist_sq(beta, &t.center, -1.0), t.width);
            acc += t.weight * a + t.weight.conj() * b;
        }
        acc
    }

    /// `p(α)`, clamped to 0 inside `[−1e-12, 0)`.
    pub fn eval_p(&self, alpha: &ComplexVec) -> Result<f64> {
        check_len(self.n, alpha.len())?;
        Ok(self.p_slice(alpha.as_slice()))
    }

    pub(crate) fn p_slice(&self, alpha: &[Complex64]) -> f64 {
        let a2 = norm_sq(alpha);
        let n = self.n as i32;
        let envelope = |w: f64| (2.0 * w * w / PI).powi(n) * (-2.0 * w * w * a2).exp();
        let v = if self.common_width {
            envelope(self.sigma) * self.modulation(alpha)
        } else {
            let mut s = 0.0;
            for t in &self.origin {
                s += t.weight * envelope(t.width);
            }
            for t in &self.pairs {
                s += 2.0 * (t.weight * phase_kernel_slices(&t.center, alpha)).re * envelope(t.width);
            }
            s
        };
        if (-NORMALIZATION_TOL..0.0).contains(&v) {
            0.0
        } else {
            v
        }
    }

    /// Real modulation `m(α) = c_0 + Σ_pairs 2 Re(c e^{γ†α − α†γ})`.
    pub(crate) fn modulation(&self, alpha: &[Complex64]) -> f64 {
        let mut m = self.origin_weight();
        for t in &self.pairs {
            m += 2.0 * (t.weight * phase_kernel_slices(&t.center, alpha)).re;
        }
        m
    }

    /// Channel whose characteristic function is `λ(β) e^{−ν|β|²}`, i.e. `p`
    /// convolved with a Gaussian of per-quadrature variance `ν/2`.
    ///
    /// Each peak stays Gaussian: width `σ²/(1+2σ²ν)`, center
    /// `γ/(1+2σ²ν)` and weight `c·exp(−ν|γ|²/(1+2σ²ν))`.
    pub fn convolved(&self, nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(domain(format!("noise variance must be finite and nonnegative, got {nu}")));
        }
        if nu == 0.0 {
            return Ok(self.clone());
        }
        let shrink = |w: f64| 1.0 + 2.0 * w * w * nu;
        let sigma = self.sigma / shrink(self.sigma).sqrt();
        let peaks = self
            .peaks
            .iter()
            .map(|p| {
                let w = p.width.unwrap_or(self.sigma);
                let k = shrink(w);
                let width = p.width.map(|w| w / k.sqrt());
                let weight = p.weight * (-nu * p.center.norm_sq() / k).exp();
                let center = p.center.scale(Complex64::new(1.0 / k, 0.0));
                Peak { weight, center, width }
            })
            .collect();
        Self::new(self.n, sigma, peaks)
    }

    /// Draws one displacement `α ~ p(α)` from the start of `stream`.
    pub fn sample_displacement(&self, stream: RandomStream) -> Result<DisplacementSample> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        let trials = self.draw_into(&mut stream.rng(), &mut out)?;
        Ok(DisplacementSample { alpha: ComplexVec::new(out)?, acceptance_trials: trials })
    }

    /// Rejection sampler writing `α` into `out`; returns the trial count.
    pub(crate) fn draw_into(&self, rng: &mut StreamRng, out: &mut [Complex64]) -> Result<u64> {
        if !self.common_width {
            return Err(Error::NotSamplable("peaks do not share a common width".into()));
        }
        debug_assert_eq!(out.len(), self.n);
        let sd = 0.5 / self.sigma;
        let bound = self.weight_bound();
        let exact = self.pairs.is_empty();
        for trial in 1..=MAX_TRIALS {
            for z in out.iter_mut() {
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                *z = Complex64::new(sd * a, sd * b);
            }
            let u: f64 = rng.random();
            if exact || u * bound < self.modulation(out) {
                return Ok(trial);
            }
        }
        Err(Error::Internal(format!("rejection sampler exceeded {MAX_TRIALS} trials")))
    }
}
