//! Analytic noise envelopes.
//!
//! For an input state with two-mode characteristic function `g(ω₁, ω₂)`
//! the estimator of `λ(β)` is scaled by `1/g(β*, β)`, so the sample count
//! grows like `|g(β*, β)|⁻²`. This module evaluates that factor for the
//! squeezed pair under loss, phase diffusion and Bell-measurement crosstalk.

use num_complex::Complex64;

use crate::error::{check_len, domain, Error, Result};
use crate::measurement::check_crosstalk_angle;
use crate::numerics::quadrature::gaussian_expectation;
use crate::numerics::ComplexVec;

/// `e^{−2 r_eff} = T_b e^{−2r} + e^{−2s}/T_a + (1 − T_b) + (1 − T_a)/T_a`.
///
/// `r` and `s` may be `+∞`.
pub fn effective_noise_var(r: f64, t_b: f64, t_a: f64, s: f64) -> Result<f64> {
    for (name, t) in [("T_b", t_b), ("T_a", t_a)] {
        if !(t > 0.0 && t <= 1.0) {
            return Err(domain(format!("{name} must lie in (0, 1], got {t}")));
        }
    }
    for (name, x) in [("r", r), ("s", s)] {
        if !(x >= 0.0) {
            return Err(domain(format!("{name} must be nonnegative, got {x}")));
        }
    }
    Ok(t_b * (-2.0 * r).exp() + (-2.0 * s).exp() / t_a + (1.0 - t_b) + (1.0 - t_a) / t_a)
}

/// Effective squeezing `r_eff`; `+∞` only for a lossless, perfectly
/// squeezed configuration.
pub fn r_eff(r: f64, t_b: f64, t_a: f64, s: f64) -> Result<f64> {
    // `+ 0.0` turns −0.0 (at ν = 1) into 0.0
    Ok(-0.5 * effective_noise_var(r, t_b, t_a, s)?.ln() + 0.0)
}

/// Exponent of the per-mode TMSV characteristic function in the form
/// `exp(−¼[e^{−2r}|ω₁+ω₂*|² + e^{2r}|ω₁−ω₂*|²])`, algebraically equal to
/// `exp(−½[(|ω₁|²+|ω₂|²) cosh 2r − 2 Re(ω₁ω₂) sinh 2r])` but free of the
/// cancellation between `cosh` and `sinh` at large `r`.
fn g_mode_exponent(w1: Complex64, w2: Complex64, r: f64) -> f64 {
    let plus = (w1 + w2.conj()).norm_sqr();
    let minus = (w1 - w2.conj()).norm_sqr();
    let mut e = 0.0;
    if plus != 0.0 {
        e += (-2.0 * r).exp() * plus;
    }
    if minus != 0.0 {
        e += (2.0 * r).exp() * minus;
    }
    0.25 * e
}

/// TMSV characteristic function `g(ω₁, ω₂)`, product over modes.
pub fn g_tmsv(w1: &ComplexVec, w2: &ComplexVec, r: f64) -> Result<f64> {
    check_len(w1.len(), w2.len())?;
    if !(r >= 0.0) {
        return Err(domain(format!("r must be nonnegative, got {r}")));
    }
    Ok(g_tmsv_slices(w1.as_slice(), w2.as_slice(), r))
}

pub(crate) fn g_tmsv_slices(w1: &[Complex64], w2: &[Complex64], r: f64) -> f64 {
    let e: f64 = w1.iter().zip(w2).map(|(a, b)| g_mode_exponent(*a, *b, r)).sum();
    (-e).exp()
}

/// Squared envelope `|g|²` at one `β` and the matching sample overhead.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseEnvelope {
    pub beta: ComplexVec,
    pub g_sq: f64,
    /// `1/g_sq`; `+∞` when `g_sq` underflows to 0.
    pub overhead: f64,
}

impl NoiseEnvelope {
    fn new(beta: &ComplexVec, g_sq: f64) -> Self {
        Self { beta: beta.clone(), g_sq, overhead: 1.0 / g_sq }
    }
}

/// Noiseless squeezed-pair envelope `exp(−2e^{−2r}|β|²)`.
pub fn noiseless_g_sq(beta_norm_sq: f64, r: f64) -> f64 {
    (-2.0 * (-2.0 * r).exp() * beta_norm_sq).exp()
}

const PD_TOL: f64 = 1e-8;
const PD_MIN_ORDER: usize = 8;
const PD_MAX_ORDER: usize = 1024;

/// `ln E[g_mode]` for one mode with `|β_j|² = b2` under phase spread `delta`.
///
/// The mode integrand depends on the phases only through `ψ = φ_A + φ_B`,
/// which is `N(0, 2Δ²)`. Writing it as
/// `e^{−b2 e^{−2r}} · e^{−A(1 − cos ψ)}` with `A = ½ b2 (e^{2r} − e^{−2r})`,
/// the factor `e^{−Aψ²/2}` is absorbed into the Gaussian weight and the
/// smooth remainder `e^{A(ψ²/2 − 1 + cos ψ)}` is integrated by
/// Gauss–Hermite, doubling the order until the relative change is below
/// `1e-8`.
fn log_phase_averaged_mode(b2: f64, r: f64, delta: f64) -> Result<f64> {
    let (em, ep) = ((-2.0 * r).exp(), (2.0 * r).exp());
    let a = 0.5 * b2 * (ep - em);
    let var = 2.0 * delta * delta;
    let var_w = var / (1.0 + a * var);
    let sd_w = var_w.sqrt();
    let remainder = |psi: f64| (a * (0.5 * psi * psi - 1.0 + psi.cos())).exp();
    let mut order = PD_MIN_ORDER;
    let mut prev = gaussian_expectation(order, sd_w, remainder);
    loop {
        order *= 2;
        let cur = gaussian_expectation(order, sd_w, remainder);
        let converged = (cur - prev).abs() <= PD_TOL * cur.abs();
        prev = cur;
        if converged {
            break;
        }
        if order >= PD_MAX_ORDER {
            return Err(Error::Internal(format!("phase-diffusion quadrature did not converge at |beta_j|^2 = {b2}")));
        }
    }
    Ok(-b2 * em + 0.5 * (var_w / var).ln() + prev.ln())
}

/// `|g_Δ(β*, β)|²` for phase diffusion of standard deviation `delta_rad`
/// on every mode of both arms of the squeezed pair.
pub fn phase_diffusion_g_sq(beta: &ComplexVec, r: f64, delta_rad: f64) -> Result<NoiseEnvelope> {
    if !(delta_rad >= 0.0) || !delta_rad.is_finite() {
        return Err(domain(format!("phase spread must be finite and nonnegative, got {delta_rad}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(format!("r must be finite and nonnegative, got {r}")));
    }
    if delta_rad == 0.0 {
        return Ok(NoiseEnvelope::new(beta, noiseless_g_sq(beta.norm_sq(), r)));
    }
    let mut b2s: Vec<f64> = beta.as_slice().iter().map(|z| z.norm_sqr()).collect();
    b2s.sort_by(f64::total_cmp);
    let mut log_g = 0.0;
    let mut i = 0;
    while i < b2s.len() {
        let b2 = b2s[i];
        let mult = b2s[i..].iter().take_while(|&&x| x == b2).count();
        i += mult;
        if b2 != 0.0 {
            log_g += mult as f64 * log_phase_averaged_mode(b2, r, delta_rad)?;
        }
    }
    Ok(NoiseEnvelope::new(beta, (2.0 * log_g).exp()))
}

/// `β^θ` with `Re β^θ = (cos θ − sin θ)/(sin θ + cos θ)·Re β` and
/// `Im β^θ = (sin θ + cos θ)/(sin θ − cos θ)·Im β`.
pub fn crosstalk_beta(beta: &ComplexVec, theta: f64) -> Result<ComplexVec> {
    check_crosstalk_angle(theta)?;
    let (s, c) = theta.sin_cos();
    let (kr, ki) = ((c - s) / (s + c), (s + c) / (s - c));
    ComplexVec::new(beta.as_slice().iter().map(|z| Complex64::new(kr * z.re, ki * z.im)).collect())
}

/// Crosstalk envelope `|g(β^θ, β, r)|² cos^{2n}(2θ)`.
pub fn crosstalk_envelope(beta: &ComplexVec, r: f64, theta: f64) -> Result<NoiseEnvelope> {
    if theta == 0.0 {
        if !(r >= 0.0) {
            return Err(domain(format!("r must be nonnegative, got {r}")));
        }
        return Ok(NoiseEnvelope::new(beta, noiseless_g_sq(beta.norm_sq(), r)));
    }
    let bt = crosstalk_beta(beta, theta)?;
    let g = g_tmsv(&bt, beta, r)?;
    let n = beta.len() as f64;
    let cos_term = (n * (2.0 * theta).cos().ln()).exp();
    Ok(NoiseEnvelope::new(beta, g * g * cos_term * cos_term))
}

/// Hoeffding sample count `8 g_sq⁻¹ ε⁻² ln(4/δ)` for an input state with
/// squared envelope `g_sq`; `+∞` when `g_sq = 0`.
pub fn sample_overhead(g_sq: f64, eps: f64, delta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&g_sq) {
        return Err(domain(format!("g_sq must lie in [0, 1], got {g_sq}")));
    }
    if !(eps > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(domain("need eps > 0 and delta in (0, 1)"));
    }
    if g_sq == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(8.0 / g_sq / (eps * eps) * (4.0 / delta).ln())
}
