//! Sample-complexity bounds in log10 form.
//!
//! Entanglement-free lower bounds, the entanglement-assisted upper bound,
//! their ratio, the Gaussian tail probability of the hidden peak location
//! and a Monte Carlo check of the coherent-state saturation value.

use std::f64::consts::LN_10;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::export::{fmt_f64, write_header};
use crate::measurement::SchemeConfig;
use crate::numerics::{log_reg_upper_gamma, RandomStream};

/// Largest `ε` for which the entanglement-free lower bounds hold.
pub const EPS_MAX: f64 = 0.24;
/// Smallest mode count for which the entanglement-free lower bounds hold.
pub const N_MIN: u32 = 8;
/// `k` in the tail bound `(k e^{1−k})ⁿ`.
pub const TAIL_K: f64 = 1.0 / 0.99;

/// Task parameters shared by every bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub n: u32,
    pub kappa: f64,
    pub eps: f64,
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
}

impl BoundQuery {
    pub fn new(n: u32, kappa: f64, eps: f64, delta: f64, sigma: f64) -> Result<Self> {
        let q = Self { n, kappa, eps, delta, sigma };
        q.check()?;
        Ok(q)
    }

    fn check(&self) -> Result<()> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(domain(format!("kappa must be finite and nonnegative, got {}", self.kappa)));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(domain(format!("eps must be positive, got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(domain(format!("sigma must be finite and nonnegative, got {}", self.sigma)));
        }
        Ok(())
    }

    /// `σ_γ² = 0.99κ/2`.
    pub fn sigma_gamma_sq(&self) -> f64 {
        0.99 * self.kappa / 2.0
    }

    /// Premises of the `σ = 0` lower bound: `n ≥ 8` and `ε ≤ 0.24`.
    pub fn main_premises_hold(&self) -> bool {
        self.n >= N_MIN && self.eps <= EPS_MAX
    }

    /// Width condition of the finite-`σ` lower bound.
    pub fn finite_sigma_condition_holds(&self) -> bool {
        finite_sigma_condition(self.kappa, self.sigma)
    }
}

/// `2σ² ≤ max{1 − 1.98κ, 0.99κ(√(1 + (0.99κ)⁻²) − 1)}`.
pub fn finite_sigma_condition(kappa: f64, sigma: f64) -> bool {
    let x = 0.99 * kappa;
    let second = if x > 0.0 { x * ((1.0 / (x * x)).ln_1p() / 2.0).exp_m1() } else { 0.0 };
    // x(√(1+x⁻²) − 1) written through exp_m1 to stay accurate for large x
    2.0 * sigma * sigma <= (1.0 - 1.98 * kappa).max(second)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "EF_main")]
    EfMain,
    #[serde(rename = "EF_finite_sigma")]
    EfFiniteSigma,
    #[serde(rename = "EF_gaussian")]
    EfGaussian,
    #[serde(rename = "EA_upper")]
    EaUpper,
}

/// Active branch of the Gaussian-scheme minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaussianBranch {
    /// `(1 + 0.99κ/σ²)^{n/2}`
    WidthLimited,
    /// `(1 + 1.98κ/(1+2σ²))ⁿ`
    FiniteSigma,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    #[serde(rename = "log10_N")]
    pub log10_n: f64,
    pub valid: bool,
    pub which: BoundKind,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<GaussianBranch>,
}

impl BoundResult {
    fn new(log10_n: f64, which: BoundKind, reasons: Vec<&str>) -> Self {
        Self {
            log10_n,
            valid: reasons.is_empty(),
            which,
            reason: (!reasons.is_empty()).then(|| reasons.join("; ")),
            branch: None,
        }
    }
}

fn premise_reasons(q: &BoundQuery) -> Vec<&'static str> {
    let mut r = Vec::new();
    if q.n < N_MIN {
        r.push("n < 8");
    }
    if q.eps > EPS_MAX {
        r.push("eps > 0.24");
    }
    r
}

/// `log10(0.01 ε⁻² (1 + 1.98κ/(1+2σ²))ⁿ)`; `σ = 0` gives the main bound.
fn ef_log10(q: &BoundQuery, sigma: f64) -> f64 {
    let base_m1 = 1.98 * q.kappa / (1.0 + 2.0 * sigma * sigma);
    (0.01f64.ln() - 2.0 * q.eps.ln() + q.n as f64 * base_m1.ln_1p()) / LN_10
}

/// `N ≥ 0.01 ε⁻² (1 + 1.98κ)ⁿ` for any entanglement-free scheme.
pub fn lower_bound_ef(q: &BoundQuery) -> Result<BoundResult> {
    q.check()?;
    Ok(BoundResult::new(ef_log10(q, 0.0), BoundKind::EfMain, premise_reasons(q)))
}

/// `N ≥ 0.01 ε⁻² (1 + 1.98κ/(1+2σ²))ⁿ`; flagged invalid when the width
/// condition fails.
pub fn lower_bound_ef_finite_sigma(q: &BoundQuery) -> Result<BoundResult> {
    q.check()?;
    let mut reasons = premise_reasons(q);
    if !q.finite_sigma_condition_holds() {
        reasons.push("sigma condition violated");
    }
    Ok(BoundResult::new(ef_log10(q, q.sigma), BoundKind::EfFiniteSigma, reasons))
}

/// Lower bound for entanglement-free Gaussian schemes:
/// `0.01 ε⁻² min{(1 + 0.99κ/σ²)^{n/2}, (1 + 1.98κ/(1+2σ²))ⁿ}`.
pub fn lower_bound_ef_gaussian(q: &BoundQuery) -> Result<BoundResult> {
    q.check()?;
    if q.sigma == 0.0 {
        return Err(domain("the Gaussian-scheme bound needs sigma > 0"));
    }
    let width = (0.01f64.ln() - 2.0 * q.eps.ln() + 0.5 * q.n as f64 * (0.99 * q.kappa / (q.sigma * q.sigma)).ln_1p()) / LN_10;
    let finite = ef_log10(q, q.sigma);
    let (log10_n, branch) = if width < finite {
        (width, GaussianBranch::WidthLimited)
    } else {
        (finite, GaussianBranch::FiniteSigma)
    };
    let mut out = BoundResult::new(log10_n, BoundKind::EfGaussian, premise_reasons(q));
    out.branch = Some(branch);
    Ok(out)
}

/// Worst case over `|β|² ≤ κn` of the entanglement-assisted sample count:
/// `8 e^{2e^{−2r_eff}κn} ε⁻² ln(4/δ)`.
pub fn upper_bound_ea(q: &BoundQuery, r_eff: f64) -> Result<BoundResult> {
    q.check()?;
    if r_eff.is_nan() {
        return Err(domain("r_eff is NaN"));
    }
    let nu = (-2.0 * r_eff).exp();
    let ln_n = 8f64.ln() + 2.0 * nu * q.kappa * q.n as f64 - 2.0 * q.eps.ln() + (4.0 / q.delta).ln().ln();
    Ok(BoundResult::new(ln_n / LN_10, BoundKind::EaUpper, Vec::new()))
}

/// Which entanglement-free bound the advantage ratio compares against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfVariant {
    #[default]
    Main,
    FiniteSigma,
    Gaussian,
}

pub fn lower_bound(q: &BoundQuery, variant: EfVariant) -> Result<BoundResult> {
    match variant {
        EfVariant::Main => lower_bound_ef(q),
        EfVariant::FiniteSigma => lower_bound_ef_finite_sigma(q),
        EfVariant::Gaussian => lower_bound_ef_gaussian(q),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Advantage {
    pub log10_ratio: f64,
    pub valid: bool,
    pub lower: BoundResult,
    pub upper: BoundResult,
}

/// `log10(N_lower / N_upper)`; invalid when the lower bound is.
pub fn advantage_ratio(q: &BoundQuery, r_eff: f64, variant: EfVariant) -> Result<Advantage> {
    let lower = lower_bound(q, variant)?;
    let upper = upper_bound_ea(q, r_eff)?;
    Ok(Advantage {
        log10_ratio: lower.log10_n - upper.log10_n,
        valid: lower.valid && upper.valid,
        lower,
        upper,
    })
}

/// `Pr(|γ|² > κn) = Q(n, n/0.99)` for `γ` with `2σ_γ² = 0.99κ` per mode.
/// The result does not depend on `κ`.
pub fn gaussian_tail(n: u32, kappa: f64) -> Result<f64> {
    Ok(log_gaussian_tail(n, kappa)?.exp())
}

pub fn log_gaussian_tail(n: u32, kappa: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("gaussian_tail needs n >= 1"));
    }
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(domain(format!("kappa must be positive, got {kappa}")));
    }
    // R²/(2σ_γ²) = κn/(0.99κ); κ cancels exactly
    log_reg_upper_gamma(n as f64, n as f64 / 0.99)
}

/// `(k e^{1−k})ⁿ` with `k = 1/0.99`.
pub fn tail_bound(n: u32) -> f64 {
    (n as f64 * (TAIL_K.ln() + 1.0 - TAIL_K)).exp()
}

/// Outcome of [`lemma1_saturation`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaturationCheck {
    pub mc_estimate: f64,
    pub std_error: f64,
    pub closed_form: f64,
    pub condition_ok: bool,
}

impl SaturationCheck {
    pub fn z_score(&self) -> f64 {
        (self.mc_estimate - self.closed_form) / self.std_error
    }
}

/// `((1+2σ²)/(1+2σ²+4σ_γ²))ⁿ`.
pub fn lemma1_closed_form(n: u32, sigma: f64, sigma_gamma_sq: f64) -> f64 {
    let a = 1.0 + 2.0 * sigma * sigma;
    (n as f64 * (a / (a + 4.0 * sigma_gamma_sq)).ln()).exp()
}

/// `σ² ≤ max{½ − 2σ_γ², σ_γ²(√(1 + 1/(4σ_γ⁴)) − 1)}`.
pub fn lemma1_condition(sigma: f64, sigma_gamma_sq: f64) -> bool {
    let s = sigma_gamma_sq;
    let second = if s > 0.0 { s * ((0.25 / (s * s)).ln_1p() / 2.0).exp_m1() } else { 0.0 };
    sigma * sigma <= (0.5 - 2.0 * s).max(second)
}

const SATURATION_CHUNK: usize = 1 << 15;

/// Monte Carlo `E_γ[e^{−2|γ|²/(1+2σ²)}]` with `γ ~ N(0, σ_γ²)` per
/// quadrature, next to the closed form.
pub fn lemma1_saturation(n: u32, sigma: f64, sigma_gamma_sq: f64, m: usize, stream: RandomStream) -> Result<SaturationCheck> {
    lemma1_saturation_with(n, sigma, sigma_gamma_sq, m, stream, Exec::default())
}

pub fn lemma1_saturation_with(
    n: u32,
    sigma: f64,
    sigma_gamma_sq: f64,
    m: usize,
    stream: RandomStream,
    exec: Exec,
) -> Result<SaturationCheck> {
    if n == 0 || m < 2 {
        return Err(domain("lemma1_saturation needs n >= 1 and at least two draws"));
    }
    if !(sigma >= 0.0 && sigma_gamma_sq >= 0.0 && sigma.is_finite() && sigma_gamma_sq.is_finite()) {
        return Err(domain("sigma and sigma_gamma^2 must be finite and nonnegative"));
    }
    let a = 2.0 / (1.0 + 2.0 * sigma * sigma);
    let chunks = m.div_ceil(SATURATION_CHUNK);
    let partial = exec.map_range(chunks, |k| {
        let len = SATURATION_CHUNK.min(m - k * SATURATION_CHUNK);
        let mut rng = stream.child(k as u64).rng();
        let mut gamma = vec![num_complex::Complex64::default(); n as usize];
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..len {
            crate::numerics::fill_gaussian(&mut rng, &mut gamma, sigma_gamma_sq);
            let f = (-a * crate::numerics::norm_sq(&gamma)).exp();
            s1 += f;
            s2 += f * f;
        }
        (s1, s2)
    });
    let (s1, s2) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let mf = m as f64;
    let mean = s1 / mf;
    let var = (s2 / mf - mean * mean).max(0.0) * mf / (mf - 1.0);
    Ok(SaturationCheck {
        mc_estimate: mean,
        std_error: (var / mf).sqrt(),
        closed_form: lemma1_closed_form(n, sigma, sigma_gamma_sq),
        condition_ok: lemma1_condition(sigma, sigma_gamma_sq),
    })
}

/// One cell of an advantage grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundsRow {
    pub query: BoundQuery,
    pub scheme: SchemeConfig,
    pub variant: EfVariant,
    pub advantage: Advantage,
}

impl BoundsRow {
    pub fn evaluate(query: BoundQuery, scheme: SchemeConfig, variant: EfVariant) -> Result<Self> {
        let advantage = advantage_ratio(&query, scheme.r_eff(), variant)?;
        Ok(Self { query, scheme, variant, advantage })
    }

    /// `ok`, or the failed premises joined by `|`.
    pub fn valid_flags(&self) -> String {
        match &self.advantage.lower.reason {
            None => "ok".into(),
            Some(r) => r.replace("; ", "|").replace(' ', "_"),
        }
    }
}

pub const BOUNDS_COLUMNS: [&str; 12] = [
    "n", "kappa", "eps", "delta", "sigma", "r", "T_b", "T_a", "log10_N_lower", "log10_N_upper", "log10_ratio", "valid_flags",
];

/// Writes an advantage grid as CSV.
pub fn write_bounds_csv<W: Write, C: Serialize>(mut w: W, config: &C, rows: &[BoundsRow]) -> Result<()> {
    write_header(&mut w, "bounds", config)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BOUNDS_COLUMNS)?;
    for row in rows {
        let q = &row.query;
        out.write_record([
            q.n.to_string(),
            fmt_f64(q.kappa),
            fmt_f64(q.eps),
            fmt_f64(q.delta),
            fmt_f64(q.sigma),
            fmt_f64(row.scheme.r()),
            fmt_f64(row.scheme.t_b()),
            fmt_f64(row.scheme.t_a()),
            fmt_f64(row.advantage.lower.log10_n),
            fmt_f64(row.advantage.upper.log10_n),
            fmt_f64(row.advantage.log10_ratio),
            row.valid_flags(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
