use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::effective_noise_var;

/// Parameters of a TMSV plus Bell-measurement scheme.
///
/// `r` is the input squeezing, `t_b` and `t_a` the transmissions before and
/// after the channel, and `s` the squeezing of the measurement (`+∞` for an
/// ideal Bell measurement). All imperfections fold into the single
/// effective noise variance `ν = e^{−2 r_eff}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeConfig {
    r: f64,
    t_b: f64,
    t_a: f64,
    s: f64,
    noise_var: f64,
}

impl SchemeConfig {
    pub fn new(r: f64, t_b: f64, t_a: f64, s: f64) -> Result<Self> {
        let noise_var = effective_noise_var(r, t_b, t_a, s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(Self { r, t_b, t_a, s, noise_var })
    }

    /// Lossless scheme with perfect Bell measurement; `r_eff = r`.
    pub fn ideal(r: f64) -> Result<Self> {
        Self::new(r, 1.0, 1.0, f64::INFINITY)
    }

    /// Vacuum probe with heterodyne detection, the `r = 0` ideal scheme.
    pub fn vacuum_heterodyne() -> Self {
        Self::ideal(0.0).expect("valid preset")
    }

    /// Loss only after the channel.
    pub fn loss_after(r: f64, t_a: f64) -> Result<Self> {
        Self::new(r, 1.0, t_a, f64::INFINITY)
    }

    /// Loss only before the channel.
    pub fn loss_before(r: f64, t_b: f64) -> Result<Self> {
        Self::new(r, t_b, 1.0, f64::INFINITY)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t_b(&self) -> f64 {
        self.t_b
    }

    pub fn t_a(&self) -> f64 {
        self.t_a
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// `ν = e^{−2 r_eff}`.
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// Effective squeezing; `+∞` when `ν = 0`.
    pub fn r_eff(&self) -> f64 {
        -0.5 * self.noise_var.ln() + 0.0
    }

    /// Estimator envelope `e^{ν|β|²}`.
    pub fn envelope(&self, beta_norm_sq: f64) -> f64 {
        (self.noise_var * beta_norm_sq).exp()
    }
}

fn finite_or_null(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Wire form; `null` squeezing means `+∞`.
#[derive(Serialize, Deserialize)]
struct SchemeRecord {
    r: Option<f64>,
    #[serde(rename = "T_b")]
    t_b: f64,
    #[serde(rename = "T_a")]
    t_a: f64,
    s: Option<f64>,
    #[serde(default, skip_deserializing)]
    r_eff: Option<f64>,
}

impl Serialize for SchemeConfig {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        SchemeRecord {
            r: finite_or_null(self.r),
            t_b: self.t_b,
            t_a: self.t_a,
            s: finite_or_null(self.s),
            r_eff: finite_or_null(self.r_eff()),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for SchemeConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = SchemeRecord::deserialize(d)?;
        SchemeConfig::new(
            rec.r.unwrap_or(f64::INFINITY),
            rec.t_b,
            rec.t_a,
            rec.s.unwrap_or(f64::INFINITY),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ideal_preset() {
        let c = SchemeConfig::ideal(1.3).unwrap();
        assert_eq!(c.noise_var(), (-2.6f64).exp());
        assert!((c.r_eff() - 1.3).abs() < 1e-15);
        assert_eq!(SchemeConfig::vacuum_heterodyne().noise_var(), 1.0);
        assert_eq!(SchemeConfig::ideal(f64::INFINITY).unwrap().noise_var(), 0.0);
    }

    #[test]
    fn loss_after_ten_percent() {
        let c = SchemeConfig::loss_after(1.0, 0.9).unwrap();
        assert!((c.noise_var() - ((-2.0f64).exp() + 1.0 / 9.0)).abs() < 1e-15);
        assert!((c.r_eff() - 0.70025).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_transmission() {
        assert!(matches!(SchemeConfig::new(1.0, 0.0, 1.0, 1.0), Err(Error::Config(_))));
        assert!(SchemeConfig::new(1.0, 1.0, 1.1, 1.0).is_err());
        assert!(SchemeConfig::new(-1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn serde_round_trip() {
        for c in [SchemeConfig::ideal(2.0).unwrap(), SchemeConfig::new(0.5, 0.8, 0.9, 1.2).unwrap()] {
            let s = serde_json::to_string(&c).unwrap();
            let back: SchemeConfig = serde_json::from_str(&s).unwrap();
            assert_eq!(back, c);
        }
        let s = serde_json::to_string(&SchemeConfig::ideal(2.0).unwrap()).unwrap();
        assert!(s.contains(r#""s":null"#));
    }
}
