//! Statistical helpers shared by the integration tests.

#![allow(dead_code)]

use displearn::{ChannelSpec, Complex64};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// The single-mode five-peak channel with `σ = 0.3`, `γ = 1.6`.
pub fn fig2_channel() -> ChannelSpec {
    ChannelSpec::five_peak_example(0.3, Complex64::new(1.6, 0.0)).unwrap()
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    (d, kolmogorov_sf(lambda))
}

/// Pearson χ² p-value for observed counts against expected counts.
pub fn chi_square_p(observed: &[u64], expected: &[f64], fitted: usize) -> f64 {
    let stat: f64 = observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    let dof = (observed.len() - 1 - fitted) as f64;
    ChiSquared::new(dof).unwrap().sf(stat)
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn ks_sanity() {
    let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
    let b: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
    assert!(ks_two_sample(&a, &b).1 > 0.99);
    let c: Vec<f64> = a.iter().map(|x| x + 0.2).collect();
    assert!(ks_two_sample(&a, &c).1 < 1e-10);
    assert!((kolmogorov_sf(1.358) - 0.05).abs() < 1e-3);
}
