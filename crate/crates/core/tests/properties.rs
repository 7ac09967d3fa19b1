//! Property-based invariants.

use displearn::bounds::{
    gaussian_tail, lower_bound_ef, lower_bound_ef_finite_sigma, lower_bound_ef_gaussian, tail_bound, upper_bound_ea,
    BoundQuery,
};
use displearn::estimation::{estimate_lambda, hoeffding_n};
use displearn::game::wilson_interval;
use displearn::measurement::{read_outcomes, sample_outcomes, sample_outcomes_with, write_outcomes, SamplingOptions};
use displearn::noise::{crosstalk_envelope, g_tmsv, noiseless_g_sq, phase_diffusion_g_sq};
use displearn::numerics::{phase_kernel, reg_upper_gamma};
use displearn::{ChannelSpec, Complex64, ComplexVec, Exec, Peak, RandomStream, SchemeConfig};
use proptest::prelude::*;

fn complex(range: f64) -> impl Strategy<Value = Complex64> {
    (-range..range, -range..range).prop_map(|(a, b)| Complex64::new(a, b))
}

fn cvec(n: usize, range: f64) -> impl Strategy<Value = ComplexVec> {
    prop::collection::vec(complex(range), n).prop_map(|v| ComplexVec::new(v).unwrap())
}

/// Random three-peak channels on 1 to 3 modes.
fn three_peak() -> impl Strategy<Value = ChannelSpec> {
    (1usize..=3)
        .prop_flat_map(|n| (cvec(n, 2.0), 0.0..=0.25f64, 0.1..2.0f64))
        .prop_map(|(g, eps0, sigma)| ChannelSpec::three_peak(g.len(), &g, eps0, sigma).unwrap())
}

fn channel_and_point() -> impl Strategy<Value = (ChannelSpec, ComplexVec)> {
    three_peak().prop_flat_map(|ch| {
        let n = ch.n();
        (Just(ch), cvec(n, 3.0))
    })
}

fn scheme() -> impl Strategy<Value = SchemeConfig> {
    (0.0..3.0f64, 0.5..=1.0f64, 0.5..=1.0f64, prop_oneof![Just(f64::INFINITY), 0.0..3.0f64])
        .prop_map(|(r, tb, ta, s)| SchemeConfig::new(r, tb, ta, s).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn characteristic_function_shape((ch, beta) in channel_and_point()) {
        prop_assert_eq!(ch.eval_lambda(&ComplexVec::zeros(ch.n())).unwrap(), Complex64::new(1.0, 0.0));
        let l = ch.eval_lambda(&beta).unwrap();
        prop_assert!(l.norm() <= 1.0 + 1e-12);
        prop_assert_eq!(ch.eval_lambda(&beta.neg()).unwrap(), l.conj());
    }

    #[test]
    fn density_nonnegative((ch, alpha) in channel_and_point()) {
        prop_assert!(ch.eval_p(&alpha).unwrap() >= 0.0);
    }

    #[test]
    fn json_round_trip_is_exact(ch in three_peak()) {
        let back = ChannelSpec::from_json(&ch.to_json()).unwrap();
        prop_assert_eq!(back.to_json(), ch.to_json());
        prop_assert_eq!(&back, &ch);
    }

    #[test]
    fn kernel_symmetries(a in cvec(3, 5.0), b in cvec(3, 5.0)) {
        let k = phase_kernel(&a, &b).unwrap();
        prop_assert!((k.norm() - 1.0).abs() < 1e-14);
        prop_assert_eq!(phase_kernel(&b, &a).unwrap(), k.conj());
        prop_assert_eq!(phase_kernel(&a, &a).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn convolution_multiplies_by_gaussian((ch, beta) in channel_and_point(), nu in 0.0..2.0f64) {
        let conv = ch.convolved(nu).unwrap();
        let want = ch.eval_lambda(&beta).unwrap() * (-nu * beta.norm_sq()).exp();
        let got = conv.eval_lambda(&beta).unwrap();
        prop_assert!((got - want).norm() <= 1e-12 * want.norm().max(1e-300) + 1e-300);
    }

    #[test]
    fn effective_squeezing_never_exceeds_input(cfg in scheme()) {
        prop_assert!(cfg.r_eff() <= cfg.r() + 1e-12);
        prop_assert!(cfg.noise_var() >= (-2.0 * cfg.r()).exp() * (1.0 - 1e-12));
    }

    #[test]
    fn g_is_bounded(a in cvec(2, 3.0), b in cvec(2, 3.0), r in 0.0..3.0f64) {
        let g = g_tmsv(&a, &b, r).unwrap();
        prop_assert!((0.0..=1.0).contains(&g));
        let aligned = g_tmsv(&b.conj(), &b, r).unwrap();
        prop_assert!((aligned * aligned / noiseless_g_sq(b.norm_sq(), r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_diffusion_only_degrades(b2 in 0.0..150.0f64, r in 0.0..2.0f64, d1 in 0.0..3.0f64, d2 in 0.0..3.0f64) {
        let beta = ComplexVec::uniform(4, b2);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let a = phase_diffusion_g_sq(&beta, r, lo.to_radians()).unwrap();
        let b = phase_diffusion_g_sq(&beta, r, hi.to_radians()).unwrap();
        let base = noiseless_g_sq(beta.norm_sq(), r);
        prop_assert!(a.g_sq <= base * (1.0 + 1e-9));
        prop_assert!(b.g_sq <= a.g_sq * (1.0 + 1e-8));
        prop_assert!(a.overhead >= 1.0);
    }

    #[test]
    fn crosstalk_envelope_in_unit_interval(beta in cvec(3, 4.0), r in 0.0..2.0f64, deg in -20.0..20.0f64) {
        let env = crosstalk_envelope(&beta, r, deg.to_radians()).unwrap();
        prop_assert!((0.0..=1.0).contains(&env.g_sq));
    }

    #[test]
    fn bound_relations(n in 1u32..10_000, kappa in 0.0..5.0f64, eps in 0.01..0.5f64, delta in 0.01..0.99f64, sigma in 0.01..3.0f64) {
        let q0 = BoundQuery::new(n, kappa, eps, delta, 0.0).unwrap();
        let q = BoundQuery { sigma, ..q0 };
        prop_assert_eq!(lower_bound_ef(&q0).unwrap().log10_n.to_bits(), lower_bound_ef_finite_sigma(&q0).unwrap().log10_n.to_bits());
        let g = lower_bound_ef_gaussian(&q).unwrap().log10_n;
        let f = lower_bound_ef_finite_sigma(&q).unwrap().log10_n;
        prop_assert!(g <= f);
        prop_assert!(f <= lower_bound_ef(&q0).unwrap().log10_n);
        for r in [0.0, 1.0, f64::INFINITY] {
            prop_assert!(upper_bound_ea(&q, r).unwrap().log10_n.is_finite());
        }
        prop_assert_eq!(lower_bound_ef(&q0).unwrap().valid, n >= 8 && eps <= 0.24);
    }

    #[test]
    fn hoeffding_monotone(b2 in 0.0..20.0f64, extra in 0.0..5.0f64, r in 0.0..2.0f64, eps in 0.05..0.5f64) {
        let a = hoeffding_n(eps, 0.1, r, b2).unwrap();
        prop_assert!(hoeffding_n(eps, 0.1, r, b2 + extra).unwrap() >= a);
        prop_assert!(hoeffding_n(eps * 1.5, 0.1, r, b2).unwrap() <= a);
        prop_assert!(hoeffding_n(eps, 0.1, r + 0.5, b2).unwrap() <= a);
    }

    #[test]
    fn tail_properties(n in 1u32..20_000, kappa in 0.01..10.0f64) {
        let t = gaussian_tail(n, kappa).unwrap();
        prop_assert!((0.0..=1.0).contains(&t));
        prop_assert!(t <= tail_bound(n) * (1.0 + 1e-12));
        prop_assert_eq!(t, gaussian_tail(n, 1.0).unwrap());
    }

    #[test]
    fn incomplete_gamma_decreasing(a in 0.5..500.0f64, x in 0.0..800.0f64, dx in 0.0..50.0f64) {
        let q1 = reg_upper_gamma(a, x).unwrap();
        let q2 = reg_upper_gamma(a, x + dx).unwrap();
        prop_assert!((0.0..=1.0).contains(&q1));
        prop_assert!(q2 <= q1 * (1.0 + 1e-12));
    }

    #[test]
    fn wilson_contains_estimate(n in 1usize..100_000, frac in 0.0..=1.0f64) {
        let k = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(lo <= p + 1e-12 && p <= hi + 1e-12 && 0.0 <= lo && hi <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn estimates_within_envelope((ch, beta) in channel_and_point(), cfg in scheme(), seed in any::<u64>()) {
        let s = sample_outcomes(&ch, &cfg, 64, RandomStream::root(seed)).unwrap();
        let e = estimate_lambda(&s, &beta).unwrap();
        prop_assert!(e.lambda_hat.norm() <= e.envelope * (1.0 + 1e-12));
        prop_assert!(e.std_error <= e.envelope / 8.0 * (1.0 + 1e-12));
    }

    #[test]
    fn sampling_independent_of_scheduling(ch in three_peak(), seed in any::<u64>(), count in 1usize..3000, chunk in 1usize..700) {
        let cfg = SchemeConfig::loss_after(1.0, 0.9).unwrap();
        let seq = SamplingOptions { chunk_size: chunk, exec: Exec::Sequential };
        let par = SamplingOptions { chunk_size: chunk, exec: Exec::default() };
        let a = sample_outcomes_with(&ch, &cfg, count, RandomStream::root(seed), &seq).unwrap();
        let b = sample_outcomes_with(&ch, &cfg, count, RandomStream::root(seed), &par).unwrap();
        prop_assert_eq!(a.as_flat(), b.as_flat());
        prop_assert_eq!(a.len(), count);
    }

    #[test]
    fn outcome_file_round_trip(ch in three_peak(), seed in any::<u64>(), count in 1usize..200) {
        let s = sample_outcomes(&ch, &SchemeConfig::vacuum_heterodyne(), count, RandomStream::new(seed, 3)).unwrap();
        let mut buf = Vec::new();
        write_outcomes(&mut buf, &s).unwrap();
        let back = read_outcomes(buf.as_slice()).unwrap();
        prop_assert_eq!(back, s);
    }
}

#[test]
fn peak_widths_must_be_positive() {
    let bad = Peak { width: Some(0.0), ..Peak::new(Complex64::new(1.0, 0.0), ComplexVec::zeros(1)) };
    assert!(ChannelSpec::new(1, 0.3, vec![bad]).is_err());
}
