//! One function per subcommand. Each returns its tables plus a list of
//! numeric-validity violations, which `--strict` turns into exit code 3.

use std::fs::File;
use std::io::BufReader;

use displearn::bounds::{BoundQuery, BoundsRow, EfVariant};
use displearn::estimation::{
    empirical_failure_rate, estimate_lambda, estimate_lambda_batch, estimate_lambda_crosstalk, hoeffding_n_from_noise,
    EstimateResult,
};
use displearn::game::{run_game, GameConfig, GameSummary, SamplePolicy};
use displearn::measurement::{
    read_outcomes, sample_outcomes, sample_outcomes_crosstalk, sample_outcomes_physical, sample_outcomes_with,
    MeasuredDensity, OutcomeModel, OutcomeSamples, SamplingOptions,
};
use displearn::noise::{crosstalk_envelope, noiseless_g_sq, phase_diffusion_g_sq};
use displearn::numerics::fourier::Grid2;
use displearn::{bounds, ChannelSpec, Complex64, ComplexVec, Exec, RandomStream, SchemeConfig};

use crate::config::*;
use crate::failure::Failure;
use crate::output::{Artifact, Cell, Table};

pub struct Outcome {
    pub artifact: Artifact,
    pub violations: Vec<String>,
}

/// Largest per-run sample count the CLI accepts.
const MAX_SAMPLES: u64 = 100_000_000;

fn positive(field: &str, x: f64) -> Result<(), Failure> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Failure::config(field, format!("must be positive and finite, got {x}")))
    }
}

fn at_least(field: &str, x: usize, min: usize) -> Result<(), Failure> {
    if x >= min {
        Ok(())
    } else {
        Err(Failure::config(field, format!("must be at least {min}, got {x}")))
    }
}

fn scheme(field: &str, r: f64, t_b: f64, t_a: f64, s: Option<f64>) -> Result<SchemeConfig, Failure> {
    SchemeConfig::new(r, t_b, t_a, s.unwrap_or(f64::INFINITY)).map_err(|e| Failure::config(field, e))
}

pub fn fig2(p: &Fig2Params, seed: u64) -> Result<Outcome, Failure> {
    positive("params.sigma", p.sigma)?;
    at_least("params.samples", p.samples, 1)?;
    at_least("params.density_points", p.density_points, 2)?;
    at_least("params.charfn_points", p.charfn_points, 2)?;
    let spec = ChannelSpec::five_peak_example(p.sigma, Complex64::new(p.gamma_re, p.gamma_im))?;
    let ea = scheme("params.r", p.r, 1.0, 1.0, None)?;
    let vh = SchemeConfig::vacuum_heterodyne();
    let m_ea = MeasuredDensity::new(&spec, &ea)?;
    let m_vh = MeasuredDensity::new(&spec, &vh)?;

    let grid = Grid2::new(p.density_half_width, p.density_points).map_err(|e| Failure::config("params.density_half_width", e))?;
    let blocks = Exec::default().try_map_range(grid.points, |i| -> displearn::Result<Vec<[f64; 5]>> {
        (0..grid.points)
            .map(|j| {
                let a = ComplexVec::scalar(grid.node(i, j));
                Ok([a[0].re, a[0].im, spec.eval_p(&a)?, m_ea.eval(&a)?, m_vh.eval(&a)?])
            })
            .collect()
    })?;
    let mut density = Table::new("fig2_density", ["alpha_re", "alpha_im", "p_true", "p_ea", "p_vh"]);
    let mut cols = [Vec::new(), Vec::new(), Vec::new()];
    for row in blocks.into_iter().flatten() {
        for k in 0..3 {
            cols[k].push(row[2 + k]);
        }
        density.push(row.iter().map(|&x| Cell::F(x)).collect());
    }
    let mut violations = Vec::new();
    for (name, values) in ["p_true", "p_ea", "p_vh"].iter().zip(&cols) {
        let mass = grid.integrate(values);
        if (mass - 1.0).abs() > 1e-4 {
            violations.push(format!("{name} integrates to {mass} on the density grid"));
        }
    }

    let bgrid = Grid2::new(p.charfn_half_width, p.charfn_points).map_err(|e| Failure::config("params.charfn_half_width", e))?;
    let betas: Vec<ComplexVec> = bgrid.tabulate(ComplexVec::scalar);
    let root = RandomStream::root(seed);
    let s_ea = sample_outcomes(&spec, &ea, p.samples, root.child(0))?;
    let s_vh = sample_outcomes(&spec, &vh, p.samples, root.child(1))?;
    let est_ea = estimate_lambda_batch(&s_ea, &betas)?;
    let est_vh = estimate_lambda_batch(&s_vh, &betas)?;
    let mut charfn = Table::new(
        "fig2_charfn",
        [
            "beta_re", "beta_im", "lambda_re", "lambda_im", "lambda_ea_re", "lambda_ea_im", "lambda_vh_re", "lambda_vh_im",
            "est_ea_re", "est_ea_im", "se_ea", "est_vh_re", "est_vh_im", "se_vh",
        ],
    );
    for ((b, e1), e2) in betas.iter().zip(&est_ea).zip(&est_vh) {
        let lam = spec.eval_lambda(b)?;
        let b2 = b.norm_sq();
        let l_ea = lam / ea.envelope(b2);
        let l_vh = lam / vh.envelope(b2);
        charfn.push(
            [
                b[0].re, b[0].im, lam.re, lam.im, l_ea.re, l_ea.im, l_vh.re, l_vh.im, e1.lambda_hat.re, e1.lambda_hat.im,
                e1.std_error, e2.lambda_hat.re, e2.lambda_hat.im, e2.std_error,
            ]
            .map(Cell::F)
            .to_vec(),
        );
    }
    Ok(Outcome {
        artifact: Artifact { command: "fig2".into(), tables: vec![("density".into(), density), ("charfn".into(), charfn)] },
        violations,
    })
}

pub fn advantage(p: &AdvantageParams) -> Result<Outcome, Failure> {
    if !(0.0..1.0).contains(&p.loss) {
        return Err(Failure::config("params.loss", format!("must lie in [0, 1), got {}", p.loss)));
    }
    if p.n_min == 0 || p.n_min > p.n_max {
        return Err(Failure::config("params.n_min", "need 1 <= n_min <= n_max"));
    }
    let variant = match p.variant {
        Variant::Auto if p.sigma == 0.0 => EfVariant::Main,
        Variant::Auto | Variant::FiniteSigma => EfVariant::FiniteSigma,
        Variant::Main => EfVariant::Main,
        Variant::Gaussian if p.sigma == 0.0 => {
            return Err(Failure::config("params.variant", "the gaussian variant needs sigma > 0"))
        }
        Variant::Gaussian => EfVariant::Gaussian,
    };
    let t = 1.0 - p.loss;
    let make = |r: f64| match p.placement {
        Placement::After => scheme("params.r", r, 1.0, t, p.s),
        Placement::Before => scheme("params.r", r, t, 1.0, p.s),
    };
    let cells: Vec<(f64, SchemeConfig)> = match p.axis {
        Axis::Kappa => {
            let s = make(p.r)?;
            p.kappas.iter().map(|&k| (k, s)).collect()
        }
        Axis::R => p.rs.iter().map(|&r| make(r).map(|s| (p.kappa, s))).collect::<Result<_, _>>()?,
    };
    if cells.is_empty() {
        return Err(Failure::config("params.kappas", "the grid is empty"));
    }
    let mut queries = Vec::new();
    for &(kappa, s) in &cells {
        for n in p.n_min..=p.n_max {
            let q = BoundQuery::new(n, kappa, p.eps, p.delta, p.sigma).map_err(|e| Failure::config("params", e))?;
            queries.push((q, s));
        }
    }
    let rows = Exec::default().try_map_range(queries.len(), |i| BoundsRow::evaluate(queries[i].0, queries[i].1, variant))?;
    let mut table = Table::new("advantage", bounds::BOUNDS_COLUMNS);
    let mut invalid = 0;
    for row in &rows {
        let q = &row.query;
        if !row.advantage.valid {
            invalid += 1;
        }
        table.push(vec![
            q.n.into(),
            q.kappa.into(),
            q.eps.into(),
            q.delta.into(),
            q.sigma.into(),
            row.scheme.r().into(),
            row.scheme.t_b().into(),
            row.scheme.t_a().into(),
            row.advantage.lower.log10_n.into(),
            row.advantage.upper.log10_n.into(),
            row.advantage.log10_ratio.into(),
            row.valid_flags().into(),
        ]);
    }
    let violations = if invalid > 0 { vec![format!("{invalid} grid cells violate the bound premises")] } else { Vec::new() };
    Ok(Outcome { artifact: Artifact::single("advantage", table), violations })
}

pub fn complexity(p: &ComplexityParams, seed: u64) -> Result<Outcome, Failure> {
    if p.r_values.len() != p.beta_norm_sq.len() || p.r_values.is_empty() {
        return Err(Failure::config("params.beta_norm_sq", "needs one entry per r value"));
    }
    at_least("params.trials", p.trials, 100)?;
    let spec = ChannelSpec::five_peak_example(p.sigma, Complex64::new(p.gamma_re, p.gamma_im))?;
    let mut table = Table::new(
        "complexity",
        ["r", "T_a", "r_eff", "beta_norm_sq", "eps", "delta", "N", "trials", "failure_rate", "within_delta"],
    );
    let mut violations = Vec::new();
    for (i, (&r, &b2)) in p.r_values.iter().zip(&p.beta_norm_sq).enumerate() {
        let s = scheme(&format!("params.r_values[{i}]"), r, 1.0, p.t_a, None)?;
        if !(b2 >= 0.0 && b2.is_finite()) {
            return Err(Failure::config(&format!("params.beta_norm_sq[{i}]"), "must be finite and nonnegative"));
        }
        let n = hoeffding_n_from_noise(p.eps, p.delta, s.noise_var(), b2).map_err(|e| Failure::config("params.eps", e))?;
        if n > MAX_SAMPLES {
            return Err(Failure::config(&format!("params.beta_norm_sq[{i}]"), format!("needs {n} samples per trial")));
        }
        let beta = ComplexVec::scalar(Complex64::new(b2.sqrt(), 0.0));
        let rate = empirical_failure_rate(&spec, &s, &beta, p.eps, n as usize, p.trials, RandomStream::root(seed).child(i as u64))?;
        let ok = rate <= p.delta;
        if !ok {
            violations.push(format!("failure rate {rate} exceeds delta at r={r}, |beta|^2={b2}"));
        }
        table.push(vec![
            r.into(),
            p.t_a.into(),
            s.r_eff().into(),
            b2.into(),
            p.eps.into(),
            p.delta.into(),
            n.into(),
            p.trials.into(),
            rate.into(),
            ok.into(),
        ]);
    }
    Ok(Outcome { artifact: Artifact::single("complexity", table), violations })
}

/// `points` log-spaced integers from `lo` to `hi`, deduplicated.
pub fn log_spaced(lo: u32, hi: u32, points: usize) -> Vec<u32> {
    if points <= 1 || lo == hi {
        return vec![lo];
    }
    let ratio = hi as f64 / lo as f64;
    let mut out: Vec<u32> = (0..points)
        .map(|i| (lo as f64 * ratio.powf(i as f64 / (points - 1) as f64)).round() as u32)
        .collect();
    out.dedup();
    out
}

pub fn tail(p: &TailParams) -> Result<Outcome, Failure> {
    if p.n_min == 0 || p.n_min > p.n_max {
        return Err(Failure::config("params.n_min", "need 1 <= n_min <= n_max"));
    }
    at_least("params.points", p.points, 1)?;
    positive("params.kappa", p.kappa)?;
    let mut table = Table::new("tail", ["n", "tail", "log10_tail", "bound", "below_half", "below_bound"]);
    let mut violations = Vec::new();
    for n in log_spaced(p.n_min, p.n_max, p.points) {
        let ln_t = bounds::log_gaussian_tail(n, p.kappa)?;
        let t = ln_t.exp();
        let bound = bounds::tail_bound(n);
        let (half, below) = (t <= 0.5, t <= bound);
        if !half || !below {
            violations.push(format!("tail {t} at n={n} (bound {bound})"));
        }
        table.push(vec![n.into(), t.into(), (ln_t / std::f64::consts::LN_10).into(), bound.into(), half.into(), below.into()]);
    }
    Ok(Outcome { artifact: Artifact::single("tail", table), violations })
}

pub fn noise(p: &NoiseParams) -> Result<Outcome, Failure> {
    at_least("params.n", p.n, 1)?;
    at_least("params.b2_points", p.b2_points, 1)?;
    if !(p.b2_max >= 0.0 && p.b2_max.is_finite()) {
        return Err(Failure::config("params.b2_max", "must be finite and nonnegative"));
    }
    if !(p.r >= 0.0) {
        return Err(Failure::config("params.r", "must be nonnegative"));
    }
    let b2s: Vec<f64> = (0..p.b2_points)
        .map(|i| if p.b2_points == 1 { p.b2_max } else { p.b2_max * i as f64 / (p.b2_points - 1) as f64 })
        .collect();
    let mut jobs = Vec::new();
    for &d in &p.deltas_deg {
        jobs.extend(b2s.iter().map(|&b| ("phase_diffusion", d, b)));
    }
    for &t in &p.thetas_deg {
        jobs.extend(b2s.iter().map(|&b| ("crosstalk", t, b)));
    }
    let shape = p.shape;
    let (n, r) = (p.n, p.r);
    let rows = Exec::default().try_map_range(jobs.len(), |i| -> Result<[f64; 3], Failure> {
        let (kind, deg, b2) = jobs[i];
        let beta = match shape {
            Shape::Uniform => ComplexVec::uniform(n, b2),
            Shape::Concentrated => ComplexVec::concentrated(n, b2),
        };
        let angle = deg.to_radians();
        let env = if kind == "phase_diffusion" {
            phase_diffusion_g_sq(&beta, r, angle).map_err(|e| Failure::config("params.deltas_deg", e))?
        } else {
            crosstalk_envelope(&beta, r, angle).map_err(|e| Failure::config("params.thetas_deg", e))?
        };
        Ok([env.g_sq, noiseless_g_sq(beta.norm_sq(), r), env.overhead])
    })?;
    let mut table = Table::new(
        "noise",
        ["kind", "angle_deg", "beta_norm_sq", "g_sq", "noiseless_g_sq", "ratio", "overhead"],
    );
    for (&(kind, deg, b2), [g, g0, over]) in jobs.iter().zip(rows) {
        table.push(vec![kind.into(), deg.into(), b2.into(), g.into(), g0.into(), (g / g0).into(), over.into()]);
    }
    Ok(Outcome { artifact: Artifact::single("noise", table), violations: Vec::new() })
}

fn game_row(table: &mut Table, label: &str, s: &GameSummary) {
    table.push(vec![
        label.into(),
        s.rounds.into(),
        s.n_samples.into(),
        s.success_rate.into(),
        s.ci_low.into(),
        s.ci_high.into(),
        s.in_range_fraction.into(),
        s.in_range_success_rate.map_or(Cell::F(f64::NAN), Cell::F),
        s.std_error.into(),
    ]);
}

pub fn game(p: &GameParams, seed: u64) -> Result<Outcome, Failure> {
    at_least("params.rounds", p.rounds, 1000)?;
    let policy = match (p.policy, p.samples) {
        (Policy::Fixed, Some(samples)) => SamplePolicy::Fixed { samples },
        (Policy::Fixed, None) => return Err(Failure::config("params.samples", "required with policy fixed")),
        (Policy::Worst, _) => SamplePolicy::HoeffdingWorstCase,
        (Policy::Gamma, _) => SamplePolicy::HoeffdingAtGamma,
    };
    let cfg = GameConfig {
        n: p.n,
        kappa: p.kappa,
        sigma: p.sigma,
        eps0: p.eps0,
        scheme: scheme("params.r", p.r, p.t_b, p.t_a, None)?,
        policy,
    };
    cfg.validate().map_err(|e| Failure::config("params", e))?;
    let root = RandomStream::root(seed);
    let main = run_game(&cfg, p.rounds, root.child(0))?;
    let mut table = Table::new(
        "game",
        ["label", "rounds", "N", "success_rate", "ci_low", "ci_high", "in_range_fraction", "in_range_success_rate", "std_error"],
    );
    game_row(&mut table, "main", &main);
    if p.control {
        let control_cfg = GameConfig { eps0: 0.0, policy: SamplePolicy::Fixed { samples: main.n_samples }, ..cfg };
        let control = run_game(&control_cfg, p.rounds, root.child(1))?;
        game_row(&mut table, "control", &control);
    }
    Ok(Outcome { artifact: Artifact::single("game", table), violations: Vec::new() })
}

pub fn sample(p: &SampleParams, seed: u64) -> Result<OutcomeSamples, Failure> {
    let path = p.channel.as_ref().ok_or_else(|| Failure::config("params.channel", "required"))?;
    let count = p.count.ok_or_else(|| Failure::config("params.count", "required"))?;
    at_least("params.count", count, 1)?;
    at_least("params.chunk_size", p.chunk_size, 1)?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let spec = ChannelSpec::from_json(&text).map_err(|e| Failure::config("params.channel", e))?;
    let cfg = scheme("params.r", p.r, p.t_b, p.t_a, p.s)?;
    let opts = SamplingOptions { chunk_size: p.chunk_size, exec: Exec::default() };
    let stream = RandomStream::root(seed);
    Ok(match p.model {
        Model::Folded => sample_outcomes_with(&spec, &cfg, count, stream, &opts)?,
        Model::Physical => sample_outcomes_physical(&spec, &cfg, count, stream, &opts)?,
        Model::Crosstalk => sample_outcomes_crosstalk(&spec, p.r, p.theta_deg.to_radians(), count, stream, &opts)?,
    })
}

pub fn estimate(p: &EstimateParams) -> Result<Outcome, Failure> {
    let spath = p.samples.as_ref().ok_or_else(|| Failure::config("params.samples", "required"))?;
    let bpath = p.betas.as_ref().ok_or_else(|| Failure::config("params.betas", "required"))?;
    let file = File::open(spath).map_err(|e| Failure::Io(format!("{}: {e}", spath.display())))?;
    let samples = read_outcomes(BufReader::new(file))?;
    let text = std::fs::read_to_string(bpath).map_err(|e| Failure::Io(format!("{}: {e}", bpath.display())))?;
    let betas: Vec<ComplexVec> = serde_json::from_str(&text).map_err(|e| Failure::config("params.betas", e))?;
    let results: Vec<EstimateResult> = match samples.model {
        OutcomeModel::Crosstalk { .. } => {
            Exec::default().try_map_range(betas.len(), |i| estimate_lambda_crosstalk(&samples, &betas[i]))?
        }
        _ => Exec::default().try_map_range(betas.len(), |i| estimate_lambda(&samples, &betas[i]))?,
    };
    let n = samples.n;
    let mut cols: Vec<String> = (1..=n).map(|j| format!("beta_re_{j}")).collect();
    cols.extend((1..=n).map(|j| format!("beta_im_{j}")));
    cols.extend(["lambda_re", "lambda_im", "se", "N", "envelope"].map(String::from));
    let mut table = Table::new("estimates", cols);
    for r in &results {
        let mut row: Vec<Cell> = r.beta.as_slice().iter().map(|z| Cell::F(z.re)).collect();
        row.extend(r.beta.as_slice().iter().map(|z| Cell::F(z.im)));
        row.extend([
            Cell::F(r.lambda_hat.re),
            Cell::F(r.lambda_hat.im),
            Cell::F(r.std_error),
            r.n_samples.into(),
            Cell::F(r.envelope),
        ]);
        table.push(row);
    }
    Ok(Outcome { artifact: Artifact::single("estimates", table), violations: Vec::new() })
}
