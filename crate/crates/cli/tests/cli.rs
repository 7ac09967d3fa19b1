use std::path::Path;
use std::process::{Command, Output};

fn displearn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_displearn")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Data rows of a CSV artifact as (header, rows).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# displearn "));
    assert!(lines.next().unwrap().starts_with("# config: {"));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("missing column {name}"))
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn tail_stays_below_half() {
    let dir = tempfile::tempdir().unwrap();
    let (h, rows) = parse_csv(&stdout(&displearn(&["tail", "--strict"], dir.path())));
    assert_eq!(rows.len(), 40);
    let (t, b) = (col(&h, "tail"), col(&h, "bound"));
    assert!(rows.iter().all(|r| f(&r[t]) <= 0.5 && f(&r[t]) <= f(&r[b])));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["game", "--rounds", "1000", "--policy", "fixed", "--samples", "50", "--seed", "9"];
    let one = displearn(&[&args[..], &["--threads", "1"]].concat(), dir.path());
    let two = displearn(&[&args[..], &["--threads", "3"]].concat(), dir.path());
    assert_eq!(stdout(&one), stdout(&two));
    let fig = ["fig2", "--density-points", "21", "--charfn-points", "9", "--samples", "500", "--format", "json"];
    let a = displearn(&[&fig[..], &["--threads", "1"]].concat(), dir.path());
    let b = displearn(&[&fig[..], &["--threads", "2"]].concat(), dir.path());
    assert_eq!(stdout(&a), stdout(&b));
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command":"advantage","seed":4,"params":{"kappas":[1.0],"n_max":40}}"#).unwrap();
    let from_file = displearn(&["--config", cfg.to_str().unwrap()], dir.path());
    let from_flags = displearn(&["advantage", "--kappas", "1", "--n-max", "40", "--seed", "4"], dir.path());
    assert_eq!(stdout(&from_file), stdout(&from_flags));
}

#[test]
fn advantage_anchor_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let (h, rows) = parse_csv(&stdout(&displearn(&["advantage", "--kappas", "1"], dir.path())));
    let (n, ratio, flags) = (col(&h, "n"), col(&h, "log10_ratio"), col(&h, "valid_flags"));
    let first = rows.iter().find(|r| f(&r[ratio]) >= 4.0).unwrap();
    assert!((20..=40).contains(&first[n].parse::<u32>().unwrap()));
    assert_eq!(rows[0][flags], "n_<_8");
    let r_axis = stdout(&displearn(&["advantage", "--axis", "r", "--rs", "0,1e9", "--n-min", "8", "--n-max", "20"], dir.path()));
    let (h, rows) = parse_csv(&r_axis);
    let (lower, upper) = (col(&h, "log10_N_lower"), col(&h, "log10_N_upper"));
    let (low_r, high_r) = rows.split_at(13);
    for (a, b) in low_r.iter().zip(high_r) {
        assert_eq!(a[lower], b[lower]);
        assert!(f(&b[upper]) < f(&a[upper]));
    }
}

#[test]
fn fig2_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let args = ["fig2", "--charfn-points", "15", "--samples", "2000", "--strict", "--out", out.to_str().unwrap()];
    assert!(displearn(&args, dir.path()).status.success());
    let text = std::fs::read_to_string(dir.path().join("fig2_charfn.csv")).unwrap();
    let (h, rows) = parse_csv(&text);
    assert_eq!(rows.len(), 225);
    let (br, bi) = (col(&h, "beta_re"), col(&h, "beta_im"));
    let (lr, li) = (col(&h, "lambda_re"), col(&h, "lambda_im"));
    for r in &rows {
        let b2 = f(&r[br]).powi(2) + f(&r[bi]).powi(2);
        for (name, nu) in [("lambda_ea", (-4.0f64).exp()), ("lambda_vh", 1.0)] {
            let got = f(&r[col(&h, &format!("{name}_re"))]);
            let want = f(&r[lr]) * (-nu * b2).exp();
            assert!((got - want).abs() <= 1e-14 * want.abs().max(1e-300), "{name}: {got} vs {want}");
            let got = f(&r[col(&h, &format!("{name}_im"))]);
            let want = f(&r[li]) * (-nu * b2).exp();
            assert!((got - want).abs() <= 1e-14 * want.abs().max(1e-300));
        }
    }
    assert!(dir.path().join("fig2_density.csv").exists());
}

#[test]
fn complexity_meets_delta() {
    let dir = tempfile::tempdir().unwrap();
    let (h, rows) = parse_csv(&stdout(&displearn(&["complexity", "--trials", "200", "--strict"], dir.path())));
    let (rate, delta) = (col(&h, "failure_rate"), col(&h, "delta"));
    assert!(rows.iter().all(|r| f(&r[rate]) <= f(&r[delta])));
}

#[test]
fn noise_zero_angle_rows_are_noiseless() {
    let dir = tempfile::tempdir().unwrap();
    let (h, rows) = parse_csv(&stdout(&displearn(&["noise", "--shape", "concentrated"], dir.path())));
    let (angle, g, g0) = (col(&h, "angle_deg"), col(&h, "g_sq"), col(&h, "noiseless_g_sq"));
    let zero: Vec<_> = rows.iter().filter(|r| f(&r[angle]) == 0.0).collect();
    assert!(!zero.is_empty());
    assert!(zero.iter().all(|r| r[g] == r[g0]));
}

#[test]
fn sample_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let channel = r#"{"n":1,"sigma":0.5,"peaks":[{"w":[1.0,0.0],"center":[[0.0,0.0]]}]}"#;
    std::fs::write(dir.path().join("ch.json"), channel).unwrap();
    std::fs::write(dir.path().join("b.json"), "[[[0.0,0.0]],[[0.3,0.4]]]").unwrap();
    let s = displearn(&["sample", "--channel", "ch.json", "--count", "4000", "--r", "1.5", "--out", "o.bin"], dir.path());
    assert!(s.status.success(), "{}", String::from_utf8_lossy(&s.stderr));
    let (h, rows) = parse_csv(&stdout(&displearn(&["estimate", "--samples", "o.bin", "--betas", "b.json"], dir.path())));
    assert_eq!(h, ["beta_re_1", "beta_im_1", "lambda_re", "lambda_im", "se", "N", "envelope"]);
    assert_eq!(rows[0][2], "1.0");
    let truth = (-0.25f64 / 0.5).exp();
    assert!((f(&rows[1][2]) - truth).abs() < 5.0 * f(&rows[1][4]));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(displearn(&["tail", "--n-min", "0"], dir.path()).status.code(), Some(2));
    assert_eq!(displearn(&["fig2", "--sigma", "-1"], dir.path()).status.code(), Some(2));
    assert_eq!(displearn(&["sample", "--count", "3"], dir.path()).status.code(), Some(2));
    let strict = ["advantage", "--sigma", "0.3", "--kappas", "3", "--n-min", "8", "--n-max", "9", "--strict"];
    assert_eq!(displearn(&strict, dir.path()).status.code(), Some(3));
    assert_eq!(displearn(&strict[..strict.len() - 1], dir.path()).status.code(), Some(0));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"command":"noise","params":{"r":"high"}}"#).unwrap();
    let out = displearn(&["--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("params.r"));
    assert_eq!(displearn(&["--config", "missing.json"], dir.path()).status.code(), Some(1));
}

#[test]
fn json_format_embeds_config() {
    let dir = tempfile::tempdir().unwrap();
    let text = stdout(&displearn(&["--format", "json", "--seed", "5", "tail", "--points", "3"], dir.path()));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["schema"], "displearn tail schema v1");
    assert_eq!(doc["config"]["seed"], 5);
    assert_eq!(doc["tables"]["tail"]["rows"].as_array().unwrap().len(), 3);
}
