use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use chambolle_pock::certificates::CertificateMode;
use chambolle_pock_harness::experiment::recompute_summary;
use chambolle_pock_harness::sweep::SweepRow;
use chambolle_pock_harness::trajectory::read_certificates;
use chambolle_pock_harness::Summary;

const QUADRATIC: &str = r#"
[problem]
generator = "quadratic"
rows = 6
cols = 4
seed = 5

[params]
theta = 1.0
safety = 0.9

[run]
iters = 2000
start = "random"
start_seed = 3
"#;

fn cpock(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpock")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn solve(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cpock(&args)
}

fn summary(dir: &Path) -> Summary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_passes_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(solve(&cfg, &a, &[]).status.code(), Some(0));
    assert_eq!(solve(&cfg, &b, &[]).status.code(), Some(0));
    for name in ["certificates.csv", "summary.json", "iterates.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let s = summary(&a);
    assert_eq!(s.certificates.failures(), 0);
    assert_eq!(s.iterations, 2000);
}

#[test]
fn json_flags_match_recomputation_from_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let out = tmp.path().join("o");
    assert_eq!(solve(&cfg, &out, &["--theta", "0.3", "--iters", "500"]).status.code(), Some(0));
    let s = summary(&out);
    let rows = read_certificates(&out.join("certificates.csv")).unwrap();
    assert_eq!(rows.len(), 500);
    assert_eq!(recompute_summary(rows, s.mode, s.tol), s.certificates);
}

#[test]
fn invalid_params_with_override_are_observational() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let out = tmp.path().join("o");
    let res = solve(&cfg, &out, &["--safety", "1.5", "--override-invalid"]);
    assert_eq!(res.status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s.mode, CertificateMode::Observational);
    assert!((s.status.product - 1.5).abs() < 1e-12);
}

#[test]
fn invalid_params_without_override_are_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let res = solve(&cfg, &tmp.path().join("o"), &["--safety", "1.5"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("override-invalid"));
}

#[test]
fn missing_files_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let res = cpock(&["solve", "--config", tmp.path().join("none.toml").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("none.toml"));

    let custom = "[problem]\ngenerator = \"custom\"\nmatrix = \"absent.txt\"\nf = { kind = \"zero\" }\ng = { kind = \"l1\", lambda = 1.0 }\n";
    let cfg = write_config(tmp.path(), "c.toml", custom);
    let res = solve(&cfg, &tmp.path().join("o"), &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("absent.txt"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(cpock(&["solve"]).status.code(), Some(2));
    assert_eq!(cpock(&["frobnicate"]).status.code(), Some(2));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", "[problem]\ngenerator = \"quadratic\"\nrows = 2\n");
    assert_eq!(cpock(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn custom_problem_runs_with_long_run_oracle() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("m.txt"), "3 2\n1 0\n0 2\n1 1\n").unwrap();
    let text = "[problem]\ngenerator = \"custom\"\nmatrix = \"m.txt\"\nf = { kind = \"nonneg\" }\n\
                g = { kind = \"quadratic\", center = [1.0, -1.0, 0.5] }\n[params]\ntheta = 0.5\n[run]\niters = 500\n";
    let cfg = write_config(tmp.path(), "c.toml", text);
    let out = tmp.path().join("o");
    assert_eq!(solve(&cfg, &out, &[]).status.code(), Some(0));
    let s = summary(&out);
    assert_eq!(s.kkt_source, "long_run");
    assert!(s.kkt_residual < 1e-10);
}

#[test]
fn certify_detects_corrupted_iterates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let out = tmp.path().join("o");
    assert_eq!(solve(&cfg, &out, &["--iters", "100"]).status.code(), Some(0));
    let iterates = out.join("iterates.csv");

    let clean = cpock(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--iterates",
        iterates.to_str().unwrap(),
        "--out",
        tmp.path().join("clean").to_str().unwrap(),
    ]);
    assert_eq!(clean.status.code(), Some(0));
    assert_eq!(
        fs::read(out.join("certificates.csv")).unwrap(),
        fs::read(tmp.path().join("clean").join("certificates.csv")).unwrap()
    );

    let text = fs::read_to_string(&iterates).unwrap();
    let corrupted: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 11 {
                let mut fields = line.split(',');
                let k = fields.next().unwrap().to_string();
                std::iter::once(k)
                    .chain(fields.map(|v| (v.parse::<f64>().unwrap() * 1e3).to_string()))
                    .collect::<Vec<_>>()
                    .join(",")
            } else {
                line.to_string()
            }
        })
        .collect();
    let bad = tmp.path().join("bad.csv");
    fs::write(&bad, corrupted.join("\n") + "\n").unwrap();
    let res = cpock(&[
        "certify",
        "--config",
        cfg.to_str().unwrap(),
        "--iterates",
        bad.to_str().unwrap(),
        "--out",
        tmp.path().join("bad").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("certificate failure") && stderr.contains("k = 9"), "{stderr}");
}

const SWEEP: &str = r#"
[problem]
generator = "quadratic"
rows = 5
cols = 4
seed = 8

[run]
iters = 2000

[sweep]
thetas = [0.1, 0.25, 0.5, 0.75, 1.0]
safeties = [0.5, 0.9, 0.99]
"#;

fn sweep_rows(dir: &Path) -> Vec<SweepRow> {
    serde_json::from_str(&fs::read_to_string(dir.join("sweep.json")).unwrap()).unwrap()
}

#[test]
fn sweep_grid_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", SWEEP);
    let out = tmp.path().join("o");
    let res = cpock(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let rows = sweep_rows(&out);
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.v_monotone == Some(true)));
    assert!(fs::read_to_string(out.join("sweep.csv")).unwrap().starts_with("theta,safety,product,status,"));
}

#[test]
fn sweep_isolates_invalid_cells_and_ignores_order() {
    let tmp = tempfile::tempdir().unwrap();
    let forward = SWEEP
        .replace("[0.1, 0.25, 0.5, 0.75, 1.0]", "[0.25, 1.0]")
        .replace("[0.5, 0.9, 0.99]", "[0.9, 1.0, 1.5]");
    let reversed = forward.replace("[0.25, 1.0]", "[1.0, 0.25]").replace("[0.9, 1.0, 1.5]", "[1.5, 1.0, 0.9]");
    let run = |name: &str, text: &str| {
        let cfg = write_config(tmp.path(), name, text);
        let out = tmp.path().join(name.trim_end_matches(".toml"));
        let res = cpock(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        (res.status.code(), sweep_rows(&out))
    };
    let (code_a, mut a) = run("a.toml", &forward);
    let (code_b, mut b) = run("b.toml", &reversed);
    assert_eq!(code_a, Some(2));
    assert_eq!(code_b, Some(2));
    let key = |r: &SweepRow| (r.theta.to_bits(), r.safety.to_bits());
    a.sort_by_key(key);
    b.sort_by_key(key);
    assert_eq!(a, b);
    for r in &a {
        let expect_error = r.safety > 1.0;
        assert_eq!(r.error.is_some(), expect_error, "{r:?}");
        assert_eq!(r.max_descent_residual.is_some(), !expect_error);
    }
}

#[test]
fn validate_reports_status() {
    let ok = cpock(&["validate", "--norm", "2.0", "--theta", "0.5", "--safety", "1.0"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("ergodic_only"));
    let bad = cpock(&["validate", "--norm", "1.0", "--theta", "1.0", "--tau", "1.0", "--sigma", "1.1"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("invalid"));
    assert_eq!(cpock(&["validate", "--theta", "1.0"]).status.code(), Some(2));
}

#[test]
fn rate_and_plotdata_commands() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUADRATIC);
    let out = tmp.path().join("o");
    assert_eq!(solve(&cfg, &out, &["--theta", "0.5"]).status.code(), Some(0));
    let csv = out.join("certificates.csv");
    let res = cpock(&["rate", "--input", csv.to_str().unwrap(), "--kmin", "50", "--kmax", "2000"]);
    assert_eq!(res.status.code(), Some(0));
    let fit: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(fit["slope"].as_f64().unwrap() <= -0.85);

    let res = cpock(&["rate", "--input", csv.to_str().unwrap(), "--kmin", "5", "--kmax", "10"]);
    assert_eq!(res.status.code(), Some(2));

    let plots = tmp.path().join("plots");
    let res = cpock(&["plotdata", "--input", csv.to_str().unwrap(), "--out", plots.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    assert!(plots.join("ergodic_gap.loglog.dat").exists());
    assert!(plots.join("plot.gp").exists());
}
