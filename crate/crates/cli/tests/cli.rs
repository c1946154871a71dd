use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn fdw(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdw"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

/// Value after `key: ` on the first report line starting with `key`.
fn report_value(report: &str, key: &str) -> f64 {
    let line = report
        .lines()
        .find(|l| l.starts_with(key))
        .unwrap_or_else(|| panic!("no `{key}` in report:\n{report}"));
    line[key.len()..]
        .trim_start_matches(':')
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

/// `name=value` fields from a case summary line.
fn summary_value(line: &str, name: &str) -> f64 {
    let prefix = format!("{name}=");
    line.split_whitespace()
        .find_map(|w| w.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {name} in {line}"))
        .parse()
        .unwrap()
}

#[test]
fn admissible_reports_excluded_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdw(&["admissible", "--alpha", "0.5", "--ell", "0"], dir.path());
    assert!(out.status.success());
    assert!(read(&dir.path().join("report.txt")).contains("inadmissible, excluded value 1/2"));

    let out = fdw(&["admissible", "--alpha", "0.7071067811865476"], dir.path());
    assert!(out.status.success());
    let report = read(&dir.path().join("report.txt"));
    assert!(
        report.contains("admissible, nearest excluded value 1/2 (distance 0.2071"),
        "{report}"
    );
}

#[test]
fn classical_witness_tail_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdw(
        &["witness", "--order", "one", "--lambda", "1", "--T", "1"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&dir.path().join("observations.csv"));
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[1] > 1.0 && cols[2].abs() < 1e-12, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 200);
    let report = read(&dir.path().join("report.txt"));
    assert!(report_value(&report, "max |u| at alpha 0.7071067811865476") > 1e-3);
}

#[test]
fn witness_flags_must_match_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdw(&["witness", "--order", "two", "--lambda", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_alpha_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "alpha": 2.5, "operator": {"kind": "dirichlet-laplacian-1d", "length": 1.0, "modes": 1}}"#,
    )
    .unwrap();
    let out = fdw(
        &["admissible", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("fdw: validation: field `alpha`"), "{err}");
}

#[test]
fn syntax_errors_carry_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"schema\": 1,\n  \"alpha\": 0.5,\n}\n").unwrap();
    let out = fdw(
        &["admissible", "--config", cfg.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn numerical_failure_exits_with_code_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("classical.json");
    std::fs::write(
        &cfg,
        r#"{"schema": 1, "alpha": 1.0,
            "mu": {"horizon": 1.0, "pieces": [{"start": 0.0, "end": 1.0, "coeffs": [1.0]}]},
            "times": {"start": 8.0, "end": 2048.0, "count": 64},
            "ode": {"lambda": 2.0, "a": 1.0}}"#,
    )
    .unwrap();
    let out = fdw(
        &["ode-lab", "--config", cfg.to_str().unwrap()],
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("fdw: numerical: ill-conditioned"));
}

#[test]
fn missing_data_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = fdw(&["invert"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing field `alpha`"));
}

#[test]
fn invert_reads_observation_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("noisy-forward.json");
    let cfg = cfg.to_str().unwrap();
    let fwd = dir.path().join("fwd");
    assert!(fdw(&["forward", "--config", cfg, "--noise", "0"], &fwd)
        .status
        .success());
    let obs = fwd.join("observations.csv");
    let inv = dir.path().join("inv");
    let out = fdw(
        &[
            "invert",
            "--config",
            cfg,
            "--observations",
            obs.to_str().unwrap(),
        ],
        &inv,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(read(&inv.join("observations.csv")), read(&obs));
    assert!(report_value(&read(&inv.join("report.txt")), "max error") < 1e-3);
    let csv = read(&inv.join("recovery.csv"));
    assert!(csv.starts_with("field,mode,true,recovered,abs_err\n"));
}

#[test]
fn seed_changes_noisy_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("noisy-forward.json");
    let cfg = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(fdw(&["forward", "--config", cfg, "--seed", "1"], &a)
        .status
        .success());
    assert!(fdw(&["forward", "--config", cfg, "--seed", "2"], &b)
        .status
        .success());
    assert_ne!(
        read(&a.join("observations.csv")),
        read(&b.join("observations.csv"))
    );
    assert!(read(&a.join("report.txt")).contains("seed: 1"));
}

/// Runs a shipped config and returns the top-level report.
fn run_config(cmd: &str, config: &str, dir: &Path) -> String {
    let cfg = configs().join(config);
    let out = fdw(&[cmd, "--config", cfg.to_str().unwrap()], dir);
    assert!(
        out.status.success(),
        "{config}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = read(&dir.join("report.txt"));
    assert_eq!(String::from_utf8_lossy(&out.stdout), report);
    report
}

#[test]
fn shipped_configs_meet_their_targets() {
    let dir = tempfile::tempdir().unwrap();
    let sub = |name: &str| dir.path().join(name);

    let r = run_config("ml-eval", "ml-identities.json", &sub("ml"));
    assert_eq!(r.matches(", pass)").count(), 2, "{r}");

    let r = run_config("witness", "witness.json", &sub("witness"));
    for line in r.lines() {
        assert!(summary_value(line, "classical_max") < 1e-10, "{line}");
        assert!(summary_value(line, "contrast_max") > 1e-3, "{line}");
        assert!(summary_value(line, "duhamel_dev") < 1e-9, "{line}");
    }
    assert!(sub("witness/case-3/contrast.csv").exists());

    let r = run_config("expand", "expansion.json", &sub("expand"));
    for line in r.lines() {
        assert!(
            (summary_value(line, "slope") - summary_value(line, "predicted")).abs() <= 0.1,
            "{line}"
        );
    }
    assert!(read(&sub("expand/case-1/expansion.csv")).starts_with("kind,k,exponent,mode,coeff\n"));

    let r = run_config("invert", "round-trip.json", &sub("rt"));
    assert_eq!(r.lines().count(), 12);
    for line in r.lines() {
        assert!(summary_value(line, "max_error") < 1e-3, "{line}");
    }
    let r = run_config("invert", "zero-data.json", &sub("zero"));
    for line in r.lines() {
        assert!(summary_value(line, "max_error") < 1e-8, "{line}");
    }

    let r = run_config("simul-invert", "scaling.json", &sub("scaling"));
    for line in r.lines() {
        assert!(
            (summary_value(line, "f_ratio") - 2.0).abs() <= 1e-3,
            "{line}"
        );
        assert!(summary_value(line, "obs_diff") <= 1e-12, "{line}");
    }

    let r = run_config("admissible", "excluded.json", &sub("excluded"));
    assert!(
        r.contains("excluded value 1/2") && r.contains("excluded value 3/2"),
        "{r}"
    );

    let r = run_config("ode-lab", "scalar.json", &sub("scalar"));
    for line in r.lines() {
        for q in ["a", "b", "mu0", "mu1"] {
            if line.contains(&format!(" {q}=")) {
                assert!(summary_value(line, q) < 1e-3, "{line}");
            }
        }
    }

    let r = run_config("forward", "caputo.json", &sub("caputo"));
    assert!(report_value(&r, "caputo min ratio") >= 1.5, "{r}");
    assert!(sub("caputo/caputo.csv").exists());
}
