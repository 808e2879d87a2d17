use std::process::{Command, Output};

use qrelay::report::CurveReport;

fn qrelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrelay")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_circuit_default_passes() {
    let o = qrelay(&["verify-circuit"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.lines().last() == Some("PASS"), "{text}");
    assert!(!text.contains("FAIL"));
}

#[test]
fn verify_circuit_json_and_branches() {
    let o = qrelay(&["verify-circuit", "--input", "0.6,0.8", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let branches = v["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 4);
    for b in branches {
        assert!((b["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn verify_circuit_diagnostic() {
    let o = qrelay(&["verify-circuit", "--diagnostic", "d2-on-mode-1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("vacuum false-gate probability 0.5"));
}

#[test]
fn snr_defaults_cover_figure_grid() {
    let o = qrelay(&["snr"]);
    assert_eq!(o.status.code(), Some(0));
    let report = CurveReport::from_csv(&stdout(&o)).unwrap();
    assert_eq!(report.rows.len(), 100);
    assert_eq!(report.columns.len(), 1 + 6 * 5);
    assert_eq!(report.metadata["n_relays"], "0,1,2,4,8,16");
    assert_eq!(report.metadata["p_dark"], "0.00001");
}

#[test]
fn csv_reports_round_trip() {
    for args in [
        vec!["snr", "--steps", "7"],
        vec!["throughput", "--steps", "9"],
        vec!["optimize", "--distance-km", "150", "--n-relays", "1,2,3"],
        vec!["sample", "--alpha-x", "2", "--trials", "10000", "--seed", "5"],
    ] {
        let text = stdout(&qrelay(&args));
        let parsed = CurveReport::from_csv(&text).unwrap();
        assert_eq!(parsed.to_csv(), text, "{args:?}");
    }
}

#[test]
fn sample_is_byte_identical_for_a_seed() {
    let args = ["sample", "--alpha-x", "3", "--trials", "200000", "--seed", "11"];
    let a = qrelay(&args);
    let b = qrelay(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn optimize_single_relay_at_100_km() {
    let o = qrelay(&["optimize", "--distance-km", "100"]);
    let report = CurveReport::from_csv(&stdout(&o)).unwrap();
    let x1 = report.column("numeric_km").unwrap()[0];
    assert!((x1 - 43.07).abs() < 0.01);
    assert_eq!(report.metadata["agree_n1"], "true");
}

#[test]
fn optimize_uniform_when_lossless_relays() {
    let o = qrelay(&[
        "optimize",
        "--distance-km",
        "200",
        "--n-relays",
        "3",
        "--eta",
        "0.99998",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let report = CurveReport::from_csv(&stdout(&o)).unwrap();
    let p = report.column("numeric_km").unwrap();
    for (k, v) in p.iter().enumerate() {
        assert!((v - 50.0 * (k as f64 + 1.0)).abs() < 1e-3, "{p:?}");
    }
    for w in p.windows(2) {
        assert!((w[1] - w[0] - p[0]).abs() < 1e-6 * 200.0, "{p:?}");
    }
    let lossless = qrelay(&["optimize", "--distance-km", "200", "--n-relays", "3", "--eta", "1"]);
    assert_eq!(lossless.status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"eta": 0.8, "steps": 4, "n_relays": [0, 1]}"#).unwrap();
    let out = dir.path().join("out.json");
    let o = qrelay(&[
        "snr",
        "--config",
        cfg.to_str().unwrap(),
        "--eta",
        "0.6",
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: CurveReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report.metadata["eta"], "0.6");
    assert_eq!(report.rows.len(), 4);
    assert_eq!(report.metadata["n_relays"], "0,1");
}

#[test]
fn config_errors_exit_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"eta\": 0.5,\n  \"pd\": 1e-5\n}").unwrap();
    let o = qrelay(&["snr", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("pd") && err.contains("line 3"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        qrelay(&["sample", "--trials", "0", "--seed", "1", "--alpha-x", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qrelay(&["sample", "--trials", "10", "--alpha-x", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(
        qrelay(&["snr", "--alpha-x-min", "5", "--alpha-x-max", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qrelay(&["optimize", "--distance-km", "100", "--n-relays", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(qrelay(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn throughput_reports_ordered_cutoffs() {
    let o = qrelay(&["throughput", "--steps", "401"]);
    let report = CurveReport::from_csv(&stdout(&o)).unwrap();
    let cut: Vec<f64> = (0..4)
        .map(|n| report.metadata[&format!("cutoff_n{n}")].parse().unwrap())
        .collect();
    assert!(cut.windows(2).all(|w| w[0] < w[1]), "{cut:?}");
    for n in 0..4 {
        assert!(report.column(&format!("t_n_alt_n{n}")).is_some());
    }
}
