use std::path::Path;
use std::process::{Command, Output};

fn lineqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lineqkd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden_header() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/header.csv");
    std::fs::read_to_string(path).unwrap()
}

/// Rows of a CSV, as (value, rate) after checking the header.
fn parse_rates(csv: &str) -> Vec<(f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(format!("{}\n", lines.next().unwrap()), golden_header());
    lines
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            assert_eq!(cols.len(), 8, "{l}");
            (cols[1].parse().unwrap(), cols[7].parse().unwrap())
        })
        .collect()
}

#[test]
fn rate_at_moderate_tap_gives_key_with_order_ten_parameters() {
    let out = lineqkd(&["rate", "--dab", "1000", "--d", "10", "--dae", "500", "--re", "0.01"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<f64> = text.lines().nth(1).unwrap().split(',').skip(1).map(|v| v.parse().unwrap()).collect();
    let (gamma, theta, rate) = (row[1], row[2], row[6]);
    assert!(rate > 1e-6, "{text}");
    assert!((1.0..100.0).contains(&gamma) && (1.0..100.0).contains(&theta), "{text}");
}

#[test]
fn rate_without_tap_has_no_eve_information() {
    let out = lineqkd(&["rate", "--re", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let eve: f64 = text.lines().nth(1).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert_eq!(eve, 0.0);
}

#[test]
fn global_distance_keeps_positive_rate() {
    let out = lineqkd(&["rate", "--dab", "20000", "--d", "50", "--dae", "10000", "--re", "1e-5"]);
    assert!(out.status.success());
    assert!(parse_rates(&stdout(&out))[0].1 > 0.0);
}

#[test]
fn sweep_writes_rows_in_input_order_with_stable_schema() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = lineqkd(&[
        "sweep", "--var", "r_E", "--values", "0.02,0,0.01", "--d", "10", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = parse_rates(&std::fs::read_to_string(&path).unwrap());
    let values: Vec<f64> = rows.iter().map(|r| r.0).collect();
    assert_eq!(values, vec![0.02, 0.0, 0.01]);
}

#[test]
fn tap_sweeps_are_non_increasing_for_three_spacings() {
    let values = "0,0.001,0.002,0.005,0.01,0.015,0.02,0.03,0.04,0.05";
    for d in ["10", "20", "30"] {
        let out = lineqkd(&["sweep", "--var", "re", "--values", values, "--dab", "1000", "--d", d, "--fractional-stages"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let rows = parse_rates(&stdout(&out));
        assert_eq!(rows.len(), 10);
        for w in rows.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-9), "d = {d}: {w:?}");
        }
    }
}

#[test]
fn global_distances_at_small_tap() {
    for dab in ["10000", "20000", "40000"] {
        let out = lineqkd(&["sweep", "--var", "r_E", "--values", "0,1e-5,3e-5", "--dab", dab, "--d", "50"]);
        assert!(out.status.success());
        let rows = parse_rates(&stdout(&out));
        assert!(rows[1].1 > 0.0, "D_AB = {dab}: {rows:?}");
    }
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["simulate", "--L", "0"][..],
        &["rate", "--no-such-flag"],
        &["sweep", "--var", "r_E", "--values", ""],
        &["sweep", "--var", "colour", "--values", "1"],
        &["rate", "--re", "1.5"],
        &["rate", "--dab", "1000", "--d", "30"],
        &["frobnicate"],
    ] {
        assert_eq!(lineqkd(args).status.code(), Some(1), "{args:?}");
    }
    assert_eq!(lineqkd(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing/out.csv");
    assert_eq!(lineqkd(&["rate", "--out", path.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn simulate_smoke_and_replay() {
    let args = ["simulate", "--re", "0", "--gamma", "100", "--theta", "30", "--dab", "100", "--L", "100000", "--seed", "7"];
    let first = lineqkd(&args);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let second = lineqkd(&args);
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.contains("keys_agree = true"));
    assert!(!text.contains("final_len = 0\n"));
}

#[test]
fn simulate_snapshot_goes_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.txt");
    let out = lineqkd(&[
        "simulate", "--re", "0", "--gamma", "100", "--theta", "30", "--dab", "100", "--L", "20000", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let snapshot = std::fs::read_to_string(&path).unwrap();
    let parsed = lineqkd::protocol::SessionSnapshot::parse(&snapshot).unwrap();
    assert_eq!(parsed.config.rounds, 20_000);
    assert!(stdout(&out).starts_with("quantity,analytic,empirical,std_error,z\n"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# operating point\ndab = 1000\nd = 10\nre = 0.05\n").unwrap();
    let from_file = stdout(&lineqkd(&["rate", "--config", cfg.to_str().unwrap()]));
    let overridden = stdout(&lineqkd(&["rate", "--config", cfg.to_str().unwrap(), "--re", "0.01"]));
    assert_eq!(parse_rates(&from_file)[0], (0.05, 0.0));
    let direct = stdout(&lineqkd(&["rate", "--dab", "1000", "--d", "10", "--re", "0.01"]));
    assert_eq!(overridden, direct);
}
