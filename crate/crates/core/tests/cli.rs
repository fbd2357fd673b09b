use std::fs;
use std::process::{Command, Output};

fn gridsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridsec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn validate_prints_defaults() {
    let out = gridsec(&["validate"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("n_a = 4"), "{text}");
    assert!(text.contains("rate_target = 10"), "{text}");
}

#[test]
fn validate_round_trips_its_own_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("echo.conf");
    fs::write(&path, stdout(&gridsec(&["validate"]))).unwrap();
    let again = gridsec(&["validate", "--config", path.to_str().unwrap()]);
    assert!(again.status.success());
    assert_eq!(stdout(&again), stdout(&gridsec(&["validate"])));
}

#[test]
fn bad_config_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "n_a = 4\nn_j = 2\n").unwrap();
    let out = gridsec(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_j"));

    fs::write(&path, "warp_factor = 9\n").unwrap();
    let out = gridsec(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_to_stdout() {
    let out = gridsec(&["sweep", "--axis", "rate_target", "--values", "2,20", "--trials", "50", "--mode", "both"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "axis,p_outage,stderr_outage,p_sec_block,unsecured_fraction,per_consumer_cost,expected_loss,trials,seed,mode"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("2,") && lines[1].ends_with(",50,42,selection"));
    assert!(lines[2].ends_with(",50,42,analytic"));
    let p_high: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(p_high, 1.0);
}

#[test]
fn sweep_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("s.sweep");
    let out_path = dir.path().join("out.csv");
    fs::write(&sweep, "axis = m_gateways\nvalues = 1, 2\n").unwrap();
    let out = gridsec(&[
        "sweep",
        "--sweep",
        sweep.to_str().unwrap(),
        "--trials",
        "20",
        "--seed",
        "7",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let csv = fs::read_to_string(&out_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(2).unwrap().ends_with(",20,7,selection"));
}

#[test]
fn failed_point_is_reported_and_sweep_continues() {
    let out = gridsec(&["sweep", "--axis", "n_j", "--values", "2,4", "--trials", "20"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "2,,,,,,,20,42,failed");
    assert!(lines[2].starts_with("4,") && lines[2].ends_with("selection"));
}

#[test]
fn unknown_axis_is_an_error() {
    let out = gridsec(&["sweep", "--axis", "colour", "--values", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
