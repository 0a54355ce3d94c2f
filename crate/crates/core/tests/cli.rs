use std::fs;
use std::path::Path;
use std::process::{Command as Process, Output};

use thermo_core::cli::{read_sweep, sweep_records, Command, KeyValues, RunConfig, SweepRecord};

fn thermo(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Process::new(env!("CARGO_BIN_EXE_thermo"));
    cmd.args(args);
    if let Some(path) = out {
        cmd.arg("--out").arg(path);
    }
    cmd.output().unwrap()
}

fn read_records(path: &Path) -> Vec<SweepRecord> {
    read_sweep(fs::File::open(path).unwrap()).unwrap()
}

#[test]
fn sweep_csv_parses_back_to_the_in_memory_records() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let args = ["qfi-sweep", "--theta-min", "0", "--theta-max", "1.5", "--theta-steps", "4", "--beta-steps", "6"];
    let o = thermo(&args, Some(&out));
    assert!(o.status.success());
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("qfi-sweep: 24 points"), "{stderr}");
    assert!(stderr.contains("6 degenerate"), "{stderr}");

    let mut flags = KeyValues::new();
    for pair in args[1..].chunks(2) {
        flags.set(pair[0].trim_start_matches("--"), pair[1]);
    }
    let cfg = RunConfig::resolve(Command::QfiSweep, &KeyValues::new(), &flags).unwrap();
    assert_eq!(read_records(&out), sweep_records(&cfg));
}

#[test]
fn config_echo_reproduces_the_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.csv");
    let o = thermo(
        &["qfi-sweep", "--phi-min", "0", "--phi-max", "6", "--phi-steps", "5", "--g0", "2e-8", "--log-beta"],
        Some(&first),
    );
    assert!(o.status.success());
    let echo = dir.path().join("first.csv.config.txt");
    assert!(fs::read_to_string(&echo).unwrap().contains("g0 = 2e-8"));

    let second = dir.path().join("second.csv");
    let o = thermo(&["qfi-sweep", "--config", echo.to_str().unwrap()], Some(&second));
    assert!(o.status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# test\ntheta = 0.5\nbeta = 2e-11\n").unwrap();
    let out = dir.path().join("o.csv");
    let o = thermo(&["qfi-sweep", "--config", cfg.to_str().unwrap(), "--theta", "1.25"], Some(&out));
    assert!(o.status.success());
    let recs = read_records(&out);
    assert_eq!(recs.len(), 1);
    assert_eq!((recs[0].theta, recs[0].beta), (1.25, 2e-11));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "thetta = 1\n").unwrap();
    for args in [
        vec!["weak-value", "--config", cfg.to_str().unwrap()],
        vec!["weak-value", "--theta", "4.0"],
        vec!["weak-value", "--fock-dim", "1"],
        vec!["weak-value", "--beta-min", "3e-11", "--beta-max", "1e-12", "--beta-steps", "3"],
        vec!["weak-value", "--config", "/nonexistent/run.cfg"],
        vec!["experiment", "--n-samples", "10"],
        vec!["no-such-command"],
    ] {
        let o = thermo(&args, None);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn all_degenerate_grid_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("poles.csv");
    let o = thermo(
        &["qfi-sweep", "--theta-min", "0", "--theta-max", "3.141592653589793", "--theta-steps", "2"],
        Some(&out),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
    let o = thermo(&["experiment", "--theta", "0"], None);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stdout_output_and_other_commands() {
    let o = thermo(
        &["weak-value", "--omega-z", "1", "--omega-r", "0", "--theta", "1.5707963267948966", "--beta", "1e-3"],
        None,
    );
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("theta,phi,beta,S_w_re,S_w_im,S_w_first_order_re,S_w_first_order_im,postselect_prob,beta_h_norm,status")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let s_w: f64 = row[3].parse().unwrap();
    assert!((s_w + (5e-4f64).tanh() / 2.0).abs() < 1e-15);
    let first_order: f64 = row[5].parse().unwrap();
    assert!((first_order + 2.5e-4).abs() < 1e-15);

    let o = thermo(&["invert-beta", "--weak-value-re", "0.25", "--theta", "0.5"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let symmetric: f64 = row[7].parse().unwrap();
    assert!((symmetric - 1.0 / 3.0144e9).abs() < 1e-24);

    let o = thermo(&["pointer", "--g0", "1e-3", "--fock-dim", "16", "--beta", "1e-11"], None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn experiment_writes_rows_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp.csv");
    let o = thermo(&["experiment", "--n-samples", "1000", "--replicates", "4", "--seed", "3"], Some(&out));
    assert!(o.status.success());
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("replicate,z_mean,p_mean,S_w_re,S_w_im,beta_hat,status\n"));
    let summary = fs::read_to_string(dir.path().join("exp.csv.summary.txt")).unwrap();
    for key in ["bias", "variance", "crb", "variance_over_crb", "seed = 3"] {
        assert!(summary.contains(key), "{summary}");
    }
}
