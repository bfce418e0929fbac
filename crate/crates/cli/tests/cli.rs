use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lre_core::experiments::{read_csv, ErrorRow, ThreadRow, TimeRow, TimingReport};
use lre_core::state_file::{read_state, write_state};
use lre_core::{ErrorReport, HermitianMatrix, MeasurementRecord};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pauli-lre"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("run pauli-lre")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tmp() -> (tempfile::TempDir, impl Fn(&str) -> PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().to_path_buf();
    (dir, move |name: &str| root.join(name))
}

#[test]
fn simulate_writes_expected_record() {
    let (_dir, at) = tmp();
    let rec = at("r.txt");
    let summary = ok(&[
        "simulate",
        "--n",
        "2",
        "--shots",
        "100",
        "--seed",
        "7",
        "--state",
        "maxmixed",
        "--out",
        p(&rec),
    ]);
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert_eq!(v["settings"], 9);
    assert_eq!(v["shots"], 100);
    assert_eq!(
        v["bytes"].as_u64().unwrap(),
        std::fs::metadata(&rec).unwrap().len()
    );
    let text = std::fs::read_to_string(&rec).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 10);
    for line in &lines[1..] {
        let (_, counts) = line.split_once(' ').unwrap();
        let sum: u64 = counts.split(',').map(|c| c.parse::<u64>().unwrap()).sum();
        assert_eq!(sum, 100);
    }

    let again = at("r2.txt");
    ok(&[
        "simulate",
        "--n",
        "2",
        "--shots",
        "100",
        "--seed",
        "7",
        "--state",
        "maxmixed",
        "--threads",
        "3",
        "--out",
        p(&again),
    ]);
    assert_eq!(std::fs::read(&rec).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn ghz_record_respects_parity() {
    let (_dir, at) = tmp();
    let rec = at("g.txt");
    ok(&[
        "simulate",
        "--n",
        "3",
        "--shots",
        "500",
        "--seed",
        "1",
        "--state",
        "ghz",
        "--out",
        p(&rec),
    ]);
    let record = MeasurementRecord::read(&rec).unwrap();
    let zzz = record.setting_counts(lre_core::SettingIndex(26));
    // Every pair of qubits agrees under ZZZ, so only 000 and 111 occur.
    for (s, &c) in zzz.iter().enumerate() {
        if s != 0 && s != 7 {
            assert_eq!(c, 0, "outcome {s:03b}");
        }
    }
    // Each adjacent pair has even parity.
    let zzx = record.setting_counts(lre_core::SettingIndex(25));
    for (s, &c) in zzx.iter().enumerate() {
        if ((s >> 2) ^ (s >> 1)) & 1 == 1 {
            assert_eq!(c, 0, "ZZX outcome {s:03b}");
        }
    }
    assert_eq!(zzz[0] + zzz[7], 500);
}

#[test]
fn reconstruct_exact_maximally_mixed() {
    let (_dir, at) = tmp();
    let rec = at("m.txt");
    let state = at("m.bin");
    ok(&[
        "simulate",
        "--n",
        "4",
        "--shots",
        "16",
        "--state",
        "maxmixed",
        "--exact",
        "--out",
        p(&rec),
    ]);
    let timing = ok(&[
        "reconstruct",
        "--in",
        p(&rec),
        "--out",
        p(&state),
        "--threads",
        "2",
    ]);
    let t: TimingReport = serde_json::from_str(&timing).unwrap();
    assert!(t.t_step1_s > 0.0 && t.t_step2_s > 0.0 && t.t_step3_s > 0.0);
    assert!(t.t_total_s >= t.t_step1_s + t.t_step2_s + t.t_step3_s - 1e-3);
    assert_eq!(t.threads, 2);
    let rho = read_state(&state).unwrap();
    assert!(rho.max_abs_diff(&HermitianMatrix::identity_scaled(16, 1.0 / 16.0)) < 1e-10);
}

#[test]
fn kernels_give_identical_states() {
    let (_dir, at) = tmp();
    let rec = at("k.txt");
    ok(&[
        "simulate",
        "--n",
        "5",
        "--shots",
        "64",
        "--seed",
        "3",
        "--state",
        "random:4",
        "--out",
        p(&rec),
    ]);
    let a = at("fast.bin");
    let b = at("direct.bin");
    ok(&[
        "reconstruct",
        "--in",
        p(&rec),
        "--out",
        p(&a),
        "--kernel",
        "fast",
    ]);
    let timing = ok(&[
        "reconstruct",
        "--in",
        p(&rec),
        "--out",
        p(&b),
        "--kernel",
        "paper-direct",
    ]);
    assert!(timing.contains("\"kernel\":\"paper-direct\""));
    let (ra, rb) = (read_state(&a).unwrap(), read_state(&b).unwrap());
    assert!(ra.max_abs_diff(&rb) < 1e-10);
}

#[test]
fn eval_of_identical_state_is_zero() {
    let (_dir, at) = tmp();
    let path = at("ghz.bin");
    let truth = lre_core::TrueState::prepare(
        lre_core::StateDescriptor::parse("ghz", lre_core::QubitCount::new(3).unwrap()).unwrap(),
    )
    .unwrap()
    .density_matrix()
    .unwrap();
    write_state(&truth, &path).unwrap();
    let out = ok(&["eval", "--in", p(&path), "--state", "ghz", "--shots", "80"]);
    let report: ErrorReport = serde_json::from_str(&out).unwrap();
    assert!(report.hs_squared_rho.abs() < 1e-20);
    assert!(report.infidelity.abs() < 1e-12);
    assert_eq!(report.n0, 10.0);
    assert!(report.predicted_hs.is_some());

    let bad = run(&[
        "eval",
        "--in",
        p(&path),
        "--state",
        "ghz",
        "--shots",
        "80",
        "--n",
        "2",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("mismatched n"));
}

#[test]
fn eval_from_record_reports_both_estimates() {
    let (_dir, at) = tmp();
    let rec = at("e.txt");
    ok(&[
        "simulate",
        "--n",
        "2",
        "--shots",
        "400",
        "--seed",
        "9",
        "--state",
        "maxmixed",
        "--out",
        p(&rec),
    ]);
    let out = ok(&["eval", "--in", p(&rec), "--state", "maxmixed"]);
    let report: ErrorReport = serde_json::from_str(&out).unwrap();
    let mu = report.hs_squared_mu.unwrap();
    assert!(report.hs_squared_rho <= mu + 1e-15);
    assert_eq!(report.shots_per_setting, 400);
    assert_eq!(report.n0, 100.0);
    assert!((report.predicted_hs.unwrap() - (25.0 / 36.0) / 100.0).abs() < 1e-15);
}

#[test]
fn error_curve_csv_is_stable() {
    let (_dir, at) = tmp();
    let csv = at("curve.csv");
    let args = [
        "eval",
        "--grid",
        "16,64,256",
        "--n",
        "2",
        "--state",
        "maxmixed",
        "--trials",
        "30",
        "--seed",
        "4",
        "--out",
        p(&csv),
    ];
    ok(&args);
    let first = std::fs::read_to_string(&csv).unwrap();
    assert!(first.starts_with("N0,mean_hs_mu,mean_hs_rho,mean_infidelity,pred_hs,pred_infid\n"));
    let rows: Vec<ErrorRow> = read_csv(first.as_bytes()).unwrap();
    assert_eq!(
        rows.iter().map(|r| r.n0).collect::<Vec<_>>(),
        vec![16, 64, 256]
    );
    for r in &rows {
        assert!(r.mean_hs_rho <= r.mean_hs_mu);
        let pred = r.pred_hs.unwrap();
        assert!((r.mean_hs_mu / pred - 1.0).abs() < 0.3);
    }
    ok(&args);
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);

    let stdout = ok(&["bench-error", "--n", "1", "--grid", "32", "--trials", "5"]);
    let rows: Vec<ErrorRow> = read_csv(stdout.as_bytes()).unwrap();
    assert_eq!(rows.len(), 1);
}

#[test]
fn predict_prints_closed_forms() {
    let out = ok(&["predict", "--n", "14", "--shots", "16384"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["n0"], 1.0);
    let hs = v["predicted_hs"].as_f64().unwrap();
    assert!((hs - (5f64 / 6.0).powi(14)).abs() < 1e-15);
}

#[test]
fn bench_commands_emit_readable_tables() {
    let (_dir, at) = tmp();
    let csv = at("t.csv");
    let summary = ok(&[
        "bench-time",
        "--n-min",
        "2",
        "--n-max",
        "4",
        "--threads",
        "1",
        "--out",
        p(&csv),
    ]);
    let v: serde_json::Value = serde_json::from_str(&summary).unwrap();
    assert!(v["t1_log_slope"].as_f64().unwrap().is_finite());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,t1,t2,t3,total,kernel,threads\n"));
    let rows: Vec<TimeRow> = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4]);

    let out = run(&["bench-threads", "--n", "4", "--thread-list", "1,2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("threads,t1_s,speed\n"));
    let rows: Vec<ThreadRow> = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 2);
    let summary: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(summary["max_deviation"], 0.0);
}

#[test]
fn exit_codes() {
    let (_dir, at) = tmp();
    let missing = run(&[
        "reconstruct",
        "--in",
        p(&at("nope.txt")),
        "--out",
        p(&at("o.bin")),
    ]);
    assert_eq!(missing.status.code(), Some(3));

    let bad_state = run(&[
        "simulate",
        "--n",
        "2",
        "--shots",
        "10",
        "--state",
        "productz:101",
        "--out",
        p(&at("x.txt")),
    ]);
    assert_eq!(bad_state.status.code(), Some(2));

    let bad_flag = run(&[
        "simulate",
        "--n",
        "2",
        "--shots",
        "10",
        "--state",
        "ghz",
        "--threads",
        "0",
        "--out",
        p(&at("x.txt")),
    ]);
    assert_eq!(bad_flag.status.code(), Some(2));

    let rec = at("same.txt");
    ok(&[
        "simulate",
        "--n",
        "1",
        "--shots",
        "10",
        "--state",
        "ghz",
        "--out",
        p(&rec),
    ]);
    let same = run(&["reconstruct", "--in", p(&rec), "--out", p(&rec)]);
    assert_eq!(same.status.code(), Some(2));

    let unwritable = run(&[
        "simulate",
        "--n",
        "1",
        "--shots",
        "10",
        "--state",
        "ghz",
        "--out",
        p(&at("no/such/dir.txt")),
    ]);
    assert_eq!(unwritable.status.code(), Some(3));

    let big = at("big.txt");
    std::fs::write(
        &big,
        "{\"format\":\"pauli-lre/1\",\"n\":13,\"shots\":1,\"seed\":null,\"state\":null}\n",
    )
    .unwrap();
    let refused = run(&["reconstruct", "--in", p(&big), "--out", p(&at("big.bin"))]);
    assert_eq!(refused.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&refused.stderr);
    assert!(msg.contains("8192 x 8192 complex matrix"), "{msg}");
}
