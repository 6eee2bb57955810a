use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use qewa::bench::read_records;

fn qewa(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qewa"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn qewa_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qewa"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    // Usage errors exit before reading stdin.
    if let Err(e) = child.stdin.take().unwrap().write_all(input.as_bytes()) {
        assert_eq!(e.kind(), std::io::ErrorKind::BrokenPipe);
    }
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn gen_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = qewa(
        &["--seed", "1", "gen", "--family", "normal", "--dynamics", "switch", "--T", "100", "--N", "1000"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "n,x,true_q50,true_q70,true_q90");
    // Row 1 has mean +2, so its median is 2.
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0], "1");
    assert_eq!(first[2], "2");
    // Row 51 is the first sample of the lower level.
    let row51: Vec<&str> = lines[51].split(',').collect();
    assert_eq!(row51[2], "-2");
}

#[test]
fn gen_to_file_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &'static str| {
        [
            "--seed", "7", "gen", "--family", "chi2", "--dynamics", "periodic", "--N", "500", "--out",
            name,
        ]
    };
    assert!(qewa(&args("a.csv"), dir.path()).status.success());
    assert!(qewa(&args("b.csv"), dir.path()).status.success());
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let other = qewa(
        &["--seed", "8", "gen", "--family", "chi2", "--dynamics", "periodic", "--N", "500"],
        dir.path(),
    );
    assert_ne!(other.stdout, a);
}

#[test]
fn gen_rejects_invalid_chi2_offset_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let out = qewa(
        &[
            "gen", "--family", "chi_squared", "--dynamics", "switch", "--a", "7", "--b", "6", "--out",
            "never.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("never.csv").exists());
    let out = qewa(&["gen", "--family", "normal", "--dynamics", "switch", "--T", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn track_reads_stdin() {
    let out = qewa_stdin(&["track", "--estimator", "ewa-mean", "--alpha", "0.5"], "3\n1\n\n5\n");
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "n,x,q_hat\n1,3,3\n2,1,2\n3,5,3.5\n");
}

#[test]
fn track_marks_warmup_rows() {
    let input: String = (1..=12).map(|i| format!("{i}\n")).collect();
    let out = qewa_stdin(&["track", "--q", "0.5", "--warmup", "10"], &input);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 13);
    assert!(lines[9].ends_with(",NA"));
    // Seeded on the tenth value at the buffer median.
    assert_eq!(lines[10], "10,10,5.5");
    assert!(!lines[11].ends_with(",NA"));
}

#[test]
fn track_baselines_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("in.csv"), "t,value\n1,10\n2,12\n3,10\n").unwrap();
    let out = qewa(
        &[
            "track", "--estimator", "dumiqe", "--q", "0.7", "--lambda", "0.01", "--input", "in.csv",
            "--column", "value",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "1,10,10");
    assert_eq!(lines[2], "2,12,10.07");
    let out = qewa_stdin(&["track", "--estimator", "frugal", "--step", "0.1", "--q", "0.7"], "0\n5\n");
    assert_eq!(stdout(&out), "n,x,q_hat\n1,0,0\n2,5,0.069999999999999993\n");
}

#[test]
fn track_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qewa_stdin(&["track", "--q", "1.5"], "1\n").status.code(), Some(2));
    assert_eq!(qewa_stdin(&["track", "--lambda", "0"], "1\n").status.code(), Some(2));
    let bad = qewa_stdin(&["track"], "1\nfoo\n");
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("-:2:"));
    let missing = qewa(&["track", "--input", "nope.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(1));
}

const MINIMAL: &str = "n = 2000\nquantiles = [0.5]\n\
    [[streams]]\nfamily = \"normal\"\ndynamics = \"periodic\"\n\
    [[estimators]]\nkind = \"qewa\"\nlambda = 0.05\nratio = 0.01\n";

#[test]
fn bench_minimal_config() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.toml"), MINIMAL).unwrap();
    let out = qewa(&["bench", "--config", "c.toml", "--out", "r.csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let records = read_records(&dir.path().join("r.csv")).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].estimator, "qewa");
    assert!(records[0].rmse > 0.0);
    assert!(records[0].wall_ms.is_none());
    assert!(String::from_utf8_lossy(&out.stderr).contains("normal-periodic-T100"));
}

#[test]
fn bench_clairvoyant_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "n = 3000\n[[streams]]\nfamily = \"chi_squared\"\ndynamics = \"switch\"\n\
         [[estimators]]\nkind = \"clairvoyant\"\n",
    )
    .unwrap();
    let out = qewa(
        &["bench", "--config", "c.toml", "--out", "r.csv", "--record-timing", "--jobs", "2"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let records = read_records(&dir.path().join("r.csv")).unwrap();
    assert_eq!(records.len(), 3);
    for r in &records {
        assert_eq!(r.rmse, 0.0);
        assert_eq!(r.recovery_time, Some(0.0));
        assert!(r.wall_ms.is_some());
    }
}

#[test]
fn bench_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "n = 10\nburn_in = 20\n[[streams]]\nfamily = \"normal\"\ndynamics = \"switch\"\n[[estimators]]\nkind = \"dumiqe\"\n").unwrap();
    let out = qewa(&["bench", "--config", "bad.toml", "--out", "r.csv"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("r.csv").exists());
    std::fs::write(dir.path().join("typo.toml"), "n = 10\nstreamz = []\n").unwrap();
    assert_eq!(qewa(&["bench", "--config", "typo.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(qewa(&["bench", "--config", "absent.toml"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("ok.toml"), MINIMAL).unwrap();
    assert_eq!(
        qewa(&["bench", "--config", "ok.toml", "--jobs", "0"], dir.path()).status.code(),
        Some(2)
    );
}

fn drift_fixture(dir: &Path) {
    // Errors around 0.5 with a jump to around 5 from sample 400 on.
    let text: String = (0..1500)
        .map(|i| {
            let base = if i >= 400 { 5.0 } else { 0.5 };
            format!("{}\n", base + 0.2 * (i as f64 * 0.7).sin())
        })
        .collect();
    std::fs::write(dir.join("errors.txt"), text).unwrap();
}

#[test]
fn drift_writes_trace_and_events() {
    let dir = tempfile::tempdir().unwrap();
    drift_fixture(dir.path());
    let out = qewa(
        &["drift", "--input", "errors.txt", "--trace-out", "trace.csv", "--events-out", "events.csv"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 1501);
    assert!(trace.starts_with("n,err,q_hat,event\n1,0.5,NA,0\n"));
    let events = std::fs::read_to_string(dir.path().join("events.csv")).unwrap();
    let rows: Vec<&str> = events.lines().skip(1).collect();
    assert!(!rows.is_empty());
    let first: u64 = rows[0].split(',').next().unwrap().parse().unwrap();
    assert!(first > 400 && first < 600, "{first}");
}

#[test]
fn drift_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    drift_fixture(dir.path());
    let fired = qewa(&["drift", "--input", "errors.txt", "--fail-on-event"], dir.path());
    assert_eq!(fired.status.code(), Some(3));
    let quiet = qewa(
        &["drift", "--input", "errors.txt", "--fail-on-event", "--threshold", "100"],
        dir.path(),
    );
    assert_eq!(quiet.status.code(), Some(0));
    let short = qewa_stdin(&["drift"], "1\n2\n3\n");
    assert_eq!(short.status.code(), Some(0));
    assert_eq!(stdout(&short), "n,err,q_hat,event\n1,1,NA,0\n2,2,NA,0\n3,3,NA,0\n");
    assert_eq!(qewa(&["drift", "--input", "missing.txt"], dir.path()).status.code(), Some(1));
    assert_eq!(qewa_stdin(&["drift", "--warmup", "3"], "1\n").status.code(), Some(2));
    assert_eq!(qewa_stdin(&["drift"], "1\nNaN\n").status.code(), Some(1));
}

#[test]
fn drift_column_input() {
    let dir = tempfile::tempdir().unwrap();
    let text: String = std::iter::once("ts,err\n".to_string())
        .chain((0..200).map(|i| format!("{i},{}\n", 0.3 + 0.1 * (i as f64).sin())))
        .collect();
    std::fs::write(dir.path().join("e.csv"), text).unwrap();
    let out = qewa(&["drift", "--input", "e.csv", "--column", "err"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out).lines().count(), 201);
}
