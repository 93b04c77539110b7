use std::process::{Command, Output};

fn gbl(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gbl"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("GBL_THREADS", t);
    }
    cmd.output().expect("binary runs")
}

fn without_timestamp(json: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(json).expect("stdout is a JSON report");
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn construct_and_verify_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = gbl(
        &[
            "--experiment", "construct-and-verify", "--q", "2", "--n-levels", "2", "--eps", "0.9", "--seed", "7",
            "--out-dir", dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(dir.path().join("construct-and-verify.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(v["experiment"], "construct-and-verify");
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert!(String::from_utf8_lossy(&out.stdout).lines().all(|l| l.starts_with("PASS")));
}

#[test]
fn malformed_flags_are_usage_errors() {
    assert_eq!(gbl(&["--experiment", "maximal", "--bogus"], None).status.code(), Some(2));
    assert_eq!(gbl(&["--experiment", "nope"], None).status.code(), Some(2));
    assert_eq!(gbl(&["--experiment", "maximal", "--p", "0.5"], None).status.code(), Some(2));
    assert_eq!(gbl(&[], None).status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_one_with_hint() {
    let out = gbl(&["--experiment", "construct-and-verify", "--n-levels", "3", "--samples", "10"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("larger epsilon"));
}

#[test]
fn reports_match_across_runs_and_thread_counts() {
    let args = ["--experiment", "greedy-constants", "--seed", "3", "--samples", "80", "--p", "inf", "--q", "3"];
    let one = gbl(&args, Some("1"));
    let four = gbl(&args, Some("4"));
    let again = gbl(&args, Some("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(without_timestamp(&one.stdout), without_timestamp(&four.stdout));
    assert_eq!(without_timestamp(&four.stdout), without_timestamp(&again.stdout));
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = gbl(
        &[
            "--experiment", "nondemocracy-demo", "--format", "csv", "--out-dir", dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let checks = std::fs::read_to_string(dir.path().join("nondemocracy-demo_checks.csv")).unwrap();
    assert!(checks.starts_with("name,pass,value,bound\n"));
    let table = std::fs::read_to_string(dir.path().join("nondemocracy-demo_fundamental.csv")).unwrap();
    assert!(table.contains("L1,2,100,10,100,10,10"), "{table}");
}
