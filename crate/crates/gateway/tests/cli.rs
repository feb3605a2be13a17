use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pocketvine"))
}

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.jsonl"))
}

fn json_lines(bytes: &[u8]) -> Vec<Value> {
    String::from_utf8_lossy(bytes).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn reproduce_paper_exits_zero() {
    let out = bin().args(["calibrate", "--reproduce-paper"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = json_lines(&out.stdout);
    let summary = recs.iter().find(|r| r.get("reproduced").is_some()).unwrap();
    assert_eq!(summary["passed"], summary["reproduced"]);
}

#[test]
fn calibrate_csv_round_trip_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("in.csv");
    let spec: pocketvine::calibration::SyntheticSpec = "control,top,medium,0.4,noise=0.01,seed=2".parse().unwrap();
    pocketvine::calibration::write_csv(&spec.generate().unwrap(), std::fs::File::create(&csv).unwrap()).unwrap();
    let (fits, plot) = (dir.path().join("fits.jsonl"), dir.path().join("plot.jsonl"));
    let status = bin()
        .args(["calibrate", "--input"])
        .arg(&csv)
        .arg("--output")
        .arg(&fits)
        .arg("--plot")
        .arg(&plot)
        .status()
        .unwrap();
    assert!(status.success());
    let recs = json_lines(&std::fs::read(&fits).unwrap());
    assert!(recs[0]["slope"].as_f64().unwrap() > 0.0);
    assert_eq!(json_lines(&std::fs::read(&plot).unwrap()).len(), 1);
}

#[test]
fn calibrate_errors_are_records() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("empty.csv");
    std::fs::write(&csv, "pocket_id\n").unwrap();
    let out = bin().args(["calibrate", "--input"]).arg(&csv).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_lines(&out.stderr)[0]["error"], "MISSING_COLUMN");
    let out = bin().args(["calibrate", "--synthetic", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json_lines(&out.stderr)[0]["error"], "INVALID_SPEC");
}

#[test]
fn headless_demo_writes_trace_and_transitions() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    let out = bin()
        .args(["demo", "--headless", "--scenario"])
        .arg(scenario("small_object"))
        .arg("--output")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let lines = json_lines(&out.stdout);
    let summary = lines.last().unwrap();
    assert_eq!(summary["scenario"], "small_object");
    assert_eq!(summary["ticks"], 2600);
    assert!(lines.iter().any(|l| l["to"] == "growing_right" && l["trigger"] == "contact"));
    let snaps = json_lines(&std::fs::read(&trace).unwrap());
    assert_eq!(snaps.len(), 2600);
    assert_eq!(snaps[0]["counters"]["tick"], 1);
}

#[test]
fn same_seed_same_trace_other_seed_differs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let path = dir.path().join(name);
        let ok = bin()
            .args(["demo", "--headless", "--seed", seed, "--scenario"])
            .arg(scenario("empty"))
            .arg("--output")
            .arg(&path)
            .output()
            .unwrap();
        assert!(ok.status.success());
        std::fs::read(path).unwrap()
    };
    assert_eq!(run("3", "a"), run("3", "b"));
    assert_ne!(run("3", "a"), run("4", "c"));
}

#[test]
fn bad_scenario_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.jsonl");
    std::fs::write(&path, "# header\n{\"kind\": \"seed\", \"seed\": 1}\n{\"kind\": \"obstacle\", \"center\": [0, 1]}\n").unwrap();
    let out = bin().args(["demo", "--headless", "--scenario"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = &json_lines(&out.stderr)[0];
    assert_eq!(err["error"], "INVALID_SCENARIO");
    assert!(err["detail"].as_str().unwrap().starts_with("line 3:"), "{err}");
}
