use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn padguard(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_padguard"))
        .args(args)
        .output()
        .expect("spawn padguard");
    assert!(
        out.status.success(),
        "padguard {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn json(bytes: &[u8]) -> serde_json::Value {
    serde_json::from_slice(bytes).expect("json output")
}

#[test]
fn scenarios_lists_bundled() {
    let out = padguard(&["scenarios"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "empty_pad",
        "intruder_hover",
        "sustained_intrusion",
        "walk_60s",
    ] {
        assert!(text.contains(name), "{name} missing from:\n{text}");
    }
}

#[test]
fn run_writes_outputs_and_report_reproduces() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = out_dir.to_str().unwrap();
    let printed = padguard(&["run", "empty_pad", "--seed", "1", "--out", out, "--csv"]);
    for f in [
        "trace.jsonl",
        "report.json",
        "transitions.jsonl",
        "manifest.json",
        "uav.csv",
        "people.csv",
    ] {
        assert!(out_dir.join(f).is_file(), "{f} not written");
    }
    let stored = fs::read(out_dir.join("report.json")).unwrap();
    assert_eq!(printed.stdout, stored);

    let trace = out_dir.join("trace.jsonl");
    let again = padguard(&["report", trace.to_str().unwrap()]);
    assert_eq!(again.stdout, stored);

    let report = json(&stored);
    assert_eq!(report["scenario_id"], "empty_pad");
    assert_eq!(report["retreat_events"], 0);
    assert!(report["touchdown"].is_object());
}

#[test]
fn plan_with_oracle() {
    let problem = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems/two_people.json");
    let out = padguard(&[
        "plan",
        problem.to_str().unwrap(),
        "--oracle",
        "--grid",
        "0.02",
    ]);
    let v = json(&out.stdout);
    assert_eq!(v["solution"]["feasible"], true);
    let gap = v["oracle"]["gap"].as_f64().unwrap();
    let oracle = v["oracle"]["solution"]["objective"].as_f64().unwrap();
    assert!(gap >= -1e-3 * oracle.abs(), "solver behind oracle by {gap}");
    let lp = &v["landing_point"];
    let (x, y) = (lp["x"].as_f64().unwrap(), lp["y"].as_f64().unwrap());
    assert!(x.hypot(y) <= 1.0 + 1e-6);
}

#[test]
fn eval_reads_stored_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    padguard(&["run", "walk_60s", "--seed", "3", "--out", out]);
    let trace = dir.path().join("trace.jsonl");
    let v = json(&padguard(&["eval", trace.to_str().unwrap()]).stdout);
    assert!(v["ape"].as_f64().unwrap() < 0.4);
    assert!(v["cossim"].as_f64().unwrap() > 0.92);
    assert!(v["matched"].as_u64().unwrap() > 0);
}

#[test]
fn train_dist_small() {
    let out = padguard(&[
        "train-dist",
        "--seed",
        "5",
        "--samples",
        "600",
        "--n-estimators",
        "60",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Default") && text.contains("Tuned"), "{text}");
}

#[test]
fn bad_scenario_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\n  \"id\": \"x\",\n  \"duration\": -1\n}\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_padguard"))
        .args([
            "run",
            bad.to_str().unwrap(),
            "--seed",
            "0",
            "--out",
            dir.path().join("o").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}
