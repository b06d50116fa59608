//! End-to-end tests of the `semirigid` binary: exit codes, artifact layout,
//! determinism of emitted files, and environment overrides.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_semirigid"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should launch")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

const UNSTABLE_PORTAL: &str = r#"{
  "nodes": [
    { "id": 0, "x": 0.0, "y": 0.0 },
    { "id": 1, "x": 6.0, "y": 0.0 },
    { "id": 2, "x": 0.0, "y": 3.5 },
    { "id": 3, "x": 6.0, "y": 3.5 }
  ],
  "members": [
    { "id": 0, "node_a": 0, "node_b": 2, "role": "column", "group": 0 },
    { "id": 1, "node_a": 1, "node_b": 3, "role": "column", "group": 0 },
    { "id": 2, "node_a": 2, "node_b": 3, "role": "beam", "group": 1,
      "conn_a": "pinned", "conn_b": "pinned" }
  ],
  "supports": [
    { "node": 0, "fixity": "pinned" },
    { "node": 1, "fixity": "pinned" }
  ],
  "groups": [
    { "id": 0, "label": "Columns", "role": "column" },
    { "id": 1, "label": "Beam", "role": "beam" }
  ],
  "tributary_width_m": 4.0,
  "design": { "Columns": "W10X33", "Beam": "W12X19" }
}"#;

#[test]
fn verify_passes_and_perturb_hook_trips_it() {
    let out = run(&["verify"]);
    assert!(out.status.success(), "verify failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("verification PASSED"), "missing verdict:\n{text}");
    assert!(text.contains("[PASS]"), "missing per-check lines:\n{text}");
    assert!(!text.contains("[FAIL]"), "unexpected failing check:\n{text}");

    let out = bin()
        .args(["verify"])
        .env("SEMIRIGID_VERIFY_PERTURB", "0.02")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "perturbed verify must exit 1");
    assert!(stdout(&out).contains("verification FAILED"));
}

#[test]
fn optimize_artifacts_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = (0..3).map(|i| tmp.path().join(format!("run{i}"))).collect();
    for dir in &dirs {
        let out = run(&[
            "optimize",
            "frame3",
            "--generations",
            "8",
            "--population",
            "20",
            "--restarts",
            "2",
            "--seed",
            "7",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "optimize failed: {}", stderr(&out));
    }
    for file in ["history_r00.csv", "history_r01.csv", "result.json", "run.log"] {
        let first = fs::read(dirs[0].join(file)).unwrap();
        for dir in &dirs[1..] {
            assert_eq!(
                first,
                fs::read(dir.join(file)).unwrap(),
                "{file} differs between identical runs"
            );
        }
    }
    let history = fs::read_to_string(dirs[0].join("history_r00.csv")).unwrap();
    let mut lines = history.lines();
    assert_eq!(
        lines.next(),
        Some("generation,best_weight_n,best_lambda,mean_fitness,best_so_far_weight_n")
    );
    assert_eq!(lines.count(), 9, "8 generations plus the initial population");
}

#[test]
fn analyze_writes_report_and_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("analysis");
    let portal = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/portal_semirigid.json");
    let out = run(&["analyze", portal, "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "analyze failed: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Columns = W12X26"), "missing assignment line:\n{text}");
    assert!(text.contains("weight"), "missing weight line:\n{text}");
    assert!(dir.join("analysis.json").exists());
    assert!(dir.join("run.log").exists());
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("analysis.json")).unwrap()).unwrap();
    assert!(doc["weight_n"].as_f64().unwrap() > 0.0);
    assert!(doc["outcome"]["satisfaction"].is_number());
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();

    // Malformed JSON: serde's message carries line/column.
    let bad = tmp.path().join("bad.json");
    write(&bad, "{ \"grid\": { \"bays\": 3, }");
    let out = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line"), "stderr: {}", stderr(&out));

    // Structurally valid config without a design table cannot be analyzed.
    let no_design = tmp.path().join("no_design.json");
    write(
        &no_design,
        r#"{ "grid": { "bays": 3, "bay_m": 5.0, "stories": 3, "story_m": 3.2,
                       "column_bands": [3], "beam_bands": [2, 3] } }"#,
    );
    let out = run(&["analyze", no_design.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("design"), "stderr: {}", stderr(&out));

    // Unknown optimize target.
    let out = run(&["optimize", "frame7"]);
    assert_eq!(out.status.code(), Some(2));

    // --connection only applies to built-in benchmarks.
    let portal = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/portal_semirigid.json");
    let out = run(&["optimize", portal, "--connection", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("benchmark"), "stderr: {}", stderr(&out));
}

#[test]
fn unstable_structure_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("mechanism.json");
    write(&path, UNSTABLE_PORTAL);
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("unstable"), "stderr: {}", stderr(&out));
}

#[test]
fn catalog_env_override_and_listing() {
    let out = run(&["catalog", "list"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("W16X36"));
    assert!(text.contains("44 sections"), "builtin catalog count:\n{text}");

    let out = run(&["catalog", "show", "W16X36"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("unit weight"));

    let out = run(&["catalog", "show", "W99X999"]);
    assert_eq!(out.status.code(), Some(2));

    let tmp = tempfile::tempdir().unwrap();
    let custom = tmp.path().join("tiny.csv");
    write(
        &custom,
        "name,units,area,depth,Ix,Sx,ry,bf,tf\n\
         T1X10,in,5.0,10.0,100.0,20.0,1.5,5.0,0.4\n\
         T2X20,in,8.0,12.0,200.0,33.0,1.9,6.5,0.5\n",
    );
    let out = bin()
        .args(["catalog", "list"])
        .env("SEMIRIGID_CATALOG", custom.to_str().unwrap())
        .output()
        .unwrap();
    assert!(out.status.success(), "custom catalog list: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("T1X10") && text.contains("T2X20"), "{text}");
    assert!(text.contains("2 sections"), "{text}");

    // A broken override is a config error, not a silent fallback.
    let out = bin()
        .args(["catalog", "list"])
        .env("SEMIRIGID_CATALOG", tmp.path().join("missing.csv").to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
