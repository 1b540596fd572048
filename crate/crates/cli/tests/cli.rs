use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use lidless::render::{read_inventory, TileRecord};

fn lidless(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lidless"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn golden() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden/render_4_j3.json")
}

#[test]
fn locate_examples() {
    let out = lidless(&["locate", "--dim", "2", "--point", "3,1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "slab(+,1,1,0)\t[11/5, 4] x [-4, 4]\n");

    let out = lidless(&["locate", "--dim", "2", "--point", "11/5,0"]);
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 2);
    assert!(text.contains("slab(+,1,1,0)") && text.contains("slab(+,1,1,1)"));

    let out = lidless(&["locate", "--dim", "2", "--point", "0.5,-0.3"]);
    assert!(stdout(&out).starts_with("ball\t"));

    let out = lidless(&["locate", "--point", "1,-2", "--sigma"]);
    assert_eq!(stdout(&out), "cell(-,2,0)\t[-1, 1] x [-2, -1)\n");
}

#[test]
fn locate_rejects_bad_input() {
    let out = lidless(&["locate", "--dim", "2", "--point", "1/0,1"]);
    assert!(!out.status.success());
    let out = lidless(&["locate", "--dim", "2", "--point", "abc,1"]);
    assert!(!out.status.success());
    let out = lidless(&["locate", "--dim", "3", "--point", "1,1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension mismatch"));
}

#[test]
fn tiles_report_overflow_distinctly() {
    let out = lidless(&["tiles", "--dim", "2", "--window", "1,1.5,0,0.5", "--cap", "10000"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stdout(&out).starts_with("overflow"));

    let out = lidless(&["tiles", "--window", "5/4,3/2,0,1/2", "--json"]);
    assert!(out.status.success());
    assert_eq!(
        stdout(&out).trim(),
        r#"{"status":"complete","ids":[{"kind":"slab","sign":1,"axis":1,"level":0,"slab":0}]}"#
    );
}

#[test]
fn render_matches_golden_inventory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("figure.svg");
    let out = lidless(&[
        "render",
        "--window",
        "-4,4,-4,4",
        "--max-slab",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let svg = fs::read_to_string(&path).unwrap();
    let drawn = read_inventory(&svg).unwrap();
    let expected: Vec<TileRecord> =
        serde_json::from_str(&fs::read_to_string(golden()).unwrap()).unwrap();
    assert_eq!(drawn, expected);

    let again = lidless(&["render", "--window", "-4,4,-4,4", "--max-slab", "3"]);
    assert_eq!(stdout(&again), svg);

    let unit = lidless(&["render", "--window", "-1,1,-1,1"]);
    assert_eq!(read_inventory(&stdout(&unit)).unwrap().len(), 1);

    let flat = lidless(&["render", "--window", "-1,1,-1,1,-1,1"]);
    assert!(!flat.status.success());
}

#[test]
fn verify_exit_status_follows_report() {
    let out = lidless(&["verify", "--suite", "tau", "--dim", "2", "--samples", "2000", "--seed", "7", "--windows", "5"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["failure_count"], 0);
    assert_eq!(report["stats"]["samples"], 2000);

    let out = lidless(&["verify", "--suite", "sigma", "--dim", "1", "--mode", "adversarial", "--samples", "10", "--mutation", "closed-lid"]);
    assert_eq!(out.status.code(), Some(1));

    let out = lidless(&["verify", "--suite", "schedule", "--dim", "8", "--max-level", "12"]);
    assert!(out.status.success());
    let out = lidless(&["verify", "--suite", "schedule", "--dim", "2", "--mutation", "inflated-eps"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn embed_writes_pairs_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let space = dir.path().join("l1_2.space");
    let signs = dir.path().join("signs.set");
    let pairs = dir.path().join("pairs.json");
    let report = dir.path().join("report.json");
    fs::write(&space, r#"{"dim": 2, "kind": "ell1"}"#).unwrap();
    fs::write(&signs, r#"{"functionals": [["1","1"],["1","-1"],["-1","1"],["-1","-1"]]}"#).unwrap();
    let out = lidless(&[
        "embed",
        "--space",
        space.to_str().unwrap(),
        "--norming",
        signs.to_str().unwrap(),
        "--out",
        pairs.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--samples",
        "500",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(&pairs).unwrap()).unwrap();
    assert_eq!(written.as_array().unwrap().len(), 2);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(summary["failure_count"], 0);

    // The pairs file drives pullback location.
    let out = lidless(&[
        "locate",
        "--point",
        "3,0",
        "--space",
        space.to_str().unwrap(),
        "--pairs",
        pairs.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("T(3, 0) = "));

    let diagonal = dir.path().join("diag.set");
    fs::write(&diagonal, r#"{"functionals": [["1","1"],["-1","-1"]]}"#).unwrap();
    let out = lidless(&["embed", "--space", space.to_str().unwrap(), "--norming", diagonal.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("not 1-norming"));
}
