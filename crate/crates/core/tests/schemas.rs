//! The published JSON schemas in `docs/` accept what the analyzer writes
//! and reject what it refuses.

mod common;

use std::path::{Path, PathBuf};

use jsonschema::Validator;
use miniobj_analyzer::driver::{run_all, run_stage1, run_stage2, Manifest, RunOptions};
use miniobj_analyzer::fixtures::{self, write_project};
use serde_json::{json, Value};

fn validator(name: &str) -> Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs").join(name);
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn check(v: &Validator, path: &Path) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.ends_with('\n') && !text.ends_with("\n\n"), "{}", path.display());
    let doc: Value = serde_json::from_str(&text).unwrap();
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{}: {errors:#?}", path.display());
}

fn json_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .flatten()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    v.sort();
    v
}

fn opts() -> RunOptions {
    RunOptions { exit_zero: true, ..Default::default() }
}

const MIXED: &str = "\
class foo {
  x: i32;
  foo() {}
  fn isZero() -> bool { return x == 0; }
}
fn run() -> i32 {
  let v = extern_input();
  let u: u32 = cast<u32>(as_int(v));
  return as_int(v);
}
fn main() -> i32 {
  let f = new foo();
  if (f.isZero()) { return run(); }
  return 0;
}
";

#[test]
fn report_files_match_schema() {
    let v = validator("report-schema.json");
    let mut checked = 0;
    for d in ["running-example", "running-example-initialized", "aliased-store-off", "aliased-store-on"] {
        for f in json_files(&common::golden_dir().join(d)) {
            check(&v, &f);
            checked += 1;
        }
    }

    // every outcome kind: validated, final and error
    let tmp = tempfile::tempdir().unwrap();
    let m = Manifest::load(&write_project(tmp.path(), &[("main", MIXED)], json!({})).unwrap()).unwrap();
    let run = run_all(&m, &opts()).unwrap();
    assert!(run.stage1.reports.iter().any(|r| r.cwe == "CWE457"));
    assert!(run.stage1.reports.iter().any(|r| r.cwe == "CWE843"));
    for f in json_files(&m.reports_dir()) {
        check(&v, &f);
        checked += 1;
    }
    run_stage1(&m, &opts()).unwrap();
    std::fs::write(tmp.path().join("main.mo"), MIXED.replace("isZero", "isNil")).unwrap();
    let (s2, _) = run_stage2(&m, &opts()).unwrap();
    assert!(s2.results.iter().any(|r| matches!(r.outcome, miniobj_analyzer::driver::Outcome::Error { .. })));
    let summary = miniobj_analyzer::driver::SummaryFile {
        summary: Default::default(),
        unit_errors: vec![],
        reports: s2.results.clone(),
    };
    let path = tmp.path().join("stale-summary.json");
    std::fs::write(&path, miniobj_analyzer::reports::to_json(&summary)).unwrap();
    check(&v, &path);
    // 4 golden dirs of 3 files, the fresh run (3 candidates, 1 wp report, summary), the stale summary
    assert_eq!(checked, 12 + 5 + 1);
}

#[test]
fn report_schema_rejects_malformed() {
    let v = validator("report-schema.json");
    let text = std::fs::read_to_string(common::golden_dir().join("running-example/report-41c42a95.json")).unwrap();
    let good: Value = serde_json::from_str(&text).unwrap();
    assert!(v.is_valid(&good));
    let mut bad = good.clone();
    bad["id"] = json!("41C42A95");
    assert!(!v.is_valid(&bad));
    let mut bad = good.clone();
    bad.as_object_mut().unwrap().remove("snippet");
    assert!(!v.is_valid(&bad));
    let mut bad = good;
    bad["loc"]["line"] = json!(0);
    assert!(!v.is_valid(&bad));
}

#[test]
fn manifest_schema_agrees_with_loader() {
    let v = validator("manifest-schema.json");
    let tmp = tempfile::tempdir().unwrap();
    let full = json!({
        "entries": ["main"],
        "checkers": ["cwe457", "cwe194"],
        "engine": {"path_budget": 50, "loop_bound": 0},
        "wpa": {"chain_cap": 4, "depth_cap": 8, "resolve_ref_aliases": true},
        "out": "elsewhere"
    });
    let cases = [
        (json!({}), true),
        (full, true),
        (json!({"checkers": ["cwe999"]}), false),
        (json!({"bogus": 1}), false),
        (json!({"engine": {"path_budget": 0}}), false),
        (json!({"wpa": {"unknown": true}}), false),
        (json!({"units": []}), false),
    ];
    for (i, (extra, ok)) in cases.into_iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        let p = write_project(&dir, &fixtures::running_example(), extra.clone()).unwrap();
        let doc: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v.is_valid(&doc), ok, "schema on {extra}");
        assert_eq!(Manifest::load(&p).is_ok(), ok, "loader on {extra}");
    }
    for d in std::fs::read_dir(common::corpus_dir()).unwrap().flatten() {
        for case in std::fs::read_dir(d.path()).unwrap().flatten() {
            check(&v, &case.path().join("manifest.json"));
        }
    }
}
