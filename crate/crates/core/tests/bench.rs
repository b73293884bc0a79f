mod common;

use miniobj_analyzer::bench::corpus::{admit, case_dirs};
use miniobj_analyzer::bench::*;
use miniobj_analyzer::driver::RunOptions;
use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::ast::SrcLoc;
use miniobj_analyzer::frontend::load_program;

fn facts_with(sources: &[(&str, &str)], cfg: &OracleConfig) -> ExecutionFacts {
    let p = load_program(sources).unwrap_or_else(|d| panic!("{d:?}"));
    oracle_interpret(&p, &["main".into()], cfg)
}

fn facts(src: &str) -> ExecutionFacts {
    facts_with(&[("t", src)], &OracleConfig::default())
}

#[test]
fn oracle_running_example() {
    let f = facts_with(&fixtures::running_example(), &OracleConfig::default());
    assert_eq!(f.uninit_reads.len(), 1);
    let r = f.uninit_reads.iter().next().unwrap();
    assert_eq!(r.field, "foo::x");
    assert_eq!(r.site.loc, SrcLoc { file: "foo.mo".into(), line: 13, col: 7 });
    assert_eq!(r.chain, ["main", "foo::isZero"]);
    assert!(!f.partial);
    assert_eq!(f.executions, 1);
}

#[test]
fn oracle_constructor_store_through_virtual_call() {
    let f = facts_with(&fixtures::running_example_initialized(), &OracleConfig::default());
    assert!(f.uninit_reads.is_empty());
    let targets: Vec<_> = f.vcall_targets.values().flatten().cloned().collect();
    assert_eq!(targets, ["foo::reset"]);
    assert!(f.call_edges.contains(&("foo::foo".into(), "foo::reset".into())));
}

#[test]
fn oracle_store_through_reference_parameter() {
    let f = facts_with(&fixtures::aliased_store(), &OracleConfig::default());
    assert!(f.uninit_reads.is_empty(), "{:?}", f.uninit_reads);
}

#[test]
fn oracle_partial_initialization() {
    let f = facts(
        "class C {\n  x: i32;\n  y: i32;\n  C() { y = 2; }\n  fn sum() -> i32 { return x + y; }\n}\nfn main() {\n  let c = new C();\n  let s = c.sum();\n}\n",
    );
    let fields: Vec<_> = f.uninit_reads.iter().map(|r| r.field.as_str()).collect();
    assert_eq!(fields, ["C::x"]);
}

#[test]
fn oracle_only_defective_class() {
    let f = facts(
        "class A {\n  a: i32;\n  A() { a = 1; }\n  fn get() -> i32 { return a; }\n}\nclass B {\n  b: i32;\n  B() {}\n  fn get() -> i32 { return b; }\n}\nfn main() {\n  let x = new A().get();\n  let y = new B().get();\n}\n",
    );
    let fields: Vec<_> = f.uninit_reads.iter().map(|r| r.field.as_str()).collect();
    assert_eq!(fields, ["B::b"]);
}

#[test]
fn oracle_traps_bad_downcast() {
    let src = "class A {\n  A() {}\n}\nclass B : A {\n  B() {}\n}\nfn main() {\n  let p: A = new A();\n  let q = downcast<B>(p);\n  let r = downcast<B>(p);\n}\n";
    let f = facts(src);
    // the first downcast traps, so the second never runs
    assert_eq!(f.bad_downcasts.iter().map(|s| s.loc.line).collect::<Vec<_>>(), [9]);
    let ok = facts(&src.replace("new A()", "new B()"));
    assert!(ok.bad_downcasts.is_empty());
}

#[test]
fn oracle_wrong_tag_access() {
    let f = facts("fn main() {\n  let v = extern_input();\n  let n = as_int(v);\n}\n");
    assert_eq!(f.executions, 19);
    assert_eq!(f.bad_tag_accesses.len(), 1);
    let g = facts("fn main() {\n  let v = extern_input();\n  if (tag_of(v) == Int) { let n = as_int(v); }\n}\n");
    assert!(g.bad_tag_accesses.is_empty());
}

#[test]
fn oracle_i8_sign_conversion_is_exhaustive() {
    let src = "fn main() {\n  let v = extern_input();\n  if (tag_of(v) == Int) {\n    let a: i8 = as_int8(v);\n    let b: u8 = cast<u8>(a);\n  }\n}\n";
    let cfg = OracleConfig { universe: Universe::I8, ..Default::default() };
    let f = facts_with(&[("main", src)], &cfg);
    assert_eq!(f.executions, 256 + 3);
    assert_eq!(f.negative_to_unsigned.len(), 1);
    let loc = &f.negative_to_unsigned.iter().next().unwrap().loc;
    assert_eq!((loc.line, loc.col), (5, 17));
    let guarded = src.replace("let b: u8 = cast<u8>(a);", "if (a >= 0) { let b: u8 = cast<u8>(a); }");
    assert!(facts_with(&[("main", &guarded)], &cfg).negative_to_unsigned.is_empty());
}

#[test]
fn oracle_i8_sign_extension_guard() {
    // exhaustive over i8: only the else branch can pass a negative size
    let line = "  if (s > 0) { let n: i32 = s; read_buf(b, n); } else { let m: i32 = s; read_buf(b, m); }";
    let src = format!("fn main() {{\n  let s = as_int8(extern_input());\n  let b = alloc(4);\n{line}\n}}\n");
    let cfg = OracleConfig { universe: Universe::I8, ..Default::default() };
    let f = facts_with(&[("main", &src)], &cfg);
    let cols: Vec<_> = f.negative_sizes.iter().map(|s| s.loc.col as usize).collect();
    assert_eq!(cols, [line.rfind("read_buf").unwrap() + 1]);
}

#[test]
fn oracle_budgets_mark_partial() {
    let src = "fn main() {\n  let i = 0;\n  while (true) { i = i + 1; }\n}\n";
    let f = facts_with(&[("t", src)], &OracleConfig { step_budget: 50, ..Default::default() });
    assert!(f.partial);
    let src = "fn main() {\n  let a = extern_input();\n  let b = extern_input();\n}\n";
    let f = facts_with(&[("t", src)], &OracleConfig { input_budget: 10, ..Default::default() });
    assert!(f.partial);
    assert_eq!(f.executions, 10);
    let f = facts_with(&[("t", src)], &OracleConfig::default());
    assert!(!f.partial);
    assert_eq!(f.executions, 19 * 19);
}

#[test]
fn oracle_wraps_and_divides_by_zero() {
    let src = "class C {\n  x: i32;\n  C() {}\n  fn get() -> i32 { return x; }\n}\nfn main() {\n  let z = 0;\n  let q = 7 / z;\n  let w: i8 = cast<i8>(200);\n  if (q == 0) {\n    if (w < 0) { let n = new C().get(); }\n  }\n}\n";
    assert_eq!(facts(src).uninit_reads.len(), 1);
}

#[test]
fn generated_labels_hold() {
    let (cases, rejected) = generate();
    assert!(rejected.is_empty(), "{rejected:#?}");
    for cwe in [457, 843, 195, 194] {
        let of = |v| cases.iter().filter(|c| c.cwe() == cwe && c.variant() == v).count();
        assert!(of(Variant::Bad) >= 20 && of(Variant::Good) >= 20, "cwe{cwe}");
    }
    for c in &cases {
        let e = &c.expected;
        match e.variant {
            Variant::Bad => assert!(!e.sites.is_empty() && e.sites.iter().all(|s| s.should_flag), "{}", e.id),
            Variant::Good => assert!(e.sites.iter().all(|s| !s.should_flag), "{}", e.id),
        }
    }
}

#[test]
fn mislabeled_cases_are_rejected() {
    let clean = vec![("main".to_string(), "fn main() {\n  let v = extern_input();\n}\n".to_string())];
    let r = admit(843, "x", "t", "01", Variant::Bad, Universe::Sample, clean);
    assert!(matches!(r, Err(corpus::Rejection::NoDefect(_))));
    let dirty = vec![("main".to_string(), "fn main() {\n  let n = as_int(extern_input());\n}\n".to_string())];
    let r = admit(843, "x", "t", "01", Variant::Good, Universe::Sample, dirty);
    assert!(matches!(r, Err(corpus::Rejection::Defect(_, 1))));
}

#[test]
fn committed_corpus_matches_generator() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path(), &generate().0).unwrap();
    let fresh = common::snapshot_tree(dir.path());
    let committed = common::snapshot_tree(&common::corpus_dir());
    assert_eq!(fresh.keys().collect::<Vec<_>>(), committed.keys().collect::<Vec<_>>());
    assert!(fresh == committed, "corpus drifted; run `cargo run --example corpus`");
}

fn one_case(cwe: u16, variant: Variant, src: &str) -> LoadedCase {
    let c = admit(cwe, variant.as_str(), "t", "01", variant, Universe::Sample, vec![("main".into(), src.into())]).unwrap();
    LoadedCase::from_case(&c)
}

#[test]
fn one_detected_one_clean() {
    let bad = "class C {\n  x: i32;\n  C() {}\n  fn get() -> i32 { return x; }\n}\nfn main() {\n  let n = new C().get();\n}\n";
    let good = bad.replace("C() {}", "C() { x = 1; }");
    let r = run_cases(&[one_case(457, Variant::Bad, bad), one_case(457, Variant::Good, &good)], &RunOptions::default());
    let c = &r.per_cwe["CWE457"];
    assert_eq!(c.counts, Counts { tp: 1, fn_: 0, fp: 0, tn: 1 });
    assert_eq!((c.tpr, c.fpr), (1.0, 0.0));
}

#[test]
fn failing_case_counts_as_miss() {
    let bad = one_case(843, Variant::Bad, "fn main() {\n  let n = as_int(extern_input());\n}\n");
    let good = one_case(843, Variant::Good, "fn main() {\n  let v = extern_input();\n}\n");
    let broken = |mut c: LoadedCase| {
        c.project = Err("unreadable".into());
        c
    };
    let r = run_cases(&[broken(bad), broken(good)], &RunOptions::default());
    assert_eq!(r.per_cwe["CWE843"].counts, Counts { tp: 0, fn_: 1, fp: 0, tn: 1 });
    assert!(r.cases.iter().all(|c| c.error.as_deref() == Some("unreadable")));
}

#[test]
fn corpus_results_match_golden() {
    let r = run_corpus(&common::corpus_dir(), &RunOptions::default()).unwrap();
    assert_eq!(r.cases.len(), case_dirs(&common::corpus_dir()).unwrap().len());
    for (cwe, v) in &r.per_cwe {
        assert_eq!(v.counts.fn_, 0, "{cwe}: oracle-observed defect missed");
        assert!((0.0..=1.0).contains(&v.tpr) && (0.0..=1.0).contains(&v.fpr));
    }
    // tag-guarded good cases raise nothing
    assert_eq!(r.per_cwe["CWE843"].counts.fp, 0);
    let out = tempfile::tempdir().unwrap();
    write_results(out.path(), &r).unwrap();
    let files = common::snapshot(out.path());
    assert!(files.contains_key("timing.json"));
    common::assert_golden("bench-results.json", std::str::from_utf8(&files["bench-results.json"]).unwrap());
    common::assert_golden("bench-results.txt", std::str::from_utf8(&files["bench-results.txt"]).unwrap());
}

#[test]
fn corpus_programs_survive_pretty_printing() {
    use miniobj_analyzer::frontend::{parse_unit, pretty::print_unit};
    let mut units = 0;
    for c in generate().0 {
        for (name, text) in &c.units {
            let u = parse_unit(text, name).unwrap();
            let printed = print_unit(&u);
            let v = parse_unit(&printed, name).unwrap_or_else(|d| panic!("{d:?}\n{printed}"));
            assert_eq!(u.decls, v.decls, "{}/{name}:\n{printed}", c.id());
            units += 1;
        }
    }
    assert!(units >= 288);
}
