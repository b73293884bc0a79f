use miniobj_analyzer::checkers::{registry, CheckerFinding, ALL_IDS};
use miniobj_analyzer::engine::summary::{FunctionSummary, UseEntry};
use miniobj_analyzer::engine::{analyze_unit, EngineConfig, UnitAnalysis};
use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::{load_program, SrcLoc};

fn analyze_with(sources: &[(&str, &str)], unit: &str, cfg: &EngineConfig) -> UnitAnalysis {
    let prog = load_program(sources).unwrap_or_else(|d| panic!("{d:?}"));
    let checkers = registry(&ALL_IDS).unwrap();
    analyze_unit(prog.unit(unit).unwrap(), &prog.index, cfg, &checkers)
}

fn analyze(sources: &[(&str, &str)], unit: &str) -> UnitAnalysis {
    analyze_with(sources, unit, &EngineConfig::default())
}

fn one(src: &str) -> UnitAnalysis {
    analyze(&[("t", src)], "t")
}

fn summary<'a>(a: &'a UnitAnalysis, f: &str) -> &'a FunctionSummary {
    a.summaries.get(f).unwrap_or_else(|| panic!("no summary for {f}"))
}

fn uses(s: &FunctionSummary) -> Vec<(String, u32, u32)> {
    s.use_without_def_set.iter().map(|u| (u.member.clone(), u.loc.line, u.loc.col)).collect()
}

fn defs(s: &FunctionSummary) -> Vec<&str> {
    s.def_set.keys().map(String::as_str).collect()
}

fn cwe(a: &UnitAnalysis, cwe: u16) -> Vec<&CheckerFinding> {
    a.findings.iter().filter(|f| f.cwe == cwe).collect()
}

#[test]
fn running_example_is_zero_summary() {
    let a = analyze(&fixtures::running_example(), "foo");
    let s = summary(&a, "foo::isZero");
    assert!(s.def_set.is_empty());
    let expected = UseEntry {
        member: "foo::x".into(),
        loc: SrcLoc { file: "foo.mo".into(), line: 13, col: 7 },
        local_path: "foo::x->foo::isZero".into(),
    };
    assert_eq!(s.use_without_def_set.iter().cloned().collect::<Vec<_>>(), vec![expected]);
}

#[test]
fn running_example_constructor_summary_is_empty() {
    let a = analyze(&fixtures::running_example(), "foo");
    let s = summary(&a, "foo::foo");
    assert!(s.def_set.is_empty() && s.use_without_def_set.is_empty());
}

#[test]
fn running_example_candidate() {
    let a = analyze(&fixtures::running_example(), "foo");
    let f = cwe(&a, 457);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].local_path, "foo::x->foo::isZero");
    assert_eq!(f[0].message, "Potentially uninitialized object field");
    assert_eq!((f[0].loc.line, f[0].loc.col), (13, 7));
    assert_eq!(a.findings.len(), 1);
}

#[test]
fn virtual_initializer_is_invisible_to_stage_one() {
    let a = analyze(&fixtures::running_example_initialized(), "foo");
    let f = cwe(&a, 457);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].local_path, "foo::x->foo::isZero");
    assert_eq!(defs(summary(&a, "foo::reset")), ["foo::x"]);
}

#[test]
fn constructor_store_suppresses_candidate() {
    let a = one("class foo {\n  x: i32;\n  foo() { x = 0; }\n  fn isZero() -> bool { return x == 0; }\n}\n");
    assert!(cwe(&a, 457).is_empty());
    assert_eq!(defs(summary(&a, "foo::foo")), ["foo::x"]);
}

#[test]
fn def_dominating_use() {
    let a = one(
        "class C {\n  x: i32;\n  fn f() -> i32 {\n    this.x = 1;\n    if (this.x == 1) { return 1; }\n    return 0;\n  }\n}\n",
    );
    let s = summary(&a, "C::f");
    assert_eq!(defs(s), ["C::x"]);
    assert!(s.use_without_def_set.is_empty());
}

#[test]
fn def_on_one_branch_does_not_hide_use_on_the_other() {
    let a = one(
        "class C {\n  x: i32;\n  fn f(b: bool) -> i32 {\n    if (b) { x = 1; }\n    return x;\n  }\n}\n",
    );
    let s = summary(&a, "C::f");
    assert_eq!(defs(s), ["C::x"]);
    assert_eq!(uses(s), [("C::x".to_string(), 5, 12)]);
}

#[test]
fn infeasible_branch_is_pruned() {
    let a = one(
        "class C {\n  x: i32;\n  fn f() -> i32 {\n    let k = 3;\n    if (k > 5) { return x; }\n    return 0;\n  }\n}\n",
    );
    assert!(summary(&a, "C::f").use_without_def_set.is_empty());
}

#[test]
fn partial_initialization_flags_only_missing_member() {
    let a = one(
        "class C {\n  x: i32;\n  y: i32;\n  C() { y = 2; }\n  fn sum() -> i32 { return x + y; }\n}\n",
    );
    let f = cwe(&a, 457);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].decl, "C::x");
}

#[test]
fn only_the_defective_class_is_reported() {
    let a = one(
        "class A {\n  a: i32;\n  A() { a = 1; }\n  fn get() -> i32 { return a; }\n}\nclass B {\n  b: i32;\n  B() {}\n  fn get() -> i32 { return b; }\n}\n",
    );
    let f = cwe(&a, 457);
    assert_eq!(f.iter().map(|f| f.decl.as_str()).collect::<Vec<_>>(), ["B::b"]);
}

#[test]
fn inlined_helper_credits_constructor() {
    let a = one(
        "class C {\n  x: i32;\n  C() { this.init(); }\n  fn init() { x = 5; }\n  fn get() -> i32 { return x; }\n}\n",
    );
    assert!(cwe(&a, 457).is_empty());
    let s = summary(&a, "C::C");
    assert_eq!(s.def_set["C::x"].line, 3);
}

#[test]
fn base_constructor_runs_first() {
    let a = one(
        "class A {\n  x: i32;\n  A() { x = 0; }\n}\nclass B : A {\n  B() {}\n  fn get() -> i32 { return x; }\n}\n",
    );
    assert!(cwe(&a, 457).is_empty());
    assert_eq!(defs(summary(&a, "B::B")), ["A::x"]);
}

#[test]
fn reference_parameter_store_is_not_a_member_def() {
    let a = analyze(&fixtures::aliased_store(), "svc");
    assert!(summary(&a, "svc::svc").def_set.is_empty());
    let f = cwe(&a, 457);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].local_path, "svc::https->svc::isHttps");
}

#[test]
fn loop_summary_reaches_code_after_loop() {
    let src = "class C {\n  x: i32;\n  fn f(n: i32) -> i32 {\n    let i = 0;\n    while (i < n) { i = i + 1; }\n    if (i > 100) { return x; }\n    return 0;\n  }\n}\n";
    for bound in 0..4 {
        let a = analyze_with(&[("t", src)], "t", &EngineConfig { path_budget: 10_000, loop_bound: bound });
        assert_eq!(uses(summary(&a, "C::f")), [("C::x".to_string(), 6, 27)], "bound {bound}");
    }
}

#[test]
fn budget_truncates() {
    let src = "class C {\n  x: i32;\n  fn f(a: bool, b: bool, c: bool) -> i32 {\n    let n = 0;\n    if (a) { n = n + 1; }\n    if (b) { n = n + 1; }\n    if (c) { return x; }\n    return n;\n  }\n}\n";
    let full = analyze_with(&[("t", src)], "t", &EngineConfig { path_budget: 100, loop_bound: 2 });
    let s = summary(&full, "C::f");
    assert_eq!(s.paths_explored, 8);
    assert!(!s.truncated);
    let cut = analyze_with(&[("t", src)], "t", &EngineConfig { path_budget: 1, loop_bound: 2 });
    let s = summary(&cut, "C::f");
    assert_eq!(s.paths_explored, 1);
    assert!(s.truncated);
}

#[test]
fn type_confusion_unguarded_and_guarded() {
    let a = one("fn f() -> i32 {\n  let v = extern_input();\n  return as_int(v);\n}\n");
    assert_eq!(cwe(&a, 843).len(), 1);
    let a = one(
        "fn f() -> i32 {\n  let v = extern_input();\n  if (tag_of(v) == Int) { return as_int(v); }\n  return 0;\n}\n",
    );
    assert!(cwe(&a, 843).is_empty());
    let a = one(
        "fn f() -> i32 {\n  let v = extern_input();\n  if (tag_of(v) != Bool) { return as_int(v); }\n  return 0;\n}\n",
    );
    assert_eq!(cwe(&a, 843).len(), 1);
}

#[test]
fn bad_downcast() {
    let a = one("class A {\n  A() {}\n}\nclass B : A {\n  B() {}\n}\nfn f() {\n  let p: A = new A();\n  let q = downcast<B>(p);\n}\n");
    let f = cwe(&a, 843);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].loc.line, 9);
    let a = one("class A {\n  A() {}\n}\nclass B : A {\n  B() {}\n}\nfn f() {\n  let p: A = new B();\n  let q = downcast<B>(p);\n}\n");
    assert!(cwe(&a, 843).is_empty());
    let a = one("class A {\n  A() {}\n}\nclass B : A {\n  B() {}\n}\nfn f(p: A) {\n  if (is<B>(p)) { let q = downcast<B>(p); }\n}\n");
    assert!(cwe(&a, 843).is_empty());
}

#[test]
fn sign_conversion() {
    let a = one("fn g(u: u32) {}\nfn f() {\n  let i = as_int(extern_input());\n  g(cast<u32>(i));\n}\n");
    assert_eq!(cwe(&a, 195).len(), 1);
    let a = one("fn f() -> u32 {\n  let i = 5;\n  let u: u32 = cast<u32>(i);\n  return u;\n}\n");
    assert!(cwe(&a, 195).is_empty());
    let a = one(
        "fn f(i: i8) -> u8 {\n  if (i >= 0) { return cast<u8>(i); }\n  return 0;\n}\nfn h(i: i8) -> u8 {\n  return cast<u8>(i);\n}\n",
    );
    let f = cwe(&a, 195);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].function, "h");
}

#[test]
fn sign_extension() {
    let a = one("fn f() {\n  let s = as_int8(extern_input());\n  let n: i32 = s;\n  let b = alloc(4);\n  read_buf(b, n);\n}\n");
    assert_eq!(cwe(&a, 194).len(), 1);
    let a = one("fn f() {\n  let s: i8 = 4;\n  let n: i32 = s;\n  let b = alloc(4);\n  read_buf(b, n);\n}\n");
    assert!(cwe(&a, 194).is_empty());
    let line = "  if (s > 0) { let n: i32 = s; read_buf(b, n); } else { let m: i32 = s; read_buf(b, m); }";
    let a = one(&format!("fn f(s: i8) {{\n  let b = alloc(4);\n{line}\n}}\n"));
    let f = cwe(&a, 194);
    assert_eq!(f.len(), 1);
    assert_eq!(f[0].loc.col as usize, line.rfind("read_buf").unwrap() + 1);
}

#[test]
fn findings_are_sorted_and_independent_of_other_checkers() {
    let src = "fn g(u: u32) {}\nfn f() {\n  let v = extern_input();\n  let i = as_int(v);\n  g(cast<u32>(i));\n  let s = as_int8(v);\n  let b = alloc(s);\n}\n";
    let prog = load_program(&[("t", src)]).unwrap();
    let unit = prog.unit("t").unwrap();
    let cfg = EngineConfig::default();
    let all = analyze_unit(unit, &prog.index, &cfg, &registry(&ALL_IDS).unwrap()).findings;
    let mut keys: Vec<_> = all.iter().map(|f| f.sort_key()).collect();
    keys.sort();
    assert_eq!(keys, all.iter().map(|f| f.sort_key()).collect::<Vec<_>>());
    for id in ALL_IDS {
        let alone = analyze_unit(unit, &prog.index, &cfg, &registry(&[id]).unwrap()).findings;
        let c = registry(&[id]).unwrap()[0].cwe();
        let expected: Vec<_> = all.iter().filter(|f| f.cwe == c).cloned().collect();
        assert_eq!(alone, expected, "{id}");
    }
}
