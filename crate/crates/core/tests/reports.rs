mod common;

use miniobj_analyzer::checkers::{registry, CheckerFinding, ALL_IDS};
use miniobj_analyzer::engine::{analyze_unit, EngineConfig};
use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::ast::SrcLoc;
use miniobj_analyzer::frontend::load_program;
use miniobj_analyzer::ir::{link, lower_unit, IrProgram};
use miniobj_analyzer::reports::*;
use miniobj_analyzer::wpa::{Verdict, WpReport, WpStats};
use sha2::{Digest, Sha256};

fn listing_finding() -> (CheckerFinding, EngineMeta, String) {
    let prog = load_program(&fixtures::running_example()).unwrap();
    let unit = prog.unit("foo").unwrap();
    let a = analyze_unit(unit, &prog.index, &EngineConfig::default(), &registry(&ALL_IDS).unwrap());
    assert_eq!(a.findings.len(), 1);
    let f = a.findings[0].clone();
    let meta = EngineMeta::from(&a.summaries[&f.function]);
    (f, meta, unit.source.clone())
}

fn program(sources: &[(&str, &str)]) -> IrProgram {
    let prog = load_program(sources).unwrap();
    let mods: Vec<_> = prog.units.iter().map(|u| lower_unit(u, &prog.index)).collect();
    link(&mods, &["main".into()]).unwrap()
}

#[test]
fn listing_candidate() {
    let (f, meta, src) = listing_finding();
    let r = emit_candidate(&f, meta, &src);
    assert_eq!(r.local_path, "foo::x->foo::isZero");
    assert_eq!(r.loc, SrcLoc { file: "foo.mo".into(), line: 13, col: 7 });
    assert_eq!(r.cwe, "CWE457");
    assert_eq!(r.decl, DeclRef::Member { class: "foo".into(), member: "x".into() });
    assert_eq!(r.snippet, "  if(!x)");
    assert!(!r.engine_meta.truncated);
    assert!(r.engine_meta.paths_explored >= 2);
    let text = r.render_text();
    assert!(text.contains("foo.mo:13:7: warning: Potentially uninitialized object field\n  if(!x)\n      ^\n"));
    assert!(text.contains("Local Path to Bug: foo::x->foo::isZero\n"));
    assert!(text.ends_with("1 warning generated.\n") && !text.ends_with("\n\n"));
    let json = to_json(&r);
    assert!(json.ends_with("}\n"));
}

#[test]
fn id_is_deterministic_and_recomputable() {
    let (f, meta, src) = listing_finding();
    let a = emit_candidate(&f, meta.clone(), &src);
    let b = emit_candidate(&f, meta, &src);
    assert_eq!(a.id, b.id);
    assert_eq!(a.id.len(), 8);
    assert!(a.id.chars().all(|c| c.is_ascii_hexdigit() && !c.is_ascii_uppercase()));
    assert_eq!(a.recompute_id(), a.id);
}

/// Independent digest of the id inputs.
fn reference_id(cwe: &str, decl: &str, path: &str, file: &str, line: u32, col: u32) -> String {
    let d = Sha256::digest(format!("{cwe}\n{decl}\n{path}\n{file}:{line}:{col}"));
    d.iter().take(4).map(|b| format!("{b:02x}")).collect()
}

#[test]
fn ids_differ_by_line() {
    let (f, meta, src) = listing_finding();
    let mut g = f.clone();
    g.loc.line += 1;
    let a = emit_candidate(&f, meta.clone(), &src);
    let b = emit_candidate(&g, meta, &src);
    assert_eq!(a.id, reference_id("CWE457", "foo::x", "foo::x->foo::isZero", "foo.mo", 13, 7));
    assert_eq!(b.id, reference_id("CWE457", "foo::x", "foo::x->foo::isZero", "foo.mo", 14, 7));
    assert_ne!(a.id, b.id);
}

#[test]
fn parse_round_trip() {
    let (f, meta, src) = listing_finding();
    let r = emit_candidate(&f, meta, &src);
    let q = parse_candidate(&to_json(&r), &program(&fixtures::running_example())).unwrap();
    assert_eq!(q.field, "foo::x");
    assert_eq!(q.anchor_function, "foo::isZero");
    assert_eq!(q.anchor_loc, r.loc);
    assert_eq!(q.report_id, r.id);
    assert_eq!(read_candidate(&to_json(&r)).unwrap(), r);
}

#[test]
fn stale_and_malformed() {
    let (f, meta, src) = listing_finding();
    let json = to_json(&emit_candidate(&f, meta, &src));
    let renamed = fixtures::RUNNING_FOO.replace("isZero", "isNil");
    let main = fixtures::RUNNING_MAIN.replace("isZero", "isNil");
    let p = program(&[("foo", &renamed), ("main", &main)]);
    let e = parse_candidate(&json, &p).unwrap_err();
    assert!(matches!(e, ReportError::Stale(_)));
    assert!(e.to_string().starts_with("stale report"));

    let moved = fixtures::RUNNING_FOO.replace("class foo {\n  x: i32;", "class foo {\n  y: i32;\n  x: i32;");
    let shifted = program(&[("foo", &moved.replace("x: i32;\n\n  foo", "x: i32;\n  foo")), ("main", fixtures::RUNNING_MAIN)]);
    assert!(parse_candidate(&json, &shifted).is_ok());

    let no_field = fixtures::RUNNING_FOO.replace("x: i32;", "z: i32;").replace("!x", "!z");
    let e = parse_candidate(&json, &program(&[("foo", &no_field), ("main", fixtures::RUNNING_MAIN)])).unwrap_err();
    assert!(matches!(e, ReportError::Stale(_)));

    assert!(matches!(parse_candidate("{", &p), Err(ReportError::Malformed(_))));
    let tampered = json.replace("\"line\": 13", "\"line\": 12");
    assert!(matches!(read_candidate(&tampered), Err(ReportError::Malformed(_))));
}

#[test]
fn caret_follows_tabs() {
    let f = CheckerFinding {
        cwe: 843,
        decl: "as_int(v)".into(),
        loc: SrcLoc { file: "t.mo".into(), line: 2, col: 11 },
        local_path: "as_int(v)->f".into(),
        message: "m".into(),
        function: "f".into(),
    };
    let r = emit_candidate(&f, EngineMeta::default(), "fn f() {\n\tlet a = as_int(v);\n}\n");
    assert_eq!(r.decl, DeclRef::Expr { text: "as_int(v)".into() });
    assert!(r.render_text().contains("\tlet a = as_int(v);\n\t         ^\n"));
}

#[test]
fn wp_text_lists_callee_first() {
    let r = WpReport {
        report_id: "0123abcd".into(),
        field: "foo::x".into(),
        anchor_function: "foo::isZero".into(),
        verdict: Verdict::Confirmed,
        chains: vec![vec!["main".into(), "b".into(), "foo::isZero".into()]],
        stats: WpStats::default(),
    };
    let t = render_wp_text(&r, &["main".into()]);
    assert!(t.contains("Candidate callchain is:\n\nfoo::isZero()\nb()\nmain\n-----------------------\n"));
    assert!(t.starts_with("---------- report-0123abcd ---------\n"));
    assert!(t.ends_with("Verdict: confirmed\n"));
    let fp = WpReport { verdict: Verdict::FalsePositive, chains: vec![], ..r };
    let t = render_wp_text(&fp, &["main".into()]);
    assert!(t.contains("All loads have a matching store\n") && !t.contains("callchain"));
}

mod round_trip {
    use super::*;
    use proptest::prelude::*;

    fn ident() -> impl Strategy<Value = String> {
        "[a-zA-Z_][a-zA-Z0-9_]{0,12}"
    }

    proptest! {
        #[test]
        fn candidate_json_round_trips(
            class in ident(),
            member in ident(),
            method in ident(),
            file in "[a-z]{1,8}\\.mo",
            line in 1u32..100_000,
            col in 1u32..500,
            paths in 0u64..1_000_000,
            truncated in any::<bool>(),
            snippet in "[ -~\t]{0,60}",
        ) {
            let f = CheckerFinding {
                cwe: 457,
                decl: format!("{class}::{member}"),
                loc: SrcLoc { file, line, col },
                local_path: format!("{class}::{member}->{class}::{method}"),
                message: "Potentially uninitialized object field".into(),
                function: format!("{class}::{method}"),
            };
            let mut source = "\n".repeat(line as usize - 1);
            source.push_str(&snippet);
            let r = emit_candidate(&f, EngineMeta { truncated, paths_explored: paths }, &source);
            prop_assert_eq!(r.snippet.as_str(), snippet.trim_end());
            prop_assert_eq!(r.recompute_id(), r.id.clone());
            let back = read_candidate(&to_json(&r)).unwrap();
            prop_assert_eq!(&back, &r);
            prop_assert_eq!(back.decl, DeclRef::Member { class, member });
        }
    }
}
