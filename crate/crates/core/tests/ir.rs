use miniobj_analyzer::fixtures;
use miniobj_analyzer::frontend::ast::*;
use miniobj_analyzer::frontend::{load_program, ProgramAst};
use miniobj_analyzer::ir::*;

fn modules(sources: &[(&str, &str)]) -> (ProgramAst, Vec<IrModule>) {
    let prog = load_program(sources).unwrap_or_else(|d| panic!("{d:?}"));
    let mods = prog.units.iter().map(|u| lower_unit(u, &prog.index)).collect();
    (prog, mods)
}

fn program(sources: &[(&str, &str)]) -> IrProgram {
    link(&modules(sources).1, &["main".to_string()]).unwrap()
}

fn ops(f: &IrFunction) -> Vec<&Op> {
    f.insts().map(|i| &i.op).collect()
}

const INIT_CTOR: &str = "class foo {\n  x: i32;\n  foo() { x = 0; }\n  fn isZero() -> bool {\n    if (!x) { return true; }\n    return false;\n  }\n}\n";

#[test]
fn is_zero_lowering() {
    let p = program(&fixtures::running_example());
    let f = p.function("foo::isZero").unwrap();
    assert_eq!(f.blocks.len(), 3);
    let b0: Vec<&Op> = f.blocks[0].insts.iter().map(|i| &i.op).collect();
    assert_eq!(b0[0], &Op::Load { field: "foo::x".into() });
    assert_eq!(f.blocks[0].insts[0].at, Pos { line: 13, col: 7 });
    assert!(matches!(b0.last(), Some(Op::Br { .. })));
    assert_eq!(f.blocks[1].insts.iter().map(|i| &i.op).collect::<Vec<_>>(), [&Op::Ret]);
    assert_eq!(f.blocks[2].insts.iter().map(|i| &i.op).collect::<Vec<_>>(), [&Op::Ret]);
}

#[test]
fn empty_constructor() {
    let p = program(&fixtures::running_example());
    let f = p.function("foo::foo").unwrap();
    assert_eq!(ops(f), [&Op::Ret]);
}

#[test]
fn constructor_store() {
    let p = program(&[("foo", INIT_CTOR), ("main", fixtures::RUNNING_MAIN)]);
    let f = p.function("foo::foo").unwrap();
    let stores: Vec<_> = ops(f).into_iter().filter(|o| matches!(o, Op::Store { .. })).collect();
    assert_eq!(stores, [&Op::Store { field: "foo::x".into() }]);
}

#[test]
fn link_running_example() {
    let p = program(&fixtures::running_example());
    let ids: Vec<&str> = p.functions.iter().map(|f| f.id.as_str()).collect();
    assert_eq!(ids, ["foo::foo", "foo::isZero", "main"]);
    assert!(p.externals.is_empty());
    let main = p.function("main").unwrap();
    assert!(ops(main).contains(&&Op::New { class: "foo".into() }));
    assert!(ops(main).iter().any(|o| matches!(o, Op::Call { target, .. } if target == "foo::foo")));
}

#[test]
fn single_module_link_is_identity() {
    let (_, mods) = modules(&[("t", "fn main() -> i32 { return 0; }\n")]);
    let p = link(&mods, &["main".to_string()]).unwrap();
    assert_eq!(p.as_module().functions, mods[0].functions);
    assert_eq!(p.as_module().classes, mods[0].classes);
}

#[test]
fn duplicate_main_and_missing_entry() {
    let (_, a) = modules(&[("a", "fn main() -> i32 { return 0; }\n")]);
    let (_, b) = modules(&[("b", "fn main() -> i32 { return 1; }\n")]);
    let err = link(&[a[0].clone(), b[0].clone()], &[]).unwrap_err();
    assert_eq!(err, LinkError::DuplicateSymbol("main".into()));
    let (_, c) = modules(&[("c", "fn helper() {}\n")]);
    assert_eq!(link(&c, &["main".to_string()]).unwrap_err(), LinkError::MissingEntry("main".into()));
}

#[test]
fn vtable_shape_mismatch() {
    let (_, mut m) = modules(&[("t", "class A {\n  virtual fn m() {}\n  virtual fn n() {}\n}\nclass B : A {\n  fn m() {}\n}\n")]);
    assert!(link(&m, &[]).is_ok());
    let b = m[0].classes.iter_mut().find(|c| c.name == "B").unwrap();
    b.vtable.swap(0, 1);
    assert!(matches!(link(&m, &[]), Err(LinkError::VtableMismatch { .. })));
}

#[test]
fn link_is_associative() {
    let srcs = [
        ("a", "class A {\n  v: i32;\n  A() { v = 1; }\n  virtual fn m() -> i32 { return v; }\n}\n"),
        ("b", "import a;\nclass B : A {\n  fn m() -> i32 { return 2; }\n}\n"),
        ("main", "import b;\nfn main() -> i32 {\n  let p: A = new B();\n  return p.m();\n}\n"),
    ];
    let (_, m) = modules(&srcs);
    let flat = link(&m, &[]).unwrap();
    let left = link(&[link(&m[0..2], &[]).unwrap().as_module(), m[2].clone()], &[]).unwrap();
    let right = link(&[m[0].clone(), link(&m[1..3], &[]).unwrap().as_module()], &[]).unwrap();
    let rev: Vec<IrModule> = m.iter().rev().cloned().collect();
    let reversed = link(&rev, &[]).unwrap();
    for other in [&left, &right, &reversed] {
        assert_eq!(to_canonical_json(&flat), to_canonical_json(other));
    }
}

#[test]
fn store_scan_running_example_and_variant() {
    let p = program(&fixtures::running_example());
    assert!(field_store_scan(&p, "foo::x", false).unwrap().is_empty());
    let p = program(&[("foo", INIT_CTOR), ("main", fixtures::RUNNING_MAIN)]);
    let s = field_store_scan(&p, "foo::x", false).unwrap();
    assert_eq!(s.iter().map(|s| (s.function.as_str(), s.loc.line)).collect::<Vec<_>>(), [("foo::foo", 3)]);
    assert_eq!(field_store_scan(&p, "foo::y", false), Err(LinkError::UnknownField("foo::y".into())));
}

#[test]
fn store_scan_reference_alias() {
    let p = program(&fixtures::aliased_store());
    assert!(field_store_scan(&p, "svc::https", false).unwrap().is_empty());
    let s = field_store_scan(&p, "svc::https", true).unwrap();
    let got: Vec<_> = s.iter().map(|s| (s.function.as_str(), s.via.as_deref())).collect();
    assert_eq!(got, [("svc::svc", Some("schemeIsHttps"))]);
}

/// Syntactic member reads and writes, counted on the AST.
fn count_accesses(unit: &TranslationUnit) -> (usize, usize) {
    fn expr(e: &Expr, reads: &mut usize) {
        match &e.kind {
            ExprKind::Name { res: NameRes::Field(_), .. } => *reads += 1,
            ExprKind::Field { object, field, .. } => {
                expr(object, reads);
                if field.is_some() {
                    *reads += 1;
                }
            }
            ExprKind::Call { callee, args, .. } => {
                expr(callee, reads);
                for a in args {
                    expr(a, reads);
                }
            }
            ExprKind::New { args, .. } => args.iter().for_each(|a| expr(a, reads)),
            ExprKind::Unary { operand, .. }
            | ExprKind::Downcast { operand, .. }
            | ExprKind::Cast { operand, .. }
            | ExprKind::Is { operand, .. }
            | ExprKind::Convert { operand, .. } => expr(operand, reads),
            ExprKind::Binary { lhs, rhs, .. } => {
                expr(lhs, reads);
                expr(rhs, reads);
            }
            _ => {}
        }
    }
    fn block(b: &Block, rw: &mut (usize, usize)) {
        for s in &b.stmts {
            match &s.kind {
                StmtKind::Let { init, .. } => expr(init, &mut rw.0),
                StmtKind::Assign { target, value } => {
                    expr(value, &mut rw.0);
                    match &target.kind {
                        ExprKind::Name { res: NameRes::Field(_), .. } => rw.1 += 1,
                        ExprKind::Field { object, .. } => {
                            expr(object, &mut rw.0);
                            rw.1 += 1;
                        }
                        _ => {}
                    }
                }
                StmtKind::If { cond, then_block, else_block } => {
                    expr(cond, &mut rw.0);
                    block(then_block, rw);
                    if let Some(e) = else_block {
                        block(e, rw);
                    }
                }
                StmtKind::While { cond, body } => {
                    expr(cond, &mut rw.0);
                    block(body, rw);
                }
                StmtKind::Return(Some(e)) | StmtKind::Expr(e) => expr(e, &mut rw.0),
                StmtKind::Return(None) => {}
            }
        }
    }
    let mut rw = (0, 0);
    for f in unit.functions() {
        block(&f.body, &mut rw);
    }
    rw
}

#[test]
fn loads_and_stores_match_syntax() {
    let sources = [
        ("c", "class C {\n  a: i32;\n  b: C;\n  C() { a = 1; }\n  fn f(o: C) -> i32 {\n    this.a = a + o.a;\n    o.b.a = this.b.a;\n    while (a < 3) { a = a + 1; }\n    return this.g(o.a);\n  }\n  fn g(k: i32) -> i32 { return k; }\n}\n"),
        ("main", "import c;\nfn main() -> i32 {\n  let c = new C();\n  return c.f(c);\n}\n"),
    ];
    let (prog, mods) = modules(&sources);
    for (u, m) in prog.units.iter().zip(&mods) {
        let (reads, writes) = count_accesses(u);
        let loads = m.functions.iter().flat_map(|f| f.insts()).filter(|i| matches!(i.op, Op::Load { .. })).count();
        let stores = m.functions.iter().flat_map(|f| f.insts()).filter(|i| matches!(i.op, Op::Store { .. })).count();
        assert_eq!((loads, stores), (reads, writes), "unit {}", u.name);
    }
}

#[test]
fn blocks_are_well_formed_and_located() {
    for srcs in [fixtures::running_example(), fixtures::running_example_initialized(), fixtures::aliased_store()] {
        let p = program(&srcs);
        for f in &p.functions {
            for b in &f.blocks {
                let terms: Vec<usize> =
                    b.insts.iter().enumerate().filter(|(_, i)| i.op.is_terminator()).map(|(k, _)| k).collect();
                assert_eq!(terms, [b.insts.len() - 1], "{} block {}", f.id, b.id);
            }
            for i in f.insts() {
                assert!(f.contains(i.at), "{} {:?} outside extent", f.id, i);
                if let Op::Load { field } | Op::Store { field } = &i.op {
                    assert!(p.has_field(field));
                }
            }
        }
    }
}

#[test]
fn canonical_json_round_trip() {
    let (_, mods) = modules(&fixtures::running_example());
    for m in &mods {
        let text = to_canonical_json(m);
        assert!(text.ends_with("}\n"));
        let back: IrModule = from_json(&text).unwrap();
        assert_eq!(&back, m);
        assert_eq!(to_canonical_json(&back), text);
    }
    let p = program(&fixtures::running_example());
    let text = to_canonical_json(&p);
    assert_eq!(from_json::<IrProgram>(&text).unwrap(), p);
}
