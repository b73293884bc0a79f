//! Call-graph refinement: direct edges, then class-hierarchy targets for
//! virtual calls, then pruning to classes that are actually constructed.
//!
//! ```text
//! cargo run --example devirtualization
//! ```

use miniobj_analyzer::frontend::load_program;
use miniobj_analyzer::ir::{link, lower_unit};
use miniobj_analyzer::wpa::{build_callgraph, devirtualize_cha, CallGraph, ClassHierarchy, WholeProgram, WpaConfig};

const SRC: &str = "\
class Shape {
  virtual fn area() -> i32 { return 0; }
}
class Square : Shape {
  fn area() -> i32 { return 4; }
}
class Circle : Shape {
  fn area() -> i32 { return 3; }
}
fn measure(s: Shape) -> i32 { return s.area(); }
fn main() -> i32 {
  let q = new Square();
  return measure(q);
}
";

fn dump(title: &str, cg: &CallGraph) {
    println!("== {title}");
    for e in &cg.edges {
        println!("  {} -> {}  [{:?}] at {}", e.caller, e.callee, e.kind, e.site);
    }
    for u in &cg.unresolved {
        println!("  unresolved in {} at {}: {}", u.caller, u.site, u.reason);
    }
}

fn main() -> anyhow::Result<()> {
    let ast = load_program(&[("shapes", SRC)]).map_err(|d| anyhow::anyhow!("{d:?}"))?;
    let modules: Vec<_> = ast.units.iter().map(|u| lower_unit(u, &ast.index)).collect();
    let program = link(&modules, &["main".to_string()])?;

    let base = build_callgraph(&program);
    dump("direct calls", &base);
    dump("class hierarchy", &devirtualize_cha(&base, &ClassHierarchy::build(&program)));
    let whole = WholeProgram::new(program, vec!["main".into()], WpaConfig::default());
    dump("constructed classes only", &whole.callgraph);
    Ok(())
}
