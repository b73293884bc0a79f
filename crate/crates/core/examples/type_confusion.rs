//! Tagged-input accesses without a matching tag check, and downcasts
//! without a type test.
//!
//! ```text
//! cargo run --example type_confusion
//! ```

use miniobj_analyzer::driver::{analyze, Project, RunOptions};

const SRC: &str = "\
class Base {}
class Derived : Base {
  n: i32;
  Derived() { n = 1; }
}

fn wrong_guard() -> i32 {
  let v = extern_input();
  if (tag_of(v) == Bool) {
    return as_int(v);
  }
  return 0;
}

fn guarded() -> i32 {
  let v = extern_input();
  if (tag_of(v) == Int) {
    return as_int(v);
  }
  return 0;
}

fn narrow(b: Base) -> i32 {
  let d = downcast<Derived>(b);
  return d.n;
}

fn main() -> i32 {
  let b = new Base();
  return wrong_guard() + guarded() + narrow(b);
}
";

fn main() -> anyhow::Result<()> {
    let mut p = Project::from_sources(&[("main", SRC)]);
    p.manifest.checkers = vec!["cwe843".into()];
    let out = analyze(&p, &RunOptions::default())?;
    for r in &out.stage1.reports {
        print!("{}", r.render_text());
    }
    println!("{} report(s)", out.stage1.reports.len());
    Ok(())
}
