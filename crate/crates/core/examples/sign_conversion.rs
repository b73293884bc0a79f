//! Signed values reaching unsigned conversions and size arguments.
//!
//! ```text
//! cargo run --example sign_conversion
//! ```

use miniobj_analyzer::driver::{analyze, Project, RunOptions};

const SRC: &str = "\
fn to_unsigned() {
  let v = extern_input();
  if (tag_of(v) == Int) {
    let i = as_int(v);
    let u: u32 = cast<u32>(i);
  }
}

fn checked() {
  let v = extern_input();
  if (tag_of(v) == Int) {
    let i = as_int(v);
    if (i >= 0) {
      let u: u32 = cast<u32>(i);
    }
  }
}

fn sized() {
  let v = extern_input();
  if (tag_of(v) == Int) {
    let s = as_int8(v);
    let b = alloc(s);
  }
}

fn main() {
  to_unsigned();
  checked();
  sized();
}
";

fn main() -> anyhow::Result<()> {
    let mut p = Project::from_sources(&[("main", SRC)]);
    p.manifest.checkers = vec!["cwe195".into(), "cwe194".into()];
    let out = analyze(&p, &RunOptions::default())?;
    for r in &out.stage1.reports {
        print!("{}", r.render_text());
    }
    println!("{} report(s)", out.stage1.reports.len());
    Ok(())
}
