//! Small MiniObj programs shared by the examples, tests and docs.

use std::path::{Path, PathBuf};

/// `foo` never initializes `x`; `isZero` reads it (line 13, column 7).
pub const RUNNING_FOO: &str = "\
// foo.mo
// Class foo declares member x but its constructor
// does not assign it.

class foo {
  x: i32;

  foo() {}

  fn isZero() -> bool {
  // reads x before anything stores to it
  // on a freshly constructed object
  if(!x)
    return true;
  return false;
  }
}
";

/// `foo` whose constructor stores `x` through a virtual call, which the
/// per-unit stage does not follow.
pub const RUNNING_FOO_INIT: &str = "\
// foo.mo
// Same as the running example, except that the
// constructor stores x = 0 through reset().

class foo {
  x: i32;

  foo() { this.reset(); }

  fn isZero() -> bool {
  // reset() is dispatched dynamically, so only
  // the whole-program view sees the store
  if(!x)
    return true;
  return false;
  }

  virtual fn reset() { x = 0; }
}
";

/// Entry unit for both `foo` variants.
pub const RUNNING_MAIN: &str = "\
// main.mo
import foo;

fn main() -> i32 {
  let f = new foo();
  if (f.isZero())
    return 0;
  return 1;
}
";

/// Member initialized only through a reference parameter of a helper.
pub const ALIAS_UNIT: &str = "\
// svc.mo
class svc {
  https: bool;

  svc(scheme: i32) {
    let rc = schemeIsHttps(scheme, this.https);
  }

  fn isHttps() -> bool {
    return https;
  }
}

fn schemeIsHttps(scheme: i32, out: &bool) -> i32 {
  out = scheme == 443;
  return 0;
}
";

pub const ALIAS_MAIN: &str = "\
// main.mo
import svc;

fn main() -> i32 {
  let s = new svc(443);
  if (s.isHttps())
    return 0;
  return 1;
}
";

/// `(unit, source)` pairs of the running example.
pub fn running_example() -> Vec<(&'static str, &'static str)> {
    vec![("foo", RUNNING_FOO), ("main", RUNNING_MAIN)]
}

/// The running example with a constructor that initializes `x`.
pub fn running_example_initialized() -> Vec<(&'static str, &'static str)> {
    vec![("foo", RUNNING_FOO_INIT), ("main", RUNNING_MAIN)]
}

/// The reference-parameter initialization case.
pub fn aliased_store() -> Vec<(&'static str, &'static str)> {
    vec![("svc", ALIAS_UNIT), ("main", ALIAS_MAIN)]
}

/// Write `<unit>.mo` files and a `manifest.json` listing them into `dir`.
/// `extra` is merged into the manifest object. Returns the manifest path.
pub fn write_project(dir: &Path, sources: &[(&str, &str)], extra: serde_json::Value) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for (name, text) in sources {
        std::fs::write(dir.join(format!("{name}.mo")), text)?;
    }
    let mut m = serde_json::json!({
        "units": sources.iter().map(|(n, _)| format!("{n}.mo")).collect::<Vec<_>>(),
        "out": "out",
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    let path = dir.join("manifest.json");
    std::fs::write(&path, crate::reports::to_json(&m))?;
    Ok(path)
}

/// `n` units `u0..u{n-1}` with one class each plus a `main` unit importing
/// them all. Classes `Ci` with `i % 3 == 0` never initialize their field.
pub fn many_units(n: usize) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = (0..n)
        .map(|i| {
            let ctor = if i % 3 == 0 { String::new() } else { format!(" v = {i}; ") };
            let body = format!("class C{i} {{\n  v: i32;\n  C{i}() {{{ctor}}}\n  fn get() -> i32 {{ return v; }}\n}}\n");
            (format!("u{i}"), body)
        })
        .collect();
    let mut main = String::new();
    for i in 0..n {
        main.push_str(&format!("import u{i};\n"));
    }
    main.push_str("fn main() -> i32 {\n  let s = 0;\n");
    for i in 0..n {
        main.push_str(&format!("  let o{i} = new C{i}();\n  s = s + o{i}.get();\n"));
    }
    main.push_str("  return s;\n}\n");
    v.push(("main".into(), main));
    v
}
