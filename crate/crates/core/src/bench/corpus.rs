//! Labeled bad/good cases per CWE, built from flaw templates crossed with
//! control-flow variants. A case is admitted only once the oracle confirms
//! its label.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::oracle::{oracle_interpret, OracleConfig, Universe};
use crate::frontend::ast::SrcLoc;
use crate::frontend::{load_program, ProgramAst};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Bad,
    Good,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Bad => "bad",
            Variant::Good => "good",
        }
    }
}

/// Source lines `[start_line, end_line]` of one function.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Extent {
    pub file: String,
    pub start_line: u32,
    pub end_line: u32,
}

impl Extent {
    pub fn contains(&self, loc: &SrcLoc) -> bool {
        loc.file == self.file && self.start_line <= loc.line && loc.line <= self.end_line
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpectedSite {
    pub function: String,
    pub loc: SrcLoc,
    pub extent: Extent,
    pub should_flag: bool,
}

/// Contents of `expected.json`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub id: String,
    pub cwe: u16,
    pub variant: Variant,
    pub template: String,
    pub flow: String,
    pub universe: Universe,
    pub sites: Vec<ExpectedSite>,
    /// Input valuations the oracle executed.
    pub executions: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusCase {
    pub expected: Expected,
    /// `(unit name, source)`; unit `n` is stored as `n.mo`.
    pub units: Vec<(String, String)>,
}

impl CorpusCase {
    pub fn id(&self) -> &str {
        &self.expected.id
    }

    pub fn cwe(&self) -> u16 {
        self.expected.cwe
    }

    pub fn variant(&self) -> Variant {
        self.expected.variant
    }

    pub fn manifest_json(&self) -> serde_json::Value {
        let units: Vec<String> = self.units.iter().map(|(n, _)| format!("{n}.mo")).collect();
        serde_json::json!({ "units": units, "checkers": [format!("cwe{}", self.cwe())], "out": "out" })
    }

    pub fn sources(&self) -> Vec<(&str, &str)> {
        self.units.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum Rejection {
    #[error("{0}: does not compile: {1}")]
    Compile(String, String),
    #[error("{0}: oracle budget exhausted")]
    Partial(String),
    #[error("{0}: bad case without an oracle-observed defect")]
    NoDefect(String),
    #[error("{0}: good case with {1} oracle-observed defect(s)")]
    Defect(String, usize),
}

/// One control-flow wrapper around the flaw statements.
pub struct Flow {
    pub id: &'static str,
    /// Top-level declarations the wrapper needs.
    preamble: &'static str,
    open: &'static [&'static str],
    close: &'static [&'static str],
}

pub const FLOWS: [Flow; 9] = [
    Flow { id: "01", preamble: "", open: &[], close: &[] },
    Flow { id: "02", preamble: "", open: &["if (true) {"], close: &["}"] },
    Flow { id: "03", preamble: "", open: &["if (5 == 5) {"], close: &["}"] },
    Flow { id: "04", preamble: "global g_true: bool = true;\n", open: &["if (g_true) {"], close: &["}"] },
    Flow { id: "05", preamble: "global g_five: i32 = 5;\n", open: &["if (g_five == 5) {"], close: &["}"] },
    Flow { id: "06", preamble: "", open: &["let once = 0;", "while (once < 1) {"], close: &["  once = once + 1;", "}"] },
    Flow {
        id: "07",
        preamble: "fn static_true() -> bool {\n  return true;\n}\n",
        open: &["if (static_true()) {"],
        close: &["}"],
    },
    Flow { id: "08", preamble: "", open: &["let coin = extern_input();", "if (tag_of(coin) == Bool) {"], close: &["}"] },
    Flow { id: "09", preamble: "", open: &["if (true) {", "  if (5 > 3) {"], close: &["  }", "}"] },
];

impl Flow {
    /// The flaw lines wrapped by this flow, each indented by `indent`.
    fn wrap(&self, flaw: &[&str], indent: usize) -> String {
        let pad = " ".repeat(indent);
        let inner = if self.open.is_empty() { 0 } else { 2 * self.open.iter().filter(|l| l.ends_with('{')).count() };
        let inner_pad = " ".repeat(inner);
        let mut out = String::new();
        for l in self.open {
            out.push_str(&format!("{pad}{l}\n"));
        }
        for l in flaw {
            out.push_str(&format!("{pad}{inner_pad}{l}\n"));
        }
        for l in self.close {
            out.push_str(&format!("{pad}{l}\n"));
        }
        out
    }

    fn preamble(&self) -> String {
        if self.preamble.is_empty() {
            String::new()
        } else {
            format!("{}\n", self.preamble)
        }
    }
}

/// Flaw lines of a free-function template, placed in `run()`.
struct FnTemplate {
    cwe: u16,
    name: &'static str,
    universe: Universe,
    decls: &'static str,
    bad: &'static [&'static str],
    good: &'static [&'static str],
}

const FN_TEMPLATES: [FnTemplate; 11] = [
    FnTemplate {
        cwe: 843,
        name: "unguarded-int",
        universe: Universe::Sample,
        decls: "",
        bad: &["let v = extern_input();", "let n = as_int(v);"],
        good: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let n = as_int(v);", "}"],
    },
    FnTemplate {
        cwe: 843,
        name: "wrong-guard",
        universe: Universe::Sample,
        decls: "",
        bad: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let b = as_bool(v);", "}"],
        good: &["let v = extern_input();", "if (tag_of(v) == Bool) {", "  let b = as_bool(v);", "}"],
    },
    FnTemplate {
        cwe: 843,
        name: "negated-guard",
        universe: Universe::Sample,
        decls: "",
        bad: &["let v = extern_input();", "if (tag_of(v) != Bool) {", "  let n = as_int(v);", "}"],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) != Bool) {",
            "  if (tag_of(v) != Ref) {",
            "    let n = as_int(v);",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 843,
        name: "downcast",
        universe: Universe::Sample,
        decls: "class Shape {\n  Shape() {}\n}\n\nclass Circle : Shape {\n  Circle() {}\n}\n",
        bad: &["let s: Shape = new Shape();", "let c = downcast<Circle>(s);"],
        good: &["let s: Shape = new Shape();", "if (is<Circle>(s)) {", "  let c = downcast<Circle>(s);", "}"],
    },
    FnTemplate {
        cwe: 195,
        name: "cast-u32",
        universe: Universe::Sample,
        decls: "",
        bad: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let i = as_int(v);", "  let u: u32 = cast<u32>(i);", "}"],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let i = as_int(v);",
            "  if (i >= 0) {",
            "    let u: u32 = cast<u32>(i);",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 195,
        name: "argument-u32",
        universe: Universe::Sample,
        decls: "fn take(u: u32) {}\n",
        bad: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let i = as_int(v);", "  take(cast<u32>(i));", "}"],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let i = as_int(v);",
            "  if (i > 0) {",
            "    take(cast<u32>(i));",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 195,
        name: "cast-u8",
        universe: Universe::I8,
        decls: "",
        bad: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let s = as_int8(v);", "  let b: u8 = cast<u8>(s);", "}"],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  if (s >= 0) {",
            "    let b: u8 = cast<u8>(s);",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 195,
        name: "negative-constant",
        universe: Universe::Sample,
        decls: "",
        bad: &["let i = 0 - 5;", "let u: u32 = cast<u32>(i);"],
        good: &["let i = 5 - 0;", "let u: u32 = cast<u32>(i);"],
    },
    FnTemplate {
        cwe: 194,
        name: "read-buf",
        universe: Universe::I8,
        decls: "",
        bad: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  let n: i32 = s;",
            "  let b = alloc(4);",
            "  read_buf(b, n);",
            "}",
        ],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  if (s > 0) {",
            "    let n: i32 = s;",
            "    let b = alloc(4);",
            "    read_buf(b, n);",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 194,
        name: "alloc-direct",
        universe: Universe::I8,
        decls: "",
        bad: &["let v = extern_input();", "if (tag_of(v) == Int) {", "  let s = as_int8(v);", "  let b = alloc(s);", "}"],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  if (s >= 0) {",
            "    let b = alloc(s);",
            "  }",
            "}",
        ],
    },
    FnTemplate {
        cwe: 194,
        name: "copy-chain",
        universe: Universe::I8,
        decls: "",
        bad: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  let t: i8 = s;",
            "  let n: i32 = t;",
            "  let b = alloc(n);",
            "}",
        ],
        good: &[
            "let v = extern_input();",
            "if (tag_of(v) == Int) {",
            "  let s = as_int8(v);",
            "  let t: i8 = s;",
            "  if (t > 0) {",
            "    let n: i32 = t;",
            "    let b = alloc(n);",
            "  }",
            "}",
        ],
    },
];

impl FnTemplate {
    fn units(&self, variant: Variant, flow: &Flow) -> Vec<(String, String)> {
        let flaw = match variant {
            Variant::Bad => self.bad,
            Variant::Good => self.good,
        };
        let decls = if self.decls.is_empty() { String::new() } else { format!("{}\n", self.decls) };
        let text = format!(
            "{decls}{}fn run() {{\n{}}}\n\nfn main() {{\n  run();\n}}\n",
            flow.preamble(),
            flow.wrap(flaw, 2)
        );
        vec![("main".into(), text)]
    }
}

/// Field-read templates: the read `r = <field>;` sits in `get()`.
#[derive(Clone, Copy)]
enum ObjTemplate {
    /// Constructor leaves the field unset.
    CtorEmpty,
    /// Field declared in a base class whose constructor leaves it unset.
    BaseCtor,
    /// Class in its own unit; the good constructor calls a non-virtual init.
    SplitUnit,
    /// A setter exists; only the good `main` calls it before reading.
    Setter,
    /// Constructor calls a virtual reset that stores another field (bad) or
    /// the read field (good).
    VirtualReset,
}

const OBJ_TEMPLATES: [ObjTemplate; 5] =
    [ObjTemplate::CtorEmpty, ObjTemplate::BaseCtor, ObjTemplate::SplitUnit, ObjTemplate::Setter, ObjTemplate::VirtualReset];

fn getter(field: &str, flow: &Flow) -> String {
    format!("  fn get() -> i32 {{\n    let r = 0;\n{}    return r;\n  }}\n", flow.wrap(&[&format!("r = {field};")], 4))
}

impl ObjTemplate {
    fn name(self) -> &'static str {
        match self {
            ObjTemplate::CtorEmpty => "ctor-empty",
            ObjTemplate::BaseCtor => "base-ctor",
            ObjTemplate::SplitUnit => "split-unit",
            ObjTemplate::Setter => "setter",
            ObjTemplate::VirtualReset => "virtual-reset",
        }
    }

    fn units(self, variant: Variant, flow: &Flow) -> Vec<(String, String)> {
        let good = variant == Variant::Good;
        let pre = flow.preamble();
        let main = |class: &str, extra: &str| {
            format!("fn main() {{\n  let o = new {class}();\n{extra}  let n = o.get();\n}}\n")
        };
        match self {
            ObjTemplate::CtorEmpty => {
                let ctor = if good { "Counter() {\n    count = 0;\n  }" } else { "Counter() {}" };
                let text = format!(
                    "{pre}class Counter {{\n  count: i32;\n\n  {ctor}\n\n{}}}\n\n{}",
                    getter("count", flow),
                    main("Counter", "")
                );
                vec![("main".into(), text)]
            }
            ObjTemplate::BaseCtor => {
                let ctor = if good { "Base() {\n    level = 7;\n  }" } else { "Base() {}" };
                let text = format!(
                    "{pre}class Base {{\n  level: i32;\n\n  {ctor}\n}}\n\nclass Derived : Base {{\n  Derived() {{}}\n\n{}}}\n\n{}",
                    getter("level", flow),
                    main("Derived", "")
                );
                vec![("main".into(), text)]
            }
            ObjTemplate::SplitUnit => {
                let ctor = if good { "Gauge() {\n    this.init();\n  }" } else { "Gauge() {}" };
                let class = format!(
                    "{pre}class Gauge {{\n  reading: i32;\n\n  {ctor}\n\n  fn init() {{\n    reading = 1;\n  }}\n\n{}}}\n",
                    getter("reading", flow)
                );
                vec![("gauge".into(), class), ("main".into(), format!("import gauge;\n\n{}", main("Gauge", "")))]
            }
            ObjTemplate::Setter => {
                let extra = if good { "  o.deposit(3);\n" } else { "" };
                let text = format!(
                    "{pre}class Account {{\n  balance: i32;\n\n  Account() {{}}\n\n  fn deposit(v: i32) {{\n    balance = v;\n  }}\n\n{}}}\n\n{}",
                    getter("balance", flow),
                    main("Account", extra)
                );
                vec![("main".into(), text)]
            }
            ObjTemplate::VirtualReset => {
                let store = if good { "value" } else { "mode" };
                let text = format!(
                    "{pre}class Sensor {{\n  value: i32;\n  mode: i32;\n\n  Sensor() {{\n    this.reset();\n  }}\n\n{}\n  virtual fn reset() {{\n    {store} = 0;\n  }}\n}}\n\n{}",
                    getter("value", flow),
                    main("Sensor", "")
                );
                vec![("main".into(), text)]
            }
        }
    }
}

/// Every generated case with its label checked by the oracle, sorted by
/// CWE then id.
pub fn generate() -> (Vec<CorpusCase>, Vec<Rejection>) {
    let mut raw = Vec::new();
    for t in OBJ_TEMPLATES {
        for flow in &FLOWS {
            for v in [Variant::Bad, Variant::Good] {
                raw.push((457, t.name(), flow.id, v, Universe::Sample, t.units(v, flow)));
            }
        }
    }
    for t in &FN_TEMPLATES {
        for flow in &FLOWS {
            for v in [Variant::Bad, Variant::Good] {
                raw.push((t.cwe, t.name, flow.id, v, t.universe, t.units(v, flow)));
            }
        }
    }
    let mut cases = Vec::new();
    let mut rejected = Vec::new();
    for (cwe, template, flow, variant, universe, units) in raw {
        let id = format!("{template}-{flow}-{}", variant.as_str());
        match admit(cwe, &id, template, flow, variant, universe, units) {
            Ok(c) => cases.push(c),
            Err(r) => rejected.push(r),
        }
    }
    cases.sort_by(|a, b| (a.cwe(), a.id()).cmp(&(b.cwe(), b.id())));
    (cases, rejected)
}

fn extent(program: &ProgramAst, function: &str) -> Option<Extent> {
    program.units.iter().find_map(|u| {
        u.functions().into_iter().find(|f| f.decl_id() == function).map(|f| {
            let start = u.src_loc(f.id);
            let end = u.src_loc(f.body.close);
            Extent { file: start.file, start_line: start.line, end_line: end.line }
        })
    })
}

/// Run the oracle over a candidate case and derive its expected sites.
pub fn admit(
    cwe: u16,
    id: &str,
    template: &str,
    flow: &str,
    variant: Variant,
    universe: Universe,
    units: Vec<(String, String)>,
) -> Result<CorpusCase, Rejection> {
    let tag = format!("cwe{cwe}/{id}");
    let sources: Vec<(&str, &str)> = units.iter().map(|(n, t)| (n.as_str(), t.as_str())).collect();
    let program = load_program(&sources).map_err(|d| Rejection::Compile(tag.clone(), format!("{d:?}")))?;
    let cfg = OracleConfig { universe, ..OracleConfig::default() };
    let facts = oracle_interpret(&program, &["main".into()], &cfg);
    if facts.partial {
        return Err(Rejection::Partial(tag));
    }
    let sites = facts.sites(cwe);
    match variant {
        Variant::Bad if sites.is_empty() => return Err(Rejection::NoDefect(tag)),
        Variant::Good if !sites.is_empty() => return Err(Rejection::Defect(tag, sites.len())),
        _ => {}
    }
    let sites = sites
        .into_iter()
        .map(|s| ExpectedSite {
            extent: extent(&program, &s.function).expect("defect inside a declared function"),
            function: s.function,
            loc: s.loc,
            should_flag: true,
        })
        .collect();
    Ok(CorpusCase {
        expected: Expected {
            id: id.to_string(),
            cwe,
            variant,
            template: template.to_string(),
            flow: flow.to_string(),
            universe,
            sites,
            executions: facts.executions,
        },
        units,
    })
}

/// Case directory relative to the corpus root.
pub fn case_dir(root: &Path, cwe: u16, id: &str) -> std::path::PathBuf {
    root.join(format!("cwe{cwe}")).join(id)
}

/// Write `<root>/cwe<N>/<id>/{manifest.json, *.mo, expected.json}`.
pub fn write_corpus(root: &Path, cases: &[CorpusCase]) -> std::io::Result<()> {
    for c in cases {
        let dir = case_dir(root, c.cwe(), c.id());
        std::fs::create_dir_all(&dir)?;
        for (n, t) in &c.units {
            std::fs::write(dir.join(format!("{n}.mo")), t)?;
        }
        let mut m = serde_json::to_string_pretty(&c.manifest_json()).expect("json");
        m.push('\n');
        std::fs::write(dir.join("manifest.json"), m)?;
        let mut e = serde_json::to_string_pretty(&c.expected).expect("json");
        e.push('\n');
        std::fs::write(dir.join("expected.json"), e)?;
    }
    Ok(())
}

/// Case directories under `root`, sorted.
pub fn case_dirs(root: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut out = Vec::new();
    for cwe in std::fs::read_dir(root)? {
        let cwe = cwe?.path();
        if !cwe.is_dir() {
            continue;
        }
        for case in std::fs::read_dir(&cwe)? {
            let case = case?.path();
            if case.join("expected.json").is_file() {
                out.push(case);
            }
        }
    }
    out.sort();
    Ok(out)
}
