//! Typed whole-program IR: per-unit modules lowered from checked ASTs and
//! linked into one program image.

mod link;
mod lower;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{DeclId, SrcLoc};

pub use link::{field_store_scan, link, LinkError, StoreSite};
pub use lower::lower_unit;

/// Line and column of an instruction in its function's file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrModule {
    pub unit: String,
    pub functions: Vec<IrFunction>,
    pub classes: Vec<IrClass>,
    pub globals: Vec<IrGlobal>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrClass {
    pub name: String,
    pub unit: String,
    pub base: Option<String>,
    /// Field DeclIDs in layout order, inherited fields first.
    pub fields: Vec<DeclId>,
    /// Slot name and implementing function, in slot order.
    pub vtable: Vec<(String, DeclId)>,
    /// Explicit constructor, if any.
    pub ctor: Option<DeclId>,
}

/// A global variable. Only function-typed globals carry an initializer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrGlobal {
    pub name: String,
    pub ty: String,
    pub init: Option<FnSrc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrParam {
    pub name: String,
    pub ty: String,
    pub by_ref: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrFunction {
    pub id: DeclId,
    pub unit: String,
    pub file: String,
    pub class: Option<String>,
    pub is_ctor: bool,
    pub params: Vec<IrParam>,
    pub ret: String,
    /// Source extent: the function name through the closing brace.
    pub start: Pos,
    pub end: Pos,
    pub blocks: Vec<IrBlock>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrBlock {
    pub id: u32,
    pub insts: Vec<Inst>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inst {
    #[serde(flatten)]
    pub op: Op,
    pub at: Pos,
}

/// Reference argument `param` bound to the member `field` at a call.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alias {
    pub param: usize,
    pub field: DeclId,
}

/// Where a function value comes from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FnSrc {
    /// `&f`
    Const { target: DeclId },
    /// `cast<T>(&f)`
    Cast { target: DeclId },
    /// A named variable: `global:g` or `local:<function>:<name>`.
    Var { var: String },
    /// Anything else (a parameter, a call result, ...).
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "inst", rename_all = "snake_case")]
pub enum Op {
    Load { field: DeclId },
    Store { field: DeclId },
    /// Write through the by-reference parameter at `param`.
    StoreRef { param: usize },
    Call { target: DeclId, aliases: Vec<Alias> },
    Vcall { slot: String, class: String, aliases: Vec<Alias> },
    Icall { callee: FnSrc },
    Intrinsic { name: String },
    New { class: String },
    /// Assignment of a function value to a named variable.
    SetFn { var: String, value: FnSrc },
    Cast { from: String, to: String },
    Binop { op: String },
    Unop { op: String },
    Br { then: u32, r#else: u32 },
    Jump { target: u32 },
    Ret,
}

impl Op {
    pub fn is_terminator(&self) -> bool {
        matches!(self, Op::Br { .. } | Op::Jump { .. } | Op::Ret)
    }
}

impl IrFunction {
    pub fn insts(&self) -> impl Iterator<Item = &Inst> {
        self.blocks.iter().flat_map(|b| b.insts.iter())
    }

    pub fn src_loc(&self, at: Pos) -> SrcLoc {
        SrcLoc { file: self.file.clone(), line: at.line, col: at.col }
    }

    /// True when `at` lies within the function's extent.
    pub fn contains(&self, at: Pos) -> bool {
        self.start <= at && at <= self.end
    }
}

/// Linked program image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrProgram {
    /// Functions sorted by id.
    pub functions: Vec<IrFunction>,
    /// Classes sorted by name.
    pub classes: Vec<IrClass>,
    pub globals: Vec<IrGlobal>,
    /// Call targets with no body in the program.
    pub externals: BTreeSet<DeclId>,
    pub entries: Vec<DeclId>,
}

impl IrProgram {
    pub fn function(&self, id: &str) -> Option<&IrFunction> {
        self.functions.binary_search_by(|f| f.id.as_str().cmp(id)).ok().map(|i| &self.functions[i])
    }

    pub fn class(&self, name: &str) -> Option<&IrClass> {
        self.classes.binary_search_by(|c| c.name.as_str().cmp(name)).ok().map(|i| &self.classes[i])
    }

    /// Reflexive-transitive subclasses of every class.
    pub fn subclass_closure(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for c in &self.classes {
            let mut cur = Some(c.name.clone());
            let mut seen = BTreeSet::new();
            while let Some(a) = cur {
                if !seen.insert(a.clone()) {
                    break;
                }
                out.entry(a.clone()).or_default().insert(c.name.clone());
                cur = self.class(&a).and_then(|k| k.base.clone());
            }
        }
        out
    }

    /// Declared field DeclIDs.
    pub fn has_field(&self, field: &str) -> bool {
        self.classes.iter().any(|c| c.fields.iter().any(|f| f == field))
    }

    /// The view of the program as a single module, for relinking.
    pub fn as_module(&self) -> IrModule {
        IrModule {
            unit: "program".into(),
            functions: self.functions.clone(),
            classes: self.classes.clone(),
            globals: self.globals.clone(),
        }
    }
}

/// Serialize with sorted object keys, two-space indentation and a trailing
/// newline. Equal values give identical bytes.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("IR serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value serializes");
    s.push('\n');
    s
}

pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> serde_json::Result<T> {
    serde_json::from_str(text)
}
