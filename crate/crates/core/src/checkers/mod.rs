//! Pluggable checkers fed by engine path events.

mod garbage_read;
mod sign;
mod type_confusion;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

pub use garbage_read::GarbageRead;
pub use sign::{SignConversion, SignExtension};
pub use type_confusion::TypeConfusion;

use crate::engine::domain::{Interval, TagSet};
use crate::engine::summary::FunctionSummary;
use crate::frontend::ast::{Builtin, DeclId, IntTy, NodeId, SrcLoc, Tag, TranslationUnit};
use crate::frontend::index::ProgramIndex;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CheckerFinding {
    pub cwe: u16,
    /// Member DeclID, or the source text of the offending expression.
    pub decl: String,
    pub loc: SrcLoc,
    pub local_path: String,
    pub message: String,
    /// Function whose code contains `loc`.
    pub function: DeclId,
}

impl CheckerFinding {
    /// Ordering used for emission: (file, line, col, cwe).
    pub fn sort_key(&self) -> (&str, u32, u32, u16, &str, &str) {
        (&self.loc.file, self.loc.line, self.loc.col, self.cwe, &self.decl, &self.function)
    }
}

/// Sort by (file, line, col, cwe) and drop duplicates.
pub fn normalize(findings: &mut Vec<CheckerFinding>) {
    findings.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.cmp(b)));
    findings.dedup();
}

/// Path event delivered to checkers, in program order along each path.
#[derive(Debug)]
pub enum Event<'a> {
    /// `as_T(v)` on a `var` value.
    VarAccess { builtin: Builtin, expected: Tag, tags: TagSet, tainted: bool, text: &'a str },
    /// `downcast<C>(p)`; `allowed` is the subclass closure of C.
    Downcast { class: &'a str, possible: &'a BTreeSet<String>, allowed: &'a BTreeSet<String>, text: &'a str },
    /// Integer conversion of `value` from `from` to `to`.
    Conversion { from: IntTy, to: IntTy, value: Interval, text: &'a str },
    /// Argument reaching the size parameter of a sink intrinsic.
    SizeSink { builtin: Builtin, value: Interval, text: &'a str },
}

/// Where an event happened.
pub struct EventSite<'a> {
    pub unit: &'a TranslationUnit,
    /// Function whose body contains the event (an inlined callee included).
    pub function: &'a str,
    pub node: NodeId,
}

impl EventSite<'_> {
    pub fn finding(&self, cwe: u16, decl: &str, message: &str) -> CheckerFinding {
        CheckerFinding {
            cwe,
            decl: decl.to_string(),
            loc: self.unit.src_loc(self.node),
            local_path: format!("{decl}->{}", self.function),
            message: message.to_string(),
            function: self.function.to_string(),
        }
    }
}

/// Everything a checker may consult once a unit has been explored.
pub struct UnitResults<'a> {
    pub unit: &'a TranslationUnit,
    pub index: &'a ProgramIndex,
    pub summaries: &'a BTreeMap<DeclId, FunctionSummary>,
}

pub trait Checker: Send + Sync {
    fn id(&self) -> &'static str;
    fn cwe(&self) -> u16;
    fn on_event(&self, _site: &EventSite<'_>, _event: &Event<'_>) -> Option<CheckerFinding> {
        None
    }
    fn finish(&self, _results: &UnitResults<'_>) -> Vec<CheckerFinding> {
        Vec::new()
    }
}

pub const ALL_IDS: [&str; 4] = ["cwe457", "cwe843", "cwe195", "cwe194"];

pub fn by_id(id: &str) -> Option<Box<dyn Checker>> {
    Some(match id {
        "cwe457" => Box::new(GarbageRead),
        "cwe843" => Box::new(TypeConfusion),
        "cwe195" => Box::new(SignConversion),
        "cwe194" => Box::new(SignExtension),
        _ => return None,
    })
}

/// Instantiate checkers by id, in the canonical order.
pub fn registry<S: AsRef<str>>(ids: &[S]) -> Result<Vec<Box<dyn Checker>>, String> {
    for id in ids {
        if by_id(id.as_ref()).is_none() {
            return Err(format!("unknown checker `{}` (known: {})", id.as_ref(), ALL_IDS.join(", ")));
        }
    }
    Ok(ALL_IDS
        .iter()
        .filter(|k| ids.iter().any(|i| i.as_ref() == **k))
        .map(|k| by_id(k).unwrap())
        .collect())
}
