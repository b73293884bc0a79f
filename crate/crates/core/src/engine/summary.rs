//! Per-function Def / UseWithoutDef summaries and cross-context
//! classification of garbage-read candidates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{DeclId, SrcLoc};
use crate::frontend::index::ProgramIndex;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UseEntry {
    pub member: DeclId,
    pub loc: SrcLoc,
    /// `member->function`.
    pub local_path: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub function: DeclId,
    /// Member -> location of its first definition.
    pub def_set: BTreeMap<DeclId, SrcLoc>,
    pub use_without_def_set: BTreeSet<UseEntry>,
    pub truncated: bool,
    pub paths_explored: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    Def,
    Use,
}

impl FunctionSummary {
    pub fn new(function: impl Into<DeclId>) -> Self {
        FunctionSummary { function: function.into(), ..Default::default() }
    }

    pub fn defines(&self, member: &str) -> bool {
        self.def_set.contains_key(member)
    }
}

/// Apply one event to a single-path summary: a Def enters the def set only
/// the first time; a Use enters the use-without-def set only when the
/// member has no definition yet.
pub fn record_event(mut summary: FunctionSummary, kind: EventKind, member: &str, loc: SrcLoc) -> FunctionSummary {
    match kind {
        EventKind::Def => {
            summary.def_set.entry(member.to_string()).or_insert(loc);
        }
        EventKind::Use => {
            if !summary.defines(member) {
                let local_path = format!("{member}->{}", summary.function);
                summary.use_without_def_set.insert(UseEntry { member: member.to_string(), loc, local_path });
            }
        }
    }
    summary
}

/// Union of path summaries; a member's def location is the earliest one.
pub fn merge_into(total: &mut FunctionSummary, path: &FunctionSummary) {
    for (m, loc) in &path.def_set {
        match total.def_set.get_mut(m) {
            Some(old) if *old <= *loc => {}
            Some(old) => *old = loc.clone(),
            None => {
                total.def_set.insert(m.clone(), loc.clone());
            }
        }
    }
    total.use_without_def_set.extend(path.use_without_def_set.iter().cloned());
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GarbageReadFinding {
    pub class: String,
    pub member: DeclId,
    pub function: DeclId,
    pub loc: SrcLoc,
    pub local_path: String,
}

/// Flag each (member, use site) where the member of class C is used without
/// a prior definition in some method of C and no constructor along C's
/// constructor chain defines it. A class without an explicit constructor
/// contributes an empty one.
pub fn classify_candidates(
    summaries: &BTreeMap<DeclId, FunctionSummary>,
    classes: &[String],
    index: &ProgramIndex,
) -> Vec<GarbageReadFinding> {
    let mut out = BTreeSet::new();
    for class in classes {
        let Some(info) = index.class(class) else { continue };
        let members: BTreeSet<&str> = index.all_fields(class).into_iter().map(|f| f.decl.as_str()).collect();
        let ctor_defs: BTreeSet<&str> = index
            .ancestry(class)
            .iter()
            .filter_map(|c| summaries.get(&format!("{c}::{c}")))
            .flat_map(|s| s.def_set.keys().map(String::as_str))
            .collect();
        let prefix = format!("{}::", info.name);
        for (f, s) in summaries {
            if !f.starts_with(&prefix) || *f == info.ctor_decl() || !info.methods.contains_key(&f[prefix.len()..]) {
                continue;
            }
            for u in &s.use_without_def_set {
                if members.contains(u.member.as_str()) && !ctor_defs.contains(u.member.as_str()) {
                    out.insert(GarbageReadFinding {
                        class: class.clone(),
                        member: u.member.clone(),
                        function: f.clone(),
                        loc: u.loc.clone(),
                        local_path: u.local_path.clone(),
                    });
                }
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(line: u32) -> SrcLoc {
        SrcLoc { file: "t.mo".into(), line, col: 1 }
    }

    #[test]
    fn use_then_def_then_use() {
        let mut s = FunctionSummary::new("C::m");
        s = record_event(s, EventKind::Use, "C::x", loc(1));
        s = record_event(s, EventKind::Def, "C::x", loc(2));
        s = record_event(s, EventKind::Use, "C::x", loc(3));
        assert_eq!(s.def_set.get("C::x"), Some(&loc(2)));
        assert_eq!(s.use_without_def_set.len(), 1);
        assert_eq!(s.use_without_def_set.first().unwrap().loc, loc(1));
    }

    /// All 6 orderings of events {Def, Use1, Use2}, against the two
    /// membership rules applied by hand.
    #[test]
    fn all_orderings_of_def_use_use() {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for perm in perms {
            let mut s = FunctionSummary::new("C::m");
            for (i, ev) in perm.iter().enumerate() {
                let kind = if *ev == 0 { EventKind::Def } else { EventKind::Use };
                s = record_event(s, kind, "C::x", loc(i as u32 + 1));
            }
            let def_at = perm.iter().position(|e| *e == 0).unwrap();
            assert_eq!(s.def_set["C::x"], loc(def_at as u32 + 1));
            let uses: Vec<u32> = s.use_without_def_set.iter().map(|u| u.loc.line).collect();
            let expected: Vec<u32> = (0..def_at as u32).map(|i| i + 1).collect();
            assert_eq!(uses, expected, "{perm:?}");
        }
    }
}
