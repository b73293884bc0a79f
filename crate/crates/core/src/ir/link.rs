use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkError {
    #[error("duplicate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("missing entry point `{0}`")]
    MissingEntry(String),
    #[error("vtable of `{derived}` does not extend the vtable of its base `{base}`")]
    VtableMismatch { base: String, derived: String },
    #[error("unknown field `{0}`")]
    UnknownField(String),
}

/// Merge modules into one program. `entries` must name program functions.
pub fn link(modules: &[IrModule], entries: &[DeclId]) -> Result<IrProgram, LinkError> {
    let mut functions: BTreeMap<DeclId, IrFunction> = BTreeMap::new();
    let mut classes: BTreeMap<String, IrClass> = BTreeMap::new();
    let mut globals: BTreeMap<String, IrGlobal> = BTreeMap::new();
    for m in modules {
        for f in &m.functions {
            if functions.insert(f.id.clone(), f.clone()).is_some() {
                return Err(LinkError::DuplicateSymbol(f.id.clone()));
            }
        }
        for c in &m.classes {
            if classes.insert(c.name.clone(), c.clone()).is_some() {
                return Err(LinkError::DuplicateSymbol(c.name.clone()));
            }
        }
        for g in &m.globals {
            if globals.insert(g.name.clone(), g.clone()).is_some() {
                return Err(LinkError::DuplicateSymbol(g.name.clone()));
            }
        }
    }
    for c in classes.values() {
        if let Some(base) = c.base.as_ref().and_then(|b| classes.get(b)) {
            let prefix: Vec<&String> = c.vtable.iter().map(|(s, _)| s).take(base.vtable.len()).collect();
            let base_slots: Vec<&String> = base.vtable.iter().map(|(s, _)| s).collect();
            if prefix != base_slots {
                return Err(LinkError::VtableMismatch { base: base.name.clone(), derived: c.name.clone() });
            }
        }
    }
    for e in entries {
        if !functions.contains_key(e) {
            return Err(LinkError::MissingEntry(e.clone()));
        }
    }
    let mut externals = BTreeSet::new();
    for f in functions.values() {
        for i in f.insts() {
            if let Op::Call { target, .. } = &i.op {
                if !functions.contains_key(target) {
                    externals.insert(target.clone());
                }
            }
        }
    }
    Ok(IrProgram {
        functions: functions.into_values().collect(),
        classes: classes.into_values().collect(),
        globals: globals.into_values().collect(),
        externals,
        entries: entries.to_vec(),
    })
}

/// A function containing a store to the scanned field.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct StoreSite {
    pub function: DeclId,
    pub loc: SrcLoc,
    /// Set when the store happens in a callee through a reference parameter
    /// bound to the field at this call site.
    pub via: Option<DeclId>,
}

/// Functions storing to `field`. With `resolve_aliases`, a call that binds
/// `field` to a reference parameter which the callee writes counts as a
/// store in the caller (one level deep).
pub fn field_store_scan(program: &IrProgram, field: &str, resolve_aliases: bool) -> Result<BTreeSet<StoreSite>, LinkError> {
    if !program.has_field(field) {
        return Err(LinkError::UnknownField(field.to_string()));
    }
    let writes_param = |target: &str, param: usize| {
        program
            .function(target)
            .is_some_and(|g| g.insts().any(|i| matches!(i.op, Op::StoreRef { param: p } if p == param)))
    };
    let subclasses = program.subclass_closure();
    let mut out = BTreeSet::new();
    for f in &program.functions {
        for i in f.insts() {
            match &i.op {
                Op::Store { field: x } if x == field => {
                    out.insert(StoreSite { function: f.id.clone(), loc: f.src_loc(i.at), via: None });
                }
                Op::Call { target, aliases } if resolve_aliases => {
                    for a in aliases.iter().filter(|a| a.field == field) {
                        if writes_param(target, a.param) {
                            out.insert(StoreSite { function: f.id.clone(), loc: f.src_loc(i.at), via: Some(target.clone()) });
                        }
                    }
                }
                Op::Vcall { slot, class, aliases } if resolve_aliases => {
                    let targets: BTreeSet<&DeclId> = subclasses
                        .get(class)
                        .into_iter()
                        .flatten()
                        .filter_map(|c| program.class(c))
                        .filter_map(|c| c.vtable.iter().find(|(s, _)| s == slot).map(|(_, t)| t))
                        .collect();
                    for a in aliases.iter().filter(|a| a.field == field) {
                        for t in &targets {
                            if writes_param(t, a.param) {
                                out.insert(StoreSite { function: f.id.clone(), loc: f.src_loc(i.at), via: Some((*t).clone()) });
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    Ok(out)
}
