//! Declaration tables shared by the checker, the engine, IR lowering and the
//! oracle interpreter.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;

#[derive(Clone, Debug)]
pub struct FieldInfo {
    pub name: String,
    pub decl: DeclId,
    pub ty: Type,
}

#[derive(Clone, Debug)]
pub struct MethodInfo {
    pub name: String,
    pub decl: DeclId,
    pub sig: FnType,
    pub by_ref: Vec<bool>,
    /// Declared `virtual` or overriding a virtual ancestor method.
    pub is_virtual: bool,
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    pub name: String,
    pub unit: String,
    pub base: Option<String>,
    pub fields: Vec<FieldInfo>,
    pub methods: BTreeMap<String, MethodInfo>,
    /// Method names in declaration order.
    pub method_order: Vec<String>,
    /// Explicit constructor parameters; `None` when the constructor is implicit.
    pub ctor: Option<(Vec<Type>, Vec<bool>)>,
}

impl ClassInfo {
    pub fn ctor_decl(&self) -> DeclId {
        format!("{0}::{0}", self.name)
    }
}

#[derive(Clone, Debug)]
pub struct FnInfo {
    pub decl: DeclId,
    pub unit: String,
    pub sig: FnType,
    pub by_ref: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct GlobalInfo {
    pub name: String,
    pub unit: String,
    pub ty: Type,
}

/// Program-wide (or unit-wide) declaration index.
#[derive(Clone, Debug, Default)]
pub struct ProgramIndex {
    pub classes: BTreeMap<String, ClassInfo>,
    pub functions: BTreeMap<String, FnInfo>,
    pub globals: BTreeMap<String, GlobalInfo>,
    /// Unit name -> units whose declarations it can see (itself included).
    pub visible: BTreeMap<String, BTreeSet<String>>,
}

impl ProgramIndex {
    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn sees(&self, unit: &str, decl_unit: &str) -> bool {
        self.visible.get(unit).is_some_and(|v| v.contains(decl_unit))
    }

    pub fn visible_class(&self, unit: &str, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name).filter(|c| self.sees(unit, &c.unit))
    }

    pub fn visible_function(&self, unit: &str, name: &str) -> Option<&FnInfo> {
        self.functions.get(name).filter(|f| self.sees(unit, &f.unit))
    }

    pub fn visible_global(&self, unit: &str, name: &str) -> Option<&GlobalInfo> {
        self.globals.get(name).filter(|g| self.sees(unit, &g.unit))
    }

    /// `class` followed by its ancestors, nearest first. Stops on cycles.
    pub fn ancestry(&self, class: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(class.to_string());
        while let Some(c) = cur {
            if out.contains(&c) {
                break;
            }
            cur = self.classes.get(&c).and_then(|i| i.base.clone());
            out.push(c);
        }
        out
    }

    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        self.ancestry(sub).iter().any(|c| c == sup)
    }

    /// Reflexive-transitive subclasses of `class` among all indexed classes.
    pub fn subclasses(&self, class: &str) -> BTreeSet<String> {
        self.classes.keys().filter(|c| self.is_subclass(c, class)).cloned().collect()
    }

    /// Same as [`subclasses`](Self::subclasses) restricted to what `unit` can see.
    pub fn visible_subclasses(&self, unit: &str, class: &str) -> BTreeSet<String> {
        self.classes
            .values()
            .filter(|c| self.sees(unit, &c.unit) && self.is_subclass(&c.name, class))
            .map(|c| c.name.clone())
            .collect()
    }

    pub fn lookup_field(&self, class: &str, name: &str) -> Option<&FieldInfo> {
        self.ancestry(class)
            .iter()
            .filter_map(|c| self.classes.get(c))
            .find_map(|c| c.fields.iter().find(|f| f.name == name))
    }

    /// All fields of `class`, inherited ones first.
    pub fn all_fields(&self, class: &str) -> Vec<&FieldInfo> {
        let mut chain = self.ancestry(class);
        chain.reverse();
        chain.iter().filter_map(|c| self.classes.get(c)).flat_map(|c| c.fields.iter()).collect()
    }

    pub fn lookup_method(&self, class: &str, name: &str) -> Option<&MethodInfo> {
        self.ancestry(class)
            .iter()
            .filter_map(|c| self.classes.get(c))
            .find_map(|c| c.methods.get(name))
    }

    /// Virtual dispatch table: slot name -> implementing method, in slot
    /// order. Base slots come first; overrides replace in place.
    pub fn vtable(&self, class: &str) -> Vec<(String, DeclId)> {
        let mut chain = self.ancestry(class);
        chain.reverse();
        let mut table: Vec<(String, DeclId)> = Vec::new();
        for c in chain.iter().filter_map(|c| self.classes.get(c)) {
            for m in &c.method_order {
                let info = &c.methods[m];
                if !info.is_virtual {
                    continue;
                }
                match table.iter_mut().find(|(s, _)| s == m) {
                    Some(entry) => entry.1 = info.decl.clone(),
                    None => table.push((m.clone(), info.decl.clone())),
                }
            }
        }
        table
    }
}
