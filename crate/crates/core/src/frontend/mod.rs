//! MiniObj front end: lexing, parsing, name resolution and type checking.

pub mod ast;
pub mod check;
pub mod diag;
pub mod index;
pub mod lexer;
pub mod parser;
pub mod pretty;

use std::collections::{BTreeMap, BTreeSet};

pub use ast::*;
pub use diag::Diagnostic;
pub use index::ProgramIndex;

/// Resolved program: units in input order plus the program-wide index.
#[derive(Clone, Debug)]
pub struct ProgramAst {
    pub units: Vec<TranslationUnit>,
    pub index: ProgramIndex,
}

impl ProgramAst {
    pub fn unit(&self, name: &str) -> Option<&TranslationUnit> {
        self.units.iter().find(|u| u.name == name)
    }

    /// Index restricted to what `unit` can see.
    pub fn unit_index(&self, unit: &str) -> ProgramIndex {
        let mut idx = self.index.clone();
        let vis = idx.visible.get(unit).cloned().unwrap_or_default();
        idx.classes.retain(|_, c| vis.contains(&c.unit));
        idx.functions.retain(|_, f| vis.contains(&f.unit));
        idx.globals.retain(|_, g| vis.contains(&g.unit));
        idx
    }

    /// Find the function declaration with the given id.
    pub fn function(&self, decl: &str) -> Option<(&TranslationUnit, &FnDecl)> {
        self.units.iter().find_map(|u| u.functions().into_iter().find(|f| f.decl_id() == decl).map(|f| (u, f)))
    }
}

/// Parse and check one unit. A unit without imports is fully checked; a
/// unit with imports is checked for everything that does not depend on the
/// imported declarations and left for [`resolve_program`] to finish.
pub fn parse_unit(source_text: &str, unit_name: &str) -> Result<TranslationUnit, Vec<Diagnostic>> {
    parse_unit_file(source_text, unit_name, &format!("{unit_name}.mo"))
}

/// [`parse_unit`] with an explicit file name for diagnostics and locations.
pub fn parse_unit_file(source_text: &str, unit_name: &str, file: &str) -> Result<TranslationUnit, Vec<Diagnostic>> {
    let mut unit = parser::parse(source_text, unit_name, file).map_err(|d| vec![d])?;
    let lenient = unit.imports().next().is_some();
    let visible = BTreeMap::from([(unit.name.clone(), BTreeSet::from([unit.name.clone()]))]);
    let (index, mut diags) = check::build_index(&[&unit], visible, lenient);
    if !diags.is_empty() {
        diags.sort();
        return Err(diags);
    }
    if lenient {
        let mut probe = vec![unit.clone()];
        let diags = check::check_units(&mut probe, &index, true);
        if !diags.is_empty() {
            return Err(diags);
        }
    } else {
        let mut units = vec![unit];
        let diags = check::check_units(&mut units, &index, false);
        if !diags.is_empty() {
            return Err(diags);
        }
        unit = units.pop().unwrap();
        unit.checked = true;
    }
    Ok(unit)
}

/// Bind imports across `units` and finish checking.
pub fn resolve_program(mut units: Vec<TranslationUnit>) -> Result<ProgramAst, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let names: BTreeSet<String> = units.iter().map(|u| u.name.clone()).collect();
    let mut seen = BTreeSet::new();
    for u in &units {
        if !seen.insert(u.name.clone()) {
            diags.push(Diagnostic::new(u.file(), Loc { line: 1, col: 1 }, format!("duplicate unit name `{}`", u.name)));
        }
        for i in u.imports() {
            if !names.contains(&i.unit) {
                diags.push(Diagnostic::new(u.file(), u.loc(i.id), format!("unresolved import `{}`", i.unit)));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    let visible = import_closure(&units);
    let (index, diags) = {
        let refs: Vec<&TranslationUnit> = units.iter().collect();
        check::build_index(&refs, visible, false)
    };
    if !diags.is_empty() {
        return Err(diags);
    }
    let diags = check::check_units(&mut units, &index, false);
    if !diags.is_empty() {
        return Err(diags);
    }
    for u in units.iter_mut() {
        u.checked = true;
    }
    Ok(ProgramAst { units, index })
}

/// Parse `(unit name, source)` pairs and resolve them as one program.
pub fn load_program(sources: &[(&str, &str)]) -> Result<ProgramAst, Vec<Diagnostic>> {
    let mut units = Vec::new();
    let mut diags = Vec::new();
    for (name, src) in sources {
        match parse_unit(src, name) {
            Ok(u) => units.push(u),
            Err(d) => diags.extend(d),
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    resolve_program(units)
}

/// Unit name -> reflexive-transitive closure of its imports.
pub fn import_closure(units: &[TranslationUnit]) -> BTreeMap<String, BTreeSet<String>> {
    let direct: BTreeMap<&str, Vec<&str>> =
        units.iter().map(|u| (u.name.as_str(), u.imports().map(|i| i.unit.as_str()).collect())).collect();
    let mut out = BTreeMap::new();
    for u in units {
        let mut seen = BTreeSet::from([u.name.clone()]);
        let mut stack = vec![u.name.as_str()];
        while let Some(n) = stack.pop() {
            for &i in direct.get(n).map(|v| v.as_slice()).unwrap_or(&[]) {
                if seen.insert(i.to_string()) {
                    stack.push(i);
                }
            }
        }
        out.insert(u.name.clone(), seen);
    }
    out
}
