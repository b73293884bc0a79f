//! Per-unit symbolic exploration producing function summaries and checker
//! findings.

pub mod domain;
mod explore;
pub mod summary;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::checkers::{normalize, Checker, CheckerFinding, UnitResults};
use crate::frontend::ast::{DeclId, FnDecl, TranslationUnit};
use crate::frontend::index::ProgramIndex;
use summary::FunctionSummary;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Maximum number of paths explored per function.
    pub path_budget: u64,
    /// Exact loop iterations tried before the loop summary takes over.
    pub loop_bound: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig { path_budget: 10_000, loop_bound: 2 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct UnitAnalysis {
    pub summaries: BTreeMap<DeclId, FunctionSummary>,
    /// Findings of every checker, sorted by location.
    pub findings: Vec<CheckerFinding>,
}

impl UnitAnalysis {
    pub fn truncated(&self) -> bool {
        self.summaries.values().any(|s| s.truncated)
    }
}

/// Explore one function with `unit`'s other functions available for
/// inlining. Returns its summary and the path-event findings.
pub fn explore_function(
    unit: &TranslationUnit,
    index: &ProgramIndex,
    f: &FnDecl,
    cfg: &EngineConfig,
    checkers: &[Box<dyn Checker>],
) -> (FunctionSummary, Vec<CheckerFinding>) {
    explore::Explorer::new(unit, index, cfg, checkers, f).run(f)
}

/// Explore every function of a checked unit and run the checkers.
pub fn analyze_unit(
    unit: &TranslationUnit,
    index: &ProgramIndex,
    cfg: &EngineConfig,
    checkers: &[Box<dyn Checker>],
) -> UnitAnalysis {
    let mut out = UnitAnalysis::default();
    for f in unit.functions() {
        let (s, found) = explore_function(unit, index, f, cfg, checkers);
        log::debug!("{}: {} paths{}", s.function, s.paths_explored, if s.truncated { " (truncated)" } else { "" });
        out.summaries.insert(s.function.clone(), s);
        out.findings.extend(found);
    }
    let results = UnitResults { unit, index, summaries: &out.summaries };
    for c in checkers {
        out.findings.extend(c.finish(&results));
    }
    normalize(&mut out.findings);
    out
}
