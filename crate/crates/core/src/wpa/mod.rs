//! Demand-driven whole-program validation of candidate reports.

mod callgraph;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{DeclId, SrcLoc};
use crate::ir::{field_store_scan, IrProgram, LinkError, StoreSite};

pub use callgraph::{
    build_callgraph, devirtualize_cha, resolve_indirect, rta_prune, CallGraph, ClassHierarchy, Edge, EdgeKind,
    IndirectSite, Unresolved, VirtualSite,
};
pub use validate::validate_garbage_read;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WpaConfig {
    /// Maximum number of chains kept per report.
    pub chain_cap: usize,
    /// Maximum chain length in functions.
    pub depth_cap: usize,
    /// Credit stores made through one level of reference parameters.
    pub resolve_ref_aliases: bool,
}

impl Default for WpaConfig {
    fn default() -> Self {
        WpaConfig { chain_cap: 16, depth_cap: 64, resolve_ref_aliases: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WpQuery {
    pub report_id: String,
    pub field: DeclId,
    pub anchor_function: DeclId,
    pub anchor_loc: SrcLoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    FalsePositive,
    Confirmed,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpStats {
    pub nodes_visited: usize,
    pub chains_enumerated: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WpReport {
    pub report_id: String,
    pub field: DeclId,
    pub anchor_function: DeclId,
    pub verdict: Verdict,
    /// Entry-first call chains without a matching store.
    pub chains: Vec<Vec<DeclId>>,
    pub stats: WpStats,
}

/// Call graph refined by CHA, indirect-call resolution and RTA, shared by
/// every query against one program.
#[derive(Clone, Debug)]
pub struct WholeProgram {
    pub program: IrProgram,
    pub hierarchy: ClassHierarchy,
    pub callgraph: CallGraph,
    pub entries: Vec<DeclId>,
    pub config: WpaConfig,
}

impl WholeProgram {
    pub fn new(program: IrProgram, entries: Vec<DeclId>, config: WpaConfig) -> Self {
        let base = build_callgraph(&program);
        let ch = ClassHierarchy::build(&program);
        let cha = devirtualize_cha(&base, &ch);
        let resolved = resolve_indirect(&cha, &program);
        let ch = ch.with_instantiated(&resolved, &entries);
        let callgraph = rta_prune(&resolved, &ch);
        WholeProgram { program, hierarchy: ch, callgraph, entries, config }
    }

    pub fn stores(&self, field: &str) -> Result<BTreeSet<StoreSite>, LinkError> {
        field_store_scan(&self.program, field, self.config.resolve_ref_aliases)
    }

    /// Answer one query. Fails when the field is unknown to the program.
    pub fn validate(&self, query: &WpQuery) -> Result<WpReport, LinkError> {
        let stores = self.stores(&query.field)?;
        Ok(validate_garbage_read(query, &self.callgraph, &self.hierarchy, &stores, &self.entries, &self.config))
    }
}
