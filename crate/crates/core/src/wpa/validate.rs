use std::collections::{BTreeMap, BTreeSet};

use super::*;

/// Upper bound on DFS node visits per query.
const VISIT_LIMIT: usize = 1_000_000;

/// Look for entry-to-anchor call chains on which no function stores the
/// queried field. A function discharges a chain when it stores the field
/// itself, or when it constructs an object of the field's class (or a
/// subclass) whose constructor, or anything the constructor calls, stores
/// the field. The check is function-level: store/load order inside a
/// function is not considered.
pub fn validate_garbage_read(
    query: &WpQuery,
    cg: &CallGraph,
    ch: &ClassHierarchy,
    stores: &BTreeSet<StoreSite>,
    entries: &[DeclId],
    cfg: &WpaConfig,
) -> WpReport {
    let mut report = WpReport {
        report_id: query.report_id.clone(),
        field: query.field.clone(),
        anchor_function: query.anchor_function.clone(),
        verdict: Verdict::FalsePositive,
        chains: Vec::new(),
        stats: WpStats::default(),
    };
    let roots: Vec<&str> = {
        let mut seen = BTreeSet::new();
        entries.iter().map(String::as_str).filter(|e| cg.nodes.contains(*e) && seen.insert(*e)).collect()
    };
    if !cg.reachable(roots.iter().copied()).contains(query.anchor_function.as_str()) {
        report.stats.note = Some("unreachable".into());
        return report;
    }

    let store_fns: BTreeSet<&str> = stores.iter().map(|s| s.function.as_str()).collect();
    let class = query.field.rsplit_once("::").map(|(c, _)| c).unwrap_or("");
    let receivers = ch.subclasses.get(class).cloned().unwrap_or_default();
    let mut ctor_stores: BTreeMap<&str, bool> = BTreeMap::new();
    let mut discharges: BTreeMap<&str, bool> = BTreeMap::new();
    for f in &cg.nodes {
        let mut d = store_fns.contains(f.as_str());
        for k in cg.constructs.get(f).into_iter().flatten().filter(|k| receivers.contains(*k)) {
            if let Some(ctor) = ch.ctors.get(k) {
                let hit = *ctor_stores
                    .entry(ctor.as_str())
                    .or_insert_with(|| cg.reachable([ctor.as_str()]).iter().any(|g| store_fns.contains(g)));
                d |= hit;
            }
        }
        discharges.insert(f.as_str(), d);
    }

    let succ = cg.successors();
    let mut search = Search {
        anchor: &query.anchor_function,
        succ: &succ,
        discharges: &discharges,
        cap: cfg.chain_cap.max(1),
        depth_cap: cfg.depth_cap.max(1),
        path: Vec::new(),
        found: Vec::new(),
        stats: WpStats::default(),
        capped: false,
    };
    for r in roots {
        if search.found.len() >= search.cap {
            break;
        }
        search.dfs(r);
    }
    report.stats = search.stats;
    if search.capped {
        report.stats.note = Some("search limit reached".into());
    }
    if !search.found.is_empty() {
        report.verdict = Verdict::Confirmed;
        report.chains = search.found;
    }
    report
}

struct Search<'a> {
    anchor: &'a str,
    succ: &'a BTreeMap<&'a str, Vec<&'a str>>,
    discharges: &'a BTreeMap<&'a str, bool>,
    cap: usize,
    depth_cap: usize,
    path: Vec<&'a str>,
    found: Vec<Vec<DeclId>>,
    stats: WpStats,
    capped: bool,
}

impl<'a> Search<'a> {
    fn dfs(&mut self, n: &'a str) {
        if self.found.len() >= self.cap || self.capped {
            return;
        }
        self.stats.nodes_visited += 1;
        if self.stats.nodes_visited > VISIT_LIMIT {
            self.capped = true;
            return;
        }
        if self.discharges.get(n).copied().unwrap_or(false) {
            // every chain through `n` has a matching store
            if n == self.anchor {
                self.stats.chains_enumerated += 1;
            }
            return;
        }
        self.path.push(n);
        if n == self.anchor {
            self.stats.chains_enumerated += 1;
            self.found.push(self.path.iter().map(|s| s.to_string()).collect());
        } else if self.path.len() < self.depth_cap {
            for &s in self.succ.get(n).map(Vec::as_slice).unwrap_or(&[]) {
                if !self.path.contains(&s) {
                    self.dfs(s);
                }
            }
        }
        self.path.pop();
    }
}
