use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::{DeclId, SrcLoc};
use crate::ir::{FnSrc, IrProgram, Op};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeKind {
    Direct,
    /// One of several possible targets of a virtual call.
    Virtual,
    Devirtualized,
    ResolvedIndirect,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub caller: DeclId,
    pub site: SrcLoc,
    pub callee: DeclId,
    pub kind: EdgeKind,
    /// Virtual slot, for edges of a virtual call site.
    pub slot: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Unresolved {
    pub caller: DeclId,
    pub site: SrcLoc,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VirtualSite {
    pub caller: DeclId,
    pub site: SrcLoc,
    pub slot: String,
    /// Static class of the receiver.
    pub class: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndirectSite {
    pub caller: DeclId,
    pub site: SrcLoc,
    pub callee: FnSrc,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallGraph {
    pub nodes: BTreeSet<DeclId>,
    pub edges: BTreeSet<Edge>,
    pub unresolved: BTreeSet<Unresolved>,
    pub virtual_sites: Vec<VirtualSite>,
    pub indirect_sites: Vec<IndirectSite>,
    /// Classes instantiated by each function.
    pub constructs: BTreeMap<DeclId, BTreeSet<String>>,
}

impl CallGraph {
    pub fn callees(&self, f: &str) -> BTreeSet<&DeclId> {
        self.edges.iter().filter(|e| e.caller == f).map(|e| &e.callee).collect()
    }

    /// Adjacency lists with sorted, distinct successors.
    pub fn successors(&self) -> BTreeMap<&str, Vec<&str>> {
        let mut out: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in &self.edges {
            out.entry(&e.caller).or_default().insert(&e.callee);
        }
        out.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect()
    }

    pub fn has_edge(&self, caller: &str, callee: &str) -> bool {
        self.edges.iter().any(|e| e.caller == caller && e.callee == callee)
    }

    /// Functions reachable from `roots`, roots included.
    pub fn reachable<'a>(&'a self, roots: impl IntoIterator<Item = &'a str>) -> BTreeSet<&'a str> {
        let succ = self.successors();
        let mut seen = BTreeSet::new();
        let mut stack: Vec<&str> = roots.into_iter().collect();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                if let Some(s) = succ.get(n) {
                    stack.extend(s.iter().copied());
                }
            }
        }
        seen
    }

    /// Targets of the virtual site at `site`.
    pub fn site_targets(&self, caller: &str, site: &SrcLoc) -> BTreeSet<&DeclId> {
        self.edges
            .iter()
            .filter(|e| e.caller == caller && &e.site == site && e.slot.is_some())
            .map(|e| &e.callee)
            .collect()
    }

    fn clear_site(&mut self, caller: &str, site: &SrcLoc) {
        self.edges.retain(|e| !(e.caller == caller && &e.site == site && e.slot.is_some()));
        self.unresolved.retain(|u| !(u.caller == caller && &u.site == site));
    }

    fn set_virtual_targets(&mut self, s: &VirtualSite, targets: &BTreeSet<DeclId>, empty_reason: &str) {
        self.clear_site(&s.caller, &s.site);
        let kind = if targets.len() == 1 { EdgeKind::Devirtualized } else { EdgeKind::Virtual };
        for t in targets {
            self.edges.insert(Edge {
                caller: s.caller.clone(),
                site: s.site.clone(),
                callee: t.clone(),
                kind,
                slot: Some(s.slot.clone()),
            });
        }
        if targets.len() != 1 {
            let reason = if targets.is_empty() { empty_reason } else { "multiple targets" };
            self.unresolved.insert(Unresolved { caller: s.caller.clone(), site: s.site.clone(), reason: reason.into() });
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassHierarchy {
    pub parent: BTreeMap<String, Option<String>>,
    /// Reflexive-transitive subclasses.
    pub subclasses: BTreeMap<String, BTreeSet<String>>,
    /// Class -> slot -> implementing function.
    pub overrides: BTreeMap<String, BTreeMap<String, DeclId>>,
    /// Nearest constructor with a body along each class's ancestry.
    pub ctors: BTreeMap<String, DeclId>,
    /// Classes with at least one reachable `new` (filled for RTA).
    pub instantiated: BTreeSet<String>,
}

impl ClassHierarchy {
    pub fn build(program: &IrProgram) -> Self {
        let mut ch = ClassHierarchy { subclasses: program.subclass_closure(), ..Default::default() };
        for c in &program.classes {
            ch.parent.insert(c.name.clone(), c.base.clone());
            ch.overrides.insert(c.name.clone(), c.vtable.iter().cloned().collect());
            let mut cur = Some(c.name.as_str());
            let mut guard = 0;
            while let (Some(k), true) = (cur.and_then(|n| program.class(n)), guard < 64) {
                if let Some(ctor) = &k.ctor {
                    ch.ctors.insert(c.name.clone(), ctor.clone());
                    break;
                }
                cur = k.base.as_deref();
                guard += 1;
            }
        }
        ch
    }

    /// Implementations of `slot` over the subclasses of `class`, restricted
    /// to `only` when given.
    pub fn targets(&self, class: &str, slot: &str, only: Option<&BTreeSet<String>>) -> BTreeSet<DeclId> {
        self.subclasses
            .get(class)
            .into_iter()
            .flatten()
            .filter(|c| only.is_none_or(|o| o.contains(*c)))
            .filter_map(|c| self.overrides.get(c).and_then(|m| m.get(slot)))
            .cloned()
            .collect()
    }

    /// Fill `instantiated` with the classes whose `new` sites are reachable
    /// from `entries`, following virtual calls only into instantiated
    /// receivers (fixpoint).
    pub fn with_instantiated(mut self, cg: &CallGraph, entries: &[DeclId]) -> Self {
        let mut inst = BTreeSet::new();
        loop {
            let mut edges: BTreeMap<&str, BTreeSet<DeclId>> = BTreeMap::new();
            for e in &cg.edges {
                if e.slot.is_none() {
                    edges.entry(&e.caller).or_default().insert(e.callee.clone());
                }
            }
            for s in &cg.virtual_sites {
                edges.entry(&s.caller).or_default().extend(self.targets(&s.class, &s.slot, Some(&inst)));
            }
            let mut seen: BTreeSet<DeclId> = BTreeSet::new();
            let mut stack: Vec<DeclId> = entries.to_vec();
            while let Some(n) = stack.pop() {
                if seen.insert(n.clone()) {
                    if let Some(s) = edges.get(n.as_str()) {
                        stack.extend(s.iter().cloned());
                    }
                }
            }
            let next: BTreeSet<String> =
                seen.iter().filter_map(|f| cg.constructs.get(f)).flatten().cloned().collect();
            if next == inst {
                break;
            }
            inst = next;
        }
        self.instantiated = inst;
        self
    }
}

/// Direct edges, construction edges included. Virtual and indirect sites
/// are listed as unresolved.
pub fn build_callgraph(program: &IrProgram) -> CallGraph {
    let mut cg = CallGraph::default();
    for f in &program.functions {
        cg.nodes.insert(f.id.clone());
        for i in f.insts() {
            let site = f.src_loc(i.at);
            match &i.op {
                Op::Call { target, .. } => {
                    cg.edges.insert(Edge {
                        caller: f.id.clone(),
                        site,
                        callee: target.clone(),
                        kind: EdgeKind::Direct,
                        slot: None,
                    });
                }
                Op::Vcall { slot, class, .. } => {
                    cg.virtual_sites.push(VirtualSite { caller: f.id.clone(), site: site.clone(), slot: slot.clone(), class: class.clone() });
                    cg.unresolved.insert(Unresolved { caller: f.id.clone(), site, reason: "virtual".into() });
                }
                Op::Icall { callee } => {
                    cg.indirect_sites.push(IndirectSite { caller: f.id.clone(), site: site.clone(), callee: callee.clone() });
                    cg.unresolved.insert(Unresolved { caller: f.id.clone(), site, reason: "indirect".into() });
                }
                Op::New { class } => {
                    cg.constructs.entry(f.id.clone()).or_default().insert(class.clone());
                }
                _ => {}
            }
        }
    }
    cg
}

/// Give each virtual site edges to every implementation of its slot in the
/// receiver's subclass closure.
pub fn devirtualize_cha(cg: &CallGraph, ch: &ClassHierarchy) -> CallGraph {
    let mut out = cg.clone();
    for s in &cg.virtual_sites {
        let targets = ch.targets(&s.class, &s.slot, None);
        out.set_virtual_targets(s, &targets, "no implementation");
    }
    out
}

/// Restrict virtual targets to implementations reachable through
/// instantiated classes.
pub fn rta_prune(cg: &CallGraph, ch: &ClassHierarchy) -> CallGraph {
    let mut out = cg.clone();
    for s in &cg.virtual_sites {
        let cha = ch.targets(&s.class, &s.slot, None);
        let rta: BTreeSet<DeclId> = ch.targets(&s.class, &s.slot, Some(&ch.instantiated)).intersection(&cha).cloned().collect();
        out.set_virtual_targets(s, &rta, "no instantiated receiver");
    }
    out
}

/// Resolve indirect calls through function constants, casts of them, and
/// variables with a single reaching constant (flow-insensitive).
pub fn resolve_indirect(cg: &CallGraph, program: &IrProgram) -> CallGraph {
    let mut assigns: BTreeMap<String, Vec<FnSrc>> = BTreeMap::new();
    for g in &program.globals {
        if let Some(init) = &g.init {
            assigns.entry(format!("global:{}", g.name)).or_default().push(init.clone());
        }
    }
    for f in &program.functions {
        for i in f.insts() {
            if let Op::SetFn { var, value } = &i.op {
                assigns.entry(var.clone()).or_default().push(value.clone());
            }
        }
    }
    let mut out = cg.clone();
    for s in &cg.indirect_sites {
        let resolved = match reaching_constant(&s.callee, &assigns, &mut BTreeSet::new()) {
            Ok(t) => t,
            Err(reason) => {
                out.unresolved.retain(|u| !(u.caller == s.caller && u.site == s.site));
                out.unresolved.insert(Unresolved { caller: s.caller.clone(), site: s.site.clone(), reason });
                continue;
            }
        };
        out.unresolved.retain(|u| !(u.caller == s.caller && u.site == s.site));
        out.edges.insert(Edge {
            caller: s.caller.clone(),
            site: s.site.clone(),
            callee: resolved,
            kind: EdgeKind::ResolvedIndirect,
            slot: None,
        });
    }
    out
}

fn reaching_constant(
    src: &FnSrc,
    assigns: &BTreeMap<String, Vec<FnSrc>>,
    visiting: &mut BTreeSet<String>,
) -> Result<DeclId, String> {
    match src {
        FnSrc::Const { target } | FnSrc::Cast { target } => Ok(target.clone()),
        FnSrc::Other => Err("indirect".into()),
        FnSrc::Var { var } => {
            if !visiting.insert(var.clone()) {
                return Err("cyclic assignment".into());
            }
            let sources = assigns.get(var).map(Vec::as_slice).unwrap_or(&[]);
            if sources.is_empty() {
                return Err("no reaching constant".into());
            }
            let mut targets = BTreeSet::new();
            for s in sources {
                match s {
                    FnSrc::Other => return Err("non-constant assignment".into()),
                    _ => {
                        targets.insert(reaching_constant(s, assigns, visiting)?);
                    }
                }
            }
            visiting.remove(var);
            if targets.len() > 1 {
                return Err("multiple reaching constants".into());
            }
            Ok(targets.into_iter().next().unwrap())
        }
    }
}
