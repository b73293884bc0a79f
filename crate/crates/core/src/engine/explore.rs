//! Path-sensitive forward exploration of one function.
//!
//! Paths are enumerated depth-first by re-execution: every run follows a
//! recorded prefix of branch decisions and then takes the first feasible
//! alternative at each new fork. After a run the last fork with untried
//! alternatives is advanced. The first `path_budget` runs in this order are
//! explored, so a larger budget always explores a superset of paths.
//!
//! Loops fork into two modes. *Unroll* runs up to `loop_bound` exact
//! iterations and then ends the path. *Summary* widens every local written
//! in the loop, resets the path's definitions to those at loop entry, runs
//! the body at most once and continues after the loop with written locals
//! widened again. Code after a loop therefore sees the same state for every
//! bound.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::domain::{flip, AbsVal, Interval, TagSet};
use super::summary::{FunctionSummary, UseEntry};
use super::EngineConfig;
use crate::checkers::{Checker, CheckerFinding, Event, EventSite};
use crate::frontend::ast::*;
use crate::frontend::index::ProgramIndex;
use crate::frontend::pretty::print_expr;

const MAX_INLINE_DEPTH: usize = 3;

/// Why a run ended before the function returned.
#[derive(Debug)]
enum Stop {
    /// No feasible branch, or a trapping operation.
    Infeasible,
    /// Covered by the loop summary path.
    Subsumed,
}

enum Flow {
    Normal,
    Return(AbsVal),
}

type Res<T> = Result<T, Stop>;

#[derive(Clone, Debug, Default)]
struct State {
    /// Locals of the current frame with their declared types.
    locals: HashMap<String, (Type, AbsVal)>,
    /// Values of `this.f` stored in the current frame.
    this_fields: HashMap<DeclId, AbsVal>,
    /// Members defined so far on this path.
    defs: BTreeSet<DeclId>,
}

pub(crate) struct Explorer<'a> {
    unit: &'a TranslationUnit,
    index: &'a ProgramIndex,
    cfg: &'a EngineConfig,
    checkers: &'a [Box<dyn Checker>],
    fns: HashMap<DeclId, &'a FnDecl>,
    root: DeclId,
    trail: Vec<(usize, usize)>,
    pos: usize,
    /// Function decl ids of the active frames; index 0 is the root.
    frames: Vec<DeclId>,
    /// Location of the root-level call currently being inlined.
    root_site: Option<SrcLoc>,
    summary: FunctionSummary,
    findings: BTreeSet<CheckerFinding>,
    written: HashMap<NodeId, Vec<String>>,
}

impl<'a> Explorer<'a> {
    pub(crate) fn new(
        unit: &'a TranslationUnit,
        index: &'a ProgramIndex,
        cfg: &'a EngineConfig,
        checkers: &'a [Box<dyn Checker>],
        root: &FnDecl,
    ) -> Self {
        let fns = unit.functions().into_iter().map(|f| (f.decl_id(), f)).collect();
        Explorer {
            unit,
            index,
            cfg,
            checkers,
            fns,
            root: root.decl_id(),
            trail: Vec::new(),
            pos: 0,
            frames: Vec::new(),
            root_site: None,
            summary: FunctionSummary::new(root.decl_id()),
            findings: BTreeSet::new(),
            written: HashMap::new(),
        }
    }

    pub(crate) fn run(mut self, f: &'a FnDecl) -> (FunctionSummary, Vec<CheckerFinding>) {
        let budget = self.cfg.path_budget.max(1);
        loop {
            self.pos = 0;
            self.frames = vec![self.root.clone()];
            self.root_site = None;
            let mut st = self.entry_state(f);
            let _ = self.enter(f, &mut st, f.id);
            self.summary.paths_explored += 1;
            self.trail.truncate(self.pos);
            let more = loop {
                match self.trail.last_mut() {
                    None => break false,
                    Some((c, n)) if *c + 1 < *n => {
                        *c += 1;
                        break true;
                    }
                    Some(_) => {
                        self.trail.pop();
                    }
                }
            };
            if !more {
                break;
            }
            if self.summary.paths_explored >= budget {
                self.summary.truncated = true;
                break;
            }
        }
        (self.summary, self.findings.into_iter().collect())
    }

    fn fork(&mut self, n: usize) -> usize {
        if n <= 1 {
            return 0;
        }
        let c = if self.pos < self.trail.len() {
            self.trail[self.pos].0
        } else {
            self.trail.push((0, n));
            0
        };
        self.pos += 1;
        c
    }

    fn depth(&self) -> usize {
        self.frames.len() - 1
    }

    fn top(&self, ty: &Type) -> AbsVal {
        match ty {
            Type::Int(t) => AbsVal::Int(Interval::full(*t)),
            Type::Bool => AbsVal::Bool(None),
            Type::Var => AbsVal::Var { tags: TagSet::ALL, tainted: true },
            Type::Tag => AbsVal::Tag(TagSet::ALL),
            Type::Class(c) => AbsVal::Obj(self.index.visible_subclasses(&self.unit.name, c)),
            Type::Buf => AbsVal::Buf,
            Type::Fn(_) => AbsVal::Fn,
            Type::Void | Type::Unknown => AbsVal::Void,
        }
    }

    fn entry_state(&self, f: &FnDecl) -> State {
        let mut st = State::default();
        for p in &f.params {
            st.locals.insert(p.name.clone(), (p.ty.clone(), self.top(&p.ty)));
        }
        if let Some(c) = f.class() {
            let ty = Type::Class(c.to_string());
            st.locals.insert("this".into(), (ty.clone(), self.top(&ty)));
        }
        st
    }

    /// Run a function body in the current frame, constructors first running
    /// their base class constructor.
    fn enter(&mut self, f: &FnDecl, st: &mut State, site: NodeId) -> Res<AbsVal> {
        if let FnKind::Ctor { class } = &f.kind {
            if let Some(base) = self.index.class(class).and_then(|c| c.base.clone()) {
                let this = st.locals.get("this").map(|(_, v)| v.clone()).unwrap_or(AbsVal::Void);
                self.construct(&base, this, Vec::new(), site, st)?;
            }
        }
        match self.block(&f.body, st)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(self.top(&f.ret)),
        }
    }

    fn emit(&mut self, node: NodeId, event: Event<'_>) {
        let function = self.frames.last().unwrap().clone();
        let site = EventSite { unit: self.unit, function: &function, node };
        for c in self.checkers {
            if let Some(f) = c.on_event(&site, &event) {
                self.findings.insert(f);
            }
        }
    }

    fn member_read(&mut self, decl: &str, is_this: bool, node: NodeId, ty: &Type, st: &State) -> AbsVal {
        if self.depth() == 0 && !st.defs.contains(decl) {
            let local_path = format!("{decl}->{}", self.root);
            let loc = self.unit.src_loc(node);
            self.summary.use_without_def_set.insert(UseEntry { member: decl.to_string(), loc, local_path });
        }
        match st.this_fields.get(decl) {
            Some(v) if is_this => v.clone(),
            _ => self.top(ty),
        }
    }

    fn member_write(&mut self, decl: &str, is_this: bool, node: NodeId, value: AbsVal, st: &mut State) {
        if st.defs.insert(decl.to_string()) {
            let loc = match &self.root_site {
                Some(l) if self.depth() > 0 => l.clone(),
                _ => self.unit.src_loc(node),
            };
            match self.summary.def_set.get_mut(decl) {
                Some(old) if *old <= loc => {}
                Some(old) => *old = loc,
                None => {
                    self.summary.def_set.insert(decl.to_string(), loc);
                }
            }
        }
        if is_this {
            st.this_fields.insert(decl.to_string(), value);
        } else {
            st.this_fields.clear();
        }
    }

    fn block(&mut self, b: &Block, st: &mut State) -> Res<Flow> {
        for s in &b.stmts {
            if let Flow::Return(v) = self.stmt(s, st)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt, st: &mut State) -> Res<Flow> {
        match &s.kind {
            StmtKind::Let { name, init, .. } => {
                let v = self.eval(init, st)?;
                st.locals.insert(name.clone(), (init.ty.clone(), v));
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, st)?;
                self.assign(target, v, st)?;
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.cond(cond, st)? {
                    return self.block(then_block, st);
                } else if let Some(b) = else_block {
                    return self.block(b, st);
                }
            }
            StmtKind::While { cond, body } => return self.while_loop(s.id, cond, body, st),
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, st)?,
                    None => AbsVal::Void,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.eval(e, st)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, target: &Expr, v: AbsVal, st: &mut State) -> Res<()> {
        match &target.kind {
            ExprKind::Name { name, res: NameRes::Local } => {
                let ty = st.locals.get(name).map(|(t, _)| t.clone()).unwrap_or_else(|| target.ty.clone());
                st.locals.insert(name.clone(), (ty, v));
            }
            ExprKind::Name { res: NameRes::Field(decl), .. } => self.member_write(decl, true, target.id, v, st),
            ExprKind::Field { object, field: Some(decl), .. } => {
                let is_this = matches!(object.peel().kind, ExprKind::This);
                if !is_this {
                    self.eval(object, st)?;
                }
                self.member_write(decl, is_this, target.id, v, st);
            }
            _ => {}
        }
        Ok(())
    }

    fn while_loop(&mut self, id: NodeId, cond: &Expr, body: &Block, st: &mut State) -> Res<Flow> {
        let written = self.written_in(id, body);
        let summary_mode = self.cfg.loop_bound == 0 || self.fork(2) == 1;
        if !summary_mode {
            for _ in 0..self.cfg.loop_bound {
                if !self.cond(cond, st)? {
                    return Err(Stop::Subsumed);
                }
                if let Flow::Return(v) = self.block(body, st)? {
                    return Ok(Flow::Return(v));
                }
            }
            return Err(Stop::Subsumed);
        }
        let entry_defs = st.defs.clone();
        self.widen(st, &written);
        if !self.cond(cond, st)? {
            return Ok(Flow::Normal);
        }
        if let Flow::Return(v) = self.block(body, st)? {
            return Ok(Flow::Return(v));
        }
        self.widen(st, &written);
        st.defs = entry_defs;
        Ok(Flow::Normal)
    }

    fn widen(&self, st: &mut State, written: &[String]) {
        for w in written {
            if let Some((ty, _)) = st.locals.get(w) {
                let ty = ty.clone();
                let top = self.top(&ty);
                st.locals.insert(w.clone(), (ty, top));
            }
        }
        st.this_fields.clear();
    }

    /// Locals assigned, declared or passed by reference inside `body`.
    fn written_in(&mut self, id: NodeId, body: &Block) -> Vec<String> {
        if let Some(w) = self.written.get(&id) {
            return w.clone();
        }
        let mut out = HashSet::new();
        self.collect_written_block(body, &mut out);
        let mut v: Vec<String> = out.into_iter().collect();
        v.sort();
        self.written.insert(id, v.clone());
        v
    }

    fn collect_written_block(&self, b: &Block, out: &mut HashSet<String>) {
        for s in &b.stmts {
            match &s.kind {
                StmtKind::Let { name, init, .. } => {
                    out.insert(name.clone());
                    self.collect_written_expr(init, out);
                }
                StmtKind::Assign { target, value } => {
                    if let ExprKind::Name { name, res: NameRes::Local } = &target.kind {
                        out.insert(name.clone());
                    }
                    self.collect_written_expr(target, out);
                    self.collect_written_expr(value, out);
                }
                StmtKind::If { cond, then_block, else_block } => {
                    self.collect_written_expr(cond, out);
                    self.collect_written_block(then_block, out);
                    if let Some(e) = else_block {
                        self.collect_written_block(e, out);
                    }
                }
                StmtKind::While { cond, body } => {
                    self.collect_written_expr(cond, out);
                    self.collect_written_block(body, out);
                }
                StmtKind::Return(Some(e)) | StmtKind::Expr(e) => self.collect_written_expr(e, out),
                StmtKind::Return(None) => {}
            }
        }
    }

    fn collect_written_expr(&self, e: &Expr, out: &mut HashSet<String>) {
        match &e.kind {
            ExprKind::Call { callee, args, res } => {
                let by_ref = self.by_ref(res);
                for (i, a) in args.iter().enumerate() {
                    if by_ref.get(i).copied().unwrap_or(false) {
                        if let ExprKind::Name { name, res: NameRes::Local } = &a.kind {
                            out.insert(name.clone());
                        }
                    }
                    self.collect_written_expr(a, out);
                }
                self.collect_written_expr(callee, out);
            }
            ExprKind::New { class, args } => {
                let by_ref = self.index.class(class).and_then(|c| c.ctor.clone()).map(|c| c.1).unwrap_or_default();
                for (i, a) in args.iter().enumerate() {
                    if by_ref.get(i).copied().unwrap_or(false) {
                        if let ExprKind::Name { name, res: NameRes::Local } = &a.kind {
                            out.insert(name.clone());
                        }
                    }
                    self.collect_written_expr(a, out);
                }
            }
            ExprKind::Field { object: x, .. }
            | ExprKind::Unary { operand: x, .. }
            | ExprKind::Downcast { operand: x, .. }
            | ExprKind::Cast { operand: x, .. }
            | ExprKind::Is { operand: x, .. }
            | ExprKind::Convert { operand: x, .. } => self.collect_written_expr(x, out),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.collect_written_expr(lhs, out);
                self.collect_written_expr(rhs, out);
            }
            _ => {}
        }
    }

    fn by_ref(&self, res: &CallRes) -> Vec<bool> {
        match res {
            CallRes::Direct(d) => self.index.functions.get(d).map(|f| f.by_ref.clone()).unwrap_or_default(),
            CallRes::Method(d) => d
                .split_once("::")
                .and_then(|(c, m)| self.index.class(c).and_then(|c| c.methods.get(m)))
                .map(|m| m.by_ref.clone())
                .unwrap_or_default(),
            CallRes::Virtual { class, slot } => {
                self.index.lookup_method(class, slot).map(|m| m.by_ref.clone()).unwrap_or_default()
            }
            _ => Vec::new(),
        }
    }

    /// Evaluate a condition, forking over its feasible truth values.
    fn cond(&mut self, e: &Expr, st: &mut State) -> Res<bool> {
        match &e.peel().kind {
            ExprKind::Unary { op: UnOp::Not, operand } => return Ok(!self.cond(operand, st)?),
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => return Ok(self.cond(lhs, st)? && self.cond(rhs, st)?),
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => return Ok(self.cond(lhs, st)? || self.cond(rhs, st)?),
            _ => {}
        }
        let v = self.eval(e, st)?;
        let (can_true, can_false) = match v {
            AbsVal::Bool(Some(b)) => (b, !b),
            AbsVal::Int(i) => (i.lo != 0 || i.hi != 0, i.contains(0)),
            _ => (true, true),
        };
        let mut options = Vec::new();
        for (t, possible) in [(true, can_true), (false, can_false)] {
            if possible {
                if let Some(s) = self.refine(st, e, t) {
                    options.push((t, s));
                }
            }
        }
        if options.is_empty() {
            return Err(Stop::Infeasible);
        }
        let i = self.fork(options.len());
        let (t, s) = options.swap_remove(i);
        *st = s;
        Ok(t)
    }

    /// State narrowed by `e` having truth `t`; `None` when infeasible.
    fn refine(&self, st: &State, e: &Expr, t: bool) -> Option<State> {
        let e = e.peel();
        let mut out = st.clone();
        match &e.kind {
            ExprKind::Name { name, res: NameRes::Local } => {
                let (ty, v) = out.locals.get_mut(name)?;
                match v {
                    AbsVal::Int(i) => *v = AbsVal::Int(i.refine_truthy(t)?),
                    AbsVal::Bool(None) => *v = AbsVal::Bool(Some(t)),
                    AbsVal::Bool(Some(b)) if *b != t => return None,
                    _ => {}
                }
                let _ = ty;
            }
            ExprKind::Binary { op, lhs, rhs } if op.is_compare() => {
                if let Some((name, c, op)) = local_vs_const(lhs, rhs, *op).or_else(|| local_vs_const(rhs, lhs, flip(*op))) {
                    if let Some((_, AbsVal::Int(i))) = out.locals.get(&name) {
                        let r = i.refine(op, c, t)?;
                        out.locals.get_mut(&name).unwrap().1 = AbsVal::Int(r);
                    }
                } else if let Some((name, tag, eq)) = tag_test(lhs, rhs, *op).or_else(|| tag_test(rhs, lhs, *op)) {
                    if let Some((_, AbsVal::Var { tags, tainted })) = out.locals.get(&name) {
                        let keep = eq == t;
                        let tags = if keep { tags.intersect(TagSet::only(tag))? } else { tags.without(tag)? };
                        let tainted = *tainted;
                        out.locals.get_mut(&name).unwrap().1 = AbsVal::Var { tags, tainted };
                    }
                }
            }
            ExprKind::Is { class, operand } => {
                if let ExprKind::Name { name, res: NameRes::Local } = &operand.peel().kind {
                    if let Some((_, AbsVal::Obj(set))) = out.locals.get(name) {
                        let allowed = self.index.visible_subclasses(&self.unit.name, class);
                        let narrowed: BTreeSet<String> =
                            set.iter().filter(|c| allowed.contains(*c) == t).cloned().collect();
                        if narrowed.is_empty() {
                            return None;
                        }
                        out.locals.get_mut(name).unwrap().1 = AbsVal::Obj(narrowed);
                    }
                }
            }
            _ => {}
        }
        Some(out)
    }

    fn eval(&mut self, e: &Expr, st: &mut State) -> Res<AbsVal> {
        Ok(match &e.kind {
            ExprKind::Int(v) => AbsVal::Int(Interval::konst(*v)),
            ExprKind::Bool(b) => AbsVal::Bool(Some(*b)),
            ExprKind::TagLit(t) => AbsVal::Tag(TagSet::only(*t)),
            ExprKind::This => st.locals.get("this").map(|(_, v)| v.clone()).unwrap_or(AbsVal::Void),
            ExprKind::Name { name, res } => match res {
                NameRes::Local => match st.locals.get(name) {
                    Some((_, v)) => v.clone(),
                    None => self.top(&e.ty),
                },
                NameRes::Field(decl) => self.member_read(decl, true, e.id, &e.ty, st),
                NameRes::Global | NameRes::Unresolved => self.top(&e.ty),
            },
            ExprKind::Field { object, field, .. } => {
                let is_this = matches!(object.peel().kind, ExprKind::This);
                self.eval(object, st)?;
                match field {
                    Some(decl) => self.member_read(decl, is_this, e.id, &e.ty, st),
                    None => self.top(&e.ty),
                }
            }
            ExprKind::Call { .. } => self.call(e, st)?,
            ExprKind::New { class, args } => {
                let by_ref = self.index.class(class).and_then(|c| c.ctor.clone()).map(|c| c.1).unwrap_or_default();
                let argv = self.eval_args(args, &by_ref, st)?;
                let obj = AbsVal::Obj(BTreeSet::from([class.clone()]));
                self.construct(class, obj.clone(), argv, e.id, st)?;
                obj
            }
            ExprKind::FnRef { .. } => AbsVal::Fn,
            ExprKind::Unary { op: UnOp::Not, operand } => match self.eval(operand, st)? {
                AbsVal::Bool(b) => AbsVal::Bool(b.map(|b| !b)),
                AbsVal::Int(i) => AbsVal::Bool(if !i.contains(0) {
                    Some(false)
                } else {
                    i.singleton().map(|_| true)
                }),
                _ => AbsVal::Bool(None),
            },
            ExprKind::Unary { op: UnOp::Neg, operand } => {
                let v = self.eval(operand, st)?;
                match (v, e.ty.int()) {
                    (AbsVal::Int(i), Some(t)) => AbsVal::Int(Interval::arith(BinOp::Sub, Interval::konst(0), i, t)),
                    _ => self.top(&e.ty),
                }
            }
            ExprKind::Binary { op: BinOp::And | BinOp::Or, .. } => AbsVal::Bool(Some(self.cond(e, st)?)),
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs, st)?;
                let b = self.eval(rhs, st)?;
                binary(*op, &a, &b, &e.ty).unwrap_or_else(|| self.top(&e.ty))
            }
            ExprKind::Downcast { class, operand } => {
                let v = self.eval(operand, st)?;
                let AbsVal::Obj(possible) = v else { return Ok(self.top(&e.ty)) };
                let allowed = self.index.visible_subclasses(&self.unit.name, class);
                let text = print_expr(e);
                self.emit(e.id, Event::Downcast { class, possible: &possible, allowed: &allowed, text: &text });
                let ok: BTreeSet<String> = possible.intersection(&allowed).cloned().collect();
                if ok.is_empty() {
                    return Err(Stop::Infeasible);
                }
                AbsVal::Obj(ok)
            }
            ExprKind::Is { class, operand } => {
                let v = self.eval(operand, st)?;
                let AbsVal::Obj(possible) = v else { return Ok(AbsVal::Bool(None)) };
                let allowed = self.index.visible_subclasses(&self.unit.name, class);
                AbsVal::Bool(if possible.is_subset(&allowed) {
                    Some(true)
                } else if possible.is_disjoint(&allowed) {
                    Some(false)
                } else {
                    None
                })
            }
            ExprKind::Cast { to, operand } => {
                let v = self.eval(operand, st)?;
                self.convert(v, &operand.ty, to, e.id, operand)
            }
            ExprKind::Convert { to, operand } => {
                let v = self.eval(operand, st)?;
                self.convert(v, &operand.ty, to, operand.id, operand)
            }
        })
    }

    fn convert(&mut self, v: AbsVal, from: &Type, to: &Type, at: NodeId, operand: &Expr) -> AbsVal {
        match (v, from, to) {
            (AbsVal::Int(i), Type::Int(f), Type::Int(t)) => {
                let text = print_expr(operand);
                self.emit(at, Event::Conversion { from: *f, to: *t, value: i, text: &text });
                AbsVal::Int(i.convert(*f, *t))
            }
            (v @ (AbsVal::Obj(_) | AbsVal::Fn), _, _) => v,
            _ => self.top(to),
        }
    }

    /// Evaluate call arguments. Reference arguments are places and are not
    /// read; their current value (if known) is passed along.
    fn eval_args(&mut self, args: &[Expr], by_ref: &[bool], st: &mut State) -> Res<Vec<(AbsVal, Option<String>)>> {
        let mut out = Vec::new();
        for (i, a) in args.iter().enumerate() {
            if by_ref.get(i).copied().unwrap_or(false) {
                match &a.kind {
                    ExprKind::Name { name, res: NameRes::Local } => {
                        let v = st.locals.get(name).map(|(_, v)| v.clone()).unwrap_or_else(|| self.top(&a.ty));
                        out.push((v, Some(name.clone())));
                    }
                    ExprKind::Field { object, .. } => {
                        if !matches!(object.peel().kind, ExprKind::This) {
                            self.eval(object, st)?;
                        }
                        out.push((self.top(&a.ty), None));
                    }
                    _ => out.push((self.top(&a.ty), None)),
                }
            } else {
                out.push((self.eval(a, st)?, None));
            }
        }
        Ok(out)
    }

    fn call(&mut self, e: &Expr, st: &mut State) -> Res<AbsVal> {
        let ExprKind::Call { callee, args, res } = &e.kind else { unreachable!() };
        let by_ref = self.by_ref(res);
        match res {
            CallRes::Builtin(b) => {
                let argv = self.eval_args(args, &[], st)?;
                Ok(self.builtin(*b, e, &argv))
            }
            CallRes::Direct(d) => {
                let argv = self.eval_args(args, &by_ref, st)?;
                self.invoke(d, None, argv, e, st)
            }
            CallRes::Method(d) => {
                let recv = self.receiver(callee, st)?;
                let argv = self.eval_args(args, &by_ref, st)?;
                self.invoke(d, Some(recv), argv, e, st)
            }
            CallRes::Virtual { .. } => {
                self.receiver(callee, st)?;
                let argv = self.eval_args(args, &by_ref, st)?;
                Ok(self.opaque(&argv, &e.ty, st))
            }
            CallRes::Indirect | CallRes::Unresolved => {
                self.eval(callee, st)?;
                let argv = self.eval_args(args, &[], st)?;
                Ok(self.opaque(&argv, &e.ty, st))
            }
        }
    }

    fn receiver(&mut self, callee: &Expr, st: &mut State) -> Res<AbsVal> {
        match &callee.kind {
            ExprKind::Field { object, .. } => self.eval(object, st),
            _ => Ok(st.locals.get("this").map(|(_, v)| v.clone()).unwrap_or(AbsVal::Void)),
        }
    }

    fn builtin(&mut self, b: Builtin, e: &Expr, argv: &[(AbsVal, Option<String>)]) -> AbsVal {
        let ret = b.signature().ret;
        match b {
            Builtin::ExternInput => AbsVal::Var { tags: TagSet::ALL, tainted: true },
            Builtin::TagOf => match &argv[0].0 {
                AbsVal::Var { tags, .. } => AbsVal::Tag(*tags),
                _ => AbsVal::Tag(TagSet::ALL),
            },
            Builtin::AsInt | Builtin::AsInt8 | Builtin::AsBool | Builtin::AsRef => {
                let (tags, tainted) = match &argv[0].0 {
                    AbsVal::Var { tags, tainted } => (*tags, *tainted),
                    _ => (TagSet::ALL, true),
                };
                let expected = b.accessor_tag().unwrap();
                let text = print_expr(e);
                self.emit(e.id, Event::VarAccess { builtin: b, expected, tags, tainted, text: &text });
                self.top(&ret)
            }
            Builtin::Alloc | Builtin::ReadBuf => {
                let k = b.size_param().unwrap();
                let value = argv[k].0.interval().unwrap_or(Interval::full(IntTy::I32));
                let text = print_expr(e);
                self.emit(e.id, Event::SizeSink { builtin: b, value, text: &text });
                self.top(&ret)
            }
        }
    }

    /// Call with no visible body: member state of `this` is forgotten and
    /// locals passed by reference become unknown.
    fn opaque(&mut self, argv: &[(AbsVal, Option<String>)], ret: &Type, st: &mut State) -> AbsVal {
        st.this_fields.clear();
        for (_, local) in argv {
            if let Some(name) = local {
                if let Some((ty, _)) = st.locals.get(name) {
                    let ty = ty.clone();
                    let top = self.top(&ty);
                    st.locals.insert(name.clone(), (ty, top));
                }
            }
        }
        self.top(ret)
    }

    /// Call a known function, inlining it when its body is in this unit and
    /// the depth limit allows.
    fn invoke(
        &mut self,
        decl: &str,
        recv: Option<AbsVal>,
        argv: Vec<(AbsVal, Option<String>)>,
        site: &Expr,
        st: &mut State,
    ) -> Res<AbsVal> {
        match self.fns.get(decl).copied() {
            Some(f) if self.depth() < MAX_INLINE_DEPTH => self.inline(f, recv, argv, site.id, st),
            _ => Ok(self.opaque(&argv, &site.ty, st)),
        }
    }

    fn inline(
        &mut self,
        f: &'a FnDecl,
        recv: Option<AbsVal>,
        argv: Vec<(AbsVal, Option<String>)>,
        site: NodeId,
        st: &mut State,
    ) -> Res<AbsVal> {
        let mut locals = HashMap::new();
        for (p, (v, _)) in f.params.iter().zip(&argv) {
            locals.insert(p.name.clone(), (p.ty.clone(), v.clone()));
        }
        if let (Some(r), Some(c)) = (recv, f.class()) {
            locals.insert("this".into(), (Type::Class(c.to_string()), r));
        }
        let saved_locals = std::mem::replace(&mut st.locals, locals);
        let saved_fields = std::mem::take(&mut st.this_fields);
        if self.depth() == 0 {
            self.root_site = Some(self.unit.src_loc(site));
        }
        self.frames.push(f.decl_id());
        let ret = self.enter(f, st, site)?;
        self.frames.pop();
        if self.depth() == 0 {
            self.root_site = None;
        }
        let callee_locals = std::mem::replace(&mut st.locals, saved_locals);
        drop(saved_fields);
        st.this_fields.clear();
        for (p, (_, local)) in f.params.iter().zip(&argv) {
            if let (true, Some(name)) = (p.by_ref, local) {
                if let (Some((_, v)), Some(slot)) = (callee_locals.get(&p.name), st.locals.get_mut(name)) {
                    slot.1 = v.clone();
                }
            }
        }
        Ok(ret)
    }

    /// Run the constructor chain of `class` on `this`.
    fn construct(
        &mut self,
        class: &str,
        this: AbsVal,
        argv: Vec<(AbsVal, Option<String>)>,
        site: NodeId,
        st: &mut State,
    ) -> Res<()> {
        let Some(info) = self.index.class(class) else { return Ok(()) };
        if info.ctor.is_none() {
            // implicit constructor: only the base constructor runs
            if let Some(base) = info.base.clone() {
                return self.construct(&base, this, argv, site, st);
            }
            return Ok(());
        }
        let decl = info.ctor_decl();
        match self.fns.get(&decl).copied() {
            Some(f) if self.depth() < MAX_INLINE_DEPTH => {
                self.inline(f, Some(this), argv, site, st)?;
            }
            _ => {
                self.opaque(&argv, &Type::Void, st);
            }
        }
        Ok(())
    }
}

/// `(local, constant, op)` when `l op r` compares a local with a literal
/// through value-preserving conversions only.
fn local_vs_const(l: &Expr, r: &Expr, op: BinOp) -> Option<(String, i64, BinOp)> {
    let name = preserved_local(l)?;
    let ExprKind::Int(c) = r.peel().kind else { return None };
    Some((name, c, op))
}

fn preserved_local(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprKind::Name { name, res: NameRes::Local } if e.ty.int().is_some() => Some(name.clone()),
        ExprKind::Convert { to: Type::Int(to), operand } => match operand.ty.int() {
            Some(from) if from.widens_to(*to) => preserved_local(operand),
            _ => None,
        },
        _ => None,
    }
}

/// `(local, tag, is_eq)` for `tag_of(local) == Tag` / `!=`.
fn tag_test(l: &Expr, r: &Expr, op: BinOp) -> Option<(String, Tag, bool)> {
    let eq = match op {
        BinOp::Eq => true,
        BinOp::Ne => false,
        _ => return None,
    };
    let ExprKind::Call { args, res: CallRes::Builtin(Builtin::TagOf), .. } = &l.peel().kind else { return None };
    let ExprKind::Name { name, res: NameRes::Local } = &args.first()?.peel().kind else { return None };
    let ExprKind::TagLit(t) = r.peel().kind else { return None };
    Some((name.clone(), t, eq))
}

fn binary(op: BinOp, a: &AbsVal, b: &AbsVal, ty: &Type) -> Option<AbsVal> {
    match (a, b) {
        (AbsVal::Int(x), AbsVal::Int(y)) => {
            if op.is_arith() {
                Some(AbsVal::Int(Interval::arith(op, *x, *y, ty.int()?)))
            } else {
                Some(AbsVal::Bool(Interval::compare(op, *x, *y)))
            }
        }
        (AbsVal::Bool(x), AbsVal::Bool(y)) => {
            let same = match (x, y) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            };
            eq_result(op, same)
        }
        (AbsVal::Tag(x), AbsVal::Tag(y)) => {
            let same = if x.intersect(*y).is_none() {
                Some(false)
            } else if x == y && x.tags().len() == 1 {
                Some(true)
            } else {
                None
            };
            eq_result(op, same)
        }
        _ => None,
    }
}

fn eq_result(op: BinOp, same: Option<bool>) -> Option<AbsVal> {
    match op {
        BinOp::Eq => Some(AbsVal::Bool(same)),
        BinOp::Ne => Some(AbsVal::Bool(same.map(|s| !s))),
        _ => None,
    }
}
