//! Concrete interpreter used as ground truth for the analyzer.
//!
//! Every `extern_input()` call is a choice point over a finite input
//! universe; executions are enumerated depth-first until all valuations are
//! covered or the input budget runs out. Each object field carries an
//! initialized bit. The interpreter shares the language semantics of the
//! engine (wrapping arithmetic, division by zero yields 0, a failed downcast
//! traps, a wrong-tag accessor yields a default) but none of its code.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::frontend::ProgramAst;

/// Integers an input of tag `Int` may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Universe {
    /// Every value in [-128, 127].
    I8,
    /// Sixteen boundary values spread over the i32 range.
    Sample,
}

pub const SAMPLE: [i64; 16] = [
    i32::MIN as i64,
    -65536,
    -129,
    -128,
    -2,
    -1,
    0,
    1,
    2,
    7,
    127,
    128,
    255,
    256,
    65535,
    i32::MAX as i64,
];

impl Universe {
    pub fn ints(self) -> Vec<i64> {
        match self {
            Universe::I8 => (-128..=127).collect(),
            Universe::Sample => SAMPLE.to_vec(),
        }
    }

    /// All input values: one per integer, both booleans, and a reference.
    pub fn inputs(self) -> Vec<Input> {
        let mut v: Vec<Input> = self.ints().into_iter().map(Input::Int).collect();
        v.extend([Input::Bool(false), Input::Bool(true), Input::Ref]);
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Input {
    Int(i64),
    Bool(bool),
    Ref,
}

impl Input {
    fn tag(self) -> Tag {
        match self {
            Input::Int(_) => Tag::Int,
            Input::Bool(_) => Tag::Bool,
            Input::Ref => Tag::Ref,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub universe: Universe,
    /// Maximum number of executions.
    pub input_budget: u64,
    /// Maximum statements plus calls per execution.
    pub step_budget: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { universe: Universe::Sample, input_budget: 100_000, step_budget: 100_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Site {
    pub loc: SrcLoc,
    /// Function executing when the defect occurred.
    pub function: DeclId,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UninitRead {
    pub field: DeclId,
    pub site: Site,
    /// Active frames, entry first.
    pub chain: Vec<DeclId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionFacts {
    pub uninit_reads: BTreeSet<UninitRead>,
    /// `as_*` accessor applied to an input of another tag.
    pub bad_tag_accesses: BTreeSet<Site>,
    /// Downcast of an object that is not an instance of the target class.
    pub bad_downcasts: BTreeSet<Site>,
    /// Negative value converted to an unsigned type.
    pub negative_to_unsigned: BTreeSet<Site>,
    /// Negative size reaching `alloc` or `read_buf`.
    pub negative_sizes: BTreeSet<Site>,
    /// Call-site location -> dynamically dispatched targets.
    pub vcall_targets: BTreeMap<SrcLoc, BTreeSet<DeclId>>,
    /// Observed caller -> callee pairs.
    pub call_edges: BTreeSet<(DeclId, DeclId)>,
    pub executions: u64,
    /// A budget ran out; facts may be incomplete.
    pub partial: bool,
}

impl ExecutionFacts {
    /// Defect sites of one CWE class.
    pub fn sites(&self, cwe: u16) -> BTreeSet<Site> {
        match cwe {
            457 => self.uninit_reads.iter().map(|r| r.site.clone()).collect(),
            843 => self.bad_tag_accesses.union(&self.bad_downcasts).cloned().collect(),
            195 => self.negative_to_unsigned.clone(),
            194 => self.negative_sizes.clone(),
            _ => BTreeSet::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Value {
    Int(i64),
    Bool(bool),
    Tag(Tag),
    Var(Input),
    Buf(i64),
    Obj(usize),
    Null,
    Fn(DeclId),
    Void,
}

impl Value {
    fn default_for(ty: &Type) -> Value {
        match ty {
            Type::Int(_) => Value::Int(0),
            Type::Bool => Value::Bool(false),
            Type::Var => Value::Var(Input::Int(0)),
            Type::Tag => Value::Tag(Tag::Int),
            Type::Buf => Value::Buf(0),
            Type::Class(_) | Type::Fn(_) => Value::Null,
            Type::Void | Type::Unknown => Value::Void,
        }
    }

    fn int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            Value::Bool(b) => *b as i64,
            _ => 0,
        }
    }

    fn truthy(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(v) => *v != 0,
            _ => false,
        }
    }
}

struct Object {
    class: String,
    /// `None` until first written.
    fields: HashMap<DeclId, Option<Value>>,
}

/// Why an execution stopped early.
enum Halt {
    Trap,
    OutOfSteps,
}

enum Flow {
    Normal,
    Return(Value),
}

type R<T> = Result<T, Halt>;

struct Frame {
    function: DeclId,
    this: Option<usize>,
    /// `None` marks a by-reference parameter not yet written.
    locals: HashMap<String, Option<Value>>,
}

struct Machine<'a> {
    program: &'a ProgramAst,
    fns: HashMap<DeclId, (&'a TranslationUnit, &'a FnDecl)>,
    unit: &'a TranslationUnit,
    inputs: Vec<Input>,
    trail: Vec<(usize, usize)>,
    pos: usize,
    steps: u64,
    step_budget: u64,
    heap: Vec<Object>,
    globals: HashMap<String, Value>,
    frames: Vec<Frame>,
    facts: ExecutionFacts,
}

/// Run `entries` (in order, sharing globals) over every input valuation.
pub fn oracle_interpret(program: &ProgramAst, entries: &[DeclId], cfg: &OracleConfig) -> ExecutionFacts {
    let mut fns = HashMap::new();
    for u in &program.units {
        for f in u.functions() {
            fns.insert(f.decl_id(), (u, f));
        }
    }
    let Some(first) = program.units.first() else { return ExecutionFacts::default() };
    let mut m = Machine {
        program,
        fns,
        unit: first,
        inputs: cfg.universe.inputs(),
        trail: Vec::new(),
        pos: 0,
        steps: 0,
        step_budget: cfg.step_budget.max(1),
        heap: Vec::new(),
        globals: HashMap::new(),
        frames: Vec::new(),
        facts: ExecutionFacts::default(),
    };
    loop {
        m.pos = 0;
        m.steps = 0;
        m.heap.clear();
        m.frames.clear();
        if let Err(Halt::OutOfSteps) = m.execute(entries) {
            m.facts.partial = true;
        }
        m.facts.executions += 1;
        m.trail.truncate(m.pos);
        let more = loop {
            match m.trail.last_mut() {
                None => break false,
                Some((c, n)) if *c + 1 < *n => {
                    *c += 1;
                    break true;
                }
                Some(_) => {
                    m.trail.pop();
                }
            }
        };
        if !more {
            break;
        }
        if m.facts.executions >= cfg.input_budget.max(1) {
            m.facts.partial = true;
            break;
        }
    }
    m.facts
}

impl<'a> Machine<'a> {
    fn execute(&mut self, entries: &[DeclId]) -> R<()> {
        self.init_globals()?;
        for e in entries {
            let Some(&(_, f)) = self.fns.get(e) else { continue };
            let args: Vec<Value> = f.params.iter().map(|p| Value::default_for(&p.ty)).collect();
            let this = match f.class() {
                Some(c) => Some(self.alloc(c)),
                None => None,
            };
            match self.call_fn(e, this, args.into_iter().map(Some).collect()) {
                Ok(_) | Err(Halt::Trap) => {}
                Err(h) => return Err(h),
            }
        }
        Ok(())
    }

    fn init_globals(&mut self) -> R<()> {
        self.globals.clear();
        let program = self.program;
        for u in &program.units {
            for g in u.globals() {
                self.globals.insert(g.name.clone(), Value::default_for(&g.ty));
            }
        }
        for u in &program.units {
            self.unit = u;
            self.frames.push(Frame { function: String::new(), this: None, locals: HashMap::new() });
            for g in u.globals() {
                if let Some(init) = &g.init {
                    let v = self.eval(init)?;
                    self.globals.insert(g.name.clone(), v);
                }
            }
            self.frames.pop();
        }
        Ok(())
    }

    fn choose(&mut self, n: usize) -> usize {
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

    fn step(&mut self) -> R<()> {
        self.steps += 1;
        if self.steps > self.step_budget {
            return Err(Halt::OutOfSteps);
        }
        Ok(())
    }

    fn site(&self, node: NodeId) -> Site {
        Site { loc: self.unit.src_loc(node), function: self.frame().function.clone() }
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("active frame")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames.last_mut().expect("active frame")
    }

    fn alloc(&mut self, class: &str) -> usize {
        let fields = self.program.index.all_fields(class).into_iter().map(|f| (f.decl.clone(), None)).collect();
        self.heap.push(Object { class: class.to_string(), fields });
        self.heap.len() - 1
    }

    /// Call `decl` with a fresh frame. Arguments are `None` for by-reference
    /// places that hold no value yet. Returns the result and the final
    /// parameter values.
    fn call_fn(&mut self, decl: &str, this: Option<usize>, args: Vec<Option<Value>>) -> R<(Value, Vec<Option<Value>>)> {
        self.step()?;
        let Some(&(unit, f)) = self.fns.get(decl) else { return Ok((Value::Void, args)) };
        if let Some(caller) = self.frames.last() {
            if !caller.function.is_empty() {
                self.facts.call_edges.insert((caller.function.clone(), decl.to_string()));
            }
        }
        let locals = f.params.iter().map(|p| p.name.clone()).zip(args).collect();
        let saved = std::mem::replace(&mut self.unit, unit);
        self.frames.push(Frame { function: decl.to_string(), this, locals });
        let result = self.body(f, this);
        let frame = self.frames.pop().expect("frame");
        self.unit = saved;
        let v = result?;
        let out = f.params.iter().map(|p| frame.locals.get(&p.name).cloned().flatten()).collect();
        Ok((v, out))
    }

    fn body(&mut self, f: &FnDecl, this: Option<usize>) -> R<Value> {
        if let (FnKind::Ctor { class }, Some(obj)) = (&f.kind, this) {
            if let Some(base) = self.program.index.class(class).and_then(|c| c.base.clone()) {
                self.construct(&base, obj, Vec::new())?;
            }
        }
        match self.block(&f.body)? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => Ok(Value::Void),
        }
    }

    /// Run the nearest explicit constructor of `class` on `obj`.
    fn construct(&mut self, class: &str, obj: usize, args: Vec<Option<Value>>) -> R<Vec<Option<Value>>> {
        let mut cur = Some(class.to_string());
        while let Some(c) = cur {
            let info = self.program.index.class(&c).expect("checked class");
            if info.ctor.is_some() {
                return Ok(self.call_fn(&info.ctor_decl(), Some(obj), args)?.1);
            }
            cur = info.base.clone();
        }
        Ok(args)
    }

    fn block(&mut self, b: &Block) -> R<Flow> {
        for s in &b.stmts {
            if let Flow::Return(v) = self.stmt(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> R<Flow> {
        self.step()?;
        match &s.kind {
            StmtKind::Let { name, init, .. } => {
                let v = self.eval(init)?;
                self.frame_mut().locals.insert(name.clone(), Some(v));
            }
            StmtKind::Assign { target, value } => {
                let v = self.eval(value)?;
                self.store(target, v)?;
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.eval(cond)?.truthy() {
                    return self.block(then_block);
                } else if let Some(b) = else_block {
                    return self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval(cond)?.truthy() {
                    self.step()?;
                    if let Flow::Return(v) = self.block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::Void,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
        }
        Ok(Flow::Normal)
    }

    fn object(&self, v: &Value) -> R<usize> {
        match v {
            Value::Obj(o) => Ok(*o),
            _ => Err(Halt::Trap),
        }
    }

    fn this(&self) -> R<usize> {
        self.frame().this.ok_or(Halt::Trap)
    }

    fn read_field(&mut self, obj: usize, decl: &str, node: NodeId, ty: &Type) -> Value {
        match self.heap[obj].fields.get(decl).cloned().flatten() {
            Some(v) => v,
            None => {
                let read = UninitRead {
                    field: decl.to_string(),
                    site: self.site(node),
                    chain: self.frames.iter().map(|f| f.function.clone()).collect(),
                };
                self.facts.uninit_reads.insert(read);
                Value::default_for(ty)
            }
        }
    }

    fn store(&mut self, target: &Expr, v: Value) -> R<()> {
        match &target.kind {
            ExprKind::Name { name, res: NameRes::Local } => {
                self.frame_mut().locals.insert(name.clone(), Some(v));
            }
            ExprKind::Name { name, res: NameRes::Global } => {
                self.globals.insert(name.clone(), v);
            }
            ExprKind::Name { res: NameRes::Field(decl), .. } => {
                let o = self.this()?;
                self.heap[o].fields.insert(decl.clone(), Some(v));
            }
            ExprKind::Field { object, field: Some(decl), .. } => {
                let ov = self.eval(object)?;
                let o = self.object(&ov)?;
                self.heap[o].fields.insert(decl.clone(), Some(v));
            }
            _ => {}
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr) -> R<Value> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::TagLit(t) => Value::Tag(*t),
            ExprKind::This => Value::Obj(self.this()?),
            ExprKind::Name { name, res } => match res {
                NameRes::Local => self.frame().locals.get(name).cloned().flatten().unwrap_or_else(|| Value::default_for(&e.ty)),
                NameRes::Global => self.globals.get(name).cloned().unwrap_or_else(|| Value::default_for(&e.ty)),
                NameRes::Field(decl) => {
                    let o = self.this()?;
                    self.read_field(o, decl, e.id, &e.ty)
                }
                NameRes::Unresolved => Value::default_for(&e.ty),
            },
            ExprKind::Field { object, field, .. } => {
                let ov = self.eval(object)?;
                let o = self.object(&ov)?;
                match field {
                    Some(decl) => self.read_field(o, decl, e.id, &e.ty),
                    None => Value::default_for(&e.ty),
                }
            }
            ExprKind::Call { .. } => self.call(e)?,
            ExprKind::New { class, args } => {
                let by_ref = self.program.index.class(class).and_then(|c| c.ctor.clone()).map(|c| c.1).unwrap_or_default();
                let argv = self.args(args, &by_ref)?;
                let obj = self.alloc(class);
                let out = self.construct(class, obj, argv.iter().map(|(v, _)| v.clone()).collect())?;
                self.write_back(&argv, out)?;
                Value::Obj(obj)
            }
            ExprKind::FnRef { name } => Value::Fn(name.clone()),
            ExprKind::Unary { op: UnOp::Not, operand } => Value::Bool(!self.eval(operand)?.truthy()),
            ExprKind::Unary { op: UnOp::Neg, operand } => {
                let v = self.eval(operand)?.int();
                Value::Int(wrap(&e.ty, 0i64.wrapping_sub(v)))
            }
            ExprKind::Binary { op: BinOp::And, lhs, rhs } => {
                Value::Bool(self.eval(lhs)?.truthy() && self.eval(rhs)?.truthy())
            }
            ExprKind::Binary { op: BinOp::Or, lhs, rhs } => {
                Value::Bool(self.eval(lhs)?.truthy() || self.eval(rhs)?.truthy())
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                binary(*op, &a, &b, &e.ty)
            }
            ExprKind::Downcast { class, operand } => {
                let v = self.eval(operand)?;
                let o = self.object(&v)?;
                if !self.program.index.is_subclass(&self.heap[o].class, class) {
                    let s = self.site(e.id);
                    self.facts.bad_downcasts.insert(s);
                    return Err(Halt::Trap);
                }
                v
            }
            ExprKind::Is { class, operand } => match self.eval(operand)? {
                Value::Obj(o) => Value::Bool(self.program.index.is_subclass(&self.heap[o].class, class)),
                _ => Value::Bool(false),
            },
            ExprKind::Cast { to, operand } => {
                let v = self.eval(operand)?;
                self.convert(v, &operand.ty, to, e.id)
            }
            ExprKind::Convert { to, operand } => {
                let v = self.eval(operand)?;
                self.convert(v, &operand.ty, to, operand.id)
            }
        })
    }

    fn convert(&mut self, v: Value, from: &Type, to: &Type, at: NodeId) -> Value {
        match (v, from, to) {
            (Value::Int(x), Type::Int(f), Type::Int(t)) => {
                if f.signed() && !t.signed() && x < 0 {
                    let s = self.site(at);
                    self.facts.negative_to_unsigned.insert(s);
                }
                Value::Int(t.wrap(x))
            }
            (v, _, _) => v,
        }
    }

    /// Evaluate arguments; by-reference ones yield their place's current
    /// contents (`None` when uninitialized) without counting as a read.
    fn args(&mut self, args: &[Expr], by_ref: &[bool]) -> R<Vec<(Option<Value>, Option<Place>)>> {
        let mut out = Vec::new();
        for (i, a) in args.iter().enumerate() {
            if by_ref.get(i).copied().unwrap_or(false) {
                let place = match &a.kind {
                    ExprKind::Name { name, res: NameRes::Local } => Place::Local(name.clone()),
                    ExprKind::Name { name, res: NameRes::Global } => Place::Global(name.clone()),
                    ExprKind::Name { res: NameRes::Field(d), .. } => Place::Field(self.this()?, d.clone()),
                    ExprKind::Field { object, field: Some(d), .. } => {
                        let ov = self.eval(object)?;
                        Place::Field(self.object(&ov)?, d.clone())
                    }
                    _ => {
                        let v = self.eval(a)?;
                        out.push((Some(v), None));
                        continue;
                    }
                };
                let cur = match &place {
                    Place::Local(n) => self.frame().locals.get(n).cloned().flatten(),
                    Place::Global(n) => self.globals.get(n).cloned(),
                    Place::Field(o, d) => self.heap[*o].fields.get(d).cloned().flatten(),
                };
                out.push((cur, Some(place)));
            } else {
                out.push((Some(self.eval(a)?), None));
            }
        }
        Ok(out)
    }

    /// Copy final by-reference parameter values back to their places.
    fn write_back(&mut self, argv: &[(Option<Value>, Option<Place>)], out: Vec<Option<Value>>) -> R<()> {
        for ((_, place), v) in argv.iter().zip(out) {
            let (Some(place), Some(v)) = (place, v) else { continue };
            match place {
                Place::Local(n) => {
                    self.frame_mut().locals.insert(n.clone(), Some(v));
                }
                Place::Global(n) => {
                    self.globals.insert(n.clone(), v);
                }
                Place::Field(o, d) => {
                    self.heap[*o].fields.insert(d.clone(), Some(v));
                }
            }
        }
        Ok(())
    }

    fn receiver(&mut self, callee: &Expr) -> R<usize> {
        match &callee.kind {
            ExprKind::Field { object, .. } => {
                let v = self.eval(object)?;
                self.object(&v)
            }
            _ => self.this(),
        }
    }

    fn by_ref_of(&self, decl: &str) -> Vec<bool> {
        self.fns.get(decl).map(|(_, f)| f.params.iter().map(|p| p.by_ref).collect()).unwrap_or_default()
    }

    fn call(&mut self, e: &Expr) -> R<Value> {
        let ExprKind::Call { callee, args, res } = &e.kind else { unreachable!() };
        match res {
            CallRes::Builtin(b) => {
                let mut argv = Vec::new();
                for a in args {
                    argv.push(self.eval(a)?);
                }
                self.builtin(*b, e.id, &argv)
            }
            CallRes::Direct(d) => {
                let this = if d.contains("::") { self.frame().this } else { None };
                self.invoke(d, this, args)
            }
            CallRes::Method(d) => {
                let o = self.receiver(callee)?;
                self.invoke(d, Some(o), args)
            }
            CallRes::Virtual { slot, .. } => {
                let o = self.receiver(callee)?;
                let dynamic = self.heap[o].class.clone();
                let target = self.program.index.lookup_method(&dynamic, slot).map(|m| m.decl.clone()).ok_or(Halt::Trap)?;
                let site = self.unit.src_loc(e.id);
                self.facts.vcall_targets.entry(site).or_default().insert(target.clone());
                self.invoke(&target, Some(o), args)
            }
            CallRes::Indirect => {
                let Value::Fn(target) = self.eval(callee)? else { return Err(Halt::Trap) };
                self.invoke(&target, None, args)
            }
            CallRes::Unresolved => Ok(Value::default_for(&e.ty)),
        }
    }

    fn invoke(&mut self, decl: &str, this: Option<usize>, args: &[Expr]) -> R<Value> {
        let by_ref = self.by_ref_of(decl);
        let argv = self.args(args, &by_ref)?;
        let (v, out) = self.call_fn(decl, this, argv.iter().map(|(v, _)| v.clone()).collect())?;
        self.write_back(&argv, out)?;
        Ok(v)
    }

    fn builtin(&mut self, b: Builtin, node: NodeId, argv: &[Value]) -> R<Value> {
        Ok(match b {
            Builtin::ExternInput => {
                let i = self.choose(self.inputs.len());
                Value::Var(self.inputs[i])
            }
            Builtin::TagOf => match &argv[0] {
                Value::Var(i) => Value::Tag(i.tag()),
                _ => Value::Tag(Tag::Int),
            },
            Builtin::AsInt | Builtin::AsInt8 | Builtin::AsBool | Builtin::AsRef => {
                let input = match &argv[0] {
                    Value::Var(i) => *i,
                    _ => Input::Int(0),
                };
                let expected = b.accessor_tag().expect("accessor");
                if input.tag() != expected {
                    let s = self.site(node);
                    self.facts.bad_tag_accesses.insert(s);
                    return Ok(Value::default_for(&b.signature().ret));
                }
                match (b, input) {
                    (Builtin::AsInt, Input::Int(v)) => Value::Int(IntTy::I32.wrap(v)),
                    (Builtin::AsInt8, Input::Int(v)) => Value::Int(IntTy::I8.wrap(v)),
                    (Builtin::AsBool, Input::Bool(v)) => Value::Bool(v),
                    _ => Value::Buf(0),
                }
            }
            Builtin::Alloc | Builtin::ReadBuf => {
                let k = b.size_param().expect("sink");
                let n = argv[k].int();
                if n < 0 {
                    let s = self.site(node);
                    self.facts.negative_sizes.insert(s);
                }
                match b {
                    Builtin::Alloc => Value::Buf(n.max(0)),
                    _ => Value::Int(0),
                }
            }
        })
    }
}

enum Place {
    Local(String),
    Global(String),
    Field(usize, DeclId),
}

fn wrap(ty: &Type, v: i64) -> i64 {
    match ty.int() {
        Some(t) => t.wrap(v),
        None => v,
    }
}

fn binary(op: BinOp, a: &Value, b: &Value, ty: &Type) -> Value {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => {
            let (x, y) = (*x, *y);
            match op {
                BinOp::Add => Value::Int(wrap(ty, x.wrapping_add(y))),
                BinOp::Sub => Value::Int(wrap(ty, x.wrapping_sub(y))),
                BinOp::Mul => Value::Int(wrap(ty, x.wrapping_mul(y))),
                BinOp::Div => Value::Int(if y == 0 { 0 } else { wrap(ty, x.wrapping_div(y)) }),
                BinOp::Rem => Value::Int(if y == 0 { 0 } else { wrap(ty, x.wrapping_rem(y)) }),
                BinOp::Eq => Value::Bool(x == y),
                BinOp::Ne => Value::Bool(x != y),
                BinOp::Lt => Value::Bool(x < y),
                BinOp::Le => Value::Bool(x <= y),
                BinOp::Gt => Value::Bool(x > y),
                BinOp::Ge => Value::Bool(x >= y),
                BinOp::And | BinOp::Or => Value::Bool(false),
            }
        }
        _ => match op {
            BinOp::Eq => Value::Bool(a == b),
            BinOp::Ne => Value::Bool(a != b),
            _ => Value::default_for(ty),
        },
    }
}
