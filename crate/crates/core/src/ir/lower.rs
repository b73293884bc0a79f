use super::*;
use crate::frontend::ast::*;
use crate::frontend::index::ProgramIndex;

/// Lower a checked unit. Every member read becomes one `load`, every member
/// write one `store`; constructors lower like methods.
pub fn lower_unit(unit: &TranslationUnit, index: &ProgramIndex) -> IrModule {
    let mut classes = Vec::new();
    for c in unit.classes() {
        classes.push(IrClass {
            name: c.name.clone(),
            unit: unit.name.clone(),
            base: c.base.clone(),
            fields: index.all_fields(&c.name).iter().map(|f| f.decl.clone()).collect(),
            vtable: index.vtable(&c.name),
            ctor: c.ctor.as_ref().map(|k| k.decl_id()),
        });
    }
    let mut globals = Vec::new();
    for g in unit.globals() {
        let init = match (&g.ty, &g.init) {
            (Type::Fn(_), Some(e)) => Some(fn_src(e, None)),
            _ => None,
        };
        globals.push(IrGlobal { name: g.name.clone(), ty: g.ty.to_string(), init });
    }
    let functions = unit.functions().into_iter().map(|f| Lowerer::new(unit, index, f).run()).collect();
    IrModule { unit: unit.name.clone(), functions, classes, globals }
}

/// Classify a function-valued expression.
fn fn_src(e: &Expr, f: Option<&FnDecl>) -> FnSrc {
    let e = e.peel();
    match &e.kind {
        ExprKind::FnRef { name } => FnSrc::Const { target: name.clone() },
        ExprKind::Cast { operand, .. } => match &operand.peel().kind {
            ExprKind::FnRef { name } => FnSrc::Cast { target: name.clone() },
            _ => FnSrc::Other,
        },
        ExprKind::Name { name, res: NameRes::Global } => FnSrc::Var { var: format!("global:{name}") },
        ExprKind::Name { name, res: NameRes::Local } => match f {
            Some(f) if !f.params.iter().any(|p| &p.name == name) => {
                FnSrc::Var { var: format!("local:{}:{name}", f.decl_id()) }
            }
            _ => FnSrc::Other,
        },
        _ => FnSrc::Other,
    }
}

struct Lowerer<'a> {
    unit: &'a TranslationUnit,
    index: &'a ProgramIndex,
    f: &'a FnDecl,
    blocks: Vec<IrBlock>,
    cur: usize,
}

impl<'a> Lowerer<'a> {
    fn new(unit: &'a TranslationUnit, index: &'a ProgramIndex, f: &'a FnDecl) -> Self {
        Lowerer { unit, index, f, blocks: vec![IrBlock { id: 0, insts: Vec::new() }], cur: 0 }
    }

    fn pos(&self, id: NodeId) -> Pos {
        let l = self.unit.loc(id);
        Pos { line: l.line, col: l.col }
    }

    fn run(mut self) -> IrFunction {
        let f = self.f;
        if let FnKind::Ctor { class } = &f.kind {
            if let Some(base) = self.index.class(class).and_then(|c| c.base.clone()) {
                if let Some(k) = self.explicit_ctor(&base) {
                    self.emit(Op::Call { target: k, aliases: Vec::new() }, f.id);
                }
            }
        }
        self.block(&f.body);
        if !self.terminated() {
            self.emit(Op::Ret, f.body.close);
        }
        IrFunction {
            id: f.decl_id(),
            unit: self.unit.name.clone(),
            file: self.unit.file().to_string(),
            class: f.class().map(str::to_string),
            is_ctor: f.is_ctor(),
            params: f
                .params
                .iter()
                .map(|p| IrParam { name: p.name.clone(), ty: p.ty.to_string(), by_ref: p.by_ref })
                .collect(),
            ret: f.ret.to_string(),
            start: self.pos(f.id),
            end: self.pos(f.body.close),
            blocks: self.blocks,
        }
    }

    /// Nearest constructor with a body along the ancestry of `class`.
    fn explicit_ctor(&self, class: &str) -> Option<DeclId> {
        self.index.ancestry(class).iter().filter_map(|c| self.index.class(c)).find(|c| c.ctor.is_some()).map(|c| c.ctor_decl())
    }

    fn emit(&mut self, op: Op, at: NodeId) {
        let at = self.pos(at);
        self.blocks[self.cur].insts.push(Inst { op, at });
    }

    fn terminated(&self) -> bool {
        self.blocks[self.cur].insts.last().is_some_and(|i| i.op.is_terminator())
    }

    fn new_block(&mut self) -> u32 {
        let id = self.blocks.len() as u32;
        self.blocks.push(IrBlock { id, insts: Vec::new() });
        id
    }

    fn switch_to(&mut self, b: u32) {
        self.cur = b as usize;
    }

    /// Close the current block with a jump to `target` unless it already ends.
    fn jump(&mut self, target: u32, at: NodeId) {
        if !self.terminated() {
            self.emit(Op::Jump { target }, at);
        }
    }

    fn block(&mut self, b: &Block) {
        for s in &b.stmts {
            if self.terminated() {
                // unreachable code still lowers, into a block of its own
                let nb = self.new_block();
                self.switch_to(nb);
            }
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let { name, init, .. } => {
                self.expr(init);
                if matches!(init.ty, Type::Fn(_)) {
                    let var = format!("local:{}:{name}", self.f.decl_id());
                    self.emit(Op::SetFn { var, value: fn_src(init, Some(self.f)) }, s.id);
                }
            }
            StmtKind::Assign { target, value } => {
                self.expr(value);
                self.store(target, value, s.id);
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expr(cond);
                let t = self.new_block();
                let e = else_block.as_ref().map(|_| self.new_block());
                let join = self.new_block();
                self.emit(Op::Br { then: t, r#else: e.unwrap_or(join) }, cond.id);
                self.switch_to(t);
                self.block(then_block);
                self.jump(join, then_block.close);
                if let (Some(e), Some(b)) = (e, else_block) {
                    self.switch_to(e);
                    self.block(b);
                    self.jump(join, b.close);
                }
                self.switch_to(join);
            }
            StmtKind::While { cond, body } => {
                let head = self.new_block();
                self.jump(head, s.id);
                self.switch_to(head);
                self.expr(cond);
                let b = self.new_block();
                let exit = self.new_block();
                self.emit(Op::Br { then: b, r#else: exit }, cond.id);
                self.switch_to(b);
                self.block(body);
                self.jump(head, body.close);
                self.switch_to(exit);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    self.expr(e);
                }
                self.emit(Op::Ret, s.id);
            }
            StmtKind::Expr(e) => self.expr(e),
        }
    }

    fn store(&mut self, target: &Expr, value: &Expr, at: NodeId) {
        match &target.kind {
            ExprKind::Name { res: NameRes::Field(decl), .. } => {
                self.emit(Op::Store { field: decl.clone() }, target.id);
            }
            ExprKind::Field { object, field: Some(decl), .. } => {
                self.expr(object);
                self.emit(Op::Store { field: decl.clone() }, target.id);
            }
            ExprKind::Name { name, res: NameRes::Local } => {
                if let Some(i) = self.f.params.iter().position(|p| &p.name == name && p.by_ref) {
                    self.emit(Op::StoreRef { param: i }, target.id);
                }
                if matches!(target.ty, Type::Fn(_)) {
                    let var = format!("local:{}:{name}", self.f.decl_id());
                    self.emit(Op::SetFn { var, value: fn_src(value, Some(self.f)) }, at);
                }
            }
            ExprKind::Name { name, res: NameRes::Global } => {
                if matches!(target.ty, Type::Fn(_)) {
                    self.emit(Op::SetFn { var: format!("global:{name}"), value: fn_src(value, Some(self.f)) }, at);
                }
            }
            _ => {}
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Int(_)
            | ExprKind::Bool(_)
            | ExprKind::TagLit(_)
            | ExprKind::This
            | ExprKind::FnRef { .. } => {}
            ExprKind::Name { res, .. } => {
                if let NameRes::Field(decl) = res {
                    self.emit(Op::Load { field: decl.clone() }, e.id);
                }
            }
            ExprKind::Field { object, field, .. } => {
                self.expr(object);
                if let Some(decl) = field {
                    self.emit(Op::Load { field: decl.clone() }, e.id);
                }
            }
            ExprKind::Call { .. } => self.call(e),
            ExprKind::New { class, args } => {
                let by_ref = self.index.class(class).and_then(|c| c.ctor.as_ref()).map(|c| c.1.clone()).unwrap_or_default();
                let aliases = self.args(args, &by_ref);
                self.emit(Op::New { class: class.clone() }, e.id);
                if let Some(k) = self.explicit_ctor(class) {
                    self.emit(Op::Call { target: k, aliases }, e.id);
                }
            }
            ExprKind::Unary { op, operand } => {
                self.expr(operand);
                let op = match op {
                    UnOp::Not => "!",
                    UnOp::Neg => "-",
                };
                self.emit(Op::Unop { op: op.into() }, e.id);
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.expr(lhs);
                self.expr(rhs);
                self.emit(Op::Binop { op: op.symbol().into() }, e.id);
            }
            ExprKind::Downcast { class, operand } => {
                self.expr(operand);
                self.emit(Op::Cast { from: operand.ty.to_string(), to: class.clone() }, e.id);
            }
            ExprKind::Is { operand, .. } => self.expr(operand),
            ExprKind::Cast { to, operand } => {
                self.expr(operand);
                self.emit(Op::Cast { from: operand.ty.to_string(), to: to.to_string() }, e.id);
            }
            ExprKind::Convert { to, operand } => {
                self.expr(operand);
                if operand.ty != *to {
                    self.emit(Op::Cast { from: operand.ty.to_string(), to: to.to_string() }, operand.id);
                }
            }
        }
    }

    /// Lower call arguments. Reference arguments naming a member produce an
    /// alias annotation instead of a load.
    fn args(&mut self, args: &[Expr], by_ref: &[bool]) -> Vec<Alias> {
        let mut aliases = Vec::new();
        for (i, a) in args.iter().enumerate() {
            if by_ref.get(i).copied().unwrap_or(false) {
                match &a.kind {
                    ExprKind::Name { res: NameRes::Field(decl), .. } => {
                        aliases.push(Alias { param: i, field: decl.clone() });
                    }
                    ExprKind::Field { object, field: Some(decl), .. } => {
                        self.expr(object);
                        aliases.push(Alias { param: i, field: decl.clone() });
                    }
                    _ => {}
                }
            } else {
                self.expr(a);
            }
        }
        aliases
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

    fn call(&mut self, e: &Expr) {
        let ExprKind::Call { callee, args, res } = &e.kind else { return };
        let by_ref = self.by_ref(res);
        if let ExprKind::Field { object, .. } = &callee.kind {
            if matches!(res, CallRes::Method(_) | CallRes::Virtual { .. }) {
                self.expr(object);
            }
        }
        match res {
            CallRes::Builtin(b) => {
                self.args(args, &[]);
                self.emit(Op::Intrinsic { name: b.name().into() }, e.id);
            }
            CallRes::Direct(d) | CallRes::Method(d) => {
                let aliases = self.args(args, &by_ref);
                self.emit(Op::Call { target: d.clone(), aliases }, e.id);
            }
            CallRes::Virtual { class, slot } => {
                let aliases = self.args(args, &by_ref);
                self.emit(Op::Vcall { slot: slot.clone(), class: class.clone(), aliases }, e.id);
            }
            CallRes::Indirect => {
                self.expr(callee);
                self.args(args, &[]);
                self.emit(Op::Icall { callee: fn_src(callee, Some(self.f)) }, e.id);
            }
            CallRes::Unresolved => {
                self.args(args, &[]);
            }
        }
    }
}
