//! Name resolution and type checking.
//!
//! Checking mutates the AST in place: it fills every expression's `ty`,
//! resolves names and calls, and wraps implicitly converted operands in
//! `ExprKind::Convert` nodes (allocated after all parsed nodes, so a
//! re-parse of the pretty-printed unit yields the same ids).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::diag::Diagnostic;
use super::index::*;

/// Build the declaration index over `units`. `visible` must already hold
/// the import closure of every unit.
pub fn build_index(
    units: &[&TranslationUnit],
    visible: BTreeMap<String, BTreeSet<String>>,
    lenient: bool,
) -> (ProgramIndex, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut index = ProgramIndex { visible, ..Default::default() };
    // name -> (unit, file, loc) of the first definition, for conflict reporting
    let mut seen: BTreeMap<String, (String, String, Loc)> = BTreeMap::new();
    let mut claim = |diags: &mut Vec<Diagnostic>, name: String, u: &TranslationUnit, id: NodeId| -> bool {
        let loc = u.loc(id);
        if let Some((first_unit, _, _)) = seen.get(&name) {
            let msg = if *first_unit == u.name {
                format!("duplicate declaration of `{name}`")
            } else {
                format!("conflicting definition of `{name}` (also defined in unit `{first_unit}`)")
            };
            diags.push(Diagnostic::new(u.file(), loc, msg));
            false
        } else {
            seen.insert(name, (u.name.clone(), u.file().to_string(), loc));
            true
        }
    };

    for u in units {
        for d in &u.decls {
            match d {
                Decl::Import(_) => {}
                Decl::Global(g) => {
                    if reserved(&g.name) {
                        diags.push(Diagnostic::new(u.file(), u.loc(g.id), format!("`{}` is a reserved name", g.name)));
                    } else if claim(&mut diags, g.name.clone(), u, g.id) {
                        index.globals.insert(g.name.clone(), GlobalInfo { name: g.name.clone(), unit: u.name.clone(), ty: g.ty.clone() });
                    }
                }
                Decl::Function(f) => {
                    if reserved(&f.name) {
                        diags.push(Diagnostic::new(u.file(), u.loc(f.id), format!("`{}` is a reserved name", f.name)));
                    } else if claim(&mut diags, f.name.clone(), u, f.id) {
                        index.functions.insert(
                            f.name.clone(),
                            FnInfo {
                                decl: f.decl_id(),
                                unit: u.name.clone(),
                                sig: f.fn_type(),
                                by_ref: f.params.iter().map(|p| p.by_ref).collect(),
                            },
                        );
                    }
                }
                Decl::Class(c) => {
                    if reserved(&c.name) {
                        diags.push(Diagnostic::new(u.file(), u.loc(c.id), format!("`{}` is a reserved name", c.name)));
                        continue;
                    }
                    let fresh = claim(&mut diags, c.name.clone(), u, c.id);
                    let mut info = ClassInfo {
                        name: c.name.clone(),
                        unit: u.name.clone(),
                        base: c.base.clone(),
                        fields: Vec::new(),
                        methods: BTreeMap::new(),
                        method_order: Vec::new(),
                        ctor: c.ctor.as_ref().map(|k| {
                            (k.params.iter().map(|p| p.ty.clone()).collect(), k.params.iter().map(|p| p.by_ref).collect())
                        }),
                    };
                    for f in &c.fields {
                        let decl = format!("{}::{}", c.name, f.name);
                        if claim(&mut diags, decl.clone(), u, f.id) {
                            info.fields.push(FieldInfo { name: f.name.clone(), decl, ty: f.ty.clone() });
                        }
                    }
                    if let Some(k) = &c.ctor {
                        claim(&mut diags, k.decl_id(), u, k.id);
                    }
                    for m in &c.methods {
                        let decl = m.decl_id();
                        if m.name == c.name {
                            diags.push(Diagnostic::new(u.file(), u.loc(m.id), format!("method `{decl}` clashes with the constructor")));
                            continue;
                        }
                        if claim(&mut diags, decl.clone(), u, m.id) {
                            let is_virtual = matches!(m.kind, FnKind::Method { is_virtual: true, .. });
                            info.method_order.push(m.name.clone());
                            info.methods.insert(
                                m.name.clone(),
                                MethodInfo {
                                    name: m.name.clone(),
                                    decl,
                                    sig: m.fn_type(),
                                    by_ref: m.params.iter().map(|p| p.by_ref).collect(),
                                    is_virtual,
                                },
                            );
                        }
                    }
                    if fresh {
                        index.classes.insert(c.name.clone(), info);
                    }
                }
            }
        }
    }

    // hierarchy checks: bases, cycles, field shadowing, overrides
    for u in units {
        for c in u.classes() {
            let Some(base) = &c.base else { continue };
            let at = c.base_id.unwrap_or(c.id);
            if index.visible_class(&u.name, base).is_none() {
                if !lenient {
                    diags.push(Diagnostic::new(u.file(), u.loc(at), format!("unknown base class {base}")));
                }
                continue;
            }
            let chain = index.ancestry(&c.name);
            let last = chain.last().and_then(|l| index.classes.get(l)).and_then(|i| i.base.clone());
            if last.is_some_and(|b| chain.contains(&b)) {
                diags.push(Diagnostic::new(u.file(), u.loc(at), format!("inheritance cycle through class `{}`", c.name)));
            }
        }
    }
    if diags.is_empty() {
        resolve_virtuals(units, &mut index, &mut diags);
    }
    (index, diags)
}

fn reserved(name: &str) -> bool {
    Builtin::from_name(name).is_some()
        || matches!(name, "Int" | "Bool" | "Ref" | "i8" | "i32" | "u8" | "u32" | "bool" | "var" | "buf" | "tag" | "void")
}

/// Propagate virtual-ness to overrides and check override signatures.
fn resolve_virtuals(units: &[&TranslationUnit], index: &mut ProgramIndex, diags: &mut Vec<Diagnostic>) {
    let mut by_depth: Vec<(usize, String)> = index.classes.keys().map(|c| (index.ancestry(c).len(), c.clone())).collect();
    by_depth.sort();
    let locs: HashMap<String, (String, Loc)> = units
        .iter()
        .flat_map(|u| {
            u.classes()
                .flat_map(move |c| c.methods.iter().map(move |m| (m.decl_id(), (u.file().to_string(), u.loc(m.id)))))
        })
        .collect();
    let base_ctor_locs: HashMap<String, (String, Loc)> =
        units.iter().flat_map(|u| u.classes().map(move |c| (c.name.clone(), (u.file().to_string(), u.loc(c.id))))).collect();
    for (_, cname) in by_depth {
        let Some(base) = index.classes[&cname].base.clone() else { continue };
        if let Some(b) = index.classes.get(&base) {
            if b.ctor.as_ref().is_some_and(|(p, _)| !p.is_empty()) {
                let (file, loc) = base_ctor_locs[&cname].clone();
                diags.push(Diagnostic::new(
                    file,
                    loc,
                    format!("base class `{base}` of `{cname}` has a constructor that takes arguments"),
                ));
            }
        }
        let names: Vec<String> = index.classes[&cname].methods.keys().cloned().collect();
        for m in names {
            let Some(inherited) = index.lookup_method(&base, &m).cloned() else { continue };
            let own = index.classes[&cname].methods[&m].clone();
            let (file, loc) = locs[&own.decl].clone();
            if !inherited.is_virtual {
                diags.push(Diagnostic::new(file, loc, format!("method `{}` hides non-virtual `{}`", own.decl, inherited.decl)));
                continue;
            }
            if inherited.sig != own.sig || inherited.by_ref != own.by_ref {
                diags.push(Diagnostic::new(
                    file,
                    loc,
                    format!("override `{}` does not match the signature of `{}`", own.decl, inherited.decl),
                ));
            }
            index.classes.get_mut(&cname).unwrap().methods.get_mut(&m).unwrap().is_virtual = true;
        }
    }
}

#[derive(PartialEq)]
enum Conv {
    Same,
    Implicit,
    No,
}

fn conversion(index: &ProgramIndex, from: &Type, to: &Type) -> Conv {
    if from == to {
        return Conv::Same;
    }
    match (from, to) {
        (Type::Unknown, _) | (_, Type::Unknown) => Conv::Same,
        (Type::Int(a), Type::Int(b)) if a.bits() <= b.bits() => Conv::Implicit,
        (Type::Class(d), Type::Class(b)) if index.is_subclass(d, b) => Conv::Implicit,
        _ => Conv::No,
    }
}

/// Check every unchecked unit in `units` against `index`.
pub fn check_units(units: &mut [TranslationUnit], index: &ProgramIndex, lenient: bool) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    for u in units.iter_mut() {
        if u.checked {
            continue;
        }
        let mut decls = std::mem::take(&mut u.decls);
        {
            let mut cx = UnitCx { index, unit: &u.name, map: &mut u.source_map, diags: &mut diags, lenient };
            for d in decls.iter_mut() {
                cx.decl(d);
            }
        }
        u.decls = decls;
    }
    diags.sort();
    diags.dedup();
    diags
}

struct UnitCx<'a> {
    index: &'a ProgramIndex,
    unit: &'a str,
    map: &'a mut SourceMap,
    diags: &'a mut Vec<Diagnostic>,
    lenient: bool,
}

impl UnitCx<'_> {
    fn error(&mut self, id: NodeId, msg: impl Into<String>) {
        let file = self.map.file.clone();
        let loc = self.map.loc(id);
        self.diags.push(Diagnostic::new(file, loc, msg));
    }

    fn check_type(&mut self, id: NodeId, ty: &Type) {
        match ty {
            Type::Class(c) => {
                if self.index.visible_class(self.unit, c).is_none() && !self.lenient {
                    self.error(id, format!("unknown type {c}"));
                }
            }
            Type::Fn(ft) => {
                for p in &ft.params {
                    self.check_type(id, p);
                }
                self.check_type(id, &ft.ret);
            }
            _ => {}
        }
    }

    fn decl(&mut self, d: &mut Decl) {
        match d {
            Decl::Import(_) => {}
            Decl::Global(g) => {
                self.check_type(g.id, &g.ty);
                if g.ty == Type::Void {
                    self.error(g.id, "global of type void");
                }
                if let Some(init) = &mut g.init {
                    let ok = match &init.kind {
                        ExprKind::Int(_) | ExprKind::Bool(_) | ExprKind::FnRef { .. } | ExprKind::TagLit(_) => true,
                        ExprKind::Cast { operand, .. } => matches!(operand.kind, ExprKind::FnRef { .. }),
                        _ => false,
                    };
                    if !ok {
                        self.error(init.id, "global initializer must be a constant");
                        return;
                    }
                    let mut fx = FnCx::new(self, None, Type::Void);
                    let ty = g.ty.clone();
                    fx.expr_as(init, &ty);
                }
            }
            Decl::Function(f) => self.function(f, None),
            Decl::Class(c) => {
                for fd in &c.fields {
                    self.check_type(fd.id, &fd.ty);
                    if fd.ty == Type::Void {
                        self.error(fd.id, "field of type void");
                    }
                }
                let name = c.name.clone();
                if let Some(k) = &mut c.ctor {
                    self.function(k, Some(&name));
                }
                for m in c.methods.iter_mut() {
                    self.function(m, Some(&name));
                }
            }
        }
    }

    fn function(&mut self, f: &mut FnDecl, class: Option<&str>) {
        self.check_type(f.id, &f.ret);
        if f.kind == FnKind::Free
            && f.name == "main"
            && (!f.params.is_empty() || !matches!(f.ret, Type::Void | Type::Int(IntTy::I32)))
        {
            self.error(f.id, "`main` must take no parameters and return i32 or void");
        }
        let mut fx = FnCx::new(self, class.map(str::to_string), f.ret.clone());
        for p in &f.params {
            fx.cx.check_type(p.id, &p.ty);
            if p.ty == Type::Void {
                fx.cx.error(p.id, "parameter of type void");
            }
            if p.by_ref && matches!(p.ty, Type::Class(_) | Type::Fn(_)) {
                fx.cx.error(p.id, "reference parameters must have a value type");
            }
            fx.declared.insert(p.name.clone());
            if fx.locals.insert(p.name.clone(), (p.ty.clone(), p.by_ref)).is_some() {
                fx.cx.error(p.id, format!("duplicate declaration of `{}`", p.name));
            }
        }
        fx.block(&mut f.body);
    }
}

struct FnCx<'c, 'a> {
    cx: &'c mut UnitCx<'a>,
    class: Option<String>,
    ret: Type,
    /// Locals in scope.
    locals: HashMap<String, (Type, bool)>,
    /// Every local name declared so far; names are unique per function.
    declared: HashSet<String>,
}

impl<'c, 'a> FnCx<'c, 'a> {
    fn new(cx: &'c mut UnitCx<'a>, class: Option<String>, ret: Type) -> Self {
        FnCx { cx, class, ret, locals: HashMap::new(), declared: HashSet::new() }
    }

    fn index(&self) -> &'a ProgramIndex {
        self.cx.index
    }

    fn unit(&self) -> &'a str {
        self.cx.unit
    }

    fn block(&mut self, b: &mut Block) {
        let outer = self.locals.clone();
        for s in b.stmts.iter_mut() {
            self.stmt(s);
        }
        self.locals = outer;
    }

    fn cond(&mut self, e: &mut Expr) {
        let t = self.expr(e, None);
        if !matches!(t, Type::Bool | Type::Int(_) | Type::Unknown) {
            self.cx.error(e.id, format!("condition must be bool or integer, found {t}"));
        }
    }

    fn stmt(&mut self, s: &mut Stmt) {
        match &mut s.kind {
            StmtKind::Let { name, ty, init } => {
                let t = match ty {
                    Some(t) => {
                        self.cx.check_type(s.id, t);
                        let t = t.clone();
                        self.expr_as(init, &t);
                        t
                    }
                    None => self.expr(init, None),
                };
                if t == Type::Void {
                    self.cx.error(init.id, "cannot bind a void value");
                }
                if !self.declared.insert(name.clone()) {
                    self.cx.error(s.id, format!("duplicate declaration of `{name}`"));
                } else {
                    self.locals.insert(name.clone(), (t, false));
                }
            }
            StmtKind::Assign { target, value } => {
                let t = self.place(target);
                self.expr_as(value, &t);
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.cond(cond);
                self.block(then_block);
                if let Some(b) = else_block {
                    self.block(b);
                }
            }
            StmtKind::While { cond, body } => {
                self.cond(cond);
                self.block(body);
            }
            StmtKind::Return(v) => {
                let ret = self.ret.clone();
                match v {
                    Some(e) if ret == Type::Void => {
                        self.expr(e, None);
                        self.cx.error(e.id, "returning a value from a void function");
                    }
                    Some(e) => self.expr_as(e, &ret),
                    None if ret != Type::Void => self.cx.error(s.id, format!("missing return value of type {ret}")),
                    None => {}
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e, None);
            }
        }
    }

    /// Type of an assignable place.
    fn place(&mut self, e: &mut Expr) -> Type {
        let t = self.expr(e, None);
        if let ExprKind::Name { res: NameRes::Unresolved, name } = &e.kind {
            if !self.cx.lenient {
                let msg = format!("`{name}` is not assignable");
                self.cx.error(e.id, msg);
            }
        }
        t
    }

    fn convert(&mut self, e: &mut Expr, to: &Type) {
        let id = self.cx.map.alloc(self.cx.map.loc(e.id));
        let inner = std::mem::replace(e, Expr::new(id, ExprKind::Bool(false)));
        *e = Expr { id, kind: ExprKind::Convert { to: to.clone(), operand: Box::new(inner) }, ty: to.clone() };
    }

    /// Check `e` in a context expecting `to`, inserting an implicit
    /// conversion when needed.
    fn expr_as(&mut self, e: &mut Expr, to: &Type) {
        let t = self.expr(e, Some(to));
        match conversion(self.index(), &t, to) {
            Conv::Same => {}
            Conv::Implicit => self.convert(e, to),
            Conv::No => {
                let msg = match (&t, to) {
                    (Type::Int(_), Type::Int(_)) => format!("implicit narrowing from {t} to {to}; use cast<{to}>(...)"),
                    _ => format!("type mismatch: expected {to}, found {t}"),
                };
                self.cx.error(e.id, msg);
            }
        }
    }

    fn int_literal(&mut self, e: &mut Expr, v: i64, expected: Option<&Type>) -> Type {
        match expected {
            Some(Type::Int(t)) => {
                if !t.contains(v) {
                    self.cx.error(e.id, format!("literal {v} out of range for {}", t.name()));
                }
                Type::Int(*t)
            }
            _ if IntTy::I32.contains(v) => Type::Int(IntTy::I32),
            _ => Type::Int(IntTy::U32),
        }
    }

    fn expr(&mut self, e: &mut Expr, expected: Option<&Type>) -> Type {
        let t = self.expr_inner(e, expected);
        e.ty = t.clone();
        t
    }

    fn field_of(&mut self, id: NodeId, class: &str, name: &str) -> (Option<DeclId>, Type) {
        match self.index().lookup_field(class, name) {
            Some(f) => (Some(f.decl.clone()), f.ty.clone()),
            None => {
                if !self.cx.lenient || self.index().classes.contains_key(class) {
                    self.cx.error(id, format!("class {class} has no field `{name}`"));
                }
                (None, Type::Unknown)
            }
        }
    }

    fn expr_inner(&mut self, e: &mut Expr, expected: Option<&Type>) -> Type {
        let id = e.id;
        match &mut e.kind {
            ExprKind::Int(v) => {
                let v = *v;
                self.int_literal(e, v, expected)
            }
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::TagLit(_) => Type::Tag,
            ExprKind::This => match &self.class {
                Some(c) => Type::Class(c.clone()),
                None => {
                    self.cx.error(id, "`this` outside of a method");
                    Type::Unknown
                }
            },
            ExprKind::Name { name, res } => {
                if let Some((t, _)) = self.locals.get(name.as_str()) {
                    *res = NameRes::Local;
                    return t.clone();
                }
                if let Some(c) = &self.class {
                    if let Some(f) = self.cx.index.lookup_field(c, name) {
                        *res = NameRes::Field(f.decl.clone());
                        return f.ty.clone();
                    }
                }
                if let Some(g) = self.index().visible_global(self.unit(), name) {
                    *res = NameRes::Global;
                    return g.ty.clone();
                }
                let msg = if self.index().visible_function(self.unit(), name).is_some() {
                    format!("function `{name}` used as a value; take a reference with `&{name}`")
                } else {
                    format!("unknown identifier `{name}`")
                };
                if !self.cx.lenient {
                    self.cx.error(id, msg);
                }
                Type::Unknown
            }
            ExprKind::Field { object, name, field } => {
                let ot = self.expr(object, None);
                match ot {
                    Type::Class(c) => {
                        let (decl, t) = self.field_of(id, &c, name);
                        *field = decl;
                        t
                    }
                    Type::Unknown => Type::Unknown,
                    other => {
                        self.cx.error(id, format!("field access on non-object type {other}"));
                        Type::Unknown
                    }
                }
            }
            ExprKind::Call { .. } => self.call(e),
            ExprKind::New { class, args } => {
                let class = class.clone();
                let Some(info) = self.index().visible_class(self.unit(), &class) else {
                    if !self.cx.lenient {
                        self.cx.error(id, format!("unknown class {class}"));
                    }
                    for a in args.iter_mut() {
                        self.expr(a, None);
                    }
                    return Type::Unknown;
                };
                let (params, by_ref) = info.ctor.clone().unwrap_or_default();
                let mut args = std::mem::take(args);
                self.args(id, &format!("{class}::{class}"), &mut args, &params, &by_ref);
                if let ExprKind::New { args: a, .. } = &mut e.kind {
                    *a = args;
                }
                Type::Class(class)
            }
            ExprKind::FnRef { name } => match self.index().visible_function(self.unit(), name) {
                Some(f) => {
                    if f.by_ref.iter().any(|r| *r) {
                        let msg = format!("cannot take a reference to `{name}`: it has reference parameters");
                        self.cx.error(id, msg);
                    }
                    Type::Fn(Box::new(f.sig.clone()))
                }
                None => {
                    if !self.cx.lenient {
                        let msg = format!("unknown function `{name}`");
                        self.cx.error(id, msg);
                    }
                    Type::Unknown
                }
            },
            ExprKind::Unary { op, operand } => {
                let op = *op;
                let t = self.expr(operand, if op == UnOp::Neg { expected } else { None });
                match (op, &t) {
                    (UnOp::Not, Type::Bool | Type::Int(_) | Type::Unknown) => Type::Bool,
                    (UnOp::Neg, Type::Int(_) | Type::Unknown) => t,
                    _ => {
                        self.cx.error(id, format!("invalid operand type {t}"));
                        Type::Unknown
                    }
                }
            }
            ExprKind::Binary { op, lhs, rhs } => {
                let op = *op;
                if op.is_logic() {
                    for side in [lhs, rhs] {
                        let t = self.expr(side, None);
                        if !matches!(t, Type::Bool | Type::Int(_) | Type::Unknown) {
                            self.cx.error(side.id, format!("logical operand must be bool or integer, found {t}"));
                        }
                    }
                    return Type::Bool;
                }
                let hint = if op.is_arith() { expected } else { None };
                let t = self.operands(id, lhs, rhs, hint);
                if op.is_arith() {
                    match t {
                        Type::Int(_) | Type::Unknown => t,
                        other => {
                            self.cx.error(id, format!("arithmetic on non-integer type {other}"));
                            Type::Unknown
                        }
                    }
                } else {
                    let ok = match &t {
                        Type::Int(_) | Type::Unknown => true,
                        Type::Bool | Type::Tag => matches!(op, BinOp::Eq | BinOp::Ne),
                        _ => false,
                    };
                    if !ok {
                        self.cx.error(id, format!("cannot compare values of type {t}"));
                    }
                    Type::Bool
                }
            }
            ExprKind::Downcast { class, operand } | ExprKind::Is { class, operand } => {
                let class = class.clone();
                let t = self.expr(operand, None);
                let is_test = matches!(e.kind, ExprKind::Is { .. });
                if self.index().visible_class(self.unit(), &class).is_none() {
                    if !self.cx.lenient {
                        self.cx.error(id, format!("unknown class {class}"));
                    }
                } else if let Type::Class(from) = &t {
                    let known = self.index().classes.contains_key(from);
                    if (known || !self.cx.lenient) && !self.index().is_subclass(&class, from) {
                        self.cx.error(id, format!("`{class}` is not a subclass of `{from}`"));
                    }
                } else if t != Type::Unknown {
                    self.cx.error(id, format!("expected an object, found {t}"));
                }
                if is_test {
                    Type::Bool
                } else {
                    Type::Class(class)
                }
            }
            ExprKind::Cast { to, operand } => {
                let to = to.clone();
                self.cx.check_type(id, &to);
                let t = self.expr(operand, None);
                let ok = match (&t, &to) {
                    (Type::Int(_), Type::Int(_)) | (Type::Fn(_), Type::Fn(_)) => true,
                    (Type::Unknown, _) | (_, Type::Unknown) => true,
                    (a, b) => conversion(self.index(), a, b) != Conv::No,
                };
                if !ok {
                    self.cx.error(id, format!("invalid cast from {t} to {to}"));
                }
                to
            }
            ExprKind::Convert { to, .. } => to.clone(),
        }
    }

    /// Unify the operand types of a binary operator.
    fn operands(&mut self, id: NodeId, lhs: &mut Expr, rhs: &mut Expr, hint: Option<&Type>) -> Type {
        let lit = |e: &Expr| matches!(e.kind, ExprKind::Int(_));
        let (lt, rt) = if lit(lhs) && !lit(rhs) {
            let rt = self.expr(rhs, hint);
            let lt = self.expr(lhs, Some(&rt));
            (lt, rt)
        } else {
            let lt = self.expr(lhs, hint);
            let rt = self.expr(rhs, Some(&lt));
            (lt, rt)
        };
        if lt == rt {
            return lt;
        }
        match (&lt, &rt) {
            (Type::Unknown, _) => rt,
            (_, Type::Unknown) => lt,
            (Type::Int(a), Type::Int(b)) if a.widens_to(*b) => {
                self.convert(lhs, &rt);
                rt
            }
            (Type::Int(a), Type::Int(b)) if b.widens_to(*a) => {
                self.convert(rhs, &lt);
                lt
            }
            _ => {
                self.cx.error(id, format!("mismatched operand types {lt} and {rt}"));
                Type::Unknown
            }
        }
    }

    fn args(&mut self, id: NodeId, callee: &str, args: &mut [Expr], params: &[Type], by_ref: &[bool]) {
        if args.len() != params.len() {
            self.cx.error(id, format!("`{callee}` expects {} argument(s), found {}", params.len(), args.len()));
            for a in args.iter_mut() {
                self.expr(a, None);
            }
            return;
        }
        for (i, a) in args.iter_mut().enumerate() {
            if by_ref.get(i).copied().unwrap_or(false) {
                let t = self.expr(a, None);
                let place = matches!(
                    &a.kind,
                    ExprKind::Name { res: NameRes::Local | NameRes::Global | NameRes::Field(_), .. } | ExprKind::Field { .. }
                );
                if !place || conversion(self.index(), &t, &params[i]) != Conv::Same {
                    self.cx.error(a.id, format!("reference argument must be an assignable place of type {}", params[i]));
                }
            } else {
                self.expr_as(a, &params[i]);
            }
        }
    }

    fn call(&mut self, e: &mut Expr) -> Type {
        let id = e.id;
        let ExprKind::Call { callee, args, res } = &mut e.kind else { unreachable!() };
        let (r, ret) = self.resolve_call(id, callee, args);
        *res = r;
        ret
    }

    fn resolve_call(&mut self, id: NodeId, callee: &mut Expr, args: &mut Vec<Expr>) -> (CallRes, Type) {
        let unit = self.unit();
        let index = self.index();
        match &mut callee.kind {
            ExprKind::Name { name, res } => {
                let name = name.clone();
                if let Some((t, _)) = self.locals.get(&name).cloned() {
                    *res = NameRes::Local;
                    callee.ty = t.clone();
                    return self.indirect(id, &t, args);
                }
                if let Some(g) = index.visible_global(unit, &name) {
                    *res = NameRes::Global;
                    callee.ty = g.ty.clone();
                    let t = g.ty.clone();
                    return self.indirect(id, &t, args);
                }
                if let Some(b) = Builtin::from_name(&name) {
                    let sig = b.signature();
                    self.args(id, &name, args, &sig.params, &[]);
                    return (CallRes::Builtin(b), sig.ret);
                }
                if let Some(c) = self.class.clone() {
                    if let Some(m) = index.lookup_method(&c, &name) {
                        let m = m.clone();
                        self.args(id, &m.decl, args, &m.sig.params, &m.by_ref);
                        let r = if m.is_virtual {
                            CallRes::Virtual { class: c, slot: name }
                        } else {
                            CallRes::Method(m.decl.clone())
                        };
                        return (r, m.sig.ret.clone());
                    }
                }
                if let Some(f) = index.visible_function(unit, &name) {
                    let f = f.clone();
                    self.args(id, &f.decl, args, &f.sig.params, &f.by_ref);
                    return (CallRes::Direct(f.decl.clone()), f.sig.ret.clone());
                }
                if !self.cx.lenient {
                    self.cx.error(id, format!("unknown function `{name}`"));
                }
                for a in args.iter_mut() {
                    self.expr(a, None);
                }
                (CallRes::Unresolved, Type::Unknown)
            }
            ExprKind::Field { object, name, .. } => {
                let name = name.clone();
                let ot = self.expr(object, None);
                let class = match ot {
                    Type::Class(c) => c,
                    Type::Unknown => {
                        for a in args.iter_mut() {
                            self.expr(a, None);
                        }
                        return (CallRes::Unresolved, Type::Unknown);
                    }
                    other => {
                        self.cx.error(id, format!("method call on non-object type {other}"));
                        return (CallRes::Unresolved, Type::Unknown);
                    }
                };
                match index.lookup_method(&class, &name) {
                    Some(m) => {
                        let m = m.clone();
                        self.args(id, &m.decl, args, &m.sig.params, &m.by_ref);
                        let r = if m.is_virtual {
                            CallRes::Virtual { class, slot: name }
                        } else {
                            CallRes::Method(m.decl.clone())
                        };
                        (r, m.sig.ret.clone())
                    }
                    None => {
                        if !self.cx.lenient || index.classes.contains_key(&class) {
                            self.cx.error(id, format!("class {class} has no method `{name}`"));
                        }
                        for a in args.iter_mut() {
                            self.expr(a, None);
                        }
                        (CallRes::Unresolved, Type::Unknown)
                    }
                }
            }
            _ => {
                let t = self.expr(callee, None);
                self.indirect(id, &t, args)
            }
        }
    }

    fn indirect(&mut self, id: NodeId, t: &Type, args: &mut [Expr]) -> (CallRes, Type) {
        match t {
            Type::Fn(ft) => {
                let by_ref = vec![false; ft.params.len()];
                self.args(id, "function value", args, &ft.params, &by_ref);
                (CallRes::Indirect, ft.ret.clone())
            }
            Type::Unknown => {
                for a in args.iter_mut() {
                    self.expr(a, None);
                }
                (CallRes::Indirect, Type::Unknown)
            }
            other => {
                self.cx.error(id, format!("call of non-function type {other}"));
                (CallRes::Unresolved, Type::Unknown)
            }
        }
    }
}
