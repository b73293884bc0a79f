//! Canonical MiniObj printer. Re-parsing the output reproduces the same
//! declarations and node ids.

use std::fmt::Write;

use super::ast::*;

pub fn print_unit(u: &TranslationUnit) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    for d in &u.decls {
        p.decl(d);
    }
    p.out
}

pub fn print_expr(e: &Expr) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    p.expr(e);
    p.out
}

/// Source-like description of a place or call, used in findings.
pub fn describe(e: &Expr) -> String {
    let e = e.peel();
    match &e.kind {
        ExprKind::Name { name, .. } => name.clone(),
        ExprKind::Field { object, name, .. } => format!("{}.{name}", describe(object)),
        ExprKind::This => "this".into(),
        ExprKind::Call { callee, .. } => format!("{}()", describe(callee)),
        _ => print_expr(e),
    }
}

struct Printer {
    out: String,
    indent: usize,
}

impl Printer {
    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn decl(&mut self, d: &Decl) {
        match d {
            Decl::Import(i) => self.line(&format!("import {};", i.unit)),
            Decl::Global(g) => {
                let mut s = format!("global {}: {}", g.name, g.ty);
                if let Some(e) = &g.init {
                    s.push_str(" = ");
                    s.push_str(&print_expr(e));
                }
                s.push(';');
                self.line(&s);
            }
            Decl::Function(f) => self.function(f),
            Decl::Class(c) => {
                let head = match &c.base {
                    Some(b) => format!("class {} : {b} {{", c.name),
                    None => format!("class {} {{", c.name),
                };
                self.line(&head);
                self.indent += 1;
                for f in &c.fields {
                    self.line(&format!("{}: {};", f.name, f.ty));
                }
                if let Some(k) = &c.ctor {
                    self.function(k);
                }
                for m in &c.methods {
                    self.function(m);
                }
                self.indent -= 1;
                self.line("}");
            }
        }
    }

    fn function(&mut self, f: &FnDecl) {
        let mut s = String::new();
        match &f.kind {
            FnKind::Free | FnKind::Method { is_virtual: false, .. } => s.push_str("fn "),
            FnKind::Method { is_virtual: true, .. } => s.push_str("virtual fn "),
            FnKind::Ctor { .. } => {}
        }
        s.push_str(&f.name);
        s.push('(');
        for (i, p) in f.params.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{}: {}{}", p.name, if p.by_ref { "&" } else { "" }, p.ty);
        }
        s.push(')');
        if f.ret != Type::Void {
            let _ = write!(s, " -> {}", f.ret);
        }
        self.block_after(&s, &f.body);
    }

    /// Print `head {`, the block's statements, and `}`.
    fn block_after(&mut self, head: &str, b: &Block) {
        self.line(&format!("{head} {{"));
        self.indent += 1;
        for s in &b.stmts {
            self.stmt(s);
        }
        self.indent -= 1;
        self.line("}");
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let { name, ty, init } => {
                let t = ty.as_ref().map(|t| format!(": {t}")).unwrap_or_default();
                self.line(&format!("let {name}{t} = {};", print_expr(init)));
            }
            StmtKind::Assign { target, value } => {
                self.line(&format!("{} = {};", print_expr(target), print_expr(value)));
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.block_after(&format!("if ({})", print_expr(cond)), then_block);
                if let Some(b) = else_block {
                    // re-open the closing line as `} else {`
                    self.out.truncate(self.out.len() - 1);
                    let mut p = Printer { out: String::new(), indent: self.indent };
                    p.block_after("", b);
                    self.out.push_str(" else ");
                    self.out.push_str(p.out.trim_start_matches(' '));
                }
            }
            StmtKind::While { cond, body } => self.block_after(&format!("while ({})", print_expr(cond)), body),
            StmtKind::Return(None) => self.line("return;"),
            StmtKind::Return(Some(e)) => self.line(&format!("return {};", print_expr(e))),
            StmtKind::Expr(e) => self.line(&format!("{};", print_expr(e))),
        }
    }

    fn args(&mut self, args: &[Expr]) {
        self.out.push('(');
        for (i, a) in args.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.expr(a);
        }
        self.out.push(')');
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Int(v) => {
                let _ = write!(self.out, "{v}");
            }
            ExprKind::Bool(b) => {
                let _ = write!(self.out, "{b}");
            }
            ExprKind::TagLit(t) => self.out.push_str(t.name()),
            ExprKind::This => self.out.push_str("this"),
            ExprKind::Name { name, .. } => self.out.push_str(name),
            ExprKind::Field { object, name, .. } => {
                self.postfix_operand(object);
                self.out.push('.');
                self.out.push_str(name);
            }
            ExprKind::Call { callee, args, .. } => {
                self.postfix_operand(callee);
                self.args(args);
            }
            ExprKind::New { class, args } => {
                let _ = write!(self.out, "new {class}");
                self.args(args);
            }
            ExprKind::FnRef { name } => {
                let _ = write!(self.out, "&{name}");
            }
            ExprKind::Unary { op: UnOp::Not, operand } => {
                self.out.push('!');
                self.postfix_operand(operand);
            }
            ExprKind::Unary { op: UnOp::Neg, operand } => {
                self.out.push_str("-(");
                self.expr(operand);
                self.out.push(')');
            }
            ExprKind::Binary { op, lhs, rhs } => {
                self.out.push('(');
                self.expr(lhs);
                let _ = write!(self.out, " {} ", op.symbol());
                self.expr(rhs);
                self.out.push(')');
            }
            ExprKind::Downcast { class, operand } => {
                let _ = write!(self.out, "downcast<{class}>(");
                self.expr(operand);
                self.out.push(')');
            }
            ExprKind::Is { class, operand } => {
                let _ = write!(self.out, "is<{class}>(");
                self.expr(operand);
                self.out.push(')');
            }
            ExprKind::Cast { to, operand } => {
                let _ = write!(self.out, "cast<{to}>(");
                self.expr(operand);
                self.out.push(')');
            }
            ExprKind::Convert { operand, .. } => self.expr(operand),
        }
    }

    /// Operands of postfix and prefix operators: negative literals need
    /// parentheses so they do not fold differently.
    fn postfix_operand(&mut self, e: &Expr) {
        let e = e.peel();
        if matches!(e.kind, ExprKind::Int(v) if v < 0) {
            self.out.push('(');
            self.expr(e);
            self.out.push(')');
        } else {
            self.expr(e);
        }
    }
}
