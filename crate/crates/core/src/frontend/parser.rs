//! Recursive-descent parser for MiniObj. The grammar is in
//! `docs/grammar.ebnf`; every production is decided by at most two tokens
//! of lookahead (class members need `IDENT :` vs `IDENT (`).

use super::ast::*;
use super::diag::Diagnostic;
use super::lexer::{lex, Tok, Token};

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    map: SourceMap,
}

type PResult<T> = Result<T, Diagnostic>;

/// Parse `src` into an unchecked translation unit.
pub fn parse(src: &str, unit_name: &str, file: &str) -> PResult<TranslationUnit> {
    let toks = lex(file, src)?;
    let mut p = Parser { toks, pos: 0, map: SourceMap::new(file) };
    let mut decls = Vec::new();
    while p.peek() != &Tok::Eof {
        decls.push(p.decl()?);
    }
    Ok(TranslationUnit {
        name: unit_name.to_string(),
        decls,
        source_map: p.map,
        source: src.to_string(),
        checked: false,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].tok
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].loc
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(Diagnostic::new(self.map.file.clone(), self.loc(), msg))
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        self.err(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<Loc> {
        if self.peek() == &t {
            Ok(self.bump().loc)
        } else {
            let wanted = t.describe();
            self.unexpected(&wanted)
        }
    }

    fn ident(&mut self) -> PResult<(String, Loc)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let loc = self.bump().loc;
                Ok((s, loc))
            }
            _ => self.unexpected("identifier"),
        }
    }

    fn node(&mut self, loc: Loc) -> NodeId {
        self.map.alloc(loc)
    }

    fn decl(&mut self) -> PResult<Decl> {
        match self.peek() {
            Tok::Import => {
                let loc = self.bump().loc;
                let id = self.node(loc);
                let (unit, _) = self.ident()?;
                self.expect(Tok::Semi)?;
                Ok(Decl::Import(Import { id, unit }))
            }
            Tok::Class => self.class().map(Decl::Class),
            Tok::Fn => {
                self.bump();
                self.function(FnKind::Free).map(Decl::Function)
            }
            Tok::Global => {
                self.bump();
                let (name, loc) = self.ident()?;
                let id = self.node(loc);
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                let init = if self.eat(&Tok::Assign) { Some(self.expr()?) } else { None };
                self.expect(Tok::Semi)?;
                Ok(Decl::Global(GlobalDecl { id, name, ty, init }))
            }
            _ => self.unexpected("`import`, `class`, `fn` or `global`"),
        }
    }

    fn class(&mut self) -> PResult<ClassDecl> {
        self.expect(Tok::Class)?;
        let (name, loc) = self.ident()?;
        let id = self.node(loc);
        let (base, base_id) = if self.eat(&Tok::Colon) {
            let (b, bloc) = self.ident()?;
            let bid = self.node(bloc);
            (Some(b), Some(bid))
        } else {
            (None, None)
        };
        self.expect(Tok::LBrace)?;
        let mut fields = Vec::new();
        let mut ctor: Option<FnDecl> = None;
        let mut methods = Vec::new();
        loop {
            match (self.peek().clone(), self.peek2().clone()) {
                (Tok::RBrace, _) => break,
                (Tok::Ident(f), Tok::Colon) => {
                    let loc = self.bump().loc;
                    let fid = self.node(loc);
                    self.bump();
                    let ty = self.ty()?;
                    self.expect(Tok::Semi)?;
                    fields.push(FieldDecl { id: fid, name: f, ty });
                }
                (Tok::Ident(k), Tok::LParen) => {
                    if k != name {
                        return self.err(format!("constructor `{k}` must be named after its class `{name}`"));
                    }
                    if ctor.is_some() {
                        return self.err(format!("duplicate declaration of constructor `{name}::{name}`"));
                    }
                    ctor = Some(self.function(FnKind::Ctor { class: name.clone() })?);
                }
                (Tok::Virtual, _) => {
                    self.bump();
                    self.expect(Tok::Fn)?;
                    methods.push(self.function(FnKind::Method { class: name.clone(), is_virtual: true })?);
                }
                (Tok::Fn, _) => {
                    self.bump();
                    methods.push(self.function(FnKind::Method { class: name.clone(), is_virtual: false })?);
                }
                _ => return self.unexpected("field, constructor or method"),
            }
        }
        let close_loc = self.expect(Tok::RBrace)?;
        let close = self.node(close_loc);
        Ok(ClassDecl { id, name, base, base_id, fields, ctor, methods, close })
    }

    /// Parses from the function name onwards.
    fn function(&mut self, kind: FnKind) -> PResult<FnDecl> {
        let (name, loc) = self.ident()?;
        let id = self.node(loc);
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let (pname, ploc) = self.ident()?;
                let pid = self.node(ploc);
                self.expect(Tok::Colon)?;
                let by_ref = self.eat(&Tok::Amp);
                let ty = self.ty()?;
                params.push(Param { id: pid, name: pname, ty, by_ref });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let ret = if matches!(kind, FnKind::Ctor { .. }) {
            Type::Void
        } else if self.eat(&Tok::Arrow) {
            self.ty()?
        } else {
            Type::Void
        };
        let body = self.block()?;
        Ok(FnDecl { id, name, kind, params, ret, body })
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.eat(&Tok::Fn) {
            self.expect(Tok::LParen)?;
            let mut params = Vec::new();
            if self.peek() != &Tok::RParen {
                loop {
                    params.push(self.ty()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Arrow)?;
            let ret = self.ty()?;
            return Ok(Type::Fn(Box::new(FnType { params, ret })));
        }
        let (name, _) = match self.peek() {
            Tok::Ident(_) => self.ident()?,
            _ => return self.unexpected("type"),
        };
        Ok(match name.as_str() {
            "i8" => Type::Int(IntTy::I8),
            "i32" => Type::Int(IntTy::I32),
            "u8" => Type::Int(IntTy::U8),
            "u32" => Type::Int(IntTy::U32),
            "bool" => Type::Bool,
            "var" => Type::Var,
            "buf" => Type::Buf,
            "tag" => Type::Tag,
            "void" => Type::Void,
            _ => Type::Class(name),
        })
    }

    fn block(&mut self) -> PResult<Block> {
        let loc = self.expect(Tok::LBrace)?;
        let id = self.node(loc);
        let mut stmts = Vec::new();
        while self.peek() != &Tok::RBrace {
            if self.peek() == &Tok::Eof {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        let close_loc = self.expect(Tok::RBrace)?;
        let close = self.node(close_loc);
        Ok(Block { id, stmts, close })
    }

    /// A braced block, or a single statement wrapped into one.
    fn body(&mut self) -> PResult<Block> {
        if self.peek() == &Tok::LBrace {
            return self.block();
        }
        let loc = self.loc();
        let id = self.node(loc);
        let stmt = self.stmt()?;
        let close = self.node(loc);
        Ok(Block { id, stmts: vec![stmt], close })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        match self.peek() {
            Tok::Let => {
                self.bump();
                let id = self.node(loc);
                let (name, _) = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                self.expect(Tok::Assign)?;
                let init = self.expr()?;
                self.expect(Tok::Semi)?;
                Ok(Stmt { id, kind: StmtKind::Let { name, ty, init } })
            }
            Tok::If => self.if_stmt(),
            Tok::While => {
                self.bump();
                let id = self.node(loc);
                self.expect(Tok::LParen)?;
                let cond = self.expr()?;
                self.expect(Tok::RParen)?;
                let body = self.body()?;
                Ok(Stmt { id, kind: StmtKind::While { cond, body } })
            }
            Tok::Return => {
                self.bump();
                let id = self.node(loc);
                let value = if self.peek() == &Tok::Semi { None } else { Some(self.expr()?) };
                self.expect(Tok::Semi)?;
                Ok(Stmt { id, kind: StmtKind::Return(value) })
            }
            _ => {
                let id = self.node(loc);
                let e = self.expr()?;
                if self.eat(&Tok::Assign) {
                    if !e.is_place() {
                        return Err(Diagnostic::new(
                            self.map.file.clone(),
                            self.map.loc(e.id),
                            "left-hand side of assignment is not assignable",
                        ));
                    }
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    Ok(Stmt { id, kind: StmtKind::Assign { target: e, value } })
                } else {
                    self.expect(Tok::Semi)?;
                    Ok(Stmt { id, kind: StmtKind::Expr(e) })
                }
            }
        }
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let loc = self.expect(Tok::If)?;
        let id = self.node(loc);
        self.expect(Tok::LParen)?;
        let cond = self.expr()?;
        self.expect(Tok::RParen)?;
        let then_block = self.body()?;
        let else_block = if self.eat(&Tok::Else) { Some(self.body()?) } else { None };
        Ok(Stmt { id, kind: StmtKind::If { cond, then_block, else_block } })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    fn binop(&self) -> Option<(BinOp, u8)> {
        Some(match self.peek() {
            Tok::OrOr => (BinOp::Or, 1),
            Tok::AndAnd => (BinOp::And, 2),
            Tok::EqEq => (BinOp::Eq, 3),
            Tok::Ne => (BinOp::Ne, 3),
            Tok::Lt => (BinOp::Lt, 4),
            Tok::Le => (BinOp::Le, 4),
            Tok::Gt => (BinOp::Gt, 4),
            Tok::Ge => (BinOp::Ge, 4),
            Tok::Plus => (BinOp::Add, 5),
            Tok::Minus => (BinOp::Sub, 5),
            Tok::Star => (BinOp::Mul, 6),
            Tok::Slash => (BinOp::Div, 6),
            Tok::Percent => (BinOp::Rem, 6),
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some((op, prec)) = self.binop() {
            if prec <= min_prec {
                break;
            }
            let loc = self.bump().loc;
            let id = self.node(loc);
            let rhs = self.binary(prec)?;
            lhs = Expr::new(id, ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek() {
            Tok::Bang => {
                self.bump();
                let id = self.node(loc);
                let operand = self.unary()?;
                Ok(Expr::new(id, ExprKind::Unary { op: UnOp::Not, operand: Box::new(operand) }))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(v) = *self.peek() {
                    self.bump();
                    let id = self.node(loc);
                    return Ok(Expr::new(id, ExprKind::Int(-v)));
                }
                let id = self.node(loc);
                let operand = self.unary()?;
                Ok(Expr::new(id, ExprKind::Unary { op: UnOp::Neg, operand: Box::new(operand) }))
            }
            _ => self.postfix(),
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                args.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(args)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Tok::Dot => {
                    self.bump();
                    let (name, nloc) = self.ident()?;
                    let id = self.node(nloc);
                    e = Expr::new(id, ExprKind::Field { object: Box::new(e), name, field: None });
                }
                Tok::LParen => {
                    let call_loc = match &e.kind {
                        ExprKind::Name { .. } | ExprKind::Field { .. } => self.map.loc(e.id),
                        _ => self.loc(),
                    };
                    let id = self.node(call_loc);
                    let args = self.args()?;
                    e = Expr::new(id, ExprKind::Call { callee: Box::new(e), args, res: CallRes::Unresolved });
                }
                _ => return Ok(e),
            }
        }
    }

    fn angle_ident(&mut self) -> PResult<String> {
        self.expect(Tok::Lt)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::Gt)?;
        Ok(name)
    }

    fn paren_expr(&mut self) -> PResult<Expr> {
        self.expect(Tok::LParen)?;
        let e = self.expr()?;
        self.expect(Tok::RParen)?;
        Ok(e)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                let id = self.node(loc);
                Ok(Expr::new(id, ExprKind::Int(v)))
            }
            Tok::True | Tok::False => {
                let b = self.bump().tok == Tok::True;
                let id = self.node(loc);
                Ok(Expr::new(id, ExprKind::Bool(b)))
            }
            Tok::This => {
                self.bump();
                let id = self.node(loc);
                Ok(Expr::new(id, ExprKind::This))
            }
            Tok::Ident(name) => {
                self.bump();
                let id = self.node(loc);
                let kind = match name.as_str() {
                    "Int" => ExprKind::TagLit(Tag::Int),
                    "Bool" => ExprKind::TagLit(Tag::Bool),
                    "Ref" => ExprKind::TagLit(Tag::Ref),
                    _ => ExprKind::Name { name, res: NameRes::Unresolved },
                };
                Ok(Expr::new(id, kind))
            }
            Tok::LParen => self.paren_expr(),
            Tok::New => {
                self.bump();
                let (class, cloc) = self.ident()?;
                let _ = cloc;
                let id = self.node(loc);
                let args = self.args()?;
                Ok(Expr::new(id, ExprKind::New { class, args }))
            }
            Tok::Amp => {
                self.bump();
                let id = self.node(loc);
                let (name, _) = self.ident()?;
                Ok(Expr::new(id, ExprKind::FnRef { name }))
            }
            Tok::Downcast => {
                self.bump();
                let id = self.node(loc);
                let class = self.angle_ident()?;
                let operand = self.paren_expr()?;
                Ok(Expr::new(id, ExprKind::Downcast { class, operand: Box::new(operand) }))
            }
            Tok::Is => {
                self.bump();
                let id = self.node(loc);
                let class = self.angle_ident()?;
                let operand = self.paren_expr()?;
                Ok(Expr::new(id, ExprKind::Is { class, operand: Box::new(operand) }))
            }
            Tok::Cast => {
                self.bump();
                let id = self.node(loc);
                self.expect(Tok::Lt)?;
                let to = self.ty()?;
                self.expect(Tok::Gt)?;
                let operand = self.paren_expr()?;
                Ok(Expr::new(id, ExprKind::Cast { to, operand: Box::new(operand) }))
            }
            _ => self.unexpected("expression"),
        }
    }
}
