//! MiniObj abstract syntax.
//!
//! Every node carries a [`NodeId`]; locations live in the unit's
//! [`SourceMap`] so that two parses of equivalent text compare equal even
//! when whitespace differs.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Index of an AST node inside its translation unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

/// 1-based line and column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A location qualified by its file name.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SrcLoc {
    pub file: String,
    pub line: u32,
    pub col: u32,
}

impl SrcLoc {
    pub fn new(file: impl Into<String>, loc: Loc) -> Self {
        SrcLoc { file: file.into(), line: loc.line, col: loc.col }
    }

    pub fn loc(&self) -> Loc {
        Loc { line: self.line, col: self.col }
    }
}

impl fmt::Display for SrcLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.col)
    }
}

/// Location table: one entry per node, indexed by `NodeId`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceMap {
    pub file: String,
    locs: Vec<Loc>,
}

impl SourceMap {
    pub fn new(file: impl Into<String>) -> Self {
        SourceMap { file: file.into(), locs: Vec::new() }
    }

    pub fn alloc(&mut self, loc: Loc) -> NodeId {
        let id = NodeId(self.locs.len() as u32);
        self.locs.push(loc);
        id
    }

    pub fn loc(&self, id: NodeId) -> Loc {
        self.locs[id.0 as usize]
    }

    pub fn src_loc(&self, id: NodeId) -> SrcLoc {
        SrcLoc::new(self.file.clone(), self.loc(id))
    }

    pub fn len(&self) -> usize {
        self.locs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locs.is_empty()
    }

    pub fn locs(&self) -> &[Loc] {
        &self.locs
    }
}

/// Qualified declaration name: `Class::member`, `Class::method` or `function`.
pub type DeclId = String;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tag {
    Int,
    Bool,
    Ref,
}

impl Tag {
    pub const ALL: [Tag; 3] = [Tag::Int, Tag::Bool, Tag::Ref];

    pub fn name(self) -> &'static str {
        match self {
            Tag::Int => "Int",
            Tag::Bool => "Bool",
            Tag::Ref => "Ref",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IntTy {
    I8,
    I32,
    U8,
    U32,
}

impl IntTy {
    pub fn signed(self) -> bool {
        matches!(self, IntTy::I8 | IntTy::I32)
    }

    pub fn bits(self) -> u32 {
        match self {
            IntTy::I8 | IntTy::U8 => 8,
            IntTy::I32 | IntTy::U32 => 32,
        }
    }

    pub fn min(self) -> i64 {
        match self {
            IntTy::I8 => i8::MIN as i64,
            IntTy::I32 => i32::MIN as i64,
            IntTy::U8 | IntTy::U32 => 0,
        }
    }

    pub fn max(self) -> i64 {
        match self {
            IntTy::I8 => i8::MAX as i64,
            IntTy::I32 => i32::MAX as i64,
            IntTy::U8 => u8::MAX as i64,
            IntTy::U32 => u32::MAX as i64,
        }
    }

    pub fn contains(self, v: i64) -> bool {
        v >= self.min() && v <= self.max()
    }

    /// Two's-complement reinterpretation of `v` in this type.
    pub fn wrap(self, v: i64) -> i64 {
        match self {
            IntTy::I8 => v as i8 as i64,
            IntTy::I32 => v as i32 as i64,
            IntTy::U8 => v as u8 as i64,
            IntTy::U32 => v as u32 as i64,
        }
    }

    /// Every value of `self` is representable in `to`.
    pub fn widens_to(self, to: IntTy) -> bool {
        to.min() <= self.min() && self.max() <= to.max()
    }

    pub fn name(self) -> &'static str {
        match self {
            IntTy::I8 => "i8",
            IntTy::I32 => "i32",
            IntTy::U8 => "u8",
            IntTy::U32 => "u32",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FnType {
    pub params: Vec<Type>,
    pub ret: Type,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Type {
    Int(IntTy),
    Bool,
    Var,
    Buf,
    Tag,
    Void,
    Class(String),
    Fn(Box<FnType>),
    /// Not yet checked, or unresolvable in lenient mode.
    Unknown,
}

impl Type {
    pub fn int(&self) -> Option<IntTy> {
        match self {
            Type::Int(t) => Some(*t),
            _ => None,
        }
    }

    pub fn class(&self) -> Option<&str> {
        match self {
            Type::Class(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int(t) => f.write_str(t.name()),
            Type::Bool => f.write_str("bool"),
            Type::Var => f.write_str("var"),
            Type::Buf => f.write_str("buf"),
            Type::Tag => f.write_str("tag"),
            Type::Void => f.write_str("void"),
            Type::Class(c) => f.write_str(c),
            Type::Fn(ft) => {
                f.write_str("fn(")?;
                for (i, p) in ft.params.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ") -> {}", ft.ret)
            }
            Type::Unknown => f.write_str("?"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranslationUnit {
    pub name: String,
    pub decls: Vec<Decl>,
    pub source_map: SourceMap,
    pub source: String,
    /// Set once the unit has been fully type-checked against everything it
    /// can see.
    pub checked: bool,
}

impl TranslationUnit {
    pub fn file(&self) -> &str {
        &self.source_map.file
    }

    pub fn loc(&self, id: NodeId) -> Loc {
        self.source_map.loc(id)
    }

    pub fn src_loc(&self, id: NodeId) -> SrcLoc {
        self.source_map.src_loc(id)
    }

    pub fn imports(&self) -> impl Iterator<Item = &Import> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Import(i) => Some(i),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Class(c) => Some(c),
            _ => None,
        })
    }

    pub fn free_functions(&self) -> impl Iterator<Item = &FnDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn globals(&self) -> impl Iterator<Item = &GlobalDecl> {
        self.decls.iter().filter_map(|d| match d {
            Decl::Global(g) => Some(g),
            _ => None,
        })
    }

    /// All callables defined in the unit: free functions, constructors and
    /// methods, in declaration order.
    pub fn functions(&self) -> Vec<&FnDecl> {
        let mut out = Vec::new();
        for d in &self.decls {
            match d {
                Decl::Function(f) => out.push(f),
                Decl::Class(c) => {
                    if let Some(k) = &c.ctor {
                        out.push(k);
                    }
                    out.extend(c.methods.iter());
                }
                _ => {}
            }
        }
        out
    }

    /// Text of the given 1-based source line, without the newline.
    pub fn line_text(&self, line: u32) -> &str {
        self.source.lines().nth(line.saturating_sub(1) as usize).unwrap_or("")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Import(Import),
    Class(ClassDecl),
    Function(FnDecl),
    Global(GlobalDecl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Import {
    pub id: NodeId,
    pub unit: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub id: NodeId,
    pub name: String,
    pub base: Option<String>,
    /// Node of the base-class name, when present.
    pub base_id: Option<NodeId>,
    pub fields: Vec<FieldDecl>,
    /// At most one constructor per class.
    pub ctor: Option<FnDecl>,
    pub methods: Vec<FnDecl>,
    pub close: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldDecl {
    pub id: NodeId,
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FnKind {
    Free,
    Method { class: String, is_virtual: bool },
    Ctor { class: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FnDecl {
    pub id: NodeId,
    pub name: String,
    pub kind: FnKind,
    pub params: Vec<Param>,
    pub ret: Type,
    pub body: Block,
}

impl FnDecl {
    pub fn decl_id(&self) -> DeclId {
        match &self.kind {
            FnKind::Free => self.name.clone(),
            FnKind::Method { class, .. } | FnKind::Ctor { class } => format!("{class}::{}", self.name),
        }
    }

    pub fn class(&self) -> Option<&str> {
        match &self.kind {
            FnKind::Free => None,
            FnKind::Method { class, .. } | FnKind::Ctor { class } => Some(class),
        }
    }

    pub fn is_ctor(&self) -> bool {
        matches!(self.kind, FnKind::Ctor { .. })
    }

    pub fn fn_type(&self) -> FnType {
        FnType { params: self.params.iter().map(|p| p.ty.clone()).collect(), ret: self.ret.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub id: NodeId,
    pub name: String,
    pub ty: Type,
    pub by_ref: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalDecl {
    pub id: NodeId,
    pub name: String,
    pub ty: Type,
    pub init: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    pub id: NodeId,
    pub stmts: Vec<Stmt>,
    pub close: NodeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Let { name: String, ty: Option<Type>, init: Expr },
    Assign { target: Expr, value: Expr },
    If { cond: Expr, then_block: Block, else_block: Option<Block> },
    While { cond: Expr, body: Block },
    Return(Option<Expr>),
    Expr(Expr),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }

    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Rem)
    }

    pub fn is_compare(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

/// Built-in intrinsics. Size-taking sinks are `alloc` and `read_buf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Builtin {
    ExternInput,
    AsInt,
    AsInt8,
    AsBool,
    AsRef,
    TagOf,
    Alloc,
    ReadBuf,
}

impl Builtin {
    pub const ALL: [Builtin; 8] = [
        Builtin::ExternInput,
        Builtin::AsInt,
        Builtin::AsInt8,
        Builtin::AsBool,
        Builtin::AsRef,
        Builtin::TagOf,
        Builtin::Alloc,
        Builtin::ReadBuf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::ExternInput => "extern_input",
            Builtin::AsInt => "as_int",
            Builtin::AsInt8 => "as_int8",
            Builtin::AsBool => "as_bool",
            Builtin::AsRef => "as_ref",
            Builtin::TagOf => "tag_of",
            Builtin::Alloc => "alloc",
            Builtin::ReadBuf => "read_buf",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn signature(self) -> FnType {
        let i32t = Type::Int(IntTy::I32);
        let (params, ret) = match self {
            Builtin::ExternInput => (vec![], Type::Var),
            Builtin::AsInt => (vec![Type::Var], i32t),
            Builtin::AsInt8 => (vec![Type::Var], Type::Int(IntTy::I8)),
            Builtin::AsBool => (vec![Type::Var], Type::Bool),
            Builtin::AsRef => (vec![Type::Var], Type::Buf),
            Builtin::TagOf => (vec![Type::Var], Type::Tag),
            Builtin::Alloc => (vec![i32t.clone()], Type::Buf),
            Builtin::ReadBuf => (vec![Type::Buf, i32t.clone()], i32t),
        };
        FnType { params, ret }
    }

    /// Tag the accessor expects, for the `as_*` family.
    pub fn accessor_tag(self) -> Option<Tag> {
        match self {
            Builtin::AsInt | Builtin::AsInt8 => Some(Tag::Int),
            Builtin::AsBool => Some(Tag::Bool),
            Builtin::AsRef => Some(Tag::Ref),
            _ => None,
        }
    }

    /// Index of the size argument for size-taking sinks.
    pub fn size_param(self) -> Option<usize> {
        match self {
            Builtin::Alloc => Some(0),
            Builtin::ReadBuf => Some(1),
            _ => None,
        }
    }
}

/// What a bare name refers to, filled in by the checker.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NameRes {
    Unresolved,
    Local,
    Global,
    /// Field of `this`, referenced without the `this.` prefix.
    Field(DeclId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CallRes {
    Unresolved,
    /// Free function, constructor-free direct method call.
    Direct(DeclId),
    /// Non-virtual method; receiver is the callee's object (or `this`).
    Method(DeclId),
    /// Dynamic dispatch on `slot` with receiver statically typed `class`.
    Virtual { class: String, slot: String },
    /// Call through a function value.
    Indirect,
    Builtin(Builtin),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    TagLit(Tag),
    This,
    Name { name: String, res: NameRes },
    Field { object: Box<Expr>, name: String, field: Option<DeclId> },
    Call { callee: Box<Expr>, args: Vec<Expr>, res: CallRes },
    New { class: String, args: Vec<Expr> },
    FnRef { name: String },
    Unary { op: UnOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Downcast { class: String, operand: Box<Expr> },
    Cast { to: Type, operand: Box<Expr> },
    Is { class: String, operand: Box<Expr> },
    /// Implicit conversion inserted by the checker.
    Convert { to: Type, operand: Box<Expr> },
}

impl Expr {
    pub fn new(id: NodeId, kind: ExprKind) -> Self {
        Expr { id, kind, ty: Type::Unknown }
    }

    /// Strip implicit conversions.
    pub fn peel(&self) -> &Expr {
        match &self.kind {
            ExprKind::Convert { operand, .. } => operand.peel(),
            _ => self,
        }
    }

    /// Whether the expression denotes an assignable place.
    pub fn is_place(&self) -> bool {
        matches!(self.kind, ExprKind::Name { .. } | ExprKind::Field { .. })
    }
}
