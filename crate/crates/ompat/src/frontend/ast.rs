//! Abstract syntax tree for the supported C subset with attached OpenMP
//! directives.
//!
//! Every statement carries a source span and an optional directive slot; the
//! printer/parser pair guarantees `parse . print . parse == parse` up to
//! spans, which `strip_spans` normalizes away for structural comparison.

use super::span::Span;

/// A parsed translation unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Function(FunctionDef),
    Global(VarDecl),
    /// File-scope `#pragma omp threadprivate(...)`.
    Threadprivate(OmpDirective),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub is_static: bool,
    pub return_type: CType,
    pub params: Vec<VarDecl>,
    pub body: Stmt,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Storage {
    Local,
    Static,
    Global,
    Param,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseType {
    Void,
    Int,
    Double,
}

/// One array dimension; `Unsized` covers `[]` and pointer-as-array params.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayDim {
    Fixed(i64),
    Unsized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CType {
    pub base: BaseType,
    pub dims: Vec<ArrayDim>,
}

impl CType {
    pub fn scalar(base: BaseType) -> Self {
        CType { base, dims: Vec::new() }
    }

    pub fn is_array(&self) -> bool {
        !self.dims.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub ty: CType,
    pub storage: Storage,
    pub init: Option<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
    pub directive: Option<OmpDirective>,
}

impl Stmt {
    pub fn new(kind: StmtKind, span: Span) -> Self {
        Stmt { kind, span, directive: None }
    }

    pub fn with_directive(kind: StmtKind, span: Span, directive: OmpDirective) -> Self {
        Stmt { kind, span, directive: Some(directive) }
    }

    pub fn as_for(&self) -> Option<&ForLoop> {
        match &self.kind {
            StmtKind::For(f) => Some(f),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Compound(Vec<Stmt>),
    For(ForLoop),
    If {
        cond: Expr,
        then_branch: Box<Stmt>,
        else_branch: Option<Box<Stmt>>,
    },
    Expr(Expr),
    Decl(VarDecl),
    Return(Option<Expr>),
    /// Bare `;`.
    Empty,
    /// A standalone directive (only `barrier`); the directive slot holds it.
    Standalone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForLoop {
    pub header: LoopHeader,
    pub body: Box<Stmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopDirection {
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopCmp {
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopHeader {
    pub index: String,
    pub lower: Expr,
    pub cmp: LoopCmp,
    pub upper: Expr,
    /// Nonzero; negative for descending loops.
    pub stride: i64,
    /// True when bounds are loop-invariant and the index is not written in
    /// the body. False forbids all parallelizing transforms on this loop.
    pub canonical: bool,
    pub span: Span,
}

impl LoopHeader {
    pub fn direction(&self) -> LoopDirection {
        if self.stride > 0 {
            LoopDirection::Ascending
        } else {
            LoopDirection::Descending
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn int(v: i64) -> Self {
        Expr::new(ExprKind::IntLit(v), Span::DUMMY)
    }

    pub fn float(v: f64) -> Self {
        Expr::new(ExprKind::FloatLit(v), Span::DUMMY)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::new(ExprKind::Var(name.into()), Span::DUMMY)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Expr::new(
            ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) },
            Span::DUMMY,
        )
    }

    pub fn array(base: impl Into<String>, subs: Vec<Expr>) -> Self {
        Expr::new(ExprKind::ArrayRef { base: base.into(), subs }, Span::DUMMY)
    }

    pub fn assign(op: AssignOp, target: Expr, value: Expr) -> Self {
        Expr::new(
            ExprKind::Assign { op, target: Box::new(target), value: Box::new(value) },
            Span::DUMMY,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    IntLit(i64),
    FloatLit(f64),
    Var(String),
    /// `base[s0][s1]...`; the base is a plain name in this subset.
    ArrayRef { base: String, subs: Vec<Expr> },
    Call { callee: String, args: Vec<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    /// Assignment appears only as a statement-level expression or a loop
    /// step; `i++`/`i--` are desugared to `i += 1`/`i -= 1`.
    Assign { op: AssignOp, target: Box<Expr>, value: Box<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    LogAnd,
    LogOr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Assign,
    Add,
    Sub,
    Mul,
    Div,
    Mod,
}

impl AssignOp {
    /// The arithmetic operator of a compound assignment.
    pub fn bin_op(self) -> Option<BinOp> {
        match self {
            AssignOp::Assign => None,
            AssignOp::Add => Some(BinOp::Add),
            AssignOp::Sub => Some(BinOp::Sub),
            AssignOp::Mul => Some(BinOp::Mul),
            AssignOp::Div => Some(BinOp::Div),
            AssignOp::Mod => Some(BinOp::Mod),
        }
    }
}

/// Structured model of one `#pragma omp` line.
#[derive(Debug, Clone, PartialEq)]
pub struct OmpDirective {
    pub kind: DirectiveKind,
    pub clauses: ClauseSet,
    pub span: Span,
}

impl OmpDirective {
    pub fn new(kind: DirectiveKind) -> Self {
        OmpDirective { kind, clauses: ClauseSet::default(), span: Span::DUMMY }
    }

    pub fn is_worksharing(&self) -> bool {
        matches!(self.kind, DirectiveKind::For | DirectiveKind::Single)
    }

    /// Does this directive start a parallel region?
    pub fn starts_region(&self) -> bool {
        matches!(self.kind, DirectiveKind::Parallel | DirectiveKind::ParallelFor)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectiveKind {
    Parallel,
    For,
    ParallelFor,
    Single,
    Critical(Option<String>),
    Atomic,
    Barrier,
    Threadprivate(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefaultKind {
    Shared,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ReductionOp {
    Add,
    Mul,
    Min,
    Max,
}

impl ReductionOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ReductionOp::Add => "+",
            ReductionOp::Mul => "*",
            ReductionOp::Min => "min",
            ReductionOp::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionClause {
    pub op: ReductionOp,
    pub vars: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    Static,
    Dynamic,
    Guided,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleClause {
    pub kind: ScheduleKind,
    pub chunk: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClauseSet {
    pub default: Option<DefaultKind>,
    pub if_condition: Option<Expr>,
    pub private: Vec<String>,
    pub firstprivate: Vec<String>,
    pub lastprivate: Vec<String>,
    pub shared: Vec<String>,
    pub reductions: Vec<ReductionClause>,
    pub schedule: Option<ScheduleClause>,
    pub nowait: bool,
}

impl ClauseSet {
    /// All variables named in data-sharing clauses, for the one-clause-per-
    /// variable invariant.
    pub fn data_sharing_vars(&self) -> Vec<&str> {
        let mut v: Vec<&str> = Vec::new();
        v.extend(self.private.iter().map(String::as_str));
        v.extend(self.firstprivate.iter().map(String::as_str));
        v.extend(self.lastprivate.iter().map(String::as_str));
        v.extend(self.shared.iter().map(String::as_str));
        for r in &self.reductions {
            v.extend(r.vars.iter().map(String::as_str));
        }
        v
    }

    pub fn has_dynamic_or_guided(&self) -> bool {
        matches!(
            self.schedule,
            Some(ScheduleClause { kind: ScheduleKind::Dynamic | ScheduleKind::Guided, .. })
        )
    }
}

// ---------------------------------------------------------------------------
// Span normalization and structural equality
// ---------------------------------------------------------------------------

impl Ast {
    /// Copy with all spans set to `Span::DUMMY`; two parses of equivalent
    /// text compare equal after this.
    pub fn normalized(&self) -> Ast {
        let mut a = self.clone();
        a.strip_spans();
        a
    }

    pub fn strip_spans(&mut self) {
        for item in &mut self.items {
            match item {
                Item::Function(f) => {
                    f.span = Span::DUMMY;
                    for p in &mut f.params {
                        strip_decl(p);
                    }
                    strip_stmt(&mut f.body);
                }
                Item::Global(d) => strip_decl(d),
                Item::Threadprivate(d) => d.span = Span::DUMMY,
            }
        }
    }

    pub fn structurally_equal(&self, other: &Ast) -> bool {
        self.normalized() == other.normalized()
    }
}

fn strip_decl(d: &mut VarDecl) {
    d.span = Span::DUMMY;
    if let Some(e) = &mut d.init {
        strip_expr(e);
    }
}

fn strip_stmt(s: &mut Stmt) {
    s.span = Span::DUMMY;
    if let Some(d) = &mut s.directive {
        strip_directive(d);
    }
    match &mut s.kind {
        StmtKind::Compound(items) => items.iter_mut().for_each(strip_stmt),
        StmtKind::For(f) => {
            f.header.span = Span::DUMMY;
            strip_expr(&mut f.header.lower);
            strip_expr(&mut f.header.upper);
            strip_stmt(&mut f.body);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            strip_expr(cond);
            strip_stmt(then_branch);
            if let Some(e) = else_branch {
                strip_stmt(e);
            }
        }
        StmtKind::Expr(e) => strip_expr(e),
        StmtKind::Decl(d) => strip_decl(d),
        StmtKind::Return(e) => {
            if let Some(e) = e {
                strip_expr(e);
            }
        }
        StmtKind::Empty | StmtKind::Standalone => {}
    }
}

fn strip_directive(d: &mut OmpDirective) {
    d.span = Span::DUMMY;
    if let Some(e) = &mut d.clauses.if_condition {
        strip_expr(e);
    }
    if let Some(s) = &mut d.clauses.schedule {
        if let Some(c) = &mut s.chunk {
            strip_expr(c);
        }
    }
}

fn strip_expr(e: &mut Expr) {
    e.span = Span::DUMMY;
    match &mut e.kind {
        ExprKind::IntLit(_) | ExprKind::FloatLit(_) | ExprKind::Var(_) => {}
        ExprKind::ArrayRef { subs, .. } => subs.iter_mut().for_each(strip_expr),
        ExprKind::Call { args, .. } => args.iter_mut().for_each(strip_expr),
        ExprKind::Unary { operand, .. } => strip_expr(operand),
        ExprKind::Binary { lhs, rhs, .. } => {
            strip_expr(lhs);
            strip_expr(rhs);
        }
        ExprKind::Assign { target, value, .. } => {
            strip_expr(target);
            strip_expr(value);
        }
    }
}

// ---------------------------------------------------------------------------
// Traversal helpers
// ---------------------------------------------------------------------------

impl Stmt {
    /// Pre-order walk over this statement and all nested statements.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        match &self.kind {
            StmtKind::Compound(items) => {
                for s in items {
                    s.walk(f);
                }
            }
            StmtKind::For(l) => l.body.walk(f),
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.walk(f);
                if let Some(e) = else_branch {
                    e.walk(f);
                }
            }
            _ => {}
        }
    }

    /// Visit every expression in this statement tree, including loop bounds,
    /// if conditions, declaration initializers and directive expressions.
    pub fn walk_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        self.walk(&mut |s| {
            if let Some(d) = &s.directive {
                if let Some(c) = &d.clauses.if_condition {
                    c.walk(f);
                }
                if let Some(sched) = &d.clauses.schedule {
                    if let Some(chunk) = &sched.chunk {
                        chunk.walk(f);
                    }
                }
            }
            match &s.kind {
                StmtKind::For(l) => {
                    l.header.lower.walk(f);
                    l.header.upper.walk(f);
                }
                StmtKind::If { cond, .. } => cond.walk(f),
                StmtKind::Expr(e) => e.walk(f),
                StmtKind::Decl(d) => {
                    if let Some(i) = &d.init {
                        i.walk(f);
                    }
                }
                StmtKind::Return(Some(e)) => e.walk(f),
                _ => {}
            }
        });
    }

    /// Mutable pre-order walk.
    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Stmt)) {
        f(self);
        match &mut self.kind {
            StmtKind::Compound(items) => {
                for s in items {
                    s.walk_mut(f);
                }
            }
            StmtKind::For(l) => l.body.walk_mut(f),
            StmtKind::If { then_branch, else_branch, .. } => {
                then_branch.walk_mut(f);
                if let Some(e) = else_branch {
                    e.walk_mut(f);
                }
            }
            _ => {}
        }
    }
}

impl Expr {
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::IntLit(_) | ExprKind::FloatLit(_) | ExprKind::Var(_) => {}
            ExprKind::ArrayRef { subs, .. } => {
                for s in subs {
                    s.walk(f);
                }
            }
            ExprKind::Call { args, .. } => {
                for a in args {
                    a.walk(f);
                }
            }
            ExprKind::Unary { operand, .. } => operand.walk(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.walk(f);
                rhs.walk(f);
            }
            ExprKind::Assign { target, value, .. } => {
                target.walk(f);
                value.walk(f);
            }
        }
    }

    /// Structural equality ignoring spans.
    pub fn same_shape(&self, other: &Expr) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        strip_expr(&mut a);
        strip_expr(&mut b);
        a == b
    }

    /// Does any subexpression read `name` (as a variable or array base)?
    pub fn mentions(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |e| match &e.kind {
            ExprKind::Var(n) if n == name => found = true,
            ExprKind::ArrayRef { base, .. } if base == name => found = true,
            _ => {}
        });
        found
    }
}

impl Ast {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDef> {
        self.functions().find(|f| f.name == name)
    }

    /// Names listed in any file-scope threadprivate directive.
    pub fn threadprivate_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        for item in &self.items {
            if let Item::Threadprivate(d) = item {
                if let DirectiveKind::Threadprivate(vars) = &d.kind {
                    out.extend(vars.iter().map(String::as_str));
                }
            }
        }
        out
    }

    /// File-scope declaration for `name`, if any.
    pub fn global_decl(&self, name: &str) -> Option<&VarDecl> {
        self.items.iter().find_map(|i| match i {
            Item::Global(d) if d.name == name => Some(d),
            _ => None,
        })
    }
}
