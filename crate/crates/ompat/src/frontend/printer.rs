//! AST-to-text emission. The fidelity contract is AST round-trip, not byte
//! round-trip: emitted text reparses to a structurally identical tree.

use std::fmt::Write;

use super::ast::*;

pub fn print(ast: &Ast) -> String {
    let mut p = Printer { out: String::new(), indent: 0 };
    for (i, item) in ast.items.iter().enumerate() {
        if i > 0 {
            p.out.push('\n');
        }
        match item {
            Item::Function(f) => p.function(f),
            Item::Global(d) => {
                p.decl_line(d);
            }
            Item::Threadprivate(d) => p.directive(d),
        }
    }
    p.out
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

    fn function(&mut self, f: &FunctionDef) {
        let mut sig = String::new();
        if f.is_static {
            sig.push_str("static ");
        }
        sig.push_str(base_type(f.return_type.base));
        sig.push(' ');
        sig.push_str(&f.name);
        sig.push('(');
        if f.params.is_empty() {
            sig.push_str("void");
        } else {
            for (i, p) in f.params.iter().enumerate() {
                if i > 0 {
                    sig.push_str(", ");
                }
                sig.push_str(&declarator(p));
            }
        }
        sig.push(')');
        self.line(&sig);
        self.stmt(&f.body);
    }

    fn decl_line(&mut self, d: &VarDecl) {
        let mut s = declarator(d);
        if let Some(init) = &d.init {
            write!(s, " = {}", expr(init, 0)).unwrap();
        }
        s.push(';');
        self.line(&s);
    }

    fn directive(&mut self, d: &OmpDirective) {
        let mut s = String::from("#pragma omp ");
        match &d.kind {
            DirectiveKind::Parallel => s.push_str("parallel"),
            DirectiveKind::For => s.push_str("for"),
            DirectiveKind::ParallelFor => s.push_str("parallel for"),
            DirectiveKind::Single => s.push_str("single"),
            DirectiveKind::Critical(name) => {
                s.push_str("critical");
                if let Some(n) = name {
                    write!(s, "({n})").unwrap();
                }
            }
            DirectiveKind::Atomic => s.push_str("atomic"),
            DirectiveKind::Barrier => s.push_str("barrier"),
            DirectiveKind::Threadprivate(vars) => {
                write!(s, "threadprivate({})", vars.join(", ")).unwrap();
            }
        }
        let c = &d.clauses;
        if let Some(k) = c.default {
            write!(s, " default({})", if k == DefaultKind::Shared { "shared" } else { "none" })
                .unwrap();
        }
        if let Some(e) = &c.if_condition {
            write!(s, " if({})", expr(e, 0)).unwrap();
        }
        for (name, vars) in [
            ("private", &c.private),
            ("firstprivate", &c.firstprivate),
            ("lastprivate", &c.lastprivate),
            ("shared", &c.shared),
        ] {
            if !vars.is_empty() {
                write!(s, " {name}({})", vars.join(", ")).unwrap();
            }
        }
        for r in &c.reductions {
            write!(s, " reduction({}:{})", r.op.symbol(), r.vars.join(", ")).unwrap();
        }
        if let Some(sc) = &c.schedule {
            let kind = match sc.kind {
                ScheduleKind::Static => "static",
                ScheduleKind::Dynamic => "dynamic",
                ScheduleKind::Guided => "guided",
            };
            match &sc.chunk {
                Some(ch) => write!(s, " schedule({kind}, {})", expr(ch, 0)).unwrap(),
                None => write!(s, " schedule({kind})").unwrap(),
            }
        }
        if c.nowait {
            s.push_str(" nowait");
        }
        self.line(&s);
    }

    fn stmt(&mut self, s: &Stmt) {
        if let Some(d) = &s.directive {
            self.directive(d);
            if matches!(s.kind, StmtKind::Standalone) {
                return;
            }
        }
        match &s.kind {
            StmtKind::Compound(items) => {
                self.line("{");
                self.indent += 1;
                for item in items {
                    self.stmt(item);
                }
                self.indent -= 1;
                self.line("}");
            }
            StmtKind::For(f) => {
                let h = &f.header;
                let cmp = match h.cmp {
                    LoopCmp::Lt => "<",
                    LoopCmp::Le => "<=",
                    LoopCmp::Gt => ">",
                    LoopCmp::Ge => ">=",
                };
                let step = match h.stride {
                    1 => format!("{}++", h.index),
                    -1 => format!("{}--", h.index),
                    s if s > 0 => format!("{} += {}", h.index, s),
                    s => format!("{} -= {}", h.index, -s),
                };
                self.line(&format!(
                    "for ({idx} = {lo}; {idx} {cmp} {hi}; {step})",
                    idx = h.index,
                    lo = expr(&h.lower, 0),
                    hi = expr(&h.upper, 0),
                ));
                self.nested(&f.body);
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                self.line(&format!("if ({})", expr(cond, 0)));
                self.nested(then_branch);
                if let Some(e) = else_branch {
                    self.line("else");
                    self.nested(e);
                }
            }
            StmtKind::Expr(e) => self.line(&format!("{};", expr(e, 0))),
            StmtKind::Decl(d) => self.decl_line(d),
            StmtKind::Return(v) => match v {
                Some(e) => self.line(&format!("return {};", expr(e, 0))),
                None => self.line("return;"),
            },
            StmtKind::Empty => self.line(";"),
            StmtKind::Standalone => {}
        }
    }

    /// Prints a statement in a body position, indenting non-compound bodies.
    fn nested(&mut self, s: &Stmt) {
        if matches!(s.kind, StmtKind::Compound(_)) && s.directive.is_none() {
            self.stmt(s);
        } else {
            self.indent += 1;
            self.stmt(s);
            self.indent -= 1;
        }
    }
}

fn base_type(b: BaseType) -> &'static str {
    match b {
        BaseType::Void => "void",
        BaseType::Int => "int",
        BaseType::Double => "double",
    }
}

fn declarator(d: &VarDecl) -> String {
    let mut s = String::new();
    if d.storage == Storage::Static {
        s.push_str("static ");
    }
    s.push_str(base_type(d.ty.base));
    s.push(' ');
    s.push_str(&d.name);
    for dim in &d.ty.dims {
        match dim {
            ArrayDim::Fixed(n) => write!(s, "[{n}]").unwrap(),
            ArrayDim::Unsized => s.push_str("[]"),
        }
    }
    s
}

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::LogOr => 1,
        BinOp::LogAnd => 2,
        BinOp::Eq | BinOp::Ne => 3,
        BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 4,
        BinOp::Add | BinOp::Sub => 5,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 6,
    }
}

fn op_str(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Mod => "%",
        BinOp::Lt => "<",
        BinOp::Gt => ">",
        BinOp::Le => "<=",
        BinOp::Ge => ">=",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::LogAnd => "&&",
        BinOp::LogOr => "||",
    }
}

pub fn expr(e: &Expr, parent_prec: u8) -> String {
    match &e.kind {
        ExprKind::IntLit(v) => format!("{v}"),
        // Debug formatting gives the shortest representation that reparses
        // to the same f64.
        ExprKind::FloatLit(v) => format!("{v:?}"),
        ExprKind::Var(n) => n.clone(),
        ExprKind::ArrayRef { base, subs } => {
            let mut s = base.clone();
            for sub in subs {
                write!(s, "[{}]", expr(sub, 0)).unwrap();
            }
            s
        }
        ExprKind::Call { callee, args } => {
            let args: Vec<String> = args.iter().map(|a| expr(a, 0)).collect();
            format!("{callee}({})", args.join(", "))
        }
        ExprKind::Unary { op, operand } => {
            let inner = expr(operand, 7);
            match op {
                UnaryOp::Neg => format!("-{inner}"),
                UnaryOp::Not => format!("!{inner}"),
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let prec = precedence(*op);
            let l = expr(lhs, prec);
            let r = expr(rhs, prec + 1);
            let body = format!("{l} {} {r}", op_str(*op));
            if prec < parent_prec {
                format!("({body})")
            } else {
                body
            }
        }
        ExprKind::Assign { op, target, value } => {
            let t = expr(target, 0);
            let v = expr(value, 0);
            match op {
                AssignOp::Assign => format!("{t} = {v}"),
                AssignOp::Add => format!("{t} += {v}"),
                AssignOp::Sub => format!("{t} -= {v}"),
                AssignOp::Mul => format!("{t} *= {v}"),
                AssignOp::Div => format!("{t} /= {v}"),
                AssignOp::Mod => format!("{t} %= {v}"),
            }
        }
    }
}
