//! Syntactic access collection: one descriptor per array/scalar access in a
//! loop body, with subscripts classified affine or opaque.

use std::collections::BTreeSet;

use crate::frontend::ast::{Expr, ExprKind, ForLoop, Stmt, StmtKind};
use crate::frontend::Span;

use super::affine::{classify_subscript, Subscript};
use super::side_effects::SideEffectTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessMode {
    Read,
    Write,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessDescriptor {
    pub base: String,
    /// Empty for scalar accesses.
    pub subscripts: Vec<Subscript>,
    pub mode: AccessMode,
    pub site: Span,
}

impl AccessDescriptor {
    pub fn is_scalar(&self) -> bool {
        self.subscripts.is_empty()
    }

    pub fn is_write(&self) -> bool {
        self.mode == AccessMode::Write
    }

    pub fn has_opaque(&self) -> bool {
        self.subscripts.iter().any(Subscript::is_opaque)
    }

    pub fn has_indirect(&self) -> bool {
        self.subscripts.iter().any(Subscript::is_indirect)
    }
}

/// Names assigned anywhere in the loop body (scalar targets, array bases and
/// bare array arguments of calls, conservatively), plus inner loop indices.
pub fn written_names(loop_: &ForLoop) -> BTreeSet<String> {
    let mut written = BTreeSet::new();
    loop_.body.walk(&mut |s| {
        if let StmtKind::For(f) = &s.kind {
            written.insert(f.header.index.clone());
        }
    });
    loop_.body.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Assign { target, .. } => match &target.kind {
            ExprKind::Var(n) => {
                written.insert(n.clone());
            }
            ExprKind::ArrayRef { base, .. } => {
                written.insert(base.clone());
            }
            _ => {}
        },
        ExprKind::Call { args, .. } => {
            for a in args {
                if let ExprKind::Var(n) = &a.kind {
                    written.insert(n.clone());
                }
            }
        }
        _ => {}
    });
    written
}

/// One descriptor per syntactic array/scalar access in the body. Reads of
/// enclosing loop indices are not collected; they are part of the affine
/// forms instead.
pub fn collect_accesses(loop_: &ForLoop) -> Vec<AccessDescriptor> {
    let written = written_names(loop_);
    let mut out = Vec::new();
    let mut indices = vec![loop_.header.index.clone()];
    walk_stmt(&loop_.body, &mut indices, &written, &mut out);
    out
}

/// Like `collect_accesses`, but also injects conservative write descriptors
/// for the effects of calls, using the unit's side-effect summaries.
pub fn collect_accesses_with_effects(
    loop_: &ForLoop,
    effects: &SideEffectTable,
) -> Vec<AccessDescriptor> {
    let written = written_names(loop_);
    let mut out = Vec::new();
    let mut indices = vec![loop_.header.index.clone()];
    walk_stmt(&loop_.body, &mut indices, &written, &mut out);
    loop_.body.walk_exprs(&mut |e| {
        if let ExprKind::Call { callee, args } = &e.kind {
            for desc in effects.call_write_effects(callee, args, e.span) {
                out.push(desc);
            }
        }
    });
    out
}

fn walk_stmt(
    s: &Stmt,
    indices: &mut Vec<String>,
    written: &BTreeSet<String>,
    out: &mut Vec<AccessDescriptor>,
) {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                walk_stmt(item, indices, written, out);
            }
        }
        StmtKind::For(f) => {
            collect_expr(&f.header.lower, indices, written, out, AccessMode::Read);
            collect_expr(&f.header.upper, indices, written, out, AccessMode::Read);
            indices.push(f.header.index.clone());
            walk_stmt(&f.body, indices, written, out);
            indices.pop();
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            collect_expr(cond, indices, written, out, AccessMode::Read);
            walk_stmt(then_branch, indices, written, out);
            if let Some(e) = else_branch {
                walk_stmt(e, indices, written, out);
            }
        }
        StmtKind::Expr(e) => collect_expr(e, indices, written, out, AccessMode::Read),
        StmtKind::Decl(d) => {
            if let Some(init) = &d.init {
                collect_expr(init, indices, written, out, AccessMode::Read);
            }
        }
        StmtKind::Return(Some(e)) => collect_expr(e, indices, written, out, AccessMode::Read),
        _ => {}
    }
}

fn collect_expr(
    e: &Expr,
    indices: &[String],
    written: &BTreeSet<String>,
    out: &mut Vec<AccessDescriptor>,
    mode: AccessMode,
) {
    match &e.kind {
        ExprKind::Var(n) => {
            if !indices.contains(n) {
                out.push(AccessDescriptor {
                    base: n.clone(),
                    subscripts: Vec::new(),
                    mode,
                    site: e.span,
                });
            }
        }
        ExprKind::ArrayRef { base, subs } => {
            let subscripts =
                subs.iter().map(|s| classify_subscript(s, indices, written)).collect();
            out.push(AccessDescriptor { base: base.clone(), subscripts, mode, site: e.span });
            // Reads inside the subscripts themselves (e.g. the b[i] in
            // a[b[i]]) are separate accesses.
            for sub in subs {
                collect_expr(sub, indices, written, out, AccessMode::Read);
            }
        }
        ExprKind::Call { args, .. } => {
            for a in args {
                collect_expr(a, indices, written, out, AccessMode::Read);
            }
        }
        ExprKind::Unary { operand, .. } => collect_expr(operand, indices, written, out, mode),
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_expr(lhs, indices, written, out, AccessMode::Read);
            collect_expr(rhs, indices, written, out, AccessMode::Read);
        }
        ExprKind::Assign { op, target, value } => {
            collect_expr(value, indices, written, out, AccessMode::Read);
            // Compound assignment reads the target as well.
            if op.bin_op().is_some() {
                collect_expr(target, indices, written, out, AccessMode::Read);
            }
            collect_expr(target, indices, written, out, AccessMode::Write);
        }
        ExprKind::IntLit(_) | ExprKind::FloatLit(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{function_nests, parse_str};

    fn loop_of(src: &str) -> ForLoop {
        let ast = parse_str(src).unwrap();
        let f = ast.functions().next().unwrap();
        function_nests(f)[0].as_for().unwrap().clone()
    }

    #[test]
    fn identity_subscript() {
        let l = loop_of("void f(void) { int i; for (i = 0; i < 8; i++) { a[i] = a[i] + 1; } }");
        let accs = collect_accesses(&l);
        // write a[i], read a[i]; no scalar read of the index.
        assert_eq!(accs.len(), 2);
        assert!(accs.iter().any(|a| a.is_write() && a.base == "a"));
        assert!(accs.iter().all(|a| !a.has_opaque()));
    }

    #[test]
    fn indirect_subscript() {
        let l = loop_of("void f(void) { int i; for (i = 0; i < 8; i++) { a[b[i]] = x; } }");
        let accs = collect_accesses(&l);
        let w = accs.iter().find(|a| a.is_write()).unwrap();
        assert_eq!(w.base, "a");
        assert!(w.has_indirect());
        assert!(accs.iter().any(|a| a.base == "b" && !a.is_write() && !a.has_opaque()));
        assert!(accs.iter().any(|a| a.base == "x" && a.is_scalar()));
    }

    #[test]
    fn multidim_affine() {
        let l = loop_of(
            "void f(void) { int k; int j; int i;
               for (k = 0; k < 4; k++) { for (j = 0; j < 4; j++) { for (i = 0; i < 4; i++) {
                 u[k][j][i] = 0.0; } } } }",
        );
        let accs = collect_accesses(&l);
        let w = accs.iter().find(|a| a.is_write()).unwrap();
        assert_eq!(w.subscripts.len(), 3);
        assert!(w.subscripts.iter().all(|s| !s.is_opaque()));
    }

    #[test]
    fn compound_assign_reads_target() {
        let l = loop_of("void f(void) { int i; for (i = 0; i < 8; i++) { s += a[i]; } }");
        let accs = collect_accesses(&l);
        assert!(accs.iter().any(|a| a.base == "s" && a.is_write()));
        assert!(accs.iter().any(|a| a.base == "s" && !a.is_write()));
    }
}
