//! Scalar and whole-array privatization: a variable is private when every
//! read in the loop body is dominated by a same-iteration write; anything
//! unclassifiable stays shared.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::{Expr, ExprKind, ForLoop, LoopCmp, Stmt, StmtKind};

use super::affine::LinearExpr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrivClass {
    Private,
    Firstprivate,
    Lastprivate,
    Shared,
    /// Static or global variable that privatizes cleanly; a candidate for
    /// threadprivate conversion.
    ThreadprivateCandidate,
}

#[derive(Debug, Clone, Default)]
pub struct PrivatizationResult {
    pub classes: BTreeMap<String, PrivClass>,
}

impl PrivatizationResult {
    pub fn class(&self, var: &str) -> PrivClass {
        self.classes.get(var).copied().unwrap_or(PrivClass::Shared)
    }

    pub fn is_privatizable(&self, var: &str) -> bool {
        matches!(
            self.class(var),
            PrivClass::Private
                | PrivClass::Firstprivate
                | PrivClass::Lastprivate
                | PrivClass::ThreadprivateCandidate
        )
    }
}

/// Context the enclosing function supplies: liveness after the loop, declared
/// extents of 1-D arrays, and which names have static/global storage.
#[derive(Debug, Clone, Default)]
pub struct PrivatizeCtx {
    pub live_after: BTreeSet<String>,
    pub array_extents: BTreeMap<String, i64>,
    pub persistent: BTreeSet<String>,
}

#[derive(Default)]
struct Facts {
    reads: BTreeSet<String>,
    writes: BTreeSet<String>,
    /// A read was observed on some path with no dominating same-iteration
    /// write.
    read_before_write: BTreeSet<String>,
    /// Names declared inside the loop body; block scoping already privatizes
    /// them, so they never appear in clauses.
    body_locals: BTreeSet<String>,
    /// Array name -> whether its first access is a covering initialization.
    array_first_covered: BTreeMap<String, bool>,
    arrays_seen: BTreeSet<String>,
}

pub fn find_private(loop_: &ForLoop, ctx: &PrivatizeCtx) -> PrivatizationResult {
    let mut facts = Facts::default();
    let mut written: BTreeSet<String> = BTreeSet::new();
    scan_stmt(&loop_.body, &mut written, &mut facts, ctx);

    let mut result = PrivatizationResult::default();
    let vars: BTreeSet<&String> = facts.reads.union(&facts.writes).collect();
    for var in vars {
        if var == &loop_.header.index || facts.body_locals.contains(var) {
            continue;
        }
        if facts.arrays_seen.contains(var) {
            let covered = facts.array_first_covered.get(var).copied().unwrap_or(false);
            let class = if covered && !ctx.live_after.contains(var) {
                if ctx.persistent.contains(var) {
                    PrivClass::ThreadprivateCandidate
                } else {
                    PrivClass::Private
                }
            } else {
                PrivClass::Shared
            };
            result.classes.insert(var.clone(), class);
            continue;
        }
        let class = if !facts.writes.contains(var) || facts.read_before_write.contains(var) {
            PrivClass::Shared
        } else if ctx.live_after.contains(var) {
            PrivClass::Lastprivate
        } else if ctx.persistent.contains(var) {
            PrivClass::ThreadprivateCandidate
        } else {
            PrivClass::Private
        };
        result.classes.insert(var.clone(), class);
    }
    result
}

fn scan_stmt(s: &Stmt, written: &mut BTreeSet<String>, facts: &mut Facts, ctx: &PrivatizeCtx) {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                scan_stmt(item, written, facts, ctx);
            }
        }
        StmtKind::For(f) => {
            scan_expr(&f.header.lower, written, facts, false);
            scan_expr(&f.header.upper, written, facts, false);
            if is_covering_init(f, ctx) {
                let base = covered_array(f).unwrap();
                facts.array_first_covered.entry(base.clone()).or_insert(true);
                facts.arrays_seen.insert(base.clone());
                facts.writes.insert(base);
            }
            // The header initialization always runs.
            facts.writes.insert(f.header.index.clone());
            written.insert(f.header.index.clone());
            // Body writes are not guaranteed to execute (zero-trip loops);
            // scan with a child state and keep only the read facts.
            let mut child = written.clone();
            scan_stmt(&f.body, &mut child, facts, ctx);
        }
        StmtKind::If { cond, then_branch, else_branch, .. } => {
            scan_expr(cond, written, facts, false);
            let mut then_state = written.clone();
            scan_stmt(then_branch, &mut then_state, facts, ctx);
            match else_branch {
                Some(e) => {
                    let mut else_state = written.clone();
                    scan_stmt(e, &mut else_state, facts, ctx);
                    *written = then_state.intersection(&else_state).cloned().collect();
                }
                None => {}
            }
        }
        StmtKind::Expr(e) => scan_expr(e, written, facts, true),
        StmtKind::Decl(d) => {
            facts.body_locals.insert(d.name.clone());
            if let Some(init) = &d.init {
                scan_expr(init, written, facts, false);
            }
            written.insert(d.name.clone());
        }
        StmtKind::Return(Some(e)) => scan_expr(e, written, facts, false),
        _ => {}
    }
}

fn scan_expr(e: &Expr, written: &mut BTreeSet<String>, facts: &mut Facts, _stmt_level: bool) {
    match &e.kind {
        ExprKind::Var(n) => {
            facts.reads.insert(n.clone());
            if !written.contains(n) {
                facts.read_before_write.insert(n.clone());
            }
        }
        ExprKind::ArrayRef { base, subs } => {
            facts.arrays_seen.insert(base.clone());
            facts.array_first_covered.entry(base.clone()).or_insert(false);
            facts.reads.insert(base.clone());
            for sub in subs {
                scan_expr(sub, written, facts, false);
            }
        }
        ExprKind::Call { args, .. } => {
            for a in args {
                scan_expr(a, written, facts, false);
                // A bare array argument may be written by the callee.
                if let ExprKind::Var(n) = &a.kind {
                    facts.arrays_seen.insert(n.clone());
                    facts.array_first_covered.entry(n.clone()).or_insert(false);
                    facts.writes.insert(n.clone());
                }
            }
        }
        ExprKind::Unary { operand, .. } => scan_expr(operand, written, facts, false),
        ExprKind::Binary { lhs, rhs, .. } => {
            scan_expr(lhs, written, facts, false);
            scan_expr(rhs, written, facts, false);
        }
        ExprKind::Assign { op, target, value } => {
            scan_expr(value, written, facts, false);
            match &target.kind {
                ExprKind::Var(n) => {
                    if op.bin_op().is_some() {
                        facts.reads.insert(n.clone());
                        if !written.contains(n) {
                            facts.read_before_write.insert(n.clone());
                        }
                    }
                    facts.writes.insert(n.clone());
                    written.insert(n.clone());
                }
                ExprKind::ArrayRef { base, subs } => {
                    facts.arrays_seen.insert(base.clone());
                    facts.array_first_covered.entry(base.clone()).or_insert(false);
                    facts.writes.insert(base.clone());
                    if op.bin_op().is_some() {
                        facts.reads.insert(base.clone());
                    }
                    for sub in subs {
                        scan_expr(sub, written, facts, false);
                    }
                }
                _ => {}
            }
        }
        ExprKind::IntLit(_) | ExprKind::FloatLit(_) => {}
    }
}

/// A loop of the shape `for (m = 0; m < extent; m++) a[m] = expr;` writing
/// the array's full declared extent before anything else touches it.
fn is_covering_init(f: &ForLoop, ctx: &PrivatizeCtx) -> bool {
    let Some(base) = covered_array(f) else { return false };
    let Some(extent) = ctx.array_extents.get(&base) else { return false };
    let h = &f.header;
    if h.stride != 1 || h.cmp != LoopCmp::Lt {
        return false;
    }
    let lower = LinearExpr::from_expr(&h.lower).and_then(|l| l.as_constant());
    let upper = LinearExpr::from_expr(&h.upper).and_then(|l| l.as_constant());
    lower == Some(0) && upper == Some(*extent)
}

fn covered_array(f: &ForLoop) -> Option<String> {
    let body: &Stmt = &f.body;
    let stmt = match &body.kind {
        StmtKind::Compound(items) if items.len() == 1 => &items[0],
        StmtKind::Expr(_) => body,
        _ => return None,
    };
    let StmtKind::Expr(e) = &stmt.kind else { return None };
    let ExprKind::Assign { op, target, value } = &e.kind else { return None };
    if op.bin_op().is_some() {
        return None;
    }
    let ExprKind::ArrayRef { base, subs } = &target.kind else { return None };
    if subs.len() != 1 {
        return None;
    }
    let ExprKind::Var(idx) = &subs[0].kind else { return None };
    if idx != &f.header.index || value.mentions(base) {
        return None;
    }
    Some(base.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{function_nests, parse_str};

    fn classify(src: &str, ctx: &PrivatizeCtx) -> PrivatizationResult {
        let ast = parse_str(src).unwrap();
        let f = ast.functions().next().unwrap();
        let l = function_nests(f)[0].as_for().unwrap().clone();
        find_private(&l, ctx)
    }

    #[test]
    fn write_before_read_is_private() {
        let r = classify(
            "void f(void) { int i; double t; for (i = 0; i < 8; i++) { t = a[i]; b[i] = t * t; } }",
            &PrivatizeCtx::default(),
        );
        assert_eq!(r.class("t"), PrivClass::Private);
    }

    #[test]
    fn read_on_some_path_first_is_shared() {
        let r = classify(
            "void f(void) { int i; double t;
               for (i = 0; i < 8; i++) { if (a[i] > 0.0) { t = a[i]; } b[i] = t; } }",
            &PrivatizeCtx::default(),
        );
        assert_eq!(r.class("t"), PrivClass::Shared);
    }

    #[test]
    fn live_after_makes_lastprivate() {
        let mut ctx = PrivatizeCtx::default();
        ctx.live_after.insert("t".to_string());
        let r = classify(
            "void f(void) { int i; double t; for (i = 0; i < 8; i++) { t = a[i]; b[i] = t; } }",
            &ctx,
        );
        assert_eq!(r.class("t"), PrivClass::Lastprivate);
    }

    #[test]
    fn read_only_is_shared() {
        let r = classify(
            "void f(double s) { int i; for (i = 0; i < 8; i++) { b[i] = s; } }",
            &PrivatizeCtx::default(),
        );
        assert_eq!(r.class("s"), PrivClass::Shared);
    }

    #[test]
    fn inner_index_is_private() {
        let r = classify(
            "void f(void) { int i; int j; for (i = 0; i < 8; i++) { for (j = 0; j < 4; j++) { c[i][j] = 0.0; } } }",
            &PrivatizeCtx::default(),
        );
        assert_eq!(r.class("j"), PrivClass::Private);
    }

    #[test]
    fn covered_array_is_private() {
        let mut ctx = PrivatizeCtx::default();
        ctx.array_extents.insert("t".to_string(), 5);
        let r = classify(
            "void f(void) { int i; int m; double t[5];
               for (i = 0; i < 8; i++) {
                 for (m = 0; m < 5; m++) t[m] = a[i][m];
                 for (m = 0; m < 5; m++) b[i][m] = t[m] * 2.0;
               } }",
            &ctx,
        );
        assert_eq!(r.class("t"), PrivClass::Private);
    }

    #[test]
    fn partially_written_array_is_shared() {
        let mut ctx = PrivatizeCtx::default();
        ctx.array_extents.insert("t".to_string(), 5);
        let r = classify(
            "void f(void) { int i; double t[5];
               for (i = 0; i < 8; i++) { t[0] = a[i]; b[i] = t[0]; } }",
            &ctx,
        );
        assert_eq!(r.class("t"), PrivClass::Shared);
    }

    #[test]
    fn static_private_is_threadprivate_candidate() {
        let mut ctx = PrivatizeCtx::default();
        ctx.persistent.insert("t".to_string());
        let r = classify(
            "double t; void f(void) { int i; for (i = 0; i < 8; i++) { t = a[i]; b[i] = t; } }",
            &ctx,
        );
        assert_eq!(r.class("t"), PrivClass::ThreadprivateCandidate);
    }
}
