//! Reduction recognition: accumulations of the shape `var = var op expr`
//! (or the min/max if-idiom) where the variable is not otherwise touched in
//! the loop. Array candidates report the element pattern.

use std::collections::BTreeMap;

use crate::frontend::ast::{
    AssignOp, BinOp, Expr, ExprKind, ForLoop, ReductionOp, Stmt, StmtKind,
};
use crate::frontend::Span;

use super::accesses::written_names;
use super::affine::{classify_subscript, AffineForm, Subscript};

#[derive(Debug, Clone)]
pub struct ReductionCandidate {
    pub variable: String,
    /// Present exactly when this is an array reduction: the affine subscript
    /// pattern of the accumulated element, one form per dimension.
    pub element_pattern: Option<Vec<AffineForm>>,
    pub op: ReductionOp,
    pub statements: Vec<Span>,
}

impl ReductionCandidate {
    pub fn is_array(&self) -> bool {
        self.element_pattern.is_some()
    }
}

struct Accum {
    variable: String,
    element: Option<Vec<AffineForm>>,
    op: ReductionOp,
    span: Span,
    valid: bool,
}

/// Recognizes reductions with respect to `loop_`: the accumulated element
/// must revisit across iterations of this loop, so array patterns whose
/// subscripts vary with the loop index are plain parallel updates, not
/// reductions.
pub fn recognize_reductions(loop_: &ForLoop) -> Vec<ReductionCandidate> {
    let written = written_names(loop_);
    let mut accums: Vec<Accum> = Vec::new();
    let mut indices = vec![loop_.header.index.clone()];
    scan(&loop_.body, &mut indices, &written, loop_, &mut accums);

    // Group by variable; mixed operators or any access outside the
    // accumulation statements disqualify the variable.
    let mut by_var: BTreeMap<String, Vec<&Accum>> = BTreeMap::new();
    for a in &accums {
        by_var.entry(a.variable.clone()).or_default().push(a);
    }
    let mut out = Vec::new();
    'vars: for (var, list) in by_var {
        if var == loop_.header.index {
            continue;
        }
        if list.iter().any(|a| !a.valid) {
            continue;
        }
        let op = list[0].op;
        if list.iter().any(|a| a.op != op) {
            continue;
        }
        let pattern = list[0].element.clone();
        for a in &list[1..] {
            if a.element != pattern {
                continue 'vars;
            }
        }
        let spans: Vec<Span> = list.iter().map(|a| a.span).collect();
        // Every other access of the variable must fall inside one of the
        // accumulation statements.
        let mut clean = true;
        let mut check = |e: &Expr| {
            let hit = match &e.kind {
                ExprKind::Var(n) => n == &var,
                ExprKind::ArrayRef { base, .. } => base == &var,
                _ => false,
            };
            if hit && !spans.iter().any(|s| s.lo <= e.span.lo && e.span.hi <= s.hi) {
                clean = false;
            }
        };
        loop_.body.walk_exprs(&mut check);
        if !clean {
            continue;
        }
        out.push(ReductionCandidate {
            variable: var,
            element_pattern: pattern,
            op,
            statements: spans,
        });
    }
    out
}

fn scan(
    s: &Stmt,
    indices: &mut Vec<String>,
    written: &std::collections::BTreeSet<String>,
    loop_: &ForLoop,
    out: &mut Vec<Accum>,
) {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                scan(item, indices, written, loop_, out);
            }
        }
        StmtKind::For(f) => {
            indices.push(f.header.index.clone());
            scan(&f.body, indices, written, loop_, out);
            indices.pop();
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            if else_branch.is_none() {
                if let Some(acc) = match_minmax(cond, then_branch, s.span, indices, written, loop_)
                {
                    out.push(acc);
                    return;
                }
            }
            scan(then_branch, indices, written, loop_, out);
            if let Some(e) = else_branch {
                scan(e, indices, written, loop_, out);
            }
        }
        StmtKind::Expr(e) => {
            if let Some(acc) = match_arith(e, s.span, indices, written, loop_) {
                out.push(acc);
            }
        }
        _ => {}
    }
}

/// `v = v + e`, `v = e + v`, `v += e`, and the `*` forms.
fn match_arith(
    e: &Expr,
    span: Span,
    indices: &[String],
    written: &std::collections::BTreeSet<String>,
    loop_: &ForLoop,
) -> Option<Accum> {
    let ExprKind::Assign { op, target, value } = &e.kind else { return None };
    let (red_op, rhs) = match op {
        AssignOp::Add => (ReductionOp::Add, (**value).clone()),
        AssignOp::Mul => (ReductionOp::Mul, (**value).clone()),
        AssignOp::Assign => {
            let ExprKind::Binary { op: bop, lhs, rhs } = &value.kind else { return None };
            let red = match bop {
                BinOp::Add => ReductionOp::Add,
                BinOp::Mul => ReductionOp::Mul,
                _ => return None,
            };
            if lhs.same_shape(target) {
                (red, (**rhs).clone())
            } else if rhs.same_shape(target) {
                (red, (**lhs).clone())
            } else {
                return None;
            }
        }
        _ => return None,
    };
    build_accum(target, red_op, &rhs, span, indices, written, loop_)
}

/// `if (v > e) v = e;` is a min accumulation; `if (v < e) v = e;` a max.
fn match_minmax(
    cond: &Expr,
    then_branch: &Stmt,
    span: Span,
    indices: &[String],
    written: &std::collections::BTreeSet<String>,
    loop_: &ForLoop,
) -> Option<Accum> {
    let assign = single_stmt(then_branch)?;
    let StmtKind::Expr(e) = &assign.kind else { return None };
    let ExprKind::Assign { op: AssignOp::Assign, target, value } = &e.kind else { return None };
    let ExprKind::Binary { op, lhs, rhs } = &cond.kind else { return None };
    if !lhs.same_shape(target) || !rhs.same_shape(value) {
        return None;
    }
    let red_op = match op {
        BinOp::Gt | BinOp::Ge => ReductionOp::Min,
        BinOp::Lt | BinOp::Le => ReductionOp::Max,
        _ => return None,
    };
    build_accum(target, red_op, value, span, indices, written, loop_)
}

fn single_stmt(s: &Stmt) -> Option<&Stmt> {
    match &s.kind {
        StmtKind::Compound(items) if items.len() == 1 => Some(&items[0]),
        StmtKind::Expr(_) => Some(s),
        _ => None,
    }
}

fn build_accum(
    target: &Expr,
    op: ReductionOp,
    expr: &Expr,
    span: Span,
    indices: &[String],
    written: &std::collections::BTreeSet<String>,
    loop_: &ForLoop,
) -> Option<Accum> {
    let (variable, element) = match &target.kind {
        ExprKind::Var(n) => (n.clone(), None),
        ExprKind::ArrayRef { base, subs } => {
            let mut forms = Vec::new();
            for sub in subs {
                match classify_subscript(sub, indices, written) {
                    Subscript::Affine(f) => forms.push(f),
                    Subscript::Opaque { .. } => return None,
                }
            }
            // A reduction revisits the element across iterations of the
            // analyzed loop; subscripts varying with its index are
            // iteration-owned updates instead.
            if forms.iter().any(|f| f.coeff(&loop_.header.index) != 0) {
                return None;
            }
            (base.clone(), Some(forms))
        }
        _ => return None,
    };
    let valid = !expr.mentions(&variable);
    Some(Accum { variable, element, op, span, valid })
}
