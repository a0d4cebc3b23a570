//! Loop workload estimation and profitability: the estimate is the product
//! of the executable statement count and the iteration counts through the
//! nest levels, kept symbolic when bounds are.

use std::collections::BTreeSet;

use crate::analysis::affine::LinearExpr;
use crate::analysis::side_effects::AnalysisConfig;
use crate::frontend::ast::{
    BinOp, Expr, ExprKind, ForLoop, LoopCmp, Stmt, StmtKind,
};

/// Symbolic workload of a loop nest.
#[derive(Debug, Clone)]
pub struct WorkloadEstimate {
    /// Product of statement count and per-level iteration counts.
    pub expr: Expr,
    pub evaluable: bool,
    pub value: Option<i64>,
}

/// Iteration-count expression `(upper - lower) / stride` for one level,
/// folded when constant.
fn trip_expr(loop_: &ForLoop) -> Expr {
    let h = &loop_.header;
    let (lo, hi) = match h.cmp {
        LoopCmp::Lt | LoopCmp::Le => (h.lower.clone(), h.upper.clone()),
        LoopCmp::Gt | LoopCmp::Ge => (h.upper.clone(), h.lower.clone()),
    };
    let mut span = Expr::binary(BinOp::Sub, hi, lo);
    if matches!(h.cmp, LoopCmp::Le | LoopCmp::Ge) {
        span = Expr::binary(BinOp::Add, span, Expr::int(1));
    }
    let stride = h.stride.abs();
    let trip = if stride == 1 {
        span
    } else {
        Expr::binary(BinOp::Div, span, Expr::int(stride))
    };
    fold(&trip)
}

/// Rebuild a canonical expression from a linear form: constants fold, zero
/// terms drop, and coefficients become explicit products.
fn expr_from_linear(l: &LinearExpr) -> Expr {
    let mut acc: Option<Expr> = None;
    for (name, coeff) in &l.terms {
        if *coeff == 0 {
            continue;
        }
        let term = match coeff {
            1 => Expr::var(name.clone()),
            -1 => Expr::new(
                ExprKind::Unary {
                    op: crate::frontend::ast::UnaryOp::Neg,
                    operand: Box::new(Expr::var(name.clone())),
                },
                crate::frontend::Span::DUMMY,
            ),
            c => Expr::binary(BinOp::Mul, Expr::int(*c), Expr::var(name.clone())),
        };
        acc = Some(match acc {
            None => term,
            Some(prev) => Expr::binary(BinOp::Add, prev, term),
        });
    }
    match acc {
        None => Expr::int(l.constant),
        Some(e) if l.constant == 0 => e,
        Some(e) if l.constant > 0 => Expr::binary(BinOp::Add, e, Expr::int(l.constant)),
        Some(e) => Expr::binary(BinOp::Sub, e, Expr::int(-l.constant)),
    }
}

/// Constant-folds +, -, *, / over integer literals, canonicalizes linear
/// subexpressions, and drops multiplications by one.
fn fold(e: &Expr) -> Expr {
    if let Some(l) = LinearExpr::from_expr(e) {
        return expr_from_linear(&l);
    }
    match &e.kind {
        ExprKind::Binary { op, lhs, rhs } => {
            let l = fold(lhs);
            let r = fold(rhs);
            if let (ExprKind::IntLit(a), ExprKind::IntLit(b)) = (&l.kind, &r.kind) {
                let v = match op {
                    BinOp::Add => Some(a + b),
                    BinOp::Sub => Some(a - b),
                    BinOp::Mul => Some(a * b),
                    BinOp::Div if *b != 0 => Some(a / b),
                    _ => None,
                };
                if let Some(v) = v {
                    return Expr::int(v);
                }
            }
            if *op == BinOp::Mul {
                if matches!(l.kind, ExprKind::IntLit(1)) {
                    return r;
                }
                if matches!(r.kind, ExprKind::IntLit(1)) {
                    return l;
                }
            }
            Expr::binary(*op, l, r)
        }
        _ => e.clone(),
    }
}

/// Executable statements in a statement tree; calls count as one, loop
/// headers are not counted, branches contribute both arms plus the test.
fn statement_count(s: &Stmt) -> i64 {
    match &s.kind {
        StmtKind::Compound(items) => items.iter().map(statement_count).sum(),
        StmtKind::For(_) => 0,
        StmtKind::If { then_branch, else_branch, .. } => {
            1 + statement_count(then_branch)
                + else_branch.as_ref().map(|e| statement_count(e)).unwrap_or(0)
        }
        StmtKind::Expr(_) | StmtKind::Return(_) => 1,
        StmtKind::Decl(d) => i64::from(d.init.is_some()),
        StmtKind::Empty | StmtKind::Standalone => 0,
    }
}

fn workload_of_body(s: &Stmt) -> Expr {
    let mut expr = Expr::int(statement_count(s));
    let mut loops: Vec<&ForLoop> = Vec::new();
    collect_direct_loops(s, &mut loops);
    for l in loops {
        let inner = workload_of_loop(l);
        expr = fold(&Expr::binary(BinOp::Add, expr, inner));
    }
    expr
}

fn collect_direct_loops<'a>(s: &'a Stmt, out: &mut Vec<&'a ForLoop>) {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                collect_direct_loops(item, out);
            }
        }
        StmtKind::For(f) => out.push(f),
        StmtKind::If { then_branch, else_branch, .. } => {
            collect_direct_loops(then_branch, out);
            if let Some(e) = else_branch {
                collect_direct_loops(e, out);
            }
        }
        _ => {}
    }
}

fn workload_of_loop(l: &ForLoop) -> Expr {
    let trips = trip_expr(l);
    let body = workload_of_body(&l.body);
    fold(&Expr::binary(BinOp::Mul, trips, body))
}

/// Workload of a nest: statement count times iteration count per level.
pub fn workload(nest: &ForLoop) -> WorkloadEstimate {
    let expr = workload_of_loop(nest);
    let value = match &expr.kind {
        ExprKind::IntLit(v) => Some((*v).max(0)),
        _ => None,
    };
    WorkloadEstimate { evaluable: value.is_some(), value, expr }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Decision {
    Serial,
    Parallel,
    /// Parallelize under `if (expr > threshold)`.
    Conditional(Expr),
}

/// Evaluable workloads below the threshold run serial; at or above it,
/// parallel. Symbolic workloads get a conditional guard.
pub fn is_profitable(est: &WorkloadEstimate, threshold: i64) -> Decision {
    assert!(threshold > 0, "threshold must be positive");
    match est.value {
        Some(v) if v < threshold => Decision::Serial,
        Some(_) => Decision::Parallel,
        None => Decision::Conditional(Expr::binary(
            BinOp::Gt,
            est.expr.clone(),
            Expr::int(threshold),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ImbalanceReason {
    TriangularInner,
    ConditionalBody,
    IterationDependentCall,
}

impl std::fmt::Display for ImbalanceReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ImbalanceReason::TriangularInner => write!(f, "triangular_inner"),
            ImbalanceReason::ConditionalBody => write!(f, "conditional_body"),
            ImbalanceReason::IterationDependentCall => write!(f, "iteration_dependent_call"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ImbalanceSignal {
    pub reasons: BTreeSet<ImbalanceReason>,
}

impl ImbalanceSignal {
    pub fn is_empty(&self) -> bool {
        self.reasons.is_empty()
    }
}

/// Detects workload shapes prone to uneven distribution across threads:
/// inner bounds depending on the parallel index, branches guarded by
/// loop-varying data, and calls whose cost varies with the iteration.
pub fn imbalance_score(
    nest: &ForLoop,
    defined_functions: &BTreeSet<String>,
    config: &AnalysisConfig,
) -> ImbalanceSignal {
    let index = nest.header.index.clone();
    let written = crate::analysis::accesses::written_names(nest);
    let mut signal = ImbalanceSignal::default();
    nest.body.walk(&mut |s| match &s.kind {
        StmtKind::For(inner) => {
            if inner.header.lower.mentions(&index) || inner.header.upper.mentions(&index) {
                signal.reasons.insert(ImbalanceReason::TriangularInner);
            }
        }
        StmtKind::If { cond, .. } => {
            let mut varying = cond.mentions(&index);
            cond.walk(&mut |e| match &e.kind {
                ExprKind::ArrayRef { .. } => varying = true,
                ExprKind::Var(n) if written.contains(n) => varying = true,
                _ => {}
            });
            if varying {
                signal.reasons.insert(ImbalanceReason::ConditionalBody);
            }
        }
        _ => {}
    });
    nest.body.walk_exprs(&mut |e| {
        if let ExprKind::Call { callee, args } = &e.kind {
            let known = defined_functions.contains(callee) || config.pure_functions.contains(callee);
            if !known && args.iter().any(|a| a.mentions(&index)) {
                signal.reasons.insert(ImbalanceReason::IterationDependentCall);
            }
        }
    });
    signal
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::printer;
    use crate::frontend::{function_nests, parse_str};

    fn nest_of(src: &str) -> ForLoop {
        let ast = parse_str(src).unwrap();
        let f = ast.functions().next().unwrap();
        function_nests(f)[0].as_for().unwrap().clone()
    }

    #[test]
    fn constant_workload() {
        let l = nest_of(
            "void f(void) { int i; for (i = 0; i < 100; i++) { a[i] = 0; b[i] = 1; c[i] = 2; d[i] = 3; e[i] = 4; } }",
        );
        let w = workload(&l);
        assert!(w.evaluable);
        assert_eq!(w.value, Some(500));
    }

    #[test]
    fn symbolic_workload_is_a_product() {
        let l = nest_of(
            "void f(int n, int m) { int i; int j;
               for (i = 0; i < n; i++) { for (j = 0; j < m; j++) { a[i][j] = 0; b[i][j] = 1; c[i][j] = 2; } } }",
        );
        let w = workload(&l);
        assert!(!w.evaluable);
        let text = printer::expr(&w.expr, 0);
        assert!(text.contains('n') && text.contains('m') && text.contains('3'), "{text}");
    }

    #[test]
    fn empty_body_is_zero() {
        let l = nest_of("void f(void) { int i; for (i = 0; i < 10; i++) { } }");
        assert_eq!(workload(&l).value, Some(0));
    }

    #[test]
    fn profitability_boundary_is_inclusive() {
        let mk = |v: i64| WorkloadEstimate { expr: Expr::int(v), evaluable: true, value: Some(v) };
        assert_eq!(is_profitable(&mk(9999), 10000), Decision::Serial);
        assert_eq!(is_profitable(&mk(10000), 10000), Decision::Parallel);
        assert_eq!(is_profitable(&mk(10001), 10000), Decision::Parallel);
    }

    #[test]
    fn symbolic_gets_conditional() {
        let l = nest_of(
            "void f(int n) { int i; for (i = 0; i < n; i++) { a[i] = 0; b[i] = 1; c[i] = 2; d[i] = 3; e[i] = 4; } }",
        );
        let w = workload(&l);
        match is_profitable(&w, 10000) {
            Decision::Conditional(e) => {
                let text = printer::expr(&e, 0);
                assert!(text.contains("> 10000"), "{text}");
                assert!(text.contains('5') && text.contains('n'), "{text}");
            }
            other => panic!("expected conditional, got {other:?}"),
        }
    }

    #[test]
    fn triangular_inner_flags() {
        let l = nest_of(
            "void f(void) { int i; int j; for (i = 0; i < 8; i++) { for (j = 0; j < i; j++) { a[i][j] = 0; } } }",
        );
        let s = imbalance_score(&l, &BTreeSet::new(), &AnalysisConfig::default());
        assert!(s.reasons.contains(&ImbalanceReason::TriangularInner));
    }

    #[test]
    fn data_dependent_branch_flags() {
        let l = nest_of(
            "void f(void) { int i; for (i = 0; i < 8; i++) { if (key[i] > t) { a[i] = 0; } } }",
        );
        let s = imbalance_score(&l, &BTreeSet::new(), &AnalysisConfig::default());
        assert!(s.reasons.contains(&ImbalanceReason::ConditionalBody));
    }

    #[test]
    fn rectangular_nest_is_quiet() {
        let l = nest_of(
            "void f(void) { int i; int j; for (i = 0; i < 8; i++) { for (j = 0; j < 8; j++) { a[i][j] = 0; } } }",
        );
        let s = imbalance_score(&l, &BTreeSet::new(), &AnalysisConfig::default());
        assert!(s.is_empty());
    }

    #[test]
    fn doubling_trip_count_doubles_value() {
        let a = nest_of("void f(void) { int i; for (i = 0; i < 50; i++) { x[i] = 0; } }");
        let b = nest_of("void f(void) { int i; for (i = 0; i < 100; i++) { x[i] = 0; } }");
        assert_eq!(workload(&a).value.unwrap() * 2, workload(&b).value.unwrap());
    }
}
