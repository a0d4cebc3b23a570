//! Barrier elimination: add nowait to a worksharing loop when it is the last
//! worksharing construct of its region, or when every later construct up to
//! the next barrier provably touches only same-thread data.

use crate::analysis::conflicts::cross_loop_conflicts;
use crate::frontend::ast::*;

use super::{is_worksharing_for, PassLog};

pub fn run(ast: &mut Ast, log: &mut PassLog) {
    let snapshot = ast.clone();
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let name = f.name.clone();
        f.body.walk_mut(&mut |s| {
            if s.directive.as_ref().is_some_and(|d| d.kind == DirectiveKind::Parallel) {
                if let StmtKind::Compound(items) = &mut s.kind {
                    annotate_region(items, &snapshot, &name, log);
                }
            }
        });
    }
}

/// Rewrites one region body in place; exposed as the insert_nowait operation.
pub fn insert_nowait(region: &Stmt) -> Stmt {
    let mut region = region.clone();
    if let StmtKind::Compound(items) = &mut region.kind {
        let mut log = PassLog::default();
        let empty = Ast { items: Vec::new() };
        annotate_region(items, &empty, "", &mut log);
    }
    region
}

fn annotate_region(items: &mut [Stmt], snapshot: &Ast, function: &str, log: &mut PassLog) {
    for k in 0..items.len() {
        if !is_worksharing_for(&items[k]) {
            continue;
        }
        if items[k].directive.as_ref().unwrap().clauses.nowait {
            continue;
        }
        if nowait_safe(&items[k], &items[k + 1..]) {
            items[k].directive.as_mut().unwrap().clauses.nowait = true;
            let section = super::section_of(snapshot, function, items[k].span);
            log.action("nowait", section, "nowait added");
        }
    }
}

/// Safe iff no later worksharing construct before the next barrier conflicts
/// with this loop, and no intervening replicated statement touches data it
/// writes; a loop with no later worksharing construct is covered by the
/// region-end barrier.
fn nowait_safe(loop_stmt: &Stmt, rest: &[Stmt]) -> bool {
    let written = written_bases(loop_stmt);
    for later in rest {
        if matches!(later.kind, StmtKind::Standalone)
            && later.directive.as_ref().is_some_and(|d| d.kind == DirectiveKind::Barrier)
        {
            return true;
        }
        if is_worksharing_for(later) {
            if cross_loop_conflicts(loop_stmt, later).conflicting {
                return false;
            }
            continue;
        }
        if matches!(later.kind, StmtKind::Decl(_) | StmtKind::Empty) {
            continue;
        }
        // A replicated statement (or single construct) that touches data the
        // loop writes would race with unfinished chunks.
        if stmt_touches(later, &written) {
            return false;
        }
    }
    // Reached the region end: the implicit region barrier protects the last
    // worksharing construct.
    true
}

fn written_bases(s: &Stmt) -> std::collections::BTreeSet<String> {
    let mut out = std::collections::BTreeSet::new();
    s.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Assign { target, .. } => match &target.kind {
            ExprKind::Var(n) => {
                out.insert(n.clone());
            }
            ExprKind::ArrayRef { base, .. } => {
                out.insert(base.clone());
            }
            _ => {}
        },
        ExprKind::Call { args, .. } => {
            for a in args {
                if let ExprKind::Var(n) = &a.kind {
                    out.insert(n.clone());
                }
            }
        }
        _ => {}
    });
    out
}

fn stmt_touches(s: &Stmt, bases: &std::collections::BTreeSet<String>) -> bool {
    let mut touched = false;
    s.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Var(n) if bases.contains(n) => touched = true,
        ExprKind::ArrayRef { base, .. } if bases.contains(base) => touched = true,
        _ => {}
    });
    touched
}

#[cfg(test)]
mod tests {
    use crate::analysis::side_effects::AnalysisConfig;
    use crate::frontend::{parse_str, print};
    use crate::transforms::TransformPlan;

    fn run_nowait(src: &str) -> String {
        let ast = parse_str(src).unwrap();
        let plan = TransformPlan::parse("nowait", 10000).unwrap();
        print(&super::super::run_plan(&ast, &plan, &AnalysisConfig::default()).ast).text
    }

    #[test]
    fn last_loop_gets_nowait() {
        let text = run_nowait(
            "double a[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
               } }",
        );
        assert!(text.contains("#pragma omp for nowait"), "{text}");
    }

    #[test]
    fn aligned_producer_consumer_gets_nowait() {
        let text = run_nowait(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = a[i]; }
               } }",
        );
        assert_eq!(text.matches("nowait").count(), 2, "{text}");
    }

    #[test]
    fn shifted_consumer_blocks_nowait() {
        let text = run_nowait(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 1; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 1; i < 16; i++) { b[i] = a[i - 1]; }
               } }",
        );
        // Only the final loop is barrier-free.
        assert_eq!(text.matches("nowait").count(), 1, "{text}");
        let first_for = text.find("#pragma omp for").unwrap();
        let nowait_at = text.find("nowait").unwrap();
        assert!(nowait_at > first_for + 20, "{text}");
    }

    #[test]
    fn explicit_barrier_restores_safety() {
        let text = run_nowait(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 1; i < 16; i++) { a[i] = i; }
                 #pragma omp barrier
                 #pragma omp for
                 for (i = 1; i < 16; i++) { b[i] = a[i - 1]; }
               } }",
        );
        assert_eq!(text.matches("nowait").count(), 2, "{text}");
    }

    #[test]
    fn dynamic_consumer_blocks_nowait() {
        let text = run_nowait(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for schedule(dynamic)
                 for (i = 0; i < 16; i++) { b[i] = a[i]; }
               } }",
        );
        assert_eq!(text.matches("nowait").count(), 1, "{text}");
    }

    #[test]
    fn replicated_reader_blocks_nowait() {
        let text = run_nowait(
            "double a[16]; double t;
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 t = a[0];
               } }",
        );
        assert!(!text.contains("nowait"), "{text}");
    }

    #[test]
    fn idempotent() {
        let src = "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = a[i]; }
               } }";
        let ast = parse_str(src).unwrap();
        let plan = TransformPlan::parse("nowait", 10000).unwrap();
        let once = super::super::run_plan(&ast, &plan, &AnalysisConfig::default()).ast;
        let twice = super::super::run_plan(&once, &plan, &AnalysisConfig::default()).ast;
        assert!(once.structurally_equal(&twice));
    }
}
