//! Dynamic scheduling for imbalance-prone parallel loops: a non-empty
//! imbalance signal adds schedule(dynamic) with no chunk; loops with an
//! explicit schedule are left alone.

use std::collections::BTreeSet;

use crate::analysis::side_effects::AnalysisConfig;
use crate::costmodel::imbalance_score;
use crate::frontend::ast::*;

use super::{is_parallel_for, is_worksharing_for, PassLog};

pub fn run(ast: &mut Ast, config: &AnalysisConfig, log: &mut PassLog) {
    let snapshot = ast.clone();
    let defined: BTreeSet<String> = snapshot.functions().map(|f| f.name.clone()).collect();
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let name = f.name.clone();
        f.body.walk_mut(&mut |s| {
            if !(is_parallel_for(s) || is_worksharing_for(s)) {
                return;
            }
            let StmtKind::For(loop_) = &s.kind else { return };
            let signal = imbalance_score(loop_, &defined, config);
            if signal.is_empty() {
                return;
            }
            let d = s.directive.as_mut().unwrap();
            if d.clauses.schedule.is_some() {
                return;
            }
            d.clauses.schedule =
                Some(ScheduleClause { kind: ScheduleKind::Dynamic, chunk: None });
            let reasons: Vec<String> =
                signal.reasons.iter().map(|r| r.to_string()).collect();
            log.action(
                "schedule",
                super::section_of(&snapshot, &name, s.span),
                format!("schedule(dynamic): {}", reasons.join(", ")),
            );
        });
    }
}

/// Clause edit for a single already-parallelized loop.
pub fn apply_schedule(stmt: &mut Stmt, signal: &crate::costmodel::ImbalanceSignal) {
    if signal.is_empty() {
        return;
    }
    if let Some(d) = stmt.directive.as_mut() {
        if d.clauses.schedule.is_none() {
            d.clauses.schedule =
                Some(ScheduleClause { kind: ScheduleKind::Dynamic, chunk: None });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_str, print};
    use crate::transforms::TransformPlan;

    fn run_passes(src: &str, passes: &str) -> String {
        let ast = parse_str(src).unwrap();
        let plan = TransformPlan::parse(passes, 10000).unwrap();
        print(&super::super::run_plan(&ast, &plan, &AnalysisConfig::default()).ast).text
    }

    #[test]
    fn triangular_loop_gets_dynamic() {
        let text = run_passes(
            "double a[32][32];
             void f(void) { int i; int j;
               #pragma omp parallel for private(i, j)
               for (i = 0; i < 32; i++) { for (j = 0; j < i; j++) { a[i][j] = 1.0; } } }",
            "schedule",
        );
        assert!(text.contains("schedule(dynamic)"), "{text}");
    }

    #[test]
    fn rectangular_loop_unchanged() {
        let text = run_passes(
            "double a[32][32];
             void f(void) { int i; int j;
               #pragma omp parallel for private(i, j)
               for (i = 0; i < 32; i++) { for (j = 0; j < 32; j++) { a[i][j] = 1.0; } } }",
            "schedule",
        );
        assert!(!text.contains("schedule"), "{text}");
    }

    #[test]
    fn data_dependent_branch_gets_dynamic() {
        let text = run_passes(
            "double a[32]; double key[32]; double t;
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 32; i++) { if (key[i] > t) { a[i] = 0.0; } } }",
            "schedule",
        );
        assert!(text.contains("schedule(dynamic)"), "{text}");
    }

    #[test]
    fn explicit_schedule_is_respected() {
        let text = run_passes(
            "double a[32][32];
             void f(void) { int i; int j;
               #pragma omp parallel for private(i, j) schedule(static)
               for (i = 0; i < 32; i++) { for (j = 0; j < i; j++) { a[i][j] = 1.0; } } }",
            "schedule",
        );
        assert!(text.contains("schedule(static)"));
        assert!(!text.contains("dynamic"));
    }

    #[test]
    fn pass_is_idempotent() {
        let src = "double a[32][32];
             void f(void) { int i; int j;
               #pragma omp parallel for private(i, j)
               for (i = 0; i < 32; i++) { for (j = 0; j < i; j++) { a[i][j] = 1.0; } } }";
        let ast = parse_str(src).unwrap();
        let plan = TransformPlan::parse("schedule", 10000).unwrap();
        let once = super::super::run_plan(&ast, &plan, &AnalysisConfig::default()).ast;
        let twice = super::super::run_plan(&once, &plan, &AnalysisConfig::default()).ast;
        assert!(once.structurally_equal(&twice));
    }
}
