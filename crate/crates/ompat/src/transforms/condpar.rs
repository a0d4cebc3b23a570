//! Conditional parallelization: evaluable workloads below the threshold run
//! serial, at or above it unconditionally parallel; symbolic workloads get an
//! if clause comparing the product expression to the threshold.

use crate::costmodel::{is_profitable, workload, Decision};
use crate::frontend::ast::*;

use super::{is_parallel_for, is_worksharing_for, PassLog};

pub fn run(ast: &mut Ast, threshold: i64, log: &mut PassLog) {
    let snapshot = ast.clone();
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let name = f.name.clone();
        f.body.walk_mut(&mut |s| {
            if is_worksharing_for(s) {
                // The if clause belongs to the parallel construct; loops
                // already folded into a region keep their placement.
                log.refuse(
                    "condpar",
                    super::section_of(&snapshot, &name, s.span),
                    "worksharing loop inside a region; if clause not applicable",
                );
                return;
            }
            if !is_parallel_for(s) {
                return;
            }
            let StmtKind::For(loop_) = &s.kind else { return };
            let est = workload(loop_);
            let section = super::section_of(&snapshot, &name, s.span);
            // A guard must be evaluable before the loop runs; estimates that
            // mention the nest's own indices (triangular inner bounds) stay
            // unconditionally parallel.
            let mut indices = vec![loop_.header.index.clone()];
            loop_.body.walk(&mut |inner| {
                if let StmtKind::For(f) = &inner.kind {
                    indices.push(f.header.index.clone());
                }
            });
            if !est.evaluable && indices.iter().any(|i| est.expr.mentions(i)) {
                log.action(
                    "condpar",
                    section,
                    "kept unconditional (workload varies with the iteration)",
                );
                return;
            }
            match is_profitable(&est, threshold) {
                Decision::Serial => {
                    s.directive = None;
                    log.action(
                        "condpar",
                        section,
                        format!("serialized (workload {} < {threshold})", est.value.unwrap()),
                    );
                }
                Decision::Parallel => {
                    let d = s.directive.as_mut().unwrap();
                    if d.clauses.if_condition.take().is_some() {
                        log.action("condpar", section, "dropped stale if clause");
                    }
                }
                Decision::Conditional(expr) => {
                    let d = s.directive.as_mut().unwrap();
                    let rendered = crate::frontend::printer::expr(&expr, 0);
                    d.clauses.if_condition = Some(expr);
                    log.action("condpar", section, format!("guarded with if({rendered})"));
                }
            }
        });
    }
}

/// Clause edit for one loop, given a precomputed estimate.
pub fn conditional_parallelize(
    stmt: &mut Stmt,
    est: &crate::costmodel::WorkloadEstimate,
    threshold: i64,
) {
    if !is_parallel_for(stmt) {
        return;
    }
    match is_profitable(est, threshold) {
        Decision::Serial => stmt.directive = None,
        Decision::Parallel => {
            stmt.directive.as_mut().unwrap().clauses.if_condition = None;
        }
        Decision::Conditional(expr) => {
            stmt.directive.as_mut().unwrap().clauses.if_condition = Some(expr);
        }
    }
}
