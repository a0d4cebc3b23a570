//! Parallel-region formation: merge runs of directly adjacent parallel-for
//! loops into one parallel region whose loops become worksharing constructs,
//! so threads are spawned once per region.

use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::{function_nests, SectionId, Span};

use super::{is_parallel_for, PassLog};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RegionError {
    #[error("statements are not all adjacent parallel loops")]
    NotAdjacent,
    #[error("fewer than two parallel loops")]
    FewerThanTwo,
}

/// Merge consecutive parallel-for statements into one region. Data-sharing
/// clauses present on every loop hoist to the region; the rest stay
/// per-loop. The iteration-to-statement mapping is unchanged.
pub fn form_parallel_region(stmts: &[Stmt]) -> Result<Stmt, RegionError> {
    if stmts.len() < 2 {
        return Err(RegionError::FewerThanTwo);
    }
    if !stmts.iter().all(is_parallel_for) {
        return Err(RegionError::NotAdjacent);
    }
    let clause_sets: Vec<&ClauseSet> =
        stmts.iter().map(|s| &s.directive.as_ref().unwrap().clauses).collect();
    let hoist = |pick: fn(&ClauseSet) -> &Vec<String>| -> Vec<String> {
        let first = pick(clause_sets[0]);
        first
            .iter()
            .filter(|v| clause_sets[1..].iter().all(|c| pick(c).contains(v)))
            .cloned()
            .collect()
    };
    let hoisted_private = hoist(|c| &c.private);
    let hoisted_firstprivate = hoist(|c| &c.firstprivate);

    let mut region_clauses = ClauseSet::default();
    region_clauses.private = hoisted_private.clone();
    region_clauses.firstprivate = hoisted_firstprivate.clone();

    let mut loops = Vec::with_capacity(stmts.len());
    for s in stmts {
        let mut s = s.clone();
        let d = s.directive.as_mut().unwrap();
        d.kind = DirectiveKind::For;
        d.clauses.private.retain(|v| !hoisted_private.contains(v));
        d.clauses.firstprivate.retain(|v| !hoisted_firstprivate.contains(v));
        debug_assert!(d.clauses.if_condition.is_none());
        loops.push(s);
    }
    let span = Span::new(stmts[0].span.lo, stmts[stmts.len() - 1].span.hi);
    Ok(Stmt {
        kind: StmtKind::Compound(loops),
        span,
        directive: Some(OmpDirective {
            kind: DirectiveKind::Parallel,
            clauses: region_clauses,
            span: Span::DUMMY,
        }),
    })
}

pub fn run(ast: &mut Ast, log: &mut PassLog) {
    let snapshot = ast.clone();
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let name = f.name.clone();
        rewrite_stmt(&mut f.body, &snapshot, &name, log);
    }
}

fn rewrite_stmt(s: &mut Stmt, snapshot: &Ast, function: &str, log: &mut PassLog) {
    // Regions never nest; skip bodies that are already inside one.
    if s.directive.as_ref().is_some_and(|d| d.starts_region()) {
        return;
    }
    match &mut s.kind {
        StmtKind::Compound(items) => {
            let mut out: Vec<Stmt> = Vec::with_capacity(items.len());
            let mut run: Vec<Stmt> = Vec::new();
            let drained: Vec<Stmt> = std::mem::take(items);
            for stmt in drained {
                if is_parallel_for(&stmt) {
                    run.push(stmt);
                    continue;
                }
                flush_run(&mut run, &mut out, snapshot, function, log);
                out.push(stmt);
            }
            flush_run(&mut run, &mut out, snapshot, function, log);
            for stmt in &mut out {
                rewrite_stmt(stmt, snapshot, function, log);
            }
            *items = out;
        }
        StmtKind::For(f) => rewrite_stmt(&mut f.body, snapshot, function, log),
        StmtKind::If { then_branch, else_branch, .. } => {
            rewrite_stmt(then_branch, snapshot, function, log);
            if let Some(e) = else_branch {
                rewrite_stmt(e, snapshot, function, log);
            }
        }
        _ => {}
    }
}

fn flush_run(
    run: &mut Vec<Stmt>,
    out: &mut Vec<Stmt>,
    snapshot: &Ast,
    function: &str,
    log: &mut PassLog,
) {
    match run.len() {
        0 => {}
        1 => out.push(run.pop().unwrap()),
        _ => {
            let region = form_parallel_region(run).expect("run is all parallel loops");
            log.action(
                "region",
                run_section(snapshot, function, run),
                format!("formed region of {} loops", run.len()),
            );
            out.push(region);
            run.clear();
        }
    }
}

fn run_section(snapshot: &Ast, function: &str, run: &[Stmt]) -> String {
    let Some(f) = snapshot.function(function) else {
        return function.to_string();
    };
    let nests = function_nests(f);
    let ordinal_of = |span: Span| -> Option<u32> {
        nests
            .iter()
            .position(|n| n.span.lo <= span.lo && span.hi <= n.span.hi)
            .map(|p| p as u32)
    };
    match (ordinal_of(run[0].span), ordinal_of(run[run.len() - 1].span)) {
        (Some(a), Some(b)) if a <= b => SectionId::range(function, a, b).to_string(),
        _ => function.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::side_effects::AnalysisConfig;
    use crate::frontend::{parse_str, print};
    use crate::transforms::TransformPlan;

    #[test]
    fn two_adjacent_parallel_loops_merge() {
        let ast = parse_str(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { a[i] = i; }
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { b[i] = a[i]; }
             }",
        )
        .unwrap();
        let plan = TransformPlan::parse("region", 10000).unwrap();
        let out = super::super::run_plan(&ast, &plan, &AnalysisConfig::default());
        let text = print(&out.ast).text;
        assert_eq!(text.matches("#pragma omp parallel private(i)").count(), 1, "{text}");
        assert_eq!(text.matches("#pragma omp for").count(), 2, "{text}");
        assert!(out.log.iter().any(|l| l.section == "f#0-#1"), "{:?}", out.log);
    }

    #[test]
    fn intervening_statement_blocks_merge() {
        let ast = parse_str(
            "double a[16]; double b[16]; double t;
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { a[i] = i; }
               t = a[0];
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { b[i] = a[i] + t; }
             }",
        )
        .unwrap();
        let plan = TransformPlan::parse("region", 10000).unwrap();
        let out = super::super::run_plan(&ast, &plan, &AnalysisConfig::default());
        let text = print(&out.ast).text;
        assert_eq!(text.matches("#pragma omp parallel for").count(), 2);
    }

    #[test]
    fn single_loop_errors_fewer_than_two() {
        let ast = parse_str(
            "double a[4];
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 4; i++) { a[i] = 0.0; } }",
        )
        .unwrap();
        let f = ast.function("f").unwrap();
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        let loops: Vec<Stmt> =
            items.iter().filter(|s| is_parallel_for(s)).cloned().collect();
        assert_eq!(form_parallel_region(&loops), Err(RegionError::FewerThanTwo));
    }

    #[test]
    fn non_parallel_statement_errors_not_adjacent() {
        let ast = parse_str(
            "double a[4]; double t;
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 4; i++) { a[i] = 0.0; }
               t = 1.0;
             }",
        )
        .unwrap();
        let f = ast.function("f").unwrap();
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        // Pass the parallel loop plus the scalar assignment.
        let slice: Vec<Stmt> = items[1..3].to_vec();
        assert_eq!(form_parallel_region(&slice), Err(RegionError::NotAdjacent));
    }

    #[test]
    fn common_private_clauses_hoist() {
        let stmts = parse_str(
            "double a[8]; double b[8];
             void f(void) { int i; double t;
               #pragma omp parallel for private(i, t)
               for (i = 0; i < 8; i++) { t = a[i]; a[i] = t; }
               #pragma omp parallel for private(i)
               for (i = 0; i < 8; i++) { b[i] = a[i]; }
             }",
        )
        .unwrap();
        let f = stmts.function("f").unwrap();
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        let loops: Vec<Stmt> = items.iter().filter(|s| is_parallel_for(s)).cloned().collect();
        let region = form_parallel_region(&loops).unwrap();
        let d = region.directive.as_ref().unwrap();
        assert_eq!(d.clauses.private, vec!["i".to_string()]);
        let StmtKind::Compound(inner) = &region.kind else { panic!() };
        assert_eq!(
            inner[0].directive.as_ref().unwrap().clauses.private,
            vec!["t".to_string()]
        );
        assert!(inner[1].directive.as_ref().unwrap().clauses.private.is_empty());
    }

    #[test]
    fn formation_is_idempotent() {
        let ast = parse_str(
            "double a[16]; double b[16];
             void f(void) { int i;
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { a[i] = i; }
               #pragma omp parallel for private(i)
               for (i = 0; i < 16; i++) { b[i] = a[i]; }
             }",
        )
        .unwrap();
        let plan = TransformPlan::parse("region", 10000).unwrap();
        let once = super::super::run_plan(&ast, &plan, &AnalysisConfig::default()).ast;
        let twice = super::super::run_plan(&once, &plan, &AnalysisConfig::default()).ast;
        assert!(once.structurally_equal(&twice));
    }
}
