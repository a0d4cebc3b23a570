//! Outermost-first loop parallelization: annotate the outermost loop of each
//! nest that has no carried dependence after privatization and reduction
//! accounting and no I/O or unknown calls; fall back to inner loops when the
//! outer level is blocked.

use std::collections::BTreeSet;

use crate::analysis::accesses::collect_accesses_with_effects;
use crate::analysis::dependence::dependence_test;
use crate::analysis::privatize::{find_private, PrivClass, PrivatizeCtx};
use crate::analysis::reductions::recognize_reductions;
use crate::analysis::side_effects::{AnalysisConfig, SideEffectTable};
use crate::analysis::{array_extents, persistent_names, scalars_read_after};
use crate::frontend::ast::*;
use crate::frontend::{function_nests, SectionId};

use super::{PassLog, TransformPlan};

pub fn run(ast: &mut Ast, config: &AnalysisConfig, plan: &TransformPlan, log: &mut PassLog) {
    let snapshot = ast.clone();
    let effects = SideEffectTable::build(&snapshot, config);
    let fn_names: Vec<String> = snapshot.functions().map(|f| f.name.clone()).collect();
    for name in fn_names {
        let f = snapshot.function(&name).unwrap();
        let nests: Vec<(u32, crate::frontend::Span, bool)> = function_nests(f)
            .iter()
            .enumerate()
            .map(|(ordinal, s)| {
                let mut has_directive = false;
                s.walk(&mut |s| {
                    if s.directive.is_some() {
                        has_directive = true;
                    }
                });
                (ordinal as u32, s.span, has_directive)
            })
            .collect();
        for (ordinal, span, has_directive) in nests {
            let section = SectionId::single(&name, ordinal);
            if has_directive {
                // Already-parallel code is left alone; rerunning the pass is
                // a no-op.
                continue;
            }
            let Some(fun) = ast.function(&name) else { continue };
            let ctx = NestCtx {
                function: f,
                effects: &effects,
                plan,
                extents: array_extents(&snapshot, f),
                persistent: persistent_names(&snapshot, f),
            };
            let mut decisions: Vec<(crate::frontend::Span, OmpDirective, usize)> = Vec::new();
            let mut reasons: Vec<(usize, String)> = Vec::new();
            {
                let nest_stmt = find_stmt(&fun.body, span).unwrap();
                try_levels(nest_stmt, 0, &ctx, &mut decisions, &mut reasons);
            }
            // Blocked levels are recorded even when an inner level succeeds;
            // they explain outer-vs-inner placement.
            for (depth, reason) in &reasons {
                log.refuse("parallelize", &section, format!("level {depth}: {reason}"));
            }
            if decisions.is_empty() {
                log.refuse("parallelize", &section, "no parallel loop");
                continue;
            }
            for (target, directive, depth) in decisions {
                apply_directive(ast, &name, target, directive);
                let placement = if depth == 0 { "outer" } else { "inner" };
                log.action("parallelize", &section, format!("parallelized {placement}"));
            }
        }
    }
}

struct NestCtx<'a> {
    function: &'a FunctionDef,
    effects: &'a SideEffectTable,
    plan: &'a TransformPlan,
    extents: std::collections::BTreeMap<String, i64>,
    persistent: BTreeSet<String>,
}

/// Recursive descent: annotate this level if it qualifies, otherwise record
/// the reason and try each directly nested loop.
fn try_levels(
    stmt: &Stmt,
    depth: usize,
    ctx: &NestCtx,
    decisions: &mut Vec<(crate::frontend::Span, OmpDirective, usize)>,
    reasons: &mut Vec<(usize, String)>,
) {
    let StmtKind::For(loop_) = &stmt.kind else { return };
    match qualify(loop_, stmt.span, ctx) {
        Ok(directive) => {
            decisions.push((stmt.span, directive, depth));
        }
        Err(reason) => {
            reasons.push((depth, reason));
            let mut children: Vec<&Stmt> = Vec::new();
            direct_inner_loops(&loop_.body, &mut children);
            for child in children {
                try_levels(child, depth + 1, ctx, decisions, reasons);
            }
        }
    }
}

fn direct_inner_loops<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
    match &s.kind {
        StmtKind::For(_) => out.push(s),
        StmtKind::Compound(items) => {
            for i in items {
                direct_inner_loops(i, out);
            }
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            direct_inner_loops(then_branch, out);
            if let Some(e) = else_branch {
                direct_inner_loops(e, out);
            }
        }
        _ => {}
    }
}

fn qualify(
    loop_: &ForLoop,
    loop_span: crate::frontend::Span,
    ctx: &NestCtx,
) -> Result<OmpDirective, String> {
    if !loop_.header.canonical {
        return Err("non-canonical loop".to_string());
    }
    // I/O or unknown calls anywhere in the body block this level.
    let mut call_block: Option<String> = None;
    loop_.body.walk_exprs(&mut |e| {
        if let ExprKind::Call { callee, .. } = &e.kind {
            let summary = ctx.effects.summary(callee);
            if summary.forbids_parallelization() && call_block.is_none() {
                let kind = match summary.classification {
                    crate::analysis::side_effects::SideEffectClass::Io => "io",
                    _ => "unknown side effects",
                };
                call_block = Some(format!("calls `{callee}` ({kind})"));
            }
        }
    });
    if let Some(reason) = call_block {
        return Err(reason);
    }

    let priv_ctx = PrivatizeCtx {
        live_after: scalars_read_after(ctx.function, loop_span),
        array_extents: ctx.extents.clone(),
        persistent: ctx.persistent.clone(),
    };
    let privatization = find_private(loop_, &priv_ctx);
    let candidates = recognize_reductions(loop_);
    let scalar_reds: Vec<_> = candidates.iter().filter(|c| !c.is_array()).collect();
    let array_reds: Vec<_> = candidates.iter().filter(|c| c.is_array()).collect();
    let lowering_planned = ctx.plan.has("reduction");

    let accesses = collect_accesses_with_effects(loop_, ctx.effects);
    let edges = dependence_test(loop_, &accesses);
    let mut blockers: BTreeSet<String> = BTreeSet::new();
    for edge in edges.iter().filter(|e| e.is_carried()) {
        let base = &edge.src.base;
        if privatization.is_privatizable(base) {
            continue;
        }
        if scalar_reds.iter().any(|c| &c.variable == base) {
            continue;
        }
        if array_reds.iter().any(|c| &c.variable == base) {
            // Sound only if the lowering pass will rewrite it.
            if lowering_planned {
                continue;
            }
            blockers.insert(format!("{base} (array reduction needs lowering pass)"));
            continue;
        }
        blockers.insert(base.clone());
    }
    if !blockers.is_empty() {
        let list: Vec<String> = blockers.into_iter().collect();
        return Err(format!("carried dependence on {}", list.join(", ")));
    }

    let mut clauses = ClauseSet::default();
    for (var, class) in &privatization.classes {
        match class {
            PrivClass::Private | PrivClass::ThreadprivateCandidate => {
                clauses.private.push(var.clone())
            }
            PrivClass::Firstprivate => clauses.firstprivate.push(var.clone()),
            PrivClass::Lastprivate => clauses.lastprivate.push(var.clone()),
            PrivClass::Shared => {}
        }
    }
    let mut by_op: std::collections::BTreeMap<ReductionOp, Vec<String>> =
        std::collections::BTreeMap::new();
    for c in &scalar_reds {
        by_op.entry(c.op).or_default().push(c.variable.clone());
    }
    for (op, vars) in by_op {
        clauses.reductions.push(ReductionClause { op, vars });
    }
    Ok(OmpDirective {
        kind: DirectiveKind::ParallelFor,
        clauses,
        span: crate::frontend::Span::DUMMY,
    })
}

fn find_stmt<'a>(s: &'a Stmt, span: crate::frontend::Span) -> Option<&'a Stmt> {
    let mut found = None;
    s.walk(&mut |s| {
        if s.span == span && found.is_none() {
            found = Some(s);
        }
    });
    found
}

fn apply_directive(ast: &mut Ast, function: &str, span: crate::frontend::Span, d: OmpDirective) {
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        if f.name != function {
            continue;
        }
        f.body.walk_mut(&mut |s| {
            if s.span == span && matches!(s.kind, StmtKind::For(_)) {
                s.directive = Some(d.clone());
            }
        });
    }
}
