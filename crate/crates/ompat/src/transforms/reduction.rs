//! Array-reduction lowering. Both strategies accumulate into a per-thread
//! buffer initialized to the operator identity; they differ in the combine
//! step: one critical section around the whole combine loop versus a nowait
//! main loop with one atomic update per element.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::analysis::reductions::{recognize_reductions, ReductionCandidate};
use crate::frontend::ast::*;
use crate::frontend::Span;

use super::{all_names, fresh_name, is_parallel_for, is_worksharing_for, PassLog, ReductionStrategy};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ReductionLoweringError {
    #[error("not an array reduction")]
    NotAnArrayReduction,
    #[error("reduced array `{0}` has no known 1-D extent")]
    UnknownExtent(String),
}

/// The pieces the lowering inserts around the rewritten loop inside the
/// parallel region.
pub struct LoweredReduction {
    pub decls: Vec<Stmt>,
    pub init_loop: Stmt,
    pub main_loop: Stmt,
    pub combine_loop: Stmt,
}

struct ArrayInfo {
    extent: i64,
    base: BaseType,
}

fn array_info(ast: &Ast, function: &str, name: &str) -> Option<ArrayInfo> {
    fn check(ty: &CType, vname: &str, name: &str) -> Option<ArrayInfo> {
        if vname == name {
            if let [ArrayDim::Fixed(n)] = ty.dims[..] {
                return Some(ArrayInfo { extent: n, base: ty.base });
            }
        }
        None
    }
    let mut found = None;
    if let Some(f) = ast.function(function) {
        for p in &f.params {
            found = found.or_else(|| check(&p.ty, &p.name, name));
        }
        f.body.walk(&mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                if found.is_none() {
                    found = check(&d.ty, &d.name, name);
                }
            }
        });
    }
    if found.is_none() {
        if let Some(d) = ast.global_decl(name) {
            found = check(&d.ty, &d.name, name);
        }
    }
    found
}

fn identity_expr(base: BaseType, op: ReductionOp) -> Expr {
    match (base, op) {
        (BaseType::Double, ReductionOp::Add) => Expr::float(0.0),
        (BaseType::Double, ReductionOp::Mul) => Expr::float(1.0),
        (BaseType::Double, ReductionOp::Min) => Expr::float(1e30),
        (BaseType::Double, ReductionOp::Max) => Expr::float(-1e30),
        (_, ReductionOp::Add) => Expr::int(0),
        (_, ReductionOp::Mul) => Expr::int(1),
        (_, ReductionOp::Min) => Expr::int(2147483647),
        (_, ReductionOp::Max) => Expr::int(-2147483647),
    }
}

fn counting_loop(index: &str, extent: i64, body: Stmt) -> Stmt {
    Stmt::new(
        StmtKind::For(ForLoop {
            header: LoopHeader {
                index: index.to_string(),
                lower: Expr::int(0),
                cmp: LoopCmp::Lt,
                upper: Expr::int(extent),
                stride: 1,
                canonical: true,
                span: Span::DUMMY,
            },
            body: Box::new(body),
        }),
        Span::DUMMY,
    )
}

/// Rename the reduced array to the buffer inside the accumulation statements
/// only.
fn redirect_accumulations(body: &mut Stmt, candidate: &ReductionCandidate, buffer: &str) {
    let spans = candidate.statements.clone();
    let var = candidate.variable.clone();
    let buffer = buffer.to_string();
    body.walk_mut(&mut |s| {
        if spans.contains(&s.span) {
            rename_in_stmt(s, &var, &buffer);
        }
    });
}

fn rename_in_stmt(s: &mut Stmt, from: &str, to: &str) {
    // Accumulation statements are expression statements or min/max if-idioms.
    match &mut s.kind {
        StmtKind::Expr(e) => rename_in_expr(e, from, to),
        StmtKind::If { cond, then_branch, .. } => {
            rename_in_expr(cond, from, to);
            rename_in_stmt(then_branch, from, to);
        }
        StmtKind::Compound(items) => items.iter_mut().for_each(|i| rename_in_stmt(i, from, to)),
        _ => {}
    }
}

fn rename_in_expr(e: &mut Expr, from: &str, to: &str) {
    match &mut e.kind {
        ExprKind::ArrayRef { base, subs } => {
            if base == from {
                *base = to.to_string();
            }
            subs.iter_mut().for_each(|s| rename_in_expr(s, from, to));
        }
        ExprKind::Var(n) => {
            if n == from {
                *n = to.to_string();
            }
        }
        ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| rename_in_expr(a, from, to)),
        ExprKind::Unary { operand, .. } => rename_in_expr(operand, from, to),
        ExprKind::Binary { lhs, rhs, .. } => {
            rename_in_expr(lhs, from, to);
            rename_in_expr(rhs, from, to);
        }
        ExprKind::Assign { target, value, .. } => {
            rename_in_expr(target, from, to);
            rename_in_expr(value, from, to);
        }
        _ => {}
    }
}

fn combine_update(
    acc: &str,
    buffer: &str,
    index: &str,
    op: ReductionOp,
    strategy: ReductionStrategy,
) -> Stmt {
    let acc_elem = Expr::array(acc, vec![Expr::var(index)]);
    let buf_elem = Expr::array(buffer, vec![Expr::var(index)]);
    let update = match op {
        ReductionOp::Add | ReductionOp::Mul => {
            let bop = if op == ReductionOp::Add { BinOp::Add } else { BinOp::Mul };
            Stmt::new(
                StmtKind::Expr(Expr::assign(
                    AssignOp::Assign,
                    acc_elem.clone(),
                    Expr::binary(bop, acc_elem, buf_elem),
                )),
                Span::DUMMY,
            )
        }
        ReductionOp::Min | ReductionOp::Max => {
            // if (acc[m] > buf[m]) acc[m] = buf[m];  (min)
            let cmp = if op == ReductionOp::Min { BinOp::Gt } else { BinOp::Lt };
            Stmt::new(
                StmtKind::If {
                    cond: Expr::binary(cmp, acc_elem.clone(), buf_elem.clone()),
                    then_branch: Box::new(Stmt::new(
                        StmtKind::Expr(Expr::assign(AssignOp::Assign, acc_elem, buf_elem)),
                        Span::DUMMY,
                    )),
                    else_branch: None,
                },
                Span::DUMMY,
            )
        }
    };
    match (strategy, op) {
        (ReductionStrategy::Atomic, ReductionOp::Add | ReductionOp::Mul) => {
            // Element-wise mutual exclusion inside the combine loop.
            let mut u = update;
            u.directive = Some(OmpDirective::new(DirectiveKind::Atomic));
            u
        }
        (ReductionStrategy::Atomic, _) => {
            // The atomic construct cannot express min/max; guard the element
            // update with a critical section instead.
            let mut u = update;
            u.directive = Some(OmpDirective::new(DirectiveKind::Critical(None)));
            u
        }
        (ReductionStrategy::Critical, _) => update,
    }
}

/// Lower one array-reduction candidate of a parallelized loop. The returned
/// pieces are spliced into the enclosing region (worksharing case) or
/// wrapped in a fresh region (combined parallel-for case).
pub fn lower_array_reduction(
    ast: &Ast,
    function: &str,
    loop_stmt: &Stmt,
    candidate: &ReductionCandidate,
    strategy: ReductionStrategy,
) -> Result<LoweredReduction, ReductionLoweringError> {
    if !candidate.is_array() {
        return Err(ReductionLoweringError::NotAnArrayReduction);
    }
    let info = array_info(ast, function, &candidate.variable)
        .ok_or_else(|| ReductionLoweringError::UnknownExtent(candidate.variable.clone()))?;

    let mut taken = all_names(ast);
    let buffer = match strategy {
        ReductionStrategy::Atomic => {
            fresh_name(&format!("{}_local", candidate.variable), &mut taken)
        }
        ReductionStrategy::Critical => fresh_name("reduce", &mut taken),
    };
    let combine_index = fresh_name("m", &mut taken);

    let decls = vec![
        Stmt::new(
            StmtKind::Decl(VarDecl {
                name: buffer.clone(),
                ty: CType { base: info.base, dims: vec![ArrayDim::Fixed(info.extent)] },
                storage: Storage::Local,
                init: None,
                span: Span::DUMMY,
            }),
            Span::DUMMY,
        ),
        Stmt::new(
            StmtKind::Decl(VarDecl {
                name: combine_index.clone(),
                ty: CType::scalar(BaseType::Int),
                storage: Storage::Local,
                init: None,
                span: Span::DUMMY,
            }),
            Span::DUMMY,
        ),
    ];

    // Initialize the buffer to the operator identity.
    let init_loop = counting_loop(
        &combine_index,
        info.extent,
        Stmt::new(
            StmtKind::Expr(Expr::assign(
                AssignOp::Assign,
                Expr::array(&buffer, vec![Expr::var(&combine_index)]),
                identity_expr(info.base, candidate.op),
            )),
            Span::DUMMY,
        ),
    );

    // The main loop becomes (or stays) a worksharing for, accumulating into
    // the buffer; the hand style drops the trailing barrier.
    let mut main_loop = loop_stmt.clone();
    {
        let d = main_loop.directive.as_mut().expect("parallelized loop");
        d.kind = DirectiveKind::For;
        if strategy == ReductionStrategy::Atomic {
            d.clauses.nowait = true;
        }
    }
    if let StmtKind::For(f) = &mut main_loop.kind {
        redirect_accumulations(&mut f.body, candidate, &buffer);
    }

    let update = combine_update(&candidate.variable, &buffer, &combine_index, candidate.op, strategy);
    let combine_loop = match strategy {
        ReductionStrategy::Atomic => counting_loop(&combine_index, info.extent, update),
        ReductionStrategy::Critical => {
            let mut l = counting_loop(&combine_index, info.extent, update);
            l.directive = Some(OmpDirective::new(DirectiveKind::Critical(None)));
            l
        }
    };
    Ok(LoweredReduction { decls, init_loop, main_loop, combine_loop })
}

pub fn run(ast: &mut Ast, strategy: ReductionStrategy, log: &mut PassLog) {
    let snapshot = ast.clone();
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        let name = f.name.clone();
        rewrite(&mut f.body, &snapshot, &name, strategy, log, false, &BTreeSet::new());
    }
}

fn rewrite(
    s: &mut Stmt,
    snapshot: &Ast,
    function: &str,
    strategy: ReductionStrategy,
    log: &mut PassLog,
    in_region: bool,
    region_locals: &BTreeSet<String>,
) {
    let starts_region = s.directive.as_ref().is_some_and(|d| d.starts_region());
    if is_parallel_for(s) {
        // Combined construct: lowering wraps it in a region of its own.
        if let Some(candidate) = lowerable_candidate(snapshot, function, s, region_locals) {
            match lower_combined(snapshot, function, s, &candidate, strategy) {
                Ok(region) => {
                    let section = super::section_of(snapshot, function, s.span);
                    log.action(
                        "reduction",
                        section,
                        format!("lowered array reduction of `{}` ({strategy})", candidate.variable),
                    );
                    *s = region;
                    return;
                }
                Err(e) => {
                    let section = super::section_of(snapshot, function, s.span);
                    log.refuse("reduction", section, e.to_string());
                }
            }
        }
    }
    match &mut s.kind {
        StmtKind::Compound(items) => {
            let mut locals = region_locals.clone();
            if starts_region {
                for item in items.iter() {
                    if let StmtKind::Decl(d) = &item.kind {
                        locals.insert(d.name.clone());
                    }
                }
            }
            let inside = in_region || starts_region;
            let drained: Vec<Stmt> = std::mem::take(items);
            let mut out: Vec<Stmt> = Vec::with_capacity(drained.len());
            for mut stmt in drained {
                if inside && is_worksharing_for(&stmt) {
                    if let Some(candidate) =
                        lowerable_candidate(snapshot, function, &stmt, &locals)
                    {
                        match lower_array_reduction(snapshot, function, &stmt, &candidate, strategy)
                        {
                            Ok(lowered) => {
                                let section = super::section_of(snapshot, function, stmt.span);
                                log.action(
                                    "reduction",
                                    section,
                                    format!(
                                        "lowered array reduction of `{}` ({strategy})",
                                        candidate.variable
                                    ),
                                );
                                out.extend(lowered.decls);
                                out.push(lowered.init_loop);
                                out.push(lowered.main_loop);
                                out.push(lowered.combine_loop);
                                continue;
                            }
                            Err(e) => {
                                let section = super::section_of(snapshot, function, stmt.span);
                                log.refuse("reduction", section, e.to_string());
                            }
                        }
                    }
                }
                rewrite(&mut stmt, snapshot, function, strategy, log, inside, &locals);
                out.push(stmt);
            }
            *items = out;
        }
        StmtKind::For(f) => {
            let inside = in_region || starts_region;
            rewrite(&mut f.body, snapshot, function, strategy, log, inside, region_locals);
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            rewrite(then_branch, snapshot, function, strategy, log, in_region, region_locals);
            if let Some(e) = else_branch {
                rewrite(e, snapshot, function, strategy, log, in_region, region_locals);
            }
        }
        _ => {}
    }
}

/// The loop's first array-reduction candidate eligible for lowering: not
/// already thread-local (declared inside the region or privatized by a
/// clause).
fn lowerable_candidate(
    snapshot: &Ast,
    function: &str,
    stmt: &Stmt,
    region_locals: &BTreeSet<String>,
) -> Option<ReductionCandidate> {
    let loop_ = stmt.as_for()?;
    if !loop_.header.canonical {
        return None;
    }
    let clauses = &stmt.directive.as_ref()?.clauses;
    let candidates = recognize_reductions(loop_);
    candidates.into_iter().find(|c| {
        c.is_array()
            && !region_locals.contains(&c.variable)
            && !clauses.private.contains(&c.variable)
            && !clauses.firstprivate.contains(&c.variable)
            && array_info(snapshot, function, &c.variable).is_some()
    })
}

fn lower_combined(
    snapshot: &Ast,
    function: &str,
    stmt: &Stmt,
    candidate: &ReductionCandidate,
    strategy: ReductionStrategy,
) -> Result<Stmt, ReductionLoweringError> {
    // Hoist the combined construct's region-level clauses onto the region.
    let original = stmt.directive.as_ref().unwrap().clone();
    let mut stmt_for_lowering = stmt.clone();
    {
        let d = stmt_for_lowering.directive.as_mut().unwrap();
        d.clauses.private.clear();
        d.clauses.firstprivate.clear();
    }
    let lowered =
        lower_array_reduction(snapshot, function, &stmt_for_lowering, candidate, strategy)?;
    let mut region_clauses = ClauseSet::default();
    region_clauses.private = original.clauses.private.clone();
    region_clauses.firstprivate = original.clauses.firstprivate.clone();
    region_clauses.if_condition = original.clauses.if_condition.clone();
    let mut body = lowered.decls;
    body.push(lowered.init_loop);
    body.push(lowered.main_loop);
    body.push(lowered.combine_loop);
    Ok(Stmt {
        kind: StmtKind::Compound(body),
        span: stmt.span,
        directive: Some(OmpDirective {
            kind: DirectiveKind::Parallel,
            clauses: region_clauses,
            span: Span::DUMMY,
        }),
    })
}
