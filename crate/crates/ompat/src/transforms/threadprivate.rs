//! Threadprivate conversion, both directions: replace the directive with
//! loop-private clauses when no per-thread value persists across regions, or
//! promote region-privatized statics/globals to threadprivate.

use thiserror::Error;

use crate::analysis::liveness::live_across_regions;
use crate::frontend::ast::*;
use crate::frontend::Span;

use super::{PassLog, TpDirection};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ThreadprivateError {
    #[error("`{0}` persists across parallel regions")]
    PersistsAcrossRegions(String),
    #[error("`{0}` is not a static or global variable")]
    NotStaticOrGlobal(String),
}

/// Rewrites the unit for the given variables. to_loop_private removes the
/// threadprivate directive and adds the variable to the private clause of
/// each region using it; to_threadprivate is the inverse.
pub fn convert_threadprivate(
    ast: &Ast,
    vars: &[String],
    direction: TpDirection,
) -> Result<Ast, ThreadprivateError> {
    let mut out = ast.clone();
    for var in vars {
        match direction {
            TpDirection::ToLoopPrivate => {
                if !ast.threadprivate_vars().contains(&var.as_str()) {
                    return Err(ThreadprivateError::NotStaticOrGlobal(var.clone()));
                }
                if live_across_regions(ast, var) {
                    return Err(ThreadprivateError::PersistsAcrossRegions(var.clone()));
                }
                remove_threadprivate(&mut out, var);
                add_private_to_regions(&mut out, var);
            }
            TpDirection::ToThreadprivate => {
                if ast.global_decl(var).is_none() {
                    return Err(ThreadprivateError::NotStaticOrGlobal(var.clone()));
                }
                remove_private_in_regions(&mut out, var);
                append_threadprivate(&mut out, var);
            }
        }
    }
    Ok(out)
}

pub fn run(ast: &mut Ast, direction: TpDirection, log: &mut PassLog) {
    match direction {
        TpDirection::ToLoopPrivate => {
            let vars: Vec<String> =
                ast.threadprivate_vars().iter().map(|s| s.to_string()).collect();
            for var in vars {
                if live_across_regions(ast, &var) {
                    log.refuse(
                        "threadprivate",
                        &var,
                        "persists across regions; conversion would change semantics",
                    );
                    continue;
                }
                remove_threadprivate(ast, &var);
                add_private_to_regions(ast, &var);
                log.action("threadprivate", &var, "converted to loop-private");
            }
        }
        TpDirection::ToThreadprivate => {
            // Candidates: statics/globals privatized by every region that
            // uses them.
            let candidates = promotion_candidates(ast);
            for var in candidates {
                remove_private_in_regions(ast, &var);
                append_threadprivate(ast, &var);
                log.action("threadprivate", &var, "converted to threadprivate");
            }
        }
    }
}

fn promotion_candidates(ast: &Ast) -> Vec<String> {
    let mut out = Vec::new();
    let globals: Vec<String> = ast
        .items
        .iter()
        .filter_map(|i| match i {
            Item::Global(d) => Some(d.name.clone()),
            _ => None,
        })
        .collect();
    for var in globals {
        if ast.threadprivate_vars().contains(&var.as_str()) {
            continue;
        }
        let mut used_in_regions = 0usize;
        let mut privatized_in = 0usize;
        for f in ast.functions() {
            f.body.walk(&mut |s| {
                let Some(d) = &s.directive else { return };
                if !d.starts_region() {
                    return;
                }
                let mut uses = false;
                s.walk_exprs(&mut |e| match &e.kind {
                    ExprKind::Var(n) if *n == var => uses = true,
                    ExprKind::ArrayRef { base, .. } if *base == var => uses = true,
                    _ => {}
                });
                if uses {
                    used_in_regions += 1;
                    if d.clauses.private.contains(&var) {
                        privatized_in += 1;
                    }
                }
            });
        }
        if used_in_regions > 0 && used_in_regions == privatized_in {
            out.push(var);
        }
    }
    out
}

fn remove_threadprivate(ast: &mut Ast, var: &str) {
    for item in &mut ast.items {
        if let Item::Threadprivate(d) = item {
            if let DirectiveKind::Threadprivate(vars) = &mut d.kind {
                vars.retain(|v| v != var);
            }
        }
    }
    ast.items.retain(|i| match i {
        Item::Threadprivate(d) => {
            !matches!(&d.kind, DirectiveKind::Threadprivate(vars) if vars.is_empty())
        }
        _ => true,
    });
}

fn append_threadprivate(ast: &mut Ast, var: &str) {
    let pos = ast
        .items
        .iter()
        .position(|i| matches!(i, Item::Global(d) if d.name == var))
        .map(|p| p + 1)
        .unwrap_or(ast.items.len());
    ast.items.insert(
        pos,
        Item::Threadprivate(OmpDirective {
            kind: DirectiveKind::Threadprivate(vec![var.to_string()]),
            clauses: ClauseSet::default(),
            span: Span::DUMMY,
        }),
    );
}

fn add_private_to_regions(ast: &mut Ast, var: &str) {
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        f.body.walk_mut(&mut |s| {
            let uses = {
                let mut uses = false;
                s.walk_exprs(&mut |e| match &e.kind {
                    ExprKind::Var(n) if n == var => uses = true,
                    ExprKind::ArrayRef { base, .. } if base == var => uses = true,
                    _ => {}
                });
                uses
            };
            if let Some(d) = &mut s.directive {
                if d.starts_region() && uses && !d.clauses.private.iter().any(|v| v == var) {
                    d.clauses.private.push(var.to_string());
                }
            }
        });
    }
}

fn remove_private_in_regions(ast: &mut Ast, var: &str) {
    for item in &mut ast.items {
        let Item::Function(f) = item else { continue };
        f.body.walk_mut(&mut |s| {
            if let Some(d) = &mut s.directive {
                if d.starts_region() {
                    d.clauses.private.retain(|v| v != var);
                    d.clauses.firstprivate.retain(|v| v != var);
                }
            }
        });
    }
}
