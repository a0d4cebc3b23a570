//! Program analyses behind the rewrite passes: dependence testing,
//! privatization, reduction recognition, side-effect summaries, inline
//! expansion, cross-loop conflict checks and cross-region liveness, plus the
//! brute-force oracles used to validate them.

pub mod accesses;
pub mod affine;
pub mod conflicts;
pub mod dependence;
pub mod inline;
pub mod liveness;
pub mod oracle;
pub mod privatize;
pub mod reductions;
pub mod side_effects;

pub use accesses::{
    collect_accesses, collect_accesses_with_effects, AccessDescriptor, AccessMode,
};
pub use affine::{AffineForm, LinearExpr, Subscript};
pub use conflicts::{cross_loop_conflicts, ConflictReport};
pub use dependence::{dependence_test, Carrier, DepKind, DepStatus, DependenceEdge};
pub use inline::{inline_expand, InlineError};
pub use liveness::live_across_regions;
pub use privatize::{find_private, PrivClass, PrivatizationResult, PrivatizeCtx};
pub use reductions::{recognize_reductions, ReductionCandidate};
pub use side_effects::{
    build_call_graph, side_effects, AnalysisConfig, CallGraph, SideEffectClass,
    SideEffectSummary, SideEffectTable,
};

use std::collections::BTreeSet;

use crate::frontend::ast::{Ast, ExprKind, FunctionDef};
use crate::frontend::Span;

/// Scalars read anywhere in the function after the statement at `loop_span`;
/// the conservative live-after set used for lastprivate classification.
pub fn scalars_read_after(f: &FunctionDef, loop_span: Span) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    f.body.walk_exprs(&mut |e| {
        if e.span.lo >= loop_span.hi {
            if let ExprKind::Var(n) = &e.kind {
                out.insert(n.clone());
            }
        }
    });
    out
}

/// 1-D declared array extents visible to a loop in `f`: function locals,
/// parameters with fixed extents, and file-scope arrays.
pub fn array_extents(ast: &Ast, f: &FunctionDef) -> std::collections::BTreeMap<String, i64> {
    use crate::frontend::ast::{ArrayDim, Item, StmtKind};
    let mut extents = std::collections::BTreeMap::new();
    {
        let mut add = |name: &str, dims: &[ArrayDim]| {
            if let [ArrayDim::Fixed(n)] = dims {
                extents.insert(name.to_string(), *n);
            }
        };
        for item in &ast.items {
            if let Item::Global(d) = item {
                add(&d.name, &d.ty.dims);
            }
        }
        for p in &f.params {
            add(&p.name, &p.ty.dims);
        }
        f.body.walk(&mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                add(&d.name, &d.ty.dims);
            }
        });
    }
    extents
}

/// Names with static or global storage visible in `f`.
pub fn persistent_names(ast: &Ast, f: &FunctionDef) -> BTreeSet<String> {
    use crate::frontend::ast::{Item, StmtKind, Storage};
    let mut out = BTreeSet::new();
    for item in &ast.items {
        if let Item::Global(d) = item {
            out.insert(d.name.clone());
        }
    }
    f.body.walk(&mut |s| {
        if let StmtKind::Decl(d) = &s.kind {
            if d.storage == Storage::Static {
                out.insert(d.name.clone());
            }
        }
    });
    out
}
