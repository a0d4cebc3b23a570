//! Cross-loop conflict checking for adjacent worksharing loops in one
//! parallel region: conflicting=false only when static scheduling with
//! identical iteration spaces guarantees same-thread ownership of every
//! shared element.

use std::collections::BTreeSet;

use crate::frontend::ast::{ForLoop, ScheduleClause, ScheduleKind, Stmt};

use super::accesses::{collect_accesses, AccessDescriptor};
use super::affine::{AffineForm, LinearExpr, Subscript};

#[derive(Debug, Clone, Default)]
pub struct ConflictReport {
    pub conflicting: bool,
    pub witnesses: Vec<(AccessDescriptor, AccessDescriptor)>,
}

impl ConflictReport {
    fn conflict(witnesses: Vec<(AccessDescriptor, AccessDescriptor)>) -> Self {
        ConflictReport { conflicting: true, witnesses }
    }

    fn clean() -> Self {
        ConflictReport::default()
    }
}

fn static_no_chunk(schedule: &Option<ScheduleClause>) -> bool {
    match schedule {
        None => true,
        Some(s) => s.kind == ScheduleKind::Static && s.chunk.is_none(),
    }
}

fn same_iteration_space(a: &ForLoop, b: &ForLoop) -> bool {
    if a.header.stride != b.header.stride || a.header.cmp != b.header.cmp {
        return false;
    }
    let bounds = |l: &ForLoop| -> Option<(LinearExpr, LinearExpr)> {
        Some((
            LinearExpr::from_expr(&l.header.lower)?,
            LinearExpr::from_expr(&l.header.upper)?,
        ))
    };
    match (bounds(a), bounds(b)) {
        (Some((la, ua)), Some((lb, ub))) => la == lb && ua == ub,
        _ => false,
    }
}

/// One dimension's form with the worksharing index canonicalized, so forms
/// from loops with differently named indices compare.
#[derive(PartialEq, Eq, Clone, Debug)]
struct CanonicalDim {
    ws_coeff: i64,
    other_indices: Vec<(String, i64)>,
    invariant: LinearExpr,
}

fn canonicalize(form: &AffineForm, ws_index: &str) -> CanonicalDim {
    let mut ws_coeff = 0;
    let mut other_indices = Vec::new();
    for (n, c) in form.indices() {
        if n == ws_index {
            ws_coeff = c;
        } else {
            other_indices.push((n.to_string(), c));
        }
    }
    CanonicalDim { ws_coeff, other_indices, invariant: form.invariant.clone() }
}

/// conflicting=false requires: both loops statically scheduled with no chunk
/// clause, identical canonical iteration spaces, and for every base written
/// in one loop and accessed in the other, all subscript forms identical
/// functions of the loop index with at least one dimension pinning the
/// iteration injectively.
pub fn cross_loop_conflicts(first: &Stmt, second: &Stmt) -> ConflictReport {
    let (Some(fl), Some(sl)) = (first.as_for(), second.as_for()) else {
        return ConflictReport::conflict(Vec::new());
    };
    let (Some(fd), Some(sd)) = (&first.directive, &second.directive) else {
        return ConflictReport::conflict(Vec::new());
    };
    if !static_no_chunk(&fd.clauses.schedule) || !static_no_chunk(&sd.clauses.schedule) {
        return ConflictReport::conflict(Vec::new());
    }
    if !fl.header.canonical || !sl.header.canonical || !same_iteration_space(fl, sl) {
        return ConflictReport::conflict(Vec::new());
    }

    let first_accs = collect_accesses(fl);
    let second_accs = collect_accesses(sl);
    let mut shared_bases: BTreeSet<&str> = BTreeSet::new();
    for a in &first_accs {
        for b in &second_accs {
            if a.base == b.base && (a.is_write() || b.is_write()) {
                shared_bases.insert(&a.base);
            }
        }
    }

    let mut witnesses = Vec::new();
    for base in shared_bases {
        let all: Vec<(&AccessDescriptor, &str)> = first_accs
            .iter()
            .filter(|a| a.base == base)
            .map(|a| (a, fl.header.index.as_str()))
            .chain(
                second_accs
                    .iter()
                    .filter(|a| a.base == base)
                    .map(|a| (a, sl.header.index.as_str())),
            )
            .collect();
        let mut canonical: Option<Vec<CanonicalDim>> = None;
        let mut base_ok = true;
        for (acc, ws_index) in &all {
            if acc.is_scalar() {
                base_ok = false;
                break;
            }
            let mut dims = Vec::new();
            for sub in &acc.subscripts {
                match sub {
                    Subscript::Affine(f) => dims.push(canonicalize(f, ws_index)),
                    Subscript::Opaque { .. } => {
                        base_ok = false;
                        break;
                    }
                }
            }
            if !base_ok {
                break;
            }
            match &canonical {
                None => canonical = Some(dims),
                Some(c) if *c == dims => {}
                Some(_) => {
                    base_ok = false;
                    break;
                }
            }
        }
        // Same-thread ownership needs one dimension that is an injective
        // function of the worksharing index alone.
        if base_ok {
            let dims = canonical.as_ref().unwrap();
            base_ok = dims.iter().any(|d| d.ws_coeff != 0 && d.other_indices.is_empty());
        }
        if !base_ok {
            for a in first_accs.iter().filter(|a| a.base == base && a.is_write()) {
                for b in second_accs.iter().filter(|b| b.base == base) {
                    witnesses.push((a.clone(), b.clone()));
                }
            }
            for a in first_accs.iter().filter(|a| a.base == base && !a.is_write()) {
                for b in second_accs.iter().filter(|b| b.base == base && b.is_write()) {
                    witnesses.push((a.clone(), b.clone()));
                }
            }
            if witnesses.is_empty() {
                witnesses.push((
                    first_accs.iter().find(|a| a.base == base).unwrap().clone(),
                    second_accs.iter().find(|b| b.base == base).unwrap().clone(),
                ));
            }
            return ConflictReport::conflict(witnesses);
        }
    }
    ConflictReport::clean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::ast::StmtKind;
    use crate::frontend::parse_str;

    /// The two worksharing loops of the first parallel region in `src`.
    fn ws_pair(src: &str) -> (Stmt, Stmt) {
        let ast = parse_str(src).unwrap();
        let f = ast.functions().next().unwrap();
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        let region = items
            .iter()
            .find(|s| s.directive.as_ref().is_some_and(|d| d.starts_region()))
            .unwrap();
        let StmtKind::Compound(body) = &region.kind else { panic!() };
        let loops: Vec<&Stmt> = body
            .iter()
            .filter(|s| s.directive.as_ref().is_some_and(|d| d.is_worksharing()))
            .collect();
        (loops[0].clone(), loops[1].clone())
    }

    #[test]
    fn aligned_static_pair_is_clean() {
        let (a, b) = ws_pair(
            "void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = a[i]; }
               } }",
        );
        let r = cross_loop_conflicts(&a, &b);
        assert!(!r.conflicting, "{:?}", r.witnesses);
    }

    #[test]
    fn shifted_consumer_conflicts() {
        let (a, b) = ws_pair(
            "void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = a[i - 1]; }
               } }",
        );
        let r = cross_loop_conflicts(&a, &b);
        assert!(r.conflicting);
        assert!(!r.witnesses.is_empty());
    }

    #[test]
    fn dynamic_schedule_conflicts() {
        let (a, b) = ws_pair(
            "void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for schedule(dynamic)
                 for (i = 0; i < 16; i++) { b[i] = a[i]; }
               } }",
        );
        assert!(cross_loop_conflicts(&a, &b).conflicting);
    }

    #[test]
    fn different_spaces_conflict() {
        let (a, b) = ws_pair(
            "void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 8; i++) { b[i] = a[i]; }
               } }",
        );
        assert!(cross_loop_conflicts(&a, &b).conflicting);
    }

    #[test]
    fn index_renaming_is_canonicalized() {
        let (a, b) = ws_pair(
            "void f(void) { int i; int j;
               #pragma omp parallel private(i, j)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (j = 0; j < 16; j++) { b[j] = a[j]; }
               } }",
        );
        assert!(!cross_loop_conflicts(&a, &b).conflicting);
    }

    #[test]
    fn inner_index_only_base_conflicts() {
        // Every thread writes all of a[j]; no per-thread ownership.
        let (a, b) = ws_pair(
            "void f(void) { int i; int j;
               #pragma omp parallel private(i, j)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { for (j = 0; j < 4; j++) { w[j] = i; } }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = w[0]; }
               } }",
        );
        assert!(cross_loop_conflicts(&a, &b).conflicting);
    }

    #[test]
    fn disjoint_bases_are_clean() {
        let (a, b) = ws_pair(
            "void f(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 16; i++) { a[i] = i; }
                 #pragma omp for
                 for (i = 0; i < 16; i++) { b[i] = c[i]; }
               } }",
        );
        assert!(!cross_loop_conflicts(&a, &b).conflicting);
    }
}
