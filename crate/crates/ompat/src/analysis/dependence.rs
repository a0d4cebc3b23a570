//! Data dependence testing with respect to one loop: ZIV plus strong SIV on
//! affine single-index dimensions; everything else is assumed dependent.
//!
//! The result is conservative: independence is only reported when a
//! brute-force enumeration of iteration pairs could not refute it.

use std::collections::BTreeMap;

use crate::frontend::ast::{ForLoop, LoopCmp, StmtKind};

use super::accesses::{AccessDescriptor, AccessMode};
use super::affine::{LinearExpr, Subscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepKind {
    Flow,
    Anti,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Carrier {
    LoopIndependent,
    /// Carried by the named loop (the tested one).
    Loop(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepStatus {
    Proven,
    Assumed,
}

#[derive(Debug, Clone)]
pub struct DependenceEdge {
    pub src: AccessDescriptor,
    pub dst: AccessDescriptor,
    pub kind: DepKind,
    pub carrier: Carrier,
    pub status: DepStatus,
    /// Iteration distance on the tested loop when strong SIV determined one.
    pub distance: Option<i64>,
}

impl DependenceEdge {
    pub fn is_carried(&self) -> bool {
        matches!(self.carrier, Carrier::Loop(_))
    }
}

/// Constant trip count of a loop header, when bounds fold to integers.
pub fn const_trip(header: &crate::frontend::ast::LoopHeader) -> Option<i64> {
    let lower = LinearExpr::from_expr(&header.lower)?.as_constant()?;
    let upper = LinearExpr::from_expr(&header.upper)?.as_constant()?;
    let span = match header.cmp {
        LoopCmp::Lt => upper - lower,
        LoopCmp::Le => upper - lower + 1,
        LoopCmp::Gt => lower - upper,
        LoopCmp::Ge => lower - upper + 1,
    };
    let stride = header.stride.abs();
    Some(((span.max(0)) + stride - 1) / stride)
}

/// Trip counts for the tested loop and every inner loop with constant bounds.
fn trip_counts(loop_: &ForLoop) -> BTreeMap<String, i64> {
    let mut trips = BTreeMap::new();
    if let Some(t) = const_trip(&loop_.header) {
        trips.insert(loop_.header.index.clone(), t);
    }
    loop_.body.walk(&mut |s| {
        if let StmtKind::For(f) = &s.kind {
            if let Some(t) = const_trip(&f.header) {
                trips.insert(f.header.index.clone(), t);
            }
        }
    });
    trips
}

enum DimResult {
    /// The dimension can never collide; the whole pair is independent.
    Independent,
    /// Collision forces v1 - v2 = dist on this index.
    Forces { index: String, dist: i64 },
    /// The dimension always collides (equal invariant subscripts).
    AlwaysEqual,
    /// Opaque, weak-SIV, MIV or symbolically incomparable.
    Indeterminate,
}

fn test_dimension(
    s1: &Subscript,
    s2: &Subscript,
    trips: &BTreeMap<String, i64>,
) -> DimResult {
    // Collision between iterations v1 (first access) and v2 (second) needs
    // f1(v1) == f2(v2); with equal coefficients a per index this forces
    // v2 - v1 = (inv1 - inv2) / a.
    let (Subscript::Affine(f1), Subscript::Affine(f2)) = (s1, s2) else {
        return DimResult::Indeterminate;
    };
    // Require identical coefficients per index; anything beyond strong SIV
    // is assumed dependent.
    let mut names: Vec<&str> = f1.indices().map(|(n, _)| n).collect();
    for (n, _) in f2.indices() {
        if !names.contains(&n) {
            names.push(n);
        }
    }
    let mut used: Vec<(&str, i64)> = Vec::new();
    for n in names {
        let c1 = f1.coeff(n);
        let c2 = f2.coeff(n);
        if c1 != c2 {
            return DimResult::Indeterminate;
        }
        if c1 != 0 {
            used.push((n, c1));
        }
    }
    let diff = f1.invariant.sub(&f2.invariant);
    match used.len() {
        0 => match diff.as_constant() {
            Some(0) => DimResult::AlwaysEqual,
            Some(_) => DimResult::Independent,
            None => DimResult::Indeterminate,
        },
        1 => {
            let (index, a) = used[0];
            let Some(c) = diff.as_constant() else {
                return DimResult::Indeterminate;
            };
            if c % a != 0 {
                return DimResult::Independent;
            }
            let dist = c / a;
            if let Some(trip) = trips.get(index) {
                if dist.abs() >= *trip {
                    return DimResult::Independent;
                }
            }
            DimResult::Forces { index: index.to_string(), dist }
        }
        _ => DimResult::Indeterminate,
    }
}

/// Tests every same-base pair with at least one write. Applies ZIV then
/// strong SIV per dimension; any dimension proving independence proves the
/// pair independent, and all other cases yield an assumed edge.
pub fn dependence_test(loop_: &ForLoop, accesses: &[AccessDescriptor]) -> Vec<DependenceEdge> {
    let trips = trip_counts(loop_);
    let tested = loop_.header.index.as_str();
    let mut edges = Vec::new();
    for i in 0..accesses.len() {
        for j in i..accesses.len() {
            let p = &accesses[i];
            let q = &accesses[j];
            if p.base != q.base {
                continue;
            }
            if p.mode == AccessMode::Read && q.mode == AccessMode::Read {
                continue;
            }
            let self_pair = i == j;
            if let Some(edge) = test_pair(p, q, tested, &trips, self_pair) {
                edges.push(edge);
            }
        }
    }
    edges
}

fn test_pair(
    p: &AccessDescriptor,
    q: &AccessDescriptor,
    tested: &str,
    trips: &BTreeMap<String, i64>,
    self_pair: bool,
) -> Option<DependenceEdge> {
    let (carrier, status, distance) = if p.is_scalar() && q.is_scalar() {
        // Same scalar in different iterations always collides.
        (Carrier::Loop(tested.to_string()), DepStatus::Proven, None)
    } else if p.subscripts.len() != q.subscripts.len() {
        (Carrier::Loop(tested.to_string()), DepStatus::Assumed, None)
    } else {
        let mut determinate = true;
        // index -> forced distance; contradictions prove independence.
        let mut forced: BTreeMap<String, i64> = BTreeMap::new();
        for (s1, s2) in p.subscripts.iter().zip(&q.subscripts) {
            match test_dimension(s1, s2, trips) {
                DimResult::Independent => return None,
                DimResult::Forces { index, dist } => {
                    if let Some(prev) = forced.insert(index, dist) {
                        if prev != dist {
                            return None;
                        }
                    }
                }
                DimResult::AlwaysEqual => {}
                DimResult::Indeterminate => determinate = false,
            }
        }
        let status = if determinate { DepStatus::Proven } else { DepStatus::Assumed };
        match forced.get(tested) {
            Some(0) if determinate => (Carrier::LoopIndependent, status, Some(0)),
            Some(&d) => (Carrier::Loop(tested.to_string()), status, Some(d)),
            // The tested index is unconstrained: iterations with different
            // index values can collide.
            None => (Carrier::Loop(tested.to_string()), status, None),
        }
    };
    if self_pair && carrier == Carrier::LoopIndependent {
        // An access colliding only with itself in the same iteration is not
        // a dependence.
        return None;
    }
    // Source is the earlier iteration when the distance is known, otherwise
    // the textually earlier access.
    let (src, dst, distance) = match distance {
        Some(d) if d < 0 => (q.clone(), p.clone(), Some(-d)),
        Some(d) if d > 0 => (p.clone(), q.clone(), Some(d)),
        other if q.site.lo < p.site.lo => (q.clone(), p.clone(), other),
        other => (p.clone(), q.clone(), other),
    };
    let kind = match (src.mode, dst.mode) {
        (AccessMode::Write, AccessMode::Read) => DepKind::Flow,
        (AccessMode::Read, AccessMode::Write) => DepKind::Anti,
        (AccessMode::Write, AccessMode::Write) => DepKind::Output,
        (AccessMode::Read, AccessMode::Read) => unreachable!(),
    };
    Some(DependenceEdge { src, dst, kind, carrier, status, distance })
}
