//! Brute-force oracles: iteration-pair enumeration for dependence claims and
//! static-partition enumeration for cross-thread worksharing conflicts.
//!
//! These deliberately share no code with the dependence test or the conflict
//! analysis they validate; they evaluate subscripts concretely instead.

use std::collections::BTreeMap;

use crate::frontend::ast::{
    BinOp, Expr, ExprKind, ForLoop, LoopCmp, Stmt, StmtKind, UnaryOp,
};

/// One concrete memory touch at a known element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteAccess {
    pub base: String,
    /// Empty for scalars.
    pub elem: Vec<i64>,
    pub write: bool,
}

impl ConcreteAccess {
    fn conflicts(&self, other: &ConcreteAccess) -> bool {
        (self.write || other.write) && self.base == other.base && self.elem == other.elem
    }
}

fn eval_int(e: &Expr, env: &BTreeMap<String, i64>) -> Option<i64> {
    match &e.kind {
        ExprKind::IntLit(v) => Some(*v),
        ExprKind::Var(n) => env.get(n).copied(),
        ExprKind::Unary { op: UnaryOp::Neg, operand } => Some(-eval_int(operand, env)?),
        ExprKind::Unary { op: UnaryOp::Not, operand } => {
            Some((eval_int(operand, env)? == 0) as i64)
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let l = eval_int(lhs, env)?;
            let r = eval_int(rhs, env)?;
            match op {
                BinOp::Add => Some(l + r),
                BinOp::Sub => Some(l - r),
                BinOp::Mul => Some(l * r),
                BinOp::Div => (r != 0).then(|| l / r),
                BinOp::Mod => (r != 0).then(|| l % r),
                BinOp::Lt => Some((l < r) as i64),
                BinOp::Gt => Some((l > r) as i64),
                BinOp::Le => Some((l <= r) as i64),
                BinOp::Ge => Some((l >= r) as i64),
                BinOp::Eq => Some((l == r) as i64),
                BinOp::Ne => Some((l != r) as i64),
                BinOp::LogAnd => Some(((l != 0) && (r != 0)) as i64),
                BinOp::LogOr => Some(((l != 0) || (r != 0)) as i64),
            }
        }
        _ => None,
    }
}

/// The iteration values a header produces, when its bounds evaluate.
pub fn iteration_values(
    header: &crate::frontend::ast::LoopHeader,
    env: &BTreeMap<String, i64>,
) -> Option<Vec<i64>> {
    let lower = eval_int(&header.lower, env)?;
    let upper = eval_int(&header.upper, env)?;
    let mut vals = Vec::new();
    let mut v = lower;
    loop {
        let cont = match header.cmp {
            LoopCmp::Lt => v < upper,
            LoopCmp::Le => v <= upper,
            LoopCmp::Gt => v > upper,
            LoopCmp::Ge => v >= upper,
        };
        if !cont {
            break;
        }
        vals.push(v);
        v += header.stride;
        if vals.len() > 100_000 {
            return None;
        }
    }
    Some(vals)
}

/// May-access collection for one statement under a concrete index
/// environment. If branches contribute both arms. Returns None when a call
/// or an unevaluable subscript makes the statement unanalyzable.
fn collect_concrete(
    s: &Stmt,
    env: &mut BTreeMap<String, i64>,
    out: &mut Vec<ConcreteAccess>,
) -> Option<()> {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                collect_concrete(item, env, out)?;
            }
            Some(())
        }
        StmtKind::For(f) => {
            let values = iteration_values(&f.header, env)?;
            for v in values {
                env.insert(f.header.index.clone(), v);
                collect_concrete(&f.body, env, out)?;
            }
            env.remove(&f.header.index);
            Some(())
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            collect_expr_concrete(cond, env, out, false)?;
            collect_concrete(then_branch, env, out)?;
            if let Some(e) = else_branch {
                collect_concrete(e, env, out)?;
            }
            Some(())
        }
        StmtKind::Expr(e) => collect_expr_concrete(e, env, out, false),
        StmtKind::Decl(d) => match &d.init {
            Some(init) => collect_expr_concrete(init, env, out, false),
            None => Some(()),
        },
        StmtKind::Return(Some(e)) => collect_expr_concrete(e, env, out, false),
        _ => Some(()),
    }
}

fn collect_expr_concrete(
    e: &Expr,
    env: &BTreeMap<String, i64>,
    out: &mut Vec<ConcreteAccess>,
    write: bool,
) -> Option<()> {
    match &e.kind {
        ExprKind::IntLit(_) | ExprKind::FloatLit(_) => Some(()),
        ExprKind::Var(n) => {
            if !env.contains_key(n) {
                out.push(ConcreteAccess { base: n.clone(), elem: Vec::new(), write });
            }
            Some(())
        }
        ExprKind::ArrayRef { base, subs } => {
            let mut elem = Vec::new();
            for sub in subs {
                elem.push(eval_int(sub, env)?);
            }
            out.push(ConcreteAccess { base: base.clone(), elem, write });
            Some(())
        }
        ExprKind::Call { .. } => None,
        ExprKind::Unary { operand, .. } => collect_expr_concrete(operand, env, out, write),
        ExprKind::Binary { lhs, rhs, .. } => {
            collect_expr_concrete(lhs, env, out, false)?;
            collect_expr_concrete(rhs, env, out, false)
        }
        ExprKind::Assign { op, target, value } => {
            collect_expr_concrete(value, env, out, false)?;
            if op.bin_op().is_some() {
                collect_expr_concrete(target, env, out, false)?;
            }
            collect_expr_concrete(target, env, out, true)
        }
    }
}

/// Per-iteration concrete access sets for a loop with evaluable bounds.
pub fn per_iteration_accesses(loop_: &ForLoop) -> Option<Vec<(i64, Vec<ConcreteAccess>)>> {
    let empty = BTreeMap::new();
    let values = iteration_values(&loop_.header, &empty)?;
    let mut result = Vec::with_capacity(values.len());
    for v in values {
        let mut env = BTreeMap::new();
        env.insert(loop_.header.index.clone(), v);
        let mut accs = Vec::new();
        collect_concrete(&loop_.body, &mut env, &mut accs)?;
        result.push((v, accs));
    }
    Some(result)
}

/// Does any pair of distinct iterations perform conflicting accesses?
/// None when the loop cannot be enumerated concretely.
pub fn refutes_independence(loop_: &ForLoop) -> Option<bool> {
    let iters = per_iteration_accesses(loop_)?;
    for (n, (_, a)) in iters.iter().enumerate() {
        for (_, b) in iters.iter().skip(n + 1) {
            for x in a {
                for y in b {
                    if x.conflicts(y) {
                        return Some(true);
                    }
                }
            }
        }
    }
    Some(false)
}

/// All weak compositions of `n` iterations into `threads` ordered contiguous
/// blocks; every static partition a runtime could choose is among them.
fn compositions(n: usize, threads: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(threads);
    fn go(rem: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            current.push(rem);
            out.push(current.clone());
            current.pop();
            return;
        }
        for take in 0..=rem {
            current.push(take);
            go(rem - take, slots - 1, current, out);
            current.pop();
        }
    }
    go(n, threads, &mut current, &mut out);
    out
}

/// Brute-force cross-thread conflict check for two adjacent worksharing
/// loops: under every static partition for 2..=max_threads threads, does a
/// thread in `second` touch an element a different thread wrote in `first`
/// (or vice versa)? None when either loop cannot be enumerated.
pub fn cross_thread_conflicts(
    first: &ForLoop,
    second: &ForLoop,
    max_threads: usize,
) -> Option<bool> {
    let it1 = per_iteration_accesses(first)?;
    let it2 = per_iteration_accesses(second)?;
    if it1.len() != it2.len() || it1.iter().zip(&it2).any(|((v1, _), (v2, _))| v1 != v2) {
        // Different iteration sequences: no ownership correspondence at all,
        // so any conflicting element pair is a cross-thread hazard.
        for (_, a) in &it1 {
            for (_, b) in &it2 {
                for x in a {
                    for y in b {
                        if x.conflicts(y) {
                            return Some(true);
                        }
                    }
                }
            }
        }
        return Some(false);
    }
    let n = it1.len();
    // conflict[k1][k2]: first's iteration k1 conflicts with second's k2.
    let mut conflict = vec![vec![false; n]; n];
    for (k1, (_, a)) in it1.iter().enumerate() {
        for (k2, (_, b)) in it2.iter().enumerate() {
            conflict[k1][k2] =
                a.iter().any(|x| b.iter().any(|y| x.conflicts(y)));
        }
    }
    for threads in 2..=max_threads {
        for comp in compositions(n, threads) {
            let mut owner = vec![0usize; n];
            let mut k = 0;
            for (t, size) in comp.iter().enumerate() {
                for _ in 0..*size {
                    owner[k] = t;
                    k += 1;
                }
            }
            for k1 in 0..n {
                for k2 in 0..n {
                    if conflict[k1][k2] && owner[k1] != owner[k2] {
                        return Some(true);
                    }
                }
            }
        }
    }
    Some(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{function_nests, parse_str};

    fn loop_of(src: &str) -> ForLoop {
        let ast = parse_str(src).unwrap();
        let f = ast.functions().next().unwrap();
        function_nests(f)[0].as_for().unwrap().clone()
    }

    #[test]
    fn refutes_shifted_subscript() {
        let l = loop_of("void f(void) { int i; for (i = 1; i < 8; i++) { a[i] = a[i - 1] + 1; } }");
        assert_eq!(refutes_independence(&l), Some(true));
    }

    #[test]
    fn accepts_identity_subscript() {
        let l = loop_of("void f(void) { int i; for (i = 0; i < 8; i++) { a[i] = a[i] * 2; } }");
        assert_eq!(refutes_independence(&l), Some(false));
    }

    #[test]
    fn triangular_inner_loops_enumerate() {
        let l = loop_of(
            "void f(void) { int i; int j; for (i = 0; i < 6; i++) { for (j = 0; j < i; j++) { a[i][j] = 1; } } }",
        );
        assert_eq!(refutes_independence(&l), Some(false));
    }

    #[test]
    fn cross_thread_aligned_ok() {
        let a = loop_of("void f(void) { int i; for (i = 0; i < 16; i++) { a[i] = i; } }");
        let b = loop_of("void g(void) { int i; for (i = 0; i < 16; i++) { b[i] = a[i]; } }");
        assert_eq!(cross_thread_conflicts(&a, &b, 4), Some(false));
    }

    #[test]
    fn cross_thread_shifted_conflicts() {
        let a = loop_of("void f(void) { int i; for (i = 0; i < 16; i++) { a[i] = i; } }");
        let b = loop_of("void g(void) { int i; for (i = 1; i < 16; i++) { b[i] = a[i - 1]; } }");
        // Iteration spaces differ, so any overlap is a hazard.
        assert_eq!(cross_thread_conflicts(&a, &b, 4), Some(true));
    }

    #[test]
    fn cross_thread_same_space_shifted_read() {
        let a = loop_of("void f(void) { int i; for (i = 0; i < 16; i++) { a[i] = i; } }");
        let b = loop_of("void g(void) { int i; for (i = 0; i < 16; i++) { b[i] = a[i - 1 + 1 - 1]; } }");
        assert_eq!(cross_thread_conflicts(&a, &b, 4), Some(true));
    }

    #[test]
    fn compositions_cover_all_splits() {
        assert_eq!(compositions(3, 2).len(), 4); // 0+3, 1+2, 2+1, 3+0
    }
}
