//! Inline expansion: replaces a call statement with the renamed body of the
//! called function, binding arguments through initializing declarations.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::ast::*;
use crate::frontend::Span;

use super::side_effects::{build_call_graph, AnalysisConfig, SideEffectClass, SideEffectTable};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum InlineError {
    #[error("inline refused: callee is recursive")]
    Recursive,
    #[error("inline refused: callee is variadic")]
    Variadic,
    #[error("inline refused: callee performs I/O")]
    Io,
    #[error("inline refused: callee is not defined in this unit")]
    Undefined,
    #[error("inline refused: {0}")]
    Unsupported(String),
}

/// Inline the call at `call_site`, returning the rewritten unit. Observable
/// behavior is unchanged; locals and parameters get fresh names.
pub fn inline_expand(
    ast: &Ast,
    call_site: Span,
    config: &AnalysisConfig,
) -> Result<Ast, InlineError> {
    // Identify the call and its statement shape first.
    let mut callee_name: Option<String> = None;
    for f in ast.functions() {
        f.body.walk_exprs(&mut |e| {
            if e.span == call_site {
                if let ExprKind::Call { callee, .. } = &e.kind {
                    callee_name = Some(callee.clone());
                }
            }
        });
    }
    let callee_name = callee_name.ok_or(InlineError::Undefined)?;
    let callee =
        ast.function(&callee_name).cloned().ok_or(InlineError::Undefined)?;

    let graph = build_call_graph(ast);
    if graph.on_cycle(&callee_name) {
        return Err(InlineError::Recursive);
    }
    let effects = SideEffectTable::build(ast, config);
    match effects.summary(&callee_name).classification {
        SideEffectClass::Io => return Err(InlineError::Io),
        SideEffectClass::Unknown => {
            return Err(InlineError::Unsupported(
                "callee has unknown side effects".to_string(),
            ))
        }
        _ => {}
    }

    let suffix = fresh_suffix(ast);
    let mut new_ast = ast.clone();
    let mut replaced = Ok(false);
    for item in &mut new_ast.items {
        let Item::Function(f) = item else { continue };
        let result = replace_in_stmt(&mut f.body, call_site, &callee, suffix);
        match result {
            Ok(true) => {
                replaced = Ok(true);
                break;
            }
            Ok(false) => {}
            Err(e) => {
                replaced = Err(e);
                break;
            }
        }
    }
    match replaced {
        Ok(true) => {
            // Body surgery can change loop-invariance facts.
            crate::frontend::parser::refresh_canonical(&mut new_ast);
            Ok(new_ast)
        }
        Ok(false) => Err(InlineError::Unsupported(
            "call is nested inside an expression; only call statements and simple assignments inline"
                .to_string(),
        )),
        Err(e) => Err(e),
    }
}

fn replace_in_stmt(
    s: &mut Stmt,
    call_site: Span,
    callee: &FunctionDef,
    suffix: u32,
) -> Result<bool, InlineError> {
    // Try children first to keep borrow scopes simple.
    match &mut s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                if replace_in_stmt(item, call_site, callee, suffix)? {
                    return Ok(true);
                }
            }
        }
        StmtKind::For(f) => {
            if replace_in_stmt(&mut f.body, call_site, callee, suffix)? {
                return Ok(true);
            }
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            if replace_in_stmt(then_branch, call_site, callee, suffix)? {
                return Ok(true);
            }
            if let Some(e) = else_branch {
                if replace_in_stmt(e, call_site, callee, suffix)? {
                    return Ok(true);
                }
            }
        }
        _ => {}
    }
    let StmtKind::Expr(e) = &s.kind else { return Ok(false) };
    let (call_expr, assign_target) = match &e.kind {
        ExprKind::Call { .. } if e.span == call_site => (e.clone(), None),
        ExprKind::Assign { op: AssignOp::Assign, target, value }
            if value.span == call_site && matches!(value.kind, ExprKind::Call { .. }) =>
        {
            ((**value).clone(), Some((**target).clone()))
        }
        _ => {
            let mut found = false;
            e.walk(&mut |sub| {
                if sub.span == call_site {
                    found = true;
                }
            });
            if found {
                return Err(InlineError::Unsupported(
                    "call is nested inside an expression; only call statements and simple assignments inline"
                        .to_string(),
                ));
            }
            return Ok(false);
        }
    };
    if s.directive.is_some() {
        return Err(InlineError::Unsupported(
            "call statement carries a directive".to_string(),
        ));
    }
    let ExprKind::Call { args, .. } = &call_expr.kind else { unreachable!() };
    s.kind = StmtKind::Compound(expand_body(callee, args, assign_target, suffix)?);
    Ok(true)
}

fn expand_body(
    callee: &FunctionDef,
    args: &[Expr],
    assign_target: Option<Expr>,
    suffix: u32,
) -> Result<Vec<Stmt>, InlineError> {
    if args.len() != callee.params.len() {
        return Err(InlineError::Unsupported(format!(
            "call passes {} arguments but `{}` takes {}",
            args.len(),
            callee.name,
            callee.params.len()
        )));
    }
    let mut rename: BTreeMap<String, String> = BTreeMap::new();
    let mut bindings: Vec<Stmt> = Vec::new();
    for (param, arg) in callee.params.iter().zip(args) {
        if param.ty.is_array() {
            // Arrays bind by aliasing the argument name.
            match &arg.kind {
                ExprKind::Var(n) => {
                    rename.insert(param.name.clone(), n.clone());
                }
                _ => {
                    return Err(InlineError::Unsupported(format!(
                        "array argument for `{}` is not a plain name",
                        param.name
                    )))
                }
            }
        } else {
            let fresh = format!("{}__{suffix}", param.name);
            rename.insert(param.name.clone(), fresh.clone());
            bindings.push(Stmt::new(
                StmtKind::Decl(VarDecl {
                    name: fresh,
                    ty: param.ty.clone(),
                    storage: Storage::Local,
                    init: Some(arg.clone()),
                    span: Span::DUMMY,
                }),
                Span::DUMMY,
            ));
        }
    }
    // Rename callee locals.
    let StmtKind::Compound(body_items) = &callee.body.kind else {
        return Err(InlineError::Unsupported("callee body is not a block".to_string()));
    };
    let mut body = body_items.clone();
    let mut locals = Vec::new();
    for s in &body {
        collect_local_decls(s, &mut locals);
    }
    for l in locals {
        rename.entry(l.clone()).or_insert_with(|| format!("{l}__{suffix}"));
    }

    // Exactly one trailing return (or none) is supported.
    let mut return_count = 0usize;
    for s in &body {
        s.walk(&mut |s| {
            if matches!(s.kind, StmtKind::Return(_)) {
                return_count += 1;
            }
        });
    }
    let trailing_return = match body.last() {
        Some(Stmt { kind: StmtKind::Return(v), .. }) => Some(v.clone()),
        _ => None,
    };
    if return_count > 1 || (return_count == 1 && trailing_return.is_none()) {
        return Err(InlineError::Unsupported(
            "callee has an early return".to_string(),
        ));
    }
    if trailing_return.is_some() {
        body.pop();
    }
    for s in &mut body {
        rename_stmt(s, &rename);
    }
    let mut out = bindings;
    out.extend(body);
    match (assign_target, trailing_return) {
        (Some(target), Some(Some(mut value))) => {
            rename_expr(&mut value, &rename);
            out.push(Stmt::new(
                StmtKind::Expr(Expr::assign(AssignOp::Assign, target, value)),
                Span::DUMMY,
            ));
        }
        (Some(_), _) => {
            return Err(InlineError::Unsupported(
                "assignment from a callee with no return value".to_string(),
            ))
        }
        (None, _) => {}
    }
    Ok(out)
}

fn collect_local_decls(s: &Stmt, out: &mut Vec<String>) {
    s.walk(&mut |s| match &s.kind {
        StmtKind::Decl(d) => out.push(d.name.clone()),
        StmtKind::For(f) => out.push(f.header.index.clone()),
        _ => {}
    });
}

fn fresh_suffix(ast: &Ast) -> u32 {
    let mut max = 0u32;
    let mut scan = |name: &str| {
        if let Some(idx) = name.rfind("__") {
            if let Ok(n) = name[idx + 2..].parse::<u32>() {
                max = max.max(n);
            }
        }
    };
    for f in ast.functions() {
        f.body.walk(&mut |s| {
            if let StmtKind::Decl(d) = &s.kind {
                scan(&d.name);
            }
        });
    }
    max + 1
}

fn rename_stmt(s: &mut Stmt, map: &BTreeMap<String, String>) {
    match &mut s.kind {
        StmtKind::Compound(items) => items.iter_mut().for_each(|i| rename_stmt(i, map)),
        StmtKind::For(f) => {
            if let Some(new) = map.get(&f.header.index) {
                f.header.index = new.clone();
            }
            rename_expr(&mut f.header.lower, map);
            rename_expr(&mut f.header.upper, map);
            rename_stmt(&mut f.body, map);
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            rename_expr(cond, map);
            rename_stmt(then_branch, map);
            if let Some(e) = else_branch {
                rename_stmt(e, map);
            }
        }
        StmtKind::Expr(e) => rename_expr(e, map),
        StmtKind::Decl(d) => {
            if let Some(new) = map.get(&d.name) {
                d.name = new.clone();
            }
            if let Some(init) = &mut d.init {
                rename_expr(init, map);
            }
        }
        StmtKind::Return(Some(e)) => rename_expr(e, map),
        _ => {}
    }
}

fn rename_expr(e: &mut Expr, map: &BTreeMap<String, String>) {
    match &mut e.kind {
        ExprKind::Var(n) => {
            if let Some(new) = map.get(n) {
                *n = new.clone();
            }
        }
        ExprKind::ArrayRef { base, subs } => {
            if let Some(new) = map.get(base) {
                *base = new.clone();
            }
            subs.iter_mut().for_each(|s| rename_expr(s, map));
        }
        ExprKind::Call { args, .. } => args.iter_mut().for_each(|a| rename_expr(a, map)),
        ExprKind::Unary { operand, .. } => rename_expr(operand, map),
        ExprKind::Binary { lhs, rhs, .. } => {
            rename_expr(lhs, map);
            rename_expr(rhs, map);
        }
        ExprKind::Assign { target, value, .. } => {
            rename_expr(target, map);
            rename_expr(value, map);
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_str, print};

    fn first_call_site(ast: &Ast, caller: &str, callee: &str) -> Span {
        let f = ast.function(caller).unwrap();
        let mut site = None;
        f.body.walk_exprs(&mut |e| {
            if let ExprKind::Call { callee: c, .. } = &e.kind {
                if c == callee && site.is_none() {
                    site = Some(e.span);
                }
            }
        });
        site.unwrap()
    }

    #[test]
    fn inlines_pure_statement_call() {
        let ast = parse_str(
            "void fill(double a[], int n, double v) { int i; for (i = 0; i < n; i++) { a[i] = v; } }
             void main_f(void) { fill(buf, 8, 0.5); }",
        )
        .unwrap();
        let site = first_call_site(&ast, "main_f", "fill");
        let out = inline_expand(&ast, site, &AnalysisConfig::default()).unwrap();
        let text = print(&out).text;
        assert!(!text.contains("fill(buf"));
        assert!(text.contains("buf[i__"), "{text}");
    }

    #[test]
    fn inlines_value_call() {
        let ast = parse_str(
            "double sq(double x) { double r; r = x * x; return r; }
             void main_f(void) { double y; y = sq(3.0); }",
        )
        .unwrap();
        let site = first_call_site(&ast, "main_f", "sq");
        let out = inline_expand(&ast, site, &AnalysisConfig::default()).unwrap();
        let text = print(&out).text;
        assert!(text.contains("y = r__"), "{text}");
    }

    #[test]
    fn refuses_recursive() {
        let ast = parse_str(
            "void f(int n) { if (n > 0) { f(n - 1); } }
             void g(void) { f(3); }",
        )
        .unwrap();
        let site = first_call_site(&ast, "g", "f");
        assert_eq!(
            inline_expand(&ast, site, &AnalysisConfig::default()),
            Err(InlineError::Recursive)
        );
    }

    #[test]
    fn refuses_io() {
        let ast = parse_str(
            "void shout(double x) { print_val(x); }
             void g(void) { shout(1.0); }",
        )
        .unwrap();
        let site = first_call_site(&ast, "g", "shout");
        assert_eq!(inline_expand(&ast, site, &AnalysisConfig::default()), Err(InlineError::Io));
    }

    #[test]
    fn refuses_undefined() {
        let ast = parse_str("void g(void) { mystery(1.0); }").unwrap();
        let site = first_call_site(&ast, "g", "mystery");
        assert!(matches!(
            inline_expand(&ast, site, &AnalysisConfig::default()),
            Err(InlineError::Unsupported(_)) | Err(InlineError::Undefined)
        ));
    }

    #[test]
    fn refuses_early_return() {
        let ast = parse_str(
            "double f(double x) { if (x > 0.0) { return x; } return -x; }
             void g(void) { double y; y = f(2.0); }",
        )
        .unwrap();
        let site = first_call_site(&ast, "g", "f");
        assert!(matches!(
            inline_expand(&ast, site, &AnalysisConfig::default()),
            Err(InlineError::Unsupported(_))
        ));
    }
}
