//! Inline-expansion pass: replace call statements inside loop nests with the
//! callee body so later passes can analyze the loop.

use std::collections::BTreeSet;

use crate::analysis::inline::{inline_expand, InlineError};
use crate::analysis::side_effects::AnalysisConfig;
use crate::frontend::ast::*;
use crate::frontend::Span;

use super::PassLog;

const MAX_INLINES: usize = 200;

pub fn run(ast: &mut Ast, config: &AnalysisConfig, log: &mut PassLog) {
    let mut refused: BTreeSet<(String, String)> = BTreeSet::new();
    for _ in 0..MAX_INLINES {
        let Some((site, callee, function, section)) = next_candidate(ast, &refused) else {
            break;
        };
        match inline_expand(ast, site, config) {
            Ok(new_ast) => {
                *ast = new_ast;
                log.action("inline", &section, format!("inlined `{callee}`"));
            }
            Err(e) => {
                let key = (function.clone(), callee.clone());
                if refused.insert(key) {
                    let reason = match e {
                        InlineError::Recursive => "recursive".to_string(),
                        InlineError::Variadic => "variadic".to_string(),
                        InlineError::Io => "io".to_string(),
                        InlineError::Undefined => "undefined".to_string(),
                        InlineError::Unsupported(msg) => msg,
                    };
                    log.refuse("inline", &section, format!("`{callee}`: {reason}"));
                }
            }
        }
    }
}

/// The first call statement inside a loop whose callee is defined in the
/// unit and not already refused for that caller.
fn next_candidate(
    ast: &Ast,
    refused: &BTreeSet<(String, String)>,
) -> Option<(Span, String, String, String)> {
    for f in ast.functions() {
        let mut found: Option<(Span, String)> = None;
        find_in_stmt(&f.body, false, &mut |span, callee| {
            if found.is_none()
                && ast.function(callee).is_some()
                && !refused.contains(&(f.name.clone(), callee.to_string()))
            {
                found = Some((span, callee.to_string()));
            }
        });
        if let Some((span, callee)) = found {
            let section = super::section_of(ast, &f.name, span);
            return Some((span, callee, f.name.clone(), section));
        }
    }
    None
}

fn find_in_stmt(s: &Stmt, in_loop: bool, f: &mut impl FnMut(Span, &str)) {
    match &s.kind {
        StmtKind::Compound(items) => {
            for item in items {
                find_in_stmt(item, in_loop, f);
            }
        }
        StmtKind::For(l) => find_in_stmt(&l.body, true, f),
        StmtKind::If { then_branch, else_branch, .. } => {
            find_in_stmt(then_branch, in_loop, f);
            if let Some(e) = else_branch {
                find_in_stmt(e, in_loop, f);
            }
        }
        StmtKind::Expr(e) if in_loop => match &e.kind {
            ExprKind::Call { callee, .. } => f(e.span, callee),
            ExprKind::Assign { value, .. } => {
                if let ExprKind::Call { callee, .. } = &value.kind {
                    f(value.span, callee);
                }
            }
            _ => {}
        },
        _ => {}
    }
}
