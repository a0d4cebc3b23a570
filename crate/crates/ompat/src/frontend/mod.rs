//! Frontend: parse the supported C subset plus OpenMP pragmas into an AST,
//! print it back, and assign section names to loop nests.
//!
//! The supported subset covers functions, scalar/array declarations with
//! fixed-rank arrays, for/if/compound/expression statements, assignments with
//! compound operators, calls, and integer/floating literals. Inputs are
//! assumed preprocessor-expanded. goto, switch, while, unstructured control
//! flow, function pointers and unrestricted pointer arithmetic are rejected
//! with located errors; a pointer used only as an array base is modeled as an
//! array.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod printer;
pub mod sections;
pub mod span;

use thiserror::Error;

pub use ast::*;
pub use parser::parse;
pub use sections::{enumerate_sections, function_nests, SectionId};
pub use span::{LineMap, Origin, SourceUnit, Span};

#[derive(Debug, Clone, Error)]
pub enum ParseError {
    #[error("syntax error: {message}")]
    Syntax { span: Span, message: String },
    #[error("unsupported construct: {construct}")]
    Unsupported { span: Span, construct: String },
}

impl ParseError {
    pub fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError::Syntax { span, message: message.into() }
    }

    pub fn unsupported(span: Span, construct: impl Into<String>) -> Self {
        ParseError::Unsupported { span, construct: construct.into() }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Unsupported { span, .. } => *span,
        }
    }

    /// `file:line:col: message`, the diagnostic wire format.
    pub fn render(&self, unit: &SourceUnit) -> String {
        unit.render_diagnostic(self.span(), &self.to_string())
    }
}

/// Emit the unit's text for an AST; the result reparses to a structurally
/// identical tree.
pub fn print(ast: &Ast) -> SourceUnit {
    SourceUnit {
        path: "<printed>".to_string(),
        text: printer::print(ast),
        origin: Origin::Serial,
    }
}

/// Parse straight from text with a synthetic unit, mainly for tests and
/// examples.
pub fn parse_str(text: &str) -> Result<Ast, ParseError> {
    let unit = SourceUnit::new("<memory>", text, Origin::Serial)
        .map_err(|e| ParseError::syntax(Span::DUMMY, e))?;
    parse(&unit)
}

#[cfg(test)]
mod tests {
    use super::ast::{DirectiveKind, LoopDirection, StmtKind};
    use super::*;

    fn roundtrip(src: &str) -> Ast {
        let a1 = parse_str(src).expect("first parse");
        let printed = print(&a1);
        let a2 = parse(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {}\n{}", e.render(&printed), printed.text));
        assert!(
            a1.structurally_equal(&a2),
            "round-trip mismatch:\n{:#?}\nvs\n{:#?}",
            a1.normalized(),
            a2.normalized()
        );
        a1
    }

    #[test]
    fn minimal_loop() {
        let ast = roundtrip("void f(void) { int i; int n; n = 4; for (i = 0; i < n; i++) a[i] = 0; }");
        let f = ast.function("f").unwrap();
        let nests = function_nests(f);
        assert_eq!(nests.len(), 1);
        let fl = nests[0].as_for().unwrap();
        assert_eq!(fl.header.index, "i");
        assert_eq!(fl.header.stride, 1);
        assert!(fl.header.canonical);
    }

    #[test]
    fn pragma_attaches_to_loop() {
        let ast = roundtrip(
            "void f(double a[], int n) {\n int i;\n #pragma omp parallel for private(i)\n for (i = 0; i < n; i++) { a[i] = 0.0; }\n}",
        );
        let f = ast.function("f").unwrap();
        let nests = function_nests(f);
        let d = nests[0].directive.as_ref().unwrap();
        assert_eq!(d.kind, DirectiveKind::ParallelFor);
        assert_eq!(d.clauses.private, vec!["i".to_string()]);
    }

    #[test]
    fn goto_is_unsupported() {
        let err = parse_str("void f(void) { goto done; }").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }));
    }

    #[test]
    fn while_is_unsupported() {
        let err = parse_str("void f(void) { while (1) {} }").unwrap_err();
        assert!(matches!(err, ParseError::Unsupported { .. }));
    }

    #[test]
    fn diagnostics_carry_location() {
        let unit = SourceUnit::new("x.c", "void f(void) {\n  goto done;\n}", Origin::Serial).unwrap();
        let err = parse(&unit).unwrap_err();
        assert_eq!(err.render(&unit), "x.c:2:3: unsupported construct: goto");
    }

    #[test]
    fn nowait_rejected_outside_worksharing() {
        let err = parse_str(
            "void f(void) {\n#pragma omp parallel nowait\n { }\n}",
        )
        .unwrap_err();
        assert!(matches!(err, ParseError::Syntax { .. }));
    }

    #[test]
    fn duplicate_data_sharing_rejected() {
        let err = parse_str(
            "void f(void) { int i;\n#pragma omp parallel for private(t) shared(t)\nfor (i = 0; i < 4; i++) ;\n}",
        )
        .unwrap_err();
        assert!(err.to_string().contains("more than one data-sharing clause"));
    }

    #[test]
    fn sections_count_nests_not_inner_loops() {
        let ast = parse_str(
            "void m(void) { int i; int j;
               for (i = 0; i < 4; i++) { for (j = 0; j < 4; j++) { b[i][j] = 0; } }
               for (i = 0; i < 4; i++) { c[i] = 0; }
             }",
        )
        .unwrap();
        let sections = enumerate_sections(&ast);
        assert_eq!(sections.len(), 2);
        assert_eq!(sections[0].to_string(), "m#0");
        assert_eq!(sections[1].to_string(), "m#1");
    }

    #[test]
    fn sections_descend_into_regions() {
        let ast = parse_str(
            "void m(void) { int i;
               #pragma omp parallel private(i)
               {
                 #pragma omp for
                 for (i = 0; i < 4; i++) { a[i] = 0; }
                 #pragma omp for nowait
                 for (i = 0; i < 4; i++) { b[i] = a[i]; }
               }
             }",
        )
        .unwrap();
        assert_eq!(enumerate_sections(&ast).len(), 2);
    }

    #[test]
    fn function_with_no_loops_has_no_sections() {
        let ast = parse_str("int g(int x) { return x + 1; }").unwrap();
        assert!(enumerate_sections(&ast).is_empty());
    }

    #[test]
    fn stacked_pragmas_wrap() {
        let ast = roundtrip(
            "void f(void) { int i;
               #pragma omp parallel
               #pragma omp for
               for (i = 0; i < 4; i++) { a[i] = 0; }
             }",
        );
        let f = ast.function("f").unwrap();
        // The parallel directive wraps a synthesized block holding the
        // worksharing loop.
        let StmtKind::Compound(items) = &f.body.kind else { panic!() };
        let region = &items[1];
        assert_eq!(region.directive.as_ref().unwrap().kind, DirectiveKind::Parallel);
        let StmtKind::Compound(inner) = &region.kind else { panic!() };
        assert_eq!(inner[0].directive.as_ref().unwrap().kind, DirectiveKind::For);
    }

    #[test]
    fn threadprivate_round_trip() {
        let ast = roundtrip(
            "static double x[100];\n#pragma omp threadprivate(x)\nvoid f(void) { x[0] = 1.0; }",
        );
        assert_eq!(ast.threadprivate_vars(), vec!["x"]);
    }

    #[test]
    fn threadprivate_requires_file_scope_var() {
        let err = parse_str("#pragma omp threadprivate(y)\nvoid f(void) { }").unwrap_err();
        assert!(err.to_string().contains("file-scope"));
    }

    #[test]
    fn float_literals_survive() {
        let ast = roundtrip("void f(void) { t = 1e99; u = 0.25; v = -2.0; }");
        let _ = ast;
    }

    #[test]
    fn descending_loop() {
        let ast = roundtrip("void f(void) { int i; for (i = 7; i > 0; i--) a[i] = a[i]; }");
        let f = ast.function("f").unwrap();
        let fl = function_nests(f)[0].as_for().unwrap();
        assert_eq!(fl.header.stride, -1);
        assert_eq!(fl.header.direction(), LoopDirection::Descending);
    }

    #[test]
    fn noncanonical_when_index_written() {
        let ast =
            parse_str("void f(void) { int i; for (i = 0; i < 8; i++) { i = i + 1; } }").unwrap();
        let f = ast.function("f").unwrap();
        assert!(!function_nests(f)[0].as_for().unwrap().header.canonical);
    }

    #[test]
    fn noncanonical_when_bound_written() {
        let ast =
            parse_str("void f(void) { int i; int n; for (i = 0; i < n; i++) { n = n - 1; } }")
                .unwrap();
        let f = ast.function("f").unwrap();
        assert!(!function_nests(f)[0].as_for().unwrap().header.canonical);
    }
}
