//! Transitive side-effect summaries over the unit's call graph, seeded by a
//! configurable allowlist of known-pure external functions.

use std::collections::{BTreeMap, BTreeSet};

use crate::frontend::ast::{Ast, ExprKind, FunctionDef, Storage};
use crate::frontend::Span;

use super::accesses::{AccessDescriptor, AccessMode};
use super::affine::Subscript;

/// External routines with observable input/output effects. Calling one
/// forbids parallelizing any enclosing loop.
pub const IO_FUNCTIONS: &[&str] = &[
    "printf", "fprintf", "scanf", "puts", "putchar", "getchar", "fopen", "fclose", "fread",
    "fwrite", "exit", "print_val", "print_int", "timer_start", "timer_stop", "timer_read",
];

/// Known-pure external functions; mirrors a default list of side-effect-free
/// math routines and can be extended through the config file.
pub const DEFAULT_PURE_FUNCTIONS: &[&str] = &[
    "sqrt", "fabs", "pow", "exp", "log", "log2", "sin", "cos", "tan", "atan", "atan2", "fmin",
    "fmax", "floor", "ceil", "abs",
];

#[derive(Debug, Clone)]
pub struct AnalysisConfig {
    pub pure_functions: BTreeSet<String>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            pure_functions: DEFAULT_PURE_FUNCTIONS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl AnalysisConfig {
    /// Parses line-oriented `key = value` text. `pure_functions` extends the
    /// default allowlist with a comma-separated name list.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = AnalysisConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            match key.trim() {
                "pure_functions" => {
                    for name in value.split(',') {
                        let name = name.trim();
                        if !name.is_empty() {
                            cfg.pure_functions.insert(name.to_string());
                        }
                    }
                }
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SideEffectClass {
    Pure,
    WritesParams(BTreeSet<usize>),
    WritesGlobals(BTreeSet<String>),
    Io,
    Unknown,
}

#[derive(Debug, Clone)]
pub struct SideEffectSummary {
    pub function: String,
    pub classification: SideEffectClass,
    pub writes_params: BTreeSet<usize>,
    pub writes_globals: BTreeSet<String>,
    pub reads_globals: BTreeSet<String>,
}

impl SideEffectSummary {
    pub fn forbids_parallelization(&self) -> bool {
        matches!(self.classification, SideEffectClass::Io | SideEffectClass::Unknown)
    }

    fn external(function: &str, classification: SideEffectClass) -> Self {
        SideEffectSummary {
            function: function.to_string(),
            classification,
            writes_params: BTreeSet::new(),
            writes_globals: BTreeSet::new(),
            reads_globals: BTreeSet::new(),
        }
    }
}

/// Caller -> callee edges among function names mentioned in the unit.
#[derive(Debug, Clone, Default)]
pub struct CallGraph {
    pub calls: BTreeMap<String, BTreeSet<String>>,
}

pub fn build_call_graph(ast: &Ast) -> CallGraph {
    let mut graph = CallGraph::default();
    for f in ast.functions() {
        let entry = graph.calls.entry(f.name.clone()).or_default();
        f.body.walk_exprs(&mut |e| {
            if let ExprKind::Call { callee, .. } = &e.kind {
                entry.insert(callee.clone());
            }
        });
    }
    graph
}

impl CallGraph {
    /// Is `name` on a cycle (including self-recursion)?
    pub fn on_cycle(&self, name: &str) -> bool {
        let mut stack = vec![name];
        let mut seen = BTreeSet::new();
        while let Some(current) = stack.pop() {
            if let Some(callees) = self.calls.get(current) {
                for callee in callees {
                    if callee == name {
                        return true;
                    }
                    if seen.insert(callee.as_str()) {
                        stack.push(callee);
                    }
                }
            }
        }
        false
    }
}

/// Summaries for every function in the unit plus lazily classified externals.
pub struct SideEffectTable {
    summaries: BTreeMap<String, SideEffectSummary>,
    pure_external: BTreeSet<String>,
    /// Array-typed globals, for shaping synthetic write descriptors.
    global_arrays: BTreeSet<String>,
}

impl SideEffectTable {
    pub fn build(ast: &Ast, config: &AnalysisConfig) -> SideEffectTable {
        let graph = build_call_graph(ast);
        let mut table = SideEffectTable {
            summaries: BTreeMap::new(),
            pure_external: config.pure_functions.clone(),
            global_arrays: ast
                .items
                .iter()
                .filter_map(|i| match i {
                    crate::frontend::ast::Item::Global(d) if d.ty.is_array() => {
                        Some(d.name.clone())
                    }
                    _ => None,
                })
                .collect(),
        };
        let names: Vec<String> = ast.functions().map(|f| f.name.clone()).collect();
        for name in names {
            table.classify_function(ast, &graph, &name);
        }
        table
    }

    pub fn summary(&self, name: &str) -> SideEffectSummary {
        if let Some(s) = self.summaries.get(name) {
            return s.clone();
        }
        SideEffectSummary::external(name, self.classify_external(name))
    }

    fn classify_external(&self, name: &str) -> SideEffectClass {
        if IO_FUNCTIONS.contains(&name) {
            SideEffectClass::Io
        } else if self.pure_external.contains(name) {
            SideEffectClass::Pure
        } else {
            SideEffectClass::Unknown
        }
    }

    fn classify_function(&mut self, ast: &Ast, graph: &CallGraph, name: &str) {
        if self.summaries.contains_key(name) {
            return;
        }
        let Some(f) = ast.function(name) else { return };
        if graph.on_cycle(name) {
            self.summaries.insert(
                name.to_string(),
                SideEffectSummary::external(name, SideEffectClass::Unknown),
            );
            return;
        }
        // Acyclic: classify callees first.
        let callees: Vec<String> =
            graph.calls.get(name).map(|s| s.iter().cloned().collect()).unwrap_or_default();
        for callee in &callees {
            if ast.function(callee).is_some() && callee != name {
                self.classify_function(ast, graph, callee);
            }
        }
        let summary = summarize_body(ast, f, self);
        self.summaries.insert(name.to_string(), summary);
    }

    /// Synthetic write descriptors for one call site, per the callee summary:
    /// array arguments the callee writes and globals it writes, all with
    /// opaque subscripts.
    pub fn call_write_effects(
        &self,
        callee: &str,
        args: &[crate::frontend::ast::Expr],
        site: Span,
    ) -> Vec<AccessDescriptor> {
        let summary = self.summary(callee);
        let mut out = Vec::new();
        for idx in &summary.writes_params {
            if let Some(arg) = args.get(*idx) {
                if let ExprKind::Var(n) = &arg.kind {
                    out.push(AccessDescriptor {
                        base: n.clone(),
                        subscripts: vec![Subscript::Opaque { indirect: false, span: site }],
                        mode: AccessMode::Write,
                        site,
                    });
                }
            }
        }
        for g in &summary.writes_globals {
            let subscripts = if self.global_arrays.contains(g) {
                vec![Subscript::Opaque { indirect: false, span: site }]
            } else {
                Vec::new()
            };
            out.push(AccessDescriptor { base: g.clone(), subscripts, mode: AccessMode::Write, site });
        }
        out
    }
}

fn summarize_body(ast: &Ast, f: &FunctionDef, table: &SideEffectTable) -> SideEffectSummary {
    let param_index: BTreeMap<&str, (usize, bool)> = f
        .params
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.as_str(), (i, p.ty.is_array())))
        .collect();
    let mut locals: BTreeSet<String> = BTreeSet::new();
    let mut local_statics: BTreeSet<String> = BTreeSet::new();
    f.body.walk(&mut |s| {
        if let crate::frontend::ast::StmtKind::Decl(d) = &s.kind {
            if d.storage == Storage::Static {
                local_statics.insert(d.name.clone());
            } else {
                locals.insert(d.name.clone());
            }
        }
        if let crate::frontend::ast::StmtKind::For(l) = &s.kind {
            locals.insert(l.header.index.clone());
        }
    });

    let mut writes_params: BTreeSet<usize> = BTreeSet::new();
    let mut writes_globals: BTreeSet<String> = BTreeSet::new();
    let mut reads_globals: BTreeSet<String> = BTreeSet::new();
    let mut io = false;
    let mut unknown = false;

    let is_global_name = |n: &str| -> bool {
        !locals.contains(n)
            && !param_index.contains_key(n)
            && (local_statics.contains(n) || ast.global_decl(n).is_some())
    };

    f.body.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Assign { target, .. } => {
            let base = match &target.kind {
                ExprKind::Var(n) => n,
                ExprKind::ArrayRef { base, .. } => base,
                _ => return,
            };
            if let Some((idx, is_array)) = param_index.get(base.as_str()) {
                // Scalar params are by-value; only array params escape.
                if *is_array {
                    writes_params.insert(*idx);
                }
            } else if is_global_name(base) {
                writes_globals.insert(base.clone());
            } else if !locals.contains(base) {
                // Assignment to an undeclared name: treat as a global write.
                writes_globals.insert(base.clone());
            }
        }
        ExprKind::Var(n) => {
            if is_global_name(n) {
                reads_globals.insert(n.clone());
            }
        }
        ExprKind::ArrayRef { base, .. } => {
            if is_global_name(base) {
                reads_globals.insert(base.clone());
            }
        }
        ExprKind::Call { callee, args } => {
            let cs = if ast.function(callee).is_some() {
                table
                    .summaries
                    .get(callee)
                    .cloned()
                    .unwrap_or_else(|| SideEffectSummary::external(callee, SideEffectClass::Unknown))
            } else {
                SideEffectSummary::external(callee, table.classify_external(callee))
            };
            match cs.classification {
                SideEffectClass::Io => io = true,
                SideEffectClass::Unknown => unknown = true,
                _ => {}
            }
            writes_globals.extend(cs.writes_globals.iter().cloned());
            reads_globals.extend(cs.reads_globals.iter().cloned());
            for idx in &cs.writes_params {
                if let Some(arg) = args.get(*idx) {
                    if let ExprKind::Var(n) = &arg.kind {
                        if let Some((our_idx, is_array)) = param_index.get(n.as_str()) {
                            if *is_array {
                                writes_params.insert(*our_idx);
                            }
                        } else if is_global_name(n) || !locals.contains(n) {
                            writes_globals.insert(n.clone());
                        }
                    }
                }
            }
        }
        _ => {}
    });

    let classification = if io {
        SideEffectClass::Io
    } else if unknown {
        SideEffectClass::Unknown
    } else if !writes_globals.is_empty() {
        SideEffectClass::WritesGlobals(writes_globals.clone())
    } else if !writes_params.is_empty() {
        SideEffectClass::WritesParams(writes_params.clone())
    } else if reads_globals.is_empty() {
        SideEffectClass::Pure
    } else {
        // Reads globals but writes nothing observable: not pure in the
        // strict sense, but injects no write effects.
        SideEffectClass::WritesGlobals(BTreeSet::new())
    };
    SideEffectSummary {
        function: f.name.clone(),
        classification,
        writes_params,
        writes_globals,
        reads_globals,
    }
}

/// Transitive side-effect classification of one function.
pub fn side_effects(ast: &Ast, name: &str, config: &AnalysisConfig) -> SideEffectSummary {
    SideEffectTable::build(ast, config).summary(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_str;

    #[test]
    fn pure_function() {
        let ast = parse_str("double f(double x) { double y; y = x * x; return y; }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::Pure);
    }

    #[test]
    fn io_call_classifies_io() {
        let ast = parse_str("void f(double x) { print_val(x); }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::Io);
    }

    #[test]
    fn writes_array_param() {
        let ast =
            parse_str("void fill(double a[], int n) { int i; for (i = 0; i < n; i++) a[i] = 0.0; }")
                .unwrap();
        let s = side_effects(&ast, "fill", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::WritesParams([0].into()));
    }

    #[test]
    fn transitive_param_write() {
        let ast = parse_str(
            "void inner(double b[]) { b[0] = 1.0; }
             void outer(double a[]) { inner(a); }",
        )
        .unwrap();
        let s = side_effects(&ast, "outer", &AnalysisConfig::default());
        assert_eq!(s.writes_params, [0usize].into());
    }

    #[test]
    fn recursion_is_unknown() {
        let ast = parse_str("void f(int n) { if (n > 0) { f(n - 1); } }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::Unknown);
    }

    #[test]
    fn allowlisted_external_is_pure() {
        let ast = parse_str("double f(double x) { return sqrt(x); }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::Pure);
    }

    #[test]
    fn unlisted_external_is_unknown() {
        let ast = parse_str("double f(double x) { return mystery(x); }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::Unknown);
    }

    #[test]
    fn config_extends_allowlist() {
        let cfg = AnalysisConfig::parse("pure_functions = mystery, helper\n").unwrap();
        let ast = parse_str("double f(double x) { return mystery(x); }").unwrap();
        let s = side_effects(&ast, "f", &cfg);
        assert_eq!(s.classification, SideEffectClass::Pure);
    }

    #[test]
    fn global_write_detected() {
        let ast = parse_str("double g; void f(void) { g = 1.0; }").unwrap();
        let s = side_effects(&ast, "f", &AnalysisConfig::default());
        assert_eq!(s.classification, SideEffectClass::WritesGlobals(["g".to_string()].into()));
    }
}
