//! The rewrite passes. A run applies the requested passes in a fixed order:
//! inline, parallelize, region, reduction, schedule, condpar, nowait,
//! threadprivate; each later pass consumes structures earlier passes create.

pub mod condpar;
pub mod inline_pass;
pub mod nowait;
pub mod parallelize;
pub mod reduction;
pub mod region;
pub mod schedule;
pub mod threadprivate;

use std::fmt;

use thiserror::Error;

use crate::analysis::side_effects::AnalysisConfig;
use crate::frontend::ast::{Ast, DirectiveKind, Stmt, StmtKind};
use crate::frontend::{function_nests, SectionId, Span};

pub use region::{form_parallel_region, RegionError};
pub use reduction::{lower_array_reduction, ReductionLoweringError};
pub use threadprivate::{convert_threadprivate, ThreadprivateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionStrategy {
    /// Per-thread buffer combined under one critical section.
    Critical,
    /// Privatized buffer, nowait on the main loop, per-element atomic
    /// updates in the combine loop.
    Atomic,
}

impl fmt::Display for ReductionStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionStrategy::Critical => write!(f, "critical"),
            ReductionStrategy::Atomic => write!(f, "atomic"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpDirection {
    ToThreadprivate,
    ToLoopPrivate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    Inline,
    Parallelize,
    Region,
    Reduction(ReductionStrategy),
    Schedule,
    Condpar,
    Nowait,
    Threadprivate(TpDirection),
}

impl Pass {
    fn rank(&self) -> u8 {
        match self {
            Pass::Inline => 0,
            Pass::Parallelize => 1,
            Pass::Region => 2,
            Pass::Reduction(_) => 3,
            Pass::Schedule => 4,
            Pass::Condpar => 5,
            Pass::Nowait => 6,
            Pass::Threadprivate(_) => 7,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Pass::Inline => "inline",
            Pass::Parallelize => "parallelize",
            Pass::Region => "region",
            Pass::Reduction(_) => "reduction",
            Pass::Schedule => "schedule",
            Pass::Condpar => "condpar",
            Pass::Nowait => "nowait",
            Pass::Threadprivate(_) => "threadprivate",
        }
    }
}

#[derive(Debug, Clone, Error)]
pub enum PlanError {
    #[error("unknown pass `{0}`")]
    UnknownPass(String),
    #[error("reduction strategy must be fixed per run")]
    MixedReductionStrategies,
    #[error("threshold must be positive")]
    BadThreshold,
    #[error("unknown option `{0}` for pass `{1}`")]
    BadOption(String, String),
}

/// An ordered set of passes plus per-run parameters. Construction normalizes
/// the order; user-supplied order does not matter.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    pub passes: Vec<Pass>,
    pub threshold: i64,
}

impl TransformPlan {
    pub fn new(mut passes: Vec<Pass>, threshold: i64) -> Result<Self, PlanError> {
        if threshold <= 0 {
            return Err(PlanError::BadThreshold);
        }
        passes.sort_by_key(Pass::rank);
        passes.dedup();
        let strategies: Vec<ReductionStrategy> = passes
            .iter()
            .filter_map(|p| match p {
                Pass::Reduction(s) => Some(*s),
                _ => None,
            })
            .collect();
        if strategies.len() > 1 {
            return Err(PlanError::MixedReductionStrategies);
        }
        Ok(TransformPlan { passes, threshold })
    }

    /// Parses the CLI pass list, e.g.
    /// `inline,parallelize,region,reduction=atomic,schedule,condpar,nowait`.
    pub fn parse(list: &str, threshold: i64) -> Result<Self, PlanError> {
        let mut passes = Vec::new();
        for item in list.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let (name, opt) = match item.split_once('=') {
                Some((n, o)) => (n, Some(o)),
                None => (item, None),
            };
            let pass = match (name, opt) {
                ("inline", None) => Pass::Inline,
                ("parallelize", None) => Pass::Parallelize,
                ("region", None) => Pass::Region,
                ("reduction", None) => Pass::Reduction(ReductionStrategy::Atomic),
                ("reduction", Some("atomic")) => Pass::Reduction(ReductionStrategy::Atomic),
                ("reduction", Some("critical")) => Pass::Reduction(ReductionStrategy::Critical),
                ("schedule", None) => Pass::Schedule,
                ("condpar", None) => Pass::Condpar,
                ("nowait", None) => Pass::Nowait,
                ("threadprivate", None) => Pass::Threadprivate(TpDirection::ToLoopPrivate),
                ("threadprivate", Some("to_loop_private")) => {
                    Pass::Threadprivate(TpDirection::ToLoopPrivate)
                }
                ("threadprivate", Some("to_threadprivate")) => {
                    Pass::Threadprivate(TpDirection::ToThreadprivate)
                }
                (n, Some(o)) => return Err(PlanError::BadOption(o.to_string(), n.to_string())),
                (n, None) => return Err(PlanError::UnknownPass(n.to_string())),
            };
            passes.push(pass);
        }
        TransformPlan::new(passes, threshold)
    }

    /// The whole pipeline with the default reduction strategy and
    /// threadprivate left untouched.
    pub fn full(threshold: i64) -> Self {
        TransformPlan::new(
            vec![
                Pass::Inline,
                Pass::Parallelize,
                Pass::Region,
                Pass::Reduction(ReductionStrategy::Atomic),
                Pass::Schedule,
                Pass::Condpar,
                Pass::Nowait,
            ],
            threshold,
        )
        .unwrap()
    }

    pub fn has(&self, name: &str) -> bool {
        self.passes.iter().any(|p| p.name() == name)
    }
}

/// One change-log or refusal line: `pass<TAB>section<TAB>action<TAB>reason`.
#[derive(Debug, Clone)]
pub struct LogEntry {
    pub pass: &'static str,
    pub section: String,
    pub action: String,
    pub reason: String,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.pass, self.section, self.action, self.reason)
    }
}

#[derive(Debug, Default)]
pub struct PassLog {
    pub log: Vec<LogEntry>,
    pub refusals: Vec<LogEntry>,
}

impl PassLog {
    pub fn action(&mut self, pass: &'static str, section: impl ToString, action: impl ToString) {
        self.log.push(LogEntry {
            pass,
            section: section.to_string(),
            action: action.to_string(),
            reason: String::new(),
        });
    }

    pub fn refuse(
        &mut self,
        pass: &'static str,
        section: impl ToString,
        reason: impl ToString,
    ) {
        self.refusals.push(LogEntry {
            pass,
            section: section.to_string(),
            action: "refused".to_string(),
            reason: reason.to_string(),
        });
    }
}

#[derive(Debug)]
pub struct RewriteResult {
    pub ast: Ast,
    pub log: Vec<LogEntry>,
    pub refusals: Vec<LogEntry>,
}

/// Apply the plan's passes in canonical order.
pub fn run_plan(ast: &Ast, plan: &TransformPlan, config: &AnalysisConfig) -> RewriteResult {
    let mut ast = ast.clone();
    let mut log = PassLog::default();
    for pass in &plan.passes {
        match pass {
            Pass::Inline => inline_pass::run(&mut ast, config, &mut log),
            Pass::Parallelize => parallelize::run(&mut ast, config, plan, &mut log),
            Pass::Region => region::run(&mut ast, &mut log),
            Pass::Reduction(strategy) => reduction::run(&mut ast, *strategy, &mut log),
            Pass::Schedule => schedule::run(&mut ast, config, &mut log),
            Pass::Condpar => condpar::run(&mut ast, plan.threshold, &mut log),
            Pass::Nowait => nowait::run(&mut ast, &mut log),
            Pass::Threadprivate(direction) => {
                threadprivate::run(&mut ast, *direction, &mut log)
            }
        }
    }
    RewriteResult { ast, log: log.log, refusals: log.refusals }
}

/// Strip every OpenMP directive, for serial-elision comparisons. Parallel
/// region braces are an artifact of the directives, so region compounds are
/// spliced back into their parent statement list.
pub fn strip_directives(ast: &Ast) -> Ast {
    let mut out = ast.clone();
    out.items.retain(|i| !matches!(i, crate::frontend::ast::Item::Threadprivate(_)));
    for item in &mut out.items {
        if let crate::frontend::ast::Item::Function(f) = item {
            strip_stmt(&mut f.body);
        }
    }
    out
}

fn strip_stmt(s: &mut Stmt) {
    s.directive = None;
    match &mut s.kind {
        StmtKind::Compound(items) => {
            items.retain(|s| !matches!(s.kind, StmtKind::Standalone));
            let drained: Vec<Stmt> = std::mem::take(items);
            for mut item in drained {
                let was_region = item
                    .directive
                    .as_ref()
                    .is_some_and(|d| d.kind == DirectiveKind::Parallel)
                    && matches!(item.kind, StmtKind::Compound(_));
                strip_stmt(&mut item);
                if was_region {
                    if let StmtKind::Compound(inner) = item.kind {
                        items.extend(inner);
                        continue;
                    }
                }
                items.push(item);
            }
        }
        StmtKind::For(f) => strip_stmt(&mut f.body),
        StmtKind::If { then_branch, else_branch, .. } => {
            strip_stmt(then_branch);
            if let Some(e) = else_branch {
                strip_stmt(e);
            }
        }
        _ => {}
    }
}

/// Section label for the top-level nest containing `span` in `function`,
/// used for change-log lines.
pub fn section_of(ast: &Ast, function: &str, span: Span) -> String {
    if let Some(f) = ast.function(function) {
        for (ordinal, nest) in function_nests(f).iter().enumerate() {
            if nest.span.lo <= span.lo && span.hi <= nest.span.hi {
                return SectionId::single(function, ordinal as u32).to_string();
            }
        }
    }
    function.to_string()
}

/// Is this statement a loop carrying a combined parallel-for directive?
pub(crate) fn is_parallel_for(s: &Stmt) -> bool {
    matches!(s.kind, StmtKind::For(_))
        && s.directive.as_ref().is_some_and(|d| d.kind == DirectiveKind::ParallelFor)
}

/// Is this statement a worksharing for loop?
pub(crate) fn is_worksharing_for(s: &Stmt) -> bool {
    matches!(s.kind, StmtKind::For(_))
        && s.directive.as_ref().is_some_and(|d| d.kind == DirectiveKind::For)
}

/// Every name mentioned anywhere in the unit, for fresh-name generation.
pub(crate) fn all_names(ast: &Ast) -> std::collections::BTreeSet<String> {
    use crate::frontend::ast::{ExprKind, Item};
    let mut names = std::collections::BTreeSet::new();
    for item in &ast.items {
        match item {
            Item::Function(f) => {
                names.insert(f.name.clone());
                for p in &f.params {
                    names.insert(p.name.clone());
                }
                f.body.walk(&mut |s| match &s.kind {
                    StmtKind::Decl(d) => {
                        names.insert(d.name.clone());
                    }
                    StmtKind::For(l) => {
                        names.insert(l.header.index.clone());
                    }
                    _ => {}
                });
                f.body.walk_exprs(&mut |e| match &e.kind {
                    ExprKind::Var(n) => {
                        names.insert(n.clone());
                    }
                    ExprKind::ArrayRef { base, .. } => {
                        names.insert(base.clone());
                    }
                    ExprKind::Call { callee, .. } => {
                        names.insert(callee.clone());
                    }
                    _ => {}
                });
            }
            Item::Global(d) => {
                names.insert(d.name.clone());
            }
            Item::Threadprivate(_) => {}
        }
    }
    names
}

pub(crate) fn fresh_name(
    base: &str,
    taken: &mut std::collections::BTreeSet<String>,
) -> String {
    if !taken.contains(base) {
        taken.insert(base.to_string());
        return base.to_string();
    }
    for i in 2.. {
        let candidate = format!("{base}{i}");
        if !taken.contains(&candidate) {
            taken.insert(candidate.clone());
            return candidate;
        }
    }
    unreachable!()
}
