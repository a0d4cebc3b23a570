//! Per-section pattern profiles and version diffing.
//!
//! The nine columns of a profile count, per section: nests parallelized at
//! the outermost loop (P1), parallelized loops containing calls (P2),
//! worksharing loops inside parallel regions (P3), dynamic/guided scheduling
//! (P4, flag), indirect accesses inside parallelized loops (P5, flag),
//! threadprivate data accesses (P6, flag), array reductions (P7, flag),
//! nowait clauses (P8) and ingested hand-modification annotations (P9).

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::analysis::accesses::collect_accesses;
use crate::analysis::reductions::recognize_reductions;
use crate::frontend::ast::*;
use crate::frontend::{function_nests, SectionId};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternCounts {
    pub p1: u32,
    pub p2: u32,
    pub p3: u32,
    pub p4: u32,
    pub p5: u32,
    pub p6: u32,
    pub p7: u32,
    pub p8: u32,
    pub p9: u32,
}

impl PatternCounts {
    pub fn as_array(&self) -> [u32; 9] {
        [self.p1, self.p2, self.p3, self.p4, self.p5, self.p6, self.p7, self.p8, self.p9]
    }

    pub fn is_zero(&self) -> bool {
        self.as_array().iter().all(|v| *v == 0)
    }

    fn add(&mut self, other: &PatternCounts) {
        let mut a = self.as_array();
        for (x, y) in a.iter_mut().zip(other.as_array()) {
            *x += y;
        }
        [self.p1, self.p2, self.p3, self.p4, self.p5, self.p6, self.p7, self.p8, self.p9] = a;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternProfile {
    pub section: SectionId,
    pub counts: PatternCounts,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PatternError {
    #[error("unknown section `{0}`")]
    UnknownSection(String),
    #[error("the two versions share no function names")]
    MismatchedPrograms,
}

/// Annotation sidecar: one `function#a-#b p9=0|1` line per section of
/// interest. The named ranges also drive report grouping.
#[derive(Debug, Clone, Default)]
pub struct Annotations {
    pub entries: Vec<(SectionId, bool)>,
}

impl Annotations {
    pub fn parse(text: &str) -> Result<Annotations, String> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let mut parts = line.split_whitespace();
            let section: SectionId = parts
                .next()
                .ok_or_else(|| format!("line {}: missing section id", lineno + 1))?
                .parse()
                .map_err(|e| format!("line {}: {e}", lineno + 1))?;
            let p9 = match parts.next() {
                None => false,
                Some(kv) => match kv.split_once('=') {
                    Some(("p9", v)) => v.trim() == "1",
                    _ => return Err(format!("line {}: expected p9=0|1", lineno + 1)),
                },
            };
            entries.push((section, p9));
        }
        Ok(Annotations { entries })
    }

    pub fn load(path: &std::path::Path) -> Result<Annotations, String> {
        let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        Annotations::parse(&text)
    }

    pub fn p9(&self, section: &SectionId) -> bool {
        self.entries.iter().any(|(s, p9)| s == section && *p9)
    }

    /// Annotated sections of one function, in order of first ordinal.
    pub fn sections_for(&self, function: &str) -> Vec<SectionId> {
        let mut out: Vec<SectionId> = self
            .entries
            .iter()
            .map(|(s, _)| s.clone())
            .filter(|s| s.function == function)
            .collect();
        out.sort();
        out
    }
}

/// Per-nest profile context: walks a function body tracking whether each
/// top-level nest sits inside a parallel region.
struct NestView<'a> {
    stmt: &'a Stmt,
    in_region: bool,
}

fn nest_views(f: &FunctionDef) -> Vec<NestView<'_>> {
    let mut out = Vec::new();
    collect(&f.body, false, &mut out);
    fn collect<'a>(s: &'a Stmt, in_region: bool, out: &mut Vec<NestView<'a>>) {
        let in_region =
            in_region || s.directive.as_ref().is_some_and(|d| d.kind == DirectiveKind::Parallel);
        match &s.kind {
            StmtKind::For(_) => out.push(NestView { stmt: s, in_region }),
            StmtKind::Compound(items) => {
                for item in items {
                    collect(item, in_region, out);
                }
            }
            StmtKind::If { then_branch, else_branch, .. } => {
                collect(then_branch, in_region, out);
                if let Some(e) = else_branch {
                    collect(e, in_region, out);
                }
            }
            _ => {}
        }
    }
    out
}

/// Loops in a nest that run under a worksharing or combined directive,
/// together with their directives.
fn parallelized_loops<'a>(
    nest: &'a Stmt,
    nest_in_region: bool,
) -> Vec<(&'a ForLoop, &'a OmpDirective)> {
    let mut out = Vec::new();
    nest.walk(&mut |s| {
        if let (StmtKind::For(f), Some(d)) = (&s.kind, &s.directive) {
            match d.kind {
                DirectiveKind::ParallelFor => out.push((f, d)),
                DirectiveKind::For if nest_in_region => out.push((f, d)),
                _ => {}
            }
        }
    });
    out
}

fn nest_counts(view: &NestView, threadprivate: &BTreeSet<&str>) -> PatternCounts {
    let mut c = PatternCounts::default();
    let nest = view.stmt;

    // P1: the nest's outermost loop carries a combined parallel-for, or is a
    // worksharing for directly inside a region. Inner parallelized loops
    // contribute to P3 only.
    if let Some(d) = &nest.directive {
        match d.kind {
            DirectiveKind::ParallelFor => c.p1 = 1,
            DirectiveKind::For if view.in_region => c.p1 = 1,
            _ => {}
        }
    }

    let ploops = parallelized_loops(nest, view.in_region);
    for (loop_, d) in &ploops {
        // P3 counts worksharing loops inside regions; combined constructs
        // spawn their own team and are counted by P1 instead.
        if d.kind == DirectiveKind::For {
            c.p3 += 1;
        }
        // P2: parallelized loops containing call sites; allowlisted pure
        // functions still count as calls.
        let mut has_call = false;
        loop_.body.walk_exprs(&mut |e| {
            if matches!(e.kind, ExprKind::Call { .. }) {
                has_call = true;
            }
        });
        if has_call {
            c.p2 += 1;
        }
        // P5: any opaque (indirect) access inside a parallelized loop.
        if collect_accesses(loop_).iter().any(|a| a.has_opaque()) {
            c.p5 = 1;
        }
        // P7: any array reduction pattern in a parallelized loop.
        if loop_.header.canonical
            && recognize_reductions(loop_).iter().any(|r| r.is_array())
        {
            c.p7 = 1;
        }
    }

    // P4 and P8 read directives anywhere in the nest.
    nest.walk(&mut |s| {
        if let Some(d) = &s.directive {
            if d.clauses.has_dynamic_or_guided() {
                c.p4 = 1;
            }
            if d.clauses.nowait {
                c.p8 += 1;
            }
        }
    });

    // P6: any threadprivate variable accessed in the nest.
    nest.walk_exprs(&mut |e| match &e.kind {
        ExprKind::Var(n) if threadprivate.contains(n.as_str()) => c.p6 = 1,
        ExprKind::ArrayRef { base, .. } if threadprivate.contains(base.as_str()) => c.p6 = 1,
        _ => {}
    });
    c
}

/// Pattern profile of one section; annotations supply P9.
pub fn profile_section(
    ast: &Ast,
    section: &SectionId,
    annotations: &Annotations,
) -> Result<PatternProfile, PatternError> {
    let f = ast
        .function(&section.function)
        .ok_or_else(|| PatternError::UnknownSection(section.to_string()))?;
    let views = nest_views(f);
    if section.last as usize >= views.len() {
        return Err(PatternError::UnknownSection(section.to_string()));
    }
    let threadprivate: BTreeSet<&str> = ast.threadprivate_vars().into_iter().collect();
    let mut counts = PatternCounts::default();
    for view in &views[section.first as usize..=section.last as usize] {
        let nc = nest_counts(view, &threadprivate);
        counts.add(&nc);
    }
    // Flags saturate at section level; program rows sum them across sections.
    for flag in [&mut counts.p4, &mut counts.p5, &mut counts.p6, &mut counts.p7] {
        *flag = (*flag).min(1);
    }
    counts.p9 = annotations.p9(section) as u32;
    Ok(PatternProfile { section: section.clone(), counts })
}

/// Sections covering every nest of the unit: annotated ranges where given,
/// singletons elsewhere.
pub fn unit_sections(ast: &Ast, annotations: &Annotations) -> Vec<SectionId> {
    let mut out = Vec::new();
    for f in ast.functions() {
        let n = function_nests(f).len() as u32;
        let ranges = annotations.sections_for(&f.name);
        let mut covered: Vec<bool> = vec![false; n as usize];
        for r in &ranges {
            if r.last < n {
                for k in r.first..=r.last {
                    covered[k as usize] = true;
                }
            }
        }
        let mut all: Vec<SectionId> = ranges.into_iter().filter(|r| r.last < n).collect();
        for k in 0..n {
            if !covered[k as usize] {
                all.push(SectionId::single(&f.name, k));
            }
        }
        all.sort();
        out.extend(all);
    }
    out
}

/// Program row: component-wise sum over all of the unit's sections
/// (annotated ranges plus singletons for uncovered nests). Flags saturate
/// per section and sum across sections, matching per-application rows that
/// exceed one when several sections exhibit a flag pattern.
pub fn profile_program(ast: &Ast, annotations: &Annotations) -> PatternProfile {
    let mut counts = PatternCounts::default();
    for section in unit_sections(ast, annotations) {
        if let Ok(p) = profile_section(ast, &section, annotations) {
            counts.add(&p.counts);
        }
    }
    PatternProfile {
        section: SectionId { function: "program".to_string(), first: 0, last: 0 },
        counts,
    }
}

#[derive(Debug, Clone)]
pub struct DiffRow {
    pub section: SectionId,
    pub auto: Option<PatternCounts>,
    pub manual: Option<PatternCounts>,
    /// manual minus auto, component-wise.
    pub delta: [i64; 9],
    pub timing: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Default)]
pub struct DiffReport {
    pub rows: Vec<DiffRow>,
}

/// Align sections of two versions of the same program and report per-pattern
/// deltas; all-zero rows with no timing data are suppressed.
pub fn compare_versions(
    auto: &Ast,
    manual: &Ast,
    annotations: &Annotations,
) -> Result<DiffReport, PatternError> {
    let auto_fns: BTreeSet<String> = auto.functions().map(|f| f.name.clone()).collect();
    let manual_fns: BTreeSet<String> = manual.functions().map(|f| f.name.clone()).collect();
    if auto_fns.intersection(&manual_fns).next().is_none() {
        return Err(PatternError::MismatchedPrograms);
    }
    let mut sections: BTreeMap<SectionId, (Option<PatternCounts>, Option<PatternCounts>)> =
        BTreeMap::new();
    for s in unit_sections(auto, annotations) {
        let p = profile_section(auto, &s, annotations).expect("enumerated section");
        sections.entry(s).or_default().0 = Some(p.counts);
    }
    for s in unit_sections(manual, annotations) {
        let p = profile_section(manual, &s, annotations).expect("enumerated section");
        sections.entry(s).or_default().1 = Some(p.counts);
    }
    let mut rows = Vec::new();
    for (section, (auto_counts, manual_counts)) in sections {
        let a = auto_counts.clone().unwrap_or_default().as_array();
        let m = manual_counts.clone().unwrap_or_default().as_array();
        let mut delta = [0i64; 9];
        for k in 0..9 {
            delta[k] = m[k] as i64 - a[k] as i64;
        }
        let missing_somewhere = auto_counts.is_none() || manual_counts.is_none();
        if delta.iter().all(|d| *d == 0) && !missing_somewhere {
            continue;
        }
        rows.push(DiffRow { section, auto: auto_counts, manual: manual_counts, delta, timing: None });
    }
    Ok(DiffReport { rows })
}
