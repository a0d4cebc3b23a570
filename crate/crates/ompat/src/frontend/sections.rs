//! Loop-nest section naming: adjacent top-level loop nests in each function
//! are numbered from 0 and rendered as `func#a` or `func#a-#b`.

use std::fmt;
use std::str::FromStr;

use super::ast::{Ast, FunctionDef, Stmt, StmtKind};

/// Names a run of adjacent top-level loop nests inside one function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SectionId {
    pub function: String,
    pub first: u32,
    pub last: u32,
}

impl SectionId {
    pub fn single(function: impl Into<String>, ordinal: u32) -> Self {
        SectionId { function: function.into(), first: ordinal, last: ordinal }
    }

    pub fn range(function: impl Into<String>, first: u32, last: u32) -> Self {
        assert!(last >= first, "section range reversed");
        SectionId { function: function.into(), first, last }
    }

    pub fn contains(&self, ordinal: u32) -> bool {
        (self.first..=self.last).contains(&ordinal)
    }
}

impl fmt::Display for SectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first == self.last {
            write!(f, "{}#{}", self.function, self.first)
        } else {
            write!(f, "{}#{}-#{}", self.function, self.first, self.last)
        }
    }
}

impl FromStr for SectionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (function, rest) = s
            .split_once('#')
            .ok_or_else(|| format!("section id `{s}` has no `#`"))?;
        if function.is_empty() {
            return Err(format!("section id `{s}` has an empty function name"));
        }
        let (first, last) = match rest.split_once("-#") {
            Some((a, b)) => (a, b),
            None => (rest, rest),
        };
        let first: u32 = first.parse().map_err(|_| format!("bad ordinal in `{s}`"))?;
        let last: u32 = last.parse().map_err(|_| format!("bad ordinal in `{s}`"))?;
        if last < first {
            return Err(format!("section range `{s}` is reversed"));
        }
        Ok(SectionId { function: function.to_string(), first, last })
    }
}

/// One SectionId per top-level loop nest per function, in source order.
/// Nests inside another loop do not get their own ordinal.
pub fn enumerate_sections(ast: &Ast) -> Vec<SectionId> {
    let mut out = Vec::new();
    for f in ast.functions() {
        for (ordinal, _) in function_nests(f).iter().enumerate() {
            out.push(SectionId::single(&f.name, ordinal as u32));
        }
    }
    out
}

/// The outer statements of the function's top-level loop nests, in source
/// order. Compound statements (including parallel-region bodies) and if
/// branches are descended into; loop bodies are not.
pub fn function_nests(f: &FunctionDef) -> Vec<&Stmt> {
    let mut nests = Vec::new();
    collect_nests(&f.body, &mut nests);
    nests
}

fn collect_nests<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
    match &s.kind {
        StmtKind::For(_) => out.push(s),
        StmtKind::Compound(items) => {
            for item in items {
                collect_nests(item, out);
            }
        }
        StmtKind::If { then_branch, else_branch, .. } => {
            collect_nests(then_branch, out);
            if let Some(e) = else_branch {
                collect_nests(e, out);
            }
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section_id_round_trip() {
        for s in ["main#0", "main#1-#3", "conj_grad#0-#4", "rank#7"] {
            let id: SectionId = s.parse().unwrap();
            assert_eq!(id.to_string(), s);
        }
    }

    #[test]
    fn range_not_collapsed() {
        let id = SectionId::range("f", 2, 2);
        assert_eq!(id.to_string(), "f#2");
    }

    #[test]
    fn rejects_malformed() {
        assert!("main".parse::<SectionId>().is_err());
        assert!("#1".parse::<SectionId>().is_err());
        assert!("f#3-#1".parse::<SectionId>().is_err());
    }
}
