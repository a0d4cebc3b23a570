//! Source locations and diagnostic rendering.

use std::fmt;

/// Byte range into the source text of one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub lo: u32,
    pub hi: u32,
}

impl Span {
    pub const DUMMY: Span = Span { lo: 0, hi: 0 };

    pub fn new(lo: u32, hi: u32) -> Self {
        Span { lo, hi }
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        Span {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }
}

/// Maps byte offsets to 1-based line/column pairs.
pub struct LineMap {
    line_starts: Vec<u32>,
}

impl LineMap {
    pub fn new(text: &str) -> Self {
        let mut line_starts = vec![0u32];
        for (i, b) in text.bytes().enumerate() {
            if b == b'\n' {
                line_starts.push(i as u32 + 1);
            }
        }
        LineMap { line_starts }
    }

    pub fn line_col(&self, offset: u32) -> (u32, u32) {
        let line = match self.line_starts.binary_search(&offset) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (line as u32 + 1, offset - self.line_starts[line] + 1)
    }
}

/// Where a unit came from, recorded verbatim from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Serial,
    AutoParallelized,
    Manual,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Serial => write!(f, "serial"),
            Origin::AutoParallelized => write!(f, "auto-parallelized"),
            Origin::Manual => write!(f, "manual"),
        }
    }
}

impl std::str::FromStr for Origin {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "serial" => Ok(Origin::Serial),
            "auto-parallelized" | "auto" => Ok(Origin::AutoParallelized),
            "manual" => Ok(Origin::Manual),
            other => Err(format!("unknown origin `{other}`")),
        }
    }
}

/// One input file: an identifier, its full text (assumed already
/// preprocessor-expanded) and the recorded origin.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    pub origin: Origin,
}

impl SourceUnit {
    /// Text must be non-empty.
    pub fn new(
        path: impl Into<String>,
        text: impl Into<String>,
        origin: Origin,
    ) -> Result<Self, String> {
        let text = text.into();
        if text.is_empty() {
            return Err("source text is empty".to_string());
        }
        Ok(SourceUnit {
            path: path.into(),
            text,
            origin,
        })
    }

    pub fn from_file(path: &std::path::Path, origin: Origin) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SourceUnit::new(path.display().to_string(), text, origin)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }

    /// Renders a diagnostic as `file:line:col: message`.
    pub fn render_diagnostic(&self, span: Span, message: &str) -> String {
        let (line, col) = LineMap::new(&self.text).line_col(span.lo);
        format!("{}:{}:{}: {}", self.path, line, col, message)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_col_lookup() {
        let map = LineMap::new("ab\ncd\n\nef");
        assert_eq!(map.line_col(0), (1, 1));
        assert_eq!(map.line_col(1), (1, 2));
        assert_eq!(map.line_col(3), (2, 1));
        assert_eq!(map.line_col(6), (3, 1));
        assert_eq!(map.line_col(7), (4, 1));
    }

    #[test]
    fn empty_text_rejected() {
        assert!(SourceUnit::new("x.c", "", Origin::Serial).is_err());
    }
}
