//! Coded diagnostics with optional source positions.

use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;

/// A 1-based position in a source file.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceSpan {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(file: impl Into<PathBuf>, line: usize, column: usize, length: usize) -> Self {
        SourceSpan {
            file: file.into(),
            line: line.max(1),
            column: column.max(1),
            length: length.max(1),
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file.display(), self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// Every diagnostic code the toolchain emits. Each code has a fixed
/// severity, see [`Code::severity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// Syntax error.
    D0,
    /// Dimension alias normalized.
    D1,
    /// Duplicate declaration (field, category, pattern).
    D2,
    /// Unknown keyword value: dimension, element kind, link kind, strategy.
    D3,
    /// Element shape (missing dimensions).
    D4,
    /// External file could not be loaded.
    D5,
    V1,
    V2,
    V3,
    V4,
    V5,
    V6,
    V7,
    V8,
    P1,
    P2,
    P3,
    C0,
    C1,
    /// Catalogue structure (cycle length, center placement, unknown category).
    C2,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::D0 => "D0",
            Code::D1 => "D1",
            Code::D2 => "D2",
            Code::D3 => "D3",
            Code::D4 => "D4",
            Code::D5 => "D5",
            Code::V1 => "V1",
            Code::V2 => "V2",
            Code::V3 => "V3",
            Code::V4 => "V4",
            Code::V5 => "V5",
            Code::V6 => "V6",
            Code::V7 => "V7",
            Code::V8 => "V8",
            Code::P1 => "P1",
            Code::P2 => "P2",
            Code::P3 => "P3",
            Code::C0 => "C0",
            Code::C1 => "C1",
            Code::C2 => "C2",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Code::D1 | Code::V6 | Code::V7 | Code::V8 | Code::P3 | Code::C1 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Option<SourceSpan>,
}

impl Diagnostic {
    pub fn new(code: Code, message: impl Into<String>, span: Option<SourceSpan>) -> Self {
        Diagnostic {
            severity: code.severity(),
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    /// `file:line:col: [code] message`
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.span {
            write!(f, "{span}: ")?;
        }
        write!(f, "[{}] {}", self.code, self.message)
    }
}

impl Ord for Diagnostic {
    /// Diagnostics order by code, then span (unpositioned last), then message.
    fn cmp(&self, other: &Self) -> Ordering {
        let span_key = |d: &Diagnostic| d.span.clone().map_or((1, None), |s| (0, Some(s)));
        self.code
            .cmp(&other.code)
            .then_with(|| span_key(self).cmp(&span_key(other)))
            .then_with(|| self.message.cmp(&other.message))
    }
}

impl PartialOrd for Diagnostic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

/// Sorts and de-duplicates a diagnostic list in place.
pub fn normalize(diagnostics: &mut Vec<Diagnostic>) {
    diagnostics.sort();
    diagnostics.dedup();
}
