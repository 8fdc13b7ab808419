//! Text syntax for models (`.susm`), patterns (`.susp`), catalogues
//! (`.susc`) and instantiation bindings.
//!
//! ```text
//! model "Care" {
//!   value Access dims [social] "Fair access to care"
//!   goal Ensure dims [social] "Ensure care access"
//!   activity Monitor dims [social] "Monitor spread" tagged
//!
//!   link refines(Ensure -> Access)
//!   link contributes(Monitor -> Ensure)
//!
//!   fragment Watch at Access {
//!     elements [Ensure, Monitor]
//!   }
//! }
//! ```

mod lexer;
mod parser;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalogue::Catalogue;
use crate::diagnostic::Diagnostic;
use crate::model::Model;
use crate::patterns::{Binding, PatternDoc};

pub use lexer::is_identifier;
pub use serialize::{
    quote, serialize_catalogue, serialize_element, serialize_link, serialize_model, serialize_model_inline,
    serialize_pattern,
};

/// A successfully parsed value together with any warnings.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<Diagnostic>,
}

/// On failure every collected diagnostic is returned, errors and warnings.
pub type ParseResult<T> = Result<Parsed<T>, Vec<Diagnostic>>;

/// Resolves paths written inside documents (`from`, `include`).
pub trait SourceLoader {
    /// Loads `path` as written in the document `from`. Returns the resolved
    /// path and its text.
    fn load(&self, from: Option<&Path>, path: &str) -> Result<(PathBuf, String), String>;
}

fn resolve(from: Option<&Path>, path: &str) -> PathBuf {
    let base = from.and_then(Path::parent).unwrap_or(Path::new(""));
    base.join(path)
}

/// Reads relative paths from disk next to the referring file.
#[derive(Debug, Clone, Copy, Default)]
pub struct FsLoader;

impl SourceLoader for FsLoader {
    fn load(&self, from: Option<&Path>, path: &str) -> Result<(PathBuf, String), String> {
        let resolved = resolve(from, path);
        std::fs::read_to_string(&resolved)
            .map(|text| (resolved.clone(), text))
            .map_err(|e| format!("{}: {e}", resolved.display()))
    }
}

/// In-memory file set, resolved like [`FsLoader`].
#[derive(Debug, Clone, Default)]
pub struct MemoryLoader {
    pub files: BTreeMap<PathBuf, String>,
}

impl MemoryLoader {
    pub fn with(mut self, path: impl Into<PathBuf>, text: impl Into<String>) -> Self {
        self.files.insert(path.into(), text.into());
        self
    }
}

impl SourceLoader for MemoryLoader {
    fn load(&self, from: Option<&Path>, path: &str) -> Result<(PathBuf, String), String> {
        let resolved = resolve(from, path);
        self.files
            .get(&resolved)
            .map(|text| (resolved.clone(), text.clone()))
            .ok_or_else(|| format!("{}: no such file", resolved.display()))
    }
}

const INLINE: &str = "<input>";

pub fn parse_model(text: &str) -> ParseResult<Model> {
    parser::parse_model_source(text, Path::new(INLINE), None)
}

pub fn parse_model_with(text: &str, file: &Path, loader: &dyn SourceLoader) -> ParseResult<Model> {
    parser::parse_model_source(text, file, Some(loader))
}

pub fn parse_pattern(text: &str) -> ParseResult<PatternDoc> {
    parser::parse_pattern_source(text, Path::new(INLINE), None)
}

pub fn parse_pattern_with(text: &str, file: &Path, loader: &dyn SourceLoader) -> ParseResult<PatternDoc> {
    parser::parse_pattern_source(text, file, Some(loader))
}

pub fn parse_catalogue(text: &str) -> ParseResult<Catalogue> {
    parser::parse_catalogue_source(text, Path::new(INLINE), None)
}

pub fn parse_catalogue_with(text: &str, file: &Path, loader: &dyn SourceLoader) -> ParseResult<Catalogue> {
    parser::parse_catalogue_source(text, file, Some(loader))
}

/// Parses a binding file: one `Role = existing:<id>` or
/// `Role = fresh:"<label>" kind=<kind> [dims=[..]] [tagged]` per role.
pub fn parse_binding(text: &str, file: &Path) -> ParseResult<Binding> {
    parser::parse_binding_source(text, file)
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}", render(.0))]
    Invalid(Vec<Diagnostic>),
}

fn render(diags: &[Diagnostic]) -> String {
    diags.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
}

impl LoadError {
    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            LoadError::Invalid(d) => d,
            LoadError::Io { .. } => &[],
        }
    }
}

fn read(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_model(path: &Path) -> Result<Parsed<Model>, LoadError> {
    parse_model_with(&read(path)?, path, &FsLoader).map_err(LoadError::Invalid)
}

pub fn load_pattern(path: &Path) -> Result<Parsed<PatternDoc>, LoadError> {
    parse_pattern_with(&read(path)?, path, &FsLoader).map_err(LoadError::Invalid)
}

pub fn load_catalogue(path: &Path) -> Result<Parsed<Catalogue>, LoadError> {
    parse_catalogue_with(&read(path)?, path, &FsLoader).map_err(LoadError::Invalid)
}

pub fn load_binding(path: &Path) -> Result<Parsed<Binding>, LoadError> {
    parse_binding(&read(path)?, path).map_err(LoadError::Invalid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    Model,
    Pattern,
    Catalogue,
}

impl DocumentKind {
    /// By extension: `.susm`, `.susp`, `.susc`.
    pub fn of(path: &Path) -> Option<DocumentKind> {
        match path.extension()?.to_str()? {
            "susm" => Some(DocumentKind::Model),
            "susp" => Some(DocumentKind::Pattern),
            "susc" => Some(DocumentKind::Catalogue),
            _ => None,
        }
    }
}

impl fmt::Display for DocumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DocumentKind::Model => "model",
            DocumentKind::Pattern => "pattern",
            DocumentKind::Catalogue => "catalogue",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Document {
    Model(Model),
    Pattern(PatternDoc),
    Catalogue(Catalogue),
}

impl Document {
    pub fn kind(&self) -> DocumentKind {
        match self {
            Document::Model(_) => DocumentKind::Model,
            Document::Pattern(_) => DocumentKind::Pattern,
            Document::Catalogue(_) => DocumentKind::Catalogue,
        }
    }

    pub fn serialize(&self) -> String {
        match self {
            Document::Model(m) => serialize_model(m),
            Document::Pattern(p) => serialize_pattern(p),
            Document::Catalogue(c) => serialize_catalogue(c),
        }
    }
}

pub fn parse_document(kind: DocumentKind, text: &str, file: &Path, loader: &dyn SourceLoader) -> ParseResult<Document> {
    fn wrap<T>(r: ParseResult<T>, f: impl FnOnce(T) -> Document) -> ParseResult<Document> {
        r.map(|p| Parsed {
            value: f(p.value),
            warnings: p.warnings,
        })
    }
    match kind {
        DocumentKind::Model => wrap(parse_model_with(text, file, loader), Document::Model),
        DocumentKind::Pattern => wrap(parse_pattern_with(text, file, loader), Document::Pattern),
        DocumentKind::Catalogue => wrap(parse_catalogue_with(text, file, loader), Document::Catalogue),
    }
}

/// Loads a document, choosing the grammar by file extension. Files with an
/// unknown extension are read as models.
pub fn load_document(path: &Path) -> Result<Parsed<Document>, LoadError> {
    let kind = DocumentKind::of(path).unwrap_or(DocumentKind::Model);
    parse_document(kind, &read(path)?, path, &FsLoader).map_err(LoadError::Invalid)
}
