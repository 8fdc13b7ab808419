//! The bundled corpus: a manifest of DSL files with their expected shape,
//! and a checker that loads, validates and counts each entry.
//!
//! Manifest lines are whitespace separated:
//!
//! ```text
//! // path                       kind       provenance  expectations
//! covid/covid.susm              model      documented elements=29 anticipation=2
//! fairness/fairness.susc        catalogue  documented patterns=12 named=4
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::catalogue::Catalogue;
use crate::diagnostic::{Code, Diagnostic};
use crate::dsl::{self, Document, DocumentKind};
use crate::model::{LinkKind, Model, Strategy};
use crate::patterns::PatternDoc;
use crate::validator::{validate_model, validate_pattern};

pub const MANIFEST: &str = "manifest";

/// Marks patterns whose content is a placeholder rather than a documented
/// pattern.
pub const STUB: &str = "reconstructed-stub";
pub const NAMED: &str = "documented";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub kind: DocumentKind,
    pub provenance: String,
    pub expect: BTreeMap<String, String>,
    pub line: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("manifest line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl CorpusManifest {
    pub fn parse(text: &str) -> Result<Self, ManifestError> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split("//").next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ManifestError::Syntax { line, message };
            let mut cols = content.split_whitespace();
            let path = cols.next().ok_or_else(|| err("missing path".into()))?;
            let kind = match cols.next() {
                Some("model") => DocumentKind::Model,
                Some("pattern") => DocumentKind::Pattern,
                Some("catalogue") => DocumentKind::Catalogue,
                other => return Err(err(format!("expected model, pattern or catalogue, found {other:?}"))),
            };
            let provenance = match cols.next() {
                Some(p @ (NAMED | STUB)) => p.to_string(),
                other => return Err(err(format!("expected {NAMED} or {STUB}, found {other:?}"))),
            };
            let mut expect = BTreeMap::new();
            for col in cols {
                let (key, value) = col
                    .split_once('=')
                    .ok_or_else(|| err(format!("expected key=value, found `{col}`")))?;
                if expect.insert(key.to_string(), value.to_string()).is_some() {
                    return Err(err(format!("expectation `{key}` given twice")));
                }
            }
            entries.push(ManifestEntry {
                path: PathBuf::from(path),
                kind,
                provenance,
                expect,
                line,
            });
        }
        Ok(CorpusManifest { entries })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryReport {
    pub path: PathBuf,
    pub kind: DocumentKind,
    pub failures: Vec<String>,
    /// Measured values, by expectation key.
    pub observed: BTreeMap<String, String>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusReport {
    pub entries: Vec<EntryReport>,
    /// Failures not tied to one entry, such as unlisted files.
    pub problems: Vec<String>,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.problems.is_empty() && self.entries.iter().all(EntryReport::passed)
    }

    pub fn entry(&self, path: &str) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.path == Path::new(path))
    }
}

impl fmt::Display for CorpusReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for entry in &self.entries {
            let status = if entry.passed() { "ok  " } else { "FAIL" };
            writeln!(f, "{status} {} ({})", entry.path.display(), entry.kind)?;
            for failure in &entry.failures {
                writeln!(f, "     {failure}")?;
            }
        }
        for problem in &self.problems {
            writeln!(f, "FAIL {problem}")?;
        }
        let failed = self.entries.iter().filter(|e| !e.passed()).count() + self.problems.len();
        write!(f, "{} entries, {failed} failure(s)", self.entries.len())
    }
}

fn model_stats(model: &Model) -> BTreeMap<String, String> {
    let count = |n: usize| n.to_string();
    let mut out = BTreeMap::new();
    out.insert("elements".into(), count(model.elements.len()));
    out.insert("links".into(), count(model.links.len()));
    out.insert("fragments".into(), count(model.fragments.len()));
    out.insert("tagged".into(), count(model.elements.values().filter(|e| e.is_tagged).count()));
    out.insert(
        "obstacles".into(),
        count(
            model
                .elements
                .values()
                .filter(|e| e.kind == crate::model::ElementKind::Obstacle)
                .count(),
        ),
    );
    out.insert(
        "anticipation".into(),
        count(
            model
                .links
                .values()
                .filter(|l| l.kind == LinkKind::Mitigates && l.strategy == Some(Strategy::Anticipation))
                .count(),
        ),
    );
    out
}

fn pattern_stats(pattern: &PatternDoc) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("roles".into(), pattern.archetype.roles.len().to_string());
    out.insert("related".into(), pattern.related.len().to_string());
    out.insert("primary".into(), pattern.category_primary.clone());
    out.insert(
        "secondary".into(),
        pattern.category_secondary.clone().unwrap_or_else(|| "-".into()),
    );
    out.insert("elements".into(), pattern.archetype.body.elements.len().to_string());
    out.insert("links".into(), pattern.archetype.body.links.len().to_string());
    out
}

fn catalogue_stats(catalogue: &Catalogue) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    out.insert("patterns".into(), catalogue.patterns.len().to_string());
    let stubs = catalogue.patterns.iter().filter(|p| p.provenance() == Some(STUB)).count();
    out.insert("named".into(), (catalogue.patterns.len() - stubs).to_string());
    out.insert("stubs".into(), stubs.to_string());
    out.insert("cycle".into(), catalogue.cycle.len().to_string());
    let c1 = catalogue.lint_related_distance().iter().filter(|d| d.code == Code::C1).count();
    out.insert("c1".into(), c1.to_string());
    out
}

fn describe_errors(diagnostics: &[Diagnostic]) -> Vec<String> {
    diagnostics.iter().filter(|d| d.is_error()).map(ToString::to_string).collect()
}

fn check_entry(root: &Path, entry: &ManifestEntry) -> EntryReport {
    let mut report = EntryReport {
        path: entry.path.clone(),
        kind: entry.kind,
        failures: Vec::new(),
        observed: BTreeMap::new(),
    };
    let path = root.join(&entry.path);
    if DocumentKind::of(&path) != Some(entry.kind) {
        report.failures.push(format!("extension does not match kind {}", entry.kind));
    }
    let document = match dsl::load_document(&path) {
        Ok(parsed) => parsed.value,
        Err(err) => {
            report.failures.push(format!("does not load: {err}"));
            return report;
        }
    };
    if document.kind() != entry.kind {
        report.failures.push(format!("is a {}, listed as {}", document.kind(), entry.kind));
        return report;
    }

    let reparsed = dsl::parse_document(entry.kind, &document.serialize(), &path, &dsl::FsLoader);
    match reparsed {
        Ok(again) if again.value == document => {}
        Ok(_) => report.failures.push("canonical form does not parse back to the same document".into()),
        Err(diags) => report.failures.push(format!("canonical form does not parse: {}", describe_errors(&diags).join("; "))),
    }

    match &document {
        Document::Model(model) => {
            report.failures.extend(describe_errors(&validate_model(model)));
            report.observed = model_stats(model);
        }
        Document::Pattern(pattern) => {
            report.failures.extend(describe_errors(&validate_pattern(pattern)));
            report.observed = pattern_stats(pattern);
        }
        Document::Catalogue(catalogue) => {
            report.failures.extend(describe_errors(&catalogue.structure_diagnostics()));
            report.failures.extend(describe_errors(&catalogue.lint_related_distance()));
            for pattern in &catalogue.patterns {
                report.failures.extend(describe_errors(&validate_pattern(pattern)));
                match pattern.provenance() {
                    None | Some(STUB) => {}
                    Some(other) => report
                        .failures
                        .push(format!("pattern `{}` has unknown provenance `{other}`", pattern.name)),
                }
            }
            report.observed = catalogue_stats(catalogue);
        }
    }
    if entry.provenance == STUB && entry.kind != DocumentKind::Catalogue {
        let meta = match &document {
            Document::Model(m) => m.meta.get("provenance"),
            Document::Pattern(p) => p.meta.get("provenance"),
            Document::Catalogue(_) => None,
        };
        if meta.map(String::as_str) != Some(STUB) {
            report.failures.push(format!("listed as {STUB} but the file does not say so"));
        }
    }

    for (key, expected) in &entry.expect {
        match report.observed.get(key) {
            Some(found) if found == expected => {}
            Some(found) => report.failures.push(format!("{key}: expected {expected}, found {found}")),
            None => report.failures.push(format!("unknown expectation `{key}` for a {}", entry.kind)),
        }
    }
    report
}

fn corpus_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.path());
    for entry in entries {
        let path = entry.path();
        if path.is_dir() {
            corpus_files(root, &path, out)?;
        } else if DocumentKind::of(&path).is_some() {
            out.push(path.strip_prefix(root).unwrap_or(&path).to_path_buf());
        }
    }
    Ok(())
}

/// Loads `<root>/manifest` and checks every entry against its file. Every
/// `.susm`, `.susp` and `.susc` file under `root` must be listed.
pub fn corpus_check(root: &Path) -> CorpusReport {
    let mut report = CorpusReport::default();
    let manifest = match std::fs::read_to_string(root.join(MANIFEST)) {
        Ok(text) => text,
        Err(err) => {
            report.problems.push(format!("{}: {err}", root.join(MANIFEST).display()));
            return report;
        }
    };
    let manifest = match CorpusManifest::parse(&manifest) {
        Ok(m) => m,
        Err(err) => {
            report.problems.push(err.to_string());
            return report;
        }
    };
    for entry in &manifest.entries {
        report.entries.push(check_entry(root, entry));
    }
    let mut files = Vec::new();
    if let Err(err) = corpus_files(root, root, &mut files) {
        report.problems.push(format!("{}: {err}", root.display()));
    }
    for file in files {
        if !manifest.entries.iter().any(|e| e.path == file) {
            report.problems.push(format!("{} is not listed in the manifest", file.display()));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lines() {
        let m = CorpusManifest::parse("// c\n a/b.susm model documented elements=3 tagged=1\n\n").unwrap();
        assert_eq!(m.entries.len(), 1);
        assert_eq!(m.entries[0].expect["tagged"], "1");
        assert_eq!(m.entries[0].line, 2);
        assert!(CorpusManifest::parse("a.susm model guessed").is_err());
        assert!(CorpusManifest::parse("a.susm thing documented").is_err());
        assert!(CorpusManifest::parse("a.susm model documented x").is_err());
    }
}
