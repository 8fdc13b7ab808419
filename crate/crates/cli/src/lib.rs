//! The `susmod` command line.
//!
//! Exit codes: 0 success, 1 warnings where the command treats them as
//! failure (`--strict`, `catalogue lint`, `fmt --check`), 2 errors or bad
//! usage, 3 I/O errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use susmod::catalogue::{Catalogue, Weights};
use susmod::corpus::corpus_check;
use susmod::diagnostic::{has_errors, normalize, Diagnostic, Severity};
use susmod::dsl::{self, Document, DocumentKind, LoadError};
use susmod::export::{self, DotOptions};
use susmod::patterns::{diff_instantiation, instantiate, PatternDoc};
use susmod::validator::{validate_model, validate_pattern};

pub const EXIT_OK: i32 = 0;
pub const EXIT_WARNINGS: i32 = 1;
pub const EXIT_ERRORS: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const CONFIG_FILE: &str = "susmod.toml";

#[derive(Debug, Parser)]
#[command(name = "susmod", version, about = "Sustainability requirements models, patterns and catalogues")]
pub struct Cli {
    /// Settings file; defaults to ./susmod.toml when present.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and check models, patterns and catalogues.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Exit 1 when only warnings were found.
        #[arg(long)]
        strict: bool,
    },
    /// Splice a pattern into a model.
    Instantiate {
        /// A `.susp` file, or a `.susc` file together with `--name`.
        pattern: PathBuf,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        binding: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        anchor: Option<String>,
        /// Write the resulting model here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Catalogue reports.
    Catalogue {
        #[command(subcommand)]
        action: CatalogueAction,
    },
    /// Write DOT or Markdown renderings.
    Render {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Output directory; defaults to the input's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        weights: Option<String>,
    },
    /// Rewrite files in canonical form.
    Fmt {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        /// Report files that are not canonical instead of rewriting them.
        #[arg(long)]
        check: bool,
    },
    /// Check the bundled corpus against its manifest.
    CorpusCheck {
        #[arg(default_value = "corpus")]
        dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogueAction {
    /// Pattern positions.
    Index {
        path: PathBuf,
        #[arg(long)]
        weights: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Structure and related-pattern distance checks.
    Lint { path: PathBuf },
    /// Counts per category.
    Stats {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Category hops along a sequence of patterns.
    Chain {
        path: PathBuf,
        #[arg(required = true)]
        names: Vec<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Dot,
    Md,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub strict: Option<bool>,
    pub weights: Option<String>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

pub struct Io<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub color: bool,
}

impl Io<'_> {
    fn diagnostic(&mut self, d: &Diagnostic) {
        let line = d.to_string();
        if self.color {
            let code = format!("[{}]", d.code);
            let paint = match d.severity {
                Severity::Error => "\x1b[31m",
                Severity::Warning => "\x1b[33m",
            };
            let _ = writeln!(self.err, "{}", line.replacen(&code, &format!("{paint}{code}\x1b[0m"), 1));
        } else {
            let _ = writeln!(self.err, "{line}");
        }
    }

    fn error(&mut self, message: impl std::fmt::Display) {
        let _ = writeln!(self.err, "error: {message}");
    }
}

/// Whether to colour diagnostics: only on a terminal, and never when
/// `SUSMOD_NO_COLOR` is set.
pub fn use_color(is_terminal: bool) -> bool {
    is_terminal && std::env::var_os("SUSMOD_NO_COLOR").is_none()
}

fn load_config(explicit: Option<&Path>) -> Result<Config, (i32, String)> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => {
            let default = PathBuf::from(CONFIG_FILE);
            if !default.exists() {
                return Ok(Config::default());
            }
            default
        }
    };
    let text = fs::read_to_string(&path).map_err(|e| (EXIT_IO, format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| (EXIT_ERRORS, format!("{}: {e}", path.display())))
}

fn weights(flag: Option<&str>, config: &Config) -> Result<Weights, String> {
    match flag.or(config.weights.as_deref()) {
        Some(text) => text.parse(),
        None => Ok(Weights::default()),
    }
}

/// Reports a load failure and returns its exit code.
fn report_load(io: &mut Io, err: &LoadError) -> i32 {
    match err {
        LoadError::Io { .. } => {
            io.error(err);
            EXIT_IO
        }
        LoadError::Invalid(diags) => {
            for d in diags {
                io.diagnostic(d);
            }
            EXIT_ERRORS
        }
    }
}

fn load_catalogue(io: &mut Io, path: &Path) -> Result<Catalogue, i32> {
    match dsl::load_catalogue(path) {
        Ok(parsed) => {
            for d in &parsed.warnings {
                io.diagnostic(d);
            }
            Ok(parsed.value)
        }
        Err(err) => Err(report_load(io, &err)),
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, io: &mut Io) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(io.out, "{err}");
                return EXIT_OK;
            }
            let _ = write!(io.err, "{err}");
            return EXIT_ERRORS;
        }
    };
    let config = match load_config(cli.config.as_deref()) {
        Ok(c) => c,
        Err((code, message)) => {
            io.error(message);
            return code;
        }
    };
    match cli.command {
        Command::Validate { paths, strict } => cmd_validate(io, &paths, strict || config.strict.unwrap_or(false)),
        Command::Instantiate {
            pattern,
            name,
            binding,
            model,
            anchor,
            out,
        } => cmd_instantiate(io, &pattern, name.as_deref(), &binding, &model, anchor.as_deref(), out.as_deref()),
        Command::Catalogue { action } => cmd_catalogue(io, action, &config),
        Command::Render {
            path,
            format,
            out,
            weights: w,
        } => {
            let weights = match weights(w.as_deref(), &config) {
                Ok(w) => w,
                Err(e) => {
                    io.error(e);
                    return EXIT_ERRORS;
                }
            };
            let out = out.or_else(|| config.out.clone());
            cmd_render(io, &path, format.or(config.format), out.as_deref(), weights)
        }
        Command::Fmt { paths, check } => cmd_fmt(io, &paths, check),
        Command::CorpusCheck { dir } => {
            let report = corpus_check(&dir);
            let _ = writeln!(io.out, "{report}");
            if report.passed() {
                EXIT_OK
            } else {
                EXIT_ERRORS
            }
        }
    }
}

/// Every diagnostic for one document: parse warnings plus semantic checks.
pub fn check_document(document: &Document) -> Vec<Diagnostic> {
    let mut out = match document {
        Document::Model(model) => validate_model(model),
        Document::Pattern(pattern) => validate_pattern(pattern),
        Document::Catalogue(catalogue) => {
            let mut all = catalogue.structure_diagnostics();
            for pattern in &catalogue.patterns {
                all.extend(validate_pattern(pattern));
            }
            all.extend(catalogue.lint_related_distance());
            all
        }
    };
    normalize(&mut out);
    out
}

fn cmd_validate(io: &mut Io, paths: &[PathBuf], strict: bool) -> i32 {
    let mut code = EXIT_OK;
    for path in paths {
        let parsed = match dsl::load_document(path) {
            Ok(parsed) => parsed,
            Err(err) => {
                code = code.max(report_load(io, &err));
                continue;
            }
        };
        let mut diagnostics = parsed.warnings;
        diagnostics.extend(check_document(&parsed.value));
        normalize(&mut diagnostics);
        for d in &diagnostics {
            io.diagnostic(d);
        }
        if has_errors(&diagnostics) {
            code = code.max(EXIT_ERRORS);
        } else if !diagnostics.is_empty() && strict {
            code = code.max(EXIT_WARNINGS);
        }
    }
    code
}

fn load_pattern(io: &mut Io, path: &Path, name: Option<&str>) -> Result<PatternDoc, i32> {
    if DocumentKind::of(path) == Some(DocumentKind::Catalogue) {
        let catalogue = load_catalogue(io, path)?;
        let Some(name) = name else {
            io.error("a catalogue needs --name to select the pattern");
            return Err(EXIT_ERRORS);
        };
        return match catalogue.resolve(name) {
            Some(p) => Ok(p.clone()),
            None => {
                io.error(format!("catalogue has no pattern `{name}`"));
                Err(EXIT_ERRORS)
            }
        };
    }
    match dsl::load_pattern(path) {
        Ok(parsed) => {
            for d in &parsed.warnings {
                io.diagnostic(d);
            }
            Ok(parsed.value)
        }
        Err(err) => Err(report_load(io, &err)),
    }
}

fn cmd_instantiate(
    io: &mut Io,
    pattern_path: &Path,
    name: Option<&str>,
    binding_path: &Path,
    model_path: &Path,
    anchor: Option<&str>,
    out: Option<&Path>,
) -> i32 {
    let pattern = match load_pattern(io, pattern_path, name) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let binding = match dsl::load_binding(binding_path) {
        Ok(parsed) => parsed.value,
        Err(err) => return report_load(io, &err),
    };
    let model = match dsl::load_model(model_path) {
        Ok(parsed) => parsed.value,
        Err(err) => return report_load(io, &err),
    };
    let result = match instantiate(&pattern, &binding, &model, anchor) {
        Ok(m) => m,
        Err(err) => {
            io.error(&err);
            return EXIT_ERRORS;
        }
    };
    let text = dsl::serialize_model_inline(&result);
    let summary = diff_instantiation(&model, &result, &pattern);
    match out {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                io.error(format!("{}: {e}", path.display()));
                return EXIT_IO;
            }
            let _ = write!(io.out, "{summary}");
        }
        None => {
            let _ = write!(io.out, "{text}");
            let _ = write!(io.err, "{summary}");
        }
    }
    EXIT_OK
}

fn cmd_catalogue(io: &mut Io, action: CatalogueAction, config: &Config) -> i32 {
    let path = match &action {
        CatalogueAction::Index { path, .. }
        | CatalogueAction::Lint { path }
        | CatalogueAction::Stats { path, .. }
        | CatalogueAction::Chain { path, .. } => path.clone(),
    };
    let catalogue = match load_catalogue(io, &path) {
        Ok(c) => c,
        Err(code) => return code,
    };
    match action {
        CatalogueAction::Index { weights: w, json, .. } => {
            let index = weights(w.as_deref(), config).and_then(|w| catalogue.index(w).map_err(|e| e.to_string()));
            match index {
                Ok(index) if json => {
                    let _ = writeln!(io.out, "{}", index.to_json());
                    EXIT_OK
                }
                Ok(index) => {
                    let _ = write!(io.out, "{index}");
                    EXIT_OK
                }
                Err(e) => {
                    io.error(e);
                    EXIT_ERRORS
                }
            }
        }
        CatalogueAction::Lint { .. } => {
            let mut diagnostics = catalogue.structure_diagnostics();
            diagnostics.extend(catalogue.lint_related_distance());
            normalize(&mut diagnostics);
            for d in &diagnostics {
                io.diagnostic(d);
            }
            if has_errors(&diagnostics) {
                EXIT_ERRORS
            } else if diagnostics.is_empty() {
                EXIT_OK
            } else {
                EXIT_WARNINGS
            }
        }
        CatalogueAction::Stats { json, .. } => {
            let stats = catalogue.stats();
            if json {
                let _ = writeln!(io.out, "{}", stats.to_json());
            } else {
                let _ = write!(io.out, "{stats}");
            }
            EXIT_OK
        }
        CatalogueAction::Chain { names, json, .. } => match catalogue.compose_chain(&names) {
            Ok(report) if json => {
                let _ = writeln!(io.out, "{}", report.to_json());
                EXIT_OK
            }
            Ok(report) => {
                let _ = writeln!(io.out, "{report}");
                EXIT_OK
            }
            Err(e) => {
                io.error(e);
                EXIT_ERRORS
            }
        },
    }
}

fn write_output(io: &mut Io, path: &Path, text: &str) -> Result<(), i32> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        if let Err(e) = fs::create_dir_all(parent) {
            io.error(format!("{}: {e}", parent.display()));
            return Err(EXIT_IO);
        }
    }
    if let Err(e) = fs::write(path, text) {
        io.error(format!("{}: {e}", path.display()));
        return Err(EXIT_IO);
    }
    let _ = writeln!(io.out, "{}", path.display());
    Ok(())
}

fn cmd_render(io: &mut Io, path: &Path, format: Option<Format>, out: Option<&Path>, weights: Weights) -> i32 {
    let document = match dsl::load_document(path) {
        Ok(parsed) => parsed.value,
        Err(err) => return report_load(io, &err),
    };
    let dir = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| path.parent().map(Path::to_path_buf).unwrap_or_default());
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let format = format.unwrap_or(match document.kind() {
        DocumentKind::Pattern => Format::Md,
        _ => Format::Dot,
    });
    let outputs: Vec<(PathBuf, String)> = match (&document, format) {
        (Document::Model(model), Format::Dot) => match export::export_model_dot(model, &DotOptions::default()) {
            Ok(text) => vec![(dir.join(format!("{stem}.dot")), text)],
            Err(err) => {
                for d in err_diagnostics(&err) {
                    io.diagnostic(d);
                }
                io.error(err);
                return EXIT_ERRORS;
            }
        },
        (Document::Model(_), Format::Md) => {
            io.error("Markdown rendering is available for patterns and catalogues");
            return EXIT_ERRORS;
        }
        (Document::Pattern(pattern), Format::Md) => {
            vec![(dir.join(format!("{stem}.md")), export::export_pattern_markdown(pattern))]
        }
        (Document::Pattern(pattern), Format::Dot) => vec![(dir.join(format!("{stem}.dot")), export::archetype_dot(pattern))],
        (Document::Catalogue(catalogue), Format::Dot) => match export::export_catalogue_dot(catalogue, weights) {
            Ok(text) => vec![(dir.join(format!("{stem}.dot")), text)],
            Err(err) => {
                io.error(err);
                return EXIT_ERRORS;
            }
        },
        (Document::Catalogue(catalogue), Format::Md) => catalogue
            .patterns
            .iter()
            .map(|p| (dir.join(format!("{}.md", p.slug())), export::export_pattern_markdown(p)))
            .collect(),
    };
    for (target, text) in outputs {
        if let Err(code) = write_output(io, &target, &text) {
            return code;
        }
    }
    EXIT_OK
}

fn err_diagnostics(err: &export::ExportError) -> &[Diagnostic] {
    match err {
        export::ExportError::InvalidModel(d) => d,
        export::ExportError::Catalogue(_) => &[],
    }
}

fn cmd_fmt(io: &mut Io, paths: &[PathBuf], check: bool) -> i32 {
    let mut code = EXIT_OK;
    for path in paths {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                io.error(format!("{}: {e}", path.display()));
                code = code.max(EXIT_IO);
                continue;
            }
        };
        let kind = DocumentKind::of(path).unwrap_or(DocumentKind::Model);
        let document = match dsl::parse_document(kind, &text, path, &dsl::FsLoader) {
            Ok(parsed) => parsed.value,
            Err(diags) => {
                for d in &diags {
                    io.diagnostic(d);
                }
                code = code.max(EXIT_ERRORS);
                continue;
            }
        };
        let canonical = document.serialize();
        if canonical == text {
            continue;
        }
        if check {
            let _ = writeln!(io.out, "would reformat {}", path.display());
            code = code.max(EXIT_WARNINGS);
        } else if let Err(e) = fs::write(path, canonical) {
            io.error(format!("{}: {e}", path.display()));
            code = code.max(EXIT_IO);
        } else {
            let _ = writeln!(io.out, "formatted {}", path.display());
        }
    }
    code
}
