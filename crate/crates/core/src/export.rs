//! DOT renderings of models and catalogues, Markdown sheets for patterns.

use std::collections::BTreeSet;
use std::fmt::Write;

use thiserror::Error;

use crate::catalogue::{Catalogue, CatalogueError, Weights};
use crate::diagnostic::{has_errors, Diagnostic};
use crate::model::{Element, ElementKind, LinkKind, Model};
use crate::patterns::PatternDoc;
use crate::validator::validate_model;

/// Catalogue coordinates are multiplied by this in `pos` attributes.
pub const POSITION_SCALE: f64 = 5.0;

pub const TAGGED_FILL: &str = "gray25";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("model has {} validation error(s)", .0.iter().filter(|d| d.is_error()).count())]
    InvalidModel(Vec<Diagnostic>),
    #[error(transparent)]
    Catalogue(#[from] CatalogueError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DotOptions {
    pub rankdir: String,
    /// Append the dimension list to node labels.
    pub show_dimensions: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            rankdir: "BT".into(),
            show_dimensions: true,
        }
    }
}

pub fn shape(kind: ElementKind) -> &'static str {
    match kind {
        ElementKind::Value => "ellipse",
        ElementKind::Goal => "house",
        ElementKind::Activity => "box",
        // Graphviz has no explosion glyph.
        ElementKind::Obstacle => "doubleoctagon",
        ElementKind::Assumption => "note",
        ElementKind::Regulation => "component",
        ElementKind::Resource => "cylinder",
        ElementKind::Indicator => "diamond",
        ElementKind::Stakeholder => "plaintext",
    }
}

/// A double-quoted DOT string. Quoted DOT strings only know the `\"`
/// escape, so a backslash could swallow the closing quote; backslashes and
/// ampersands are written as character entities instead.
pub fn dot_quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("&#92;"),
            '&' => out.push_str("&amp;"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_label(element: &Element, options: &DotOptions) -> String {
    let mut label = if element.label.is_empty() {
        element.id.clone()
    } else {
        element.label.clone()
    };
    if options.show_dimensions && !element.dimensions.is_empty() {
        let dims: Vec<_> = element.dimensions.iter().map(|d| d.as_str()).collect();
        write!(label, "\n[{}]", dims.join(", ")).unwrap();
    }
    label
}

fn model_body(model: &Model, options: &DotOptions, indent: &str, out: &mut String) {
    for element in model.elements.values() {
        write!(
            out,
            "{indent}{} [label={}, shape={}",
            dot_quote(&element.id),
            dot_quote(&node_label(element, options)),
            shape(element.kind)
        )
        .unwrap();
        if element.is_tagged {
            write!(out, ", style=filled, fillcolor={TAGGED_FILL}, fontcolor=white").unwrap();
        }
        out.push_str("];\n");
    }
    for (i, (name, fragment)) in model.fragments.iter().enumerate() {
        writeln!(out, "{indent}subgraph cluster_{i} {{").unwrap();
        writeln!(out, "{indent}  label={};", dot_quote(name)).unwrap();
        writeln!(out, "{indent}  style=rounded;").unwrap();
        for id in &fragment.elements {
            writeln!(out, "{indent}  {};", dot_quote(id)).unwrap();
        }
        writeln!(out, "{indent}}}").unwrap();
    }
    for link in model.links.values() {
        let label = match (link.kind, link.strategy) {
            (LinkKind::Mitigates, Some(strategy)) => format!("mitigates ({strategy})"),
            (kind, _) => kind.to_string(),
        };
        writeln!(
            out,
            "{indent}{} -> {} [label={}];",
            dot_quote(&link.source),
            dot_quote(&link.target),
            dot_quote(&label)
        )
        .unwrap();
    }
}

/// DOT text for a model without validating it first.
pub fn model_dot_unchecked(model: &Model, options: &DotOptions) -> String {
    let mut out = format!("digraph {} {{\n", dot_quote(&model.name));
    if !model.elements.is_empty() {
        writeln!(out, "  rankdir={};", options.rankdir).unwrap();
        model_body(model, options, "  ", &mut out);
    }
    out.push_str("}\n");
    out
}

/// DOT text for a model that validates without errors. Elements, clusters
/// and edges are emitted in id order.
pub fn export_model_dot(model: &Model, options: &DotOptions) -> Result<String, ExportError> {
    let diagnostics = validate_model(model);
    if has_errors(&diagnostics) {
        return Err(ExportError::InvalidModel(diagnostics));
    }
    Ok(model_dot_unchecked(model, options))
}

/// The archetype body with its roles drawn as dashed placeholder nodes.
pub fn archetype_dot(pattern: &PatternDoc) -> String {
    let mut body = pattern.archetype.placeholder_model(&BTreeSet::new());
    body.name = pattern.name.clone();
    body.fragments.clear();
    let options = DotOptions {
        show_dimensions: false,
        ..DotOptions::default()
    };
    let mut out = format!("digraph {} {{\n", dot_quote(&body.name));
    if !body.elements.is_empty() {
        writeln!(out, "  rankdir={};", options.rankdir).unwrap();
        let roles: BTreeSet<String> = pattern.archetype.occurring_roles().into_iter().map(|r| format!("${r}")).collect();
        for id in &roles {
            writeln!(out, "  {} [style=dashed];", dot_quote(id)).unwrap();
        }
        model_body(&body, &options, "  ", &mut out);
    }
    out.push_str("}\n");
    out
}

fn format_coordinate(v: f64) -> String {
    let v = if v.abs() < 5e-5 { 0.0 } else { v };
    format!("{v:.4}")
}

/// Undirected neato graph: categories as rings at their anchors, patterns
/// as hexagons pinned at their placements, related pairs as dashed edges.
pub fn export_catalogue_dot(catalogue: &Catalogue, weights: Weights) -> Result<String, ExportError> {
    let placements = catalogue.placements(weights)?;
    let mut out = format!("graph {} {{\n", dot_quote(&catalogue.name));
    out.push_str("  layout=neato;\n");
    out.push_str("  node [fontsize=10];\n");
    let pos = |x: f64, y: f64| {
        dot_quote(&format!(
            "{},{}!",
            format_coordinate(x * POSITION_SCALE),
            format_coordinate(y * POSITION_SCALE)
        ))
    };
    for category in catalogue.categories() {
        let anchor = catalogue.anchor(category)?;
        writeln!(
            out,
            "  {} [label={}, shape=doublecircle, style=dashed, pos={}];",
            dot_quote(&format!("category:{category}")),
            dot_quote(category),
            pos(anchor.x, anchor.y)
        )
        .unwrap();
    }
    for (name, point) in &placements {
        writeln!(
            out,
            "  {} [shape=hexagon, pos={}];",
            dot_quote(name),
            pos(point.x, point.y)
        )
        .unwrap();
    }
    let mut pairs = BTreeSet::new();
    for pattern in &catalogue.patterns {
        for related in &pattern.related {
            if let Some(other) = catalogue.resolve(related) {
                if other.name != pattern.name {
                    let (a, b) = if pattern.name < other.name {
                        (&pattern.name, &other.name)
                    } else {
                        (&other.name, &pattern.name)
                    };
                    pairs.insert((a.clone(), b.clone()));
                }
            }
        }
    }
    for (a, b) in pairs {
        writeln!(out, "  {} -- {} [style=dashed];", dot_quote(&a), dot_quote(&b)).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// Section headings of a pattern sheet, in template order.
pub const SECTION_ORDER: [&str; 9] = [
    "Summary",
    "Category",
    "Dimensions",
    "Applicability",
    "Content",
    "Archetype",
    "Example",
    "Discussion",
    "Related Patterns",
];

/// Escapes characters that would otherwise start Markdown structure:
/// headings, code fences and setext underlines.
pub fn escape_markdown(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, line) in text.split('\n').enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let bare = line.trim();
        if !bare.is_empty() && (bare.chars().all(|c| c == '-' || c == ' ') || bare.chars().all(|c| c == '=' || c == ' ')) {
            out.push('\\');
        }
        for c in line.chars() {
            if matches!(c, '\\' | '#' | '`' | '~') {
                out.push('\\');
            }
            out.push(c);
        }
    }
    out
}

pub fn export_pattern_markdown(pattern: &PatternDoc) -> String {
    let mut out = format!("# {}\n", escape_markdown(&pattern.name));
    let mut section = |title: &str, body: String| {
        write!(out, "\n## {title}\n\n{}\n", body.trim_end()).unwrap();
    };
    section("Summary", escape_markdown(&pattern.summary));
    let category = match &pattern.category_secondary {
        Some(secondary) => format!(
            "{} (secondary: {})",
            escape_markdown(&pattern.category_primary),
            escape_markdown(secondary)
        ),
        None => escape_markdown(&pattern.category_primary),
    };
    section("Category", category);
    let dims: Vec<_> = pattern.dimensions.iter().map(|d| d.as_str()).collect();
    section("Dimensions", dims.join(", "));
    section("Applicability", escape_markdown(&pattern.applicability));
    section("Content", escape_markdown(&pattern.content));

    let archetype = &pattern.archetype;
    let mut body = String::new();
    if let Some(explanation) = &archetype.explanation {
        writeln!(body, "{}\n", escape_markdown(explanation)).unwrap();
    }
    if !archetype.roles.is_empty() {
        for role in &archetype.roles {
            writeln!(body, "- `${}`: {}", role.name, role.kind).unwrap();
        }
        body.push('\n');
    }
    write!(body, "```dot\n{}```", archetype_dot(pattern)).unwrap();
    section("Archetype", body);

    section("Example", escape_markdown(&pattern.example));
    if let Some(discussion) = &pattern.discussion {
        section("Discussion", escape_markdown(discussion));
    }
    if !pattern.related.is_empty() {
        let items: Vec<_> = pattern.related.iter().map(|r| format!("- {}", escape_markdown(r))).collect();
        section("Related Patterns", items.join("\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimension, Fragment, Link, Strategy};

    #[test]
    fn empty_model_has_empty_body() {
        let dot = export_model_dot(&Model::new("m"), &DotOptions::default()).unwrap();
        assert_eq!(dot, "digraph \"m\" {\n}\n");
    }

    #[test]
    fn tagged_and_mitigation_rendering() {
        let model = Model::new("m")
            .add_element(Element::new("O", ElementKind::Obstacle, "Overload").with_dims([Dimension::Social]))
            .unwrap()
            .add_element(Element::new("A", ElementKind::Activity, "Adapt \"now\"").with_dims([Dimension::Social]).tagged())
            .unwrap()
            .add_link(Link::new(LinkKind::Mitigates, "A", "O").with_strategy(Strategy::Anticipation))
            .unwrap()
            .add_fragment(Fragment {
                name: "F".into(),
                elements: ["A".to_string(), "O".to_string()].into(),
                links: ["A.mitigates.O".to_string()].into(),
                anchor: None,
            })
            .unwrap();
        let dot = model_dot_unchecked(&model, &DotOptions::default());
        assert!(dot.contains("\"A\" [label=\"Adapt \\\"now\\\"\\n[social]\", shape=box, style=filled, fillcolor=gray25"));
        assert!(dot.contains("shape=doubleoctagon]"));
        assert!(dot.contains("label=\"mitigates (anticipation)\""));
        assert_eq!(dot.matches("subgraph cluster_").count(), 1);
    }

    #[test]
    fn markdown_escapes_hashes() {
        let pattern = PatternDoc {
            name: "P".into(),
            summary: "# not a heading".into(),
            ..PatternDoc::default()
        };
        let md = export_pattern_markdown(&pattern);
        assert!(md.contains("\\# not a heading"));
        assert!(!md.contains("## Discussion"));
        assert!(!md.contains("## Related Patterns"));
    }
}
