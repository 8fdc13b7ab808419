//! Canonical text form. Parsing the output yields an equal value and
//! serializing again yields the same bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::catalogue::Catalogue;
use crate::model::{Dimension, Element, ElementKind, Link, LinkKind, Model};
use crate::patterns::PatternDoc;

pub fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn dims(dims: &BTreeSet<Dimension>) -> String {
    let names: Vec<_> = dims.iter().map(|d| d.as_str()).collect();
    format!("[{}]", names.join(", "))
}

/// `<kind> <id> [dims [..]] ["label"] [tagged] [{ k = "v", .. }]`
pub fn serialize_element(element: &Element) -> String {
    let mut out = format!("{} {}", element.kind, element.id);
    if !element.dimensions.is_empty() {
        write!(out, " dims {}", dims(&element.dimensions)).unwrap();
    }
    if !element.label.is_empty() {
        write!(out, " {}", quote(&element.label)).unwrap();
    }
    if element.is_tagged {
        out.push_str(" tagged");
    }
    if !element.attrs.is_empty() {
        let attrs: Vec<_> = element.attrs.iter().map(|(k, v)| format!("{k} = {}", quote(v))).collect();
        write!(out, " {{ {} }}", attrs.join(", ")).unwrap();
    }
    out
}

/// `link <kind>(<source> -> <target>) [as <id>] [strategy=<s>]`
pub fn serialize_link(link: &Link) -> String {
    let mut out = format!("link {}({} -> {})", link.kind, link.source, link.target);
    if link.id != Link::default_id(link.kind, &link.source, &link.target) {
        write!(out, " as {}", link.id).unwrap();
    }
    if let Some(strategy) = link.strategy {
        write!(out, " strategy={strategy}").unwrap();
    }
    out
}

/// Elements grouped by kind in kind order, each group in id order.
fn element_groups<'a>(elements: impl Iterator<Item = &'a Element>, indent: &str) -> Vec<Vec<String>> {
    let mut groups: BTreeMap<ElementKind, Vec<String>> = BTreeMap::new();
    for e in elements {
        groups.entry(e.kind).or_default().push(format!("{indent}{}", serialize_element(e)));
    }
    groups.into_values().collect()
}

fn link_groups<'a>(links: impl Iterator<Item = &'a Link>, indent: &str) -> Vec<Vec<String>> {
    let mut groups: BTreeMap<LinkKind, Vec<String>> = BTreeMap::new();
    for l in links {
        groups.entry(l.kind).or_default().push(format!("{indent}{}", serialize_link(l)));
    }
    groups.into_values().collect()
}

fn meta_lines(meta: &BTreeMap<String, String>, indent: &str) -> Vec<String> {
    meta.iter().map(|(k, v)| format!("{indent}meta {k} = {}", quote(v))).collect()
}

/// Joins non-empty sections with blank lines.
fn sections(sections: Vec<Vec<String>>) -> String {
    let blocks: Vec<String> = sections
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| s.join("\n"))
        .collect();
    blocks.join("\n\n")
}

fn block(header: String, body: String, indent: &str) -> String {
    if body.is_empty() {
        format!("{indent}{header} {{\n{indent}}}")
    } else {
        format!("{indent}{header} {{\n{body}\n{indent}}}")
    }
}

fn model_text(model: &Model, keep_external: bool) -> String {
    let mut hidden_elements = BTreeSet::new();
    let mut hidden_links = BTreeSet::new();
    if keep_external {
        for (name, fragment) in &model.fragments {
            if model.source.external.contains_key(name) {
                hidden_elements.extend(fragment.elements.iter().cloned());
                hidden_links.extend(fragment.links.iter().cloned());
            }
        }
    }

    let elements = element_groups(model.elements.values().filter(|e| !hidden_elements.contains(&e.id)), "  ");
    let links = link_groups(model.links.values().filter(|l| !hidden_links.contains(&l.id)), "  ");
    let mut fragments = Vec::new();
    for (name, fragment) in &model.fragments {
        let mut header = format!("fragment {name}");
        if let Some(anchor) = &fragment.anchor {
            write!(header, " at {anchor}").unwrap();
        }
        match model.source.external.get(name).filter(|_| keep_external) {
            Some(path) => fragments.push(format!("  {header} from {}", quote(path))),
            None => {
                let mut body = Vec::new();
                if !fragment.elements.is_empty() {
                    let ids: Vec<_> = fragment.elements.iter().map(String::as_str).collect();
                    body.push(format!("    elements [{}]", ids.join(", ")));
                }
                if !fragment.links.is_empty() {
                    let ids: Vec<_> = fragment.links.iter().map(String::as_str).collect();
                    body.push(format!("    links [{}]", ids.join(", ")));
                }
                fragments.push(block(header, body.join("\n"), "  "));
            }
        }
    }
    let mut parts = vec![meta_lines(&model.meta, "  ")];
    parts.extend(elements);
    parts.extend(links);
    parts.push(fragments);
    let body = sections(parts);
    format!("{}\n", block(format!("model {}", quote(&model.name)), body, ""))
}

/// Canonical text. Fragments loaded from their own file are written back as
/// `fragment <name> from "<path>"` and their members are left to that file.
pub fn serialize_model(model: &Model) -> String {
    model_text(model, true)
}

/// Canonical text with every fragment written inline.
pub fn serialize_model_inline(model: &Model) -> String {
    model_text(model, false)
}

fn pattern_text(pattern: &PatternDoc, indent: &str) -> String {
    let inner = format!("{indent}  ");
    let deeper = format!("{indent}    ");
    let mut fields = Vec::new();
    fields.push(format!("{inner}summary {}", quote(&pattern.summary)));
    let mut category = format!("{inner}category {}", pattern.category_primary);
    if let Some(secondary) = &pattern.category_secondary {
        write!(category, " secondary {secondary}").unwrap();
    }
    fields.push(category);
    fields.push(format!("{inner}dimensions {}", dims(&pattern.dimensions)));
    fields.push(format!("{inner}applicability {}", quote(&pattern.applicability)));
    fields.push(format!("{inner}content {}", quote(&pattern.content)));

    let archetype = &pattern.archetype;
    let mut head = Vec::new();
    if let Some(explanation) = &archetype.explanation {
        head.push(format!("{deeper}explanation {}", quote(explanation)));
    }
    head.extend(archetype.roles.iter().map(|r| format!("{deeper}role {}: {}", r.name, r.kind)));
    let mut parts = vec![head];
    parts.extend(element_groups(archetype.body.elements.values(), &deeper));
    parts.extend(link_groups(archetype.body.links.values(), &deeper));
    fields.push(block("archetype".into(), sections(parts), &inner));

    fields.push(format!("{inner}example {}", quote(&pattern.example)));
    if let Some(discussion) = &pattern.discussion {
        fields.push(format!("{inner}discussion {}", quote(discussion)));
    }
    if !pattern.related.is_empty() {
        let names: Vec<_> = pattern.related.iter().map(|n| quote(n)).collect();
        fields.push(format!("{inner}related [{}]", names.join(", ")));
    }
    let body = sections(vec![meta_lines(&pattern.meta, &inner), fields]);
    block(format!("pattern {}", quote(&pattern.name)), body, indent)
}

pub fn serialize_pattern(pattern: &PatternDoc) -> String {
    format!("{}\n", pattern_text(pattern, ""))
}

/// Canonical text. Patterns are written in name order; those loaded through
/// `include` stay includes.
pub fn serialize_catalogue(catalogue: &Catalogue) -> String {
    let names: Vec<_> = catalogue.cycle.iter().map(String::as_str).collect();
    let structure = vec![
        format!("  cycle [{}]", names.join(", ")),
        format!("  center {}", catalogue.center),
    ];
    let mut patterns: Vec<&PatternDoc> = catalogue.patterns.iter().collect();
    patterns.sort_by(|a, b| a.name.cmp(&b.name));
    // Consecutive includes share a block; inline patterns stand apart.
    let mut entries = String::new();
    let mut previous_inline = false;
    for pattern in patterns {
        let (text, inline) = match catalogue.source.external.get(&pattern.name) {
            Some(path) => (format!("  include {}", quote(path)), false),
            None => (pattern_text(pattern, "  "), true),
        };
        if !entries.is_empty() {
            entries.push_str(if inline || previous_inline { "\n\n" } else { "\n" });
        }
        entries.push_str(&text);
        previous_inline = inline;
    }
    let entries = if entries.is_empty() { vec![] } else { vec![entries] };
    let body = sections(vec![meta_lines(&catalogue.meta, "  "), structure, entries]);
    format!("{}\n", block(format!("catalogue {}", quote(&catalogue.name)), body, ""))
}
