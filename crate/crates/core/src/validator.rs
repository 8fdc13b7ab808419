//! Well-formedness rules for models (V1-V8) and patterns (P1-P3).
//!
//! | code | severity | rule |
//! |------|----------|------|
//! | V1 | error | ids are non-empty, unique across elements and links, and resolve |
//! | V2 | error | element shape and the link endpoint-kind table |
//! | V3 | error | refines links between values/goals are acyclic |
//! | V4 | error | every fragment is non-empty, closed under its links and connected |
//! | V5 | error | fragment anchors resolve and lie outside the fragment |
//! | V6 | warning | every obstacle is mitigated |
//! | V7 | warning | every value/goal is reached from an activity via contributes/refines |
//! | V8 | warning | every mitigation names a strategy |
//! | P1 | error | mandatory template fields are present |
//! | P2 | error | the archetype is a well-formed connected fragment |
//! | P3 | warning | every declared role occurs in the archetype |

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::diagnostic::{normalize, Code, Diagnostic, SourceSpan};
use crate::model::{check_link_kinds, ElementKind, LinkKind, Model, ModelError};
use crate::patterns::{role_ref, PatternDoc};

fn span(model: &Model, key: String) -> Option<SourceSpan> {
    model.source.span(&key).cloned()
}

pub fn validate_model(model: &Model) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    check_ids(model, &mut out);
    check_kinds(model, &mut out);
    check_refinement_cycles(model, &mut out);
    check_fragments(model, &mut out);
    check_mitigation(model, &mut out);
    check_contribution(model, &mut out);
    normalize(&mut out);
    out
}

fn check_ids(model: &Model, out: &mut Vec<Diagnostic>) {
    for (key, element) in &model.elements {
        let at = span(model, format!("element:{key}"));
        if element.id.is_empty() || key.is_empty() {
            out.push(Diagnostic::new(Code::V1, "element with empty id", at));
        } else if &element.id != key {
            out.push(Diagnostic::new(
                Code::V1,
                format!("element stored under `{key}` carries id `{}`", element.id),
                at,
            ));
        }
    }
    for (key, link) in &model.links {
        let at = span(model, format!("link:{key}"));
        if link.id.is_empty() || key.is_empty() {
            out.push(Diagnostic::new(Code::V1, "link with empty id", at.clone()));
        } else if &link.id != key {
            out.push(Diagnostic::new(
                Code::V1,
                format!("link stored under `{key}` carries id `{}`", link.id),
                at.clone(),
            ));
        }
        if model.elements.contains_key(key) {
            out.push(Diagnostic::new(
                Code::V1,
                format!("`{key}` names both an element and a link"),
                at.clone(),
            ));
        }
        for endpoint in [&link.source, &link.target] {
            if !model.elements.contains_key(endpoint) {
                out.push(Diagnostic::new(
                    Code::V1,
                    format!("link `{key}` refers to unknown element `{endpoint}`"),
                    at.clone(),
                ));
            }
        }
    }
    for (name, fragment) in &model.fragments {
        let at = span(model, format!("fragment:{name}"));
        if &fragment.name != name {
            out.push(Diagnostic::new(
                Code::V1,
                format!("fragment stored under `{name}` is named `{}`", fragment.name),
                at.clone(),
            ));
        }
        for id in &fragment.elements {
            if !model.elements.contains_key(id) {
                out.push(Diagnostic::new(
                    Code::V1,
                    format!("fragment `{name}` lists unknown element `{id}`"),
                    at.clone(),
                ));
            }
        }
        for id in &fragment.links {
            if !model.links.contains_key(id) {
                out.push(Diagnostic::new(
                    Code::V1,
                    format!("fragment `{name}` lists unknown link `{id}`"),
                    at.clone(),
                ));
            }
        }
    }
}

fn check_kinds(model: &Model, out: &mut Vec<Diagnostic>) {
    for (key, element) in &model.elements {
        if element.kind.requires_dimensions() && element.dimensions.is_empty() {
            out.push(Diagnostic::new(
                Code::V2,
                format!("{} `{key}` must carry at least one dimension", element.kind),
                span(model, format!("element:{key}")),
            ));
        }
    }
    for (key, link) in &model.links {
        match check_link_kinds(model, link) {
            Ok(()) | Err(ModelError::DanglingEndpoint { .. }) => {}
            Err(err) => out.push(Diagnostic::new(
                Code::V2,
                err.to_string(),
                span(model, format!("link:{key}")),
            )),
        }
    }
}

fn is_refinable(kind: ElementKind) -> bool {
    matches!(kind, ElementKind::Value | ElementKind::Goal)
}

fn check_refinement_cycles(model: &Model, out: &mut Vec<Diagnostic>) {
    let mut graph = DiGraph::<&str, &str>::new();
    let mut nodes = BTreeMap::new();
    for (id, element) in &model.elements {
        if is_refinable(element.kind) {
            nodes.insert(id.as_str(), graph.add_node(id.as_str()));
        }
    }
    for (id, link) in &model.links {
        if link.kind != LinkKind::Refines {
            continue;
        }
        if let (Some(&s), Some(&t)) = (nodes.get(link.source.as_str()), nodes.get(link.target.as_str())) {
            graph.add_edge(s, t, id.as_str());
        }
    }
    for component in tarjan_scc(&graph) {
        let cyclic = component.len() > 1 || graph.contains_edge(component[0], component[0]);
        if !cyclic {
            continue;
        }
        let members: BTreeSet<&str> = component.iter().map(|&n| graph[n]).collect();
        let first_link = graph
            .edge_indices()
            .filter(|&e| {
                let (s, t) = graph.edge_endpoints(e).unwrap();
                members.contains(graph[s]) && members.contains(graph[t])
            })
            .map(|e| graph[e])
            .min()
            .unwrap();
        out.push(Diagnostic::new(
            Code::V3,
            format!(
                "refinement cycle through {}",
                members.iter().copied().collect::<Vec<_>>().join(", ")
            ),
            span(model, format!("link:{first_link}")),
        ));
    }
}

fn check_fragments(model: &Model, out: &mut Vec<Diagnostic>) {
    for (name, fragment) in &model.fragments {
        let at = span(model, format!("fragment:{name}"));
        if fragment.elements.is_empty() {
            out.push(Diagnostic::new(Code::V4, format!("fragment `{name}` is empty"), at.clone()));
        }
        for id in &fragment.links {
            if let Some(link) = model.links.get(id) {
                if !fragment.elements.contains(&link.source) || !fragment.elements.contains(&link.target) {
                    out.push(Diagnostic::new(
                        Code::V4,
                        format!("fragment `{name}` holds link `{id}` whose endpoints leave the fragment"),
                        at.clone(),
                    ));
                }
            }
        }
        let known = fragment
            .elements
            .iter()
            .filter(|id| model.elements.contains_key(*id))
            .map(String::as_str);
        let components = model
            .undirected_components(known)
            .expect("members filtered to known ids");
        if components.len() > 1 {
            let listed = components
                .iter()
                .map(|c| format!("{{{}}}", c.join(", ")))
                .collect::<Vec<_>>()
                .join(" ");
            out.push(Diagnostic::new(
                Code::V4,
                format!(
                    "fragment `{name}` is not connected: {} components {listed}",
                    components.len()
                ),
                at.clone(),
            ));
        }

        if let Some(anchor) = &fragment.anchor {
            if !model.elements.contains_key(anchor) {
                out.push(Diagnostic::new(
                    Code::V5,
                    format!("fragment `{name}` is anchored at unknown element `{anchor}`"),
                    at.clone(),
                ));
            } else if fragment.elements.contains(anchor) {
                out.push(Diagnostic::new(
                    Code::V5,
                    format!("fragment `{name}` is anchored at its own member `{anchor}`"),
                    at.clone(),
                ));
            }
        }
    }
}

fn check_mitigation(model: &Model, out: &mut Vec<Diagnostic>) {
    let mitigated: BTreeSet<&str> = model
        .links
        .values()
        .filter(|l| l.kind == LinkKind::Mitigates)
        .map(|l| l.target.as_str())
        .collect();
    for (id, element) in &model.elements {
        if element.kind == ElementKind::Obstacle && !mitigated.contains(id.as_str()) {
            out.push(Diagnostic::new(
                Code::V6,
                format!("obstacle `{id}` has no mitigating activity"),
                span(model, format!("element:{id}")),
            ));
        }
    }
    for (id, link) in &model.links {
        if link.kind == LinkKind::Mitigates && link.strategy.is_none() {
            out.push(Diagnostic::new(
                Code::V8,
                format!("mitigation `{id}` names no strategy"),
                span(model, format!("link:{id}")),
            ));
        }
    }
}

fn check_contribution(model: &Model, out: &mut Vec<Diagnostic>) {
    let mut successors: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for link in model.links.values() {
        if matches!(link.kind, LinkKind::Contributes | LinkKind::Refines) {
            successors
                .entry(link.source.as_str())
                .or_default()
                .push(link.target.as_str());
        }
    }
    let mut reached = BTreeSet::new();
    let mut queue: VecDeque<&str> = model
        .elements
        .values()
        .filter(|e| e.kind == ElementKind::Activity)
        .map(|e| e.id.as_str())
        .collect();
    while let Some(node) = queue.pop_front() {
        for &next in successors.get(node).into_iter().flatten() {
            if reached.insert(next) {
                queue.push_back(next);
            }
        }
    }
    for (id, element) in &model.elements {
        if is_refinable(element.kind) && !reached.contains(id.as_str()) {
            out.push(Diagnostic::new(
                Code::V7,
                format!("{} `{id}` is not supported by any contributing activity", element.kind),
                span(model, format!("element:{id}")),
            ));
        }
    }
}

/// Checks a pattern document against the template and archetype rules.
pub fn validate_pattern(pattern: &PatternDoc) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let header = pattern.source.span("header").cloned();
    let mandatory = [
        ("name", pattern.name.trim().is_empty()),
        ("summary", pattern.summary.trim().is_empty()),
        ("category", pattern.category_primary.trim().is_empty()),
        ("dimensions", pattern.dimensions.is_empty()),
        ("applicability", pattern.applicability.trim().is_empty()),
        ("content", pattern.content.trim().is_empty()),
        ("example", pattern.example.trim().is_empty()),
    ];
    for (field, missing) in mandatory {
        if missing {
            out.push(Diagnostic::new(
                Code::P1,
                format!("pattern `{}` is missing mandatory field `{field}`", pattern.name),
                header.clone(),
            ));
        }
    }
    check_archetype(pattern, &mut out);
    normalize(&mut out);
    out
}

fn check_archetype(pattern: &PatternDoc, out: &mut Vec<Diagnostic>) {
    let archetype = &pattern.archetype;
    let body = &archetype.body;
    let archetype_span = pattern
        .source
        .span("field:archetype")
        .or_else(|| pattern.source.span("header"))
        .cloned();

    if archetype.is_empty() {
        out.push(Diagnostic::new(Code::P2, "archetype is empty", archetype_span));
        return;
    }

    let mut seen = BTreeSet::new();
    for role in &archetype.roles {
        if !seen.insert(role.name.as_str()) {
            out.push(Diagnostic::new(
                Code::P2,
                format!("role `{}` is declared twice", role.name),
                pattern.source.span(&format!("role:{}", role.name)).cloned(),
            ));
        }
    }

    let placeholders = archetype.placeholder_model(&pattern.dimensions);
    let body_span = |key: String| body.source.span(&key).cloned().or_else(|| archetype_span.clone());

    for (id, element) in &body.elements {
        if element.kind.requires_dimensions() && element.dimensions.is_empty() {
            out.push(Diagnostic::new(
                Code::P2,
                format!("archetype {} `{id}` must carry at least one dimension", element.kind),
                body_span(format!("element:{id}")),
            ));
        }
    }
    let mut endpoints_ok = true;
    for (id, link) in &body.links {
        for endpoint in [&link.source, &link.target] {
            let resolved = match role_ref(endpoint) {
                Some(role) => archetype.role(role).is_some(),
                None => body.elements.contains_key(endpoint),
            };
            if !resolved {
                endpoints_ok = false;
                out.push(Diagnostic::new(
                    Code::P2,
                    format!("archetype link `{id}` refers to unknown `{endpoint}`"),
                    body_span(format!("link:{id}")),
                ));
            }
        }
        if let Err(err) = check_link_kinds(&placeholders, link) {
            if !matches!(err, ModelError::DanglingEndpoint { .. }) {
                out.push(Diagnostic::new(Code::P2, err.to_string(), body_span(format!("link:{id}"))));
            }
        }
    }

    if endpoints_ok {
        let components = placeholders
            .undirected_components(placeholders.elements.keys().map(String::as_str))
            .expect("placeholder ids are all known");
        if components.len() > 1 {
            out.push(Diagnostic::new(
                Code::P2,
                format!("archetype is not connected: {} components", components.len()),
                archetype_span.clone(),
            ));
        }
    }

    let occurring = archetype.occurring_roles();
    for role in &archetype.roles {
        if !occurring.contains(&role.name) {
            out.push(Diagnostic::new(
                Code::P3,
                format!("role `{}` does not occur in the archetype", role.name),
                pattern.source.span(&format!("role:{}", role.name)).cloned(),
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimension, Element, Fragment, Link, Strategy};

    fn el(id: &str, kind: ElementKind) -> Element {
        Element::new(id, kind, id).with_dims([Dimension::Social])
    }

    fn codes(diags: &[Diagnostic]) -> Vec<Code> {
        diags.iter().map(|d| d.code).collect()
    }

    #[test]
    fn refines_cycle_is_v3() {
        let mut m = Model::new("m");
        m.insert_element(el("a", ElementKind::Goal)).unwrap();
        m.insert_element(el("b", ElementKind::Goal)).unwrap();
        m.insert_link(Link::new(LinkKind::Refines, "a", "b")).unwrap();
        m.insert_link(Link::new(LinkKind::Refines, "b", "a")).unwrap();
        let diags = validate_model(&m);
        assert_eq!(diags.iter().filter(|d| d.code == Code::V3).count(), 1);
    }

    #[test]
    fn broken_fragment_lists_two_components() {
        let mut m = Model::new("m");
        m.insert_element(el("x", ElementKind::Activity)).unwrap();
        m.insert_element(el("y", ElementKind::Goal)).unwrap();
        m.insert_element(el("z", ElementKind::Activity)).unwrap();
        m.insert_link(Link::new(LinkKind::Contributes, "x", "y")).unwrap();
        let mut f = Fragment::new("F");
        f.elements.extend(["x", "y", "z"].map(String::from));
        m.insert_fragment(f).unwrap();
        let v4: Vec<_> = validate_model(&m).into_iter().filter(|d| d.code == Code::V4).collect();
        assert_eq!(v4.len(), 1);
        assert!(v4[0].message.contains("2 components"), "{}", v4[0].message);
    }

    #[test]
    fn warnings_for_unmitigated_obstacle_and_missing_strategy() {
        let mut m = Model::new("m");
        m.insert_element(el("o", ElementKind::Obstacle)).unwrap();
        m.insert_element(el("p", ElementKind::Obstacle)).unwrap();
        m.insert_element(el("a", ElementKind::Activity)).unwrap();
        m.insert_link(Link::new(LinkKind::Mitigates, "a", "o")).unwrap();
        let diags = validate_model(&m);
        assert_eq!(codes(&diags), vec![Code::V6, Code::V8]);
        assert!(diags.iter().all(|d| !d.is_error()));

        m.links.clear();
        m.insert_link(Link::new(LinkKind::Mitigates, "a", "o").with_strategy(Strategy::Repair))
            .unwrap();
        assert_eq!(codes(&validate_model(&m)), vec![Code::V6]);
    }

    #[test]
    fn v7_follows_refinement() {
        let mut m = Model::new("m");
        m.insert_element(el("v", ElementKind::Value)).unwrap();
        m.insert_element(el("g", ElementKind::Goal)).unwrap();
        m.insert_element(el("lonely", ElementKind::Value)).unwrap();
        m.insert_element(el("a", ElementKind::Activity)).unwrap();
        m.insert_link(Link::new(LinkKind::Contributes, "a", "g")).unwrap();
        m.insert_link(Link::new(LinkKind::Refines, "g", "v")).unwrap();
        let diags = validate_model(&m);
        assert_eq!(codes(&diags), vec![Code::V7]);
        assert!(diags[0].message.contains("lonely"));
    }

    #[test]
    fn hand_built_models_hit_v1_v2_v5() {
        let mut m = Model::new("m");
        m.elements.insert("a".into(), el("a", ElementKind::Activity));
        m.elements.insert("o".into(), el("o", ElementKind::Obstacle));
        let bad = Link::new(LinkKind::Refines, "a", "o");
        m.links.insert(bad.id.clone(), bad);
        let dangling = Link::new(LinkKind::Mitigates, "a", "ghost");
        m.links.insert(dangling.id.clone(), dangling);
        let mut f = Fragment::new("F");
        f.elements.insert("a".into());
        f.anchor = Some("a".into());
        m.fragments.insert("F".into(), f);
        let found: BTreeSet<Code> = validate_model(&m).iter().map(|d| d.code).collect();
        for code in [Code::V1, Code::V2, Code::V5] {
            assert!(found.contains(&code), "missing {code}");
        }
    }

    #[test]
    fn deterministic_output() {
        let mut m = Model::new("m");
        for i in 0..5 {
            m.insert_element(el(&format!("o{i}"), ElementKind::Obstacle)).unwrap();
        }
        assert_eq!(validate_model(&m), validate_model(&m.clone()));
    }
}
