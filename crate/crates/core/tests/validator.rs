mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use susmod::diagnostic::Code;
use susmod::model::{Dimension, Element, ElementKind, Fragment, Link, LinkKind, Model};
use susmod::validator::validate_model;
use susmod_oracles::{all_pairs_connected, nodes_on_cycles};

use common::{allowed, needs_dimensions, raw_model, refinement_model};

fn index_of(id: &str) -> usize {
    id.trim_start_matches('e').parse().unwrap()
}

/// Ids mentioned in backticks in a diagnostic message.
fn quoted(message: &str) -> Vec<String> {
    message.split('`').skip(1).step_by(2).map(str::to_string).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn v2_matches_endpoint_table(model in raw_model(12)) {
        let expected_links: BTreeSet<String> = model
            .links
            .values()
            .filter(|l| !allowed(l.kind, model.elements[&l.source].kind, model.elements[&l.target].kind))
            .map(|l| l.id.clone())
            .collect();
        let expected_elements: BTreeSet<String> = model
            .elements
            .values()
            .filter(|e| needs_dimensions(e.kind) && e.dimensions.is_empty())
            .map(|e| e.id.clone())
            .collect();
        let mut flagged_links = BTreeSet::new();
        let mut flagged_elements = BTreeSet::new();
        for d in validate_model(&model).iter().filter(|d| d.code == Code::V2) {
            let id = quoted(&d.message).remove(0);
            if model.links.contains_key(&id) {
                flagged_links.insert(id);
            } else {
                flagged_elements.insert(id);
            }
        }
        prop_assert_eq!(flagged_links, expected_links);
        prop_assert_eq!(flagged_elements, expected_elements);
    }

    #[test]
    fn v3_matches_simple_path_oracle(model in prop_oneof![raw_model(12), refinement_model(12)]) {
        let refinable = |id: &str| matches!(model.elements[id].kind, ElementKind::Value | ElementKind::Goal);
        let edges: Vec<(usize, usize)> = model
            .links
            .values()
            .filter(|l| l.kind == LinkKind::Refines && refinable(&l.source) && refinable(&l.target))
            .map(|l| (index_of(&l.source), index_of(&l.target)))
            .collect();
        let expected: BTreeSet<String> = nodes_on_cycles(model.elements.len(), &edges)
            .into_iter()
            .map(|i| format!("e{i}"))
            .collect();
        let mut reported = BTreeSet::new();
        for d in validate_model(&model).iter().filter(|d| d.code == Code::V3) {
            let members = d.message.trim_start_matches("refinement cycle through ");
            for id in members.split(", ") {
                prop_assert!(reported.insert(id.to_string()), "element {} reported twice", id);
            }
        }
        prop_assert_eq!(reported, expected);
    }

    #[test]
    fn v4_connectivity_matches_reachability(
        (model, members) in raw_model(10).prop_flat_map(|m| {
            let n = m.elements.len();
            (Just(m), prop::collection::btree_set(0..n, 1..=n))
        })
    ) {
        let mut model = model;
        let ids: BTreeSet<String> = members.iter().map(|i| format!("e{i}")).collect();
        model.fragments.insert("F".into(), Fragment {
            name: "F".into(),
            elements: ids.clone(),
            ..Fragment::default()
        });
        let local: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let edges: Vec<(usize, usize)> = model
            .links
            .values()
            .filter_map(|l| Some((*local.get(l.source.as_str())?, *local.get(l.target.as_str())?)))
            .collect();
        let connected = all_pairs_connected(ids.len(), &edges);
        let reported = validate_model(&model)
            .iter()
            .any(|d| d.code == Code::V4 && d.message.contains("not connected"));
        prop_assert_eq!(reported, !connected);
    }

    #[test]
    fn diagnostics_are_sorted_and_unique(model in raw_model(12)) {
        let diags = validate_model(&model);
        let mut sorted = diags.clone();
        sorted.sort();
        sorted.dedup();
        prop_assert_eq!(diags, sorted);
    }
}

fn el(id: &str, kind: ElementKind) -> Element {
    Element::new(id, kind, id).with_dims([Dimension::Social])
}

#[test]
fn clean_model_has_no_diagnostics() {
    let model = Model::new("m")
        .add_element(el("V", ElementKind::Value))
        .unwrap()
        .add_element(el("G", ElementKind::Goal))
        .unwrap()
        .add_element(el("A", ElementKind::Activity))
        .unwrap()
        .add_link(Link::new(LinkKind::Refines, "G", "V"))
        .unwrap()
        .add_link(Link::new(LinkKind::Contributes, "A", "G"))
        .unwrap();
    assert!(validate_model(&model).is_empty());
}

#[test]
fn warnings_for_unmitigated_and_unsupported() {
    let mut model = Model::new("m");
    model.insert_element(el("V", ElementKind::Value)).unwrap();
    model.insert_element(el("O", ElementKind::Obstacle)).unwrap();
    model.insert_element(el("A", ElementKind::Activity)).unwrap();
    model.insert_link(Link::new(LinkKind::Obstructs, "O", "V")).unwrap();
    model.insert_link(Link::new(LinkKind::Mitigates, "A", "O")).unwrap();
    let codes: Vec<Code> = validate_model(&model).iter().map(|d| d.code).collect();
    assert_eq!(codes, vec![Code::V7, Code::V8]);
    assert!(validate_model(&model).iter().all(|d| !d.is_error()));
}

#[test]
fn anchor_rules() {
    let mut model = Model::new("m");
    model.insert_element(el("V", ElementKind::Value)).unwrap();
    model.fragments.insert("F".into(), Fragment {
        name: "F".into(),
        elements: ["V".to_string()].into(),
        links: BTreeSet::new(),
        anchor: Some("V".into()),
    });
    model.fragments.insert("G".into(), Fragment {
        name: "G".into(),
        elements: ["V".to_string()].into(),
        links: BTreeSet::new(),
        anchor: Some("Missing".into()),
    });
    let v5 = validate_model(&model).into_iter().filter(|d| d.code == Code::V5).count();
    assert_eq!(v5, 2);
}

#[test]
fn empty_fragment_and_escaping_link() {
    let mut model = Model::new("m");
    model.insert_element(el("G", ElementKind::Goal)).unwrap();
    model.insert_element(el("V", ElementKind::Value)).unwrap();
    model.insert_link(Link::new(LinkKind::Refines, "G", "V")).unwrap();
    model.fragments.insert("Empty".into(), Fragment::new("Empty"));
    model.fragments.insert("Leaky".into(), Fragment {
        name: "Leaky".into(),
        elements: ["G".to_string()].into(),
        links: ["G.refines.V".to_string()].into(),
        anchor: None,
    });
    let messages: Vec<String> = validate_model(&model)
        .into_iter()
        .filter(|d| d.code == Code::V4)
        .map(|d| d.message)
        .collect();
    assert_eq!(messages.len(), 2, "{messages:?}");
    assert!(messages.iter().any(|m| m.contains("empty")));
    assert!(messages.iter().any(|m| m.contains("leave the fragment")));
}
