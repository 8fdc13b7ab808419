#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use susmod::model::{Dimension, Element, ElementKind, Link, LinkKind, Model, Strategy as Mitigation};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn corpus(path: &str) -> PathBuf {
    corpus_dir().join(path)
}

pub fn element_kind() -> impl Strategy<Value = ElementKind> {
    prop::sample::select(ElementKind::ALL.to_vec())
}

pub fn link_kind() -> impl Strategy<Value = LinkKind> {
    prop::sample::select(LinkKind::ALL.to_vec())
}

pub fn dimensions() -> impl Strategy<Value = BTreeSet<Dimension>> {
    prop::collection::btree_set(prop::sample::select(Dimension::ALL.to_vec()), 0..3)
}

pub fn strategy() -> impl Strategy<Value = Option<Mitigation>> {
    prop::option::of(prop::sample::select(Mitigation::ALL.to_vec()))
}

/// Models with up to `max` elements `e0..`, arbitrary kinds and dimensions,
/// and random links added without endpoint-kind checks. Strategies only
/// appear on mitigations.
pub fn raw_model(max: usize) -> impl Strategy<Value = Model> {
    model_over(max, element_kind().boxed(), link_kind().boxed())
}

/// Mostly values and goals joined by refinements, so cycles are common.
pub fn refinement_model(max: usize) -> impl Strategy<Value = Model> {
    model_over(
        max,
        prop::sample::select(vec![ElementKind::Value, ElementKind::Goal, ElementKind::Goal, ElementKind::Activity]).boxed(),
        prop::sample::select(vec![LinkKind::Refines, LinkKind::Refines, LinkKind::Refines, LinkKind::Contributes]).boxed(),
    )
}

fn model_over(max: usize, kinds: BoxedStrategy<ElementKind>, links: BoxedStrategy<LinkKind>) -> impl Strategy<Value = Model> {
    (1..=max)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((kinds.clone(), dimensions(), any::<bool>()), n),
                prop::collection::vec((links.clone(), 0..n, 0..n, strategy()), 0..(2 * n + 1)),
            )
        })
        .prop_map(|(elements, links)| {
            let mut model = Model::new("random");
            for (i, (kind, dims, tagged)) in elements.into_iter().enumerate() {
                let mut e = Element::new(format!("e{i}"), kind, format!("element {i}"));
                e.dimensions = dims;
                e.is_tagged = tagged;
                model.elements.insert(e.id.clone(), e);
            }
            for (kind, s, t, strat) in links {
                let mut link = Link::new(kind, format!("e{s}"), format!("e{t}"));
                if kind == LinkKind::Mitigates {
                    link.strategy = strat;
                }
                let _ = model.insert_link_unchecked_kinds(link);
            }
            model
        })
}

pub fn allowed(kind: LinkKind, source: ElementKind, target: ElementKind) -> bool {
    susmod_oracles::kinds::link_allowed(kind.as_str(), source.as_str(), target.as_str())
}

pub fn needs_dimensions(kind: ElementKind) -> bool {
    susmod_oracles::kinds::requires_dimensions(kind.as_str())
}

/// Identifier-shaped strings for round-trip fixtures.
pub fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z][A-Za-z0-9_]{0,6}"
}

/// Label text including characters that need escaping.
pub fn text() -> impl Strategy<Value = String> {
    "[ -~\n\t]{0,16}"
}

pub fn covid() -> Model {
    susmod::dsl::load_model(&corpus("covid/covid.susm")).unwrap().value
}

pub fn violation_anticipation() -> susmod::PatternDoc {
    susmod::dsl::load_pattern(&corpus("fairness/violation_anticipation.susp")).unwrap().value
}

pub fn va_binding() -> susmod::Binding {
    susmod::dsl::load_binding(&corpus("covid/va.binding")).unwrap().value
}

pub fn fairness() -> susmod::Catalogue {
    susmod::dsl::load_catalogue(&corpus("fairness/fairness.susc")).unwrap().value
}

pub fn circular() -> susmod::Catalogue {
    susmod::dsl::load_catalogue(&corpus("circular/circular.susc")).unwrap().value
}
