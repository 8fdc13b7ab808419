//! Pattern documents, role-parameterized archetypes and instantiation.
//!
//! An archetype is a small model whose links may point at `$Role`
//! placeholders instead of concrete elements. Instantiating a pattern binds
//! every role either to an element already present in the target model or to
//! a freshly created one, then splices the archetype body into the target and
//! records the spliced elements as a new fragment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::diagnostic::{has_errors, Diagnostic};
use crate::model::{Dimension, Element, ElementKind, Fragment, Link, Model, ModelError, SourceInfo};
use crate::validator::{validate_model, validate_pattern};

pub const ROLE_SIGIL: char = '$';

/// Suffix attempts allowed per fresh identifier before giving up.
pub const MAX_FRESH_ATTEMPTS: usize = 1_000_000;

/// Returns the role name if `endpoint` is a `$Role` placeholder.
pub fn role_ref(endpoint: &str) -> Option<&str> {
    endpoint.strip_prefix(ROLE_SIGIL)
}

/// Lower-case, hyphen-separated form of a pattern name, e.g.
/// `"Violation Anticipation"` becomes `violation-anticipation`.
pub fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Role {
    pub name: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Archetype {
    /// Roles in declaration order.
    pub roles: Vec<Role>,
    /// Body elements and links. Link endpoints of the form `$Role` refer to
    /// roles rather than body elements.
    pub body: Model,
    pub explanation: Option<String>,
}

impl Archetype {
    pub fn role(&self, name: &str) -> Option<&Role> {
        self.roles.iter().find(|r| r.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.roles.is_empty() && self.body.elements.is_empty()
    }

    /// Roles referenced by a link endpoint or a `$Role` mention in a body
    /// element label.
    pub fn occurring_roles(&self) -> BTreeSet<String> {
        let mut found = BTreeSet::new();
        for link in self.body.links.values() {
            for endpoint in [&link.source, &link.target] {
                if let Some(role) = role_ref(endpoint) {
                    found.insert(role.to_string());
                }
            }
        }
        for element in self.body.elements.values() {
            for role in &self.roles {
                if mentions_role(&element.label, &role.name) {
                    found.insert(role.name.clone());
                }
            }
        }
        found
    }

    /// The body with every occurring declared role materialized as an
    /// ordinary element whose id is `$Role`.
    pub fn placeholder_model(&self, dims: &BTreeSet<Dimension>) -> Model {
        let mut model = self.body.clone();
        let occurring = self.occurring_roles();
        for role in &self.roles {
            if !occurring.contains(&role.name) {
                continue;
            }
            let id = format!("{ROLE_SIGIL}{}", role.name);
            let mut element = Element::new(id.clone(), role.kind, id.clone());
            element.dimensions = dims.clone();
            model.elements.insert(id, element);
        }
        model
    }

    /// Body size counted the way instantiation sees it: non-role elements
    /// plus occurring roles.
    pub fn size(&self) -> usize {
        self.body.elements.len() + self.occurring_roles().len()
    }
}

fn mentions_role(label: &str, role: &str) -> bool {
    let mut rest = label;
    while let Some(pos) = rest.find(ROLE_SIGIL) {
        let after = &rest[pos + 1..];
        let ident_len = after
            .find(|c: char| !is_ident_char(c))
            .unwrap_or(after.len());
        if &after[..ident_len] == role {
            return true;
        }
        rest = after;
    }
    false
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Replaces `$Role` mentions in `text` with the given substitutions; unknown
/// mentions are left as written.
pub fn substitute_roles(text: &str, labels: &BTreeMap<String, String>) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find(ROLE_SIGIL) {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 1..];
        let ident_len = after
            .find(|c: char| !is_ident_char(c))
            .unwrap_or(after.len());
        match labels.get(&after[..ident_len]) {
            Some(label) if ident_len > 0 => out.push_str(label),
            _ => {
                out.push(ROLE_SIGIL);
                out.push_str(&after[..ident_len]);
            }
        }
        rest = &after[ident_len..];
    }
    out.push_str(rest);
    out
}

/// A catalogue entry following the pattern documentation template.
#[derive(Debug, Clone, Default)]
pub struct PatternDoc {
    pub name: String,
    pub summary: String,
    pub category_primary: String,
    pub category_secondary: Option<String>,
    pub dimensions: BTreeSet<Dimension>,
    pub applicability: String,
    pub content: String,
    pub archetype: Archetype,
    pub example: String,
    pub discussion: Option<String>,
    pub related: Vec<String>,
    pub meta: BTreeMap<String, String>,
    pub source: SourceInfo,
}

impl PartialEq for PatternDoc {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.summary == other.summary
            && self.category_primary == other.category_primary
            && self.category_secondary == other.category_secondary
            && self.dimensions == other.dimensions
            && self.applicability == other.applicability
            && self.content == other.content
            && self.archetype == other.archetype
            && self.example == other.example
            && self.discussion == other.discussion
            && self.related == other.related
            && self.meta == other.meta
    }
}

impl Eq for PatternDoc {}

impl PatternDoc {
    pub fn slug(&self) -> String {
        slug(&self.name)
    }

    /// The `provenance` meta entry, if any.
    pub fn provenance(&self) -> Option<&str> {
        self.meta.get("provenance").map(String::as_str)
    }
}

/// Roles in declaration order.
pub fn free_roles(pattern: &PatternDoc) -> Vec<String> {
    pattern.archetype.roles.iter().map(|r| r.name.clone()).collect()
}

/// Element spec for a role bound to a newly created element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreshElement {
    pub label: String,
    pub kind: ElementKind,
    /// Empty means "inherit the pattern's dimensions".
    pub dimensions: BTreeSet<Dimension>,
    pub is_tagged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoleTarget {
    Existing(String),
    Fresh(FreshElement),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Binding {
    pub roles: BTreeMap<String, RoleTarget>,
}

impl Binding {
    pub fn bind(mut self, role: impl Into<String>, target: RoleTarget) -> Self {
        self.roles.insert(role.into(), target);
        self
    }

    pub fn existing(self, role: impl Into<String>, id: impl Into<String>) -> Self {
        self.bind(role, RoleTarget::Existing(id.into()))
    }
}

#[derive(Debug, Error)]
pub enum InstantiateError {
    #[error("role `{0}` is not bound")]
    UnboundRole(String),
    #[error("binding names `{0}`, which is not a role of the pattern")]
    UnknownRole(String),
    #[error("role `{role}` expects a {expected} but is bound to a {found}")]
    KindMismatch {
        role: String,
        expected: ElementKind,
        found: ElementKind,
    },
    #[error("role `{role}` is bound to unknown element `{id}`")]
    UnknownElement { role: String, id: String },
    #[error("anchor `{0}` does not exist in the target model")]
    AnchorUnknown(String),
    #[error("anchor `{0}` would be a member of the instantiated fragment")]
    AnchorInFragment(String),
    #[error("no free identifier found for prefix `{0}`")]
    CollisionExhausted(String),
    #[error("pattern is not valid: {}", summarize(.0))]
    InvalidPattern(Vec<Diagnostic>),
    #[error("target model has validation errors: {}", summarize(.0))]
    InvalidTarget(Vec<Diagnostic>),
    #[error("instantiation would introduce validation errors: {}", summarize(.0))]
    IntroducesErrors(Vec<Diagnostic>),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn summarize(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .filter(|d| d.is_error())
        .map(|d| format!("[{}] {}", d.code, d.message))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Deterministic `<prefix>.<n>` identifier source that skips ids already in
/// use.
struct FreshIds<'a> {
    model: &'a Model,
    prefix: String,
    next: usize,
    limit: usize,
    issued: BTreeSet<String>,
}

impl<'a> FreshIds<'a> {
    fn new(model: &'a Model, prefix: String, limit: usize) -> Self {
        FreshIds {
            model,
            prefix,
            next: 1,
            limit,
            issued: BTreeSet::new(),
        }
    }

    fn next_id(&mut self) -> Result<String, InstantiateError> {
        for _ in 0..self.limit {
            let candidate = format!("{}.{}", self.prefix, self.next);
            self.next += 1;
            if !self.model.contains_id(&candidate) && !self.issued.contains(&candidate) {
                self.issued.insert(candidate.clone());
                return Ok(candidate);
            }
        }
        Err(InstantiateError::CollisionExhausted(self.prefix.clone()))
    }
}

/// Splices `pattern`'s archetype into `target` according to `binding`.
///
/// The result contains everything in `target` unchanged, plus the
/// instantiated elements and links and one new fragment named after the
/// pattern (anchored at `anchor` when given).
pub fn instantiate(
    pattern: &PatternDoc,
    binding: &Binding,
    target: &Model,
    anchor: Option<&str>,
) -> Result<Model, InstantiateError> {
    instantiate_with_limit(pattern, binding, target, anchor, MAX_FRESH_ATTEMPTS)
}

fn instantiate_with_limit(
    pattern: &PatternDoc,
    binding: &Binding,
    target: &Model,
    anchor: Option<&str>,
    limit: usize,
) -> Result<Model, InstantiateError> {
    let pattern_diags = validate_pattern(pattern);
    if has_errors(&pattern_diags) {
        return Err(InstantiateError::InvalidPattern(pattern_diags));
    }
    let target_diags = validate_model(target);
    if has_errors(&target_diags) {
        return Err(InstantiateError::InvalidTarget(target_diags));
    }
    if let Some(anchor) = anchor {
        if !target.elements.contains_key(anchor) {
            return Err(InstantiateError::AnchorUnknown(anchor.to_string()));
        }
    }
    check_binding(pattern, binding, target)?;

    let archetype = &pattern.archetype;
    let occurring = archetype.occurring_roles();
    let prefix = pattern.slug();
    let mut ids = FreshIds::new(target, prefix.clone(), limit);

    // Role resolution: role name -> element id, and role name -> label for
    // `$Role` substitution.
    let mut role_ids = BTreeMap::new();
    let mut role_labels = BTreeMap::new();
    let mut fresh_roles = Vec::new();
    for role in &archetype.roles {
        match &binding.roles[&role.name] {
            RoleTarget::Existing(id) => {
                role_ids.insert(role.name.clone(), id.clone());
                role_labels.insert(role.name.clone(), target.elements[id].label.clone());
            }
            RoleTarget::Fresh(fresh) => {
                role_labels.insert(role.name.clone(), fresh.label.clone());
                if occurring.contains(&role.name) {
                    let id = ids.next_id()?;
                    role_ids.insert(role.name.clone(), id.clone());
                    fresh_roles.push((id, role, fresh));
                }
            }
        }
    }

    let mut result = target.clone();
    let mut fragment = Fragment::new(fragment_name(target, &prefix, limit)?);
    fragment.anchor = anchor.map(str::to_string);

    let stamp = |element: &mut Element| {
        element
            .attrs
            .insert("pattern".to_string(), pattern.name.clone());
    };

    for (id, role, fresh) in fresh_roles {
        let mut element = Element::new(id.clone(), role.kind, substitute_roles(&fresh.label, &role_labels));
        element.dimensions = if fresh.dimensions.is_empty() {
            pattern.dimensions.clone()
        } else {
            fresh.dimensions.clone()
        };
        element.is_tagged = fresh.is_tagged;
        element.attrs.insert("role".to_string(), role.name.clone());
        stamp(&mut element);
        result.insert_element(element)?;
        fragment.elements.insert(id);
    }
    for role in &occurring {
        if let Some(id) = role_ids.get(role) {
            fragment.elements.insert(id.clone());
        }
    }

    let mut element_ids = BTreeMap::new();
    for (body_id, body_element) in &archetype.body.elements {
        let id = ids.next_id()?;
        let mut element = body_element.clone();
        element.id = id.clone();
        element.label = substitute_roles(&element.label, &role_labels);
        if element.dimensions.is_empty() && element.kind.requires_dimensions() {
            element.dimensions = pattern.dimensions.clone();
        }
        stamp(&mut element);
        result.insert_element(element)?;
        element_ids.insert(body_id.clone(), id.clone());
        fragment.elements.insert(id);
    }

    let resolve = |endpoint: &str| -> String {
        match role_ref(endpoint) {
            Some(role) => role_ids[role].clone(),
            None => element_ids[endpoint].clone(),
        }
    };
    for body_link in archetype.body.links.values() {
        let link = Link {
            id: ids.next_id()?,
            kind: body_link.kind,
            source: resolve(&body_link.source),
            target: resolve(&body_link.target),
            strategy: body_link.strategy,
        };
        fragment.links.insert(link.id.clone());
        result.insert_link(link)?;
    }

    if let Some(anchor) = anchor {
        if fragment.elements.contains(anchor) {
            return Err(InstantiateError::AnchorInFragment(anchor.to_string()));
        }
    }
    result.insert_fragment(fragment)?;

    let result_diags = validate_model(&result);
    if has_errors(&result_diags) {
        return Err(InstantiateError::IntroducesErrors(
            result_diags.into_iter().filter(Diagnostic::is_error).collect(),
        ));
    }
    Ok(result)
}

fn check_binding(pattern: &PatternDoc, binding: &Binding, target: &Model) -> Result<(), InstantiateError> {
    if let Some(name) = binding
        .roles
        .keys()
        .find(|name| pattern.archetype.role(name).is_none())
    {
        return Err(InstantiateError::UnknownRole(name.clone()));
    }
    for role in &pattern.archetype.roles {
        let found = match binding.roles.get(&role.name) {
            None => return Err(InstantiateError::UnboundRole(role.name.clone())),
            Some(RoleTarget::Existing(id)) => match target.elements.get(id) {
                Some(element) => element.kind,
                None => {
                    return Err(InstantiateError::UnknownElement {
                        role: role.name.clone(),
                        id: id.clone(),
                    })
                }
            },
            Some(RoleTarget::Fresh(fresh)) => fresh.kind,
        };
        if found != role.kind {
            return Err(InstantiateError::KindMismatch {
                role: role.name.clone(),
                expected: role.kind,
                found,
            });
        }
    }
    Ok(())
}

fn fragment_name(target: &Model, prefix: &str, limit: usize) -> Result<String, InstantiateError> {
    if !target.fragments.contains_key(prefix) {
        return Ok(prefix.to_string());
    }
    (2..limit.saturating_add(2))
        .map(|n| format!("{prefix}-{n}"))
        .find(|name| !target.fragments.contains_key(name))
        .ok_or_else(|| InstantiateError::CollisionExhausted(prefix.to_string()))
}

/// What an instantiation added to a model.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstantiationSummary {
    pub pattern: String,
    pub added_elements: Vec<String>,
    pub added_links: Vec<String>,
    pub added_fragments: Vec<String>,
}

impl fmt::Display for InstantiationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "pattern: {}", self.pattern)?;
        writeln!(f, "added elements: {}", self.added_elements.len())?;
        for id in &self.added_elements {
            writeln!(f, "  + {id}")?;
        }
        writeln!(f, "added links: {}", self.added_links.len())?;
        for id in &self.added_links {
            writeln!(f, "  + {id}")?;
        }
        writeln!(f, "added fragments: {}", self.added_fragments.len())?;
        for name in &self.added_fragments {
            writeln!(f, "  + {name}")?;
        }
        Ok(())
    }
}

pub fn diff_instantiation(before: &Model, after: &Model, pattern: &PatternDoc) -> InstantiationSummary {
    fn added<V>(before: &BTreeMap<String, V>, after: &BTreeMap<String, V>) -> Vec<String> {
        after.keys().filter(|k| !before.contains_key(*k)).cloned().collect()
    }
    InstantiationSummary {
        pattern: pattern.name.clone(),
        added_elements: added(&before.elements, &after.elements),
        added_links: added(&before.links, &after.links),
        added_fragments: added(&before.fragments, &after.fragments),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LinkKind, Strategy};

    fn social() -> BTreeSet<Dimension> {
        BTreeSet::from([Dimension::Social])
    }

    fn fresh(label: &str, kind: ElementKind) -> RoleTarget {
        RoleTarget::Fresh(FreshElement {
            label: label.into(),
            kind,
            dimensions: BTreeSet::new(),
            is_tagged: false,
        })
    }

    /// Obstacle `Threat` obstructs `$Target`; `$Fix` mitigates it.
    fn guard_pattern() -> PatternDoc {
        let mut body = Model::new("archetype");
        body.elements.insert(
            "Threat".into(),
            Element::new("Threat", ElementKind::Obstacle, "threat to $Target").with_dims([Dimension::Social]),
        );
        for link in [
            Link::new(LinkKind::Obstructs, "Threat", "$Target"),
            Link::new(LinkKind::Mitigates, "$Fix", "Threat").with_strategy(Strategy::Avoidance),
        ] {
            body.links.insert(link.id.clone(), link);
        }
        PatternDoc {
            name: "Guard Rail".into(),
            summary: "s".into(),
            category_primary: "Implementation".into(),
            dimensions: social(),
            applicability: "a".into(),
            content: "c".into(),
            example: "e".into(),
            archetype: Archetype {
                roles: vec![
                    Role { name: "Target".into(), kind: ElementKind::Activity },
                    Role { name: "Fix".into(), kind: ElementKind::Activity },
                ],
                body,
                explanation: None,
            },
            ..PatternDoc::default()
        }
    }

    fn target() -> Model {
        Model::new("t")
            .add_element(Element::new("Care", ElementKind::Activity, "provide care").with_dims(social()))
            .unwrap()
            .add_element(Element::new("Staff", ElementKind::Stakeholder, "staff"))
            .unwrap()
            .add_link(Link::new(LinkKind::ResponsibleFor, "Staff", "Care"))
            .unwrap()
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("Violation Anticipation"), "violation-anticipation");
        assert_eq!(slug("  Design for Re-use!"), "design-for-re-use");
    }

    #[test]
    fn role_substitution() {
        let labels = BTreeMap::from([("A".to_string(), "alpha".to_string())]);
        assert_eq!(substitute_roles("x $A y $B $", &labels), "x alpha y $B $");
        assert!(mentions_role("guard $Target now", "Target"));
        assert!(!mentions_role("guard $Targets", "Target"));
    }

    #[test]
    fn free_roles_in_declaration_order() {
        assert_eq!(free_roles(&guard_pattern()), vec!["Target", "Fix"]);
        assert!(free_roles(&PatternDoc::default()).is_empty());
    }

    #[test]
    fn splice_adds_fragment_and_fresh_elements() {
        let pattern = guard_pattern();
        let binding = Binding::default()
            .existing("Target", "Care")
            .bind("Fix", fresh("add staff", ElementKind::Activity));
        let before = target();
        let after = instantiate(&pattern, &binding, &before, Some("Staff")).unwrap();
        let diff = diff_instantiation(&before, &after, &pattern);
        assert_eq!(diff.added_elements, vec!["guard-rail.1", "guard-rail.2"]);
        assert_eq!(diff.added_links.len(), 2);
        assert_eq!(diff.added_fragments, vec!["guard-rail"]);
        assert_eq!(after.elements["guard-rail.2"].label, "threat to provide care");
        let fragment = &after.fragments["guard-rail"];
        assert!(fragment.elements.contains("Care"));
        assert_eq!(fragment.anchor.as_deref(), Some("Staff"));
        for (id, element) in &before.elements {
            assert_eq!(&after.elements[id], element);
        }
    }

    #[test]
    fn binding_errors() {
        let pattern = guard_pattern();
        let model = target();
        let partial = Binding::default().existing("Target", "Care");
        assert!(matches!(
            instantiate(&pattern, &partial, &model, None),
            Err(InstantiateError::UnboundRole(r)) if r == "Fix"
        ));
        let wrong_kind = Binding::default()
            .existing("Target", "Staff")
            .bind("Fix", fresh("f", ElementKind::Activity));
        assert!(matches!(
            instantiate(&pattern, &wrong_kind, &model, None),
            Err(InstantiateError::KindMismatch { .. })
        ));
        let ok = Binding::default()
            .existing("Target", "Care")
            .bind("Fix", fresh("f", ElementKind::Activity));
        assert!(matches!(
            instantiate(&pattern, &ok, &model, Some("Nope")),
            Err(InstantiateError::AnchorUnknown(_))
        ));
        assert!(matches!(
            instantiate(&pattern, &ok, &model, Some("Care")),
            Err(InstantiateError::AnchorInFragment(_))
        ));
        let extra = ok.clone().existing("Ghost", "Care");
        assert!(matches!(
            instantiate(&pattern, &extra, &model, None),
            Err(InstantiateError::UnknownRole(_))
        ));
    }

    #[test]
    fn second_splice_uses_new_ids_and_fragment_name() {
        let pattern = guard_pattern();
        let binding = Binding::default()
            .existing("Target", "Care")
            .bind("Fix", fresh("f", ElementKind::Activity));
        let once = instantiate(&pattern, &binding, &target(), None).unwrap();
        let twice = instantiate(&pattern, &binding, &once, None).unwrap();
        let first = diff_instantiation(&target(), &once, &pattern);
        let second = diff_instantiation(&once, &twice, &pattern);
        assert!(first.added_elements.iter().all(|id| !second.added_elements.contains(id)));
        assert_eq!(second.added_fragments, vec!["guard-rail-2"]);
    }

    #[test]
    fn identity_splice_adds_only_a_fragment() {
        let mut pattern = guard_pattern();
        pattern.archetype.body = Model::new("archetype");
        let link = Link::new(LinkKind::ResponsibleFor, "$Who", "$Target");
        pattern.archetype.body.links.insert(link.id.clone(), link);
        pattern.archetype.roles = vec![
            Role { name: "Who".into(), kind: ElementKind::Stakeholder },
            Role { name: "Target".into(), kind: ElementKind::Activity },
        ];
        let binding = Binding::default().existing("Who", "Staff").existing("Target", "Care");
        let before = target();
        let after = instantiate(&pattern, &binding, &before, None).unwrap();
        let diff = diff_instantiation(&before, &after, &pattern);
        assert!(diff.added_elements.is_empty());
        assert_eq!(diff.added_fragments.len(), 1);
    }

    #[test]
    fn fresh_ids_give_up_after_limit() {
        let mut model = target();
        for n in 1..=3 {
            let id = format!("guard-rail.{n}");
            model
                .insert_element(Element::new(id, ElementKind::Assumption, ""))
                .unwrap();
        }
        let binding = Binding::default()
            .existing("Target", "Care")
            .bind("Fix", fresh("f", ElementKind::Activity));
        let err = instantiate_with_limit(&guard_pattern(), &binding, &model, None, 3).unwrap_err();
        assert!(matches!(err, InstantiateError::CollisionExhausted(p) if p == "guard-rail"));
    }
}
