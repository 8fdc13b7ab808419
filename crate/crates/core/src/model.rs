//! In-memory sustainability model: elements, kinded links and fragments.
//!
//! A [`Model`] is a plain value. The checked constructors (`add_element`,
//! `add_link`, `add_fragment`) enforce the structural invariants; the maps
//! are public so tooling can also build models directly and rely on the
//! validator to report whatever is wrong with them.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::diagnostic::SourceSpan;

/// One of the five canonical sustainability dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dimension {
    Environmental,
    Economic,
    Social,
    Personal,
    Technical,
}

impl Dimension {
    pub const ALL: [Dimension; 5] = [
        Dimension::Environmental,
        Dimension::Economic,
        Dimension::Social,
        Dimension::Personal,
        Dimension::Technical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Environmental => "environmental",
            Dimension::Economic => "economic",
            Dimension::Social => "social",
            Dimension::Personal => "personal",
            Dimension::Technical => "technical",
        }
    }

    /// Resolves a dimension name. The second component is `true` when the
    /// name was an alias that had to be normalized.
    pub fn lookup(name: &str) -> Option<(Dimension, bool)> {
        let canonical = match name {
            "environmental" => Dimension::Environmental,
            "economic" => Dimension::Economic,
            "social" => Dimension::Social,
            "personal" => Dimension::Personal,
            "technical" => Dimension::Technical,
            "financial" => return Some((Dimension::Economic, true)),
            "individual" => return Some((Dimension::Personal, true)),
            _ => return None,
        };
        Some((canonical, false))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Value,
    Goal,
    Activity,
    Obstacle,
    Assumption,
    Regulation,
    Resource,
    Indicator,
    Stakeholder,
}

impl ElementKind {
    pub const ALL: [ElementKind; 9] = [
        ElementKind::Value,
        ElementKind::Goal,
        ElementKind::Activity,
        ElementKind::Obstacle,
        ElementKind::Assumption,
        ElementKind::Regulation,
        ElementKind::Resource,
        ElementKind::Indicator,
        ElementKind::Stakeholder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Value => "value",
            ElementKind::Goal => "goal",
            ElementKind::Activity => "activity",
            ElementKind::Obstacle => "obstacle",
            ElementKind::Assumption => "assumption",
            ElementKind::Regulation => "regulation",
            ElementKind::Resource => "resource",
            ElementKind::Indicator => "indicator",
            ElementKind::Stakeholder => "stakeholder",
        }
    }

    /// Kinds that must carry at least one dimension.
    pub fn requires_dimensions(self) -> bool {
        matches!(
            self,
            ElementKind::Value
                | ElementKind::Goal
                | ElementKind::Activity
                | ElementKind::Obstacle
                | ElementKind::Resource
        )
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkKind {
    Refines,
    Contributes,
    Obstructs,
    Mitigates,
    Monitors,
    UsesResource,
    ResponsibleFor,
}

impl LinkKind {
    pub const ALL: [LinkKind; 7] = [
        LinkKind::Refines,
        LinkKind::Contributes,
        LinkKind::Obstructs,
        LinkKind::Mitigates,
        LinkKind::Monitors,
        LinkKind::UsesResource,
        LinkKind::ResponsibleFor,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LinkKind::Refines => "refines",
            LinkKind::Contributes => "contributes",
            LinkKind::Obstructs => "obstructs",
            LinkKind::Mitigates => "mitigates",
            LinkKind::Monitors => "monitors",
            LinkKind::UsesResource => "uses_resource",
            LinkKind::ResponsibleFor => "responsible_for",
        }
    }

    /// The endpoint-kind table: whether a link of this kind may go from an
    /// element of kind `source` to one of kind `target`.
    pub fn admits(self, source: ElementKind, target: ElementKind) -> bool {
        use ElementKind::*;
        match self {
            LinkKind::Refines => matches!(
                (source, target),
                (Value, Value) | (Goal, Goal) | (Goal, Value)
            ),
            LinkKind::Contributes => {
                matches!(source, Activity | Assumption | Regulation) && matches!(target, Value | Goal)
            }
            LinkKind::Obstructs => source == Obstacle && matches!(target, Value | Goal | Activity),
            LinkKind::Mitigates => source == Activity && target == Obstacle,
            LinkKind::Monitors => {
                source == Indicator && matches!(target, Value | Goal | Activity | Resource)
            }
            LinkKind::UsesResource => source == Activity && target == Resource,
            LinkKind::ResponsibleFor => source == Stakeholder && target == Activity,
        }
    }
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LinkKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LinkKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

/// How a mitigating activity counters an obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Avoidance,
    Anticipation,
    Repair,
    DegradedMode,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Strategy::Avoidance,
        Strategy::Anticipation,
        Strategy::Repair,
        Strategy::DegradedMode,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Avoidance => "avoidance",
            Strategy::Anticipation => "anticipation",
            Strategy::Repair => "repair",
            Strategy::DegradedMode => "degraded_mode",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub id: String,
    pub kind: ElementKind,
    pub label: String,
    pub dimensions: BTreeSet<Dimension>,
    /// Membership of the information-system part of the model.
    pub is_tagged: bool,
    pub attrs: BTreeMap<String, String>,
}

impl Element {
    pub fn new(id: impl Into<String>, kind: ElementKind, label: impl Into<String>) -> Self {
        Element {
            id: id.into(),
            kind,
            label: label.into(),
            dimensions: BTreeSet::new(),
            is_tagged: false,
            attrs: BTreeMap::new(),
        }
    }

    pub fn with_dims(mut self, dims: impl IntoIterator<Item = Dimension>) -> Self {
        self.dimensions.extend(dims);
        self
    }

    pub fn tagged(mut self) -> Self {
        self.is_tagged = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub id: String,
    pub kind: LinkKind,
    pub source: String,
    pub target: String,
    pub strategy: Option<Strategy>,
}

impl Link {
    /// Builds a link whose id is derived from its kind and endpoints.
    pub fn new(kind: LinkKind, source: impl Into<String>, target: impl Into<String>) -> Self {
        let source = source.into();
        let target = target.into();
        Link {
            id: Link::default_id(kind, &source, &target),
            kind,
            source,
            target,
            strategy: None,
        }
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = Some(strategy);
        self
    }

    /// The id a link gets when its declaration does not name one.
    pub fn default_id(kind: LinkKind, source: &str, target: &str) -> String {
        format!("{source}.{kind}.{target}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Fragment {
    pub name: String,
    pub elements: BTreeSet<String>,
    pub links: BTreeSet<String>,
    pub anchor: Option<String>,
}

impl Fragment {
    pub fn new(name: impl Into<String>) -> Self {
        Fragment {
            name: name.into(),
            ..Fragment::default()
        }
    }
}

/// Where the pieces of a parsed document came from. Never part of equality.
#[derive(Debug, Clone, Default)]
pub struct SourceInfo {
    pub file: Option<PathBuf>,
    /// Spans keyed by `element:<id>`, `link:<id>`, `fragment:<name>`,
    /// `role:<name>`, `related:<name>`, `field:<name>`, `header`, ...
    pub spans: BTreeMap<String, SourceSpan>,
    /// Sub-documents stored in their own file, keyed by fragment or pattern
    /// name; the value is the path as written in the parent document.
    pub external: BTreeMap<String, String>,
}

impl SourceInfo {
    pub fn span(&self, key: &str) -> Option<&SourceSpan> {
        self.spans.get(key)
    }

    /// Span stored under `<prefix>:<name>`.
    pub fn keyed(&self, prefix: &str, name: &str) -> Option<SourceSpan> {
        self.spans.get(&format!("{prefix}:{name}")).cloned()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("identifier must not be empty")]
    EmptyId,
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("unknown identifier `{0}`")]
    UnknownId(String),
    #[error("{kind} `{id}` must carry at least one dimension")]
    MissingDimensions { id: String, kind: ElementKind },
    #[error("link `{link}` refers to unknown element `{endpoint}`")]
    DanglingEndpoint { link: String, endpoint: String },
    #[error("link `{link}`: {kind} cannot go from {source_kind} to {target_kind}")]
    IllegalEndpointKinds {
        link: String,
        kind: LinkKind,
        source_kind: ElementKind,
        target_kind: ElementKind,
    },
    #[error("link `{0}` carries a strategy but is not a mitigates link")]
    StrategyOnNonMitigation(String),
    #[error("duplicate fragment `{0}`")]
    DuplicateFragment(String),
    #[error("fragment `{fragment}` holds link `{link}` whose endpoints leave the fragment")]
    LinkEscapesFragment { fragment: String, link: String },
    #[error("fragment `{fragment}` is anchored at its own member `{anchor}`")]
    AnchorInsideFragment { fragment: String, anchor: String },
}

#[derive(Debug, Clone, Default)]
pub struct Model {
    pub name: String,
    pub elements: BTreeMap<String, Element>,
    pub links: BTreeMap<String, Link>,
    pub fragments: BTreeMap<String, Fragment>,
    pub meta: BTreeMap<String, String>,
    pub source: SourceInfo,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.elements == other.elements
            && self.links == other.links
            && self.fragments == other.fragments
            && self.meta == other.meta
    }
}

impl Eq for Model {}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Model {
            name: name.into(),
            ..Model::default()
        }
    }

    /// True when `id` names an element or a link.
    pub fn contains_id(&self, id: &str) -> bool {
        self.elements.contains_key(id) || self.links.contains_key(id)
    }

    pub fn element(&self, id: &str) -> Option<&Element> {
        self.elements.get(id)
    }

    pub fn add_element(mut self, element: Element) -> Result<Model, ModelError> {
        self.insert_element(element)?;
        Ok(self)
    }

    pub fn add_link(mut self, link: Link) -> Result<Model, ModelError> {
        self.insert_link(link)?;
        Ok(self)
    }

    pub fn add_fragment(mut self, fragment: Fragment) -> Result<Model, ModelError> {
        self.insert_fragment(fragment)?;
        Ok(self)
    }

    /// In-place variant of [`Model::add_element`].
    pub fn insert_element(&mut self, element: Element) -> Result<(), ModelError> {
        if element.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if self.contains_id(&element.id) {
            return Err(ModelError::DuplicateId(element.id));
        }
        if element.kind.requires_dimensions() && element.dimensions.is_empty() {
            return Err(ModelError::MissingDimensions {
                id: element.id,
                kind: element.kind,
            });
        }
        self.elements.insert(element.id.clone(), element);
        Ok(())
    }

    /// In-place variant of [`Model::add_link`].
    pub fn insert_link(&mut self, link: Link) -> Result<(), ModelError> {
        self.check_link_structure(&link)?;
        check_link_kinds(self, &link)?;
        self.links.insert(link.id.clone(), link);
        Ok(())
    }

    /// Stores a link whose endpoints resolve without consulting the kind
    /// table. Used by the parser so kind violations surface as validator
    /// diagnostics with source positions.
    pub fn insert_link_unchecked_kinds(&mut self, link: Link) -> Result<(), ModelError> {
        self.check_link_structure(&link)?;
        self.links.insert(link.id.clone(), link);
        Ok(())
    }

    fn check_link_structure(&self, link: &Link) -> Result<(), ModelError> {
        if link.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if self.contains_id(&link.id) {
            return Err(ModelError::DuplicateId(link.id.clone()));
        }
        for endpoint in [&link.source, &link.target] {
            if !self.elements.contains_key(endpoint) {
                return Err(ModelError::DanglingEndpoint {
                    link: link.id.clone(),
                    endpoint: endpoint.clone(),
                });
            }
        }
        Ok(())
    }

    /// In-place variant of [`Model::add_fragment`]. Connectivity is not
    /// checked here; that is the validator's job.
    pub fn insert_fragment(&mut self, fragment: Fragment) -> Result<(), ModelError> {
        if fragment.name.is_empty() {
            return Err(ModelError::EmptyId);
        }
        if self.fragments.contains_key(&fragment.name) {
            return Err(ModelError::DuplicateFragment(fragment.name));
        }
        for id in &fragment.elements {
            if !self.elements.contains_key(id) {
                return Err(ModelError::UnknownId(id.clone()));
            }
        }
        for id in &fragment.links {
            let link = self
                .links
                .get(id)
                .ok_or_else(|| ModelError::UnknownId(id.clone()))?;
            if !fragment.elements.contains(&link.source) || !fragment.elements.contains(&link.target) {
                return Err(ModelError::LinkEscapesFragment {
                    fragment: fragment.name.clone(),
                    link: id.clone(),
                });
            }
        }
        if let Some(anchor) = &fragment.anchor {
            if !self.elements.contains_key(anchor) {
                return Err(ModelError::UnknownId(anchor.clone()));
            }
            if fragment.elements.contains(anchor) {
                return Err(ModelError::AnchorInsideFragment {
                    fragment: fragment.name.clone(),
                    anchor: anchor.clone(),
                });
            }
        }
        self.fragments.insert(fragment.name.clone(), fragment);
        Ok(())
    }

    /// Partitions `subset` into connected components of the undirected graph
    /// induced by the model's links restricted to the subset. Components are
    /// sorted internally and ordered by their smallest member.
    pub fn undirected_components<'a, I>(&self, subset: I) -> Result<Vec<Vec<String>>, ModelError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut members = BTreeSet::new();
        for id in subset {
            if !self.elements.contains_key(id) {
                return Err(ModelError::UnknownId(id.to_string()));
            }
            members.insert(id);
        }

        let mut adjacency: BTreeMap<&str, Vec<&str>> =
            members.iter().map(|id| (*id, Vec::new())).collect();
        for link in self.links.values() {
            let (s, t) = (link.source.as_str(), link.target.as_str());
            if members.contains(s) && members.contains(t) {
                adjacency.get_mut(s).unwrap().push(t);
                adjacency.get_mut(t).unwrap().push(s);
            }
        }

        let mut seen = BTreeSet::new();
        let mut components = Vec::new();
        // BTreeSet iteration visits roots in id order, so components come
        // out ordered by their smallest member.
        for &root in &members {
            if !seen.insert(root) {
                continue;
            }
            let mut component = vec![root.to_string()];
            let mut queue = VecDeque::from([root]);
            while let Some(node) = queue.pop_front() {
                for &next in &adjacency[node] {
                    if seen.insert(next) {
                        component.push(next.to_string());
                        queue.push_back(next);
                    }
                }
            }
            component.sort();
            components.push(component);
        }
        Ok(components)
    }
}

/// Checks the endpoint-kind table and the strategy rule for `link` against
/// the element kinds found in `model`. Endpoints must already resolve.
pub fn check_link_kinds(model: &Model, link: &Link) -> Result<(), ModelError> {
    let kind_of = |id: &str| {
        model
            .elements
            .get(id)
            .map(|e| e.kind)
            .ok_or_else(|| ModelError::DanglingEndpoint {
                link: link.id.clone(),
                endpoint: id.to_string(),
            })
    };
    let source_kind = kind_of(&link.source)?;
    let target_kind = kind_of(&link.target)?;
    if link.strategy.is_some() && link.kind != LinkKind::Mitigates {
        return Err(ModelError::StrategyOnNonMitigation(link.id.clone()));
    }
    if !link.kind.admits(source_kind, target_kind) {
        return Err(ModelError::IllegalEndpointKinds {
            link: link.id.clone(),
            kind: link.kind,
            source_kind,
            target_kind,
        });
    }
    Ok(())
}
