//! Pattern catalogues: a ring of categories around a central one, the
//! placement of each pattern on the unit disc, the related-pattern distance
//! lint and chain composition.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::{normalize, Code, Diagnostic};
use crate::model::SourceInfo;
use crate::patterns::{slug, PatternDoc};

/// Version tag carried by every JSON report.
pub const REPORT_VERSION: &str = "1";

/// Radial offset applied per collider when patterns land on the same spot.
pub const JITTER_STEP: f64 = 0.04;

const SAME_SPOT: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CatalogueError {
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("a chain needs at least two patterns, got {0}")]
    ChainTooShort(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    fn scale(self, k: f64) -> Point {
        Point { x: self.x * k, y: self.y * k }
    }

    fn add(self, other: Point) -> Point {
        Point { x: self.x + other.x, y: self.y + other.y }
    }

    fn close_to(self, other: Point) -> bool {
        (self.x - other.x).abs() < SAME_SPOT && (self.y - other.y).abs() < SAME_SPOT
    }
}

/// Pull of the primary and secondary category on a pattern's position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    pub primary: f64,
    pub secondary: f64,
}

impl Default for Weights {
    fn default() -> Self {
        Weights { primary: 0.7, secondary: 0.3 }
    }
}

impl FromStr for Weights {
    type Err = String;

    /// Parses `"<primary>,<secondary>"`, e.g. `0.7,0.3`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (p, q) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `<primary>,<secondary>`, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .ok()
                .filter(|w| w.is_finite() && *w >= 0.0)
                .ok_or_else(|| format!("invalid weight `{}`", v.trim()))
        };
        let weights = Weights { primary: parse(p)?, secondary: parse(q)? };
        if (weights.primary + weights.secondary - 1.0).abs() > 1e-9 {
            return Err(format!("weights must sum to 1, got `{s}`"));
        }
        Ok(weights)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Catalogue {
    pub name: String,
    /// Ordered ring of categories.
    pub cycle: Vec<String>,
    pub center: String,
    pub patterns: Vec<PatternDoc>,
    pub meta: BTreeMap<String, String>,
    pub source: SourceInfo,
}

impl PartialEq for Catalogue {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.cycle == other.cycle
            && self.center == other.center
            && self.patterns == other.patterns
            && self.meta == other.meta
    }
}

impl Eq for Catalogue {}

impl Catalogue {
    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.cycle.iter().map(String::as_str).chain(std::iter::once(self.center.as_str()))
    }

    fn cycle_index(&self, category: &str) -> Option<usize> {
        self.cycle.iter().position(|c| c == category)
    }

    /// Looks a pattern up by name, comparing slugs so `"Rule Acceptance"`
    /// and `rule-acceptance` name the same entry.
    pub fn resolve(&self, name: &str) -> Option<&PatternDoc> {
        let wanted = slug(name);
        self.patterns.iter().find(|p| p.slug() == wanted)
    }

    /// Structural problems: cycle length, duplicate or unknown categories,
    /// duplicate patterns.
    pub fn structure_diagnostics(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let header = self.source.span("header").cloned();
        if self.cycle.len() < 3 {
            out.push(Diagnostic::new(
                Code::C2,
                format!("the category cycle needs at least 3 entries, got {}", self.cycle.len()),
                header.clone(),
            ));
        }
        let mut seen = BTreeSet::new();
        for category in &self.cycle {
            if !seen.insert(category.as_str()) {
                out.push(Diagnostic::new(
                    Code::D2,
                    format!("category `{category}` is declared twice"),
                    self.source.keyed("category", category).or_else(|| header.clone()),
                ));
            }
        }
        if self.center.is_empty() {
            out.push(Diagnostic::new(Code::C2, "no center category declared", header.clone()));
        } else if seen.contains(self.center.as_str()) {
            out.push(Diagnostic::new(
                Code::D2,
                format!("center category `{}` also appears in the cycle", self.center),
                self.source.keyed("category", &self.center).or_else(|| header.clone()),
            ));
        }
        let mut slugs = BTreeSet::new();
        for pattern in &self.patterns {
            let at = self.source.keyed("pattern", &pattern.name).or_else(|| header.clone());
            if !slugs.insert(pattern.slug()) {
                out.push(Diagnostic::new(
                    Code::D2,
                    format!("pattern `{}` is declared twice", pattern.name),
                    at.clone(),
                ));
            }
            let categories = std::iter::once(&pattern.category_primary).chain(pattern.category_secondary.as_ref());
            for category in categories {
                if !self.categories().any(|c| c == category) {
                    out.push(Diagnostic::new(
                        Code::C2,
                        format!("pattern `{}` uses unknown category `{category}`", pattern.name),
                        at.clone(),
                    ));
                }
            }
        }
        normalize(&mut out);
        out
    }

    /// Anchor of a category: the origin for the center, otherwise the unit
    /// circle point at 90° − i·360°/n for cycle position i.
    pub fn anchor(&self, category: &str) -> Result<Point, CatalogueError> {
        if category == self.center {
            return Ok(Point::ORIGIN);
        }
        let i = self
            .cycle_index(category)
            .ok_or_else(|| CatalogueError::UnknownCategory(category.to_string()))?;
        Ok(cycle_anchor(i, self.cycle.len()))
    }

    fn base_position(&self, pattern: &PatternDoc, weights: Weights) -> Result<Point, CatalogueError> {
        let primary = self.anchor(&pattern.category_primary)?;
        match &pattern.category_secondary {
            None => Ok(primary),
            Some(secondary) => {
                let secondary = self.anchor(secondary)?;
                Ok(primary.scale(weights.primary).add(secondary.scale(weights.secondary)))
            }
        }
    }

    /// Positions of every pattern, keyed by pattern name. Patterns landing
    /// on the same spot are pushed outwards by `JITTER_STEP · k` for the
    /// k-th of them in name order.
    pub fn placements(&self, weights: Weights) -> Result<BTreeMap<String, Point>, CatalogueError> {
        let mut ordered: Vec<&PatternDoc> = self.patterns.iter().collect();
        ordered.sort_by(|a, b| a.name.cmp(&b.name));

        let mut bases: Vec<Point> = Vec::with_capacity(ordered.len());
        let mut out = BTreeMap::new();
        for pattern in ordered {
            let base = self.base_position(pattern, weights)?;
            let k = bases.iter().filter(|b| b.close_to(base)).count();
            bases.push(base);
            out.insert(pattern.name.clone(), self.jitter(base, k));
        }
        Ok(out)
    }

    fn jitter(&self, base: Point, k: usize) -> Point {
        if k == 0 {
            return base;
        }
        let offset = JITTER_STEP * k as f64;
        let r = base.norm();
        if r > SAME_SPOT {
            return base.scale(1.0 + offset / r);
        }
        // At the origin there is no radial direction; push towards the
        // alphabetically first cycle category so the layout still rotates
        // with the cycle.
        let direction = self
            .cycle
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.cmp(b.1))
            .map(|(i, _)| cycle_anchor(i, self.cycle.len()))
            .unwrap_or(Point { x: 0.0, y: 1.0 });
        direction.scale(offset)
    }

    pub fn placement(&self, pattern: &str, weights: Weights) -> Result<Point, CatalogueError> {
        let name = self
            .resolve(pattern)
            .ok_or_else(|| CatalogueError::UnknownPattern(pattern.to_string()))?
            .name
            .clone();
        Ok(self.placements(weights)?[&name])
    }

    /// Hops between two categories on the wheel formed by the cycle and its
    /// hub: 0 for the same category, 1 for cycle neighbours or whenever the
    /// center is involved, otherwise the shorter way round the cycle, capped
    /// at 2 (the route through the center).
    pub fn category_distance(&self, a: &str, b: &str) -> Result<u32, CatalogueError> {
        let known = |c: &str| c == self.center || self.cycle_index(c).is_some();
        for c in [a, b] {
            if !known(c) {
                return Err(CatalogueError::UnknownCategory(c.to_string()));
            }
        }
        if a == b {
            return Ok(0);
        }
        if a == self.center || b == self.center {
            return Ok(1);
        }
        let (i, j) = (self.cycle_index(a).unwrap(), self.cycle_index(b).unwrap());
        let n = self.cycle.len();
        let hop = i.abs_diff(j).min(n - i.abs_diff(j));
        Ok(hop.min(2) as u32)
    }

    fn pattern_distance(&self, a: &PatternDoc, b: &PatternDoc) -> Result<u32, CatalogueError> {
        self.category_distance(&a.category_primary, &b.category_primary)
    }

    /// Unique unordered related pairs that resolve, as pattern names.
    fn related_pairs(&self) -> BTreeSet<(String, String)> {
        let mut pairs = BTreeSet::new();
        for pattern in &self.patterns {
            for related in &pattern.related {
                if let Some(other) = self.resolve(related) {
                    if other.slug() == pattern.slug() {
                        continue;
                    }
                    let (a, b) = if pattern.name <= other.name {
                        (pattern.name.clone(), other.name.clone())
                    } else {
                        (other.name.clone(), pattern.name.clone())
                    };
                    pairs.insert((a, b));
                }
            }
        }
        pairs
    }

    /// C0 for related names that do not resolve, C1 for related pairs whose
    /// primary categories are more than one hop apart.
    pub fn lint_related_distance(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let mut reported = BTreeSet::new();
        for pattern in &self.patterns {
            for related in &pattern.related {
                let at = pattern
                    .source
                    .keyed("related", related)
                    .or_else(|| self.source.keyed("pattern", &pattern.name));
                let Some(other) = self.resolve(related) else {
                    out.push(Diagnostic::new(
                        Code::C0,
                        format!("pattern `{}` relates to `{related}`, which is not in the catalogue", pattern.name),
                        at,
                    ));
                    continue;
                };
                let key = if pattern.slug() <= other.slug() {
                    (pattern.slug(), other.slug())
                } else {
                    (other.slug(), pattern.slug())
                };
                if key.0 == key.1 || !reported.insert(key) {
                    continue;
                }
                match self.pattern_distance(pattern, other) {
                    Ok(d) if d > 1 => out.push(Diagnostic::new(
                        Code::C1,
                        format!(
                            "related patterns `{}` ({}) and `{}` ({}) are {d} categories apart",
                            pattern.name, pattern.category_primary, other.name, other.category_primary
                        ),
                        at,
                    )),
                    Ok(_) => {}
                    Err(err) => out.push(Diagnostic::new(Code::C2, err.to_string(), at)),
                }
            }
        }
        normalize(&mut out);
        out
    }

    pub fn compose_chain<S: AsRef<str>>(&self, names: &[S]) -> Result<ChainReport, CatalogueError> {
        if names.len() < 2 {
            return Err(CatalogueError::ChainTooShort(names.len()));
        }
        let patterns = names
            .iter()
            .map(|n| {
                self.resolve(n.as_ref())
                    .ok_or_else(|| CatalogueError::UnknownPattern(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let step = |a: &PatternDoc, b: &PatternDoc| -> Result<ChainStep, CatalogueError> {
            let distance = self.pattern_distance(a, b)?;
            Ok(ChainStep {
                from: a.slug(),
                to: b.slug(),
                from_category: a.category_primary.clone(),
                to_category: b.category_primary.clone(),
                distance,
                smooth: distance <= 1,
            })
        };
        let steps = patterns
            .windows(2)
            .map(|w| step(w[0], w[1]))
            .collect::<Result<Vec<_>, _>>()?;
        let closing = step(patterns[patterns.len() - 1], patterns[0])?;
        let closed = closing.smooth;
        let verdict = if steps.iter().all(|s| s.smooth) {
            if closed {
                Verdict::CoherentLoop
            } else {
                Verdict::OpenChain
            }
        } else {
            Verdict::Broken
        };
        Ok(ChainReport {
            version: REPORT_VERSION,
            steps,
            closing,
            closed,
            verdict,
        })
    }

    pub fn stats(&self) -> CatalogueStats {
        let per_category = self
            .categories()
            .map(|c| CategoryCount {
                category: c.to_string(),
                patterns: self.patterns.iter().filter(|p| p.category_primary == c).count(),
            })
            .collect();
        CatalogueStats {
            version: REPORT_VERSION,
            catalogue: self.name.clone(),
            patterns: self.patterns.len(),
            related_edges: self.related_pairs().len(),
            per_category,
        }
    }

    /// One row per pattern with its categories and position, in name order.
    pub fn index(&self, weights: Weights) -> Result<CatalogueIndex, CatalogueError> {
        let placements = self.placements(weights)?;
        let entries = placements
            .iter()
            .map(|(name, p)| {
                let pattern = self.resolve(name).expect("placements come from patterns");
                IndexEntry {
                    name: name.clone(),
                    slug: pattern.slug(),
                    primary: pattern.category_primary.clone(),
                    secondary: pattern.category_secondary.clone(),
                    provenance: pattern.provenance().map(str::to_string),
                    x: p.x,
                    y: p.y,
                }
            })
            .collect();
        Ok(CatalogueIndex {
            version: REPORT_VERSION,
            catalogue: self.name.clone(),
            entries,
        })
    }
}

/// Unit-circle anchor of cycle position `i` out of `n`, exact on the axes.
fn cycle_anchor(i: usize, n: usize) -> Point {
    let turn = 360 * i;
    if turn.is_multiple_of(n) {
        let degrees = (90 - (turn / n) as i64).rem_euclid(360);
        match degrees {
            0 => return Point { x: 1.0, y: 0.0 },
            90 => return Point { x: 0.0, y: 1.0 },
            180 => return Point { x: -1.0, y: 0.0 },
            270 => return Point { x: 0.0, y: -1.0 },
            _ => {}
        }
    }
    let theta = (90.0 - 360.0 * i as f64 / n as f64).to_radians();
    Point { x: theta.cos(), y: theta.sin() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CoherentLoop,
    OpenChain,
    Broken,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CoherentLoop => "coherent loop",
            Verdict::OpenChain => "open chain",
            Verdict::Broken => "broken chain",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub from: String,
    pub to: String,
    pub from_category: String,
    pub to_category: String,
    pub distance: u32,
    pub smooth: bool,
}

impl fmt::Display for ChainStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({}) -> {} ({}): {} (distance {})",
            self.from,
            self.from_category,
            self.to,
            self.to_category,
            if self.smooth { "smooth" } else { "jump" },
            self.distance
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub version: &'static str,
    pub steps: Vec<ChainStep>,
    pub closing: ChainStep,
    pub closed: bool,
    pub verdict: Verdict,
}

impl ChainReport {
    pub fn is_coherent(&self) -> bool {
        self.verdict == Verdict::CoherentLoop
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{step}")?;
        }
        writeln!(f, "closing {}", self.closing)?;
        writeln!(f, "verdict: {}", self.verdict)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryCount {
    pub category: String,
    pub patterns: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogueStats {
    pub version: &'static str,
    pub catalogue: String,
    pub patterns: usize,
    pub related_edges: usize,
    /// Cycle categories in order, then the center.
    pub per_category: Vec<CategoryCount>,
}

impl CatalogueStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for CatalogueStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "catalogue: {}", self.catalogue)?;
        writeln!(f, "patterns: {}", self.patterns)?;
        writeln!(f, "related edges: {}", self.related_edges)?;
        for count in &self.per_category {
            writeln!(f, "category {}: {}", count.category, count.patterns)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndexEntry {
    pub name: String,
    pub slug: String,
    pub primary: String,
    pub secondary: Option<String>,
    pub provenance: Option<String>,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogueIndex {
    pub version: &'static str,
    pub catalogue: String,
    pub entries: Vec<IndexEntry>,
}

impl CatalogueIndex {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl fmt::Display for CatalogueIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let categories = match &e.secondary {
                Some(s) => format!("{}/{}", e.primary, s),
                None => e.primary.clone(),
            };
            writeln!(f, "{}\t{}\t{:.4}\t{:.4}", e.slug, categories, e.x, e.y)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(name: &str, primary: &str, secondary: Option<&str>) -> PatternDoc {
        PatternDoc {
            name: name.into(),
            category_primary: primary.into(),
            category_secondary: secondary.map(str::to_string),
            ..PatternDoc::default()
        }
    }

    fn four() -> Catalogue {
        Catalogue {
            name: "four".into(),
            cycle: ["A", "B", "C", "D"].map(String::from).to_vec(),
            center: "G".into(),
            ..Catalogue::default()
        }
    }

    fn five() -> Catalogue {
        Catalogue {
            name: "five".into(),
            cycle: ["Design", "Procurement", "Construction", "Usage", "Dismantling"]
                .map(String::from)
                .to_vec(),
            center: "Governance".into(),
            ..Catalogue::default()
        }
    }

    #[test]
    fn single_anchor_placement() {
        let mut c = four();
        c.patterns.push(pattern("p", "A", None));
        assert_eq!(c.placement("p", Weights::default()).unwrap(), Point { x: 0.0, y: 1.0 });
    }

    #[test]
    fn weighted_placement_is_exact() {
        let mut c = four();
        c.patterns.push(pattern("p", "A", Some("B")));
        assert_eq!(c.placement("p", Weights::default()).unwrap(), Point { x: 0.3, y: 0.7 });
    }

    #[test]
    fn secondary_center_pulls_toward_origin() {
        let mut c = four();
        c.patterns.push(pattern("Co-innovation", "C", Some("G")));
        let p = c.placement("co-innovation", Weights::default()).unwrap();
        let anchor = c.anchor("C").unwrap();
        assert!((p.x - 0.7 * anchor.x).abs() < 1e-12 && (p.y - 0.7 * anchor.y).abs() < 1e-12);
    }

    #[test]
    fn colliders_are_pushed_out_in_name_order() {
        let mut c = four();
        c.patterns.push(pattern("b", "A", None));
        c.patterns.push(pattern("a", "A", None));
        c.patterns.push(pattern("z", "G", None));
        c.patterns.push(pattern("y", "G", None));
        let p = c.placements(Weights::default()).unwrap();
        assert_eq!(p["a"], Point { x: 0.0, y: 1.0 });
        assert!((p["b"].y - 1.04).abs() < 1e-12);
        assert_eq!(p["y"], Point::ORIGIN);
        assert!((p["z"].norm() - 0.04).abs() < 1e-12);
    }

    #[test]
    fn unknown_category() {
        let mut c = four();
        c.patterns.push(pattern("p", "Nowhere", None));
        assert_eq!(
            c.placements(Weights::default()).unwrap_err(),
            CatalogueError::UnknownCategory("Nowhere".into())
        );
    }

    #[test]
    fn distances_on_the_wheel() {
        let c = five();
        assert_eq!(c.category_distance("Design", "Design").unwrap(), 0);
        assert_eq!(c.category_distance("Design", "Dismantling").unwrap(), 1);
        assert_eq!(c.category_distance("Design", "Usage").unwrap(), 2);
        assert_eq!(c.category_distance("Governance", "Usage").unwrap(), 1);
        let mut eight = five();
        eight.cycle = (0..8).map(|i| format!("c{i}")).collect();
        assert_eq!(eight.category_distance("c0", "c4").unwrap(), 2);
    }

    #[test]
    fn lint_flags_far_pairs_and_unknown_names() {
        let mut c = five();
        let mut a = pattern("Alpha", "Design", None);
        a.related = vec!["Beta".into(), "Missing".into()];
        let mut b = pattern("Beta", "Construction", None);
        b.related = vec!["Alpha".into()];
        c.patterns = vec![a, b];
        let diags = c.lint_related_distance();
        let codes: Vec<_> = diags.iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::C0, Code::C1]);
        assert_eq!(c.stats().related_edges, 1);
    }

    #[test]
    fn chains() {
        let mut c = five();
        c.patterns = vec![pattern("d", "Design", None), pattern("u", "Usage", None)];
        let report = c.compose_chain(&["d", "u"]).unwrap();
        assert_eq!(report.verdict, Verdict::Broken);
        assert!(!report.steps[0].smooth);
        let same = c.compose_chain(&["d", "d"]).unwrap();
        assert!(same.is_coherent() && same.closed);
        assert_eq!(c.compose_chain(&["d"]).unwrap_err(), CatalogueError::ChainTooShort(1));
        assert!(matches!(c.compose_chain(&["d", "x"]), Err(CatalogueError::UnknownPattern(_))));
    }

    #[test]
    fn empty_catalogue_stats() {
        let stats = four().stats();
        assert_eq!(stats.patterns, 0);
        assert_eq!(stats.related_edges, 0);
        assert!(stats.per_category.iter().all(|c| c.patterns == 0));
        assert!(stats.to_json().contains("\"version\": \"1\""));
    }

    #[test]
    fn weights_from_str() {
        assert_eq!("0.6, 0.4".parse::<Weights>().unwrap(), Weights { primary: 0.6, secondary: 0.4 });
        assert!("0.6".parse::<Weights>().is_err());
        assert!("0.9,0.9".parse::<Weights>().is_err());
    }

    #[test]
    fn structure_problems() {
        let mut c = four();
        c.cycle.push("A".into());
        c.center = "B".into();
        c.patterns.push(pattern("p", "Q", None));
        let codes: Vec<_> = c.structure_diagnostics().iter().map(|d| d.code).collect();
        assert_eq!(codes, vec![Code::D2, Code::D2, Code::C2]);
    }
}
