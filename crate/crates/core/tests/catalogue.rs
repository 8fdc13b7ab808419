mod common;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use susmod::catalogue::{CatalogueError, JITTER_STEP};
use susmod::diagnostic::Code;
use susmod::{Catalogue, PatternDoc, Point, Verdict, Weights};

use common::{circular, fairness};

const LONG_LOOP: [&str; 5] = [
    "Design for Reuse",
    "Green Procurement",
    "Renovation Built",
    "Preventive Maintenance",
    "Easy Dismantling",
];

fn pattern(name: &str, primary: &str, secondary: Option<&str>, related: &[String]) -> PatternDoc {
    PatternDoc {
        name: name.into(),
        category_primary: primary.into(),
        category_secondary: secondary.map(str::to_string),
        related: related.to_vec(),
        ..PatternDoc::default()
    }
}

/// Catalogues over a cycle `K0..K{n-1}` and center `G`, with patterns
/// `P0..` placed in random categories and relating to random patterns.
fn catalogue_fixture() -> impl Strategy<Value = Catalogue> {
    (3usize..8, 0usize..12)
        .prop_flat_map(|(n, m)| {
            (
                Just(n),
                prop::collection::vec(
                    (0..=n, prop::option::of(0..=n), prop::collection::vec(0..m.max(1), 0..3)),
                    m,
                ),
            )
        })
        .prop_map(|(n, specs)| {
            let name = |i: usize| if i == n { "G".to_string() } else { format!("K{i}") };
            let m = specs.len();
            let patterns = specs
                .into_iter()
                .enumerate()
                .map(|(i, (p, s, rel))| {
                    let related: Vec<String> = rel.into_iter().filter(|_| m > 0).map(|r| format!("P{r}")).collect();
                    pattern(&format!("P{i}"), &name(p), s.map(name).as_deref(), &related)
                })
                .collect();
            Catalogue {
                name: "random".into(),
                cycle: (0..n).map(name).collect(),
                center: "G".into(),
                patterns,
                ..Catalogue::default()
            }
        })
}

fn weights() -> impl Strategy<Value = Weights> {
    (0.0f64..=1.0).prop_map(|p| Weights { primary: p, secondary: 1.0 - p })
}

/// Rotates `p` clockwise by `degrees`.
fn rotate_cw(p: Point, degrees: f64) -> Point {
    let t = -degrees.to_radians();
    Point {
        x: p.x * t.cos() - p.y * t.sin(),
        y: p.x * t.sin() + p.y * t.cos(),
    }
}

/// Moves every category one step forward around the ring.
fn rotated(catalogue: &Catalogue) -> Catalogue {
    let mut out = catalogue.clone();
    out.cycle.rotate_right(1);
    out
}

/// Breadth-first hop count on the wheel: the cycle plus spokes to the hub.
fn wheel_distance(cycle: &[String], center: &str, a: &str, b: &str) -> u32 {
    let mut adjacent: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let n = cycle.len();
    for i in 0..n {
        let (x, y) = (cycle[i].as_str(), cycle[(i + 1) % n].as_str());
        adjacent.entry(x).or_default().extend([y, center]);
        adjacent.entry(y).or_default().push(x);
        adjacent.entry(center).or_default().push(x);
    }
    let mut dist = BTreeMap::from([(a, 0u32)]);
    let mut queue = VecDeque::from([a]);
    while let Some(c) = queue.pop_front() {
        for &next in &adjacent[c] {
            if !dist.contains_key(next) {
                dist.insert(next, dist[c] + 1);
                queue.push_back(next);
            }
        }
    }
    dist[b]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn placements_stay_near_the_unit_disc(catalogue in catalogue_fixture(), w in weights()) {
        let placements = catalogue.placements(w).unwrap();
        prop_assert_eq!(placements.len(), catalogue.patterns.len());
        let bound = 1.0 + JITTER_STEP * catalogue.patterns.len() as f64;
        for p in placements.values() {
            prop_assert!(p.norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn placements_rotate_with_the_cycle(catalogue in catalogue_fixture(), w in weights()) {
        let step = 360.0 / catalogue.cycle.len() as f64;
        let before = catalogue.placements(w).unwrap();
        let after = rotated(&catalogue).placements(w).unwrap();
        for (name, p) in &before {
            let expected = rotate_cw(*p, step);
            prop_assert!((after[name].x - expected.x).abs() < 1e-9 && (after[name].y - expected.y).abs() < 1e-9);
        }
    }

    #[test]
    fn distance_is_the_wheel_metric(catalogue in catalogue_fixture()) {
        let categories: Vec<String> = catalogue.categories().map(str::to_string).collect();
        for a in &categories {
            for b in &categories {
                let d = catalogue.category_distance(a, b).unwrap();
                prop_assert_eq!(d, wheel_distance(&catalogue.cycle, &catalogue.center, a, b));
                prop_assert_eq!(d, catalogue.category_distance(b, a).unwrap());
                prop_assert_eq!(d == 0, a == b);
                for c in &categories {
                    prop_assert!(d <= catalogue.category_distance(a, c).unwrap() + catalogue.category_distance(c, b).unwrap());
                }
            }
        }
    }

    #[test]
    fn lint_flags_exactly_the_distant_pairs(catalogue in catalogue_fixture()) {
        let mut expected = BTreeSet::new();
        for p in &catalogue.patterns {
            for r in &p.related {
                let q = catalogue.resolve(r).unwrap();
                let d = wheel_distance(&catalogue.cycle, &catalogue.center, &p.category_primary, &q.category_primary);
                if p.name != q.name && d > 1 {
                    expected.insert(if p.name < q.name { (p.name.clone(), q.name.clone()) } else { (q.name.clone(), p.name.clone()) });
                }
            }
        }
        let diags = catalogue.lint_related_distance();
        prop_assert!(diags.iter().all(|d| d.code == Code::C1));
        prop_assert_eq!(diags.len(), expected.len());
    }

    #[test]
    fn chain_verdict_follows_its_steps(catalogue in catalogue_fixture(), picks in prop::collection::vec(any::<prop::sample::Index>(), 2..6)) {
        prop_assume!(!catalogue.patterns.is_empty());
        let names: Vec<String> = picks.iter().map(|i| catalogue.patterns[i.index(catalogue.patterns.len())].name.clone()).collect();
        let report = catalogue.compose_chain(&names).unwrap();
        prop_assert_eq!(report.steps.len(), names.len() - 1);
        for step in report.steps.iter().chain([&report.closing]) {
            prop_assert_eq!(step.smooth, step.distance <= 1);
        }
        let open_ok = report.steps.iter().all(|s| s.smooth);
        let expected = match (open_ok, report.closing.smooth) {
            (true, true) => Verdict::CoherentLoop,
            (true, false) => Verdict::OpenChain,
            _ => Verdict::Broken,
        };
        prop_assert_eq!(report.verdict, expected);
    }
}

#[test]
fn worked_placement() {
    let catalogue = Catalogue {
        name: "w".into(),
        cycle: ["North", "East", "South", "West"].map(String::from).to_vec(),
        center: "Hub".into(),
        patterns: vec![pattern("P", "North", Some("East"), &[])],
        ..Catalogue::default()
    };
    assert_eq!(catalogue.anchor("North").unwrap(), Point { x: 0.0, y: 1.0 });
    assert_eq!(catalogue.anchor("East").unwrap(), Point { x: 1.0, y: 0.0 });
    assert_eq!(catalogue.placement("P", Weights::default()).unwrap(), Point { x: 0.3, y: 0.7 });
}

#[test]
fn coincident_patterns_are_spread_out() {
    let catalogue = Catalogue {
        name: "j".into(),
        cycle: ["A", "B", "C"].map(String::from).to_vec(),
        center: "G".into(),
        patterns: vec![pattern("X", "A", None, &[]), pattern("Y", "A", None, &[]), pattern("Z", "G", None, &[]), pattern("W", "G", None, &[])],
        ..Catalogue::default()
    };
    let p = catalogue.placements(Weights::default()).unwrap();
    assert_eq!(p["X"], Point { x: 0.0, y: 1.0 });
    assert!((p["Y"].y - (1.0 + JITTER_STEP)).abs() < 1e-12);
    assert_eq!(p["W"], Point::ORIGIN);
    assert!((p["Z"].norm() - JITTER_STEP).abs() < 1e-12);
}

#[test]
fn circular_catalogue_geometry() {
    let catalogue = circular();
    assert_eq!(catalogue.patterns.len(), 14);
    let placements = catalogue.placements(Weights::default()).unwrap();
    for p in placements.values() {
        assert!(p.norm() <= 1.0 + 0.04 * 14.0);
    }
    let turned = rotated(&catalogue).placements(Weights::default()).unwrap();
    for (name, p) in &placements {
        let expected = rotate_cw(*p, 72.0);
        assert!((turned[name].x - expected.x).abs() < 1e-9, "{name}");
        assert!((turned[name].y - expected.y).abs() < 1e-9, "{name}");
    }
}

#[test]
fn long_loop_is_coherent() {
    let catalogue = circular();
    let report = catalogue.compose_chain(&LONG_LOOP).unwrap();
    assert_eq!(report.verdict, Verdict::CoherentLoop);
    assert!(report.to_string().ends_with("verdict: coherent loop\n"));

    let jump = catalogue.compose_chain(&["Design for Reuse", "Preventive Maintenance"]).unwrap();
    assert!(!jump.steps[0].smooth);
    assert_eq!(jump.steps[0].distance, 2);
    assert!(jump.to_string().contains("jump"));
    assert_eq!(jump.verdict, Verdict::Broken);
}

#[test]
fn chain_errors() {
    let catalogue = circular();
    assert!(matches!(catalogue.compose_chain(&["Design for Reuse"]), Err(CatalogueError::ChainTooShort(1))));
    assert!(matches!(catalogue.compose_chain(&["Design for Reuse", "Nope"]), Err(CatalogueError::UnknownPattern(_))));
    assert!(catalogue.compose_chain(&["design-for-reuse", "green procurement"]).is_ok());
}

#[test]
fn corpus_catalogues_lint_clean() {
    for catalogue in [fairness(), circular()] {
        assert!(catalogue.structure_diagnostics().is_empty());
        assert!(catalogue.lint_related_distance().is_empty(), "{}", catalogue.name);
    }
    assert_eq!(fairness().patterns.len(), 12);
}

#[test]
fn distance_two_relation_is_flagged() {
    let mut catalogue = circular();
    let design = catalogue.patterns.iter_mut().find(|p| p.name == "Design for Reuse").unwrap();
    design.related.push("Preventive Maintenance".into());
    let diags = catalogue.lint_related_distance();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].code, Code::C1);
}

#[test]
fn unknown_related_is_c0() {
    let mut catalogue = fairness();
    catalogue.patterns[0].related.push("Missing".into());
    let diags = catalogue.lint_related_distance();
    assert_eq!(diags.iter().map(|d| d.code).collect::<Vec<_>>(), vec![Code::C0]);
}

#[test]
fn stats_and_index() {
    let catalogue = circular();
    let stats = catalogue.stats();
    assert_eq!(stats.patterns, 14);
    assert_eq!(stats.per_category.iter().map(|c| c.patterns).sum::<usize>(), 14);
    assert_eq!(stats.related_edges, 5);
    let index = catalogue.index(Weights::default()).unwrap();
    assert_eq!(index.entries.len(), 14);
    let json: serde_json::Value = serde_json::from_str(&index.to_json()).unwrap();
    assert_eq!(json["entries"].as_array().unwrap().len(), 14);
}

#[test]
fn weights_parse() {
    assert_eq!("0.6,0.4".parse::<Weights>().unwrap(), Weights { primary: 0.6, secondary: 0.4 });
    assert!("0.6,0.6".parse::<Weights>().is_err());
    assert!("0.6".parse::<Weights>().is_err());
    assert!("-1,2".parse::<Weights>().is_err());
}
