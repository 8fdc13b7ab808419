//! The element kind table, written out by kind name.

/// Rows of (link kind, source kinds, target kinds).
pub const ENDPOINTS: &[(&str, &[&str], &[&str])] = &[
    ("refines", &["value"], &["value"]),
    ("refines", &["goal"], &["goal", "value"]),
    ("contributes", &["activity", "assumption", "regulation"], &["value", "goal"]),
    ("obstructs", &["obstacle"], &["value", "goal", "activity"]),
    ("mitigates", &["activity"], &["obstacle"]),
    ("monitors", &["indicator"], &["value", "goal", "activity", "resource"]),
    ("uses_resource", &["activity"], &["resource"]),
    ("responsible_for", &["stakeholder"], &["activity"]),
];

pub fn link_allowed(link: &str, source: &str, target: &str) -> bool {
    ENDPOINTS
        .iter()
        .any(|(k, s, t)| *k == link && s.contains(&source) && t.contains(&target))
}

pub fn requires_dimensions(kind: &str) -> bool {
    ["value", "goal", "activity", "obstacle", "resource"].contains(&kind)
}
