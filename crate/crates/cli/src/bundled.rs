//! Scenarios shipped with the tool, addressable by name.

use std::path::PathBuf;

const SCENARIOS: &[(&str, &str)] = &[
    ("empty_pad", include_str!("../scenarios/empty_pad.json")),
    (
        "intruder_hover",
        include_str!("../scenarios/intruder_hover.json"),
    ),
    (
        "sustained_intrusion",
        include_str!("../scenarios/sustained_intrusion.json"),
    ),
    (
        "fig8_two_person_alpha0",
        include_str!("../scenarios/fig8_two_person_alpha0.json"),
    ),
    (
        "fig8_two_person_alpha1",
        include_str!("../scenarios/fig8_two_person_alpha1.json"),
    ),
    (
        "fig8_two_person_alpha1_5",
        include_str!("../scenarios/fig8_two_person_alpha1_5.json"),
    ),
    (
        "fig8_two_person_alpha2",
        include_str!("../scenarios/fig8_two_person_alpha2.json"),
    ),
    ("walk_60s", include_str!("../scenarios/walk_60s.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SCENARIOS.iter().map(|(n, _)| *n)
}

pub fn get(name: &str) -> Option<&'static str> {
    SCENARIOS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Directory holding the bundled scenario files.
pub fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}
