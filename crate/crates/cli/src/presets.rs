//! Checked-in configurations, one per table or figure.

pub const PRESETS: &[(&str, &str)] = &[
    ("table1", include_str!("../presets/table1.toml")),
    ("table2", include_str!("../presets/table2.toml")),
    ("compare-direct", include_str!("../presets/compare-direct.toml")),
    ("patch-test", include_str!("../presets/patch-test.toml")),
    ("properties", include_str!("../presets/properties.toml")),
    ("boundary-layer", include_str!("../presets/boundary-layer.toml")),
    ("singular", include_str!("../presets/singular.toml")),
    ("weights", include_str!("../presets/weights.toml")),
    ("solve", include_str!("../presets/solve.toml")),
    ("assemble", include_str!("../presets/assemble.toml")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}
