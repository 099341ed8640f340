//! Bundled environment presets.

use crate::env_model::EnvironmentSpec;
use crate::meta::EnvRanges;

pub const REFERENCE_JSON: &str = include_str!("../presets/reference.json");
pub const META_TRAIN_RANGES_JSON: &str = include_str!("../presets/meta_train_ranges.json");
pub const META_TEST_JSON: &str = include_str!("../presets/meta_test.json");

/// Reference environment used for the scheme comparison and convergence runs.
pub fn reference() -> EnvironmentSpec {
    serde_json::from_str(REFERENCE_JSON).expect("bundled preset parses")
}

/// Ranges the meta-initialization is trained over.
pub fn meta_train_ranges() -> EnvRanges {
    serde_json::from_str(META_TRAIN_RANGES_JSON).expect("bundled preset parses")
}

/// Unseen environment the meta-initialization is evaluated in.
pub fn meta_test() -> EnvironmentSpec {
    serde_json::from_str(META_TEST_JSON).expect("bundled preset parses")
}

/// Looks up a preset by name: `reference`, `meta_test`.
pub fn environment(name: &str) -> Option<EnvironmentSpec> {
    match name {
        "reference" => Some(reference()),
        "meta_test" => Some(meta_test()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid() {
        reference().validate().unwrap();
        meta_test().validate().unwrap();
        meta_train_ranges().validate().unwrap();
        assert_eq!(reference().c_local, 30.0);
        assert_eq!(reference().b_device_cloud, 10.0);
        assert_eq!(meta_train_ranges().c_cloud, (160.0, 170.0));
    }
}
