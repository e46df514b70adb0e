#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::harness::ExperimentConfig;

fuzz_target!(|data: &str| {
    if let Ok(config) = ExperimentConfig::from_json(data) {
        assert!(config.trials >= 1);
        assert!(!config.sweep.values.is_empty());
    }
});
