#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::EstimatorKind;

fuzz_target!(|data: &str| {
    if let Ok(kind) = data.parse::<EstimatorKind>() {
        let again: EstimatorKind = kind.to_string().parse().unwrap();
        assert_eq!(again.canonical(), kind.canonical());
    }
});
