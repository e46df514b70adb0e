#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::synth::DistSpec;

fuzz_target!(|data: &str| {
    if let Ok(spec) = data.parse::<DistSpec>() {
        assert_eq!(spec.to_string().parse::<DistSpec>().unwrap(), spec);
    }
});
