#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::GeneratorFamily;

fuzz_target!(|data: &str| {
    if let Ok(family) = data.parse::<GeneratorFamily>() {
        assert!(family.validate().is_ok());
        assert_eq!(family.to_string().parse::<GeneratorFamily>().unwrap(), family);
    }
});
