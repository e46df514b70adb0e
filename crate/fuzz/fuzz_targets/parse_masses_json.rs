#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::io::{masses_to_json, parse_masses, parse_masses_json};

fuzz_target!(|data: &str| {
    if let Ok(p) = parse_masses_json(data) {
        assert_eq!(parse_masses_json(&masses_to_json(&p)).unwrap(), p);
    }
    let _ = parse_masses(data);
});
