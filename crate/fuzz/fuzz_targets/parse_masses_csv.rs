#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::io::{masses_to_csv, parse_masses_csv};

fuzz_target!(|data: &str| {
    if let Ok(p) = parse_masses_csv(data) {
        let total: f64 = p.masses().iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        assert!(p.masses().iter().all(|m| *m >= 0.0));
        assert_eq!(parse_masses_csv(&masses_to_csv(&p)).unwrap(), p);
    }
});
