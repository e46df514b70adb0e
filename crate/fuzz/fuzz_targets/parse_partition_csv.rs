#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::io::{parse_partition_csv, partition_to_csv};

fuzz_target!(|data: &str| {
    if let Ok(s) = parse_partition_csv(data) {
        assert!(s.assignment().iter().all(|b| *b < s.m()));
        assert_eq!(parse_partition_csv(&partition_to_csv(&s)).unwrap(), s);
    }
});
