#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::harness::ingest_histogram_texts;
use divfront::io::parse_histogram_csv;

fuzz_target!(|data: &str| {
    let (left, right) = data.split_once('\u{0}').unwrap_or((data, data));
    if let Ok(rows) = parse_histogram_csv(left) {
        if rows.iter().all(|(a, _)| *a < 1 << 16) {
            if let Ok((p, q)) = ingest_histogram_texts(left, right) {
                assert_eq!(p.k(), q.k());
                assert!(rows.iter().all(|(a, c)| p.counts()[*a] == *c));
            }
        }
    }
});
