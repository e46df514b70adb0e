#![no_main]
use libfuzzer_sys::fuzz_target;

use divfront::io::{parse_centroids_csv, parse_points_csv, points_to_csv};

fuzz_target!(|data: &str| {
    if let Ok(points) = parse_points_csv(data) {
        assert!(points.iter().flatten().all(|v| v.is_finite()));
        assert_eq!(parse_points_csv(&points_to_csv(&points)).unwrap(), points);
    }
    let _ = parse_centroids_csv(data);
});
