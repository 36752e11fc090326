#![no_main]

use libfuzzer_sys::fuzz_target;
use modcap::grid::{build_domain, parse_points, rasterize_polyline, DomainConfig};
use modcap::Point;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(points) = parse_points(text) else { return };
    if points.is_empty() || points.len() > 64 || points.iter().any(|p| p.dim() != 2) {
        return;
    }
    let domain = build_domain(&DomainConfig::ball(&Point::zero(2), 1.0, 33)).expect("disk");
    if let Ok(mask) = rasterize_polyline(&points, &domain) {
        assert!(!mask.is_empty());
    }
});
