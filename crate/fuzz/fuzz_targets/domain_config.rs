#![no_main]

use libfuzzer_sys::fuzz_target;
use modcap::grid::{build_domain, DomainConfig, GridSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(config) = DomainConfig::from_json(text) else { return };
    // keep rasterization cheap
    let Ok(spec) = config.grid_spec() else { return };
    if spec.len() > 1 << 16 {
        return;
    }
    if let Ok(domain) = build_domain(&config) {
        assert!(domain.inside_count() > 0);
        let _: &GridSpec = domain.spec();
    }
});
