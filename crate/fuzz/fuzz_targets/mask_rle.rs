#![no_main]

use libfuzzer_sys::fuzz_target;
use modcap::grid::{parse_rle_csv, to_rle_csv};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    const LEN: usize = 4096;
    if let Ok(cells) = parse_rle_csv(text, LEN) {
        assert!(cells.iter().all(|c| c < LEN));
        let again = parse_rle_csv(&to_rle_csv(&cells), LEN).expect("re-encoded mask parses");
        assert_eq!(again, cells);
    }
});
