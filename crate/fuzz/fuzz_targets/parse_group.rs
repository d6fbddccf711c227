#![no_main]

use libfuzzer_sys::fuzz_target;
use qcech_core::doc::{parse_group, parse_matrix};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(g) = parse_group(text) {
            assert_eq!(parse_group(&g.to_string()).unwrap().canonical(), g.canonical());
        }
        let _ = parse_matrix(text, 2, 3);
    }
});
