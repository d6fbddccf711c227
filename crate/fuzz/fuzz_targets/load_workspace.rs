#![no_main]

use libfuzzer_sys::fuzz_target;
use qcech_core::doc::{load_workspace, validate_document};
use qcech_core::limits::Limits;

// Small caps keep every enumeration cheap.
const LIMITS: Limits = Limits { quantale_elements: 16, cover_elements: 8, ring_elements: 16, witnesses: 16 };

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = validate_document(text, &LIMITS);
        let _ = load_workspace(text, &LIMITS);
    }
});
