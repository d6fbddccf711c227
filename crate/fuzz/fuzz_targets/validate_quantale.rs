#![no_main]

use libfuzzer_sys::fuzz_target;
use qcech_core::lattice::{validate_quantale, RawQuantale};
use qcech_core::limits::Limits;

// First byte picks the size, the rest fill the order relation and then the
// multiplication table.
fuzz_target!(|data: &[u8]| {
    let Some((&size, rest)) = data.split_first() else { return };
    let n = (size % 9) as usize;
    if rest.len() < n * n * 2 {
        return;
    }
    let (order, mul) = rest.split_at(n * n);
    let raw = RawQuantale {
        labels: (0..n).map(|i| i.to_string()).collect(),
        leq: (0..n).map(|i| (0..n).map(|j| order[i * n + j] & 1 == 1).collect()).collect(),
        mul: (0..n).map(|i| (0..n).map(|j| mul[i * n + j] as usize % n).collect()).collect(),
    };
    if let Ok(q) = validate_quantale(raw, &Limits::default()) {
        for a in q.elements() {
            for b in q.elements() {
                for c in q.elements() {
                    assert_eq!(q.mul(a, q.join2(b, c)), q.join2(q.mul(a, b), q.mul(a, c)));
                }
            }
        }
    }
});
