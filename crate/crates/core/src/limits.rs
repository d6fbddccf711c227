//! Resource caps. Every exponential enumeration checks one of these first.

use std::env;

/// Caps on the sizes of objects that are enumerated exhaustively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Elements in a validated quantale (never above 64).
    pub quantale_elements: usize,
    /// Elements below `u` when enumerating covers of `u`.
    pub cover_elements: usize,
    /// Elements in a finite ring.
    pub ring_elements: usize,
    /// Refinement witnesses enumerated per cover pair, and failure
    /// witnesses kept per report.
    pub witnesses: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { quantale_elements: 64, cover_elements: 16, ring_elements: 64, witnesses: 256 }
    }
}

impl Limits {
    /// Defaults overridden by `QCECH_MAX_ELEMENTS`, `QCECH_MAX_COVER_ELEMENTS`,
    /// `QCECH_MAX_RING` and `QCECH_MAX_WITNESSES`. Unparsable values are ignored.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        let read = |name: &str, slot: &mut usize| {
            if let Some(v) = env::var(name).ok().and_then(|s| s.trim().parse().ok()) {
                *slot = v;
            }
        };
        read("QCECH_MAX_ELEMENTS", &mut l.quantale_elements);
        read("QCECH_MAX_COVER_ELEMENTS", &mut l.cover_elements);
        read("QCECH_MAX_RING", &mut l.ring_elements);
        read("QCECH_MAX_WITNESSES", &mut l.witnesses);
        l
    }
}
