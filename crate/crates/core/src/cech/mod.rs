//! Čech cohomology: covers, cochain complexes, refinements, and the
//! cohomology of an element.

mod complex;
mod cover;
mod element;
mod refinement;

use thiserror::Error;

use crate::abgroups::GroupError;

pub use complex::{
    build_complex, build_family_complex, cover_cohomology, default_q_max, family_cohomology, CechComplex,
    CohomologyResult,
};
pub use cover::{count_covers, enumerate_covers, make_cover, tuple_product, Cover};
pub use element::{
    element_cohomology, essential_elements, find_terminal_cover, refines, terminal_candidates, ElementCohomology,
};
pub use refinement::{
    all_refinements, common_refinement, find_refinement, homotopy_uniqueness_check, induced_cohomology_maps,
    refinement_map, HomotopyReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CechError {
    #[error("element index {0} is out of range")]
    UnknownElement(usize),
    #[error("{{{}}} joins to {join}, not {base}", .members.join(", "))]
    NotACover { base: String, members: Vec<String>, join: String },
    #[error("{what}: {n} exceeds the cap of {cap}")]
    SizeCapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("no restriction from {1} to {0}: elements are not comparable")]
    RestrictionUnavailable(String, String),
    #[error("invalid refinement witness: {0}")]
    InvalidWitness(String),
    #[error("refinement map does not commute with the differential in degree {0}")]
    NotACochainMap(usize),
    #[error("pointwise products join to {join}, not {base}")]
    ProductNotACover { base: String, join: String },
    #[error("refinement preorder is not directed{}", match (.first, .second) {
        (Some(a), Some(b)) => format!(": {a} and {b} have no common refinement"),
        _ => String::new(),
    })]
    NotDirected { first: Option<String>, second: Option<String> },
    #[error("base mismatch: {0}")]
    BaseMismatch(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}
