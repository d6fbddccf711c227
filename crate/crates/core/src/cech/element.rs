//! Cohomology of an element: the colimit over its covers, read off at a
//! terminal cover.
//!
//! An element `t ≤ u` is essential when the elements below `u` that are not
//! above `t` fail to join to `u`; then every cover of `u` has a member above
//! `t`. A cover refines all others exactly when all its members are
//! essential, so a terminal cover exists iff the essential elements join to
//! `u`, and in a finite preorder that is the same as being directed.

use crate::lattice::{iter_mask, Elem, ElemSet, Quantale};
use crate::limits::Limits;
use crate::presheaf::AbPresheaf;

use super::cover::{candidates_mask, for_each_cover_mask};
use super::{cover_cohomology, make_cover, CechError, CohomologyResult, Cover};

/// Upper bound on cover pairs examined while looking for a directedness
/// counterexample.
const PAIR_SEARCH: usize = 1 << 20;

#[derive(Clone, Debug)]
pub struct ElementCohomology {
    pub base: Elem,
    pub terminal: Cover,
    pub cover_count: usize,
    pub result: CohomologyResult,
}

/// Mask of the essential elements below `u` (never `⊥`).
pub fn essential_elements(q: &Quantale, u: Elem) -> ElemSet {
    let cand = candidates_mask(q, u);
    iter_mask(cand)
        .filter(|&t| {
            let avoid = iter_mask(cand).filter(|&x| !q.leq(t, x));
            q.join(avoid) != u
        })
        .fold(0, |m, t| m | (1 << t))
}

/// The terminal covers this engine picks from, in order of preference: the
/// join-irreducibles below `u` when they are all essential, then the set of
/// all essential elements. Both lie in the top refinement class.
pub fn terminal_candidates(q: &Quantale, u: Elem) -> Vec<Cover> {
    if u == q.bottom() {
        return vec![Cover::from_parts(u, vec![])];
    }
    let ess = essential_elements(q, u);
    let mut out = Vec::new();
    let irr: ElemSet =
        iter_mask(candidates_mask(q, u)).filter(|&j| q.is_join_irreducible(j)).fold(0, |m, j| m | (1 << j));
    if irr & !ess == 0 && q.join_mask(irr) == u {
        out.push(Cover::from_parts(u, iter_mask(irr).collect()));
    }
    if q.join_mask(ess) == u && ess != irr {
        out.push(Cover::from_parts(u, iter_mask(ess).collect()));
    }
    out
}

/// Whether `a` refines `b` (every member of `a` lies below one of `b`).
pub fn refines(q: &Quantale, a: ElemSet, b: ElemSet) -> bool {
    iter_mask(a).all(|x| iter_mask(b).any(|y| q.leq(x, y)))
}

/// A terminal cover of `u` and the number of covers of `u`.
pub fn find_terminal_cover(q: &Quantale, u: Elem, limits: &Limits) -> Result<(Cover, usize), CechError> {
    let mut masks = Vec::new();
    for_each_cover_mask(q, u, limits, |m| masks.push(m))?;
    if let Some(t) = terminal_candidates(q, u).into_iter().next() {
        return Ok((t, masks.len()));
    }
    masks.sort_by_key(|&m| (m.count_ones(), iter_mask(m).collect::<Vec<_>>()));
    let cand = candidates_mask(q, u);
    let mut examined = 0;
    for (i, &a) in masks.iter().enumerate() {
        for &b in &masks[i + 1..] {
            examined += 1;
            if examined > PAIR_SEARCH {
                return Err(CechError::NotDirected { first: None, second: None });
            }
            let common = iter_mask(cand)
                .filter(|&x| refines(q, 1 << x, a) && refines(q, 1 << x, b))
                .fold(0u64, |m, x| m | (1 << x));
            if q.join_mask(common) != u {
                let show = |m: ElemSet| {
                    let c = make_cover(q, u, &iter_mask(m).collect::<Vec<_>>()).expect("enumerated cover");
                    c.show(q)
                };
                return Err(CechError::NotDirected { first: Some(show(a)), second: Some(show(b)) });
            }
        }
    }
    Err(CechError::NotDirected { first: None, second: None })
}

/// `Ȟ^q(u, F)` for `q ≤ q_max` (default: one less than the terminal cover size).
pub fn element_cohomology(
    f: &AbPresheaf,
    u: Elem,
    q_max: Option<usize>,
    limits: &Limits,
) -> Result<ElementCohomology, CechError> {
    let q = f.base();
    if u >= q.len() {
        return Err(CechError::UnknownElement(u));
    }
    let (terminal, cover_count) = find_terminal_cover(q, u, limits)?;
    let result = cover_cohomology(f, &terminal, q_max)?;
    Ok(ElementCohomology { base: u, terminal, cover_count, result })
}
