//! Covers of an element: duplicate-free families joining to it.
//!
//! A family with repeats and its underlying set refine each other (send
//! every index to a position holding the same element), so both have the
//! same place in the refinement preorder and enumerating subsets loses
//! nothing.

use crate::lattice::{iter_mask, Elem, ElemSet, Quantale};
use crate::limits::Limits;

use super::CechError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cover {
    base: Elem,
    members: Vec<Elem>,
}

impl Cover {
    pub fn base(&self) -> Elem {
        self.base
    }

    /// Members in increasing element order; position `i` is index `i`.
    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mask(&self) -> ElemSet {
        self.members.iter().fold(0, |m, &e| m | (1 << e))
    }

    /// `{m1, m2, ...}` with element labels.
    pub fn show(&self, q: &Quantale) -> String {
        let names: Vec<&str> = self.members.iter().map(|&m| q.label(m)).collect();
        format!("{{{}}}", names.join(", "))
    }

    pub(crate) fn from_parts(base: Elem, members: Vec<Elem>) -> Self {
        Cover { base, members }
    }
}

/// Sorts, deduplicates and drops `⊥` (unless `u = ⊥`), then checks the join.
pub fn make_cover(q: &Quantale, u: Elem, members: &[Elem]) -> Result<Cover, CechError> {
    if let Some(&bad) = members.iter().chain(std::iter::once(&u)).find(|&&m| m >= q.len()) {
        return Err(CechError::UnknownElement(bad));
    }
    let mut ms: Vec<Elem> = members.to_vec();
    ms.sort_unstable();
    ms.dedup();
    if u != q.bottom() {
        ms.retain(|&m| m != q.bottom());
    }
    let join = q.join(ms.iter().copied());
    if join != u {
        return Err(CechError::NotACover {
            base: q.label(u).to_string(),
            members: ms.iter().map(|&m| q.label(m).to_string()).collect(),
            join: q.label(join).to_string(),
        });
    }
    Ok(Cover { base: u, members: ms })
}

/// Elements that may appear in a cover of `u`.
pub(crate) fn candidates_mask(q: &Quantale, u: Elem) -> ElemSet {
    if u == q.bottom() {
        1 << u
    } else {
        q.down_set(u) & !(1 << q.bottom())
    }
}

fn candidates(q: &Quantale, u: Elem, limits: &Limits) -> Result<Vec<Elem>, CechError> {
    let n = q.down_set(u).count_ones() as usize;
    if n > limits.cover_elements {
        return Err(CechError::SizeCapExceeded {
            what: "elements below the covered element",
            n,
            cap: limits.cover_elements,
        });
    }
    Ok(iter_mask(candidates_mask(q, u)).collect())
}

/// Calls `visit` on the member mask of every cover of `u`, in mask order.
pub(crate) fn for_each_cover_mask(
    q: &Quantale,
    u: Elem,
    limits: &Limits,
    mut visit: impl FnMut(ElemSet),
) -> Result<(), CechError> {
    let cand = candidates(q, u, limits)?;
    for bits in 0..1u64 << cand.len() {
        let mask = iter_mask(bits).fold(0u64, |m, i| m | (1 << cand[i]));
        if q.join_mask(mask) == u {
            visit(mask);
        }
    }
    Ok(())
}

/// Every cover of `u` in canonical order: by size, then lexicographically.
/// For `u = ⊥` these are the empty family and `{⊥}`.
pub fn enumerate_covers(q: &Quantale, u: Elem, limits: &Limits) -> Result<Vec<Cover>, CechError> {
    let mut out = Vec::new();
    for_each_cover_mask(q, u, limits, |mask| out.push(Cover { base: u, members: iter_mask(mask).collect() }))?;
    out.sort_by(|a, b| (a.len(), &a.members).cmp(&(b.len(), &b.members)));
    Ok(out)
}

pub fn count_covers(q: &Quantale, u: Elem, limits: &Limits) -> Result<usize, CechError> {
    let mut n = 0;
    for_each_cover_mask(q, u, limits, |_| n += 1)?;
    Ok(n)
}

/// Left-associated product of the members at `tuple`, in the given order.
pub fn tuple_product(q: &Quantale, members: &[Elem], tuple: &[usize]) -> Elem {
    q.product(tuple.iter().map(|&i| members[i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::chain_locale;
    use crate::sources::ideals_of_zmod;

    #[test]
    fn trivial_cover() {
        let q = chain_locale(3);
        let c = make_cover(&q, 2, &[2]).unwrap();
        assert_eq!(c.members(), &[2]);
    }

    #[test]
    fn zmod6_cover() {
        let (q, _) = ideals_of_zmod(6, &Limits::default()).unwrap();
        let two = q.index_of("(2)").unwrap();
        let three = q.index_of("(3)").unwrap();
        let c = make_cover(&q, q.top(), &[three, two, two, q.bottom()]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.members(), &[three.min(two), three.max(two)]);
    }

    #[test]
    fn zmod4_non_cover() {
        let (q, _) = ideals_of_zmod(4, &Limits::default()).unwrap();
        let two = q.index_of("(2)").unwrap();
        match make_cover(&q, q.top(), &[two]) {
            Err(CechError::NotACover { join, .. }) => assert_eq!(join, "(2)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bottom_covers() {
        let q = chain_locale(3);
        let covers = enumerate_covers(&q, 0, &Limits::default()).unwrap();
        assert_eq!(covers.len(), 2);
        assert!(covers[0].is_empty());
        assert_eq!(covers[1].members(), &[0]);
    }

    #[test]
    fn chain_top_covers() {
        let q = chain_locale(3);
        let covers = enumerate_covers(&q, 2, &Limits::default()).unwrap();
        // {2}, {1,2}
        assert_eq!(covers.len(), 2);
        assert_eq!(count_covers(&q, 2, &Limits::default()).unwrap(), 2);
    }

    #[test]
    fn nilpotent_product() {
        let (q, _) = ideals_of_zmod(4, &Limits::default()).unwrap();
        let two = q.index_of("(2)").unwrap();
        assert_eq!(tuple_product(&q, &[two, q.top()], &[0, 1]), two);
        assert_eq!(tuple_product(&q, &[two], &[0]), two);
    }
}
