//! Refinements between families, the cochain maps they induce, and common
//! refinements.
//!
//! A witness `r` sends index `i` of the finer family `U` to an index of the
//! coarser family `V` with `u_i ≤ v_r(i)`. The induced cochain map uses the
//! alternating extension: a tuple whose image repeats an index maps to
//! zero, otherwise it picks up the sign of the permutation sorting the image.

use crate::abgroups::induced_map_unchecked;
use crate::abgroups::{GroupHom, IntMatrix, Subquotient};
use crate::lattice::{Elem, Quantale};
use crate::presheaf::AbPresheaf;

use super::{make_cover, CechComplex, CechError, CohomologyResult, Cover};

/// Canonical witness: each `u_i` goes to the smallest-index `v_j` above it.
pub fn find_refinement(q: &Quantale, finer: &[Elem], coarser: &[Elem]) -> Option<Vec<usize>> {
    finer.iter().map(|&u| coarser.iter().position(|&v| q.leq(u, v))).collect()
}

/// Every witness, in lexicographic order, stopping after `cap`.
/// The flag reports whether the list was cut short.
pub fn all_refinements(q: &Quantale, finer: &[Elem], coarser: &[Elem], cap: usize) -> (Vec<Vec<usize>>, bool) {
    let choices: Vec<Vec<usize>> =
        finer.iter().map(|&u| (0..coarser.len()).filter(|&j| q.leq(u, coarser[j])).collect()).collect();
    if choices.iter().any(|c| c.is_empty()) {
        return (vec![], false);
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; finer.len()];
    loop {
        if out.len() == cap {
            return (out, true);
        }
        out.push(idx.iter().zip(&choices).map(|(&k, c)| c[k]).collect());
        let Some(i) = (0..idx.len()).rev().find(|&i| idx[i] + 1 < choices[i].len()) else {
            return (out, false);
        };
        idx[i] += 1;
        for k in idx.iter_mut().skip(i + 1) {
            *k = 0;
        }
    }
}

fn check_witness(q: &Quantale, finer: &[Elem], coarser: &[Elem], r: &[usize]) -> Result<(), CechError> {
    if r.len() != finer.len() {
        return Err(CechError::InvalidWitness(format!("{} indices for {} members", r.len(), finer.len())));
    }
    for (i, &j) in r.iter().enumerate() {
        if j >= coarser.len() || !q.leq(finer[i], coarser[j]) {
            return Err(CechError::InvalidWitness(format!("index {i} is not sent above itself")));
        }
    }
    Ok(())
}

/// Sorts `v` and returns the sign of the sorting permutation, or `None`
/// when `v` has a repeated entry.
fn sort_with_sign(v: &mut [usize]) -> Option<i64> {
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// `m_r : C^q(V) -> C^q(U)` for `q` below `degrees`, checked to commute with
/// the differentials.
pub fn refinement_map(
    f: &AbPresheaf,
    r: &[usize],
    finer: &CechComplex,
    coarser: &CechComplex,
    degrees: usize,
) -> Result<Vec<GroupHom>, CechError> {
    let q = f.base();
    check_witness(q, finer.family(), coarser.family(), r)?;
    let mut maps = Vec::with_capacity(degrees);
    for d in 0..degrees {
        let (src, dst) = (coarser.complex().group(d), finer.complex().group(d));
        let mut mat = IntMatrix::zeros(dst.ngens(), src.ngens());
        for (row, s) in finer.tuples(d).iter().enumerate() {
            let mut image: Vec<usize> = s.iter().map(|&i| r[i]).collect();
            let Some(sign) = sort_with_sign(&mut image) else { continue };
            let Some(col) = coarser.position(d, &image) else { continue };
            let (pu, pv) = (finer.products(d)[row], coarser.products(d)[col]);
            let res = f
                .res(pu, pv)
                .ok_or_else(|| CechError::RestrictionUnavailable(q.label(pu).into(), q.label(pv).into()))?;
            let block = if sign > 0 { res.matrix().clone() } else { res.matrix().neg() };
            mat.set_block(finer.offsets(d)[row], coarser.offsets(d)[col], &block);
        }
        maps.push(GroupHom::new(src, dst, mat)?);
    }
    for d in 0..degrees.saturating_sub(1) {
        let left = finer.complex().differential(d).compose(&maps[d])?;
        let right = maps[d + 1].compose(&coarser.complex().differential(d))?;
        if left != right {
            return Err(CechError::NotACochainMap(d));
        }
    }
    Ok(maps)
}

fn check_ambient(h: &GroupHom, src: &Subquotient, dst: &Subquotient) -> Result<(), CechError> {
    if h.domain() != src.ambient() || h.codomain() != dst.ambient() {
        return Err(CechError::BaseMismatch("cochain map does not match the cohomology data".into()));
    }
    Ok(())
}

/// `Ȟ^q(V) -> Ȟ^q(U)` for every degree computed in both results.
pub fn induced_cohomology_maps(
    f: &AbPresheaf,
    r: &[usize],
    finer: &CohomologyResult,
    coarser: &CohomologyResult,
) -> Result<Vec<GroupHom>, CechError> {
    let degrees = finer.subquotients.len().min(coarser.subquotients.len());
    let chain = refinement_map(f, r, &finer.complex, &coarser.complex, degrees + 1)?;
    (0..degrees)
        .map(|d| {
            check_ambient(&chain[d], &coarser.subquotients[d], &finer.subquotients[d])?;
            Ok(induced_map_unchecked(&chain[d], &coarser.subquotients[d], &finer.subquotients[d]))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomotopyReport {
    pub witnesses: usize,
    pub truncated: bool,
    /// First pair of witnesses and degree where the induced maps differ.
    pub mismatch: Option<(Vec<usize>, Vec<usize>, usize)>,
}

impl HomotopyReport {
    pub fn consistent(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Compares the induced cohomology maps of every witness (up to `cap`).
pub fn homotopy_uniqueness_check(
    f: &AbPresheaf,
    finer: &CohomologyResult,
    coarser: &CohomologyResult,
    cap: usize,
) -> Result<HomotopyReport, CechError> {
    let q = f.base();
    let (ws, truncated) = all_refinements(q, finer.complex.family(), coarser.complex.family(), cap);
    let mut first: Option<(Vec<usize>, Vec<GroupHom>)> = None;
    for w in &ws {
        let maps = induced_cohomology_maps(f, w, finer, coarser)?;
        match &first {
            None => first = Some((w.clone(), maps)),
            Some((w0, m0)) => {
                if let Some(d) = (0..maps.len()).find(|&d| maps[d] != m0[d]) {
                    return Ok(HomotopyReport {
                        witnesses: ws.len(),
                        truncated,
                        mismatch: Some((w0.clone(), w.clone(), d)),
                    });
                }
            }
        }
    }
    Ok(HomotopyReport { witnesses: ws.len(), truncated, mismatch: None })
}

/// The cover of pointwise products `{u_i ⊙ v_j}` with canonical witnesses
/// into both inputs.
pub fn common_refinement(q: &Quantale, a: &Cover, b: &Cover) -> Result<(Cover, Vec<usize>, Vec<usize>), CechError> {
    if a.base() != b.base() {
        return Err(CechError::BaseMismatch(format!("covers of {} and {}", q.label(a.base()), q.label(b.base()))));
    }
    let products: Vec<Elem> = a.members().iter().flat_map(|&u| b.members().iter().map(move |&v| q.mul(u, v))).collect();
    let join = q.join(products.iter().copied());
    if join != a.base() {
        return Err(CechError::ProductNotACover { base: q.label(a.base()).into(), join: q.label(join).into() });
    }
    let c = make_cover(q, a.base(), &products)?;
    let ra = find_refinement(q, c.members(), a.members())
        .ok_or_else(|| CechError::InvalidWitness("product is not below a factor".into()))?;
    let rb = find_refinement(q, c.members(), b.members())
        .ok_or_else(|| CechError::InvalidWitness("product is not below a factor".into()))?;
    Ok((c, ra, rb))
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::abgroups::FgAbGroup;
    use crate::cech::{build_complex, cover_cohomology};
    use crate::limits::Limits;
    use crate::presheaf::locally_constant_sheaf;
    use crate::sources::{ideals_of_zmod, locale_of_space, FiniteSpace};

    fn circle() -> (Arc<Quantale>, AbPresheaf) {
        let pts = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        let x = FiniteSpace::new(pts, vec![0, 0b0001, 0b0010, 0b0011, 0b0111, 0b1011, 0b1111]).unwrap();
        let q = Arc::new(locale_of_space(&x, &Limits::default()).unwrap());
        let f = locally_constant_sheaf(&q, &x, &FgAbGroup::free(1)).unwrap();
        (q, f)
    }

    #[test]
    fn signs() {
        assert_eq!(sort_with_sign(&mut [0, 1, 2]), Some(1));
        assert_eq!(sort_with_sign(&mut [1, 0, 2]), Some(-1));
        assert_eq!(sort_with_sign(&mut [2, 0, 1]), Some(1));
        assert_eq!(sort_with_sign(&mut [1, 1]), None);
    }

    #[test]
    fn minimal_cover_refines_pair() {
        let (q, _) = circle();
        let fine = [1, 2, 4, 5];
        let coarse = [4, 5];
        assert_eq!(find_refinement(&q, &fine, &coarse), Some(vec![0, 0, 0, 1]));
        assert_eq!(find_refinement(&q, &[6], &coarse), None);
        let (all, cut) = all_refinements(&q, &fine, &coarse, 100);
        assert_eq!(all.len(), 4);
        assert!(!cut);
    }

    #[test]
    fn identity_witness_is_identity() {
        let (q, f) = circle();
        let c = make_cover(&q, 6, &[1, 2, 4, 5]).unwrap();
        let cx = build_complex(&f, &c).unwrap();
        let maps = refinement_map(&f, &[0, 1, 2, 3], &cx, &cx, cx.degrees()).unwrap();
        for (d, m) in maps.iter().enumerate() {
            assert_eq!(m, &GroupHom::identity(cx.complex().group(d)));
        }
    }

    #[test]
    fn repeated_image_gives_zero_block() {
        let (q, f) = circle();
        let fine = build_complex(&f, &make_cover(&q, 6, &[1, 2, 4, 5]).unwrap()).unwrap();
        let coarse = build_complex(&f, &make_cover(&q, 6, &[4, 5]).unwrap()).unwrap();
        let maps = refinement_map(&f, &[0, 0, 0, 1], &fine, &coarse, 2).unwrap();
        // tuple (1,4) -> (0,0): zero; the {a,b} overlap is only hit by (4,5)
        let row = fine.position(1, &[0, 2]).unwrap();
        let off = fine.offsets(1)[row];
        assert!((0..maps[1].matrix().cols()).all(|c| maps[1].matrix()[(off, c)] == 0.into()));
    }

    #[test]
    fn circle_homotopy_uniqueness() {
        let (q, f) = circle();
        let fine = cover_cohomology(&f, &make_cover(&q, 6, &[1, 2, 4, 5]).unwrap(), Some(2)).unwrap();
        let coarse = cover_cohomology(&f, &make_cover(&q, 6, &[4, 5]).unwrap(), Some(2)).unwrap();
        let rep = homotopy_uniqueness_check(&f, &fine, &coarse, 64).unwrap();
        assert_eq!(rep.witnesses, 4);
        assert!(rep.consistent());
        let maps = induced_cohomology_maps(&f, &[0, 0, 0, 1], &fine, &coarse).unwrap();
        assert!(maps[0].is_isomorphism());
    }

    #[test]
    fn mutual_refinement_is_iso() {
        let (q, f) = circle();
        let a = cover_cohomology(&f, &make_cover(&q, 6, &[1, 2, 4, 5]).unwrap(), Some(2)).unwrap();
        let b = cover_cohomology(&f, &make_cover(&q, 6, &[1, 2, 3, 4, 5]).unwrap(), Some(2)).unwrap();
        let ab = find_refinement(&q, a.complex.family(), b.complex.family()).unwrap();
        let ba = find_refinement(&q, b.complex.family(), a.complex.family()).unwrap();
        let to_a = induced_cohomology_maps(&f, &ab, &a, &b).unwrap();
        let to_b = induced_cohomology_maps(&f, &ba, &b, &a).unwrap();
        for d in 0..3 {
            let comp = to_a[d].compose(&to_b[d]).unwrap();
            assert_eq!(comp, GroupHom::identity(a.group(d)));
        }
    }

    #[test]
    fn common_refinements() {
        let (q, _) = ideals_of_zmod(6, &Limits::default()).unwrap();
        let two = q.index_of("(2)").unwrap();
        let three = q.index_of("(3)").unwrap();
        let a = make_cover(&q, q.top(), &[two, three]).unwrap();
        let b = make_cover(&q, q.top(), &[q.top()]).unwrap();
        let (c, ra, rb) = common_refinement(&q, &a, &b).unwrap();
        assert_eq!(c, a);
        assert_eq!(ra, vec![0, 1]);
        assert_eq!(rb, vec![0, 0]);
    }

    #[test]
    fn product_not_a_cover() {
        let (q, _) = ideals_of_zmod(4, &Limits::default()).unwrap();
        let two = q.index_of("(2)").unwrap();
        let c = make_cover(&q, two, &[two]).unwrap();
        assert!(matches!(common_refinement(&q, &c, &c), Err(CechError::ProductNotACover { .. })));
    }
}
