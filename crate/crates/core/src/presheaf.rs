//! Abelian presheaves on finite quantales and the sheaf-condition checker.
//!
//! A presheaf stores one group per element and one restriction per Hasse
//! edge; restrictions along longer chains are composed once at build time,
//! which is also where path-independence is verified.

use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::abgroups::{direct_sum, subquotient, FgAbGroup, GroupError, GroupHom, IntMatrix, Integer};
use crate::cech::{enumerate_covers, CechError, Cover};
use crate::lattice::{Elem, Quantale};
use crate::limits::Limits;
use crate::morphisms::MonotoneMap;
use crate::sources::{components, FiniteSpace};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PresheafError {
    #[error("expected {expected} values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
    #[error("{0} ≤ {1} is not a covering pair of the base")]
    NotAHasseEdge(String, String),
    #[error("no restriction given for {0} ≤ {1}")]
    MissingRestriction(String, String),
    #[error("restriction for {a} ≤ {b} must map {from} to {to}")]
    BadHomShape { a: String, b: String, from: String, to: String },
    #[error("restriction {a} ≤ {b} depends on the path: through {via1} and through {via2} differ")]
    PathDependence { a: String, b: String, via1: String, via2: String },
    #[error("base mismatch: {0}")]
    BaseMismatch(String),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Cech(#[from] CechError),
}

#[derive(Clone, Debug)]
pub struct AbPresheaf {
    base: Arc<Quantale>,
    values: Vec<FgAbGroup>,
    /// `res[a * n + b]` for `a ≤ b`: `value(b) -> value(a)`.
    res: Vec<Option<GroupHom>>,
}

/// Builds a presheaf from one restriction per Hasse edge `(a, b)`, `a ⋖ b`.
pub fn build_presheaf(
    base: &Arc<Quantale>,
    values: Vec<FgAbGroup>,
    edges: Vec<(Elem, Elem, GroupHom)>,
) -> Result<AbPresheaf, PresheafError> {
    let n = base.len();
    if values.len() != n {
        return Err(PresheafError::WrongValueCount { expected: n, got: values.len() });
    }
    let lab = |a: Elem| base.label(a).to_string();
    let hasse = base.hasse_edges();
    let mut edge_hom: Vec<Option<GroupHom>> = vec![None; n * n];
    for (a, b, h) in edges {
        if a >= n || b >= n || !hasse.contains(&(a, b)) {
            let show = |x: Elem| if x < n { lab(x) } else { format!("#{x}") };
            return Err(PresheafError::NotAHasseEdge(show(a), show(b)));
        }
        if h.domain() != &values[b] || h.codomain() != &values[a] {
            return Err(PresheafError::BadHomShape {
                a: lab(a),
                b: lab(b),
                from: values[b].to_string(),
                to: values[a].to_string(),
            });
        }
        edge_hom[a * n + b] = Some(h);
    }
    if let Some(&(a, b)) = hasse.iter().find(|&&(a, b)| edge_hom[a * n + b].is_none()) {
        return Err(PresheafError::MissingRestriction(lab(a), lab(b)));
    }
    let lower_covers: Vec<Vec<Elem>> =
        (0..n).map(|b| hasse.iter().filter(|&&(_, y)| y == b).map(|&(x, _)| x).collect()).collect();

    let mut res: Vec<Option<GroupHom>> = vec![None; n * n];
    for b in base.linear_extension() {
        res[b * n + b] = Some(GroupHom::identity(values[b].clone()));
        for a in base.elements().filter(|&a| a != b && base.leq(a, b)) {
            let mut found: Option<(Elem, GroupHom)> = None;
            for &c in lower_covers[b].iter().filter(|&&c| base.leq(a, c)) {
                let lower = res[a * n + c].as_ref().expect("computed in linear-extension order");
                let edge = edge_hom[c * n + b].as_ref().expect("every Hasse edge present");
                let h = lower.compose(edge)?;
                match &found {
                    None => found = Some((c, h)),
                    Some((c0, h0)) if *h0 != h => {
                        return Err(PresheafError::PathDependence {
                            a: lab(a),
                            b: lab(b),
                            via1: lab(*c0),
                            via2: lab(c),
                        })
                    }
                    Some(_) => {}
                }
            }
            res[a * n + b] = Some(found.expect("a < b has a lower cover of b above a").1);
        }
    }
    Ok(AbPresheaf { base: base.clone(), values, res })
}

impl AbPresheaf {
    pub fn base(&self) -> &Arc<Quantale> {
        &self.base
    }

    pub fn value(&self, a: Elem) -> &FgAbGroup {
        &self.values[a]
    }

    pub fn values(&self) -> &[FgAbGroup] {
        &self.values
    }

    /// Restriction `value(b) -> value(a)`; `None` unless `a ≤ b`.
    pub fn res(&self, a: Elem, b: Elem) -> Option<&GroupHom> {
        self.res[a * self.base.len() + b].as_ref()
    }

    /// Restrictions along the Hasse edges, the data `build_presheaf` takes.
    pub fn hasse_restrictions(&self) -> Vec<(Elem, Elem, GroupHom)> {
        self.base.hasse_edges().into_iter().map(|(a, b)| (a, b, self.res(a, b).expect("edge").clone())).collect()
    }
}

/// Every value `k`, every restriction the identity.
pub fn constant_presheaf(base: &Arc<Quantale>, k: &FgAbGroup) -> AbPresheaf {
    let edges = base.hasse_edges().into_iter().map(|(a, b)| (a, b, GroupHom::identity(k.clone()))).collect();
    build_presheaf(base, vec![k.clone(); base.len()], edges).expect("identities compose path-independently")
}

/// One copy of `k` per connected component of each open. `base` must be
/// the locale of `x` (element `i` is open `i`).
pub fn locally_constant_sheaf(
    base: &Arc<Quantale>,
    x: &FiniteSpace,
    k: &FgAbGroup,
) -> Result<AbPresheaf, PresheafError> {
    let opens = x.opens();
    if base.len() != opens.len()
        || base.elements().any(|a| base.elements().any(|b| base.leq(a, b) != (opens[a] & !opens[b] == 0)))
    {
        return Err(PresheafError::BaseMismatch("quantale is not the locale of the given space".into()));
    }
    let comps: Vec<Vec<u64>> = opens.iter().map(|&u| components(x, u)).collect();
    let values: Vec<FgAbGroup> = comps.iter().map(|c| k.power(c.len())).collect();
    let g = k.ngens();
    let mut edges = Vec::new();
    for (a, b) in base.hasse_edges() {
        let mut m = IntMatrix::zeros(values[a].ngens(), values[b].ngens());
        for (i, &cv) in comps[a].iter().enumerate() {
            let j = comps[b].iter().position(|&cu| cv & !cu == 0).expect("component lies in one component");
            m.set_block(i * g, j * g, &IntMatrix::identity(g));
        }
        edges.push((a, b, GroupHom::new(values[b].clone(), values[a].clone(), m)?));
    }
    build_presheaf(base, values, edges)
}

/// `F ∘ f` on the source of `f`.
pub fn pullback_presheaf(f_sheaf: &AbPresheaf, f: &MonotoneMap) -> Result<AbPresheaf, PresheafError> {
    if **f.target() != *f_sheaf.base {
        return Err(PresheafError::BaseMismatch("map does not land in the presheaf's base".into()));
    }
    let src = f.source();
    let values = src.elements().map(|a| f_sheaf.value(f.apply(a)).clone()).collect();
    let edges = src
        .hasse_edges()
        .into_iter()
        .map(|(a, b)| (a, b, f_sheaf.res(f.apply(a), f.apply(b)).expect("monotone map keeps order").clone()))
        .collect();
    build_presheaf(src, values, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SheafFailureKind {
    NotInjective,
    NotExact,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafFailure {
    pub cover: Cover,
    pub kind: SheafFailureKind,
    /// Lift of an offending element: in `value(u)` for `NotInjective`, in
    /// the product of member values for `NotExact`.
    pub witness: Vec<Integer>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SheafReport {
    pub covers_checked: usize,
    pub failure_count: usize,
    /// First failures in canonical order, at most the witness cap.
    pub failures: Vec<SheafFailure>,
}

impl SheafReport {
    pub fn is_sheaf(&self) -> bool {
        self.failure_count == 0
    }
}

/// The maps `e : F(u) -> Π F(u_i)` and `p - q : Π F(u_i) -> Π_{i<j} F(u_i ⊙ u_j)`.
///
/// Only pairs `i < j` are used: the `(i, i)` rows of `p - q` vanish and the
/// `(j, i)` rows are negatives of the `(i, j)` rows, so the kernel over all
/// ordered pairs is the same.
pub fn equalizer_maps(f: &AbPresheaf, cover: &Cover) -> Result<(GroupHom, GroupHom), PresheafError> {
    let q = &f.base;
    let u = cover.base();
    let ms = cover.members();
    let prod = direct_sum(ms.iter().map(|&m| f.value(m)));
    let mut e = IntMatrix::zeros(prod.group.ngens(), f.value(u).ngens());
    for (i, &m) in ms.iter().enumerate() {
        let r = f.res(m, u).ok_or_else(|| unavailable(q, m, u))?;
        e.set_block(prod.offsets[i], 0, r.matrix());
    }
    let pairs: Vec<(usize, usize)> = (0..ms.len()).flat_map(|i| (i + 1..ms.len()).map(move |j| (i, j))).collect();
    let overlaps: Vec<Elem> = pairs.iter().map(|&(i, j)| q.mul(ms[i], ms[j])).collect();
    let target = direct_sum(overlaps.iter().map(|&w| f.value(w)));
    let mut d = IntMatrix::zeros(target.group.ngens(), prod.group.ngens());
    for (p, (&(i, j), &w)) in pairs.iter().zip(&overlaps).enumerate() {
        let ri = f.res(w, ms[i]).ok_or_else(|| unavailable(q, w, ms[i]))?;
        let rj = f.res(w, ms[j]).ok_or_else(|| unavailable(q, w, ms[j]))?;
        d.set_block(target.offsets[p], prod.offsets[i], ri.matrix());
        d.set_block(target.offsets[p], prod.offsets[j], &rj.matrix().neg());
    }
    let e = GroupHom::new(f.value(u).clone(), prod.group.clone(), e)?;
    let d = GroupHom::new(prod.group, target.group, d)?;
    Ok((e, d))
}

fn unavailable(q: &Quantale, a: Elem, b: Elem) -> PresheafError {
    PresheafError::Cech(CechError::RestrictionUnavailable(q.label(a).to_string(), q.label(b).to_string()))
}

/// `None` when the equalizer condition holds at `cover`.
pub fn check_cover(f: &AbPresheaf, cover: &Cover) -> Result<Option<SheafFailure>, PresheafError> {
    let (e, d) = equalizer_maps(f, cover)?;
    let kernel = subquotient(&e, &GroupHom::zero(FgAbGroup::trivial(), e.domain().clone()))?;
    if !kernel.group().is_trivial() {
        return Ok(Some(SheafFailure {
            cover: cover.clone(),
            kind: SheafFailureKind::NotInjective,
            witness: kernel.representatives()[0].clone(),
        }));
    }
    let gap = subquotient(&d, &e)?;
    if !gap.group().is_trivial() {
        return Ok(Some(SheafFailure {
            cover: cover.clone(),
            kind: SheafFailureKind::NotExact,
            witness: gap.representatives()[0].clone(),
        }));
    }
    Ok(None)
}

/// Checks the given covers, or every cover of every element when `None`.
pub fn sheaf_check(f: &AbPresheaf, covers: Option<&[Cover]>, limits: &Limits) -> Result<SheafReport, PresheafError> {
    let owned;
    let covers = match covers {
        Some(c) => c,
        None => {
            let mut all = Vec::new();
            for u in f.base.elements() {
                all.extend(enumerate_covers(&f.base, u, limits)?);
            }
            owned = all;
            &owned
        }
    };
    let results: Vec<Option<SheafFailure>> = covers.par_iter().map(|c| check_cover(f, c)).collect::<Result<_, _>>()?;
    let failure_count = results.iter().filter(|r| r.is_some()).count();
    let failures = results.into_iter().flatten().take(limits.witnesses).collect();
    Ok(SheafReport { covers_checked: covers.len(), failure_count, failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{chain_locale, quantale_from_tables};
    use crate::sources::locale_of_space;

    fn z() -> FgAbGroup {
        FgAbGroup::free(1)
    }

    fn pseudocircle() -> FiniteSpace {
        let pts = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
        FiniteSpace::new(pts, vec![0, 0b0001, 0b0010, 0b0011, 0b0111, 0b1011, 0b1111]).unwrap()
    }

    #[test]
    fn constant_on_chain() {
        let q = Arc::new(chain_locale(3));
        let f = constant_presheaf(&q, &z());
        assert_eq!(f.res(0, 2).unwrap(), &GroupHom::identity(z()));
        assert!(f.res(2, 0).is_none());
    }

    #[test]
    fn constant_fails_only_at_empty_cover() {
        let q = Arc::new(chain_locale(3));
        let report = sheaf_check(&constant_presheaf(&q, &z()), None, &Limits::default()).unwrap();
        assert_eq!(report.failure_count, 1);
        assert!(report.failures[0].cover.is_empty());
        assert_eq!(report.failures[0].kind, SheafFailureKind::NotInjective);
    }

    #[test]
    fn path_dependence_detected() {
        // Boolean square 0 < a, b < 1
        let q = Arc::new(
            quantale_from_tables(
                &["0", "a", "b", "1"],
                &[(0, 1), (0, 2), (1, 3), (2, 3)],
                &[&[0, 0, 0, 0], &[0, 1, 0, 1], &[0, 0, 2, 2], &[0, 1, 2, 3]],
            )
            .unwrap(),
        );
        let id = GroupHom::identity(z());
        let mut edges: Vec<(Elem, Elem, GroupHom)> =
            q.hasse_edges().into_iter().map(|(a, b)| (a, b, id.clone())).collect();
        edges[0].2 = id.scaled(2);
        let err = build_presheaf(&q, vec![z(); 4], edges).unwrap_err();
        assert!(matches!(err, PresheafError::PathDependence { .. }));
    }

    #[test]
    fn locally_constant_on_pseudocircle() {
        let x = pseudocircle();
        let q = Arc::new(locale_of_space(&x, &Limits::default()).unwrap());
        let f = locally_constant_sheaf(&q, &x, &z()).unwrap();
        assert_eq!(f.value(3), &FgAbGroup::free(2));
        assert_eq!(f.value(6), &z());
        assert!(f.value(0).is_trivial());
        let report = sheaf_check(&f, None, &Limits::default()).unwrap();
        assert!(report.is_sheaf(), "{:?}", report.failures);
    }

    #[test]
    fn shape_errors() {
        let q = Arc::new(chain_locale(2));
        let err = build_presheaf(&q, vec![z(); 2], vec![]).unwrap_err();
        assert!(matches!(err, PresheafError::MissingRestriction(..)));
        let err = build_presheaf(&q, vec![z(); 2], vec![(0, 1, GroupHom::identity(FgAbGroup::free(2)))]).unwrap_err();
        assert!(matches!(err, PresheafError::BadHomShape { .. }));
        let err = build_presheaf(&q, vec![z()], vec![]).unwrap_err();
        assert!(matches!(err, PresheafError::WrongValueCount { .. }));
    }

    #[test]
    fn pullback_along_identity_and_constant_map() {
        let q = Arc::new(chain_locale(3));
        let f = constant_presheaf(&q, &FgAbGroup::cyclic(2));
        let same = pullback_presheaf(&f, &MonotoneMap::identity(&q)).unwrap();
        assert_eq!(same.values(), f.values());
        let top = pullback_presheaf(&f, &MonotoneMap::constant(&q, &q, 2)).unwrap();
        assert_eq!(top.values(), f.values());
    }
}
