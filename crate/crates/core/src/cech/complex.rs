//! Čech cochain complexes of a family and their cohomology.

use crate::abgroups::{direct_sum, FgAbGroup, GroupHom, IntComplex, IntMatrix, Subquotient};
use crate::lattice::Elem;
use crate::presheaf::AbPresheaf;

use super::{CechError, Cover};

/// `C^q = Π_{i0<...<iq} F(u_i0 ⊙ ... ⊙ u_iq)` for `q` up to a chosen degree.
#[derive(Clone, Debug)]
pub struct CechComplex {
    family: Vec<Elem>,
    tuples: Vec<Vec<Vec<usize>>>,
    products: Vec<Vec<Elem>>,
    offsets: Vec<Vec<usize>>,
    complex: IntComplex,
}

impl CechComplex {
    pub fn family(&self) -> &[Elem] {
        &self.family
    }

    /// Number of stored degrees; `C^q` is trivial from here on.
    pub fn degrees(&self) -> usize {
        self.tuples.len()
    }

    /// Strictly increasing index tuples of degree `q`, lexicographic.
    pub fn tuples(&self, q: usize) -> &[Vec<usize>] {
        self.tuples.get(q).map_or(&[], |t| t.as_slice())
    }

    /// Product element of each tuple of degree `q`.
    pub fn products(&self, q: usize) -> &[Elem] {
        self.products.get(q).map_or(&[], |t| t.as_slice())
    }

    /// Generator offset of each tuple's block in `C^q`.
    pub fn offsets(&self, q: usize) -> &[usize] {
        self.offsets.get(q).map_or(&[], |t| t.as_slice())
    }

    pub fn position(&self, q: usize, tuple: &[usize]) -> Option<usize> {
        self.tuples(q).binary_search_by(|t| t.as_slice().cmp(tuple)).ok()
    }

    pub fn complex(&self) -> &IntComplex {
        &self.complex
    }
}

/// All strictly increasing `len`-tuples from `0..m`, lexicographic.
pub(crate) fn increasing_tuples(m: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..len).collect();
    if len > m {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..len).rev().find(|&i| cur[i] < m - len + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..len {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The complex of a cover, in every degree where it can be nonzero.
pub fn build_complex(f: &AbPresheaf, cover: &Cover) -> Result<CechComplex, CechError> {
    build_family_complex(f, cover.members(), None)
}

/// The complex of an arbitrary family (repeats allowed), stored through
/// degree `top` when given.
pub fn build_family_complex(f: &AbPresheaf, family: &[Elem], top: Option<usize>) -> Result<CechComplex, CechError> {
    let q = f.base();
    if let Some(&bad) = family.iter().find(|&&e| e >= q.len()) {
        return Err(CechError::UnknownElement(bad));
    }
    let m = family.len();
    let degrees = top.map_or(m, |t| (t + 1).min(m));
    let mut tuples = Vec::with_capacity(degrees);
    let mut products = Vec::with_capacity(degrees);
    let mut offsets = Vec::with_capacity(degrees);
    let mut groups = Vec::with_capacity(degrees);
    for d in 0..degrees {
        let ts = increasing_tuples(m, d + 1);
        let ps: Vec<Elem> = ts.iter().map(|t| q.product(t.iter().map(|&i| family[i]))).collect();
        let sum = direct_sum(ps.iter().map(|&p| f.value(p)));
        tuples.push(ts);
        products.push(ps);
        offsets.push(sum.offsets);
        groups.push(sum.group);
    }
    let mut differentials = Vec::with_capacity(degrees.saturating_sub(1));
    for d in 0..degrees.saturating_sub(1) {
        let mut mat = IntMatrix::zeros(groups[d + 1].ngens(), groups[d].ngens());
        for (row, t) in tuples[d + 1].iter().enumerate() {
            let pt = products[d + 1][row];
            for k in 0..t.len() {
                let face: Vec<usize> = t.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
                let col = tuples[d].binary_search(&face).expect("faces are tuples of the previous degree");
                let pf = products[d][col];
                let r = f
                    .res(pt, pf)
                    .ok_or_else(|| CechError::RestrictionUnavailable(q.label(pt).into(), q.label(pf).into()))?;
                let block = if k % 2 == 0 { r.matrix().clone() } else { r.matrix().neg() };
                mat.set_block(offsets[d + 1][row], offsets[d][col], &block);
            }
        }
        differentials.push(GroupHom::new(groups[d].clone(), groups[d + 1].clone(), mat)?);
    }
    let complex = IntComplex::new(groups, differentials)?;
    Ok(CechComplex { family: family.to_vec(), tuples, products, offsets, complex })
}

/// Cohomology of one cover (or family) in degrees `0..=q_max`.
#[derive(Clone, Debug)]
pub struct CohomologyResult {
    pub complex: CechComplex,
    pub subquotients: Vec<Subquotient>,
}

impl CohomologyResult {
    pub fn groups(&self) -> Vec<FgAbGroup> {
        self.subquotients.iter().map(|s| s.group().clone()).collect()
    }

    pub fn group(&self, q: usize) -> FgAbGroup {
        self.subquotients.get(q).map(|s| s.group().clone()).unwrap_or_default()
    }

    pub fn q_max(&self) -> usize {
        self.subquotients.len().saturating_sub(1)
    }
}

/// Default top degree for a family of size `m`.
pub fn default_q_max(m: usize) -> usize {
    m.saturating_sub(1)
}

pub fn family_cohomology(f: &AbPresheaf, family: &[Elem], q_max: Option<usize>) -> Result<CohomologyResult, CechError> {
    let q_max = q_max.unwrap_or_else(|| default_q_max(family.len()));
    let complex = build_family_complex(f, family, Some(q_max + 1))?;
    let subquotients = (0..=q_max).map(|q| complex.complex().cohomology(q)).collect();
    Ok(CohomologyResult { complex, subquotients })
}

pub fn cover_cohomology(f: &AbPresheaf, cover: &Cover, q_max: Option<usize>) -> Result<CohomologyResult, CechError> {
    family_cohomology(f, cover.members(), q_max)
}
