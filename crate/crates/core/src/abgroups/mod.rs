//! Finitely generated abelian groups and exact integer linear algebra.
//!
//! A group is stored as a list of cyclic factors on its generators: factor
//! `0` is an infinite cyclic generator, factor `d >= 2` a generator of order
//! `d`. Homomorphisms are integer matrices with one column per domain
//! generator. Cohomology is computed from free presentations with Smith
//! normal form, see [`subquotient`].

mod matrix;
mod snf;
mod subquotient;

use std::fmt;

use num_integer::Integer as _;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

pub use matrix::{IntMatrix, Integer};
pub use snf::{smith_normal_form, Snf};
pub(crate) use subquotient::induced_map_unchecked;
pub use subquotient::{induced_map, subquotient, Subquotient};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("factor {0} is not a valid cyclic order (use 0 for Z or an order >= 2)")]
    BadFactor(u64),
    #[error("matrix is {got:?}, expected {expected:?}")]
    BadShape { expected: (usize, usize), got: (usize, usize) },
    #[error("column {column} does not respect the order of its domain generator")]
    Incompatible { column: usize },
    #[error("composite is not zero (column {column})")]
    CompositionNotZero { column: usize },
    #[error("shapes do not compose: {0}")]
    IncompatibleShapes(String),
    #[error("map does not send the kernel into the kernel (generator {0})")]
    DoesNotPreserveKernel(usize),
    #[error("map does not send the image into the image (generator {0})")]
    DoesNotPreserveImage(usize),
    #[error("d^{degree} composed with d^{next} is not zero", next = .degree + 1)]
    NotAComplex { degree: usize },
}

/// A finitely generated abelian group given by cyclic factors on generators.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct FgAbGroup {
    factors: Vec<u64>,
}

impl FgAbGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self, GroupError> {
        if let Some(&bad) = factors.iter().find(|&&d| d == 1) {
            return Err(GroupError::BadFactor(bad));
        }
        Ok(FgAbGroup { factors })
    }

    pub fn trivial() -> Self {
        FgAbGroup { factors: vec![] }
    }

    pub fn free(rank: usize) -> Self {
        FgAbGroup { factors: vec![0; rank] }
    }

    pub fn cyclic(order: u64) -> Self {
        match order {
            1 => Self::trivial(),
            d => FgAbGroup { factors: vec![d] },
        }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    /// Number of generators.
    pub fn ngens(&self) -> usize {
        self.factors.len()
    }

    pub fn rank(&self) -> usize {
        self.factors.iter().filter(|&&d| d == 0).count()
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|&d| d != 0)
    }

    /// Order of a finite group, `None` if infinite.
    pub fn order(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |acc, &d| if d == 0 { None } else { acc.checked_mul(d) })
    }

    /// `n`-fold direct sum of this group with itself.
    pub fn power(&self, n: usize) -> Self {
        let mut factors = Vec::with_capacity(self.factors.len() * n);
        for _ in 0..n {
            factors.extend_from_slice(&self.factors);
        }
        FgAbGroup { factors }
    }

    /// Invariant-factor form: `d1 | d2 | ... | dk` (all >= 2) followed by zeros.
    pub fn canonical(&self) -> FgAbGroup {
        let torsion: Vec<Integer> = self.factors.iter().filter(|&&d| d != 0).map(|&d| Integer::from(d)).collect();
        let snf = smith_normal_form(&IntMatrix::diagonal(&torsion));
        let mut factors: Vec<u64> = snf
            .invariant_factors()
            .iter()
            .map(|d| d.to_u64().expect("torsion factor fits u64"))
            .filter(|&d| d != 1)
            .collect();
        factors.extend(std::iter::repeat_n(0, self.rank()));
        FgAbGroup { factors }
    }

    pub fn is_canonical(&self) -> bool {
        let torsion: Vec<u64> = self.factors.iter().copied().take_while(|&d| d != 0).collect();
        self.factors[torsion.len()..].iter().all(|&d| d == 0) && torsion.windows(2).all(|w| w[1] % w[0] == 0)
    }

    /// Reduces a coordinate vector to canonical representatives.
    pub fn reduce(&self, v: &mut [Integer]) {
        for (x, &d) in v.iter_mut().zip(&self.factors) {
            if d != 0 {
                *x = x.mod_floor(&Integer::from(d));
            }
        }
    }

    /// Relation matrix: one column `d * e_i` per torsion generator.
    pub fn relations(&self) -> IntMatrix {
        let cols: Vec<Vec<Integer>> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0)
            .map(|(i, &d)| {
                let mut c = vec![Integer::zero(); self.factors.len()];
                c[i] = Integer::from(d);
                c
            })
            .collect();
        IntMatrix::from_columns(self.factors.len(), &cols)
    }

    /// Whether a coordinate vector is zero in the group.
    pub fn is_zero_element(&self, v: &[Integer]) -> bool {
        v.iter().zip(&self.factors).all(|(x, &d)| if d == 0 { x.is_zero() } else { (x % Integer::from(d)).is_zero() })
    }
}

impl fmt::Debug for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Renders as `0`, `Z`, `Z^2`, `Z/2 + Z/4 + Z^3`, in generator order.
impl fmt::Display for FgAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = Vec::new();
        let mut i = 0;
        while i < self.factors.len() {
            let d = self.factors[i];
            let mut j = i;
            while j < self.factors.len() && self.factors[j] == d {
                j += 1;
            }
            let base = if d == 0 { "Z".to_string() } else { format!("Z/{d}") };
            let run = j - i;
            if run == 1 {
                parts.push(base);
            } else if d == 0 {
                parts.push(format!("Z^{run}"));
            } else {
                parts.push(format!("({base})^{run}"));
            }
            i = j;
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Whether two groups are isomorphic, by comparing invariant-factor forms.
pub fn groups_isomorphic(a: &FgAbGroup, b: &FgAbGroup) -> bool {
    a.canonical() == b.canonical()
}

/// A direct sum with the block offset of each summand.
#[derive(Clone, Debug)]
pub struct DirectSum {
    pub group: FgAbGroup,
    pub offsets: Vec<usize>,
}

impl DirectSum {
    pub fn block(&self, i: usize) -> std::ops::Range<usize> {
        let end = self.offsets.get(i + 1).copied().unwrap_or(self.group.ngens());
        self.offsets[i]..end
    }
}

pub fn direct_sum<'a, I: IntoIterator<Item = &'a FgAbGroup>>(groups: I) -> DirectSum {
    let mut factors = Vec::new();
    let mut offsets = Vec::new();
    for g in groups {
        offsets.push(factors.len());
        factors.extend_from_slice(&g.factors);
    }
    DirectSum { group: FgAbGroup { factors }, offsets }
}

/// A homomorphism between finitely generated abelian groups.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GroupHom {
    domain: FgAbGroup,
    codomain: FgAbGroup,
    matrix: IntMatrix,
}

impl GroupHom {
    /// Validates shape and compatibility with generator orders, then reduces
    /// entries in torsion rows to `[0, d)`.
    pub fn new(domain: FgAbGroup, codomain: FgAbGroup, mut matrix: IntMatrix) -> Result<Self, GroupError> {
        let expected = (codomain.ngens(), domain.ngens());
        if matrix.shape() != expected {
            return Err(GroupError::BadShape { expected, got: matrix.shape() });
        }
        for (j, &order) in domain.factors.iter().enumerate() {
            for (i, &c) in codomain.factors.iter().enumerate() {
                let x = &matrix[(i, j)];
                let ok = match (order, c) {
                    (_, 0) if order == 0 => true,
                    (_, 0) => x.is_zero(),
                    (0, _) => true,
                    (o, c) => ((x * Integer::from(o)) % Integer::from(c)).is_zero(),
                };
                if !ok {
                    return Err(GroupError::Incompatible { column: j });
                }
            }
        }
        for (i, &c) in codomain.factors.iter().enumerate() {
            if c != 0 {
                let m = Integer::from(c);
                for j in 0..domain.ngens() {
                    let v = matrix[(i, j)].mod_floor(&m);
                    matrix[(i, j)] = v;
                }
            }
        }
        Ok(GroupHom { domain, codomain, matrix })
    }

    pub fn zero(domain: FgAbGroup, codomain: FgAbGroup) -> Self {
        let matrix = IntMatrix::zeros(codomain.ngens(), domain.ngens());
        GroupHom { domain, codomain, matrix }
    }

    pub fn identity(g: FgAbGroup) -> Self {
        let matrix = IntMatrix::identity(g.ngens());
        GroupHom { domain: g.clone(), codomain: g, matrix }
    }

    pub fn domain(&self) -> &FgAbGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FgAbGroup {
        &self.codomain
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &GroupHom) -> Result<GroupHom, GroupError> {
        if inner.codomain != self.domain {
            return Err(GroupError::IncompatibleShapes(format!(
                "{} -> {} after {} -> {}",
                self.domain, self.codomain, inner.domain, inner.codomain
            )));
        }
        GroupHom::new(inner.domain.clone(), self.codomain.clone(), self.matrix.mul(&inner.matrix))
    }

    pub fn scaled(&self, c: i64) -> GroupHom {
        GroupHom::new(self.domain.clone(), self.codomain.clone(), self.matrix.scale(&Integer::from(c)))
            .expect("scaling preserves compatibility")
    }

    /// Whether every generator maps to zero.
    pub fn is_zero(&self) -> bool {
        (0..self.domain.ngens()).all(|j| self.codomain.is_zero_element(&self.matrix.column(j)))
    }

    /// First domain generator whose image is nonzero.
    pub fn first_nonzero_column(&self) -> Option<usize> {
        (0..self.domain.ngens()).find(|&j| !self.codomain.is_zero_element(&self.matrix.column(j)))
    }

    pub fn apply(&self, v: &[Integer]) -> Vec<Integer> {
        let mut out = self.matrix.mul_vec(v);
        self.codomain.reduce(&mut out);
        out
    }

    /// Whether the map is an isomorphism onto its codomain; only meaningful
    /// between canonical groups (as produced by [`subquotient`]).
    pub fn is_isomorphism(&self) -> bool {
        if self.domain.canonical() != self.codomain.canonical() {
            return false;
        }
        // injective and surjective: kernel and cokernel trivial
        let zero_in = GroupHom::zero(FgAbGroup::trivial(), self.domain.clone());
        let ker = subquotient(self, &zero_in).expect("zero composite");
        if !ker.group().is_trivial() {
            return false;
        }
        let zero_out = GroupHom::zero(self.codomain.clone(), FgAbGroup::trivial());
        let coker = subquotient(&zero_out, self).expect("zero composite");
        coker.group().is_trivial()
    }
}

/// A bounded cochain complex `C^0 -> C^1 -> ... -> C^top`.
#[derive(Clone, Debug)]
pub struct IntComplex {
    groups: Vec<FgAbGroup>,
    differentials: Vec<GroupHom>,
}

impl IntComplex {
    /// `differentials[q] : groups[q] -> groups[q + 1]`; verifies `d∘d = 0`.
    pub fn new(groups: Vec<FgAbGroup>, differentials: Vec<GroupHom>) -> Result<Self, GroupError> {
        if differentials.len() + 1 != groups.len().max(1) {
            return Err(GroupError::IncompatibleShapes(format!(
                "{} groups but {} differentials",
                groups.len(),
                differentials.len()
            )));
        }
        for (q, d) in differentials.iter().enumerate() {
            if d.domain() != &groups[q] || d.codomain() != &groups[q + 1] {
                return Err(GroupError::IncompatibleShapes(format!("differential {q}")));
            }
        }
        for q in 0..differentials.len().saturating_sub(1) {
            let dd = differentials[q + 1].compose(&differentials[q])?;
            if !dd.is_zero() {
                return Err(GroupError::NotAComplex { degree: q });
            }
        }
        Ok(IntComplex { groups, differentials })
    }

    pub fn groups(&self) -> &[FgAbGroup] {
        &self.groups
    }

    pub fn differentials(&self) -> &[GroupHom] {
        &self.differentials
    }

    /// Group in degree `q`, trivial outside the stored range.
    pub fn group(&self, q: usize) -> FgAbGroup {
        self.groups.get(q).cloned().unwrap_or_default()
    }

    /// `d^q`, zero maps outside the stored range.
    pub fn differential(&self, q: usize) -> GroupHom {
        self.differentials.get(q).cloned().unwrap_or_else(|| GroupHom::zero(self.group(q), self.group(q + 1)))
    }

    /// `d^{q-1}`, with `d^{-1}` the zero map from the trivial group.
    pub fn incoming(&self, q: usize) -> GroupHom {
        if q == 0 {
            GroupHom::zero(FgAbGroup::trivial(), self.group(0))
        } else {
            self.differential(q - 1)
        }
    }

    /// `ker d^q / im d^{q-1}` with class-coordinate data.
    pub fn cohomology(&self, q: usize) -> Subquotient {
        subquotient(&self.differential(q), &self.incoming(q)).expect("complex verified at construction")
    }

    /// Alternating sum of ranks.
    pub fn euler_characteristic(&self) -> i64 {
        self.groups.iter().enumerate().map(|(q, g)| if q % 2 == 0 { g.rank() as i64 } else { -(g.rank() as i64) }).sum()
    }
}

/// Gcd of a nonzero integer with a modulus, used by the coset oracle in tests.
pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(f: &[u64]) -> FgAbGroup {
        FgAbGroup::new(f.to_vec()).unwrap()
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(g(&[2, 3]).canonical(), g(&[6]));
        assert_eq!(g(&[0, 2]).canonical(), g(&[2, 0]));
        assert_eq!(g(&[4, 2, 0, 6]).canonical(), g(&[2, 2, 12, 0]));
        assert!(g(&[2, 12, 0]).is_canonical());
        assert!(!g(&[0, 2]).is_canonical());
    }

    #[test]
    fn isomorphism_of_groups() {
        assert!(groups_isomorphic(&g(&[2, 3]), &g(&[6])));
        assert!(!groups_isomorphic(&g(&[0]), &g(&[2])));
        assert!(groups_isomorphic(&FgAbGroup::free(0), &FgAbGroup::trivial()));
        assert!(!groups_isomorphic(&g(&[2, 2]), &g(&[4])));
    }

    #[test]
    fn factor_one_rejected() {
        assert_eq!(FgAbGroup::new(vec![0, 1]), Err(GroupError::BadFactor(1)));
    }

    #[test]
    fn direct_sums() {
        let s = direct_sum(std::iter::empty());
        assert!(s.group.is_trivial());
        let z = g(&[0]);
        let z2 = g(&[2]);
        let s = direct_sum([&z, &z2]);
        assert_eq!(s.group.canonical().factors(), &[2, 0]);
        assert_eq!(s.block(1), 1..2);
    }

    #[test]
    fn display() {
        assert_eq!(g(&[]).to_string(), "0");
        assert_eq!(g(&[0, 0]).to_string(), "Z^2");
        assert_eq!(g(&[2, 2, 0]).to_string(), "(Z/2)^2 + Z");
    }

    #[test]
    fn hom_compatibility() {
        // Z/2 -> Z/4 sending the generator to 2 is fine, to 1 is not
        assert!(GroupHom::new(g(&[2]), g(&[4]), IntMatrix::from_i64(1, 1, &[2])).is_ok());
        assert_eq!(
            GroupHom::new(g(&[2]), g(&[4]), IntMatrix::from_i64(1, 1, &[1])),
            Err(GroupError::Incompatible { column: 0 })
        );
        // torsion cannot map nontrivially into Z
        assert!(GroupHom::new(g(&[3]), g(&[0]), IntMatrix::from_i64(1, 1, &[1])).is_err());
        // entries are reduced
        let h = GroupHom::new(g(&[0]), g(&[3]), IntMatrix::from_i64(1, 1, &[-1])).unwrap();
        assert_eq!(h.matrix()[(0, 0)], Integer::from(2));
    }

    #[test]
    fn complex_rejects_nonzero_composite() {
        let z = g(&[0]);
        let id = GroupHom::identity(z.clone());
        assert!(matches!(
            IntComplex::new(vec![z.clone(), z.clone(), z], vec![id.clone(), id]),
            Err(GroupError::NotAComplex { degree: 0 })
        ));
    }
}
