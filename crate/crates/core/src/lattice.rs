//! Finite quantales given by explicit tables.
//!
//! Elements are indices `0..n` in declaration order; that order is the
//! tie-breaker everywhere downstream. Subsets of elements are `u64` bit
//! masks, which bounds every quantale at 64 elements.
//!
//! Distributivity is validated against binary joins and the empty join
//! only. Every finite join is an iterated binary join (or the empty one),
//! so `a ⊙ (b1 ∨ ... ∨ bk) = (a⊙b1) ∨ ... ∨ (a⊙bk)` follows by induction on
//! `k`, and in a finite lattice every join is finite.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::limits::Limits;
use crate::morphisms::MonotoneMap;

pub type Elem = usize;

/// Bit mask of a set of elements.
pub type ElemSet = u64;

/// Hard ceiling imposed by the bit-mask representation.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuantaleError {
    #[error("a quantale needs at least one element")]
    Empty,
    #[error("{what} has {n} elements, cap is {cap}")]
    SizeCapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("malformed table: {0}")]
    BadTable(String),
    #[error("duplicate element label {0:?}")]
    DuplicateLabel(String),
    #[error("order is not {property}: {witness}")]
    NotAPartialOrder { property: &'static str, witness: String },
    #[error("subset {{{}}} has no least upper bound", .subset.join(", "))]
    NotALattice { subset: Vec<String> },
    #[error("multiplication is not associative at ({0}, {1}, {2})")]
    NotAssociative(String, String, String),
    #[error("multiplication does not distribute: {0}")]
    NotDistributive(String),
    #[error("multiplication is not commutative at ({0}, {1})")]
    NotCommutative(String, String),
    #[error("multiplication is not semicartesian at ({0}, {1})")]
    NotSemicartesian(String, String),
    #[error("interval is not closed under multiplication: {0} ⊙ {1} = {2}")]
    NotClosedUnderMul(String, String, String),
}

/// Unvalidated tables for a quantale.
#[derive(Clone, Debug)]
pub struct RawQuantale {
    pub labels: Vec<String>,
    /// `leq[a][b]` holds when `a ≤ b`.
    pub leq: Vec<Vec<bool>>,
    /// `mul[a][b] = a ⊙ b`.
    pub mul: Vec<Vec<Elem>>,
}

impl RawQuantale {
    /// Builds the order as the reflexive-transitive closure of `edges`
    /// (`(a, b)` meaning `a ≤ b`).
    pub fn from_hasse(labels: Vec<String>, edges: &[(Elem, Elem)], mul: Vec<Vec<Elem>>) -> Self {
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in edges {
            if a < n && b < n {
                leq[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        RawQuantale { labels, leq, mul }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QuantaleFlags {
    pub semicartesian: bool,
    pub commutative: bool,
    /// `⊤` is a two-sided unit.
    pub unital: bool,
    pub idempotent: bool,
    /// Idempotent approximation preserves all joins.
    pub geometric: bool,
}

impl fmt::Display for QuantaleFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            (self.semicartesian, "semicartesian"),
            (self.commutative, "commutative"),
            (self.unital, "unital"),
            (self.idempotent, "idempotent"),
            (self.geometric, "geometric"),
        ];
        let on: Vec<&str> = names.iter().filter(|(b, _)| *b).map(|(_, s)| *s).collect();
        if on.is_empty() {
            write!(f, "none")
        } else {
            write!(f, "{}", on.join(" "))
        }
    }
}

/// A validated finite quantale. Immutable after construction.
#[derive(Clone, PartialEq, Eq)]
pub struct Quantale {
    labels: Vec<String>,
    below: Vec<ElemSet>,
    join: Vec<Elem>,
    mul: Vec<Elem>,
    approx: Vec<Elem>,
    bottom: Elem,
    top: Elem,
    flags: QuantaleFlags,
}

impl fmt::Debug for Quantale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Quantale").field("labels", &self.labels).field("flags", &self.flags).finish()
    }
}

pub fn validate_quantale(raw: RawQuantale, limits: &Limits) -> Result<Quantale, QuantaleError> {
    let RawQuantale { labels, leq, mul } = raw;
    let n = labels.len();
    if n == 0 {
        return Err(QuantaleError::Empty);
    }
    let cap = limits.quantale_elements.min(MAX_ELEMENTS);
    if n > cap {
        return Err(QuantaleError::SizeCapExceeded { what: "quantale", n, cap });
    }
    let mut seen = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if seen.insert(l.as_str(), i).is_some() {
            return Err(QuantaleError::DuplicateLabel(l.clone()));
        }
    }
    if leq.len() != n || leq.iter().any(|r| r.len() != n) {
        return Err(QuantaleError::BadTable(format!("order relation must be {n}x{n}")));
    }
    if mul.len() != n || mul.iter().any(|r| r.len() != n) {
        return Err(QuantaleError::BadTable(format!("multiplication table must be {n}x{n}")));
    }
    if let Some((a, b)) = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).find(|&(a, b)| mul[a][b] >= n) {
        return Err(QuantaleError::BadTable(format!("entry ({}, {}) is out of range", labels[a], labels[b])));
    }
    let lab = |i: Elem| labels[i].clone();

    // Partial order.
    for a in 0..n {
        if !leq[a][a] {
            return Err(QuantaleError::NotAPartialOrder { property: "reflexive", witness: lab(a) });
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            if leq[a][b] && leq[b][a] {
                return Err(QuantaleError::NotAPartialOrder {
                    property: "antisymmetric",
                    witness: format!("{} ≤ {} ≤ {}", lab(a), lab(b), lab(a)),
                });
            }
        }
    }
    for a in 0..n {
        for b in 0..n {
            if !leq[a][b] {
                continue;
            }
            for c in 0..n {
                if leq[b][c] && !leq[a][c] {
                    return Err(QuantaleError::NotAPartialOrder {
                        property: "transitive",
                        witness: format!("{} ≤ {} ≤ {}", lab(a), lab(b), lab(c)),
                    });
                }
            }
        }
    }
    let mut below = vec![0u64; n];
    for a in 0..n {
        for x in 0..n {
            if leq[x][a] {
                below[a] |= 1 << x;
            }
        }
    }
    let all: ElemSet = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };

    // Complete lattice: a bottom plus binary joins.
    let bottom = (0..n).find(|&b| (0..n).all(|x| leq[b][x])).ok_or(QuantaleError::NotALattice { subset: vec![] })?;
    let mut join = vec![0; n * n];
    for a in 0..n {
        for b in a..n {
            let ub: Vec<Elem> = (0..n).filter(|&x| leq[a][x] && leq[b][x]).collect();
            let least = ub
                .iter()
                .copied()
                .find(|&x| ub.iter().all(|&y| leq[x][y]))
                .ok_or_else(|| QuantaleError::NotALattice { subset: vec![lab(a), lab(b)] })?;
            join[a * n + b] = least;
            join[b * n + a] = least;
        }
    }
    let top = (0..n).find(|&t| below[t] == all).expect("finite lattice with joins has a top");

    let m = |a: Elem, b: Elem| mul[a][b];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if m(m(a, b), c) != m(a, m(b, c)) {
                    return Err(QuantaleError::NotAssociative(lab(a), lab(b), lab(c)));
                }
            }
        }
    }
    for a in 0..n {
        if m(a, bottom) != bottom || m(bottom, a) != bottom {
            return Err(QuantaleError::NotDistributive(format!(
                "{} ⊙ ⊥ or ⊥ ⊙ {} is not ⊥ (empty join)",
                lab(a),
                lab(a)
            )));
        }
        for b in 0..n {
            for c in b + 1..n {
                let bc = join[b * n + c];
                if m(a, bc) != join[m(a, b) * n + m(a, c)] {
                    return Err(QuantaleError::NotDistributive(format!(
                        "{} ⊙ ({} ∨ {}) differs from ({} ⊙ {}) ∨ ({} ⊙ {})",
                        lab(a),
                        lab(b),
                        lab(c),
                        lab(a),
                        lab(b),
                        lab(a),
                        lab(c)
                    )));
                }
                if m(bc, a) != join[m(b, a) * n + m(c, a)] {
                    return Err(QuantaleError::NotDistributive(format!(
                        "({} ∨ {}) ⊙ {} differs from ({} ⊙ {}) ∨ ({} ⊙ {})",
                        lab(b),
                        lab(c),
                        lab(a),
                        lab(b),
                        lab(a),
                        lab(c),
                        lab(a)
                    )));
                }
            }
        }
    }

    let flat_mul: Vec<Elem> = mul.iter().flatten().copied().collect();
    let mut q =
        Quantale { labels, below, join, mul: flat_mul, approx: vec![], bottom, top, flags: QuantaleFlags::default() };
    q.approx = (0..n).map(|x| q.compute_idem_approx(x)).collect();
    q.flags = q.compute_flags();
    Ok(q)
}

impl Quantale {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: Elem) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<Elem> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn flags(&self) -> QuantaleFlags {
        self.flags
    }

    #[inline]
    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.below[b] & (1 << a) != 0
    }

    /// Mask of `{x : x ≤ a}`.
    pub fn down_set(&self, a: Elem) -> ElemSet {
        self.below[a]
    }

    #[inline]
    pub fn join2(&self, a: Elem, b: Elem) -> Elem {
        self.join[a * self.len() + b]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a * self.len() + b]
    }

    /// Least upper bound; the empty join is `⊥`.
    pub fn join<I: IntoIterator<Item = Elem>>(&self, items: I) -> Elem {
        items.into_iter().fold(self.bottom, |acc, x| self.join2(acc, x))
    }

    pub fn join_mask(&self, set: ElemSet) -> Elem {
        self.join(iter_mask(set))
    }

    /// Greatest lower bound.
    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.join_mask(self.below[a] & self.below[b])
    }

    /// Left-associated product `x0 ⊙ x1 ⊙ ... ⊙ xk`; the empty product is `⊤`.
    pub fn product<I: IntoIterator<Item = Elem>>(&self, items: I) -> Elem {
        let mut it = items.into_iter();
        match it.next() {
            None => self.top,
            Some(first) => it.fold(first, |acc, x| self.mul(acc, x)),
        }
    }

    pub fn is_idempotent(&self, a: Elem) -> bool {
        self.mul(a, a) == a
    }

    /// `q⁻ = ⋁{p idempotent : p ≤ q ⊙ p}`.
    pub fn idem_approx(&self, q: Elem) -> Elem {
        self.approx[q]
    }

    fn compute_idem_approx(&self, q: Elem) -> Elem {
        self.join(self.elements().filter(|&p| self.is_idempotent(p) && self.leq(p, self.mul(q, p))))
    }

    /// Elements with exactly one lower cover, i.e. not the join of the
    /// elements strictly below them.
    pub fn is_join_irreducible(&self, a: Elem) -> bool {
        a != self.bottom && self.join_mask(self.below[a] & !(1 << a)) != a
    }

    /// Covering pairs `(a, b)` with `a < b` and nothing strictly between.
    pub fn hasse_edges(&self) -> Vec<(Elem, Elem)> {
        let mut out = Vec::new();
        for b in self.elements() {
            for a in iter_mask(self.below[b] & !(1 << b)) {
                let between = self.below[b] & !(1 << b) & !self.below[a];
                if iter_mask(between).all(|c| !self.leq(a, c)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Elements in an order compatible with `≤` (down-set size, then index).
    pub fn linear_extension(&self) -> Vec<Elem> {
        let mut v: Vec<Elem> = self.elements().collect();
        v.sort_by_key(|&a| (self.below[a].count_ones(), a));
        v
    }

    fn compute_flags(&self) -> QuantaleFlags {
        let n = self.len();
        let pairs = || (0..n).flat_map(move |a| (0..n).map(move |b| (a, b)));
        let semicartesian = pairs().all(|(a, b)| self.leq(self.mul(a, b), a) && self.leq(self.mul(a, b), b));
        let commutative = pairs().all(|(a, b)| self.mul(a, b) == self.mul(b, a));
        let unital = self.elements().all(|a| self.mul(self.top, a) == a && self.mul(a, self.top) == a);
        let idempotent = self.elements().all(|a| self.is_idempotent(a));
        let geometric = self.approx[self.bottom] == self.bottom
            && pairs().all(|(a, b)| self.join2(self.approx[a], self.approx[b]) == self.approx[self.join2(a, b)]);
        QuantaleFlags { semicartesian, commutative, unital, idempotent, geometric }
    }

    pub fn require_commutative(&self) -> Result<(), QuantaleError> {
        for a in self.elements() {
            for b in a + 1..self.len() {
                if self.mul(a, b) != self.mul(b, a) {
                    return Err(QuantaleError::NotCommutative(self.labels[a].clone(), self.labels[b].clone()));
                }
            }
        }
        Ok(())
    }

    pub fn require_semicartesian(&self) -> Result<(), QuantaleError> {
        for a in self.elements() {
            for b in self.elements() {
                let ab = self.mul(a, b);
                if !self.leq(ab, a) || !self.leq(ab, b) {
                    return Err(QuantaleError::NotSemicartesian(self.labels[a].clone(), self.labels[b].clone()));
                }
            }
        }
        Ok(())
    }

    /// Rebuilds the raw tables (used for sub-quantales and re-validation).
    pub fn to_raw(&self) -> RawQuantale {
        let n = self.len();
        RawQuantale {
            labels: self.labels.clone(),
            leq: (0..n).map(|a| (0..n).map(|b| self.leq(a, b)).collect()).collect(),
            mul: (0..n).map(|a| (0..n).map(|b| self.mul(a, b)).collect()).collect(),
        }
    }

    /// Raw tables of the sub-structure on `members` (in the given order).
    fn restrict(&self, members: &[Elem]) -> Result<RawQuantale, (Elem, Elem, Elem)> {
        let pos: HashMap<Elem, usize> = members.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut mul = vec![vec![0; members.len()]; members.len()];
        for (i, &a) in members.iter().enumerate() {
            for (j, &b) in members.iter().enumerate() {
                let ab = self.mul(a, b);
                mul[i][j] = *pos.get(&ab).ok_or((a, b, ab))?;
            }
        }
        let leq = members.iter().map(|&a| members.iter().map(|&b| self.leq(a, b)).collect()).collect();
        let labels = members.iter().map(|&a| self.labels[a].clone()).collect();
        Ok(RawQuantale { labels, leq, mul })
    }
}

/// Iterates the set bits of a mask in increasing order.
pub fn iter_mask(mut m: ElemSet) -> impl Iterator<Item = Elem> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as Elem;
            m &= m - 1;
            Some(i)
        }
    })
}

pub fn mask_of<I: IntoIterator<Item = Elem>>(items: I) -> ElemSet {
    items.into_iter().fold(0, |m, i| m | (1 << i))
}

/// `{p : p ⊙ p = p}` in index order.
pub fn idempotents(q: &Quantale) -> Vec<Elem> {
    q.elements().filter(|&p| q.is_idempotent(p)).collect()
}

/// The locale of idempotents with the restricted multiplication, and its
/// inclusion into `q`.
pub fn idem_locale(q: &Arc<Quantale>, limits: &Limits) -> Result<(Arc<Quantale>, MonotoneMap), QuantaleError> {
    q.require_commutative()?;
    q.require_semicartesian()?;
    let members = idempotents(q);
    let raw = q.restrict(&members).map_err(|(a, b, c)| {
        QuantaleError::NotClosedUnderMul(q.labels[a].clone(), q.labels[b].clone(), q.labels[c].clone())
    })?;
    let idem = Arc::new(validate_quantale(raw, limits)?);
    let incl = MonotoneMap::new(idem.clone(), q.clone(), members).expect("inclusion is monotone");
    Ok((idem, incl))
}

/// First pair of idempotents where the restricted multiplication differs
/// from the meet computed in `q`; `None` when they agree everywhere.
pub fn idem_meet_disagreement(q: &Quantale) -> Option<(Elem, Elem)> {
    let ids = idempotents(q);
    for &a in &ids {
        for &b in &ids {
            if q.mul(a, b) != q.meet(a, b) {
                return Some((a, b));
            }
        }
    }
    None
}

/// Componentwise product with both projections.
pub fn product_quantale(
    a: &Arc<Quantale>,
    b: &Arc<Quantale>,
    limits: &Limits,
) -> Result<(Arc<Quantale>, MonotoneMap, MonotoneMap), QuantaleError> {
    let (na, nb) = (a.len(), b.len());
    let n = na * nb;
    let cap = limits.quantale_elements.min(MAX_ELEMENTS);
    if n > cap {
        return Err(QuantaleError::SizeCapExceeded { what: "product quantale", n, cap });
    }
    let idx = |x: Elem, y: Elem| x * nb + y;
    let mut labels = Vec::with_capacity(n);
    for x in 0..na {
        for y in 0..nb {
            labels.push(format!("({},{})", a.label(x), b.label(y)));
        }
    }
    let mut leq = vec![vec![false; n]; n];
    let mut mul = vec![vec![0; n]; n];
    for x1 in 0..na {
        for y1 in 0..nb {
            for x2 in 0..na {
                for y2 in 0..nb {
                    leq[idx(x1, y1)][idx(x2, y2)] = a.leq(x1, x2) && b.leq(y1, y2);
                    mul[idx(x1, y1)][idx(x2, y2)] = idx(a.mul(x1, x2), b.mul(y1, y2));
                }
            }
        }
    }
    let p = Arc::new(validate_quantale(RawQuantale { labels, leq, mul }, limits)?);
    let p1 = MonotoneMap::new(p.clone(), a.clone(), (0..n).map(|i| i / nb).collect()).expect("projection is monotone");
    let p2 = MonotoneMap::new(p.clone(), b.clone(), (0..n).map(|i| i % nb).collect()).expect("projection is monotone");
    Ok((p, p1, p2))
}

/// The interval `[a⁻, ⊤]` with inherited operations, and its inclusion.
pub fn interval_quantale(
    q: &Arc<Quantale>,
    a: Elem,
    limits: &Limits,
) -> Result<(Arc<Quantale>, MonotoneMap), QuantaleError> {
    let lo = q.idem_approx(a);
    let members: Vec<Elem> = q.elements().filter(|&x| q.leq(lo, x)).collect();
    let raw = q.restrict(&members).map_err(|(x, y, z)| {
        QuantaleError::NotClosedUnderMul(q.labels[x].clone(), q.labels[y].clone(), q.labels[z].clone())
    })?;
    let iv = Arc::new(validate_quantale(raw, limits)?);
    let incl = MonotoneMap::new(iv.clone(), q.clone(), members).expect("inclusion is monotone");
    Ok((iv, incl))
}

/// Quantale from a raw table of labels and Hasse edges, for tests and fixtures.
pub fn quantale_from_tables(
    labels: &[&str],
    edges: &[(Elem, Elem)],
    mul: &[&[Elem]],
) -> Result<Quantale, QuantaleError> {
    let raw = RawQuantale::from_hasse(
        labels.iter().map(|s| s.to_string()).collect(),
        edges,
        mul.iter().map(|r| r.to_vec()).collect(),
    );
    validate_quantale(raw, &Limits::default())
}

/// The `n`-element chain `0 < 1 < ... < n-1` with `⊙ = min`.
pub fn chain_locale(n: usize) -> Quantale {
    let labels: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let edges: Vec<(Elem, Elem)> = (1..n).map(|i| (i - 1, i)).collect();
    let mul = (0..n).map(|a| (0..n).map(|b| a.min(b)).collect()).collect();
    validate_quantale(RawQuantale::from_hasse(labels, &edges, mul), &Limits::default()).expect("chain is a locale")
}
