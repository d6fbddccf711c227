//! Monotone maps between quantales, right adjoints, and geometric-morphism
//! certificates.
//!
//! Join preservation is checked on binary joins and the empty join, which
//! covers every finite join by induction.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{Elem, Quantale};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MorphismError {
    #[error("map table: {0}")]
    BadTable(String),
    #[error("map is not monotone: {0} ≤ {1} but images are not ordered")]
    NotMonotone(String, String),
    #[error("map does not preserve joins: {0}")]
    DoesNotPreserveJoins(String),
    #[error("maps do not compose: {0}")]
    NotComposable(String),
}

/// An order-preserving map between two validated quantales.
#[derive(Clone)]
pub struct MonotoneMap {
    source: Arc<Quantale>,
    target: Arc<Quantale>,
    table: Vec<Elem>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .table
            .iter()
            .enumerate()
            .map(|(a, &b)| format!("{}->{}", self.source.label(a), self.target.label(b)))
            .collect();
        write!(f, "MonotoneMap[{}]", pairs.join(", "))
    }
}

impl MonotoneMap {
    pub fn new(source: Arc<Quantale>, target: Arc<Quantale>, table: Vec<Elem>) -> Result<Self, MorphismError> {
        if table.len() != source.len() {
            return Err(MorphismError::BadTable(format!(
                "{} entries for a source with {} elements",
                table.len(),
                source.len()
            )));
        }
        if let Some(a) = table.iter().position(|&b| b >= target.len()) {
            return Err(MorphismError::BadTable(format!("image of {} is out of range", source.label(a))));
        }
        for a in source.elements() {
            for b in source.elements() {
                if source.leq(a, b) && !target.leq(table[a], table[b]) {
                    return Err(MorphismError::NotMonotone(source.label(a).into(), source.label(b).into()));
                }
            }
        }
        Ok(MonotoneMap { source, target, table })
    }

    pub fn identity(q: &Arc<Quantale>) -> Self {
        MonotoneMap { source: q.clone(), target: q.clone(), table: q.elements().collect() }
    }

    pub fn constant(source: &Arc<Quantale>, target: &Arc<Quantale>, value: Elem) -> Self {
        MonotoneMap { source: source.clone(), target: target.clone(), table: vec![value; source.len()] }
    }

    pub fn source(&self) -> &Arc<Quantale> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Quantale> {
        &self.target
    }

    pub fn table(&self) -> &[Elem] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, a: Elem) -> Elem {
        self.table[a]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &MonotoneMap) -> Result<MonotoneMap, MorphismError> {
        if *inner.target != *self.source {
            return Err(MorphismError::NotComposable("inner target differs from outer source".into()));
        }
        Ok(MonotoneMap {
            source: inner.source.clone(),
            target: self.target.clone(),
            table: inner.table.iter().map(|&a| self.table[a]).collect(),
        })
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target.len()];
        for &b in &self.table {
            hit[b] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// First failure of `f(⊥) = ⊥` or `f(a ∨ b) = f(a) ∨ f(b)`.
    pub fn join_failure(&self) -> Option<String> {
        self.empty_join_failure().or_else(|| self.binary_join_failure())
    }

    fn empty_join_failure(&self) -> Option<String> {
        let (s, t) = (&self.source, &self.target);
        (self.apply(s.bottom()) != t.bottom())
            .then(|| format!("image of ⊥ = {} is {}, not ⊥", s.label(s.bottom()), t.label(self.apply(s.bottom()))))
    }

    fn binary_join_failure(&self) -> Option<String> {
        let (s, t) = (&self.source, &self.target);
        for a in s.elements() {
            for b in a + 1..s.len() {
                let lhs = self.apply(s.join2(a, b));
                let rhs = t.join2(self.apply(a), self.apply(b));
                if lhs != rhs {
                    return Some(format!(
                        "f({} ∨ {}) = {} but f({}) ∨ f({}) = {}",
                        s.label(a),
                        s.label(b),
                        t.label(lhs),
                        s.label(a),
                        s.label(b),
                        t.label(rhs)
                    ));
                }
            }
        }
        None
    }

    pub fn preserves_joins(&self) -> bool {
        self.join_failure().is_none()
    }
}

/// Outcome of one certificate clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub holds: bool,
    /// First counterexample in canonical element order.
    pub witness: Option<String>,
}

impl Check {
    fn from_failure(failure: Option<String>) -> Self {
        Check { holds: failure.is_none(), witness: failure }
    }

    pub fn pass() -> Self {
        Check { holds: true, witness: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeometricCertificate {
    pub preserves_joins: Check,
    pub preserves_unit: Check,
    pub weak_mul: Check,
    pub strong_mul: Check,
}

impl GeometricCertificate {
    pub fn is_geometric(&self) -> bool {
        self.preserves_joins.holds && self.preserves_unit.holds && self.weak_mul.holds
    }

    pub fn is_strong(&self) -> bool {
        self.is_geometric() && self.strong_mul.holds
    }
}

pub fn certify_geometric(f: &MonotoneMap) -> GeometricCertificate {
    let (s, t) = (f.source(), f.target());
    let unit = (f.apply(s.top()) != t.top()).then(|| format!("f(⊤) = {} is not ⊤", t.label(f.apply(s.top()))));
    let mut weak = None;
    let mut strong = None;
    'outer: for a in s.elements() {
        for b in s.elements() {
            let lhs = t.mul(f.apply(a), f.apply(b));
            let rhs = f.apply(s.mul(a, b));
            if strong.is_none() && lhs != rhs {
                strong = Some(format!(
                    "f({}) ⊙ f({}) = {} but f({} ⊙ {}) = {}",
                    s.label(a),
                    s.label(b),
                    t.label(lhs),
                    s.label(a),
                    s.label(b),
                    t.label(rhs)
                ));
            }
            if !t.leq(lhs, rhs) {
                weak = Some(format!(
                    "f({}) ⊙ f({}) = {} is not below f({} ⊙ {}) = {}",
                    s.label(a),
                    s.label(b),
                    t.label(lhs),
                    s.label(a),
                    s.label(b),
                    t.label(rhs)
                ));
                break 'outer;
            }
        }
    }
    if weak.is_some() && strong.is_none() {
        strong = weak.clone();
    }
    GeometricCertificate {
        preserves_joins: Check::from_failure(f.join_failure()),
        preserves_unit: Check::from_failure(unit),
        weak_mul: Check::from_failure(weak),
        strong_mul: Check::from_failure(strong),
    }
}

/// `f_*(b) = ⋁{a : f(a) ≤ b}`, with the adjunction law checked exhaustively.
pub fn right_adjoint(f: &MonotoneMap) -> Result<MonotoneMap, MorphismError> {
    if let Some(w) = f.join_failure() {
        return Err(MorphismError::DoesNotPreserveJoins(w));
    }
    let (s, t) = (f.source(), f.target());
    let table: Vec<Elem> = t.elements().map(|b| s.join(s.elements().filter(|&a| t.leq(f.apply(a), b)))).collect();
    for a in s.elements() {
        for b in t.elements() {
            assert_eq!(t.leq(f.apply(a), b), s.leq(a, table[b]), "adjunction law for a join-preserving map");
        }
    }
    MonotoneMap::new(t.clone(), s.clone(), table)
}

/// Hypothesis flags for a direct image `f_*`.
///
/// `joins` covers nonempty joins only; `empty_join` (`f_*(⊥) = ⊥`) is
/// reported separately because direct images of quotient maps and
/// projections send `⊥` to a nonzero element while still satisfying the
/// sum identities the invariance theorem relies on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectImageFlags {
    pub unit: Check,
    pub joins: Check,
    pub empty_join: Check,
}

impl DirectImageFlags {
    pub fn holds(&self) -> bool {
        self.unit.holds && self.joins.holds
    }
}

pub fn direct_image_preserves(g: &MonotoneMap) -> DirectImageFlags {
    let (s, t) = (g.source(), g.target());
    let unit = (g.apply(s.top()) != t.top()).then(|| format!("f_*(⊤) = {} is not ⊤", t.label(g.apply(s.top()))));
    DirectImageFlags {
        unit: Check::from_failure(unit),
        joins: Check::from_failure(g.binary_join_failure()),
        empty_join: Check::from_failure(g.empty_join_failure()),
    }
}
