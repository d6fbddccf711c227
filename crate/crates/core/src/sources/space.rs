//! Finite topological spaces and their locales of opens.

use std::fmt;

use thiserror::Error;

use crate::lattice::{iter_mask, validate_quantale, ElemSet, Quantale, QuantaleError, RawQuantale, MAX_ELEMENTS};
use crate::limits::Limits;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("a space has at most 64 points, got {0}")]
    TooManyPoints(usize),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(String),
    #[error("open set mentions a point outside the space")]
    UnknownPoint,
    #[error("open set {0} is listed twice")]
    DuplicateOpen(String),
    #[error("not a topology: {0}")]
    NotATopology(String),
    #[error("quantale is not a locale: {0}")]
    NotALocale(String),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
}

/// A finite space given by its points and the list of its open sets.
/// Opens are point masks; their order is the element order of the locale.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    points: Vec<String>,
    opens: Vec<ElemSet>,
}

impl FiniteSpace {
    pub fn new(points: Vec<String>, opens: Vec<ElemSet>) -> Result<Self, SpaceError> {
        let n = points.len();
        if n > MAX_ELEMENTS {
            return Err(SpaceError::TooManyPoints(n));
        }
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(SpaceError::DuplicatePoint(p.clone()));
            }
        }
        let all = full_mask(n);
        if opens.iter().any(|&u| u & !all != 0) {
            return Err(SpaceError::UnknownPoint);
        }
        let space = FiniteSpace { points, opens };
        for (i, &u) in space.opens.iter().enumerate() {
            if space.opens[..i].contains(&u) {
                return Err(SpaceError::DuplicateOpen(space.show(u)));
            }
        }
        if !space.opens.contains(&0) {
            return Err(SpaceError::NotATopology("the empty set is not open".into()));
        }
        if !space.opens.contains(&all) {
            return Err(SpaceError::NotATopology("the whole space is not open".into()));
        }
        for &u in &space.opens {
            for &v in &space.opens {
                if !space.opens.contains(&(u | v)) {
                    return Err(SpaceError::NotATopology(format!(
                        "union of {} and {} is not open",
                        space.show(u),
                        space.show(v)
                    )));
                }
                if !space.opens.contains(&(u & v)) {
                    return Err(SpaceError::NotATopology(format!(
                        "intersection of {} and {} is not open",
                        space.show(u),
                        space.show(v)
                    )));
                }
            }
        }
        Ok(space)
    }

    /// The discrete space on `x1, ..., xk`, opens in mask order.
    pub fn discrete(k: usize) -> Self {
        let points = (1..=k).map(|i| format!("x{i}")).collect();
        FiniteSpace { points, opens: (0..1u64 << k).collect() }
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn opens(&self) -> &[ElemSet] {
        &self.opens
    }

    pub fn open_index(&self, u: ElemSet) -> Option<usize> {
        self.opens.iter().position(|&v| v == u)
    }

    /// `{a,b}` style label of a point set; `{}` for the empty set.
    pub fn show(&self, u: ElemSet) -> String {
        let names: Vec<&str> = iter_mask(u).map(|i| self.points[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    /// Smallest open containing point `x`.
    pub fn minimal_open(&self, x: usize) -> ElemSet {
        self.opens.iter().filter(|&&u| u & (1 << x) != 0).fold(full_mask(self.points.len()), |a, &u| a & u)
    }
}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let opens: Vec<String> = self.opens.iter().map(|&u| self.show(u)).collect();
        write!(f, "points {{{}}}, opens {}", self.points.join(","), opens.join(" "))
    }
}

fn full_mask(n: usize) -> ElemSet {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// The locale of opens: order by inclusion, `⊙ = ∩`. Element `i` is open `i`.
pub fn locale_of_space(x: &FiniteSpace, limits: &Limits) -> Result<Quantale, SpaceError> {
    let opens = x.opens();
    let pos = |u: ElemSet| x.open_index(u).expect("topology is closed under intersection");
    let raw = RawQuantale {
        labels: opens.iter().map(|&u| x.show(u)).collect(),
        leq: opens.iter().map(|&u| opens.iter().map(|&v| u & !v == 0).collect()).collect(),
        mul: opens.iter().map(|&u| opens.iter().map(|&v| pos(u & v)).collect()).collect(),
    };
    Ok(validate_quantale(raw, limits)?)
}

/// Connected components of the open `u`, ordered by least point.
///
/// Two points are joined when they are comparable in the specialization
/// order, i.e. one lies in the minimal open of the other; for finite spaces
/// the components of this graph are the topological components.
pub fn components(x: &FiniteSpace, u: ElemSet) -> Vec<ElemSet> {
    let minimal: Vec<ElemSet> = (0..x.points().len()).map(|p| x.minimal_open(p)).collect();
    let mut left = u;
    let mut out = Vec::new();
    while left != 0 {
        let start = left.trailing_zeros() as usize;
        let mut comp = 1u64 << start;
        let mut frontier = comp;
        while frontier != 0 {
            let p = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let mut nbrs = minimal[p] & u;
            for q in iter_mask(u) {
                if minimal[q] & (1 << p) != 0 {
                    nbrs |= 1 << q;
                }
            }
            let new = nbrs & !comp;
            comp |= new;
            frontier |= new;
        }
        out.push(comp);
        left &= !comp;
    }
    out
}

/// The space whose points are the join-irreducibles of a finite locale and
/// whose opens are `{j ≤ a}` for each element `a` (open `i` is element `i`).
pub fn space_of_locale(q: &Quantale) -> Result<FiniteSpace, SpaceError> {
    for a in q.elements() {
        for b in q.elements() {
            if q.mul(a, b) != q.meet(a, b) {
                return Err(SpaceError::NotALocale(format!("{} ⊙ {} differs from the meet", q.label(a), q.label(b))));
            }
        }
    }
    let irreducible: Vec<usize> = q.elements().filter(|&a| q.is_join_irreducible(a)).collect();
    let points = irreducible.iter().map(|&j| q.label(j).to_string()).collect();
    let opens = q
        .elements()
        .map(|a| irreducible.iter().enumerate().filter(|(_, &j)| q.leq(j, a)).fold(0u64, |m, (i, _)| m | (1 << i)))
        .collect();
    FiniteSpace::new(points, opens).map_err(|e| SpaceError::NotALocale(format!("lattice is not distributive ({e})")))
}
