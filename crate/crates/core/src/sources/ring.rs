//! Finite commutative rings, their ideal quantales, and the maps between
//! ideal quantales induced by ring data.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use num_integer::Integer as _;
use thiserror::Error;

use crate::lattice::{iter_mask, validate_quantale, Elem, ElemSet, Quantale, QuantaleError, RawQuantale, MAX_ELEMENTS};
use crate::limits::Limits;
use crate::morphisms::{MonotoneMap, MorphismError};

/// An ideal, as a mask over ring elements.
pub type Ideal = ElemSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("a ring needs at least one element")]
    Empty,
    #[error("{what} has {n} elements, cap is {cap}")]
    SizeCapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("malformed ring table: {0}")]
    BadTable(String),
    #[error("not a commutative unital ring: {0}")]
    NotARing(String),
    #[error("ring was not built as a function ring")]
    NotAFunctionRing,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("not a ring homomorphism: {0}")]
    NotARingHom(String),
    #[error("ring homomorphism is not surjective: {0} is not hit")]
    NotSurjective(String),
    #[error("not an ideal: {0}")]
    NotAnIdeal(String),
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RingKind {
    Table,
    /// `Z/n`, element `i` is the residue `i`.
    Zmod(u64),
    /// `F_q^k`, element index `Σ c_i q^(k-1-i)`.
    Function {
        q: u64,
        k: u32,
    },
}

/// A finite commutative unital ring given by full tables.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteRing {
    labels: Vec<String>,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    zero: Elem,
    one: Elem,
    kind: RingKind,
}

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteRing").field("labels", &self.labels).field("kind", &self.kind).finish()
    }
}

fn check_size(what: &'static str, n: usize, limits: &Limits) -> Result<(), RingError> {
    let cap = limits.ring_elements.min(MAX_ELEMENTS);
    if n > cap {
        return Err(RingError::SizeCapExceeded { what, n, cap });
    }
    Ok(())
}

impl FiniteRing {
    /// Validates tables `add[a][b]`, `mul[a][b]` exhaustively.
    pub fn new(
        labels: Vec<String>,
        add: Vec<Vec<Elem>>,
        mul: Vec<Vec<Elem>>,
        limits: &Limits,
    ) -> Result<Self, RingError> {
        Self::with_kind(labels, add, mul, RingKind::Table, limits)
    }

    fn with_kind(
        labels: Vec<String>,
        add: Vec<Vec<Elem>>,
        mul: Vec<Vec<Elem>>,
        kind: RingKind,
        limits: &Limits,
    ) -> Result<Self, RingError> {
        let n = labels.len();
        if n == 0 {
            return Err(RingError::Empty);
        }
        check_size("ring", n, limits)?;
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(RingError::BadTable(format!("duplicate element label {l:?}")));
            }
        }
        for (name, t) in [("addition", &add), ("multiplication", &mul)] {
            if t.len() != n || t.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
                return Err(RingError::BadTable(format!("{name} table must be {n}x{n} with entries below {n}")));
            }
        }
        let l = |i: Elem| labels[i].as_str();
        let a = |x: Elem, y: Elem| add[x][y];
        let m = |x: Elem, y: Elem| mul[x][y];
        let zero = (0..n)
            .find(|&z| (0..n).all(|x| a(z, x) == x && a(x, z) == x))
            .ok_or_else(|| RingError::NotARing("no additive identity".into()))?;
        let one = (0..n)
            .find(|&e| (0..n).all(|x| m(e, x) == x && m(x, e) == x))
            .ok_or_else(|| RingError::NotARing("no multiplicative identity".into()))?;
        let mut neg = vec![0; n];
        for x in 0..n {
            neg[x] = (0..n)
                .find(|&y| a(x, y) == zero)
                .ok_or_else(|| RingError::NotARing(format!("{} has no additive inverse", l(x))))?;
        }
        for x in 0..n {
            for y in 0..n {
                if a(x, y) != a(y, x) {
                    return Err(RingError::NotARing(format!("addition not commutative at ({}, {})", l(x), l(y))));
                }
                if m(x, y) != m(y, x) {
                    return Err(RingError::NotARing(format!("multiplication not commutative at ({}, {})", l(x), l(y))));
                }
                for z in 0..n {
                    if a(a(x, y), z) != a(x, a(y, z)) {
                        return Err(RingError::NotARing(format!(
                            "addition not associative at ({}, {}, {})",
                            l(x),
                            l(y),
                            l(z)
                        )));
                    }
                    if m(m(x, y), z) != m(x, m(y, z)) {
                        return Err(RingError::NotARing(format!(
                            "multiplication not associative at ({}, {}, {})",
                            l(x),
                            l(y),
                            l(z)
                        )));
                    }
                    if m(x, a(y, z)) != a(m(x, y), m(x, z)) {
                        return Err(RingError::NotARing(format!(
                            "multiplication does not distribute at ({}, {}, {})",
                            l(x),
                            l(y),
                            l(z)
                        )));
                    }
                }
            }
        }
        Ok(FiniteRing {
            labels,
            add: add.into_iter().flatten().collect(),
            mul: mul.into_iter().flatten().collect(),
            neg,
            zero,
            one,
            kind,
        })
    }

    /// `Z/n` with residues labelled `0..n-1`.
    pub fn zmod(n: u64, limits: &Limits) -> Result<Self, RingError> {
        if n == 0 {
            return Err(RingError::Empty);
        }
        check_size("ring", n as usize, limits)?;
        let n = n as usize;
        let labels = (0..n).map(|i| i.to_string()).collect();
        let add = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        let mul = (0..n).map(|x| (0..n).map(|y| (x * y) % n).collect()).collect();
        Self::with_kind(labels, add, mul, RingKind::Zmod(n as u64), limits)
    }

    /// `F_q^k`: functions from the `k`-point discrete space to `F_q`.
    pub fn function_ring(q: u64, k: u32, limits: &Limits) -> Result<Self, RingError> {
        if q < 2 || (2..q).take_while(|d| d * d <= q).any(|d| q % d == 0) {
            return Err(RingError::NotPrime(q));
        }
        let n = q.checked_pow(k).filter(|&n| n <= MAX_ELEMENTS as u64).unwrap_or(u64::MAX);
        if n == u64::MAX {
            let cap = limits.ring_elements.min(MAX_ELEMENTS);
            return Err(RingError::SizeCapExceeded { what: "function ring", n: usize::MAX, cap });
        }
        let n = n as usize;
        check_size("function ring", n, limits)?;
        let q = q as usize;
        let k = k as usize;
        let digits = |x: usize| -> Vec<usize> { (0..k).map(|i| (x / q.pow((k - 1 - i) as u32)) % q).collect() };
        let index = |c: &[usize]| c.iter().fold(0, |acc, &d| acc * q + d);
        let labels = (0..n)
            .map(|x| {
                let d = digits(x);
                if q <= 10 {
                    d.iter().map(|v| v.to_string()).collect::<String>()
                } else {
                    format!("({})", d.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
                }
            })
            .collect();
        let pointwise = |op: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<Elem>> {
            (0..n)
                .map(|x| {
                    let dx = digits(x);
                    (0..n)
                        .map(|y| {
                            let dy = digits(y);
                            let c: Vec<usize> = dx.iter().zip(&dy).map(|(&a, &b)| op(a, b)).collect();
                            index(&c)
                        })
                        .collect()
                })
                .collect()
        };
        let add = pointwise(&|a, b| (a + b) % q);
        let mul = pointwise(&|a, b| (a * b) % q);
        Self::with_kind(labels, add, mul, RingKind::Function { q: q as u64, k: k as u32 }, limits)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: Elem) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<Elem> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn zero(&self) -> Elem {
        self.zero
    }

    pub fn one(&self) -> Elem {
        self.one
    }

    #[inline]
    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        self.add[x * self.len() + y]
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        self.mul[x * self.len() + y]
    }

    pub fn neg(&self, x: Elem) -> Elem {
        self.neg[x]
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.len()
    }

    pub fn idempotent_count(&self) -> usize {
        self.elements().filter(|&x| self.mul(x, x) == x).count()
    }

    /// Smallest ideal containing `gens`.
    pub fn generated_ideal(&self, gens: ElemSet) -> Ideal {
        let mut products = 0u64;
        for g in iter_mask(gens) {
            for r in self.elements() {
                products |= 1 << self.mul(r, g);
            }
        }
        let steps: Vec<Elem> = iter_mask(products).collect();
        let mut ideal = 1u64 << self.zero;
        let mut queue = VecDeque::from([self.zero]);
        while let Some(x) = queue.pop_front() {
            for &s in &steps {
                let y = self.add(x, s);
                if ideal & (1 << y) == 0 {
                    ideal |= 1 << y;
                    queue.push_back(y);
                }
            }
        }
        ideal
    }

    pub fn is_ideal(&self, set: ElemSet) -> bool {
        set != 0 && self.generated_ideal(set) == set
    }

    pub fn ideal_sum(&self, i: Ideal, j: Ideal) -> Ideal {
        self.generated_ideal(i | j)
    }

    /// `⟨{xy : x ∈ I, y ∈ J}⟩`.
    pub fn ideal_product(&self, i: Ideal, j: Ideal) -> Ideal {
        let mut gens = 0u64;
        for x in iter_mask(i) {
            for y in iter_mask(j) {
                gens |= 1 << self.mul(x, y);
            }
        }
        self.generated_ideal(gens)
    }

    /// All ideals, ordered by size and then by mask.
    pub fn ideals(&self) -> Vec<Ideal> {
        let zero = 1u64 << self.zero;
        let mut seen = BTreeSet::from([zero]);
        let mut queue = VecDeque::from([zero]);
        while let Some(i) = queue.pop_front() {
            for x in self.elements() {
                if i & (1 << x) == 0 {
                    let j = self.generated_ideal(i | (1 << x));
                    if seen.insert(j) {
                        queue.push_back(j);
                    }
                }
            }
        }
        let mut out: Vec<Ideal> = seen.into_iter().collect();
        out.sort_by_key(|&i| (i.count_ones(), i));
        out
    }

    /// `(g1,g2,...)` with generators picked greedily in element order.
    pub fn ideal_label(&self, ideal: Ideal) -> String {
        let mut gens = Vec::new();
        let mut cur = 1u64 << self.zero;
        for x in iter_mask(ideal) {
            if cur & (1 << x) == 0 {
                gens.push(self.labels[x].as_str());
                cur = self.generated_ideal(cur | (1 << x));
            }
        }
        if gens.is_empty() {
            gens.push(&self.labels[self.zero]);
        }
        format!("({})", gens.join(","))
    }

    /// Coordinate `i` of a function-ring element.
    pub fn coordinate(&self, x: Elem, i: usize) -> Result<u64, RingError> {
        match self.kind {
            RingKind::Function { q, k } => Ok((x as u64 / q.pow(k - 1 - i as u32)) % q),
            _ => Err(RingError::NotAFunctionRing),
        }
    }

    fn function_shape(&self) -> Result<(u64, u32), RingError> {
        match self.kind {
            RingKind::Function { q, k } => Ok((q, k)),
            _ => Err(RingError::NotAFunctionRing),
        }
    }
}

/// The ideal quantale of a ring together with the ideal behind each element.
#[derive(Clone, Debug)]
pub struct IdealQuantale {
    pub ring: Arc<FiniteRing>,
    pub quantale: Arc<Quantale>,
    pub ideals: Vec<Ideal>,
}

impl IdealQuantale {
    pub fn index_of(&self, ideal: Ideal) -> Option<Elem> {
        self.ideals.iter().position(|&i| i == ideal)
    }
}

/// Inclusion order, sums as joins, ideal products as `⊙`.
pub fn ideal_quantale(r: &Arc<FiniteRing>, limits: &Limits) -> Result<IdealQuantale, RingError> {
    let ideals = r.ideals();
    let n = ideals.len();
    let cap = limits.quantale_elements.min(MAX_ELEMENTS);
    if n > cap {
        return Err(RingError::SizeCapExceeded { what: "ideal quantale", n, cap });
    }
    let pos = |i: Ideal| ideals.iter().position(|&j| j == i).expect("products of ideals are ideals");
    let raw = RawQuantale {
        labels: ideals.iter().map(|&i| r.ideal_label(i)).collect(),
        leq: ideals.iter().map(|&i| ideals.iter().map(|&j| i & !j == 0).collect()).collect(),
        mul: ideals.iter().map(|&i| ideals.iter().map(|&j| pos(r.ideal_product(i, j))).collect()).collect(),
    };
    let quantale = Arc::new(validate_quantale(raw, limits)?);
    Ok(IdealQuantale { ring: r.clone(), quantale, ideals })
}

/// Ideals of `Z/n` from divisors: `(d)(e) = (gcd(de, n))`, `(d)+(e) = (gcd(d, e))`.
/// Returns the quantale and the divisor behind each element (`n` for `(0)`).
pub fn ideals_of_zmod(n: u64, limits: &Limits) -> Result<(Quantale, Vec<u64>), RingError> {
    if n == 0 {
        return Err(RingError::Empty);
    }
    check_size("ring", n as usize, limits)?;
    let mut divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    divisors.reverse();
    let pos = |d: u64| divisors.iter().position(|&e| e == d).expect("divisor");
    let label = |d: u64| format!("({})", if d == n { 0 } else { d });
    let raw = RawQuantale {
        labels: divisors.iter().map(|&d| label(d)).collect(),
        leq: divisors.iter().map(|&d| divisors.iter().map(|&e| d % e == 0).collect()).collect(),
        mul: divisors.iter().map(|&d| divisors.iter().map(|&e| pos((d * e).gcd(&n))).collect()).collect(),
    };
    Ok((validate_quantale(raw, limits)?, divisors))
}

/// `τ(I)`: coordinates where some member of `I` is nonzero.
pub fn tau(r: &FiniteRing, ideal: Ideal) -> Result<ElemSet, RingError> {
    let (_, k) = r.function_shape()?;
    let mut open = 0u64;
    for f in iter_mask(ideal) {
        for i in 0..k as usize {
            if r.coordinate(f, i)? != 0 {
                open |= 1 << i;
            }
        }
    }
    Ok(open)
}

/// `θ(U)`: functions vanishing outside `U`.
pub fn theta(r: &FiniteRing, open: ElemSet) -> Result<Ideal, RingError> {
    let (_, k) = r.function_shape()?;
    let mut ideal = 0u64;
    for f in r.elements() {
        if (0..k as usize).all(|i| open & (1 << i) != 0 || r.coordinate(f, i) == Ok(0)) {
            ideal |= 1 << f;
        }
    }
    Ok(ideal)
}

/// `τ` as a map from the ideal quantale to the locale of the discrete space
/// (whose element `m` is the open with mask `m`).
pub fn tau_map(iq: &IdealQuantale, locale: &Arc<Quantale>) -> Result<MonotoneMap, RingError> {
    let table = iq.ideals.iter().map(|&i| tau(&iq.ring, i).map(|m| m as Elem)).collect::<Result<_, _>>()?;
    Ok(MonotoneMap::new(iq.quantale.clone(), locale.clone(), table)?)
}

pub fn theta_map(iq: &IdealQuantale, locale: &Arc<Quantale>) -> Result<MonotoneMap, RingError> {
    let table = (0..locale.len())
        .map(|m| {
            let ideal = theta(&iq.ring, m as ElemSet)?;
            iq.index_of(ideal).ok_or_else(|| RingError::NotAnIdeal(format!("vanishing set of open {m}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(MonotoneMap::new(locale.clone(), iq.quantale.clone(), table)?)
}

/// A verified unital ring homomorphism.
#[derive(Clone, Debug)]
pub struct RingHom {
    source: Arc<FiniteRing>,
    target: Arc<FiniteRing>,
    table: Vec<Elem>,
}

impl RingHom {
    pub fn new(source: Arc<FiniteRing>, target: Arc<FiniteRing>, table: Vec<Elem>) -> Result<Self, RingError> {
        if table.len() != source.len() || table.iter().any(|&y| y >= target.len()) {
            return Err(RingError::BadTable("homomorphism table does not match the rings".into()));
        }
        let f = |x: Elem| table[x];
        if f(source.one()) != target.one() {
            return Err(RingError::NotARingHom("1 is not sent to 1".into()));
        }
        for x in source.elements() {
            for y in source.elements() {
                if f(source.add(x, y)) != target.add(f(x), f(y)) {
                    return Err(RingError::NotARingHom(format!(
                        "f({} + {}) differs from f({}) + f({})",
                        source.label(x),
                        source.label(y),
                        source.label(x),
                        source.label(y)
                    )));
                }
                if f(source.mul(x, y)) != target.mul(f(x), f(y)) {
                    return Err(RingError::NotARingHom(format!(
                        "f({} * {}) differs from f({}) * f({})",
                        source.label(x),
                        source.label(y),
                        source.label(x),
                        source.label(y)
                    )));
                }
            }
        }
        Ok(RingHom { source, target, table })
    }

    pub fn source(&self) -> &Arc<FiniteRing> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteRing> {
        &self.target
    }

    pub fn apply(&self, x: Elem) -> Elem {
        self.table[x]
    }

    pub fn image(&self, set: ElemSet) -> ElemSet {
        iter_mask(set).fold(0, |m, x| m | (1 << self.table[x]))
    }

    pub fn preimage(&self, set: ElemSet) -> ElemSet {
        self.source.elements().filter(|&x| set & (1 << self.table[x]) != 0).fold(0, |m, x| m | (1 << x))
    }

    pub fn kernel(&self) -> Ideal {
        self.preimage(1 << self.target.zero())
    }

    pub fn surjectivity_failure(&self) -> Option<Elem> {
        let hit = self.image(if self.source.len() == 64 { u64::MAX } else { (1 << self.source.len()) - 1 });
        self.target.elements().find(|&y| hit & (1 << y) == 0)
    }
}

/// `R/I` with each coset represented by its least element, and the quotient map.
pub fn quotient_ring(
    r: &Arc<FiniteRing>,
    ideal: Ideal,
    limits: &Limits,
) -> Result<(Arc<FiniteRing>, RingHom), RingError> {
    if !r.is_ideal(ideal) {
        return Err(RingError::NotAnIdeal(format!("{:#b}", ideal)));
    }
    let coset = |x: Elem| iter_mask(ideal).fold(0u64, |m, i| m | (1 << r.add(x, i)));
    let mut reps: Vec<Elem> = Vec::new();
    let mut class = vec![usize::MAX; r.len()];
    for x in r.elements() {
        if class[x] == usize::MAX {
            for y in iter_mask(coset(x)) {
                class[y] = reps.len();
            }
            reps.push(x);
        }
    }
    let m = reps.len();
    let labels = reps.iter().map(|&x| r.label(x).to_string()).collect();
    let add = reps.iter().map(|&x| reps.iter().map(|&y| class[r.add(x, y)]).collect()).collect();
    let mul = reps.iter().map(|&x| reps.iter().map(|&y| class[r.mul(x, y)]).collect()).collect();
    let kind = match r.kind() {
        RingKind::Zmod(_) => RingKind::Zmod(m as u64),
        _ => RingKind::Table,
    };
    let s = Arc::new(FiniteRing::with_kind(labels, add, mul, kind, limits)?);
    let hom = RingHom::new(r.clone(), s.clone(), class)?;
    Ok((s, hom))
}

/// `J ↦ ⟨f(J)⟩` between ideal quantales, for a surjective `f`.
pub fn induced_surjection_morphism(
    f: &RingHom,
    source: &IdealQuantale,
    target: &IdealQuantale,
) -> Result<MonotoneMap, RingError> {
    if *source.ring != **f.source() || *target.ring != **f.target() {
        return Err(RingError::BadTable("ideal quantales do not belong to the homomorphism's rings".into()));
    }
    if let Some(y) = f.surjectivity_failure() {
        return Err(RingError::NotSurjective(f.target().label(y).to_string()));
    }
    let table = source
        .ideals
        .iter()
        .map(|&j| target.index_of(f.target().generated_ideal(f.image(j))).expect("generated ideal is listed"))
        .collect();
    Ok(MonotoneMap::new(source.quantale.clone(), target.quantale.clone(), table)?)
}
