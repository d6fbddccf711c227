//! Building validated objects from a parsed document.
//!
//! Objects may only refer to objects defined earlier in the document.
//!
//! | kind     | forms                                                                  |
//! |----------|------------------------------------------------------------------------|
//! | quantale | `elements`, `order`, `mul` (`= meet` or one `mul <a>` row per element) |
//! |          | `from = chain n / zmod n / funring q k / ideals R / locale X`          |
//! |          | `from = idem Q / product A B / interval Q a`                           |
//! | space    | `points`, `opens`; `from = discrete k / locale Q`                      |
//! | ring     | `elements`, `add <a>` and `mul <a>` rows                               |
//! |          | `from = zmod n / funring q k / quotient R g...`                        |
//! | presheaf | `base`, then `from = constant G / locally-constant G / idempotent G`   |
//! |          | or `value <a>` per element and `res <a><<b>` per Hasse edge;           |
//! |          | `from = pullback F f` takes its base from `f`                          |
//! | morphism | `source`, `target`, then `map = a->x ...` or `from = identity / tau /` |
//! |          | `theta / inclusion / approx / projection 1|2 / quotient`               |

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::abgroups::{FgAbGroup, GroupHom};
use crate::lattice::{
    chain_locale, idem_locale, interval_quantale, mask_of, product_quantale, validate_quantale, Elem, Quantale,
    RawQuantale,
};
use crate::limits::Limits;
use crate::morphisms::MonotoneMap;
use crate::presheaf::{build_presheaf, constant_presheaf, locally_constant_sheaf, pullback_presheaf, AbPresheaf};
use crate::sources::{
    ideal_quantale, induced_surjection_morphism, locale_of_space, quotient_ring, space_of_locale, tau_map, theta_map,
    FiniteRing, FiniteSpace, IdealQuantale, RingHom, RingKind,
};
use crate::theorems::{idempotent_sheaf, TheoremError};

use super::{parse_document, parse_group, parse_matrix, Entry, ObjectKind, ParseError, Section};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{kind} {name} (line {line}): {message}")]
    Invalid { kind: ObjectKind, name: String, line: usize, message: String, cap: bool },
}

impl LoadError {
    pub fn is_cap(&self) -> bool {
        matches!(self, LoadError::Invalid { cap: true, .. })
    }
}

/// How a quantale was built; morphism and presheaf shorthands need it.
#[derive(Clone, Debug)]
pub enum QuantaleOrigin {
    Table,
    Chain,
    Ideals { ring: Option<String>, iq: IdealQuantale },
    Space { space: Option<String>, x: FiniteSpace },
    Idem { of: String, inclusion: MonotoneMap },
    Product { factors: (String, String), projections: (MonotoneMap, MonotoneMap) },
    Interval { of: String, inclusion: MonotoneMap },
}

#[derive(Clone, Debug)]
pub enum WorkspaceObject {
    Quantale { quantale: Arc<Quantale>, origin: QuantaleOrigin },
    Space(FiniteSpace),
    Ring { ring: Arc<FiniteRing>, quotient: Option<(String, RingHom)> },
    Presheaf(AbPresheaf),
    Morphism(MonotoneMap),
}

impl WorkspaceObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            WorkspaceObject::Quantale { .. } => ObjectKind::Quantale,
            WorkspaceObject::Space(_) => ObjectKind::Space,
            WorkspaceObject::Ring { .. } => ObjectKind::Ring,
            WorkspaceObject::Presheaf(_) => ObjectKind::Presheaf,
            WorkspaceObject::Morphism(_) => ObjectKind::Morphism,
        }
    }

    /// One-line description used by validation reports.
    pub fn summary(&self) -> String {
        match self {
            WorkspaceObject::Quantale { quantale, .. } => {
                format!("{} elements; {}", quantale.len(), quantale.flags())
            }
            WorkspaceObject::Space(x) => format!("{} points, {} opens", x.points().len(), x.opens().len()),
            WorkspaceObject::Ring { ring, .. } => {
                format!("{} elements, {} ideals", ring.len(), ring.ideals().len())
            }
            WorkspaceObject::Presheaf(f) => {
                let top = f.base().top();
                format!("on {} elements; value at top {}", f.base().len(), f.value(top))
            }
            WorkspaceObject::Morphism(m) => {
                let t: Vec<String> = m
                    .source()
                    .elements()
                    .map(|a| format!("{}->{}", m.source().label(a), m.target().label(m.apply(a))))
                    .collect();
                t.join(" ")
            }
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Workspace {
    names: Vec<String>,
    objects: Vec<WorkspaceObject>,
}

impl Workspace {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<&WorkspaceObject> {
        self.names.iter().position(|n| n == name).map(|i| &self.objects[i])
    }

    fn typed<'a, T>(
        &'a self,
        name: &str,
        kind: ObjectKind,
        pick: impl Fn(&'a WorkspaceObject) -> Option<T>,
    ) -> Result<T, String> {
        let obj = self.get(name).ok_or_else(|| format!("no object named '{name}'"))?;
        pick(obj).ok_or_else(|| format!("'{name}' is a {}, not a {kind}", obj.kind()))
    }

    pub fn quantale(&self, name: &str) -> Result<(&Arc<Quantale>, &QuantaleOrigin), String> {
        self.typed(name, ObjectKind::Quantale, |o| match o {
            WorkspaceObject::Quantale { quantale, origin } => Some((quantale, origin)),
            _ => None,
        })
    }

    pub fn space(&self, name: &str) -> Result<&FiniteSpace, String> {
        self.typed(name, ObjectKind::Space, |o| match o {
            WorkspaceObject::Space(x) => Some(x),
            _ => None,
        })
    }

    pub fn ring(&self, name: &str) -> Result<&Arc<FiniteRing>, String> {
        self.typed(name, ObjectKind::Ring, |o| match o {
            WorkspaceObject::Ring { ring, .. } => Some(ring),
            _ => None,
        })
    }

    pub fn presheaf(&self, name: &str) -> Result<&AbPresheaf, String> {
        self.typed(name, ObjectKind::Presheaf, |o| match o {
            WorkspaceObject::Presheaf(f) => Some(f),
            _ => None,
        })
    }

    pub fn morphism(&self, name: &str) -> Result<&MonotoneMap, String> {
        self.typed(name, ObjectKind::Morphism, |o| match o {
            WorkspaceObject::Morphism(m) => Some(m),
            _ => None,
        })
    }

    /// The ideal quantale behind `name`, if it was built from a ring.
    pub fn ideal_quantale(&self, name: &str) -> Result<&IdealQuantale, String> {
        match self.quantale(name)?.1 {
            QuantaleOrigin::Ideals { iq, .. } => Ok(iq),
            _ => Err(format!("'{name}' is not the ideal quantale of a ring")),
        }
    }

    fn insert(&mut self, name: &str, obj: WorkspaceObject) {
        self.names.push(name.to_string());
        self.objects.push(obj);
    }
}

/// Validation outcome of one object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectReport {
    pub kind: ObjectKind,
    pub name: String,
    pub line: usize,
    /// Summary when valid, the failure otherwise.
    pub result: Result<String, String>,
    pub cap: bool,
}

enum Fail {
    Parse(ParseError),
    Theorem(TheoremError),
    Msg(String),
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fail::Parse(e) => e.fmt(f),
            Fail::Theorem(e) => e.fmt(f),
            Fail::Msg(m) => f.write_str(m),
        }
    }
}

impl From<ParseError> for Fail {
    fn from(e: ParseError) -> Self {
        Fail::Parse(e)
    }
}

impl From<String> for Fail {
    fn from(e: String) -> Self {
        Fail::Msg(e)
    }
}

macro_rules! fail_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Fail {
            fn from(e: $t) -> Self {
                Fail::Theorem(e.into())
            }
        }
    )*};
}

fail_from!(
    TheoremError,
    crate::lattice::QuantaleError,
    crate::sources::RingError,
    crate::sources::SpaceError,
    crate::morphisms::MorphismError,
    crate::presheaf::PresheafError
);

type R<T> = Result<T, Fail>;

fn need<'a>(s: &'a Section, key: &str) -> R<&'a Entry> {
    s.get(key).ok_or_else(|| Fail::Parse(s.error(format!("missing '{key}'"))))
}

fn words(e: &Entry) -> Vec<&str> {
    e.value.split_whitespace().collect()
}

fn num<T: std::str::FromStr>(e: &Entry, w: &str) -> R<T> {
    w.parse().map_err(|_| Fail::Parse(e.error(format!("expected a number, found '{w}'"))))
}

fn only_keys(s: &Section, allowed: &[&str]) -> R<()> {
    match s.entries.iter().find(|e| !allowed.contains(&e.key.as_str())) {
        Some(e) => {
            Err(Fail::Parse(ParseError::new(e.line, 1, format!("unexpected key '{}' in {} section", e.key, s.kind))))
        }
        None => Ok(()),
    }
}

fn label_index(labels: &[String], e: &Entry, l: &str) -> R<Elem> {
    labels.iter().position(|x| x == l).ok_or_else(|| Fail::Parse(e.error(format!("unknown element '{l}'"))))
}

fn labels_of(e: &Entry) -> Vec<String> {
    words(e).into_iter().map(str::to_string).collect()
}

/// `mul <a> = ...` rows, one per label, in label order of the result.
fn table_rows(s: &Section, key: &str, labels: &[String]) -> R<Vec<Vec<Elem>>> {
    let n = labels.len();
    let mut rows: Vec<Option<Vec<Elem>>> = vec![None; n];
    for e in s.rows(key) {
        let a = label_index(labels, e, e.arg.as_deref().unwrap_or(""))?;
        let row: Vec<Elem> = words(e).iter().map(|w| label_index(labels, e, w)).collect::<R<_>>()?;
        if row.len() != n {
            return Err(Fail::Parse(e.error(format!("expected {n} entries, found {}", row.len()))));
        }
        rows[a] = Some(row);
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| Fail::Parse(s.error(format!("missing '{key} {}'", labels[i])))))
        .collect()
}

fn meet_table(labels: &[String], leq: &[Vec<bool>]) -> R<Vec<Vec<Elem>>> {
    let n = labels.len();
    let mut mul = vec![vec![0; n]; n];
    for a in 0..n {
        for b in 0..n {
            let lower: Vec<Elem> = (0..n).filter(|&c| leq[c][a] && leq[c][b]).collect();
            mul[a][b] = *lower
                .iter()
                .find(|&&m| lower.iter().all(|&c| leq[c][m]))
                .ok_or_else(|| format!("{} and {} have no meet", labels[a], labels[b]))?;
        }
    }
    Ok(mul)
}

struct Loader<'a> {
    ws: Workspace,
    limits: &'a Limits,
    invalid: Vec<String>,
}

impl Loader<'_> {
    fn reference(&self, e: &Entry, name: &str) -> R<()> {
        if self.invalid.iter().any(|n| n == name) {
            return Err(Fail::Msg(format!("depends on invalid object '{name}'")));
        }
        if self.ws.get(name).is_none() {
            return Err(Fail::Parse(e.error(format!("'{name}' is not defined before this point"))));
        }
        Ok(())
    }

    fn quantale_ref(&self, e: &Entry, name: &str) -> R<(Arc<Quantale>, QuantaleOrigin)> {
        self.reference(e, name)?;
        let (q, o) = self.ws.quantale(name)?;
        Ok((q.clone(), o.clone()))
    }

    fn load(&self, s: &Section) -> R<WorkspaceObject> {
        match s.kind {
            ObjectKind::Quantale => self.load_quantale(s),
            ObjectKind::Space => self.load_space(s),
            ObjectKind::Ring => self.load_ring(s),
            ObjectKind::Presheaf => self.load_presheaf(s),
            ObjectKind::Morphism => self.load_morphism(s),
        }
    }

    fn load_quantale(&self, s: &Section) -> R<WorkspaceObject> {
        let limits = self.limits;
        let Some(from) = s.get("from") else {
            only_keys(s, &["elements", "order", "mul"])?;
            let e = need(s, "elements")?;
            let labels = labels_of(e);
            let mut edges = Vec::new();
            if let Some(o) = s.get("order") {
                for chain in words(o) {
                    let parts: Vec<Elem> = chain.split('<').map(|l| label_index(&labels, o, l)).collect::<R<_>>()?;
                    if parts.len() < 2 {
                        return Err(Fail::Parse(o.error(format!("expected 'a<b', found '{chain}'"))));
                    }
                    edges.extend(parts.windows(2).map(|w| (w[0], w[1])));
                }
            }
            let raw = RawQuantale::from_hasse(labels.clone(), &edges, vec![]);
            let mul = match s.get("mul") {
                Some(m) if m.value == "meet" => meet_table(&labels, &raw.leq)?,
                Some(m) => return Err(Fail::Parse(m.error("expected 'meet' or per-element 'mul <a>' rows"))),
                None => table_rows(s, "mul", &labels)?,
            };
            let q = validate_quantale(RawQuantale { mul, ..raw }, limits)?;
            return Ok(WorkspaceObject::Quantale { quantale: Arc::new(q), origin: QuantaleOrigin::Table });
        };
        only_keys(s, &["from"])?;
        let w = words(from);
        let quantale = |q: Quantale, origin| Ok(WorkspaceObject::Quantale { quantale: Arc::new(q), origin });
        let ring_ideals = |ring: FiniteRing, name: Option<String>| -> R<WorkspaceObject> {
            let iq = ideal_quantale(&Arc::new(ring), limits)?;
            Ok(WorkspaceObject::Quantale {
                quantale: iq.quantale.clone(),
                origin: QuantaleOrigin::Ideals { ring: name, iq },
            })
        };
        match w.as_slice() {
            ["chain", n] => {
                let n: usize = num(from, n)?;
                if n == 0 || n > limits.quantale_elements.min(crate::lattice::MAX_ELEMENTS) {
                    return Err(Fail::Msg(format!("chain length {n} is outside 1..={}", limits.quantale_elements)));
                }
                quantale(chain_locale(n), QuantaleOrigin::Chain)
            }
            ["zmod", n] => ring_ideals(FiniteRing::zmod(num(from, n)?, limits)?, None),
            ["funring", q, k] => ring_ideals(FiniteRing::function_ring(num(from, q)?, num(from, k)?, limits)?, None),
            ["ideals", r] => {
                self.reference(from, r)?;
                let ring = self.ws.ring(r)?.clone();
                let iq = ideal_quantale(&ring, limits)?;
                Ok(WorkspaceObject::Quantale {
                    quantale: iq.quantale.clone(),
                    origin: QuantaleOrigin::Ideals { ring: Some(r.to_string()), iq },
                })
            }
            ["locale", x] => {
                self.reference(from, x)?;
                let space = self.ws.space(x)?.clone();
                let q = locale_of_space(&space, limits)?;
                quantale(q, QuantaleOrigin::Space { space: Some(x.to_string()), x: space })
            }
            ["idem", q] => {
                let (q0, _) = self.quantale_ref(from, q)?;
                let (idem, inclusion) = idem_locale(&q0, limits)?;
                Ok(WorkspaceObject::Quantale {
                    quantale: idem,
                    origin: QuantaleOrigin::Idem { of: q.to_string(), inclusion },
                })
            }
            ["product", a, b] => {
                let (qa, _) = self.quantale_ref(from, a)?;
                let (qb, _) = self.quantale_ref(from, b)?;
                let (p, p1, p2) = product_quantale(&qa, &qb, limits)?;
                Ok(WorkspaceObject::Quantale {
                    quantale: p,
                    origin: QuantaleOrigin::Product { factors: (a.to_string(), b.to_string()), projections: (p1, p2) },
                })
            }
            ["interval", q, a] => {
                let (q0, _) = self.quantale_ref(from, q)?;
                let a = label_index(q0.labels(), from, a)?;
                let (iv, inclusion) = interval_quantale(&q0, a, limits)?;
                Ok(WorkspaceObject::Quantale {
                    quantale: iv,
                    origin: QuantaleOrigin::Interval { of: q.to_string(), inclusion },
                })
            }
            _ => Err(Fail::Parse(from.error(format!("unknown quantale form '{}'", from.value)))),
        }
    }

    fn load_space(&self, s: &Section) -> R<WorkspaceObject> {
        if let Some(from) = s.get("from") {
            only_keys(s, &["from"])?;
            return match words(from).as_slice() {
                ["discrete", k] => {
                    let k: usize = num(from, k)?;
                    if k > 6 {
                        return Err(Fail::Msg(format!("a discrete space on {k} points has more than 64 opens")));
                    }
                    Ok(WorkspaceObject::Space(FiniteSpace::discrete(k)))
                }
                ["locale", q] => {
                    let (q0, _) = self.quantale_ref(from, q)?;
                    Ok(WorkspaceObject::Space(space_of_locale(&q0)?))
                }
                _ => Err(Fail::Parse(from.error(format!("unknown space form '{}'", from.value)))),
            };
        }
        only_keys(s, &["points", "opens"])?;
        let p = need(s, "points")?;
        let points = labels_of(p);
        if points.len() > crate::lattice::MAX_ELEMENTS {
            return Err(Fail::Parse(p.error("more than 64 points")));
        }
        let o = need(s, "opens")?;
        let mut opens = Vec::new();
        for tok in words(o) {
            let inner = tok
                .strip_prefix('{')
                .and_then(|t| t.strip_suffix('}'))
                .ok_or_else(|| Fail::Parse(o.error(format!("expected '{{a,b}}', found '{tok}'"))))?;
            let members: Vec<Elem> =
                inner.split(',').filter(|x| !x.is_empty()).map(|x| label_index(&points, o, x)).collect::<R<_>>()?;
            opens.push(mask_of(members));
        }
        Ok(WorkspaceObject::Space(FiniteSpace::new(points, opens)?))
    }

    fn load_ring(&self, s: &Section) -> R<WorkspaceObject> {
        let limits = self.limits;
        let plain = |ring: FiniteRing| Ok(WorkspaceObject::Ring { ring: Arc::new(ring), quotient: None });
        let Some(from) = s.get("from") else {
            only_keys(s, &["elements", "add", "mul"])?;
            let labels = labels_of(need(s, "elements")?);
            let add = table_rows(s, "add", &labels)?;
            let mul = table_rows(s, "mul", &labels)?;
            return plain(FiniteRing::new(labels, add, mul, limits)?);
        };
        only_keys(s, &["from"])?;
        match words(from).as_slice() {
            ["zmod", n] => plain(FiniteRing::zmod(num(from, n)?, limits)?),
            ["funring", q, k] => plain(FiniteRing::function_ring(num(from, q)?, num(from, k)?, limits)?),
            ["quotient", r, gens @ ..] => {
                self.reference(from, r)?;
                let ring = self.ws.ring(r)?.clone();
                let gens: Vec<Elem> = gens.iter().map(|g| label_index(ring.labels(), from, g)).collect::<R<_>>()?;
                let ideal = ring.generated_ideal(mask_of(gens));
                let (q, hom) = quotient_ring(&ring, ideal, limits)?;
                Ok(WorkspaceObject::Ring { ring: q, quotient: Some((r.to_string(), hom)) })
            }
            _ => Err(Fail::Parse(from.error(format!("unknown ring form '{}'", from.value)))),
        }
    }

    fn load_presheaf(&self, s: &Section) -> R<WorkspaceObject> {
        let from = s.get("from");
        if let Some(f) = from {
            if let ["pullback", sheaf, map] = words(f).as_slice() {
                only_keys(s, &["from", "base"])?;
                self.reference(f, sheaf)?;
                self.reference(f, map)?;
                let m = self.ws.morphism(map)?;
                if let Some(b) = s.get("base") {
                    let (q, _) = self.quantale_ref(b, &b.value)?;
                    if *q != **m.source() {
                        return Err(Fail::Msg(format!("base '{}' is not the source of '{map}'", b.value)));
                    }
                }
                return Ok(WorkspaceObject::Presheaf(pullback_presheaf(self.ws.presheaf(sheaf)?, m)?));
            }
        }
        let b = need(s, "base")?;
        let (base, origin) = self.quantale_ref(b, &b.value)?;
        let group = |e: &Entry, g: &str| parse_group(g).map_err(|m| Fail::Parse(e.error(m)));
        if let Some(f) = from {
            only_keys(s, &["from", "base"])?;
            let (form, g) = f.value.split_once(char::is_whitespace).unwrap_or((f.value.as_str(), ""));
            let k = group(f, g)?;
            return Ok(WorkspaceObject::Presheaf(match form {
                "constant" => constant_presheaf(&base, &k),
                "locally-constant" => match &origin {
                    QuantaleOrigin::Space { x, .. } => locally_constant_sheaf(&base, x, &k)?,
                    _ => return Err(Fail::Msg(format!("base '{}' is not the locale of a space", b.value))),
                },
                "idempotent" => idempotent_sheaf(&base, &k, self.limits)?,
                _ => return Err(Fail::Parse(f.error(format!("unknown presheaf form '{form}'")))),
            }));
        }
        only_keys(s, &["base", "value", "res"])?;
        let labels = base.labels();
        let mut values: Vec<Option<FgAbGroup>> = vec![None; base.len()];
        for e in s.rows("value") {
            let a = label_index(labels, e, e.arg.as_deref().unwrap_or(""))?;
            values[a] = Some(group(e, &e.value)?);
        }
        let values: Vec<FgAbGroup> = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Fail::Parse(s.error(format!("missing 'value {}'", labels[i])))))
            .collect::<R<_>>()?;
        let mut edges = Vec::new();
        for e in s.rows("res") {
            let arg = e.arg.as_deref().unwrap_or("");
            let (a, c) = arg.split_once('<').ok_or_else(|| {
                Fail::Parse(ParseError::new(e.line, 1, format!("expected 'res a<b', found 'res {arg}'")))
            })?;
            let (a, c) = (label_index(labels, e, a)?, label_index(labels, e, c)?);
            let m =
                parse_matrix(&e.value, values[a].ngens(), values[c].ngens()).map_err(|m| Fail::Parse(e.error(m)))?;
            let h = GroupHom::new(values[c].clone(), values[a].clone(), m)
                .map_err(|err| Fail::Parse(e.error(err.to_string())))?;
            edges.push((a, c, h));
        }
        Ok(WorkspaceObject::Presheaf(build_presheaf(&base, values, edges)?))
    }

    fn load_morphism(&self, s: &Section) -> R<WorkspaceObject> {
        only_keys(s, &["source", "target", "map", "from"])?;
        let se = need(s, "source")?;
        let te = need(s, "target")?;
        let (src, src_origin) = self.quantale_ref(se, &se.value)?;
        let (dst, dst_origin) = self.quantale_ref(te, &te.value)?;
        if let Some(m) = s.get("map") {
            if s.get("from").is_some() {
                return Err(Fail::Parse(m.error("give either 'map' or 'from', not both")));
            }
            let mut table: Vec<Option<Elem>> = vec![None; src.len()];
            for pair in words(m) {
                let (a, b) = pair
                    .split_once("->")
                    .ok_or_else(|| Fail::Parse(m.error(format!("expected 'a->x', found '{pair}'"))))?;
                let a = label_index(src.labels(), m, a)?;
                if table[a].is_some() {
                    return Err(Fail::Parse(m.error(format!("'{}' is mapped twice", src.label(a)))));
                }
                table[a] = Some(label_index(dst.labels(), m, b)?);
            }
            let table = table
                .into_iter()
                .enumerate()
                .map(|(i, v)| v.ok_or_else(|| Fail::Parse(m.error(format!("'{}' is not mapped", src.label(i))))))
                .collect::<R<_>>()?;
            return Ok(WorkspaceObject::Morphism(MonotoneMap::new(src, dst, table)?));
        }
        let f = need(s, "from")?;
        let (sn, tn) = (se.value.as_str(), te.value.as_str());
        let discrete_k = |o: &QuantaleOrigin, iq: &IdealQuantale| -> R<()> {
            let RingKind::Function { k, .. } = iq.ring.kind() else {
                return Err(Fail::Msg("tau and theta need a function ring".into()));
            };
            match o {
                QuantaleOrigin::Space { x, .. } if *x.opens() == *FiniteSpace::discrete(k as usize).opens() => Ok(()),
                _ => Err(Fail::Msg(format!(
                    "expected the locale of a discrete space on {k} points, opens in mask order"
                ))),
            }
        };
        let map = match words(f).as_slice() {
            ["identity"] => {
                if src != dst {
                    return Err(Fail::Msg("identity needs equal source and target".into()));
                }
                MonotoneMap::identity(&src)
            }
            ["tau"] => {
                let QuantaleOrigin::Ideals { iq, .. } = &src_origin else {
                    return Err(Fail::Msg(format!("'{sn}' is not the ideal quantale of a ring")));
                };
                discrete_k(&dst_origin, iq)?;
                tau_map(iq, &dst)?
            }
            ["theta"] => {
                let QuantaleOrigin::Ideals { iq, .. } = &dst_origin else {
                    return Err(Fail::Msg(format!("'{tn}' is not the ideal quantale of a ring")));
                };
                discrete_k(&src_origin, iq)?;
                theta_map(iq, &src)?
            }
            ["inclusion"] => match &src_origin {
                QuantaleOrigin::Idem { of, inclusion } | QuantaleOrigin::Interval { of, inclusion } if of == tn => {
                    inclusion.clone()
                }
                _ => {
                    let table = src
                        .elements()
                        .map(|a| {
                            dst.index_of(src.label(a)).ok_or_else(|| {
                                Fail::Msg(format!("'{}' has no element of the same name in '{tn}'", src.label(a)))
                            })
                        })
                        .collect::<R<_>>()?;
                    MonotoneMap::new(src.clone(), dst.clone(), table)?
                }
            },
            ["approx"] => match &dst_origin {
                QuantaleOrigin::Idem { of, inclusion } if of == sn => {
                    let table = src
                        .elements()
                        .map(|a| {
                            let p = src.idem_approx(a);
                            inclusion.table().iter().position(|&x| x == p).expect("approximation is idempotent")
                        })
                        .collect();
                    MonotoneMap::new(src.clone(), dst.clone(), table)?
                }
                _ => return Err(Fail::Msg(format!("'{tn}' is not 'idem {sn}'"))),
            },
            ["projection", i] => match &src_origin {
                QuantaleOrigin::Product { factors, projections } => {
                    let (name, p) = match *i {
                        "1" => (&factors.0, &projections.0),
                        "2" => (&factors.1, &projections.1),
                        _ => return Err(Fail::Parse(f.error("expected 'projection 1' or 'projection 2'"))),
                    };
                    if name != tn {
                        return Err(Fail::Msg(format!("factor {i} of '{sn}' is '{name}', not '{tn}'")));
                    }
                    p.clone()
                }
                _ => return Err(Fail::Msg(format!("'{sn}' is not a product"))),
            },
            ["quotient"] => {
                let (
                    QuantaleOrigin::Ideals { ring: Some(rs), iq: siq },
                    QuantaleOrigin::Ideals { ring: Some(rt), iq: tiq },
                ) = (&src_origin, &dst_origin)
                else {
                    return Err(Fail::Msg("quotient needs ideal quantales of named rings".into()));
                };
                let hom = match self.ws.get(rt) {
                    Some(WorkspaceObject::Ring { quotient: Some((of, hom)), .. }) if of == rs => hom,
                    _ => return Err(Fail::Msg(format!("ring '{rt}' is not a quotient of '{rs}'"))),
                };
                induced_surjection_morphism(hom, siq, tiq)?
            }
            _ => return Err(Fail::Parse(f.error(format!("unknown morphism form '{}'", f.value)))),
        };
        Ok(WorkspaceObject::Morphism(map))
    }
}

fn run(text: &str, limits: &Limits, stop_early: bool) -> Result<(Workspace, Vec<ObjectReport>), LoadError> {
    let doc = parse_document(text)?;
    let mut loader = Loader { ws: Workspace::default(), limits, invalid: vec![] };
    let mut reports = Vec::new();
    for s in &doc.sections {
        match loader.load(s) {
            Ok(obj) => {
                reports.push(ObjectReport {
                    kind: s.kind,
                    name: s.name.clone(),
                    line: s.line,
                    result: Ok(obj.summary()),
                    cap: false,
                });
                loader.ws.insert(&s.name, obj);
            }
            Err(Fail::Parse(e)) => return Err(LoadError::Parse(e)),
            Err(e) => {
                let cap = matches!(&e, Fail::Theorem(t) if t.is_cap());
                if stop_early {
                    return Err(LoadError::Invalid {
                        kind: s.kind,
                        name: s.name.clone(),
                        line: s.line,
                        message: e.to_string(),
                        cap,
                    });
                }
                reports.push(ObjectReport {
                    kind: s.kind,
                    name: s.name.clone(),
                    line: s.line,
                    result: Err(e.to_string()),
                    cap,
                });
                loader.invalid.push(s.name.clone());
            }
        }
    }
    Ok((loader.ws, reports))
}

/// Parses and builds every object; the first invalid object is an error.
pub fn load_workspace(text: &str, limits: &Limits) -> Result<Workspace, LoadError> {
    run(text, limits, true).map(|(ws, _)| ws)
}

/// A verdict for every object. Syntax errors still abort.
pub fn validate_document(text: &str, limits: &Limits) -> Result<Vec<ObjectReport>, ParseError> {
    match run(text, limits, false) {
        Ok((_, reports)) => Ok(reports),
        Err(LoadError::Parse(e)) => Err(e),
        Err(LoadError::Invalid { .. }) => unreachable!("invalid objects are collected"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::QuantaleError;

    fn lim() -> Limits {
        Limits::default()
    }

    #[test]
    fn chain_table() {
        let text = "[quantale c]\nelements = 0 1 2\norder = 0<1<2\nmul = meet\n";
        let ws = load_workspace(text, &lim()).unwrap();
        let (q, _) = ws.quantale("c").unwrap();
        assert_eq!(**q, chain_locale(3));
    }

    #[test]
    fn explicit_rows_and_errors() {
        let text = "[quantale q]\nelements = 0 a 1\norder = 0<a a<1\nmul 0 = 0 0 0\nmul a = 0 0 a\nmul 1 = 0 a 1\n";
        let ws = load_workspace(text, &lim()).unwrap();
        assert!(!ws.quantale("q").unwrap().0.flags().idempotent);
        let bad = "[quantale q]\nelements = 0 a 1\norder = 0<a a<1\nmul 0 = 0 0 0\nmul a = 0 1 a\nmul 1 = 0 a 1\n";
        let reports = validate_document(bad, &lim()).unwrap();
        assert!(reports[0].result.is_err());
        let missing = "[quantale q]\nelements = 0 1\norder = 0<1\nmul 0 = 0 0\n";
        let e = load_workspace(missing, &lim()).unwrap_err();
        assert!(matches!(e, LoadError::Parse(ref p) if p.message.contains("mul 1")), "{e}");
    }

    #[test]
    fn zmod_shorthand() {
        let ws = load_workspace("[quantale i]\nfrom = zmod 6\n", &lim()).unwrap();
        let (q, _) = ws.quantale("i").unwrap();
        assert_eq!(q.len(), 4);
        assert_eq!(ws.get("i").unwrap().summary(), "4 elements; semicartesian commutative unital idempotent geometric");
    }

    #[test]
    fn spaces_and_sheaves() {
        let text = "\
[space x]
points = a b c d
opens = {} {a} {b} {a,b} {a,b,c} {a,b,d} {a,b,c,d}

[quantale o]
from = locale x

[presheaf f]
base = o
from = locally-constant Z

[presheaf k]
base = o
from = constant Z/2
";
        let ws = load_workspace(text, &lim()).unwrap();
        let f = ws.presheaf("f").unwrap();
        assert_eq!(f.value(ws.quantale("o").unwrap().0.top()), &FgAbGroup::free(1));
        assert!(ws.presheaf("k").is_ok());
        assert!(ws.presheaf("o").unwrap_err().contains("not a presheaf"));
    }

    #[test]
    fn morphism_forms() {
        let text = "\
[ring r]
from = funring 2 2
[quantale i]
from = ideals r
[space x]
from = discrete 2
[quantale o]
from = locale x
[morphism t]
source = i
target = o
from = tau
[morphism th]
source = o
target = i
from = theta
[presheaf f]
base = o
from = locally-constant Z
[presheaf g]
from = pullback f t
[ring z]
from = zmod 4
[ring z2]
from = quotient z 2
[quantale iz]
from = ideals z
[quantale iz2]
from = ideals z2
[morphism q]
source = iz
target = iz2
from = quotient
[quantale e]
from = idem iz
[morphism inc]
source = e
target = iz
from = inclusion
[morphism ap]
source = iz
target = e
from = approx
[quantale p]
from = product o o
[morphism p1]
source = p
target = o
from = projection 1
[morphism m]
source = e
target = iz
map = (0)->(0) (1)->(1)
";
        let ws = load_workspace(text, &lim()).unwrap();
        assert_eq!(ws.presheaf("g").unwrap().base().len(), 4);
        assert_eq!(ws.morphism("q").unwrap().table().len(), 3);
        assert_eq!(ws.morphism("m").unwrap().table(), ws.morphism("inc").unwrap().table());
        assert_eq!(ws.morphism("p1").unwrap().source().len(), 16);
    }

    #[test]
    fn invalid_objects_propagate() {
        let text = "[quantale q]\nelements = a b\nmul = meet\n[quantale e]\nfrom = idem q\n";
        let reports = validate_document(text, &lim()).unwrap();
        assert!(reports[0].result.as_ref().unwrap_err().contains("meet"));
        assert!(reports[1].result.as_ref().unwrap_err().contains("depends on invalid"));
    }

    #[test]
    fn caps_are_flagged() {
        let limits = Limits { quantale_elements: 3, ..lim() };
        match load_workspace("[quantale i]\nfrom = zmod 12\n", &limits) {
            Err(e) => assert!(e.is_cap(), "{e}"),
            Ok(_) => panic!("cap not enforced"),
        }
        let _ = QuantaleError::Empty;
    }
}
