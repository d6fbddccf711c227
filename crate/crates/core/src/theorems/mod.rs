//! Verification harness: each function checks one claim on a concrete
//! instance and returns a report. Conclusions are evaluated only after every
//! hypothesis passes.

pub mod corpus;

use std::sync::Arc;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::abgroups::{groups_isomorphic, FgAbGroup};
use crate::cech::{
    build_family_complex, cover_cohomology, enumerate_covers, find_terminal_cover, make_cover, CechError, Cover,
};
use crate::lattice::{idem_locale, Elem, Quantale, QuantaleError};
use crate::limits::Limits;
use crate::morphisms::{certify_geometric, direct_image_preserves, right_adjoint, MonotoneMap, MorphismError};
use crate::presheaf::{locally_constant_sheaf, pullback_presheaf, sheaf_check, AbPresheaf, PresheafError};
use crate::sources::{
    ideal_quantale, induced_surjection_morphism, locale_of_space, quotient_ring, space_of_locale, tau_map, theta,
    theta_map, FiniteRing, FiniteSpace, Ideal, IdealQuantale, RingError, SpaceError,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error(transparent)]
    Quantale(#[from] QuantaleError),
    #[error(transparent)]
    Morphism(#[from] MorphismError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Presheaf(#[from] PresheafError),
    #[error(transparent)]
    Cech(#[from] CechError),
}

impl TheoremError {
    /// Whether the failure is a resource cap rather than bad input.
    pub fn is_cap(&self) -> bool {
        fn quantale(e: &QuantaleError) -> bool {
            matches!(e, QuantaleError::SizeCapExceeded { .. })
        }
        fn cech(e: &CechError) -> bool {
            matches!(e, CechError::SizeCapExceeded { .. })
        }
        fn ring(e: &RingError) -> bool {
            match e {
                RingError::SizeCapExceeded { .. } => true,
                RingError::Quantale(q) => quantale(q),
                _ => false,
            }
        }
        match self {
            TheoremError::Quantale(e) => quantale(e),
            TheoremError::Ring(e) => ring(e),
            TheoremError::Space(SpaceError::Quantale(e)) => quantale(e),
            TheoremError::Space(SpaceError::TooManyPoints(_)) => true,
            TheoremError::Cech(e) => cech(e),
            TheoremError::Presheaf(PresheafError::Cech(e)) => cech(e),
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckItem {
    pub name: String,
    pub pass: bool,
    pub witness: Option<String>,
}

impl CheckItem {
    pub fn new(name: impl Into<String>, failure: Option<String>) -> Self {
        CheckItem { name: name.into(), pass: failure.is_none(), witness: failure }
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), json!(self.name));
        m.insert("pass".into(), json!(self.pass));
        if let Some(w) = &self.witness {
            m.insert("witness".into(), json!(w));
        }
        Value::Object(m)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// A hypothesis failed, so the conclusion was not evaluated.
    Skipped,
    /// Nothing was asserted; the data records what was computed.
    Observed,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
            Verdict::Observed => "observed",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub theorem: &'static str,
    pub instance: String,
    pub hypotheses: Vec<CheckItem>,
    pub checks: Vec<CheckItem>,
    pub verdict: Verdict,
    pub data: Map<String, Value>,
}

impl TheoremReport {
    pub(crate) fn new(theorem: &'static str, instance: impl Into<String>) -> Self {
        TheoremReport {
            theorem,
            instance: instance.into(),
            hypotheses: vec![],
            checks: vec![],
            verdict: Verdict::Skipped,
            data: Map::new(),
        }
    }

    pub fn hypotheses_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }

    pub(crate) fn finish(mut self) -> Self {
        self.verdict = if !self.hypotheses_pass() {
            Verdict::Skipped
        } else if self.checks.is_empty() {
            Verdict::Observed
        } else if self.checks.iter().all(|c| c.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    pub fn to_json(&self) -> Value {
        json!({
            "theorem": self.theorem,
            "instance": self.instance,
            "hypotheses": self.hypotheses.iter().map(CheckItem::to_json).collect::<Vec<_>>(),
            "conclusion": self.verdict.as_str(),
            "checks": self.checks.iter().map(CheckItem::to_json).collect::<Vec<_>>(),
            "data": Value::Object(self.data.clone()),
        })
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("theorem {} [{}]\n", self.theorem, self.instance);
        let line = |out: &mut String, kind: &str, c: &CheckItem| {
            out.push_str(&format!("  {kind} {} {}", if c.pass { "ok  " } else { "FAIL" }, c.name));
            if let Some(w) = &c.witness {
                out.push_str(&format!(" ({w})"));
            }
            out.push('\n');
        };
        for h in &self.hypotheses {
            line(&mut out, "hypothesis", h);
        }
        for c in &self.checks {
            line(&mut out, "check     ", c);
        }
        for (k, v) in &self.data {
            out.push_str(&format!("  {k}: {}\n", render_value(v)));
        }
        out.push_str(&format!("  conclusion: {}\n", self.verdict.as_str()));
        out
    }
}

fn render_value(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn groups_json(groups: &[FgAbGroup]) -> Value {
    Value::Array(groups.iter().map(|g| json!(g.canonical().factors())).collect())
}

pub(crate) fn groups_text(groups: &[FgAbGroup]) -> String {
    let parts: Vec<String> = groups.iter().map(|g| g.canonical().to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// The first failing cover of a sheaf check, as text.
pub(crate) fn sheaf_failure(f: &AbPresheaf, limits: &Limits) -> Result<Option<String>, TheoremError> {
    let r = sheaf_check(f, None, limits)?;
    Ok(r.failures.first().map(|fail| {
        format!(
            "{:?} at cover {} of {} ({} failing covers)",
            fail.kind,
            fail.cover.show(f.base()),
            f.base().label(fail.cover.base()),
            r.failure_count
        )
    }))
}

pub fn ring_name(r: &FiniteRing) -> String {
    match r.kind() {
        crate::sources::RingKind::Zmod(n) => format!("Z/{n}"),
        crate::sources::RingKind::Function { q, k } => format!("F_{q}^{k}"),
        crate::sources::RingKind::Table => format!("ring of order {}", r.len()),
    }
}

/// Pullback of a sheaf along a geometric map is a sheaf.
pub fn verify_change_of_base(
    f_sheaf: &AbPresheaf,
    f: &MonotoneMap,
    limits: &Limits,
) -> Result<TheoremReport, TheoremError> {
    let mut rep = TheoremReport::new("change-of-base", "pullback along f");
    rep.hypotheses.push(CheckItem::new("F is a sheaf", sheaf_failure(f_sheaf, limits)?));
    let cert = certify_geometric(f);
    rep.hypotheses.push(CheckItem::new("f preserves joins", cert.preserves_joins.witness.clone()));
    rep.hypotheses.push(CheckItem::new("f preserves the unit", cert.preserves_unit.witness.clone()));
    rep.hypotheses.push(CheckItem::new("f weakly preserves multiplication", cert.weak_mul.witness.clone()));
    if rep.hypotheses_pass() {
        let pulled = pullback_presheaf(f_sheaf, f)?;
        rep.checks.push(CheckItem::new("F∘f is a sheaf", sheaf_failure(&pulled, limits)?));
    }
    Ok(rep.finish())
}

/// Preservation properties of τ and θ and their adjunction on `F_q^k`.
pub fn verify_tau_theta(q: u64, k: u32, limits: &Limits) -> Result<TheoremReport, TheoremError> {
    let ring = Arc::new(FiniteRing::function_ring(q, k, limits)?);
    let iq = ideal_quantale(&ring, limits)?;
    let space = FiniteSpace::discrete(k as usize);
    let locale = Arc::new(locale_of_space(&space, limits)?);
    let t = tau_map(&iq, &locale)?;
    let th = theta_map(&iq, &locale)?;
    let (ideals, opens) = (iq.quantale.clone(), locale.clone());
    let mut rep = TheoremReport::new("tau-theta", format!("F_{q}^{k}"));
    rep.hypotheses.push(CheckItem::new("ring is a function ring within caps", None));

    let tc = certify_geometric(&t);
    rep.checks.push(CheckItem::new("tau preserves joins", tc.preserves_joins.witness.clone()));
    rep.checks.push(CheckItem::new("tau preserves multiplication", tc.strong_mul.witness.clone()));
    rep.checks.push(CheckItem::new("tau preserves the unit", tc.preserves_unit.witness.clone()));
    let thc = certify_geometric(&th);
    rep.checks.push(CheckItem::new("theta preserves joins", thc.preserves_joins.witness.clone()));
    rep.checks.push(CheckItem::new("theta preserves the unit", thc.preserves_unit.witness.clone()));

    let mut adj = None;
    'adj: for i in ideals.elements() {
        for u in opens.elements() {
            if opens.leq(t.apply(i), u) != ideals.leq(i, th.apply(u)) {
                adj = Some(format!("ideal {} and open {}", ideals.label(i), opens.label(u)));
                break 'adj;
            }
        }
    }
    rep.checks.push(CheckItem::new("tau is left adjoint to theta", adj));

    let computed = right_adjoint(&t)?;
    let same = (computed.table() != th.table()).then(|| "computed right adjoint differs from theta".to_string());
    rep.checks.push(CheckItem::new("right adjoint of tau equals theta", same));

    let mut sub = None;
    'sub: for u in opens.elements() {
        for v in opens.elements() {
            let lhs = ideals.mul(th.apply(u), th.apply(v));
            let rhs = th.apply(opens.mul(u, v));
            if !ideals.leq(lhs, rhs) {
                sub = Some(format!("opens {} and {}", opens.label(u), opens.label(v)));
                break 'sub;
            }
        }
    }
    rep.checks.push(CheckItem::new("theta(U)⊙theta(V) ⊆ theta(U∩V)", sub));

    let mut gen = None;
    for (m, &open) in space.opens().iter().enumerate() {
        let plain = theta(&ring, open)?;
        if ring.generated_ideal(plain) != plain {
            gen = Some(format!("open {}", opens.label(m)));
            break;
        }
    }
    rep.checks.push(CheckItem::new("vanishing sets are already ideals", gen));
    rep.data.insert("ideals".into(), json!(ideals.len()));
    rep.data.insert("opens".into(), json!(opens.len()));
    Ok(rep.finish())
}

/// Complexes of a cover `U` of the unit ideal with `F∘τ`, and of `τ(U)`
/// with `F`, are equal degree by degree.
pub fn verify_cover_iso(
    iq: &IdealQuantale,
    cover: &Cover,
    f_space: &AbPresheaf,
    limits: &Limits,
) -> Result<TheoremReport, TheoremError> {
    let t = tau_map(iq, f_space.base())?;
    let q = &iq.quantale;
    let mut rep = TheoremReport::new("cover-iso", format!("cover {}", cover.show(q)));
    let _ = limits;
    let image: Vec<Elem> = cover.members().iter().map(|&u| t.apply(u)).collect();
    let left = build_family_complex(&pullback_presheaf(f_space, &t)?, cover.members(), None)?;
    let right = build_family_complex(f_space, &image, None)?;
    let mut mismatch = None;
    for d in 0..left.degrees().max(right.degrees()) {
        let (a, b) = (left.complex(), right.complex());
        if a.group(d) != b.group(d) {
            mismatch = Some(format!("groups differ in degree {d}"));
            break;
        }
        if a.differential(d).matrix() != b.differential(d).matrix() {
            mismatch = Some(format!("coboundaries differ in degree {d}"));
            break;
        }
    }
    rep.hypotheses.push(CheckItem::new("tau preserves multiplication", certify_geometric(&t).strong_mul.witness));
    rep.checks.push(CheckItem::new("complexes are equal degreewise", mismatch));
    let qm = Some(cover.len().saturating_sub(1));
    let hl = cover_cohomology(&pullback_presheaf(f_space, &t)?, cover, qm)?.groups();
    let fam = crate::cech::family_cohomology(f_space, &image, qm)?.groups();
    let iso = hl.iter().zip(&fam).position(|(a, b)| !groups_isomorphic(a, b)).map(|d| format!("degree {d}"));
    rep.checks.push(CheckItem::new("cohomology groups agree", iso));
    rep.data.insert("cohomology".into(), json!(groups_text(&hl)));
    Ok(rep.finish())
}

/// `Ȟ^q(⊤′, F∘f) ≅ Ȟ^q(⊤, F)` for a strong geometric `f` whose direct image
/// preserves the unit and joins.
pub fn verify_main_iso(
    f: &MonotoneMap,
    f_sheaf: &AbPresheaf,
    q_max: Option<usize>,
    limits: &Limits,
) -> Result<TheoremReport, TheoremError> {
    let (src, dst) = (f.source(), f.target());
    let mut rep = TheoremReport::new("main-iso", "f^* into the base of F");
    rep.hypotheses.push(CheckItem::new("F is a sheaf", sheaf_failure(f_sheaf, limits)?));
    let cert = certify_geometric(f);
    rep.hypotheses.push(CheckItem::new("f^* preserves joins", cert.preserves_joins.witness.clone()));
    rep.hypotheses.push(CheckItem::new("f^* preserves the unit", cert.preserves_unit.witness.clone()));
    rep.hypotheses.push(CheckItem::new("f^* preserves multiplication", cert.strong_mul.witness.clone()));
    let direct = right_adjoint(f).ok();
    if let Some(g) = &direct {
        let flags = direct_image_preserves(g);
        rep.hypotheses.push(CheckItem::new("f_* preserves the unit", flags.unit.witness.clone()));
        rep.hypotheses.push(CheckItem::new("f_* preserves joins", flags.joins.witness.clone()));
        rep.data.insert("f_* preserves the empty join".into(), json!(flags.empty_join.holds));
    } else {
        rep.hypotheses.push(CheckItem::new("f_* exists", Some("f^* does not preserve joins".into())));
    }
    if !rep.hypotheses_pass() {
        return Ok(rep.finish());
    }
    let g = direct.expect("checked above");
    let pulled = pullback_presheaf(f_sheaf, f)?;
    let (t_src, n_src) = find_terminal_cover(src, src.top(), limits)?;
    let (t_dst, n_dst) = find_terminal_cover(dst, dst.top(), limits)?;
    let q_max = q_max.unwrap_or_else(|| t_src.len().max(t_dst.len()).saturating_sub(1));
    let h_src = cover_cohomology(&pulled, &t_src, Some(q_max))?.groups();
    let h_dst = cover_cohomology(f_sheaf, &t_dst, Some(q_max))?.groups();
    let iso = (0..=q_max)
        .find(|&d| !groups_isomorphic(&h_src[d], &h_dst[d]))
        .map(|d| format!("degree {d}: {} vs {}", h_src[d].canonical(), h_dst[d].canonical()));
    rep.checks.push(CheckItem::new("cohomology groups are isomorphic", iso));

    let covers = enumerate_covers(dst, dst.top(), limits)?;
    let mut bad = None;
    for c in &covers {
        let back: Vec<Elem> = c.members().iter().map(|&u| f.apply(g.apply(u))).collect();
        let covers_top = dst.join(back.iter().copied()) == dst.top();
        let below = back.iter().zip(c.members()).all(|(&b, &u)| dst.leq(b, u));
        if !(covers_top && below) {
            bad = Some(format!("cover {}", c.show(dst)));
            break;
        }
    }
    rep.checks.push(CheckItem::new(format!("f^*(f_*(U)) refines U for all {} covers", covers.len()), bad));
    rep.data.insert("source terminal cover".into(), json!(t_src.show(src)));
    rep.data.insert("target terminal cover".into(), json!(t_dst.show(dst)));
    rep.data.insert("source covers".into(), json!(n_src));
    rep.data.insert("target covers".into(), json!(n_dst));
    rep.data.insert("source cohomology".into(), json!(groups_text(&h_src)));
    rep.data.insert("target cohomology".into(), json!(groups_text(&h_dst)));
    Ok(rep.finish())
}

/// Direct image of a ring quotient: `q_*(K) = J + I` for any `J` over `K`.
pub fn verify_quotient_direct_image(
    r: &Arc<FiniteRing>,
    ideal: Ideal,
    limits: &Limits,
) -> Result<TheoremReport, TheoremError> {
    let mut rep = TheoremReport::new("quotient", format!("{}/{}", ring_name(r), r.ideal_label(ideal)));
    let is_ideal = r.is_ideal(ideal);
    rep.hypotheses.push(CheckItem::new("I is an ideal", (!is_ideal).then(|| "not closed".to_string())));
    if !is_ideal {
        return Ok(rep.finish());
    }
    let (s, hom) = quotient_ring(r, ideal, limits)?;
    let src = ideal_quantale(r, limits)?;
    let dst = ideal_quantale(&s, limits)?;
    let fstar = induced_surjection_morphism(&hom, &src, &dst)?;
    let cert = certify_geometric(&fstar);
    rep.hypotheses.push(CheckItem::new("f^* is strong geometric", (!cert.is_strong()).then(|| format!("{cert:?}"))));
    if !rep.hypotheses_pass() {
        return Ok(rep.finish());
    }
    let g = right_adjoint(&fstar)?;
    let lab = |i: Ideal| r.ideal_label(i);

    let pre = dst
        .ideals
        .iter()
        .enumerate()
        .find(|&(k, &kk)| src.ideals[g.apply(k)] != hom.preimage(kk))
        .map(|(k, _)| format!("K = {}", dst.quantale.label(k)));
    rep.checks.push(CheckItem::new("f_* is the preimage", pre));

    let mut sum = None;
    for (j, &jj) in src.ideals.iter().enumerate() {
        let k = fstar.apply(j);
        let expect = r.ideal_sum(jj, ideal);
        if src.ideals[g.apply(k)] != expect {
            sum = Some(format!("J = {}: got {}, expected {}", lab(jj), lab(src.ideals[g.apply(k)]), lab(expect)));
            break;
        }
    }
    rep.checks.push(CheckItem::new("f_*(q(J)) = J + I", sum));

    let unit = (g.apply(dst.quantale.top()) != src.quantale.top()).then(|| "f_*(R/I) is not R".to_string());
    rep.checks.push(CheckItem::new("f_*(R/I) = R", unit));

    let d = &dst.quantale;
    let mut sums = None;
    'sums: for a in d.elements() {
        for b in d.elements() {
            if g.apply(d.join2(a, b)) != src.quantale.join2(g.apply(a), g.apply(b)) {
                sums = Some(format!("K1 = {}, K2 = {}", d.label(a), d.label(b)));
                break 'sums;
            }
        }
    }
    rep.checks.push(CheckItem::new("f_* preserves finite sums", sums));
    let table: Vec<String> =
        d.elements().map(|k| format!("{}->{}", d.label(k), src.quantale.label(g.apply(k)))).collect();
    rep.data.insert("direct image".into(), json!(table.join(" ")));
    Ok(rep.finish())
}

/// The sheaf on a commutative semicartesian quantale obtained by pulling
/// the locally constant sheaf back along `q ↦ q⁻` into `Idem(Q)`, read as
/// the locale of its join-irreducibles.
pub fn idempotent_sheaf(q: &Arc<Quantale>, k: &FgAbGroup, limits: &Limits) -> Result<AbPresheaf, TheoremError> {
    let (idem, incl) = idem_locale(q, limits)?;
    let space = space_of_locale(&idem)?;
    let locale = Arc::new(locale_of_space(&space, limits)?);
    let approx: Vec<Elem> = q
        .elements()
        .map(|x| incl.table().iter().position(|&p| p == q.idem_approx(x)).expect("approximation is idempotent"))
        .collect();
    let map = MonotoneMap::new(q.clone(), locale.clone(), approx)?;
    let lc = locally_constant_sheaf(&locale, &space, k)?;
    Ok(pullback_presheaf(&lc, &map)?)
}

/// Cover that `verify_cover_iso` callers usually want: `{⟨e_i⟩}` for a function ring.
pub fn coordinate_cover(iq: &IdealQuantale) -> Result<Cover, TheoremError> {
    let ring = &iq.ring;
    let k = match ring.kind() {
        crate::sources::RingKind::Function { k, .. } => k as usize,
        _ => return Err(RingError::NotAFunctionRing.into()),
    };
    let members: Vec<Elem> = (0..k)
        .map(|i| {
            let ideal = theta(ring, 1 << i)?;
            Ok(iq.index_of(ideal).expect("vanishing set is an ideal"))
        })
        .collect::<Result<_, TheoremError>>()?;
    Ok(make_cover(&iq.quantale, iq.quantale.top(), &members)?)
}
