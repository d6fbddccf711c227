//! The generated instance corpus and the suites that sweep it.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::json;

use crate::abgroups::FgAbGroup;
use crate::cech::{all_refinements, cover_cohomology, enumerate_covers, homotopy_uniqueness_check, CohomologyResult};
use crate::lattice::{idem_locale, product_quantale, Quantale};
use crate::limits::Limits;
use crate::morphisms::{certify_geometric, MonotoneMap};
use crate::presheaf::{constant_presheaf, locally_constant_sheaf, pullback_presheaf, sheaf_check, AbPresheaf};
use crate::sources::{
    ideal_quantale, induced_surjection_morphism, locale_of_space, quotient_ring, tau_map, FiniteRing, FiniteSpace,
};

use super::{groups_text, idempotent_sheaf, sheaf_failure, verify_main_iso, CheckItem, TheoremError, TheoremReport};

/// A quantale with the sheaves the suites run on it.
#[derive(Clone, Debug)]
pub struct Entry {
    pub name: String,
    pub quantale: Arc<Quantale>,
    pub sheaves: Vec<(String, AbPresheaf)>,
}

/// `f : Q′ → Q` together with a sheaf on `Q`.
#[derive(Clone, Debug)]
pub struct MorphismCase {
    pub name: String,
    pub map: MonotoneMap,
    pub sheaf: AbPresheaf,
}

#[derive(Clone, Debug, Default)]
pub struct Corpus {
    pub entries: Vec<Entry>,
    pub morphisms: Vec<MorphismCase>,
}

pub fn coefficients() -> Vec<(&'static str, FgAbGroup)> {
    vec![("Z", FgAbGroup::free(1)), ("Z/2", FgAbGroup::cyclic(2))]
}

/// Every topology on `n` points `a, b, c, ...`, in order of the bitmask
/// choosing the proper nonempty opens.
pub fn topologies(n: usize) -> Vec<FiniteSpace> {
    let full = (1u64 << n) - 1;
    let middle: Vec<u64> = (1..full).collect();
    let points: Vec<String> = (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    let mut out = Vec::new();
    for bits in 0..1u64 << middle.len() {
        let mut opens = vec![0];
        opens.extend(middle.iter().enumerate().filter(|&(i, _)| bits >> i & 1 == 1).map(|(_, &u)| u));
        if full != 0 {
            opens.push(full);
        }
        if let Ok(x) = FiniteSpace::new(points.clone(), opens) {
            out.push(x);
        }
    }
    out
}

pub fn space_name(x: &FiniteSpace) -> String {
    let opens: Vec<String> = x.opens().iter().map(|&u| x.show(u)).collect();
    format!("space {}", opens.join(" "))
}

fn lc_sheaves(q: &Arc<Quantale>, x: &FiniteSpace) -> Result<Vec<(String, AbPresheaf)>, TheoremError> {
    coefficients()
        .into_iter()
        .map(|(name, k)| Ok((format!("locally constant {name}"), locally_constant_sheaf(q, x, &k)?)))
        .collect()
}

fn idem_sheaves(q: &Arc<Quantale>, limits: &Limits) -> Result<Vec<(String, AbPresheaf)>, TheoremError> {
    coefficients()
        .into_iter()
        .map(|(name, k)| Ok((format!("locally constant {name} via idempotents"), idempotent_sheaf(q, &k, limits)?)))
        .collect()
}

fn push_cases(out: &mut Vec<MorphismCase>, name: &str, map: &MonotoneMap, sheaves: &[(String, AbPresheaf)]) {
    for (sname, sheaf) in sheaves {
        out.push(MorphismCase { name: format!("{name}; {sname}"), map: map.clone(), sheaf: sheaf.clone() });
    }
}

fn idem_case(out: &mut Vec<MorphismCase>, entry: &Entry, limits: &Limits) -> Result<(), TheoremError> {
    let (_, incl) = idem_locale(&entry.quantale, limits)?;
    push_cases(out, &format!("Idem inclusion into {}", entry.name), &incl, &entry.sheaves);
    Ok(())
}

/// Largest product quantale the corpus builds.
const MAX_PRODUCT: usize = 12;

/// Locales of all topologies on at most three points and products of the
/// small ones, ideal quantales of `Z/n` for `n ≤ 12` and of `F_2^k` for
/// `k ≤ 3`, with locally constant sheaves and the morphisms between them.
pub fn build_corpus(limits: &Limits) -> Result<Corpus, TheoremError> {
    let mut corpus = Corpus::default();
    let mut small = Vec::new();
    for n in 1..=3 {
        for x in topologies(n) {
            let q = Arc::new(locale_of_space(&x, limits)?);
            let entry = Entry { name: space_name(&x), quantale: q.clone(), sheaves: lc_sheaves(&q, &x)? };
            idem_case(&mut corpus.morphisms, &entry, limits)?;
            if n <= 2 {
                small.push(entry.clone());
            }
            corpus.entries.push(entry);
        }
    }

    for (i, a) in small.iter().enumerate() {
        for b in &small[i..] {
            if a.quantale.len() * b.quantale.len() > MAX_PRODUCT {
                continue;
            }
            let (p, p1, p2) = product_quantale(&a.quantale, &b.quantale, limits)?;
            let name = format!("({}) x ({})", a.name, b.name);
            push_cases(&mut corpus.morphisms, &format!("first projection of {name}"), &p1, &a.sheaves);
            push_cases(&mut corpus.morphisms, &format!("second projection of {name}"), &p2, &b.sheaves);
            let sheaves = idem_sheaves(&p, limits)?;
            corpus.entries.push(Entry { name, quantale: p, sheaves });
        }
    }

    for n in 1..=12u64 {
        let ring = Arc::new(FiniteRing::zmod(n, limits)?);
        let iq = ideal_quantale(&ring, limits)?;
        let entry = Entry {
            name: format!("ideals of Z/{n}"),
            quantale: iq.quantale.clone(),
            sheaves: idem_sheaves(&iq.quantale, limits)?,
        };
        idem_case(&mut corpus.morphisms, &entry, limits)?;
        for &ideal in &iq.ideals {
            let (s, hom) = quotient_ring(&ring, ideal, limits)?;
            let target = ideal_quantale(&s, limits)?;
            let map = induced_surjection_morphism(&hom, &iq, &target)?;
            let sheaves = idem_sheaves(&target.quantale, limits)?;
            let name = format!("quotient Z/{n} -> Z/{n}/{}", ring.ideal_label(ideal));
            push_cases(&mut corpus.morphisms, &name, &map, &sheaves);
        }
        corpus.entries.push(entry);
    }

    for k in 1..=3u32 {
        let ring = Arc::new(FiniteRing::function_ring(2, k, limits)?);
        let iq = ideal_quantale(&ring, limits)?;
        let x = FiniteSpace::discrete(k as usize);
        let locale = Arc::new(locale_of_space(&x, limits)?);
        let t = tau_map(&iq, &locale)?;
        push_cases(&mut corpus.morphisms, &format!("tau on F_2^{k}"), &t, &lc_sheaves(&locale, &x)?);
        let entry = Entry {
            name: format!("ideals of F_2^{k}"),
            quantale: iq.quantale.clone(),
            sheaves: idem_sheaves(&iq.quantale, limits)?,
        };
        idem_case(&mut corpus.morphisms, &entry, limits)?;
        corpus.entries.push(entry);
    }
    Ok(corpus)
}

/// `verify_main_iso` on every morphism case, in corpus order.
pub fn main_iso_suite(corpus: &Corpus, limits: &Limits) -> Result<Vec<TheoremReport>, TheoremError> {
    corpus
        .morphisms
        .par_iter()
        .map(|case| {
            let mut rep = verify_main_iso(&case.map, &case.sheaf, None, limits)?;
            rep.instance = case.name.clone();
            Ok(rep)
        })
        .collect()
}

/// Constant `Z` fails only at the empty cover of `⊥`; the corpus sheaves
/// and their pullbacks along certified maps pass everywhere.
pub fn sheaf_suite(corpus: &Corpus, limits: &Limits) -> Result<Vec<TheoremReport>, TheoremError> {
    let mut reports: Vec<TheoremReport> = corpus
        .entries
        .par_iter()
        .map(|entry| {
            let q = &entry.quantale;
            let mut rep = TheoremReport::new("sheaf-condition", entry.name.clone());
            let constant = sheaf_check(&constant_presheaf(q, &FgAbGroup::free(1)), None, limits)?;
            let exact = constant.failure_count == 1
                && constant.failures.len() == 1
                && constant.failures[0].cover.base() == q.bottom()
                && constant.failures[0].cover.is_empty();
            let witness = (!exact).then(|| {
                let shown: Vec<String> = constant
                    .failures
                    .iter()
                    .map(|f| format!("{} of {}", f.cover.show(q), q.label(f.cover.base())))
                    .collect();
                format!("{} failing covers: {}", constant.failure_count, shown.join("; "))
            });
            rep.checks.push(CheckItem::new("constant Z fails exactly at the empty cover of the bottom", witness));
            for (name, sheaf) in &entry.sheaves {
                rep.checks.push(CheckItem::new(format!("{name} is a sheaf"), sheaf_failure(sheaf, limits)?));
            }
            rep.data.insert("covers checked".into(), json!(constant.covers_checked));
            Ok(rep.finish())
        })
        .collect::<Result<_, TheoremError>>()?;
    let pulled: Vec<TheoremReport> = corpus
        .morphisms
        .par_iter()
        .map(|case| {
            let mut rep = TheoremReport::new("sheaf-condition", format!("pullback along {}", case.name));
            let cert = certify_geometric(&case.map);
            let geometric = (!cert.is_geometric()).then(|| "not certified geometric".to_string());
            rep.hypotheses.push(CheckItem::new("map is certified geometric", geometric));
            rep.hypotheses.push(CheckItem::new("F is a sheaf", sheaf_failure(&case.sheaf, limits)?));
            if rep.hypotheses_pass() {
                let f = pullback_presheaf(&case.sheaf, &case.map)?;
                rep.checks.push(CheckItem::new("pullback is a sheaf", sheaf_failure(&f, limits)?));
            }
            Ok(rep.finish())
        })
        .collect::<Result<_, TheoremError>>()?;
    reports.extend(pulled);
    Ok(reports)
}

/// Quantales up to this size take part in the homotopy sweep.
pub const HOMOTOPY_MAX_ELEMENTS: usize = 8;

/// For every element and every ordered pair of its covers with at least two
/// refinement witnesses, all witnesses induce the same cohomology maps.
pub fn homotopy_suite(corpus: &Corpus, limits: &Limits) -> Result<Vec<TheoremReport>, TheoremError> {
    let jobs: Vec<(&Entry, &(String, AbPresheaf))> = corpus
        .entries
        .iter()
        .filter(|e| e.quantale.len() <= HOMOTOPY_MAX_ELEMENTS)
        .flat_map(|e| e.sheaves.iter().map(move |s| (e, s)))
        .collect();
    jobs.par_iter()
        .map(|&(entry, (sname, sheaf))| {
            let q = &entry.quantale;
            let mut rep = TheoremReport::new("homotopy-uniqueness", format!("{}; {sname}", entry.name));
            let (mut pairs, mut witnesses, mut truncated) = (0usize, 0usize, 0usize);
            let mut failure = None;
            for u in q.elements() {
                let covers = enumerate_covers(q, u, limits)?;
                let results: Vec<CohomologyResult> =
                    covers.iter().map(|c| cover_cohomology(sheaf, c, None)).collect::<Result<_, _>>()?;
                for (a, ra) in covers.iter().zip(&results) {
                    for (b, rb) in covers.iter().zip(&results) {
                        let (ws, _) = all_refinements(q, a.members(), b.members(), 2);
                        if ws.len() < 2 {
                            continue;
                        }
                        let h = homotopy_uniqueness_check(sheaf, ra, rb, limits.witnesses)?;
                        pairs += 1;
                        witnesses += h.witnesses;
                        truncated += h.truncated as usize;
                        if let (Some((r, s, d)), None) = (&h.mismatch, &failure) {
                            failure = Some(format!(
                                "{} into {} at {}: witnesses {r:?} and {s:?} differ in degree {d}",
                                a.show(q),
                                b.show(q),
                                q.label(u)
                            ));
                        }
                    }
                }
            }
            rep.checks.push(CheckItem::new("all refinement witnesses induce equal maps", failure));
            rep.data.insert("pairs".into(), json!(pairs));
            rep.data.insert("witnesses".into(), json!(witnesses));
            rep.data.insert("truncated pairs".into(), json!(truncated));
            Ok(rep.finish())
        })
        .collect()
}

/// Idempotent count of each corpus ring next to `Ȟ⁰` of the unit ideal with
/// constant and with locally constant `Z`. Nothing is asserted.
pub fn idempotent_census(limits: &Limits) -> Result<Vec<TheoremReport>, TheoremError> {
    let mut rings: Vec<(String, FiniteRing)> = Vec::new();
    for n in 1..=12u64 {
        rings.push((format!("Z/{n}"), FiniteRing::zmod(n, limits)?));
    }
    for (q, k) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
        rings.push((format!("F_{q}^{k}"), FiniteRing::function_ring(q, k, limits)?));
    }
    rings
        .into_iter()
        .map(|(name, ring)| {
            let ring = Arc::new(ring);
            let iq = ideal_quantale(&ring, limits)?;
            let q = &iq.quantale;
            let z = FgAbGroup::free(1);
            let h0 = |f: &AbPresheaf| -> Result<FgAbGroup, TheoremError> {
                let (t, _) = crate::cech::find_terminal_cover(q, q.top(), limits)?;
                Ok(cover_cohomology(f, &t, Some(0))?.group(0))
            };
            let constant = h0(&constant_presheaf(q, &z))?;
            let local = h0(&idempotent_sheaf(q, &z, limits)?)?;
            let count = ring.idempotent_count();
            let mut rep = TheoremReport::new("idempotent-census", name);
            rep.data.insert("idempotents".into(), json!(count));
            rep.data.insert("H0 constant".into(), json!(groups_text(std::slice::from_ref(&constant))));
            rep.data.insert("H0 locally constant".into(), json!(groups_text(std::slice::from_ref(&local))));
            let relation = if 1usize.checked_shl(local.rank() as u32) == Some(count) {
                "idempotents = 2^rank(locally constant)"
            } else {
                "idempotents != 2^rank(locally constant)"
            };
            rep.data.insert("relation".into(), json!(relation));
            let relation =
                if constant.rank() == count { "idempotents = rank(constant)" } else { "idempotents != rank(constant)" };
            rep.data.insert("constant relation".into(), json!(relation));
            Ok(rep.finish())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_counts() {
        let counts: Vec<usize> = (1..=3).map(|n| topologies(n).len()).collect();
        assert_eq!(counts, vec![1, 4, 29]);
    }
}
