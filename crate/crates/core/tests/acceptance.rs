//! Acceptance run: one line per criterion, then a second pass of criteria
//! 1 to 9 whose reports must match the first byte for byte.

use std::collections::{BTreeMap, HashSet};
use std::panic;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use qcech_core::abgroups::{smith_normal_form, subquotient, FgAbGroup, GroupHom, IntMatrix, Integer};
use qcech_core::cech::{build_complex, element_cohomology, enumerate_covers, find_terminal_cover};
use qcech_core::lattice::{iter_mask, Elem};
use qcech_core::limits::Limits;
use qcech_core::presheaf::{locally_constant_sheaf, pullback_presheaf};
use qcech_core::sources::{ideal_quantale, locale_of_space, tau_map, FiniteRing, FiniteSpace};
use qcech_core::theorems::corpus::{build_corpus, homotopy_suite, main_iso_suite, sheaf_suite, HOMOTOPY_MAX_ELEMENTS};
use qcech_core::theorems::{
    verify_cover_iso, verify_main_iso, verify_quotient_direct_image, verify_tau_theta, TheoremReport, Verdict,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    detail: String,
    failure: Option<String>,
    report: String,
}

impl Outcome {
    fn new(detail: impl Into<String>, failure: Option<String>, report: String) -> Self {
        Outcome { detail: detail.into(), failure, report }
    }
}

type Criterion = fn(&Limits) -> Outcome;

fn within(elapsed: Duration, budget: Duration) -> Option<String> {
    (elapsed > budget).then(|| format!("took {elapsed:?}, budget {budget:?}"))
}

fn first<T>(a: Option<T>, b: Option<T>) -> Option<T> {
    a.or(b)
}

fn reports_json(reports: &[TheoremReport]) -> String {
    let all: Vec<_> = reports.iter().map(TheoremReport::to_json).collect();
    serde_json::to_string(&all).unwrap()
}

fn verdict_failures(reports: &[TheoremReport], want: Verdict) -> Option<String> {
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| r.verdict != want)
        .take(3)
        .map(|r| format!("{} [{}]: {}", r.theorem, r.instance, r.verdict.as_str()))
        .collect();
    (!bad.is_empty()).then(|| bad.join("; "))
}

fn z(k: usize) -> FgAbGroup {
    FgAbGroup::free(k)
}

// Determinantal divisors give the invariant factors without any elimination.
fn det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn oracle_factors(m: &[Vec<i64>], cols: usize) -> Vec<i64> {
    let rows = m.len();
    let mut divisors = vec![1i64];
    for k in 1..=rows.min(cols) {
        let mut g = 0;
        for r in subsets(rows, k) {
            for c in subsets(cols, k) {
                let minor: Vec<Vec<i64>> = r.iter().map(|&i| c.iter().map(|&j| m[i][j]).collect()).collect();
                g = gcd(g, det(&minor));
            }
        }
        if g == 0 {
            break;
        }
        divisors.push(g);
    }
    divisors.windows(2).map(|w| w[1] / w[0]).collect()
}

fn pseudocircle() -> FiniteSpace {
    let pts = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    FiniteSpace::new(pts, vec![0, 0b0001, 0b0010, 0b0011, 0b0111, 0b1011, 0b1111]).unwrap()
}

fn c1(limits: &Limits) -> Outcome {
    let start = Instant::now();
    let x = pseudocircle();
    let q = Arc::new(locale_of_space(&x, limits).unwrap());
    let f = locally_constant_sheaf(&q, &x, &z(1)).unwrap();
    let h = element_cohomology(&f, q.top(), Some(2), limits).unwrap();
    let got = h.result.groups();

    // Cover {a}, {b}, {a,b,c}, {a,b,d}. Sections over pairwise and triple
    // intersections, one generator per component:
    //   01: empty  02: {a}  03: {a}  12: {b}  13: {b}  23: {a},{b}
    //   023: {a}  123: {b}  (012, 013, 0123 empty)
    // d0 sends (s0..s3) to s_j - s_i on each component of U_i ∩ U_j.
    let d0 = vec![
        vec![-1, 0, 1, 0],
        vec![-1, 0, 0, 1],
        vec![0, -1, 1, 0],
        vec![0, -1, 0, 1],
        vec![0, 0, -1, 1],
        vec![0, 0, -1, 1],
    ];
    // Columns: 02, 03, 12, 13, 23{a}, 23{b}. Rows: 023, 123.
    let d1 = vec![vec![1, -1, 0, 0, 1, 0], vec![0, 0, 1, -1, 0, 1]];
    let dd: Vec<i64> = (0..2)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (0..6).map(|k| d1[i][k] * d0[k][j]).sum())
        .collect();
    let f0 = oracle_factors(&d0, 4);
    let f1 = oracle_factors(&d1, 6);
    let torsion = |fs: &[i64]| fs.iter().filter(|&&d| d > 1).map(|&d| d as u64).collect::<Vec<_>>();
    let group = |free: usize, tors: Vec<u64>| {
        let mut fac = vec![0; free];
        fac.extend(tors);
        FgAbGroup::new(fac).unwrap().canonical()
    };
    let expect = vec![
        group(4 - f0.len(), vec![]),
        group(6 - f0.len() - f1.len(), torsion(&f0)),
        group(2 - f1.len(), torsion(&f1)),
    ];
    let ranks: Vec<i64> = expect.iter().map(|g| g.rank() as i64).collect();
    let euler = ranks[0] - ranks[1] + ranks[2];
    let canon: Vec<FgAbGroup> = got.iter().map(FgAbGroup::canonical).collect();
    let terminal: Vec<String> = h.terminal.members().iter().map(|&m| q.label(m).to_string()).collect();

    let failure = [
        (!dd.iter().all(|&v| v == 0)).then(|| "hand-built complex has d∘d != 0".to_string()),
        (canon != expect).then(|| format!("library {canon:?}, oracle {expect:?}")),
        (expect != vec![z(1), z(1), z(0)]).then(|| format!("oracle gives {expect:?}")),
        (4 - 6 + 2 != euler).then(|| format!("Euler characteristic {euler}")),
        (h.terminal.members() != [1, 2, 4, 5]).then(|| format!("terminal cover {terminal:?}")),
        within(start.elapsed(), Duration::from_secs(1)),
    ]
    .into_iter()
    .flatten()
    .next();
    let shown: Vec<String> = canon.iter().map(|g| g.to_string()).collect();
    Outcome::new(
        format!("H = [{}] on cover {}", shown.join(", "), h.terminal.show(&q)),
        failure,
        format!("{shown:?} {terminal:?} {f0:?} {f1:?}"),
    )
}

fn c2(limits: &Limits) -> Outcome {
    let start = Instant::now();
    let mut failure = None;
    let mut report = Vec::new();
    for k in 1..=3usize {
        let x = FiniteSpace::discrete(k);
        let locale = Arc::new(locale_of_space(&x, limits).unwrap());
        let lc = locally_constant_sheaf(&locale, &x, &z(1)).unwrap();
        let h0 = element_cohomology(&lc, locale.top(), Some(0), limits).unwrap().result.group(0).canonical();

        let ring = Arc::new(FiniteRing::function_ring(2, k as u32, limits).unwrap());
        let iq = ideal_quantale(&ring, limits).unwrap();
        let t = tau_map(&iq, &locale).unwrap();
        let rep = verify_main_iso(&t, &lc, None, limits).unwrap();
        let pulled = pullback_presheaf(&lc, &t).unwrap();
        let h0_ring =
            element_cohomology(&pulled, iq.quantale.top(), Some(0), limits).unwrap().result.group(0).canonical();
        let idem = ring.idempotent_count();

        let bad = if h0 != z(k) {
            Some(format!("discrete k={k}: H^0 = {h0}"))
        } else if rep.verdict != Verdict::Pass {
            Some(format!("main-iso on F_2^{k}: {}", rep.verdict.as_str()))
        } else if h0_ring != z(k) {
            Some(format!("F_2^{k}: H^0 = {h0_ring}"))
        } else if idem != 1 << k {
            Some(format!("F_2^{k}: {idem} idempotents"))
        } else {
            None
        };
        failure = first(failure, bad);
        report.push(format!("k={k} {h0} {h0_ring} {idem} {}", rep.to_json()));
    }
    let failure = first(failure, within(start.elapsed(), Duration::from_secs(5)));
    Outcome::new("H^0 = Z^k and 2^k idempotents for k = 1, 2, 3", failure, report.join("\n"))
}

fn c3(limits: &Limits) -> Outcome {
    let start = Instant::now();
    let reports: Vec<TheoremReport> =
        [(2, 1), (2, 2), (3, 2), (2, 3)].iter().map(|&(q, k)| verify_tau_theta(q, k, limits).unwrap()).collect();
    let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failure = first(verdict_failures(&reports, Verdict::Pass), within(start.elapsed(), Duration::from_secs(10)));
    Outcome::new(format!("{} rings, {checks} checks", reports.len()), failure, reports_json(&reports))
}

fn c4(limits: &Limits) -> Outcome {
    let mut reports = Vec::new();
    let mut counts = Vec::new();
    for k in [2u32, 3] {
        let ring = Arc::new(FiniteRing::function_ring(2, k, limits).unwrap());
        let iq = ideal_quantale(&ring, limits).unwrap();
        let x = FiniteSpace::discrete(k as usize);
        let locale = Arc::new(locale_of_space(&x, limits).unwrap());
        let lc = locally_constant_sheaf(&locale, &x, &z(1)).unwrap();
        let covers = enumerate_covers(&iq.quantale, iq.quantale.top(), limits).unwrap();
        counts.push(format!("F_2^{k}: {}", covers.len()));
        for c in &covers {
            let mut rep = verify_cover_iso(&iq, c, &lc, limits).unwrap();
            rep.instance = format!("F_2^{k} {}", rep.instance);
            reports.push(rep);
        }
    }
    let failure = verdict_failures(&reports, Verdict::Pass);
    Outcome::new(format!("covers of the unit ideal: {}", counts.join(", ")), failure, reports_json(&reports))
}

fn c5(limits: &Limits) -> Outcome {
    let start = Instant::now();
    let corpus = build_corpus(limits).unwrap();
    let reports = main_iso_suite(&corpus, limits).unwrap();
    let n = |v: Verdict| reports.iter().filter(|r| r.verdict == v).count();
    let (pass, fail, skipped) = (n(Verdict::Pass), n(Verdict::Fail), n(Verdict::Skipped));
    let failure = first(
        first(
            (fail > 0).then(|| verdict_failures(&reports, Verdict::Pass).unwrap_or_default()),
            (pass < 50).then(|| format!("only {pass} hypothesis-passing instances")),
        ),
        within(start.elapsed(), Duration::from_secs(300)),
    );
    Outcome::new(format!("{pass} pass, {fail} fail, {skipped} skipped"), failure, reports_json(&reports))
}

fn random_matrix(rng: &mut StdRng, rows: usize, cols: usize) -> IntMatrix {
    let data: Vec<i64> = (0..rows * cols).map(|_| rng.gen_range(-10..=10)).collect();
    IntMatrix::from_i64(rows, cols, &data)
}

fn snf_failure(m: &IntMatrix) -> Option<String> {
    let s = smith_normal_form(m);
    let (r, c) = m.shape();
    if s.u.mul(m).mul(&s.v) != s.d {
        return Some("U·M·V != D".into());
    }
    if s.u.mul(&s.u_inv) != IntMatrix::identity(r) || s.v.mul(&s.v_inv) != IntMatrix::identity(c) {
        return Some("transform is not inverted by its stored inverse".into());
    }
    for i in 0..r {
        for j in 0..c {
            let x = &s.d[(i, j)];
            let diag_ok = if i != j || i >= s.rank { x.is_zero() } else { x.is_positive() };
            if !diag_ok {
                return Some(format!("D has a bad entry at ({i}, {j})"));
            }
        }
    }
    let f = s.invariant_factors();
    if f.windows(2).any(|w| !(&w[1] % &w[0]).is_zero()) {
        return Some("invariant factors do not divide in order".into());
    }
    None
}

// Elements of a finite group `Z/d1 + ... + Z/dn` as coordinate vectors.
fn elements(g: &FgAbGroup) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for &d in g.factors() {
        out = out.into_iter().flat_map(|v| (0..d as i64).map(move |x| [v.clone(), vec![x]].concat())).collect();
    }
    out
}

fn apply(h: &GroupHom, x: &[i64]) -> Vec<i64> {
    let v: Vec<Integer> = x.iter().map(|&a| Integer::from(a)).collect();
    let y = h.apply(&v);
    y.iter()
        .zip(h.codomain().factors())
        .map(|(a, &d)| {
            let d = Integer::from(d);
            i64::try_from(&(((a % &d) + &d) % &d)).unwrap()
        })
        .collect()
}

fn random_group(rng: &mut StdRng, max_order: u64) -> FgAbGroup {
    let mut fac = Vec::new();
    let mut order = 1;
    for _ in 0..rng.gen_range(1..=3) {
        let d = rng.gen_range(2..=12u64);
        if order * d <= max_order {
            fac.push(d);
            order *= d;
        }
    }
    FgAbGroup::new(fac).unwrap()
}

fn random_hom(rng: &mut StdRng, dom: &FgAbGroup, cod: &FgAbGroup) -> GroupHom {
    let (r, c) = (cod.ngens(), dom.ngens());
    let mut data = vec![0i64; r * c];
    for i in 0..r {
        for j in 0..c {
            let (ci, dj) = (cod.factors()[i], dom.factors()[j]);
            let step = ci / num_integer::gcd(ci, dj);
            data[i * c + j] = (rng.gen_range(0..ci) * step % ci) as i64;
        }
    }
    GroupHom::new(dom.clone(), cod.clone(), IntMatrix::from_i64(r, c, &data)).unwrap()
}

// `|{x in ker g : m x in im f}| / |im f|` for every `m` up to the order
// determines ker g / im f up to isomorphism.
fn subquotient_failure(rng: &mut StdRng) -> Option<String> {
    let b = random_group(rng, 200);
    let c = random_group(rng, 50);
    let g = random_hom(rng, &b, &c);
    let b_elems = elements(&b);
    let zero_c = vec![0i64; c.ngens()];
    let kernel: Vec<Vec<i64>> = b_elems.iter().filter(|x| apply(&g, x) == zero_c).cloned().collect();
    let a = random_group(rng, 40);
    let mut cols = Vec::new();
    for &d in a.factors() {
        let ok: Vec<&Vec<i64>> = kernel
            .iter()
            .filter(|x| x.iter().zip(b.factors()).all(|(&v, &o)| (v * d as i64) % o as i64 == 0))
            .collect();
        cols.push(ok[rng.gen_range(0..ok.len())].clone());
    }
    let mut data = vec![0i64; b.ngens() * a.ngens()];
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            data[i * a.ngens() + j] = v;
        }
    }
    let f = GroupHom::new(a.clone(), b.clone(), IntMatrix::from_i64(b.ngens(), a.ngens(), &data)).unwrap();
    let image: HashSet<Vec<i64>> = elements(&a).iter().map(|x| apply(&f, x)).collect();

    let sq = subquotient(&g, &f).unwrap().group().canonical();
    let order = kernel.len() / image.len();
    if sq.order() != Some(order as u64) {
        return Some(format!("{b} -> {c}: order {:?}, oracle {order}", sq.order()));
    }
    for m in 1..=order as i64 {
        let oracle = kernel
            .iter()
            .filter(|x| {
                let mx: Vec<i64> = x.iter().zip(b.factors()).map(|(&v, &o)| (v * m) % o as i64).collect();
                image.contains(&mx)
            })
            .count()
            / image.len();
        let lib: u64 = sq.factors().iter().map(|&d| num_integer::gcd(d, m as u64)).product();
        if lib != oracle as u64 {
            return Some(format!("{b} -> {c}: {m}-torsion {lib}, oracle {oracle}"));
        }
    }
    None
}

fn c6(limits: &Limits) -> Outcome {
    let corpus = build_corpus(limits).unwrap();
    let mut complexes = 0usize;
    let mut dd = None;
    for e in &corpus.entries {
        let q = &e.quantale;
        let covers = if q.len() <= HOMOTOPY_MAX_ELEMENTS {
            q.elements().flat_map(|u| enumerate_covers(q, u, limits).unwrap()).collect()
        } else {
            vec![find_terminal_cover(q, q.top(), limits).unwrap().0]
        };
        for (_, sheaf) in &e.sheaves {
            for c in &covers {
                let cx = build_complex(sheaf, c).unwrap();
                let k = cx.complex();
                for d in 0..k.differentials().len().saturating_sub(1) {
                    if !k.differential(d + 1).compose(&k.differential(d)).unwrap().is_zero() {
                        dd = dd.or_else(|| Some(format!("{}: d∘d != 0 in degree {d}", e.name)));
                    }
                }
                complexes += 1;
            }
        }
    }

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut snf = None;
    let mut factors = BTreeMap::<String, usize>::new();
    for _ in 0..1000 {
        let (r, c) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let m = random_matrix(&mut rng, r, c);
        snf = snf.or_else(|| snf_failure(&m));
        let f: Vec<String> = smith_normal_form(&m).invariant_factors().iter().map(|x| x.to_string()).collect();
        *factors.entry(f.join(",")).or_default() += 1;
    }
    let mut sq = None;
    for _ in 0..200 {
        sq = sq.or_else(|| subquotient_failure(&mut rng));
    }
    let failure = first(dd, first(snf, sq));
    Outcome::new(
        format!("{complexes} complexes, 1000 SNF recompositions, 200 subquotients"),
        failure,
        format!("{complexes} {factors:?}"),
    )
}

fn c7(limits: &Limits) -> Outcome {
    let corpus = build_corpus(limits).unwrap();
    let reports = sheaf_suite(&corpus, limits).unwrap();
    let failure = verdict_failures(&reports, Verdict::Pass);
    Outcome::new(format!("{} reports", reports.len()), failure, reports_json(&reports))
}

fn c8(limits: &Limits) -> Outcome {
    let corpus = build_corpus(limits).unwrap();
    let reports = homotopy_suite(&corpus, limits).unwrap();
    let pairs: u64 = reports.iter().map(|r| r.data["pairs"].as_u64().unwrap()).sum();
    let truncated: u64 = reports.iter().map(|r| r.data["truncated pairs"].as_u64().unwrap()).sum();
    let failure = verdict_failures(&reports, Verdict::Pass);
    Outcome::new(
        format!("{} sheaves, {pairs} cover pairs, {truncated} truncated", reports.len()),
        failure,
        reports_json(&reports),
    )
}

// Ideals of Z/n are (e) for e | n; the preimage of (e) in Z/g is (e) in Z/n.
fn label(e: u64, n: u64) -> String {
    format!("({})", if e == n { 0 } else { e })
}

fn c9(limits: &Limits) -> Outcome {
    let mut reports = Vec::new();
    let mut failure = None;
    for n in 1..=12u64 {
        let ring = Arc::new(FiniteRing::zmod(n, limits).unwrap());
        for ideal in ring.ideals() {
            let g = iter_mask(ideal).find(|&x: &Elem| x > 0).map_or(n, |x| x as u64);
            let rep = verify_quotient_direct_image(&ring, ideal, limits).unwrap();
            let table: BTreeMap<String, String> = rep.data["direct image"]
                .as_str()
                .unwrap()
                .split(' ')
                .map(|p| {
                    let (k, j) = p.split_once("->").unwrap();
                    (k.to_string(), j.to_string())
                })
                .collect();
            let expect: BTreeMap<String, String> =
                (1..=g).filter(|e| g % e == 0).map(|e| (label(e, g), label(e, n))).collect();
            let bad = if rep.verdict != Verdict::Pass {
                Some(format!("{}: {}", rep.instance, rep.verdict.as_str()))
            } else if table != expect {
                Some(format!("{}: direct image {table:?}, oracle {expect:?}", rep.instance))
            } else {
                None
            };
            failure = first(failure, bad);
            reports.push(rep);
        }
    }
    Outcome::new(format!("{} ring-ideal pairs", reports.len()), failure, reports_json(&reports))
}

const CRITERIA: [(&str, Criterion); 9] = [
    ("pseudocircle benchmark", c1),
    ("components and idempotents", c2),
    ("tau and theta", c3),
    ("cover isomorphism", c4),
    ("main isomorphism corpus", c5),
    ("homological core", c6),
    ("sheaf condition", c7),
    ("homotopy uniqueness", c8),
    ("quotient direct image", c9),
];

fn run(f: Criterion, limits: &Limits) -> Outcome {
    panic::catch_unwind(|| f(limits)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::new("panicked", Some(msg), String::new())
    })
}

fn main() -> ExitCode {
    let limits = Limits::default();
    let mut failed = 0;
    let mut first_pass = Vec::new();
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let out = run(*f, &limits);
        let ms = start.elapsed().as_millis();
        match &out.failure {
            None => println!("criterion {:>2} {name}: PASS ({}; {ms} ms)", i + 1, out.detail),
            Some(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({}; {ms} ms): {why}", i + 1, out.detail);
            }
        }
        first_pass.push(out.report);
    }

    let start = Instant::now();
    let differing: Vec<String> = CRITERIA
        .iter()
        .zip(&first_pass)
        .enumerate()
        .filter(|(_, ((_, f), before))| run(*f, &limits).report != **before || before.is_empty())
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    let ms = start.elapsed().as_millis();
    let bytes: usize = first_pass.iter().map(String::len).sum();
    if differing.is_empty() {
        println!("criterion 10 determinism: PASS ({bytes} report bytes identical on rerun; {ms} ms)");
    } else {
        failed += 1;
        println!("criterion 10 determinism: FAIL ({ms} ms): criteria {} differ", differing.join(", "));
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
