use std::collections::BTreeSet;
use std::sync::Arc;

use num_traits::Zero;
use proptest::prelude::*;
use qcech_core::abgroups::{smith_normal_form, FgAbGroup, IntMatrix};
use qcech_core::cech::element_cohomology;
use qcech_core::doc::{parse_document, parse_group};
use qcech_core::lattice::{idem_locale, idem_meet_disagreement, iter_mask, product_quantale, ElemSet, Quantale};
use qcech_core::limits::Limits;
use qcech_core::morphisms::{certify_geometric, right_adjoint, MonotoneMap};
use qcech_core::presheaf::{locally_constant_sheaf, sheaf_check};
use qcech_core::sources::{
    ideal_quantale, induced_surjection_morphism, locale_of_space, quotient_ring, FiniteRing, FiniteSpace,
};
use qcech_core::theorems::{idempotent_sheaf, verify_main_iso, Verdict};

fn space_from(n: usize, gens: &[u64]) -> Option<FiniteSpace> {
    let full = (1u64 << n) - 1;
    let mut opens: BTreeSet<u64> = [0, full].into_iter().collect();
    opens.extend(gens.iter().map(|g| g & full));
    loop {
        let cur: Vec<u64> = opens.iter().copied().collect();
        let before = opens.len();
        for &u in &cur {
            for &v in &cur {
                opens.insert(u | v);
                opens.insert(u & v);
            }
        }
        if opens.len() > 16 {
            return None;
        }
        if opens.len() == before {
            break;
        }
    }
    let points = (0..n).map(|i| format!("p{i}")).collect();
    FiniteSpace::new(points, opens.into_iter().collect()).ok()
}

/// Topologies on at most five points with at most sixteen opens.
fn space() -> impl Strategy<Value = FiniteSpace> {
    (1usize..=5, prop::collection::vec(any::<u64>(), 0..4))
        .prop_filter_map("too many opens", |(n, g)| space_from(n, &g))
}

fn zmod_ideals(n: u64) -> Arc<Quantale> {
    let r = Arc::new(FiniteRing::zmod(n, &Limits::default()).unwrap());
    ideal_quantale(&r, &Limits::default()).unwrap().quantale
}

/// Locales of small spaces, ideal quantales of `Z/n` and of `F_2^k`, and
/// products of two of those.
fn quantale() -> impl Strategy<Value = Arc<Quantale>> {
    let l = Limits::default();
    let base = prop_oneof![
        space().prop_map(move |x| Arc::new(locale_of_space(&x, &Limits::default()).unwrap())),
        (1u64..=60).prop_map(zmod_ideals),
        (1u32..=3).prop_map(|k| {
            let r = Arc::new(FiniteRing::function_ring(2, k, &Limits::default()).unwrap());
            ideal_quantale(&r, &Limits::default()).unwrap().quantale
        }),
    ];
    prop_oneof![
        3 => base.clone(),
        1 => (base.clone(), base).prop_filter_map("product too large", move |(a, b)| {
            (a.len() * b.len() <= 64).then(|| product_quantale(&a, &b, &l).unwrap().0)
        }),
    ]
}

fn mask_in(q: &Quantale, bits: u64) -> ElemSet {
    if q.len() == 64 {
        bits
    } else {
        bits & ((1 << q.len()) - 1)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lattice_and_quantale_laws(q in quantale(), a in any::<usize>(), b in any::<usize>(), c in any::<usize>(), bits in any::<u64>()) {
        let n = q.len();
        let (a, b, c) = (a % n, b % n, c % n);
        prop_assert_eq!(q.join2(a, b), q.join2(b, a));
        prop_assert_eq!(q.join2(q.join2(a, b), c), q.join2(a, q.join2(b, c)));
        prop_assert_eq!(q.meet(a, q.join2(a, b)), a);
        prop_assert_eq!(q.join2(a, q.meet(a, b)), a);
        prop_assert_eq!(q.mul(a, b), q.mul(b, a));
        prop_assert_eq!(q.mul(q.mul(a, b), c), q.mul(a, q.mul(b, c)));
        prop_assert_eq!(q.mul(a, q.top()), a);
        prop_assert!(q.leq(q.mul(a, b), q.meet(a, b)));
        let s = mask_in(&q, bits);
        let lhs = q.mul(a, q.join_mask(s));
        let rhs = q.join(iter_mask(s).map(|x| q.mul(a, x)));
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(q.join_mask(0), q.bottom());
    }

    #[test]
    fn idempotent_approximation(q in quantale(), a in any::<usize>(), b in any::<usize>()) {
        let (a, b) = (a % q.len(), b % q.len());
        let p = q.idem_approx(a);
        prop_assert!(q.leq(p, a));
        prop_assert!(q.is_idempotent(p));
        prop_assert_eq!(q.idem_approx(p), p);
        if q.leq(a, b) {
            prop_assert!(q.leq(p, q.idem_approx(b)));
        }
        for e in q.elements().filter(|&e| q.is_idempotent(e) && q.leq(e, a)) {
            prop_assert!(q.leq(e, p));
        }
        prop_assert_eq!(idem_meet_disagreement(&q), None);
    }

    #[test]
    fn adjunction_of_certified_maps(a in quantale(), b in quantale()) {
        let l = Limits::default();
        let mut maps: Vec<MonotoneMap> = vec![idem_locale(&a, &l).unwrap().1];
        if a.len() * b.len() <= 64 {
            let (_, p1, p2) = product_quantale(&a, &b, &l).unwrap();
            maps.push(p1);
            maps.push(p2);
        }
        for f in maps {
            prop_assert!(certify_geometric(&f).preserves_joins.holds);
            let g = right_adjoint(&f).unwrap();
            let (s, t) = (f.source(), f.target());
            for x in s.elements() {
                prop_assert!(s.leq(x, g.apply(f.apply(x))));
                for y in t.elements() {
                    prop_assert_eq!(t.leq(f.apply(x), y), s.leq(x, g.apply(y)));
                }
            }
            for y in t.elements() {
                prop_assert!(t.leq(f.apply(g.apply(y)), y));
            }
        }
    }

    #[test]
    fn smith_normal_form_recomposes(rows in 1usize..=7, cols in 1usize..=7, data in prop::collection::vec(-30i64..=30, 49)) {
        let m = IntMatrix::from_i64(rows, cols, &data[..rows * cols]);
        let s = smith_normal_form(&m);
        prop_assert!(s.u.mul(&m).mul(&s.v) == s.d);
        prop_assert!(s.u.mul(&s.u_inv) == IntMatrix::identity(rows));
        prop_assert!(s.v_inv.mul(&s.v) == IntMatrix::identity(cols));
        let f = s.invariant_factors();
        for w in f.windows(2) {
            prop_assert!((&w[1] % &w[0]).is_zero());
        }
        for i in 0..rows {
            for j in 0..cols {
                if i != j || i >= s.rank {
                    prop_assert!(s.d[(i, j)].is_zero());
                }
            }
        }
    }

    #[test]
    fn h0_of_a_sheaf_is_global_sections(x in space(), k in prop_oneof![Just(FgAbGroup::free(1)), Just(FgAbGroup::cyclic(2)), Just(FgAbGroup::cyclic(6))]) {
        let l = Limits::default();
        let q = Arc::new(locale_of_space(&x, &l).unwrap());
        let f = locally_constant_sheaf(&q, &x, &k).unwrap();
        prop_assert!(sheaf_check(&f, None, &l).unwrap().is_sheaf());
        for u in q.elements() {
            let h = element_cohomology(&f, u, Some(0), &l).unwrap();
            prop_assert_eq!(h.result.group(0).canonical(), f.value(u).canonical());
        }
    }

    #[test]
    fn projections_never_break_the_main_isomorphism(x in space(), y in space()) {
        let l = Limits::default();
        let a = Arc::new(locale_of_space(&x, &l).unwrap());
        let b = Arc::new(locale_of_space(&y, &l).unwrap());
        prop_assume!(a.len() * b.len() <= 16);
        let (_, p1, p2) = product_quantale(&a, &b, &l).unwrap();
        let fa = locally_constant_sheaf(&a, &x, &FgAbGroup::free(1)).unwrap();
        let fb = locally_constant_sheaf(&b, &y, &FgAbGroup::free(1)).unwrap();
        for (p, f) in [(&p1, &fa), (&p2, &fb)] {
            let rep = verify_main_iso(p, f, None, &l).unwrap();
            prop_assert!(rep.verdict != Verdict::Fail, "{}", rep.render_text());
        }
    }

    #[test]
    fn quotients_never_break_the_main_isomorphism(n in 1u64..=36, pick in any::<usize>()) {
        let l = Limits::default();
        let r = Arc::new(FiniteRing::zmod(n, &l).unwrap());
        let ideals = r.ideals();
        let ideal = ideals[pick % ideals.len()];
        let (s, hom) = quotient_ring(&r, ideal, &l).unwrap();
        let src = ideal_quantale(&r, &l).unwrap();
        let dst = ideal_quantale(&s, &l).unwrap();
        let f = induced_surjection_morphism(&hom, &src, &dst).unwrap();
        let sheaf = idempotent_sheaf(&dst.quantale, &FgAbGroup::free(1), &l).unwrap();
        let rep = verify_main_iso(&f, &sheaf, None, &l).unwrap();
        prop_assert!(rep.verdict != Verdict::Fail, "{}", rep.render_text());
    }

    #[test]
    fn group_names_round_trip(factors in prop::collection::vec(prop_oneof![Just(0u64), 2u64..=4, 2u64..=30], 0..6)) {
        let g = FgAbGroup::new(factors).unwrap().canonical();
        prop_assert_eq!(parse_group(&g.to_string()).unwrap().canonical(), g);
    }

    #[test]
    fn parser_rejects_without_panicking(text in "[\\[\\]a-z0-9 =<>#{},;\n-]{0,200}") {
        if let Err(e) = parse_document(&text) {
            prop_assert!(e.line >= 1 && e.column >= 1);
        }
    }
}
