use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;

use tamelab::aec::{
    amalgamate, closure, galois_type_equal, galois_type_equal_with, random_triple, verify_amalgam,
    GaloisTypeHandle, Point, SearchMethod, Subset, TripleParams, BRUTE_FORCE_LIMIT,
};
use tamelab::cli::{coherence_agreement, load_scenario, Scenario};
use tamelab::functions::{compare, preimage, EpFn, EpSet, Func, Symbol, SymbolSet};
use tamelab::sharp::{search_sharp, DerivedFilter};
use tamelab::structures::{build_level, Side, SigmaStructure};
use tamelab::Error;

fn scenario(name: &str) -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    load_scenario(&path).unwrap()
}

fn small_scenarios() -> Vec<Scenario> {
    ["s0", "s1", "s2", "s3"]
        .iter()
        .map(|s| scenario(s))
        .collect()
}

fn word(sigma: u8, min: usize, max: usize) -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec((0..sigma).prop_map(Symbol), min..=max)
}

fn epfn(sigma: u8) -> impl Strategy<Value = (Vec<Symbol>, Vec<Symbol>)> {
    (word(sigma, 0, 4), word(sigma, 1, 5))
}

fn naive(prefix: &[Symbol], period: &[Symbol], n: usize) -> Symbol {
    if n < prefix.len() {
        prefix[n]
    } else {
        period[(n - prefix.len()) % period.len()]
    }
}

fn horizon(f: &EpFn, g: &EpFn) -> usize {
    2 * (f.prefix().len() + g.prefix().len()) + 2 * f.period().len() * g.period().len() + 4
}

fn subset_from_bits(m: &SigmaStructure, bits: &[bool]) -> Subset {
    let mut x = Subset::default();
    let points = (0..m.a_len())
        .map(Point::a)
        .chain((0..m.i.len()).map(Point::i))
        .chain((0..m.j_len()).map(Point::j));
    for (p, &b) in points.zip(bits.iter().cycle()) {
        if b {
            x.insert(p);
        }
    }
    x
}

fn union(x: &Subset, y: &Subset) -> Subset {
    let u = |a: &BTreeSet<usize>, b: &BTreeSet<usize>| a.union(b).copied().collect();
    Subset {
        a: u(&x.a, &y.a),
        i: u(&x.i, &y.i),
        j: u(&x.j, &y.j),
    }
}

fn expanded_level(sc: usize, side: u8, d: usize) -> SigmaStructure {
    let all = small_scenarios();
    let side = Side::from_number(side).unwrap();
    build_level(side, d, &all[sc].family, true)
        .unwrap()
        .into_structure()
}

fn pick_point(m: &SigmaStructure, k: usize) -> Point {
    let total = m.total_len();
    let k = k % total;
    if k < m.a_len() {
        Point::a(k)
    } else if k < m.a_len() + m.i.len() {
        Point::i(k - m.a_len())
    } else {
        Point::j(k - m.a_len() - m.i.len())
    }
}

proptest! {
    #[test]
    fn canonical_form_denotes_the_same_sequence((prefix, period) in epfn(3)) {
        let f = EpFn::new(prefix.clone(), period.clone()).unwrap();
        for n in 0..3 * (prefix.len() + period.len()) + 8 {
            prop_assert_eq!(f.eval(n), naive(&prefix, &period, n));
        }
    }

    #[test]
    fn canonical_form_is_unique((prefix, period) in epfn(3)) {
        let f = EpFn::new(prefix.clone(), period.clone()).unwrap();
        let again = EpFn::new(f.prefix().to_vec(), f.period().to_vec()).unwrap();
        prop_assert_eq!(&again, &f);
        let unrolled = [prefix.clone(), period.clone()].concat();
        prop_assert_eq!(&EpFn::new(unrolled, period.clone()).unwrap(), &f);
        let doubled = [period.clone(), period.clone()].concat();
        prop_assert_eq!(&EpFn::new(prefix, doubled).unwrap(), &f);
        // primitive period, prefix that cannot be rolled into it
        let q = f.period();
        for k in (1..q.len()).filter(|&k| q.len().is_multiple_of(k)) {
            prop_assert!((0..q.len()).any(|n| q[n] != q[n % k]));
        }
        if let Some(last) = f.prefix().last() {
            prop_assert_ne!(*last, *q.last().unwrap());
        }
    }

    #[test]
    fn comparison_witness_factors((p1, q1) in epfn(3), (p2, q2) in epfn(3)) {
        let f = EpFn::new(p1, q1).unwrap();
        let g = EpFn::new(p2, q2).unwrap();
        let (ff, gf) = (Func::Periodic(f.clone()), Func::Periodic(g.clone()));
        prop_assert!(compare(&ff, &ff).is_some());
        match compare(&ff, &gf) {
            Some(e) => {
                for n in 0..horizon(&f, &g) {
                    prop_assert_eq!(e.apply(g.eval(n)), Some(f.eval(n)));
                }
            }
            None => {
                // some value of g is sent to two values of f
                let clash = (0..horizon(&f, &g)).any(|n| {
                    (0..horizon(&f, &g)).any(|m| g.eval(n) == g.eval(m) && f.eval(n) != f.eval(m))
                });
                prop_assert!(clash);
            }
        }
    }

    #[test]
    fn comparison_is_transitive((p1, q1) in epfn(2), (p2, q2) in epfn(2), (p3, q3) in epfn(2)) {
        let f: Vec<Func> = [(p1, q1), (p2, q2), (p3, q3)]
            .into_iter()
            .map(|(p, q)| Func::Periodic(EpFn::new(p, q).unwrap()))
            .collect();
        if compare(&f[0], &f[1]).is_some() && compare(&f[1], &f[2]).is_some() {
            prop_assert!(compare(&f[0], &f[2]).is_some());
        }
    }

    #[test]
    fn preimages_respect_boolean_operations((p, q) in epfn(3), x in 0u64..8, y in 0u64..8) {
        let f = EpFn::new(p, q).unwrap();
        let (x, y) = (SymbolSet(x), SymbolSet(y));
        let (px, py) = (preimage(&f, x), preimage(&f, y));
        prop_assert_eq!(px.intersection(&py), preimage(&f, x.intersection(y)));
        prop_assert_eq!(px.union(&py), preimage(&f, x.union(y)));
        prop_assert_eq!(px.complement(), preimage(&f, SymbolSet::full(3).difference(x)));
        for n in 0..40 {
            prop_assert_eq!(px.contains(n), x.contains(f.eval(n)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closure_is_a_closure_operator(
        sc in 0usize..4,
        side in 0u8..3,
        d in 0usize..4,
        bits in prop::collection::vec(prop::bool::weighted(0.2), 1..40),
        more in prop::collection::vec(prop::bool::weighted(0.2), 1..40),
    ) {
        let m = expanded_level(sc, side, d);
        let x = subset_from_bits(&m, &bits);
        let y = union(&x, &subset_from_bits(&m, &more));
        let cx = closure(&m, &x).unwrap();
        prop_assert!(x.is_subset(&cx.set));
        prop_assert_eq!(&closure(&m, &cx.set).unwrap().set, &cx.set);
        prop_assert!(cx.set.is_subset(&closure(&m, &y).unwrap().set));
    }

    #[test]
    fn type_equality_is_an_equivalence_on_levels(sc in 0usize..4, d in 0usize..5) {
        let fam = &small_scenarios()[sc].family;
        let p = GaloisTypeHandle::level(fam, Side::One, d).unwrap();
        let q = GaloisTypeHandle::level(fam, Side::Two, d).unwrap();
        prop_assert!(galois_type_equal(&p, &p).unwrap().is_equal());
        prop_assert!(galois_type_equal(&q, &q).unwrap().is_equal());
        let (pq, qp) = (galois_type_equal(&p, &q).unwrap(), galois_type_equal(&q, &p).unwrap());
        prop_assert_eq!(pq.is_equal(), qp.is_equal());
    }

    #[test]
    fn fiber_shift_agrees_with_generic_search(
        sc in 0usize..4,
        side in 1u8..3,
        d in 0usize..3,
        base_bits in prop::collection::vec(prop::bool::weighted(0.15), 1..40),
        k1 in 0usize..1000,
        k2 in 0usize..1000,
    ) {
        let m = expanded_level(sc, side, d);
        prop_assume!(m.total_len() > 0 && m.total_len() <= BRUTE_FORCE_LIMIT);
        let base = subset_from_bits(&m, &base_bits);
        let t1 = GaloisTypeHandle::over_set(m.clone(), &base, pick_point(&m, k1)).unwrap();
        let t2 = GaloisTypeHandle::over_set(m.clone(), &base, pick_point(&m, k2)).unwrap();
        let generic = galois_type_equal_with(&t1, &t2, SearchMethod::Generic, None).unwrap();
        let back = galois_type_equal_with(&t2, &t1, SearchMethod::Generic, None).unwrap();
        prop_assert_eq!(generic.is_equal(), back.is_equal());
        match galois_type_equal_with(&t1, &t2, SearchMethod::FiberShift, None) {
            Ok(v) => prop_assert_eq!(v.is_equal(), generic.is_equal()),
            Err(Error::Precondition(_)) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
        if let Some(w) = generic.witness() {
            // the isomorphism fixes the base
            let base = t1.base();
            for l in base.i.iter().chain(base.j.iter().flatten()) {
                prop_assert!(w.pairs.iter().any(|(x, y)| x == l && y == l), "{} moved", l);
            }
        }
    }

    #[test]
    fn amalgams_meet_their_postconditions(
        seed in any::<u64>(),
        max_sigma in 0usize..3,
        max_new_i in 0usize..3,
        r_density in 0u32..100,
    ) {
        let params = TripleParams { max_sigma, max_new_i, r_density, ..TripleParams::default() };
        let (m0, m1, m2) = random_triple(seed, &params);
        let am = amalgamate(&m0, &m1, &m2).unwrap();
        let r = verify_amalgam(&m0, &m1, &m2, &am);
        prop_assert!(r.passed(), "{:?}", r);
        prop_assert!(am.mstar.total_len() >= m1.total_len().max(m2.total_len()));
    }

    #[test]
    fn derived_filter_laws((p1, q1) in epfn(2), (p2, q2) in epfn(2), x in 0u64..4, y in 0u64..4, d in 0usize..6) {
        for sc in ["s1", "s2"] {
            let fam = scenario(sc).family;
            let w = search_sharp(&fam).unwrap();
            let filter = DerivedFilter::with_default_markers(fam.clone(), w).unwrap();
            let k = fam.alphabet().len();
            let f1 = EpFn::new(p1.clone(), q1.clone()).unwrap();
            let f2 = EpFn::new(p2.clone(), q2.clone()).unwrap();
            let a = EpSet::preimage(fam.periodic(0).unwrap(), SymbolSet(x % (1 << k)))
                .union(&EpSet::preimage(&f1, SymbolSet(1)));
            let b = EpSet::preimage(fam.periodic(fam.len() - 1).unwrap(), SymbolSet(y % (1 << k)))
                .union(&EpSet::preimage(&f2, SymbolSet(2)));
            prop_assert!(filter.contains(&EpSet::tail(d)));
            prop_assert!(!filter.contains(&EpSet::tail(d).complement()));
            if filter.contains(&a) {
                prop_assert!(filter.contains(&a.union(&b)));
                prop_assert!(!filter.contains(&a.complement()));
                if filter.contains(&b) {
                    prop_assert!(filter.contains(&a.intersection(&b)));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn coherence_matches_truncations(sc in 0usize..4, seed in any::<u64>()) {
        let fam = &small_scenarios()[sc].family;
        let (n, bad) = coherence_agreement(fam, 10, seed, 3).unwrap();
        prop_assert_eq!(n, 11);
        prop_assert!(bad.is_empty(), "{:?}", bad);
    }
}
