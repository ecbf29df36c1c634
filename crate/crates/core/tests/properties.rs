use num_rational::Rational64;
use proptest::prelude::*;

use rgc_core::canonical::{automorphisms, canonical_form, orientation_sign, to_oriented_class, Orientation, Parity};
use rgc_core::differential::{bridgeland, bridgeland_graph, delta, delta_graph, FormalSum, SplitConvention};
use rgc_core::gc::{classify as gc_classify, gc_delta, SimpleGraph};
use rgc_core::ribbon::{Half, RibbonGraph};

fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

fn perm(n: usize) -> impl Strategy<Value = Vec<Half>> {
    Just((0..n as Half).collect::<Vec<_>>()).prop_shuffle()
}

/// A connected ribbon graph with a random rotation system on `1..=max_e`
/// edges, together with a random relabelling of its half-edges.
fn graph_and_relabel(max_e: usize) -> impl Strategy<Value = (RibbonGraph, Vec<Half>)> {
    (1..=max_e)
        .prop_flat_map(|e| (perm(2 * e), perm(2 * e)))
        .prop_map(|(s0, map)| {
            let n = s0.len();
            let s0: Vec<usize> = s0.into_iter().map(|h| h as usize).collect();
            let s1: Vec<usize> = (0..n).map(|h| h ^ 1).collect();
            (RibbonGraph::new(s0, s1).unwrap(), map)
        })
        .prop_filter("connected", |(g, _)| g.is_connected())
}

fn compose(a: &[Half], b: &[Half]) -> Vec<Half> {
    b.iter().map(|&h| a[h as usize]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn genus_is_integral((g, _) in graph_and_relabel(6)) {
        let defect = g.num_edges() as i64 - g.num_vertices() as i64 - g.num_boundaries() as i64;
        prop_assert!(defect >= -2 && defect % 2 == 0);
        prop_assert_eq!(g.genus().unwrap() as i64, 1 + defect / 2);
    }

    #[test]
    fn canonical_form_ignores_labels((g, map) in graph_and_relabel(6)) {
        let (c, relabel) = canonical_form(&g).unwrap();
        prop_assert_eq!(&canonical_form(&g.relabel(&map)).unwrap().0, &c);
        prop_assert_eq!(&canonical_form(&c).unwrap().0, &c);
        prop_assert_eq!(&g.relabel(&relabel), &c);
    }

    #[test]
    fn orientation_sign_is_a_character((g, _) in graph_and_relabel(5), p in parity()) {
        let auts = automorphisms(&g).unwrap();
        let or = Orientation::reference(&g, p);
        let s = |a: &[Half]| orientation_sign(&g, a, &or).unwrap();
        for a in &auts {
            for b in &auts {
                prop_assert_eq!(s(&compose(a, b)), s(a) * s(b));
            }
        }
        prop_assert_eq!(s(&auts[0]), 1);
    }

    #[test]
    fn oriented_class_is_relabel_invariant((g, map) in graph_and_relabel(6), p in parity()) {
        let or = Orientation::reference(&g, p);
        let (c, s) = to_oriented_class(&g, &or).unwrap();
        let (c2, s2) = to_oriented_class(&g.relabel(&map), &or.transport(&map)).unwrap();
        prop_assert_eq!(&c, &c2);
        // a zero class has no meaningful sign
        if c.zero_flag {
            return Ok(());
        }
        prop_assert_eq!(s, s2);
        if let Some(opp) = or.opposite() {
            prop_assert_eq!(to_oriented_class(&g, &opp).unwrap().1, -s);
        }
    }

    #[test]
    fn opposite_orientations_cancel((g, _) in graph_and_relabel(6), p in parity()) {
        let or = Orientation::reference(&g, p);
        if let Some(opp) = or.opposite() {
            let mut sum = FormalSum::zero(p);
            sum.add_graph(&g, &or, Rational64::from(3)).unwrap();
            sum.add_graph(&g, &opp, Rational64::from(3)).unwrap();
            prop_assert!(sum.is_zero());
        }
    }

    #[test]
    fn formal_sum_laws(
        (a, _) in graph_and_relabel(4),
        (b, _) in graph_and_relabel(4),
        p in parity(),
        x in -5i64..5,
        y in -5i64..5,
    ) {
        let (x, y) = (Rational64::from(x), Rational64::from(y));
        let mut s = FormalSum::zero(p);
        s.add_graph(&a, &Orientation::reference(&a, p), x).unwrap();
        let mut t = FormalSum::zero(p);
        t.add_graph(&b, &Orientation::reference(&b, p), y).unwrap();
        let mut st = s.clone();
        st.add_assign(&t);
        let mut ts = t.clone();
        ts.add_assign(&s);
        prop_assert_eq!(&st, &ts);
        let mut back = st.clone();
        back.add_assign(&t.scaled(Rational64::from(-1)));
        prop_assert_eq!(&back, &s);
        prop_assert!(s.scaled(Rational64::from(0)).is_zero());
    }

    #[test]
    fn differentials_commute_with_relabelling((g, _) in graph_and_relabel(4), p in parity()) {
        let conv = SplitConvention::default();
        let (c, s) = to_oriented_class(&g, &Orientation::reference(&g, p)).unwrap();
        let k = Rational64::from(s as i64);
        if c.zero_flag {
            prop_assert!(delta(&c, conv).is_zero());
            prop_assert!(bridgeland(&c).is_zero());
        } else {
            prop_assert_eq!(delta_graph(&g, p, conv).scaled(k), delta(&c, conv));
            prop_assert_eq!(bridgeland_graph(&g, p).scaled(k), bridgeland(&c));
        }
    }
}

fn simple_graph() -> impl Strategy<Value = (SimpleGraph, Vec<usize>)> {
    (3usize..=6)
        .prop_flat_map(|v| {
            let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
            let n = pairs.len();
            (
                Just(v),
                proptest::sample::subsequence(pairs, 2..=n.min(9)).prop_shuffle(),
                Just((0..v).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(v, edges, map)| (SimpleGraph::new(v, &edges).unwrap(), map))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gc_class_ignores_vertex_names((g, map) in simple_graph()) {
        let edges: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b)| (map[a as usize], map[b as usize])).collect();
        let h = SimpleGraph::new(g.vertices, &edges).unwrap();
        prop_assert_eq!(gc_classify(&g), gc_classify(&h));
    }

    #[test]
    fn gc_edge_swap_flips_sign((g, _) in simple_graph()) {
        let mut h = g.clone();
        h.edges.swap(0, 1);
        match (gc_classify(&g), gc_classify(&h)) {
            (Some((c, s)), Some((c2, s2))) => {
                prop_assert_eq!(c, c2);
                prop_assert_eq!(s, -s2);
            }
            (None, None) => {}
            other => prop_assert!(false, "{other:?}"),
        }
    }

    #[test]
    fn gc_delta_squares_to_zero((g, _) in simple_graph()) {
        prop_assume!(g.is_connected());
        let Some((c, _)) = gc_classify(&g) else { return Ok(()) };
        let mut total = std::collections::BTreeMap::new();
        for (t, k) in gc_delta(&c) {
            for (u, l) in gc_delta(&t) {
                *total.entry(u).or_insert(0i64) += k * l;
            }
        }
        prop_assert!(total.values().all(|&x| x == 0), "{total:?}");
    }
}
