use hyperham::hypergraph::{binomial, for_each_combination};
use hyperham::random::{extremal_h0_with_part, gnp, RandomSpec};
use hyperham::shave::{classify_vertices, shave, ShaveOrder, Shaver};
use hyperham::Hypergraph;
use proptest::prelude::*;

/// Repeated full scans: delete the star of any l-set with degree in
/// `1..theta` until none is left.
fn naive_shave(h: &Hypergraph, ell: usize, theta: usize) -> Hypergraph {
    let mut edges: Vec<Vec<usize>> = h.edges().map(|e| e.to_vec()).collect();
    loop {
        let mut low = None;
        for_each_combination(h.n(), ell, |s| {
            if low.is_none() {
                let d = edges.iter().filter(|e| s.iter().all(|v| e.contains(v))).count();
                if d > 0 && d < theta {
                    low = Some(s.to_vec());
                }
            }
        });
        match low {
            Some(s) => edges.retain(|e| !s.iter().all(|v| e.contains(v))),
            None => return Hypergraph::new(h.k(), h.n(), edges).unwrap(),
        }
    }
}

fn all_sets_settled(h: &Hypergraph, ell: usize, theta: usize) -> bool {
    let mut ok = true;
    for_each_combination(h.n(), ell, |s| {
        let d = h.degree(s).unwrap();
        ok &= d == 0 || d >= theta;
    });
    ok
}

#[test]
fn h0_pairs_are_already_dense() {
    let h = extremal_h0_with_part(10, 3, 2).unwrap();
    let mut degrees = std::collections::BTreeSet::new();
    for_each_combination(10, 2, |s| {
        degrees.insert(h.edges().filter(|e| e.contains(&s[0]) && e.contains(&s[1])).count());
    });
    assert_eq!(degrees.into_iter().collect::<Vec<_>>(), vec![2, 8]);
    assert_eq!(shave(&h, 2, 2).unwrap().edges_removed(), 0);
}

#[test]
fn classification_examples() {
    let (low, high) = classify_vertices(&Hypergraph::empty(3, 7).unwrap(), 1);
    assert_eq!((low.len(), high.len()), (7, 0));
    let c = Hypergraph::complete(3, 7).unwrap();
    let (low, high) = classify_vertices(&c, binomial(6, 2) as usize);
    assert_eq!((low.len(), high.len()), (0, 7));
    let single = shave(&Hypergraph::new(3, 5, [[0, 1, 2]]).unwrap(), 2, 2).unwrap();
    assert_eq!(classify_vertices(&single.shaved, 1).0.len(), 5);
}

#[test]
fn ell_equal_to_k_is_rejected() {
    assert!(shave(&Hypergraph::complete(3, 5).unwrap(), 3, 1).is_err());
    assert!(shave(&Hypergraph::complete(3, 5).unwrap(), 0, 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shaved_graph_is_settled(seed in any::<u64>(), n in 5usize..14, k in 3usize..5, p in 0.05f64..0.7, theta in 1usize..6) {
        prop_assume!(n > k);
        let h = gnp(&RandomSpec { n, k, p, seed }).unwrap();
        for ell in 1..k {
            let r = shave(&h, ell, theta).unwrap();
            prop_assert!(r.shaved.edges().all(|e| h.contains_edge(e)));
            prop_assert!(all_sets_settled(&r.shaved, ell, theta));
            let lost = h.edge_count() - r.shaved.edge_count();
            prop_assert!(lost as u128 <= binomial(n as u64, ell as u64) * theta as u128);
            for s in &r.zeroed_sets {
                prop_assert_eq!(r.shaved.degree(s).unwrap(), 0);
            }
        }
    }

    #[test]
    fn low_vertices_pay_for_lost_edges(seed in any::<u64>(), n in 6usize..14, p in 0.2f64..0.8, theta in 1usize..8, bound in 1usize..30) {
        let h = gnp(&RandomSpec { n, k: 3, p, seed }).unwrap();
        let r = Shaver::new(2, theta).vertex_bound(bound).run(&h).unwrap();
        let (low, _) = classify_vertices(&r.shaved, bound);
        prop_assert_eq!(&r.low_vertices, &low);
        // each low vertex lost at least deg_H(v) - bound edges
        let excess: usize = low.iter().map(|&v| h.vertex_degree(v).saturating_sub(bound)).sum();
        prop_assert!(excess <= 3 * r.edges_removed());
    }

    #[test]
    fn idempotent_and_monotone(seed in any::<u64>(), n in 5usize..13, p in 0.1f64..0.6, t1 in 1usize..5, dt in 0usize..4) {
        let h = gnp(&RandomSpec { n, k: 3, p, seed }).unwrap();
        let a = shave(&h, 2, t1).unwrap();
        prop_assert_eq!(shave(&a.shaved, 2, t1).unwrap().edges_removed(), 0);
        let b = shave(&h, 2, t1 + dt).unwrap();
        prop_assert!(b.shaved.edges().all(|e| a.shaved.contains_edge(e)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn order_confluence(seed in any::<u64>(), n in 5usize..=15, k in 3usize..5, p in 0.02f64..0.3, theta in 1usize..5, order_seed in any::<u64>()) {
        prop_assume!(n > k);
        let h = gnp(&RandomSpec { n, k, p, seed }).unwrap();
        for ell in 1..k {
            let base = Shaver::new(ell, theta).run(&h).unwrap().shaved;
            for order in [ShaveOrder::Lifo, ShaveOrder::Random(order_seed)] {
                prop_assert_eq!(&Shaver::new(ell, theta).order(order).run(&h).unwrap().shaved, &base);
            }
            if n <= 9 {
                prop_assert_eq!(&naive_shave(&h, ell, theta), &base);
            }
        }
    }
}

#[test]
fn cascade_matches_naive_reference() {
    // a tight path: shaving its end pairs at theta = 2 unravels it entirely
    let path: Vec<Vec<usize>> = (0..6).map(|i| vec![i, i + 1, i + 2]).collect();
    let h = Hypergraph::new(3, 8, &path).unwrap();
    let r = shave(&h, 2, 2).unwrap();
    assert_eq!(r.shaved, naive_shave(&h, 2, 2));
    assert_eq!(r.shaved.edge_count(), 0);
}
