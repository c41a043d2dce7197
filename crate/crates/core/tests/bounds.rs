use hyperham::bounds::{
    chernoff_tails, delta_bound, janson_lower_tail, phi, sharpness_path_edges, sharpness_threshold, BoundReport,
};
use hyperham::{Error, PathPattern};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use proptest::prelude::*;

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Minimum of `n^|S| p^{e(S)}` over vertex subsets `S` of the pattern that
/// contain at least one edge; `e(S)` counts pattern edges inside `S`.
fn brute_phi(pat: &PathPattern, n: usize, p: f64) -> f64 {
    let b = pat.vertex_count();
    let masks: Vec<u32> = pat.edge_ranges().map(|r| r.fold(0u32, |m, i| m | 1 << i)).collect();
    let mut best = f64::INFINITY;
    for s in 1u32..1 << b {
        let e = masks.iter().filter(|&&m| m & s == m).count();
        if e > 0 {
            best = best.min((n as f64).powi(s.count_ones() as i32) * p.powi(e as i32));
        }
    }
    best
}

#[test]
fn phi_equals_subgraph_minimum() {
    let mut checked = 0;
    for k in 2..=5 {
        for ell in 1..k {
            for a in 1..=4 {
                for x in 0..=2 {
                    let pat = PathPattern::new(k, ell, a, x).unwrap();
                    for n in [10, 100] {
                        for p in [0.5, 0.01] {
                            let got = phi(&pat, n, p).unwrap();
                            let want = brute_phi(&pat, n, p);
                            assert!(rel_err(got, want) < 1e-9, "{pat:?} n={n} p={p}: {got} vs {want}");
                            checked += 1;
                        }
                    }
                }
            }
        }
    }
    assert_eq!(checked, 10 * 4 * 3 * 4);
}

#[test]
fn phi_examples() {
    let p2 = PathPattern::path(3, 2, 2).unwrap();
    assert!(rel_err(phi(&p2, 100, 0.01).unwrap(), 1e4) < 1e-12);
    let single = PathPattern::new(4, 1, 1, 2).unwrap();
    assert!(rel_err(phi(&single, 30, 0.2).unwrap(), 30f64.powi(4) * 0.2) < 1e-12);
    assert!(phi(&p2, 100, 0.0).is_err());
}

#[test]
fn delta_examples() {
    assert!(rel_err(delta_bound(3, 1, 10, 1.0, 1000.0).unwrap(), 48_000.0) < 1e-12);
    let (s, n) = (4, 7.0f64);
    assert!(rel_err(delta_bound(s, 2, 7, 1.0, n.powi(s as i32)).unwrap(), 16.0 * 24.0 * n.powi(s as i32)) < 1e-12);
    let a = delta_bound(5, 3, 40, 0.1, 3.0).unwrap();
    let b = delta_bound(5, 3, 40, 0.1, 6.0).unwrap();
    assert!(rel_err(b, a / 2.0) < 1e-12);
}

#[test]
fn tail_examples() {
    assert_eq!(janson_lower_tail(5.0, 0.0, 2.0).unwrap(), 1.0);
    assert!(rel_err(janson_lower_tail(9.0, 4.0, 8.0).unwrap(), (-1f64).exp()) < 1e-12);
    assert!(rel_err(janson_lower_tail(100.0, 50.0, 125.0).unwrap(), (-10f64).exp()) < 1e-12);
    assert!(janson_lower_tail(1.0, 2.0, 1.0).is_err());

    let (up, low) = chernoff_tails(100, 0.5, 10.0).unwrap();
    assert!(rel_err(up, (-100.0 / (100.0 + 10.0 / 3.0f64)).exp()) < 1e-12);
    assert!(rel_err(low, (-100.0 / 100.0f64).exp()) < 1e-12);
    let (up, low) = chernoff_tails(100, 0.5, 1e-9).unwrap();
    assert!(up > 1.0 - 1e-12 && low > 1.0 - 1e-12);
}

#[test]
fn sharpness_examples() {
    assert!(rel_err(sharpness_threshold(3, 1, 0.2, 100).unwrap(), 1e-4 / 6.0) < 1e-12);
    assert_eq!(sharpness_path_edges(3, 2, 0.1).unwrap(), 7);
    let want = 0.5f64.powf(1.0 / 7.0) * 100f64.powf(-1.0 - 2.0 / 7.0);
    assert!(rel_err(sharpness_threshold(3, 2, 0.1, 100).unwrap(), want) < 1e-12);
    assert!(matches!(sharpness_threshold(3, 2, 0.5, 100), Err(Error::InapplicableRegime(_))));
}

#[test]
fn report_is_clamped_and_nonnegative() {
    let r = BoundReport::new(&PathPattern::new(3, 2, 3, 1).unwrap(), 40, 0.05, 0.1, 2.0, 0.1).unwrap();
    for v in [r.phi, r.lambda, r.delta_bound, r.janson_tail, r.chebyshev_tail, r.thinning_q, r.chernoff_tails.0, r.chernoff_tails.1] {
        assert!(v >= 0.0 && v.is_finite());
    }
    assert!(r.janson_tail <= 1.0 && r.chebyshev_tail <= 1.0);
    assert_eq!(r.vertices, 7);
    assert_eq!(r.max_edges[r.vertices], 3);
}

fn exact_delta(s: usize, f: usize, n: usize, pn: u64, pd: u64, phi: u64) -> f64 {
    let big = |v: u64| BigInt::from(v);
    let fact: BigInt = (1..=s as u64).map(big).fold(BigInt::one(), |a, b| a * b);
    let num = BigInt::from(2).pow(s as u32) * fact * big(n as u64).pow(2 * s as u32) * big(pn).pow(2 * f as u32);
    let den = big(pd).pow(2 * f as u32) * big(phi);
    BigRational::new(num, den).to_f64().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn delta_matches_exact_arithmetic(s in 1usize..10, f in 0usize..8, n in 2usize..200, pd in 2u64..1000, pn_frac in 0.0f64..1.0, phi in 1u64..1_000_000) {
        let pn = ((pn_frac * pd as f64) as u64).clamp(1, pd);
        let got = delta_bound(s, f, n, pn as f64 / pd as f64, phi as f64).unwrap();
        let want = exact_delta(s, f, n, pn, pd, phi);
        prop_assert!(rel_err(got, want) < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn phi_respects_the_path_lower_bound(k in 3usize..6, ell_off in 0usize..4, a in 1usize..6, x in 0usize..3, n in 5usize..500, p in 0.0001f64..1.0) {
        let ell = 1 + ell_off % (k - 1);
        let pat = PathPattern::new(k, ell, a, x).unwrap();
        let (nf, m) = (n as f64, (k - ell) as i32);
        let lower = (1..=a).map(|e| nf.powi(ell as i32) * (nf.powi(m) * p).powi(e as i32)).fold(f64::INFINITY, f64::min);
        prop_assert!(phi(&pat, n, p).unwrap() >= lower * (1.0 - 1e-12));
    }
}
