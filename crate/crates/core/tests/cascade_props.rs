use mcd_core::cascade::{estimate_spread, exact_spread, CascadeConfig};
use mcd_core::graph::Graph;
use proptest::prelude::*;

fn arb_small() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    (2usize..8).prop_flat_map(|n| {
        let pairs = prop::collection::vec((0..n, 0..n), 1..12);
        let seeds = prop::collection::btree_set(0..n, 1..=n.min(3));
        (Just(n), pairs, seeds).prop_map(|(n, pairs, seeds)| {
            let g = Graph::from_edges(n, pairs).unwrap();
            (g, seeds.into_iter().collect())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_spread_bounds((g, seeds) in arb_small(), p in 0.0f64..=1.0) {
        let s = exact_spread(&g, &seeds, p).unwrap();
        prop_assert!(s >= seeds.len() as f64 - 1e-12);
        prop_assert!(s <= g.node_count() as f64 + 1e-12);
    }

    #[test]
    fn monotone_in_probability((g, seeds) in arb_small(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(exact_spread(&g, &seeds, lo).unwrap() <= exact_spread(&g, &seeds, hi).unwrap() + 1e-12);
    }

    #[test]
    fn monotone_in_seed_set((g, seeds) in arb_small(), extra in 0usize..8, p in 0.0f64..=1.0) {
        let extra = extra % g.node_count();
        let mut more = seeds.clone();
        if !more.contains(&extra) {
            more.push(extra);
        }
        prop_assert!(exact_spread(&g, &seeds, p).unwrap() <= exact_spread(&g, &more, p).unwrap() + 1e-12);
    }

    #[test]
    fn monte_carlo_agrees((g, seeds) in arb_small(), p in 0.05f64..0.95, seed in any::<u64>()) {
        let cfg = CascadeConfig { activation_probability: p, runs: 4000, rng_seed: seed };
        let est = estimate_spread(&g, &seeds, &cfg).unwrap();
        let exact = exact_spread(&g, &seeds, p).unwrap();
        // 5 SE plus a floor for near-deterministic cases
        prop_assert!((est.mean_infected - exact).abs() <= 5.0 * est.std_error + 0.02,
            "est {} exact {} se {}", est.mean_infected, exact, est.std_error);
    }
}

#[test]
fn components_bound_spread() {
    // two components; a seed in one never reaches the other
    let g = Graph::from_edges(6, [(0, 1), (1, 2), (3, 4), (4, 5)]).unwrap();
    let cfg = CascadeConfig { activation_probability: 1.0, runs: 10, rng_seed: 1 };
    let out = estimate_spread(&g, &[1], &cfg).unwrap();
    assert_eq!(out.per_run_infected_count, vec![3; 10]);
    assert_eq!(exact_spread(&g, &[1], 1.0).unwrap(), 3.0);
}

#[test]
fn same_seed_same_counts() {
    let g = mcd_core::graph::generate_ba(300, 3, 11).unwrap();
    let cfg = CascadeConfig { activation_probability: 0.1, runs: 200, rng_seed: 42 };
    let a = estimate_spread(&g, &[0, 5, 9], &cfg).unwrap();
    let b = estimate_spread(&g, &[0, 5, 9], &cfg).unwrap();
    assert_eq!(a, b);
    let c = estimate_spread(&g, &[0, 5, 9], &CascadeConfig { rng_seed: 43, ..cfg }).unwrap();
    assert_ne!(a.per_run_infected_count, c.per_run_infected_count);
}
