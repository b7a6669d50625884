use mcd_core::community::Partition;
use mcd_core::diversity::{
    community_diversity_with_base, diversity_scores, extended_community_diversity,
    modified_community_diversity_with_base, select_top_k,
};
use mcd_core::graph::Graph;
use proptest::prelude::*;

/// Straight from the definitions: loop over every community, not just the
/// ones present among the neighbors.
fn oracle(g: &Graph, assign: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let communities = assign.iter().max().map_or(0, |m| m + 1);
    let n = g.node_count();
    let mut cd = vec![0.0; n];
    for v in 0..n {
        let d = g.degree(v) as f64;
        if d == 0.0 {
            continue;
        }
        for c in 0..communities {
            let k = g.neighbors(v).iter().filter(|&&u| assign[u] == c).count() as f64;
            if k > 0.0 {
                let p = k / d;
                cd[v] -= p * p.ln();
            }
        }
    }
    let ecd: Vec<f64> = (0..n)
        .map(|v| cd[v] + g.neighbors(v).iter().map(|&u| cd[u]).sum::<f64>())
        .collect();
    let mcd = (0..n)
        .map(|v| {
            if ecd[v] == 0.0 {
                return 0.0;
            }
            let p = cd[v] / ecd[v];
            if p == 0.0 {
                0.0
            } else {
                -p * p.ln()
            }
        })
        .collect();
    (cd, ecd, mcd)
}

fn arb_instance() -> impl Strategy<Value = (Graph, Vec<usize>)> {
    (1usize..30).prop_flat_map(|n| {
        let pairs = prop::collection::vec((0..n, 0..n), 0..(n * 3));
        let assign = prop::collection::vec(0..n.min(6), n);
        (Just(n), pairs, assign).prop_map(|(n, pairs, assign)| {
            (Graph::from_edges(n, pairs).unwrap(), assign)
        })
    })
}

fn compact(assign: &[usize]) -> Vec<usize> {
    Partition::from_assignment(assign).assignment().to_vec()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn matches_oracle((g, raw) in arb_instance()) {
        let p = Partition::from_assignment(&raw);
        let s = diversity_scores(&g, &p).unwrap();
        let (cd, ecd, mcd) = oracle(&g, &compact(&raw));
        for v in g.nodes() {
            prop_assert!((s.cd.score(v) - cd[v]).abs() <= 1e-12);
            prop_assert!((s.ecd.score(v) - ecd[v]).abs() <= 1e-12);
            prop_assert!((s.mcd.score(v) - mcd[v]).abs() <= 1e-12);
        }
    }

    #[test]
    fn score_bounds((g, raw) in arb_instance()) {
        let p = Partition::from_assignment(&raw);
        let s = diversity_scores(&g, &p).unwrap();
        for v in g.nodes() {
            let cd = s.cd.score(v);
            let cap = (g.degree(v).min(p.community_count()).max(1) as f64).ln();
            prop_assert!(cd >= 0.0 && cd <= cap + 1e-12);
            prop_assert!(s.ecd.score(v) >= cd);
            let m = s.mcd.score(v);
            prop_assert!(m >= 0.0 && m <= (-1.0f64).exp() + 1e-15);
        }
    }

    #[test]
    fn log_base_rescales((g, raw) in arb_instance()) {
        let p = Partition::from_assignment(&raw);
        let e = diversity_scores(&g, &p).unwrap();
        let cd2 = community_diversity_with_base(&g, &p, 2.0).unwrap();
        let ecd2 = extended_community_diversity(&g, &cd2).unwrap();
        let mcd2 = modified_community_diversity_with_base(&cd2, &ecd2, 2.0).unwrap();
        let ln2 = 2f64.ln();
        for v in g.nodes() {
            prop_assert!((cd2.score(v) * ln2 - e.cd.score(v)).abs() <= 1e-12);
            prop_assert!((mcd2.score(v) * ln2 - e.mcd.score(v)).abs() <= 1e-12);
        }
        // same rank sequence, up to nodes whose scores tie within rounding
        for (base2, base_e) in [(&cd2, &e.cd), (&mcd2, &e.mcd)] {
            for (a, b) in base2.ranking().into_iter().zip(base_e.ranking()) {
                prop_assert!((base_e.score(a) - base_e.score(b)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn permutation_equivariant((g, raw) in arb_instance(), shuffle in any::<u64>()) {
        let n = g.node_count();
        let mut perm: Vec<usize> = (0..n).collect();
        // deterministic Fisher–Yates from the drawn word
        let mut state = shuffle | 1;
        for i in (1..n).rev() {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            perm.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let h = g.relabel(&perm).unwrap();
        let mut moved = vec![0; n];
        for v in 0..n {
            moved[perm[v]] = raw[v];
        }
        let a = diversity_scores(&g, &Partition::from_assignment(&raw)).unwrap();
        let b = diversity_scores(&h, &Partition::from_assignment(&moved)).unwrap();
        for v in 0..n {
            prop_assert!((a.mcd.score(v) - b.mcd.score(perm[v])).abs() <= 1e-12);
            prop_assert!((a.ecd.score(v) - b.ecd.score(perm[v])).abs() <= 1e-12);
        }
    }

    #[test]
    fn top_k_is_sorted_prefix((g, raw) in arb_instance(), f in 0.01f64..=1.0) {
        let s = diversity_scores(&g, &Partition::from_assignment(&raw)).unwrap();
        let seeds = select_top_k(&s.mcd, f).unwrap();
        let chosen = seeds.nodes();
        prop_assert!(!chosen.is_empty());
        for w in chosen.windows(2) {
            let (a, b) = (s.mcd.score(w[0]), s.mcd.score(w[1]));
            prop_assert!(a > b || (a == b && w[0] < w[1]));
        }
        let worst = s.mcd.score(*chosen.last().unwrap());
        for v in g.nodes().filter(|v| !chosen.contains(v)) {
            prop_assert!(s.mcd.score(v) <= worst);
        }
    }
}

#[test]
fn six_node_fixture() {
    let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5)]).unwrap();
    let p = Partition::from_assignment(&[0, 1, 0, 1, 0, 1]);
    let s = diversity_scores(&g, &p).unwrap();
    // x sees {y, b} in one community and {a} in the other: H(1/3, 2/3)
    let cd = -(1.0f64 / 3.0) * (1.0f64 / 3.0).ln() - (2.0f64 / 3.0) * (2.0f64 / 3.0).ln();
    assert!((s.cd.score(0) - cd).abs() < 1e-12);
    assert!((s.cd.score(0) - 0.636514).abs() < 1e-6);
    assert!((s.ecd.score(0) - 1.273028).abs() < 1e-6);
    assert!((s.mcd.score(0) - 0.5 * 2f64.ln()).abs() < 1e-12);
    assert_eq!(s.mcd.score(2), 0.0);
}
