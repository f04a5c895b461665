mod common;

use herd_core::herd::{herding_cover, is_herdable, TieBreak};
use herd_core::Graph;
use proptest::prelude::*;

fn arb_digraph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..=2 * n)
            .prop_map(move |edges| Graph::from_edges(n, edges, true).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cover_is_sound_and_minimal(g in arb_digraph(10)) {
        let cover = herding_cover(&g, TieBreak::SmallestId);
        let reach = common::transitive_closure(&g);
        prop_assert!(common::covers_all(&reach, &cover.herding_nodes));
        prop_assert!(is_herdable(&g, &cover.herding_nodes).unwrap().herdable);
        prop_assert!(!common::some_subset_covers(&reach, cover.herding_count - 1));
        prop_assert_eq!(cover.herding_count, cover.root_count);
    }

    #[test]
    fn cover_ignores_weights_and_tie_break(g in arb_digraph(12), scale in 0.01f64..100.0) {
        let reweighted = Graph::from_edges(
            g.node_count(),
            g.arcs().iter().map(|a| (a.source, a.target, a.weight * scale)).collect::<Vec<_>>(),
            true,
        ).unwrap();
        let base = herding_cover(&g, TieBreak::SmallestId);
        prop_assert_eq!(herding_cover(&reweighted, TieBreak::SmallestId).herding_nodes, base.herding_nodes.clone());
        for tie in [TieBreak::MaxOutDegree, TieBreak::MaxTotalDegree] {
            let other = herding_cover(&g, tie);
            prop_assert_eq!(other.herding_count, base.herding_count);
            prop_assert!(is_herdable(&g, &other.herding_nodes).unwrap().herdable);
        }
    }

    #[test]
    fn undirected_cover_counts_components(n in 1usize..30, edges in prop::collection::vec((0usize..30, 0usize..30), 0..40)) {
        let edges: Vec<_> = edges.into_iter().filter(|&(u, v)| u < n && v < n).map(|(u, v)| (u, v, 1.0)).collect();
        let g = Graph::from_edges(n, edges, false).unwrap();
        let cover = herding_cover(&g, TieBreak::SmallestId);
        prop_assert_eq!(cover.herding_count, g.weakly_connected_components().len());
        prop_assert_eq!(cover.herding_count, cover.weak_count);
    }

    #[test]
    fn check_reports_unreached(g in arb_digraph(10), pick in prop::collection::vec(0usize..10, 1..4)) {
        let inputs: Vec<usize> = pick.into_iter().map(|u| u % g.node_count()).collect();
        let reach = common::transitive_closure(&g);
        let check = is_herdable(&g, &inputs).unwrap();
        let expect: Vec<usize> = (0..g.node_count()).filter(|&v| !inputs.iter().any(|&u| reach[u][v])).collect();
        prop_assert_eq!(check.herdable, expect.is_empty());
        let mut got = check.unreached.clone();
        got.sort();
        prop_assert_eq!(got, expect);
    }
}

#[test]
fn large_random_covers_are_sound() {
    for seed in 0..50u64 {
        let n = common::size_for(seed, 50, 200);
        let g = common::random_digraph(n, 1.2 / n as f64, seed);
        let cover = herding_cover(&g, TieBreak::MaxOutDegree);
        assert!(is_herdable(&g, &cover.herding_nodes).unwrap().herdable, "seed {seed}");
    }
}

#[test]
fn empty_input_set_is_rejected() {
    let g = common::cycle(3, true);
    assert!(is_herdable(&g, &[]).is_err());
    assert!(is_herdable(&g, &[7]).is_err());
}
