use std::collections::BTreeSet;

use local_pir::graph::Graph;
use local_pir::scheme::SchemeConfig;
use local_pir::sim::execute;
use local_pir::verify::{cost_audit, decode_check, privacy_check, Verdict, DEFAULT_ENUMERATION_CAP};
use local_pir::Field;
use proptest::prelude::*;

/// Random simple graph on 2..=7 vertices with at least one edge.
fn graphs() -> impl Strategy<Value = Graph> {
    (2usize..=7).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|u| (u + 1..=n).map(move |v| (u, v))).collect();
        let count = pairs.len();
        proptest::sample::subsequence(pairs, 1..=count).prop_map(move |edges| Graph::new(n, &edges).unwrap())
    })
}

fn bipartite_graphs() -> impl Strategy<Value = Graph> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(a, b)| {
        let pairs: Vec<(usize, usize)> = (1..=a).flat_map(|u| (a + 1..=a + b).map(move |v| (u, v))).collect();
        let count = pairs.len();
        proptest::sample::subsequence(pairs, 1..=count).prop_map(move |edges| Graph::new(a + b, &edges).unwrap())
    })
}

proptest! {
    #[test]
    fn degrees_sum_to_twice_the_edges(g in graphs()) {
        let total: usize = g.servers().map(|n| g.degree(n)).sum();
        prop_assert_eq!(total, 2 * g.num_messages());
        for k in g.messages() {
            let (u, v) = g.endpoints(k);
            prop_assert!(g.index_set(u).contains(&k) && g.index_set(v).contains(&k));
        }
    }

    #[test]
    fn components_reassemble(g in graphs()) {
        let comps = g.components();
        let vertices: BTreeSet<usize> = comps.iter().flat_map(|c| c.vertices.iter().copied()).collect();
        let messages: BTreeSet<usize> = comps.iter().flat_map(|c| c.messages.iter().copied()).collect();
        prop_assert_eq!(vertices.len(), g.num_servers());
        prop_assert_eq!(messages, g.messages().collect::<BTreeSet<_>>());
        let sizes: usize = comps.iter().map(|c| c.vertices.len()).sum();
        prop_assert_eq!(sizes, g.num_servers());
    }

    #[test]
    fn bipartitions_split_every_edge(g in graphs()) {
        if let Some(p) = g.bipartition() {
            prop_assert!(p.is_valid_for(&g));
            for &(u, v) in g.edges() {
                prop_assert_ne!(p.part_of(u), p.part_of(v));
            }
        }
    }

    #[test]
    fn json_round_trip(g in graphs()) {
        prop_assert_eq!(Graph::from_json(&g.to_json()).unwrap(), g);
    }

    #[test]
    fn single_sums_are_private_and_decodable_on_any_connected_graph(g in graphs()) {
        prop_assume!(g.components().iter().filter(|c| c.graph.num_messages() > 0).count() == 1);
        let fam = SchemeConfig::edge_transitive(1).family(&g).unwrap();
        for n in g.servers() {
            let r = privacy_check(&fam, &g, n, DEFAULT_ENUMERATION_CAP).unwrap();
            prop_assert_eq!(r.verdict, Verdict::Pass);
        }
        prop_assert!(decode_check(&fam, &g, 3, &[0, 1, 2]).unwrap().verdict.passed());
        prop_assert!(cost_audit(&fam, &g).unwrap().mismatches().is_empty());
    }

    #[test]
    fn bipartite_plans_round_trip(g in bipartite_graphs(), seed in any::<u64>()) {
        let fam = SchemeConfig::bipartite().family(&g).unwrap();
        let field = Field::new(5).unwrap();
        for theta in g.messages() {
            prop_assert!(execute(&fam, &g, theta, seed, field).unwrap().decoded_ok);
        }
        prop_assert!(cost_audit(&fam, &g).unwrap().mismatches().is_empty());
    }
}
