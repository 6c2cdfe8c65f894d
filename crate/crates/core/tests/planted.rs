mod common;

use spreadgraph::attack::{base_case_pipeline, densify, find_dense_subset, AttackConfig, DensifyMode};
use spreadgraph::exact::ratio;
use spreadgraph::{EdgeKind, Hypergraph, Vertex, VertexSet};

fn half() -> spreadgraph::Rational {
    ratio(1, 2)
}

#[test]
fn heavy_pairs_meet_the_target_through_the_top_pairs() {
    // n = 6, beta = 1/2: floor(2^{beta n - 1}) = 4 pairs, multiplicity 2^{D+3}
    for d in 0..3 {
        let mult = 1usize << (d + 3);
        let rows: Vec<[Vertex; 2]> = (0..4).flat_map(|i| std::iter::repeat_n([2 * i, 2 * i + 1], mult)).collect();
        let g = Hypergraph::new(64, 2, EdgeKind::DistinctSet, rows).unwrap();
        let r = find_dense_subset(&g, &half(), d as i64, &AttackConfig::default()).unwrap();
        assert!(r.achieved);
        assert_eq!(r.e_u, 4 * mult as u64);
        assert_eq!(r.trace[0].stage, "top_pairs");
    }
}

#[test]
fn complete_bipartite_graph_reaches_the_brute_force_optimum() {
    let rows: Vec<[Vertex; 2]> = (0..8).flat_map(|x| (8..16).map(move |y| [x, y])).collect();
    let g = Hypergraph::new(16, 2, EdgeKind::DistinctSet, rows).unwrap();
    let r = base_case_pipeline(&g, &half(), 0, &AttackConfig::default()).unwrap();
    let best = g.max_dense_subset_bruteforce(4, u64::MAX).unwrap();
    assert!(r.set.len() <= 4);
    assert_eq!(best.edges, 4);
    assert_eq!(r.e_u, best.edges);
    assert!(r.achieved);
    let case1 = r.trace.iter().find(|s| s.stage == "case1").unwrap();
    // degree sums here never reach 2^{n + D + 1} = 32
    assert_eq!(case1.details["selected"], false);
}

#[test]
fn perfect_matching_defeats_the_attack() {
    let rows: Vec<[Vertex; 2]> = (0..32).map(|i| [2 * i, 2 * i + 1]).collect();
    let g = Hypergraph::new(64, 2, EdgeKind::DistinctSet, rows).unwrap();
    for d in 1..3 {
        let r = find_dense_subset(&g, &half(), d, &AttackConfig::default()).unwrap();
        assert!(!r.achieved);
        assert!(r.e_u <= 4);
    }
}

#[test]
fn densify_recovers_a_planted_clique() {
    let mut rng = common::rng(21);
    let clique = [3, 19, 33, 50];
    let mut rows = common::planted_clique(&clique, 2, 10);
    rows.extend(common::random_graph(&mut rng, 64, 2, EdgeKind::DistinctSet, 12).edges().map(<[Vertex]>::to_vec));
    let g = Hypergraph::new(64, 2, EdgeKind::DistinctSet, rows).unwrap();
    let d = densify(&g, 8, DensifyMode::BestEffort).unwrap();
    assert!(VertexSet::new(clique).is_subset(&d.set));
    let best = common::brute_force_on_support(&g, 8);
    assert!(100 * d.edges >= 99 * best);
}

#[test]
fn induction_lifts_never_lose_edges() {
    let mut rng = common::rng(22);
    for _ in 0..20 {
        let g = common::random_graph(&mut rng, 16, 4, EdgeKind::DistinctSet, 200);
        let r = find_dense_subset(&g, &ratio(3, 4), 0, &AttackConfig::default()).unwrap();
        assert_eq!(r.e_u, g.edge_count_within(&r.set).unwrap());
        for lift in r.trace.iter().filter(|s| s.stage == "lift") {
            let union = lift.details["e_g_union"].as_u64().unwrap();
            let lower = lift.details["e_h_b"].as_u64().unwrap();
            assert!(union >= lower);
        }
    }
}
