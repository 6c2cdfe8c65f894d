//! Instance generators shared by the integration suites.
#![allow(dead_code)]

use rand::seq::index;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use spreadgraph::{seed, EdgeKind, Hypergraph, Vertex, VertexSet};

pub fn rng(tag: u64) -> ChaCha8Rng {
    seed::rng(seed::split(0x5EED_0000, tag))
}

/// `m` random edges; set edges draw `k` distinct vertices.
pub fn random_graph(rng: &mut ChaCha8Rng, nv: usize, k: usize, kind: EdgeKind, m: usize) -> Hypergraph {
    let rows: Vec<Vec<Vertex>> = (0..m)
        .map(|_| match kind {
            EdgeKind::DistinctSet => index::sample(rng, nv, k).into_iter().map(|v| v as Vertex).collect(),
            EdgeKind::OrderedTuple => (0..k).map(|_| rng.random_range(0..nv as Vertex)).collect(),
        })
        .collect();
    Hypergraph::new(nv, k, kind, rows).unwrap()
}

/// Every `k`-subset of `vertices`, repeated `mult` times.
pub fn planted_clique(vertices: &[Vertex], k: usize, mult: usize) -> Vec<Vec<Vertex>> {
    let mut out = Vec::new();
    let n = vertices.len();
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize == k {
            let e: Vec<Vertex> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| vertices[i]).collect();
            out.extend(std::iter::repeat_n(e, mult));
        }
    }
    out
}

/// Naive `e(U)`: test every vertex of every edge against a plain list.
pub fn naive_count(g: &Hypergraph, set: &[Vertex]) -> u64 {
    g.edges().filter(|e| e.iter().all(|v| set.contains(v))).count() as u64
}

/// All subsets of `0..nv` of size `u`, as vertex lists.
pub fn subsets_of_size(nv: usize, u: usize) -> Vec<Vec<Vertex>> {
    (0u32..1 << nv)
        .filter(|m| m.count_ones() as usize == u)
        .map(|m| (0..nv as Vertex).filter(|&v| m >> v & 1 == 1).collect())
        .collect()
}

/// Exhaustive densest set of size at most `cap` among the vertices that touch an edge.
pub fn brute_force_on_support(g: &Hypergraph, cap: usize) -> u64 {
    let support: VertexSet = g.edges().flat_map(|e| e.iter().copied()).collect();
    if support.is_empty() {
        return 0;
    }
    let (sub, _) = g.induced(&support).unwrap();
    sub.max_dense_subset_bruteforce(cap.min(sub.n_vertices()), u64::MAX).unwrap().edges
}
