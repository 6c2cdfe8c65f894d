//! Dense-subset attacks: the conditional-expectation densifier and the
//! recursive finder that defeats any would-be spread graph at the threshold.

mod base_case;
mod densify;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use crate::exact::{ceil_pow2, floor_pow2, int, to_decimal, Rational};
use crate::hypergraph::{binomial, EdgeKind, GraphError, Hypergraph, Vertex, VertexSet};
use crate::seed;

pub use base_case::{base_case_pipeline, reduce_to_bipartite, BipartiteReduction};
pub use densify::{c_k, densify, meets_density_bound, DensifyMode, Densified};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AttackError {
    #[error("subset size {u} exceeds the {n_vertices} vertices")]
    SizeTooLarge { u: usize, n_vertices: usize },
    #[error("subset size {u} is below c_k = {c_k}; the density guarantee does not apply")]
    BelowDensifyConstant { u: usize, c_k: u64 },
    #[error("integer overflow in conditional expectation weights")]
    Overflow,
    #[error("{0}")]
    Precondition(&'static str),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub seed: u64,
    pub bipartition_trials: u32,
    pub b_trials: u32,
    pub a_trials: u32,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            seed: 0,
            bipartition_trials: 64,
            b_trials: 256,
            a_trials: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub k: usize,
    pub details: serde_json::Value,
}

impl StageRecord {
    fn new(stage: &str, k: usize, details: serde_json::Value) -> Self {
        StageRecord {
            stage: stage.to_string(),
            k,
            details,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackResult {
    #[serde(rename = "U")]
    pub set: VertexSet,
    pub e_u: u64,
    pub target: u64,
    pub size_cap: u64,
    pub achieved: bool,
    pub trace: Vec<StageRecord>,
}

fn saturate(v: BigUint) -> u64 {
    v.to_u64().unwrap_or(u64::MAX)
}

pub(crate) fn ceil_pow2_u64(e: &Rational) -> u64 {
    saturate(ceil_pow2(e))
}

/// Sizes shared by every stage: `2^n` vertices, `cap = floor(2^{beta n})`,
/// `half = floor(2^{beta n - 1})`, `target = ceil(2^{beta n + D})`.
struct Budget {
    n: u32,
    cap: usize,
    half: usize,
    target: u64,
}

impl Budget {
    fn new(g: &Hypergraph, beta: &Rational, d: i64, exact_k: usize) -> Result<Self, AttackError> {
        if g.kind() != EdgeKind::DistinctSet {
            return Err(AttackError::Precondition("the attack needs distinct-set edges"));
        }
        if g.k() < 2 || (exact_k != 0 && g.k() != exact_k) {
            return Err(AttackError::Precondition("unsupported edge size for this stage"));
        }
        if *beta < int(0) || *beta > int(1) {
            return Err(AttackError::Precondition("beta must lie in [0, 1]"));
        }
        let n = g
            .log2_vertices()
            .ok_or(AttackError::Precondition("vertex count must be a power of two"))?;
        let bn = beta * int(n);
        let cap = saturate(floor_pow2(&bn)).min(g.n_vertices() as u64) as usize;
        let half = saturate(floor_pow2(&(&bn - int(1)))) as usize;
        let target = ceil_pow2_u64(&(&bn + int(d)));
        Ok(Budget { n, cap, half, target })
    }

    /// Scores candidates in `g`, keeping the first best one within the cap.
    fn finish(&self, g: &Hypergraph, candidates: Vec<(&str, VertexSet)>, mut trace: Vec<StageRecord>) -> AttackResult {
        let mut best: Option<(&str, VertexSet, u64)> = None;
        for (name, set) in candidates {
            if set.len() > self.cap {
                continue;
            }
            let e = g.edge_count_within(&set).expect("candidates use graph ids");
            if best.as_ref().is_none_or(|b| e > b.2) {
                best = Some((name, set, e));
            }
        }
        let (winner, set, e_u) = best.unwrap_or(("empty", VertexSet::empty(), 0));
        trace.push(StageRecord::new(
            "result",
            g.k(),
            json!({"winner": winner, "size": set.len(), "e_u": e_u, "target": self.target, "size_cap": self.cap}),
        ));
        AttackResult {
            set,
            e_u,
            target: self.target,
            size_cap: self.cap as u64,
            achieved: e_u >= self.target,
            trace,
        }
    }
}

/// Edges meeting `a`, each with its smallest `a`-vertex removed.
pub fn project_to_lower_rank(g: &Hypergraph, a: &VertexSet) -> Result<Hypergraph, AttackError> {
    if g.k() < 3 {
        return Err(AttackError::Precondition("projection needs k >= 3"));
    }
    g.validate_set(a)?;
    let rows: Vec<Vec<Vertex>> = g
        .edges()
        .filter_map(|e| {
            let drop = e.iter().copied().filter(|&v| a.contains(v)).min()?;
            let pos = e.iter().position(|&v| v == drop)?;
            let mut row = e.to_vec();
            row.remove(pos);
            Some(row)
        })
        .collect();
    Ok(Hypergraph::from_rows(g.n_vertices(), g.k() - 1, g.kind(), rows))
}

/// Exact `E|F|` for a uniform `a`-subset: each edge is missed with
/// probability `C(N - k, a) / C(N, a)`.
fn expected_meeting(g: &Hypergraph, a: usize) -> Rational {
    let nv = g.n_vertices() as u64;
    let k = g.k() as u64;
    let miss = Rational::new(binomial(nv - k, a as u64), binomial(nv, a as u64));
    int(g.edge_count() as u64) * (int(1) - miss)
}

/// Best-effort search for `|U| <= floor(2^{beta n})` with `e(U) >= ceil(2^{beta n + D})`.
pub fn find_dense_subset(
    g: &Hypergraph,
    beta: &Rational,
    d: i64,
    config: &AttackConfig,
) -> Result<AttackResult, AttackError> {
    if g.k() == 2 {
        return base_case_pipeline(g, beta, d, config);
    }
    let budget = Budget::new(g, beta, d, 0)?;
    let k = g.k();
    let nv = g.n_vertices();
    let a_size = budget.cap;
    let mut trace = Vec::new();

    let trials = config.a_trials.max(1);
    let (f_size, trial, a) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::split(config.seed ^ 0xA5E7, u64::from(t)));
            let a: VertexSet = index::sample(&mut rng, nv, a_size)
                .into_iter()
                .map(|v| v as Vertex)
                .collect();
            let f = g.edges().filter(|e| e.iter().any(|&v| a.contains(v))).count();
            (f, t, a)
        })
        .reduce_with(|x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
        .expect("at least one trial");
    let expected = expected_meeting(g, a_size);
    trace.push(StageRecord::new(
        "select_a",
        k,
        json!({
            "trials": trials,
            "best_trial": trial,
            "a_size": a.len(),
            "f_size": f_size,
            "expected_f": to_decimal(&expected, 12),
            "meets_expectation": int(f_size as u64) >= expected,
        }),
    ));

    let h = project_to_lower_rank(g, &a)?;
    trace.push(StageRecord::new("project", k, json!({"projected_edges": h.edge_count()})));
    let sub_config = AttackConfig {
        seed: seed::split(config.seed, k as u64),
        ..config.clone()
    };
    let inner = find_dense_subset(&h, beta, d + k as i64 + 1, &sub_config)?;
    let b = inner.set.clone();
    trace.extend(inner.trace);

    let union = a.union(&b);
    let e_union = g.edge_count_within(&union)?;
    assert!(
        e_union >= inner.e_u,
        "lifting lost edges: e_G(A u B) = {e_union} < e_H(B) = {}",
        inner.e_u
    );
    let mut candidates: Vec<(&str, VertexSet)> = Vec::new();
    let half_size = union.len() / 2;
    let mut densified_edges = None;
    if half_size > 0 {
        let (sub, back) = g.induced(&union)?;
        let dense = densify(&sub, half_size, DensifyMode::BestEffort)?;
        densified_edges = Some(dense.edges);
        candidates.push((
            "densify_union",
            dense.set.as_slice().iter().map(|&v| back[v as usize]).collect(),
        ));
    }
    trace.push(StageRecord::new(
        "lift",
        k,
        json!({"b_size": b.len(), "e_h_b": inner.e_u, "union_size": union.len(), "e_g_union": e_union, "half_size": half_size, "e_densified": densified_edges}),
    ));
    candidates.push(("a", a));
    candidates.push(("b", b));
    Ok(budget.finish(g, candidates, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::ratio;

    fn pair_graph(nv: usize, edges: &[(Vertex, Vertex, usize)]) -> Hypergraph {
        let rows = edges
            .iter()
            .flat_map(|&(x, y, m)| std::iter::repeat_n([x, y], m));
        Hypergraph::new(nv, 2, EdgeKind::DistinctSet, rows).unwrap()
    }

    #[test]
    fn heavy_pairs_return_early() {
        // beta = 1/2, n = 4: cap 4, half 2, target 2^{2+D}
        let d = 1;
        let g = pair_graph(16, &[(0, 1, 16), (2, 3, 16)]);
        let r = find_dense_subset(&g, &ratio(1, 2), d, &AttackConfig::default()).unwrap();
        assert!(r.achieved);
        assert_eq!(r.set.as_slice(), &[0, 1, 2, 3]);
        assert_eq!(r.e_u, 32);
        assert_eq!(r.target, 8);
        assert_eq!(r.trace[0].stage, "top_pairs");
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn single_heavy_pair() {
        let g = pair_graph(16, &[(5, 9, 4), (1, 2, 1)]);
        let r = base_case_pipeline(&g, &ratio(1, 2), 0, &AttackConfig::default()).unwrap();
        assert!(r.achieved);
        assert!(r.set.contains(5) && r.set.contains(9));
        assert_eq!(r.trace.last().unwrap().details["winner"], "top_pairs");
    }

    #[test]
    fn empty_graph_is_not_attacked() {
        let g = Hypergraph::empty(16, 2, EdgeKind::DistinctSet).unwrap();
        let r = find_dense_subset(&g, &ratio(1, 2), 0, &AttackConfig::default()).unwrap();
        assert!(!r.achieved);
        assert_eq!(r.e_u, 0);
        let g3 = Hypergraph::empty(16, 3, EdgeKind::DistinctSet).unwrap();
        let r = find_dense_subset(&g3, &ratio(1, 2), 0, &AttackConfig::default()).unwrap();
        assert!(!r.achieved);
    }

    #[test]
    fn perfect_matching_is_not_dense() {
        let edges: Vec<(Vertex, Vertex, usize)> = (0..8).map(|i| (2 * i, 2 * i + 1, 1)).collect();
        let g = pair_graph(16, &edges);
        let r = find_dense_subset(&g, &ratio(1, 2), 1, &AttackConfig::default()).unwrap();
        assert!(!r.achieved);
        assert!(r.e_u <= 2);
    }

    #[test]
    fn preconditions() {
        let g = Hypergraph::empty(12, 2, EdgeKind::DistinctSet).unwrap();
        assert!(find_dense_subset(&g, &ratio(1, 2), 0, &AttackConfig::default()).is_err());
        let t = Hypergraph::empty(16, 2, EdgeKind::OrderedTuple).unwrap();
        assert!(find_dense_subset(&t, &ratio(1, 2), 0, &AttackConfig::default()).is_err());
    }

    #[test]
    fn projection_examples() {
        let g = Hypergraph::new(6, 3, EdgeKind::DistinctSet, [[0, 1, 2], [3, 4, 5]]).unwrap();
        let h = project_to_lower_rank(&g, &VertexSet::new([0])).unwrap();
        assert_eq!(h.k(), 2);
        assert_eq!(h.edges().collect::<Vec<_>>(), vec![&[1, 2][..]]);
        assert_eq!(project_to_lower_rank(&g, &VertexSet::empty()).unwrap().edge_count(), 0);
        let all = project_to_lower_rank(&g, &VertexSet::all(6)).unwrap();
        assert_eq!(all.edges().collect::<Vec<_>>(), vec![&[1, 2][..], &[4, 5]]);
        let two = Hypergraph::new(6, 2, EdgeKind::DistinctSet, [[0, 1]]).unwrap();
        assert!(project_to_lower_rank(&two, &VertexSet::new([0])).is_err());
    }

    #[test]
    fn induction_on_a_planted_triple_system() {
        // 2^4 vertices, beta 1/2: cap 4, target 2^{2+D}; plant K_4^{(3)} with multiplicity 8
        let mut rows = Vec::new();
        for t in [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            rows.extend(std::iter::repeat_n(t, 8));
        }
        let g = Hypergraph::new(16, 3, EdgeKind::DistinctSet, rows).unwrap();
        let r = find_dense_subset(&g, &ratio(1, 2), 0, &AttackConfig::default()).unwrap();
        assert_eq!(r.e_u, g.edge_count_within(&r.set).unwrap());
        assert!(r.set.len() <= 4);
        assert!(r.trace.iter().any(|s| s.stage == "lift"));
    }
}
