//! The rank-2 pipeline: heavy pairs, collapse, bipartition, then the two
//! degree cases.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::{AttackConfig, AttackError, AttackResult, Budget, StageRecord};
use crate::exact::{floor, pow2, to_decimal, Rational};
use crate::hypergraph::{Hypergraph, Vertex, VertexSet};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BipartiteReduction {
    pub left: VertexSet,
    pub right: VertexSet,
    /// Simple crossing edges as `(left, right)` pairs, sorted.
    pub edges: Vec<(Vertex, Vertex)>,
    pub removed_pairs: Vec<(Vertex, Vertex)>,
    pub u_max: VertexSet,
    pub e_u_max: u64,
    /// Largest multiplicity merged into a single edge.
    pub collapse_factor: u64,
    /// Simple edges before the bipartition.
    pub collapsed_edges: u64,
    pub bipartition_trials: u32,
    pub one_fifth_kept: bool,
}

fn pair_counts(g: &Hypergraph) -> BTreeMap<(Vertex, Vertex), u64> {
    let mut counts = BTreeMap::new();
    for e in g.edges() {
        *counts.entry((e[0], e[1])).or_insert(0) += 1;
    }
    counts
}

/// Stages up to the bipartite simple graph.
pub fn reduce_to_bipartite(g: &Hypergraph, half: usize, config: &AttackConfig) -> BipartiteReduction {
    let counts = pair_counts(g);
    let mut ranked: Vec<((Vertex, Vertex), u64)> = counts.iter().map(|(&p, &c)| (p, c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(half);
    let removed_pairs: Vec<(Vertex, Vertex)> = ranked.iter().map(|&(p, _)| p).collect();
    let u_max: VertexSet = removed_pairs.iter().flat_map(|&(x, y)| [x, y]).collect();
    let e_u_max = g.edge_count_within(&u_max).expect("ids come from the graph");

    let mut simple: Vec<(Vertex, Vertex)> = Vec::new();
    let mut collapse_factor = 0;
    for (&(x, y), &c) in &counts {
        if u_max.contains(x) && u_max.contains(y) {
            continue;
        }
        simple.push((x, y));
        collapse_factor = collapse_factor.max(c);
    }

    let nv = g.n_vertices();
    let trials = config.bipartition_trials.max(1);
    let (crossing, side) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut order: Vec<Vertex> = (0..nv as Vertex).collect();
            order.shuffle(&mut seed::rng(seed::split(config.seed, u64::from(t))));
            let mut left = vec![false; nv];
            for &v in &order[..nv / 2] {
                left[v as usize] = true;
            }
            let crossing = simple
                .iter()
                .filter(|&&(x, y)| left[x as usize] != left[y as usize])
                .count();
            (crossing, t, left)
        })
        .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a })
        .map(|(c, _, l)| (c, l))
        .expect("at least one trial");

    let left = VertexSet::new((0..nv as Vertex).filter(|&v| side[v as usize]));
    let right = VertexSet::new((0..nv as Vertex).filter(|&v| !side[v as usize]));
    let mut edges: Vec<(Vertex, Vertex)> = simple
        .iter()
        .filter(|&&(x, y)| side[x as usize] != side[y as usize])
        .map(|&(x, y)| if side[x as usize] { (x, y) } else { (y, x) })
        .collect();
    edges.sort_unstable();
    BipartiteReduction {
        left,
        right,
        edges,
        removed_pairs,
        u_max,
        e_u_max,
        collapse_factor,
        collapsed_edges: simple.len() as u64,
        bipartition_trials: trials,
        one_fifth_kept: 5 * crossing >= simple.len(),
    }
}

/// The `count` vertices of `pool` with the largest `score`, ties to smaller ids.
fn top_by(pool: &[Vertex], count: usize, score: impl Fn(Vertex) -> u64) -> Vec<Vertex> {
    let mut ranked: Vec<(u64, Vertex)> = pool.iter().map(|&v| (score(v), v)).collect();
    ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    ranked.into_iter().take(count).map(|(_, v)| v).collect()
}

pub fn base_case_pipeline(
    g: &Hypergraph,
    beta: &Rational,
    d: i64,
    config: &AttackConfig,
) -> Result<AttackResult, AttackError> {
    let budget = Budget::new(g, beta, d, 2)?;
    let half = budget.half;
    let mut trace = Vec::new();
    let mut candidates: Vec<(&'static str, VertexSet)> = Vec::new();

    let red = reduce_to_bipartite(g, half, config);
    trace.push(StageRecord::new(
        "top_pairs",
        2,
        json!({"pairs": red.removed_pairs.len(), "u_max_size": red.u_max.len(), "e_u_max": red.e_u_max, "target": budget.target}),
    ));
    candidates.push(("top_pairs", red.u_max.clone()));
    if red.e_u_max >= budget.target {
        return Ok(budget.finish(g, candidates, trace));
    }
    trace.push(StageRecord::new(
        "collapse",
        2,
        json!({"removed_edges": red.e_u_max, "simple_edges": red.collapsed_edges, "collapse_factor": red.collapse_factor}),
    ));
    trace.push(StageRecord::new(
        "bipartition",
        2,
        json!({"trials": red.bipartition_trials, "crossing_edges": red.edges.len(), "simple_edges": red.collapsed_edges, "one_fifth_kept": red.one_fifth_kept}),
    ));

    let nv = g.n_vertices();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); nv];
    for &(x, y) in &red.edges {
        adj[x as usize].push(y);
        adj[y as usize].push(x);
    }
    let deg = |v: Vertex| adj[v as usize].len() as u64;
    let left = red.left.as_slice();
    let a = top_by(left, half, deg);
    let a_degree: u64 = a.iter().map(|&x| deg(x)).sum();
    let n = budget.n;
    let case1_threshold = pow2(i64::from(n) + d + 1);
    let case1 = Rational::from_integer(a_degree.into()) >= case1_threshold;

    // The case-1 choice is always scored; it is a valid candidate either way.
    let a_set = VertexSet::new(a.iter().copied());
    let into_a = |y: Vertex| adj[y as usize].iter().filter(|&&x| a_set.contains(x)).count() as u64;
    let b1 = top_by(red.right.as_slice(), half, into_a);
    let case1_set = VertexSet::new(a.iter().chain(b1.iter()).copied());
    trace.push(StageRecord::new(
        "case1",
        2,
        json!({"selected": case1, "a_size": a.len(), "a_degree_sum": a_degree, "threshold": to_decimal(&case1_threshold, 12), "b_size": b1.len(), "e_u": g.edge_count_within(&case1_set).expect("valid ids")}),
    ));
    candidates.push(("case1", case1_set));

    if !case1 {
        let rest: Vec<Vertex> = left.iter().copied().filter(|&x| !a_set.contains(x)).collect();
        let rest_degree: u64 = rest.iter().map(|&x| deg(x)).sum();
        let delta = if rest.is_empty() {
            Rational::from_integer(0.into())
        } else {
            Rational::new(rest_degree.into(), BigInt::from(rest.len()))
        };
        let q: Vec<Vertex> = rest
            .iter()
            .copied()
            .filter(|&x| Rational::from_integer(BigInt::from(2u8) * deg(x)) >= delta)
            .collect();
        // membership probability 2^{-(floor((1-beta) n) + 3)}
        let one = Rational::from_integer(1.into());
        let exponent: BigInt = floor(&((one - beta) * Rational::from_integer(n.into()))) + 3;
        let exponent: u32 = exponent.try_into().expect("small exponent");
        let need = super::ceil_pow2_u64(&Rational::from_integer((d + 1).into()));
        let right = red.right.as_slice();
        let q_set = q.clone();
        let best = (0..config.b_trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(seed::split(config.seed ^ 0xB5E7, u64::from(t)));
                let b: Vec<Vertex> = right
                    .iter()
                    .copied()
                    .filter(|_| seed::bernoulli_dyadic(&mut rng, exponent))
                    .collect();
                if b.is_empty() || b.len() > half {
                    return None;
                }
                let b_set = VertexSet::new(b.iter().copied());
                let into_b = |x: Vertex| adj[x as usize].iter().filter(|&&y| b_set.contains(y)).count() as u64;
                let good: Vec<Vertex> = q_set.iter().copied().filter(|&x| into_b(x) >= need).collect();
                let q_prime = top_by(&good, half, into_b);
                let u = VertexSet::new(q_prime.iter().chain(b.iter()).copied());
                let e = g.edge_count_within(&u).expect("valid ids");
                Some((e, t, u, good.len()))
            })
            .flatten()
            .reduce_with(|a, b| if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
        let valid = best.is_some();
        trace.push(StageRecord::new(
            "case2",
            2,
            json!({
                "delta": to_decimal(&delta, 12),
                "q_size": q.len(),
                "b_probability_log2": -(i64::from(exponent)),
                "trials": config.b_trials,
                "threshold": need,
                "best_trial": best.as_ref().map(|b| b.1),
                "good_left": best.as_ref().map(|b| b.3),
                "e_u": best.as_ref().map(|b| b.0),
                "found": valid,
            }),
        ));
        if let Some((_, _, u, _)) = best {
            candidates.push(("case2", u));
        }
    }
    Ok(budget.finish(g, candidates, trace))
}
