//! Derandomized subset densification.
//!
//! A uniform `u`-subset contains a fixed edge with `j` distinct vertices with
//! probability `(u)_j / (n)_j`, so `E[e(U)] >= 0.99 p u^k` once `u >= c_k`.
//! The greedy below fixes vertices one at a time, always keeping the
//! conditional expectation of `e(U)` from dropping.

use num_bigint::BigInt;
use serde::Serialize;

use super::AttackError;
use crate::hypergraph::{Hypergraph, Membership, Vertex, VertexSet};

/// Least `c > k` with `(1 - k/c)^k >= 99/100`.
pub fn c_k(k: usize) -> u64 {
    let k_big = k as u64;
    let mut c = k_big + 1;
    loop {
        let lhs = BigInt::from(100u8) * num_traits::pow(BigInt::from(c - k_big), k);
        let rhs = BigInt::from(99u8) * num_traits::pow(BigInt::from(c), k);
        if lhs >= rhs {
            return c;
        }
        c += 1;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensifyMode {
    /// Refuse sizes below `c_k`.
    Strict,
    /// Run anyway and report whether the bound happened to hold.
    BestEffort,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Densified {
    #[serde(rename = "U")]
    pub set: VertexSet,
    pub edges: u64,
    pub guarantee_applies: bool,
    pub guarantee_met: bool,
}

/// `100 e(U) n^k >= 99 |E| u^k`.
pub fn meets_density_bound(g: &Hypergraph, u: usize, e_u: u64) -> bool {
    let k = g.k();
    let lhs = BigInt::from(100u8) * e_u * num_traits::pow(BigInt::from(g.n_vertices()), k);
    let rhs = BigInt::from(99u8) * g.edge_count() * num_traits::pow(BigInt::from(u), k);
    lhs >= rhs
}

fn falling(x: i128, j: usize) -> Option<i128> {
    (0..j as i128).try_fold(1i128, |acc, i| acc.checked_mul(x - i))
}

/// Integer weights proportional to the completion probability of an edge
/// with `j` vertices still outside the chosen set, when `r` of the remaining
/// `m` vertices will still be chosen: `(r)_j / (m)_j` scaled by `(m)_{min(k, m)}`.
fn weights(r: usize, m: usize, k: usize) -> Option<Vec<i128>> {
    let top = k.min(m);
    (0..=k)
        .map(|j| {
            if j > r || j > top {
                return Some(0);
            }
            falling(r as i128, j)?.checked_mul(falling((m - j) as i128, top - j)?)
        })
        .collect()
}

pub fn densify(g: &Hypergraph, u: usize, mode: DensifyMode) -> Result<Densified, AttackError> {
    let n = g.n_vertices();
    let k = g.k();
    if u > n {
        return Err(AttackError::SizeTooLarge { u, n_vertices: n });
    }
    let ck = c_k(k);
    let applies = u as u64 >= ck;
    if !applies && mode == DensifyMode::Strict {
        return Err(AttackError::BelowDensifyConstant { u, c_k: ck });
    }

    let incidence = g.incidence();
    // outside[e]: distinct vertices of edge e not yet chosen
    let mut outside: Vec<usize> = g
        .edges()
        .map(|e| {
            let mut d = e.to_vec();
            d.sort_unstable();
            d.dedup();
            d.len()
        })
        .collect();
    // buckets[v][j]: edges touching v with j outside vertices
    let mut buckets = vec![vec![0i128; k + 1]; n];
    for (v, inc) in incidence.iter().enumerate() {
        for &e in inc {
            buckets[v][outside[e]] += 1;
        }
    }

    let mut chosen = Membership::new(n);
    let mut picked: Vec<Vertex> = Vec::with_capacity(u);
    for step in 0..u {
        let r_after = u - step - 1;
        let m_after = n - step - 1;
        let w = weights(r_after, m_after, k).ok_or(AttackError::Overflow)?;
        let mut best: Option<(i128, Vertex)> = None;
        for v in 0..n as Vertex {
            if chosen.contains(v) {
                continue;
            }
            let mut delta = 0i128;
            for j in 1..=k {
                let c = buckets[v as usize][j];
                if c != 0 {
                    let term = c.checked_mul(w[j - 1] - w[j]).ok_or(AttackError::Overflow)?;
                    delta = delta.checked_add(term).ok_or(AttackError::Overflow)?;
                }
            }
            if best.is_none_or(|(b, _)| delta > b) {
                best = Some((delta, v));
            }
        }
        let (_, v) = best.expect("u <= n leaves a candidate");
        chosen.insert(v);
        picked.push(v);
        for &e in &incidence[v as usize] {
            let j = outside[e];
            let mut distinct = g.edge(e).to_vec();
            distinct.sort_unstable();
            distinct.dedup();
            for &w in &distinct {
                buckets[w as usize][j] -= 1;
                buckets[w as usize][j - 1] += 1;
            }
            outside[e] = j - 1;
        }
    }

    let set = VertexSet::new(picked);
    let edges = g.count_within(&chosen);
    Ok(Densified {
        guarantee_applies: applies,
        guarantee_met: meets_density_bound(g, u, edges),
        set,
        edges,
    })
}
