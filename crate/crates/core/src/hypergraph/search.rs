//! Exhaustive densest-subset oracle.

use rayon::prelude::*;
use serde::Serialize;

use super::{GraphError, Hypergraph, Membership, Vertex, VertexSet};

pub const DEFAULT_SUBSET_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DenseSubset {
    pub set: VertexSet,
    pub edges: u64,
    /// Number of subsets examined, the empty set included.
    pub subsets_checked: u128,
}

/// `sum_{u <= cap} C(n, u)`, saturating.
pub fn subset_count(n: usize, cap: usize) -> u128 {
    let cap = cap.min(n);
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for u in 0..=cap {
        total = total.saturating_add(c);
        c = c
            .checked_mul((n - u) as u128)
            .map(|x| x / (u as u128 + 1))
            .unwrap_or(u128::MAX);
    }
    total
}

struct Search<'g> {
    graph: &'g Hypergraph,
    // edges grouped by their largest vertex, so adding v can only complete edges in by_max[v]
    by_max: Vec<Vec<usize>>,
    cap: usize,
}

#[derive(Clone)]
struct Best {
    edges: u64,
    set: Vec<Vertex>,
}

impl Best {
    fn better(self, other: Best) -> Best {
        match other.edges.cmp(&self.edges) {
            std::cmp::Ordering::Greater => other,
            std::cmp::Ordering::Less => self,
            std::cmp::Ordering::Equal => {
                if other.set < self.set {
                    other
                } else {
                    self
                }
            }
        }
    }
}

impl Search<'_> {
    fn gain(&self, v: Vertex, member: &Membership) -> u64 {
        self.by_max[v as usize]
            .iter()
            .filter(|&&i| self.graph.edge(i).iter().all(|&w| member.contains(w)))
            .count() as u64
    }

    // Preorder DFS over increasing vertex lists; the first strict improvement
    // is the lexicographically smallest maximizer.
    fn walk(&self, start: usize, current: &mut Vec<Vertex>, member: &mut Membership, edges: u64, best: &mut Best) {
        if current.len() == self.cap {
            return;
        }
        for v in start..self.graph.n_vertices() {
            let v = v as Vertex;
            member.insert(v);
            current.push(v);
            let e = edges + self.gain(v, member);
            if e > best.edges {
                best.edges = e;
                best.set.clone_from(current);
            }
            self.walk(v as usize + 1, current, member, e, best);
            current.pop();
            member.remove(v);
        }
    }
}

impl Hypergraph {
    /// A subset of size at most `cap` maximizing `e(U)`, ties going to the
    /// lexicographically smallest sorted vertex list.
    pub fn max_dense_subset_bruteforce(&self, cap: usize, budget: u64) -> Result<DenseSubset, GraphError> {
        let n = self.n_vertices();
        let candidates = subset_count(n, cap);
        if candidates > u128::from(budget) {
            return Err(GraphError::BudgetExceeded { candidates, budget });
        }
        let mut by_max = vec![Vec::new(); n];
        for (i, e) in self.edges().enumerate() {
            let top = *e.iter().max().expect("k >= 1");
            by_max[top as usize].push(i);
        }
        let search = Search {
            graph: self,
            by_max,
            cap: cap.min(n),
        };
        let empty = Best {
            edges: 0,
            set: Vec::new(),
        };
        let best = if search.cap == 0 {
            empty
        } else {
            (0..n)
                .into_par_iter()
                .map(|first| {
                    let v = first as Vertex;
                    let mut member = Membership::new(n);
                    member.insert(v);
                    let mut current = vec![v];
                    let e = search.gain(v, &member);
                    let mut best = Best {
                        edges: e,
                        set: current.clone(),
                    };
                    search.walk(first + 1, &mut current, &mut member, e, &mut best);
                    best
                })
                .reduce(|| empty.clone(), Best::better)
        };
        // the empty set wins every tie
        let best = if best.edges == 0 {
            Best {
                edges: 0,
                set: Vec::new(),
            }
        } else {
            best
        };
        Ok(DenseSubset {
            set: VertexSet::new(best.set),
            edges: best.edges,
            subsets_checked: candidates,
        })
    }
}
