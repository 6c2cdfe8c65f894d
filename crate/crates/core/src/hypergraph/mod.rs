//! k-uniform hypergraphs with repeated edges.
//!
//! Edges are kept as a flat, lexicographically sorted list, so two graphs are
//! equal exactly when their edge multisets are. Set edges are normalized to
//! ascending vertex order, which fixes what "the i-th vertex of an edge" means
//! for the extractor correspondence.

mod io;
mod search;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{int, Rational};

pub use search::{subset_count, DenseSubset, DEFAULT_SUBSET_BUDGET};

pub type Vertex = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph needs at least one vertex and k >= 1 (got n_vertices={n_vertices}, k={k})")]
    BadShape { n_vertices: usize, k: usize },
    #[error("edge {edge}: vertex {vertex} is outside [0, {n_vertices})")]
    InvalidVertex { edge: usize, vertex: u64, n_vertices: usize },
    #[error("edge {edge}: expected {expected} vertices, found {found}")]
    WrongArity { edge: usize, expected: usize, found: usize },
    #[error("edge {edge}: repeated vertex in a set edge")]
    RepeatedVertex { edge: usize },
    #[error("vertex set contains {vertex}, outside [0, {n_vertices})")]
    InvalidSetMember { vertex: Vertex, n_vertices: usize },
    #[error("malformed graph document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("unsupported graph document version {0}")]
    UnsupportedVersion(u64),
    #[error("exhaustive search over {candidates} subsets exceeds the budget of {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },
    #[error("{0}")]
    Unsupported(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    /// `k` pairwise-distinct vertices, stored ascending.
    DistinctSet,
    /// `k` coordinates, repeats allowed, order significant.
    OrderedTuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n_vertices: usize,
    k: usize,
    kind: EdgeKind,
    // row-major, `k` ids per edge, rows sorted lexicographically
    flat: Vec<Vertex>,
}

impl Hypergraph {
    pub fn new<I, E>(n_vertices: usize, k: usize, kind: EdgeKind, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = E>,
        E: AsRef<[Vertex]>,
    {
        if n_vertices == 0 || k == 0 || n_vertices > Vertex::MAX as usize {
            return Err(GraphError::BadShape { n_vertices, k });
        }
        let mut rows: Vec<Vec<Vertex>> = Vec::new();
        for (idx, edge) in edges.into_iter().enumerate() {
            let edge = edge.as_ref();
            if edge.len() != k {
                return Err(GraphError::WrongArity {
                    edge: idx,
                    expected: k,
                    found: edge.len(),
                });
            }
            if let Some(&bad) = edge.iter().find(|&&v| v as usize >= n_vertices) {
                return Err(GraphError::InvalidVertex {
                    edge: idx,
                    vertex: u64::from(bad),
                    n_vertices,
                });
            }
            let mut row = edge.to_vec();
            if kind == EdgeKind::DistinctSet {
                row.sort_unstable();
                if row.windows(2).any(|w| w[0] == w[1]) {
                    return Err(GraphError::RepeatedVertex { edge: idx });
                }
            }
            rows.push(row);
        }
        Ok(Self::from_rows(n_vertices, k, kind, rows))
    }

    /// Rows must already be valid and normalized.
    pub(crate) fn from_rows(n_vertices: usize, k: usize, kind: EdgeKind, mut rows: Vec<Vec<Vertex>>) -> Self {
        rows.sort_unstable();
        let flat = rows.into_iter().flatten().collect();
        Hypergraph {
            n_vertices,
            k,
            kind,
            flat,
        }
    }

    pub fn empty(n_vertices: usize, k: usize, kind: EdgeKind) -> Result<Self, GraphError> {
        Self::new(n_vertices, k, kind, std::iter::empty::<Vec<Vertex>>())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn edge_count(&self) -> usize {
        self.flat.len() / self.k
    }

    pub fn edge(&self, i: usize) -> &[Vertex] {
        &self.flat[i * self.k..(i + 1) * self.k]
    }

    /// Edges in canonical (sorted) order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[Vertex]> + '_ {
        self.flat.chunks_exact(self.k)
    }

    /// `Some(n)` when the graph has exactly `2^n` vertices.
    pub fn log2_vertices(&self) -> Option<u32> {
        self.n_vertices
            .is_power_of_two()
            .then(|| self.n_vertices.trailing_zeros())
    }

    pub fn validate_set(&self, set: &VertexSet) -> Result<(), GraphError> {
        match set.as_slice().last() {
            Some(&v) if v as usize >= self.n_vertices => Err(GraphError::InvalidSetMember {
                vertex: v,
                n_vertices: self.n_vertices,
            }),
            _ => Ok(()),
        }
    }

    /// `e(U)`: edges, with multiplicity, all of whose vertices lie in `set`.
    pub fn edge_count_within(&self, set: &VertexSet) -> Result<u64, GraphError> {
        self.validate_set(set)?;
        Ok(self.count_within(&Membership::of(set, self.n_vertices)))
    }

    pub(crate) fn count_within(&self, member: &Membership) -> u64 {
        self.edges()
            .filter(|e| e.iter().all(|&v| member.contains(v)))
            .count() as u64
    }

    /// Indices (in canonical order) of the edges inside `set`.
    pub fn edges_within(&self, set: &VertexSet) -> Result<Vec<usize>, GraphError> {
        self.validate_set(set)?;
        let member = Membership::of(set, self.n_vertices);
        Ok(self
            .edges()
            .enumerate()
            .filter(|(_, e)| e.iter().all(|&v| member.contains(v)))
            .map(|(i, _)| i)
            .collect())
    }

    /// Edge count together with `|E| / |V|^k` (and `|E| / C(|V|, k)` for set edges).
    pub fn pseudo_density(&self) -> DensityReport {
        let m = self.edge_count() as u64;
        let nk = num_traits::pow(BigInt::from(self.n_vertices), self.k);
        let binomial_density = match self.kind {
            EdgeKind::DistinctSet => {
                let c = binomial(self.n_vertices as u64, self.k as u64);
                (!c.is_zero()).then(|| Rational::new(BigInt::from(m), c))
            }
            EdgeKind::OrderedTuple => None,
        };
        DensityReport {
            edge_count: m,
            pseudo_density: Rational::new(BigInt::from(m), nk),
            binomial_density,
        }
    }

    /// Exact `E[e(U)]` for `U` uniform among `u`-subsets: `|E| C(n-k, u-k) / C(n, u)`.
    pub fn induced_expectation(&self, u: usize) -> Result<Rational, GraphError> {
        if self.kind != EdgeKind::DistinctSet {
            return Err(GraphError::Unsupported(
                "induced_expectation is defined for distinct-set edges",
            ));
        }
        if u > self.n_vertices {
            return Err(GraphError::Unsupported("subset size exceeds the vertex count"));
        }
        if u < self.k {
            return Ok(Rational::zero());
        }
        let (n, k, u) = (self.n_vertices as u64, self.k as u64, u as u64);
        let p = Rational::new(binomial(n - k, u - k), binomial(n, u));
        Ok(int(self.edge_count() as u64) * p)
    }

    /// The sub-hypergraph induced by `set`, relabeled onto `0..set.len()`.
    /// The returned vector maps new ids back to the original ones.
    pub fn induced(&self, set: &VertexSet) -> Result<(Hypergraph, Vec<Vertex>), GraphError> {
        self.validate_set(set)?;
        if set.is_empty() {
            return Err(GraphError::BadShape { n_vertices: 0, k: self.k });
        }
        let mut relabel = vec![Vertex::MAX; self.n_vertices];
        for (new, &old) in set.as_slice().iter().enumerate() {
            relabel[old as usize] = new as Vertex;
        }
        let rows = self
            .edges()
            .filter(|e| e.iter().all(|&v| relabel[v as usize] != Vertex::MAX))
            .map(|e| {
                let mut row: Vec<Vertex> = e.iter().map(|&v| relabel[v as usize]).collect();
                if self.kind == EdgeKind::DistinctSet {
                    row.sort_unstable();
                }
                row
            })
            .collect();
        Ok((
            Self::from_rows(set.len(), self.k, self.kind, rows),
            set.as_slice().to_vec(),
        ))
    }

    /// Keeps the `m` lexicographically smallest edges.
    pub fn truncated(&self, m: usize) -> Hypergraph {
        let keep = m.min(self.edge_count()) * self.k;
        Hypergraph {
            n_vertices: self.n_vertices,
            k: self.k,
            kind: self.kind,
            flat: self.flat[..keep].to_vec(),
        }
    }

    /// For every vertex, the (deduplicated) indices of edges touching it.
    pub(crate) fn incidence(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.n_vertices];
        for (i, e) in self.edges().enumerate() {
            for (pos, &v) in e.iter().enumerate() {
                if !e[..pos].contains(&v) {
                    inc[v as usize].push(i);
                }
            }
        }
        inc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityReport {
    pub edge_count: u64,
    #[serde(with = "crate::exact::serde_fraction")]
    pub pseudo_density: Rational,
    #[serde(skip)]
    pub binomial_density: Option<Rational>,
}

/// A sorted, duplicate-free set of vertex ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<Vertex>", into = "Vec<Vertex>")]
pub struct VertexSet(Vec<Vertex>);

impl VertexSet {
    pub fn new(ids: impl IntoIterator<Item = Vertex>) -> Self {
        let mut v: Vec<Vertex> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        VertexSet(v)
    }

    pub fn empty() -> Self {
        VertexSet(Vec::new())
    }

    pub fn all(n_vertices: usize) -> Self {
        VertexSet((0..n_vertices as Vertex).collect())
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.0.iter().all(|&v| other.contains(v))
    }
}

impl From<Vec<Vertex>> for VertexSet {
    fn from(v: Vec<Vertex>) -> Self {
        VertexSet::new(v)
    }
}

impl From<VertexSet> for Vec<Vertex> {
    fn from(s: VertexSet) -> Self {
        s.0
    }
}

impl FromIterator<Vertex> for VertexSet {
    fn from_iter<T: IntoIterator<Item = Vertex>>(iter: T) -> Self {
        VertexSet::new(iter)
    }
}

/// Bitset over `0..n` used for O(k) edge membership tests.
#[derive(Debug, Clone)]
pub(crate) struct Membership {
    words: Vec<u64>,
}

impl Membership {
    pub fn new(n: usize) -> Self {
        Membership {
            words: vec![0; n.div_ceil(64)],
        }
    }

    pub fn of(set: &VertexSet, n: usize) -> Self {
        let mut m = Self::new(n);
        for &v in set.as_slice() {
            m.insert(v);
        }
        m
    }

    #[inline]
    pub fn insert(&mut self, v: Vertex) {
        self.words[(v / 64) as usize] |= 1 << (v % 64);
    }

    #[inline]
    pub fn remove(&mut self, v: Vertex) {
        self.words[(v / 64) as usize] &= !(1 << (v % 64));
    }

    #[inline]
    pub fn contains(&self, v: Vertex) -> bool {
        self.words[(v / 64) as usize] >> (v % 64) & 1 == 1
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::from(1u8);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}
