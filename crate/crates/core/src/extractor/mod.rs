//! Finite extractor families and their correspondence with hypergraphs.
//!
//! A family maps inputs of length `f_n` to `k` outputs of length `n`. Bit
//! strings of a fixed length are identified with integers in big-endian
//! order, so `"0...0"` is index 0 and lexicographic order is numeric order.

mod adversary;
mod threshold;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{EdgeKind, GraphError, Hypergraph, Vertex};

pub use adversary::{adversary_partial, symmetrize, AdversaryOutcome, LoopTrace};
pub use threshold::{
    input_length, threshold_extract, DescriptionOracle, Evaluation, FixedOracle, LevelTrace, RefusingOracle,
    TableOracle, ThresholdOutput,
};

/// Largest input length whose tables are materialized.
pub const MAX_INPUT_BITS: u32 = 24;
/// Largest output length (vertex ids are `u32`).
pub const MAX_OUTPUT_BITS: u32 = 31;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtractorError {
    #[error("graph has {edges} edges, expected 2^{f_n}")]
    EdgeCountMismatch { edges: usize, f_n: u32 },
    #[error("graph has {0} vertices, which is not a power of two")]
    VertexCountNotPowerOfTwo(usize),
    #[error("outputs for input {sigma} are not pairwise distinct; distinctify the family first")]
    NonDistinct { sigma: BitString },
    #[error("k = {k} exceeds the 2^{n} strings of length n")]
    TooManyOutputs { k: usize, n: u32 },
    #[error("input {sigma} has no output in a total family")]
    Undefined { sigma: BitString },
    #[error("malformed family: {0}")]
    Malformed(String),
    #[error("input length {found} is not a valid input length for level {k} (expected {expected:?})")]
    LengthMismatch { found: usize, k: u32, expected: Option<usize> },
    #[error("oracle returned a description of length {len} outside [{min}, {max}]")]
    OracleContract { len: usize, min: usize, max: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A finite binary string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        BitString(bits)
    }

    /// The length-`len` string encoding `value` big-endian.
    pub fn from_index(value: u64, len: u32) -> Self {
        BitString((0..len).rev().map(|i| i < 64 && value >> i & 1 == 1).collect())
    }

    /// Big-endian value; strings longer than 64 bits keep the low 64.
    pub fn to_index(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &b| acc << 1 | u64::from(b))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn prefix(&self, len: usize) -> BitString {
        BitString(self.0[..len.min(self.0.len())].to_vec())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitString {
    type Err = ExtractorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(ExtractorError::Malformed(format!("{s:?} is not a bit string"))),
            })
            .collect::<Result<_, _>>()
            .map(BitString)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `k` partial tables `{0,1}^{f_n} -> {0,1}^n`, stored by input index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialExtractorFamily {
    n: u32,
    f_n: u32,
    tables: Vec<Vec<Option<u32>>>,
}

/// `k` total tables `{0,1}^{f_n} -> {0,1}^n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractorFamily {
    n: u32,
    f_n: u32,
    tables: Vec<Vec<u32>>,
}

fn check_lengths(n: u32, f_n: u32) -> Result<(), ExtractorError> {
    if f_n > MAX_INPUT_BITS {
        return Err(ExtractorError::Unsupported(format!("input length {f_n} exceeds {MAX_INPUT_BITS}")));
    }
    if n > MAX_OUTPUT_BITS {
        return Err(ExtractorError::Unsupported(format!("output length {n} exceeds {MAX_OUTPUT_BITS}")));
    }
    Ok(())
}

impl PartialExtractorFamily {
    pub fn new(n: u32, f_n: u32, tables: Vec<Vec<Option<u32>>>) -> Result<Self, ExtractorError> {
        check_lengths(n, f_n)?;
        let size = 1usize << f_n;
        for (i, t) in tables.iter().enumerate() {
            if t.len() != size {
                return Err(ExtractorError::Malformed(format!("table {i} has {} entries, expected {size}", t.len())));
            }
            if let Some(bad) = t.iter().flatten().find(|&&y| u64::from(y) >> n != 0) {
                return Err(ExtractorError::Malformed(format!("table {i}: output {bad} needs more than {n} bits")));
            }
        }
        Ok(PartialExtractorFamily { n, f_n, tables })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f_n(&self) -> u32 {
        self.f_n
    }

    pub fn k(&self) -> usize {
        self.tables.len()
    }

    /// `Gamma_i(sigma)` with `i` counted from 0.
    pub fn get(&self, i: usize, sigma: usize) -> Option<u32> {
        self.tables[i][sigma]
    }

    pub fn tables(&self) -> &[Vec<Option<u32>>] {
        &self.tables
    }

    pub fn into_total(self) -> Result<ExtractorFamily, ExtractorError> {
        let f_n = self.f_n;
        let tables = self
            .tables
            .into_iter()
            .map(|t| {
                t.into_iter()
                    .enumerate()
                    .map(|(s, y)| {
                        y.ok_or(ExtractorError::Undefined {
                            sigma: BitString::from_index(s as u64, f_n),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExtractorFamily {
            n: self.n,
            f_n: self.f_n,
            tables,
        })
    }

    pub fn to_json(&self) -> String {
        let doc = FamilyDoc {
            n: self.n,
            f_n: self.f_n,
            k: self.k(),
            tables: self
                .tables
                .iter()
                .map(|t| {
                    t.iter()
                        .enumerate()
                        .map(|(s, y)| {
                            (
                                BitString::from_index(s as u64, self.f_n).to_string(),
                                y.map(|v| BitString::from_index(u64::from(v), self.n).to_string()),
                            )
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("families serialize")
    }

    /// Inputs missing from a table are undefined there.
    pub fn from_json(text: &str) -> Result<Self, ExtractorError> {
        let doc: FamilyDoc = serde_json::from_str(text).map_err(|e| {
            ExtractorError::Malformed(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        if doc.tables.len() != doc.k {
            return Err(ExtractorError::Malformed(format!("k = {} but {} tables", doc.k, doc.tables.len())));
        }
        check_lengths(doc.n, doc.f_n)?;
        let size = 1usize << doc.f_n;
        let mut tables = Vec::with_capacity(doc.k);
        for (i, t) in doc.tables.into_iter().enumerate() {
            let mut table = vec![None; size];
            for (input, output) in t {
                let sigma: BitString = input.parse()?;
                if sigma.len() != doc.f_n as usize {
                    return Err(ExtractorError::Malformed(format!("table {i}: input {input:?} is not {} bits", doc.f_n)));
                }
                if let Some(out) = output {
                    let y: BitString = out.parse()?;
                    if y.len() != doc.n as usize {
                        return Err(ExtractorError::Malformed(format!("table {i}: output {out:?} is not {} bits", doc.n)));
                    }
                    table[sigma.to_index() as usize] = Some(y.to_index() as u32);
                }
            }
            tables.push(table);
        }
        Self::new(doc.n, doc.f_n, tables)
    }
}

impl ExtractorFamily {
    pub fn new(n: u32, f_n: u32, tables: Vec<Vec<u32>>) -> Result<Self, ExtractorError> {
        PartialExtractorFamily::new(
            n,
            f_n,
            tables.iter().map(|t| t.iter().map(|&y| Some(y)).collect()).collect(),
        )?;
        Ok(ExtractorFamily { n, f_n, tables })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn f_n(&self) -> u32 {
        self.f_n
    }

    pub fn k(&self) -> usize {
        self.tables.len()
    }

    pub fn get(&self, i: usize, sigma: usize) -> u32 {
        self.tables[i][sigma]
    }

    /// `Gamma_i(sigma)` as a bit string, `i` counted from 0.
    pub fn output(&self, i: usize, sigma: &BitString) -> BitString {
        BitString::from_index(u64::from(self.tables[i][sigma.to_index() as usize]), self.n)
    }

    pub fn tables(&self) -> &[Vec<u32>] {
        &self.tables
    }

    pub fn inputs(&self) -> usize {
        1 << self.f_n
    }

    pub fn to_partial(&self) -> PartialExtractorFamily {
        PartialExtractorFamily {
            n: self.n,
            f_n: self.f_n,
            tables: self.tables.iter().map(|t| t.iter().map(|&y| Some(y)).collect()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_partial().to_json()
    }

    pub fn from_json(text: &str) -> Result<Self, ExtractorError> {
        PartialExtractorFamily::from_json(text)?.into_total()
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyDoc {
    n: u32,
    f_n: u32,
    k: usize,
    tables: Vec<BTreeMap<String, Option<String>>>,
}

/// Input `sigma` becomes the `sigma`-th edge in canonical order and
/// `Gamma_i(sigma)` its `i`-th vertex.
pub fn family_from_graph(g: &Hypergraph, f_n: u32) -> Result<ExtractorFamily, ExtractorError> {
    check_lengths(0, f_n)?;
    if g.edge_count() as u64 != 1u64 << f_n {
        return Err(ExtractorError::EdgeCountMismatch {
            edges: g.edge_count(),
            f_n,
        });
    }
    let n = g
        .log2_vertices()
        .ok_or(ExtractorError::VertexCountNotPowerOfTwo(g.n_vertices()))?;
    let tables = (0..g.k()).map(|i| g.edges().map(|e| e[i]).collect()).collect();
    ExtractorFamily::new(n, f_n, tables)
}

fn edge_rows(fam: &ExtractorFamily) -> impl Iterator<Item = Vec<Vertex>> + '_ {
    (0..fam.inputs()).map(move |s| (0..fam.k()).map(|i| fam.get(i, s)).collect())
}

/// One set edge `{Gamma_1(sigma), ..., Gamma_k(sigma)}` per input.
pub fn graph_from_family(fam: &ExtractorFamily) -> Result<Hypergraph, ExtractorError> {
    let nv = 1usize << fam.n();
    for (s, row) in edge_rows(fam).enumerate() {
        let mut sorted = row.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(ExtractorError::NonDistinct {
                sigma: BitString::from_index(s as u64, fam.f_n()),
            });
        }
    }
    Ok(Hypergraph::new(nv, fam.k(), EdgeKind::DistinctSet, edge_rows(fam))?)
}

/// One ordered tuple `(Gamma_1(sigma), ..., Gamma_k(sigma))` per input; no distinctness needed.
pub fn tuple_graph_from_family(fam: &ExtractorFamily) -> Result<Hypergraph, ExtractorError> {
    Ok(Hypergraph::new(1usize << fam.n(), fam.k(), EdgeKind::OrderedTuple, edge_rows(fam))?)
}

/// Pads each output set with the smallest unused strings up to `k`
/// elements and lists it in increasing order.
pub fn distinctify(fam: &ExtractorFamily) -> Result<ExtractorFamily, ExtractorError> {
    let k = fam.k();
    if (k as u64) > 1u64 << fam.n() {
        return Err(ExtractorError::TooManyOutputs { k, n: fam.n() });
    }
    let mut tables = vec![Vec::with_capacity(fam.inputs()); k];
    for s in 0..fam.inputs() {
        let mut set: Vec<u32> = (0..k).map(|i| fam.get(i, s)).collect();
        set.sort_unstable();
        set.dedup();
        let mut filler = 0u32;
        while set.len() < k {
            if set.binary_search(&filler).is_err() {
                let pos = set.partition_point(|&y| y < filler);
                set.insert(pos, filler);
            }
            filler += 1;
        }
        for (i, &y) in set.iter().enumerate() {
            tables[i].push(y);
        }
    }
    ExtractorFamily::new(fam.n(), fam.f_n(), tables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn bit_string_indexing() {
        assert_eq!(BitString::from_index(0, 3).to_string(), "000");
        assert_eq!(BitString::from_index(6, 3).to_string(), "110");
        assert_eq!(bits("0110").to_index(), 6);
        assert!(bits("011") < bits("100"));
        assert!("01x".parse::<BitString>().is_err());
        assert_eq!(bits("10110").prefix(2), bits("10"));
    }

    #[test]
    fn family_from_two_edges() {
        let g = Hypergraph::new(4, 2, EdgeKind::DistinctSet, [[2, 3], [0, 1]]).unwrap();
        let fam = family_from_graph(&g, 1).unwrap();
        assert_eq!(fam.output(0, &bits("0")), bits("00"));
        assert_eq!(fam.output(1, &bits("0")), bits("01"));
        assert_eq!(fam.output(0, &bits("1")), bits("10"));
        assert_eq!(fam.output(1, &bits("1")), bits("11"));
        assert_eq!(graph_from_family(&fam).unwrap(), g);

        let three = Hypergraph::new(4, 2, EdgeKind::DistinctSet, [[2, 3], [0, 1], [0, 2]]).unwrap();
        assert!(matches!(
            family_from_graph(&three, 1),
            Err(ExtractorError::EdgeCountMismatch { edges: 3, f_n: 1 })
        ));
        let odd = Hypergraph::new(3, 2, EdgeKind::DistinctSet, [[0, 1], [1, 2]]).unwrap();
        assert!(family_from_graph(&odd, 1).is_err());
    }

    #[test]
    fn constant_family_gives_parallel_edges() {
        let fam = ExtractorFamily::new(2, 2, vec![vec![1; 4], vec![3; 4]]).unwrap();
        let g = graph_from_family(&fam).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert!(g.edges().all(|e| e == [1, 3]));
    }

    #[test]
    fn colliding_outputs_are_rejected() {
        let fam = ExtractorFamily::new(2, 1, vec![vec![0, 1], vec![2, 1]]).unwrap();
        match graph_from_family(&fam) {
            Err(ExtractorError::NonDistinct { sigma }) => assert_eq!(sigma, bits("1")),
            other => panic!("{other:?}"),
        }
        assert_eq!(tuple_graph_from_family(&fam).unwrap().edge_count(), 2);
    }

    #[test]
    fn distinctify_fills_with_smallest_strings() {
        let fam = ExtractorFamily::new(2, 0, vec![vec![3], vec![3]]).unwrap();
        let d = distinctify(&fam).unwrap();
        assert_eq!(d.output(0, &BitString::default()), bits("00"));
        assert_eq!(d.output(1, &BitString::default()), bits("11"));
        let wide = ExtractorFamily::new(1, 0, vec![vec![0], vec![0], vec![1]]).unwrap();
        assert!(matches!(distinctify(&wide), Err(ExtractorError::TooManyOutputs { .. })));
    }

    #[test]
    fn json_round_trip_and_partial_tables() {
        let fam = ExtractorFamily::new(2, 1, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let text = fam.to_json();
        assert_eq!(text, r#"{"n":2,"f_n":1,"k":2,"tables":[{"0":"00","1":"10"},{"0":"01","1":"11"}]}"#);
        assert_eq!(ExtractorFamily::from_json(&text).unwrap(), fam);
        let partial = r#"{"n":2,"f_n":1,"k":1,"tables":[{"0":null}]}"#;
        let p = PartialExtractorFamily::from_json(partial).unwrap();
        assert_eq!(p.get(0, 0), None);
        assert_eq!(p.get(0, 1), None);
        assert!(ExtractorFamily::from_json(partial).is_err());
        assert!(PartialExtractorFamily::from_json(r#"{"n":2,"f_n":1,"k":1,"tables":[{"0":"111"}]}"#).is_err());
    }

    fn family_strategy() -> impl Strategy<Value = ExtractorFamily> {
        (1u32..4, 0u32..5, 1usize..4).prop_flat_map(|(n, f_n, k)| {
            proptest::collection::vec(proptest::collection::vec(0u32..1 << n, 1 << f_n), k)
                .prop_map(move |tables| ExtractorFamily::new(n, f_n, tables).unwrap())
        })
    }

    proptest! {
        #[test]
        fn distinctify_keeps_every_output(fam in family_strategy()) {
            prop_assume!((fam.k() as u64) <= 1u64 << fam.n());
            let d = distinctify(&fam).unwrap();
            for s in 0..fam.inputs() {
                let out: Vec<u32> = (0..fam.k()).map(|i| d.get(i, s)).collect();
                prop_assert!(out.windows(2).all(|w| w[0] < w[1]));
                for i in 0..fam.k() {
                    prop_assert!(out.contains(&fam.get(i, s)));
                }
            }
            prop_assert!(graph_from_family(&d).is_ok());
        }

        #[test]
        fn json_round_trip(fam in family_strategy()) {
            prop_assert_eq!(ExtractorFamily::from_json(&fam.to_json()).unwrap(), fam);
        }
    }
}
