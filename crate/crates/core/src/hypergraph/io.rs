use serde::{Deserialize, Serialize};

use super::{EdgeKind, GraphError, Hypergraph, Vertex};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    version: u64,
    n_vertices: usize,
    k: usize,
    edge_kind: EdgeKind,
    edges: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct GraphDocRef<'a> {
    version: u64,
    n_vertices: usize,
    k: usize,
    edge_kind: EdgeKind,
    edges: Vec<&'a [Vertex]>,
}

impl Hypergraph {
    /// Compact JSON with edges in canonical order.
    pub fn to_json(&self) -> String {
        let doc = GraphDocRef {
            version: 1,
            n_vertices: self.n_vertices,
            k: self.k,
            edge_kind: self.kind,
            edges: self.edges().collect(),
        };
        serde_json::to_string(&doc).expect("graph documents always serialize")
    }

    pub fn to_json_bytes(&self) -> Vec<u8> {
        self.to_json().into_bytes()
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| GraphError::Malformed {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.version != 1 {
            return Err(GraphError::UnsupportedVersion(doc.version));
        }
        let mut edges = Vec::with_capacity(doc.edges.len());
        for (idx, e) in doc.edges.into_iter().enumerate() {
            let mut row = Vec::with_capacity(e.len());
            for v in e {
                if v >= doc.n_vertices as u64 {
                    return Err(GraphError::InvalidVertex {
                        edge: idx,
                        vertex: v,
                        n_vertices: doc.n_vertices,
                    });
                }
                row.push(v as Vertex);
            }
            edges.push(row);
        }
        Hypergraph::new(doc.n_vertices, doc.k, doc.edge_kind, edges)
    }

    pub fn from_json_bytes(bytes: &[u8]) -> Result<Self, GraphError> {
        let text = std::str::from_utf8(bytes).map_err(|e| GraphError::Malformed {
            line: 0,
            column: e.valid_up_to(),
            message: "document is not UTF-8".into(),
        })?;
        Self::from_json(text)
    }
}
