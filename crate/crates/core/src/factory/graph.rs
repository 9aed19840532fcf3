//! Simple undirected graphs and their two text encodings.

use serde::Deserialize;

use super::FactoryError;

/// Simple undirected graph on vertices `0..n`. Edges are stored as `(u, v)`
/// with `u < v`, sorted, so edge ids are stable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, FactoryError> {
        let mut es = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(FactoryError::InvalidGraph(format!("edge {a}-{b} names a vertex outside 0..{n}")));
            }
            if a == b {
                return Err(FactoryError::InvalidGraph(format!("loop at vertex {a}")));
            }
            es.push((a.min(b), a.max(b)));
        }
        es.sort_unstable();
        if let Some(w) = es.windows(2).find(|w| w[0] == w[1]) {
            return Err(FactoryError::InvalidGraph(format!("repeated edge {}-{}", w[0].0, w[0].1)));
        }
        Ok(Graph { n, edges: es })
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph { n, edges }
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Ids of the edges at `v`, ascending.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].0 == v || self.edges[e].1 == v).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.incident(v).len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn is_vertex_cover(&self, cover: &[usize]) -> bool {
        self.edges.iter().all(|(u, v)| cover.contains(u) || cover.contains(v))
    }

    /// Edge label `u-v` used in gadget names.
    pub fn edge_label(&self, e: usize) -> String {
        let (u, v) = self.edges[e];
        format!("{u}-{v}")
    }

    /// Parses `u v` pairs, one per line. Blank lines and `#` comments are skipped.
    /// The vertex count is one more than the largest endpoint.
    pub fn parse_edge_list(text: &str) -> Result<Self, FactoryError> {
        let mut edges = Vec::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let nums: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| FactoryError::InvalidGraph(format!("line {}: '{s}' is not a vertex number", no + 1)))
            };
            match nums.as_slice() {
                [a, b] => edges.push((parse(a)?, parse(b)?)),
                _ => return Err(FactoryError::InvalidGraph(format!("line {}: expected two vertices", no + 1))),
            }
        }
        let n = edges.iter().map(|&(a, b)| a.max(b) + 1).max().unwrap_or(0);
        Graph::new(n, edges)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: usize,
    edges: Vec<[usize; 2]>,
    #[serde(default)]
    parts: Option<Vec<usize>>,
}

/// Reads either a JSON object `{vertices, edges, parts?}` or an edge list.
/// `parts` gives the part index of each vertex.
pub fn parse_graph(text: &str) -> Result<(Graph, Option<Vec<usize>>), FactoryError> {
    if text.trim_start().starts_with('{') {
        let file: GraphFile = serde_json::from_str(text).map_err(|e| FactoryError::InvalidGraph(e.to_string()))?;
        let g = Graph::new(file.vertices, file.edges.into_iter().map(|[a, b]| (a, b)))?;
        if let Some(p) = &file.parts {
            if p.len() != file.vertices {
                return Err(FactoryError::InvalidGraph("parts must list one entry per vertex".into()));
            }
        }
        Ok((g, file.parts))
    } else {
        Ok((Graph::parse_edge_list(text)?, None))
    }
}
