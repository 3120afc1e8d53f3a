//! Undirected multigraphs, edge-list ingestion, degree-3 reduction and the
//! union-find ground truth every scheme is checked against.

use std::collections::HashMap;

use thiserror::Error;

use crate::dsu::Dsu;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge {edge}: vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { edge: usize, vertex: usize, n: usize },
    #[error("edge {edge}: self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed line {0:?}")]
    Malformed(String),
    #[error("vertex {vertex} out of range (n = {n})")]
    OutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("expected {expected} edges, found {found}")]
    EdgeCount { expected: usize, found: usize },
    #[error("empty document")]
    Empty,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaultError {
    #[error("edge id {0} out of range")]
    InvalidEdge(usize),
    #[error("edge id {0} listed twice")]
    Duplicate(usize),
}

/// Immutable undirected multigraph. Edge ids are positions in `edges`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl Graph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut adj = vec![Vec::new(); n];
        for (id, &(u, v)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { edge: id, vertex: x, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { edge: id, vertex: u });
            }
            adj[u].push((v, id));
            adj[v].push((u, id));
        }
        Ok(Graph { n, edges, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: usize) -> (usize, usize) {
        self.edges[e]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `(neighbor, edge id)` pairs, in edge-id order.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn other(&self, e: usize, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    /// Rank of each edge among the edges joining the same vertex pair.
    /// All zeros for a simple graph.
    pub fn parallel_ranks(&self) -> Vec<u32> {
        let mut seen: HashMap<(usize, usize), u32> = HashMap::new();
        self.edges
            .iter()
            .map(|&(u, v)| {
                let c = seen.entry((u.min(v), u.max(v))).or_insert(0);
                *c += 1;
                *c - 1
            })
            .collect()
    }

    pub fn is_simple(&self) -> bool {
        self.parallel_ranks().iter().all(|&r| r == 0)
    }

    pub fn components(&self) -> Partition {
        oracle_components(self, &FaultSet::empty())
    }

    pub fn is_connected(&self) -> bool {
        self.components().count <= 1
    }

    /// Subgraph on `vertices` keeping the edges for which `keep` holds.
    /// Vertex `i` of the result is `vertices[i]`.
    pub fn induced(&self, vertices: &[usize], keep: impl Fn(usize) -> bool) -> Subgraph {
        let mut local = HashMap::with_capacity(vertices.len());
        for (i, &v) in vertices.iter().enumerate() {
            local.insert(v, i);
        }
        let mut edges = Vec::new();
        let mut emap = Vec::new();
        for &v in vertices {
            for &(u, e) in &self.adj[v] {
                if v < u && keep(e) {
                    if let Some(&lu) = local.get(&u) {
                        edges.push((local[&v], lu));
                        emap.push(e);
                    }
                }
            }
        }
        // keep edge ids ordered like the parent graph
        let mut order: Vec<usize> = (0..edges.len()).collect();
        order.sort_by_key(|&i| emap[i]);
        let edges: Vec<_> = order.iter().map(|&i| edges[i]).collect();
        let emap: Vec<_> = order.iter().map(|&i| emap[i]).collect();
        Subgraph {
            graph: Graph::new(vertices.len(), edges).expect("induced subgraph is valid"),
            vmap: vertices.to_vec(),
            emap,
        }
    }
}

/// A graph together with maps back to its parent's vertex and edge ids.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    pub vmap: Vec<usize>,
    pub emap: Vec<usize>,
}

/// Parses the edge-list format: a header `n m` followed by `m` lines `u v`.
/// Lines starting with `#` and blank lines are skipped.
pub fn load_graph(text: &str) -> Result<Graph, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(ParseError { line: 1, kind: ParseErrorKind::Empty })?;
    let (n, m) = parse_pair(header).ok_or_else(|| ParseError {
        line: hline,
        kind: ParseErrorKind::Malformed(header.to_string()),
    })?;
    let mut edges = Vec::with_capacity(m);
    let mut last = hline;
    for (line, text) in lines {
        last = line;
        if edges.len() == m {
            return Err(ParseError {
                line,
                kind: ParseErrorKind::EdgeCount { expected: m, found: m + 1 },
            });
        }
        let (u, v) = parse_pair(text).ok_or_else(|| ParseError {
            line,
            kind: ParseErrorKind::Malformed(text.to_string()),
        })?;
        for x in [u, v] {
            if x >= n {
                return Err(ParseError { line, kind: ParseErrorKind::OutOfRange { vertex: x, n } });
            }
        }
        if u == v {
            return Err(ParseError { line, kind: ParseErrorKind::SelfLoop(u) });
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(ParseError {
            line: last,
            kind: ParseErrorKind::EdgeCount { expected: m, found: edges.len() },
        });
    }
    Ok(Graph::new(n, edges).expect("validated while parsing"))
}

fn parse_pair(s: &str) -> Option<(usize, usize)> {
    let mut it = s.split_whitespace();
    let a = it.next()?.parse().ok()?;
    let b = it.next()?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

/// Writes `g` in the format read by [`load_graph`].
pub fn write_graph(g: &Graph) -> String {
    let mut s = format!("{} {}\n", g.n(), g.m());
    for &(u, v) in g.edges() {
        s.push_str(&format!("{u} {v}\n"));
    }
    s
}

/// A validated set of distinct edge ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FaultSet {
    ids: Vec<usize>,
}

impl FaultSet {
    pub fn new(g: &Graph, ids: &[usize]) -> Result<Self, FaultError> {
        let mut seen = vec![false; g.m()];
        for &e in ids {
            if e >= g.m() {
                return Err(FaultError::InvalidEdge(e));
            }
            if seen[e] {
                return Err(FaultError::Duplicate(e));
            }
            seen[e] = true;
        }
        Ok(FaultSet { ids: ids.to_vec() })
    }

    pub fn empty() -> Self {
        FaultSet { ids: Vec::new() }
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn mask(&self, m: usize) -> Vec<bool> {
        let mut out = vec![false; m];
        for &e in &self.ids {
            out[e] = true;
        }
        out
    }
}

/// Vertex partition with dense component ids in order of smallest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub label: Vec<usize>,
    pub count: usize,
}

impl Partition {
    pub fn same(&self, a: usize, b: usize) -> bool {
        self.label[a] == self.label[b]
    }

    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.label.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

/// Exact components of `G − F`.
pub fn oracle_components(g: &Graph, f: &FaultSet) -> Partition {
    let dead = f.mask(g.m());
    let mut dsu = Dsu::new(g.n());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        if !dead[e] {
            dsu.union(u, v);
        }
    }
    Partition { count: dsu.set_count(), label: dsu.labels() }
}

#[derive(Clone, Debug)]
pub struct Degree3Reduction {
    pub reduced: Graph,
    /// original edge id → reduced edge id
    pub edge_map: Vec<usize>,
    /// original vertex id → representative reduced vertex id
    pub vertex_map: Vec<usize>,
}

impl Degree3Reduction {
    /// The trivial reduction, valid when `g` already has maximum degree ≤ 3.
    pub fn identity(g: &Graph) -> Self {
        assert!(g.max_degree() <= 3);
        Degree3Reduction {
            reduced: g.clone(),
            edge_map: (0..g.m()).collect(),
            vertex_map: (0..g.n()).collect(),
        }
    }

    pub fn map_faults(&self, f: &FaultSet) -> FaultSet {
        FaultSet { ids: f.ids().iter().map(|&e| self.edge_map[e]).collect() }
    }
}

/// Replaces every vertex of degree d ≥ 3 by a d-cycle, attaching its i-th
/// incident edge to the i-th cycle vertex. Lower-degree vertices are kept.
/// Original edges keep their ids; cycle edges are numbered after them.
pub fn reduce_degree3(g: &Graph) -> Degree3Reduction {
    let mut vertex_map = Vec::with_capacity(g.n());
    // slot[v][i] = reduced vertex carrying the i-th incident edge of v
    let mut slot: Vec<Vec<usize>> = Vec::with_capacity(g.n());
    let mut next = 0;
    for v in 0..g.n() {
        let d = g.degree(v);
        if d >= 3 {
            slot.push((next..next + d).collect());
            vertex_map.push(next);
            next += d;
        } else {
            slot.push(vec![next; d]);
            vertex_map.push(next);
            next += 1;
        }
    }
    let mut endpoint = vec![[usize::MAX; 2]; g.m()];
    for v in 0..g.n() {
        for (i, &(_, e)) in g.neighbors(v).iter().enumerate() {
            let (a, _) = g.edge(e);
            let side = if a == v { 0 } else { 1 };
            endpoint[e][side] = slot[v][i];
        }
    }
    let mut edges: Vec<(usize, usize)> = endpoint.iter().map(|p| (p[0], p[1])).collect();
    for v in 0..g.n() {
        let d = g.degree(v);
        if d >= 3 {
            for i in 0..d {
                edges.push((slot[v][i], slot[v][(i + 1) % d]));
            }
        }
    }
    let reduced = Graph::new(next, edges).expect("reduction yields a valid graph");
    Degree3Reduction { reduced, edge_map: (0..g.m()).collect(), vertex_map }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_triangle_and_comments() {
        let g = load_graph("# tri\n3 3\n0 1\n\n1 2\n# x\n0 2\n").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert_eq!(g.edge(2), (0, 2));
        assert_eq!(g.neighbors(0), &[(1, 0), (2, 2)]);
    }

    #[test]
    fn parses_isolated_vertices() {
        let g = load_graph("2 0").unwrap();
        assert_eq!((g.n(), g.m()), (2, 0));
        assert_eq!(g.components().count, 2);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = load_graph("3 2\n0 1\n1 x\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::Malformed(_)));
        let e = load_graph("3 2\n0 1\n1 3\n").unwrap_err();
        assert_eq!(e, ParseError { line: 3, kind: ParseErrorKind::OutOfRange { vertex: 3, n: 3 } });
        let e = load_graph("3 1\n# c\n2 2\n").unwrap_err();
        assert_eq!(e, ParseError { line: 3, kind: ParseErrorKind::SelfLoop(2) });
        let e = load_graph("3 2\n0 1\n").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::EdgeCount { expected: 2, found: 1 }));
        let e = load_graph("3 1\n0 1\n1 2\n").unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn fault_set_validation() {
        let g = load_graph("3 2\n0 1\n1 2").unwrap();
        assert_eq!(FaultSet::new(&g, &[2]), Err(FaultError::InvalidEdge(2)));
        assert_eq!(FaultSet::new(&g, &[1, 1]), Err(FaultError::Duplicate(1)));
        assert_eq!(FaultSet::new(&g, &[1, 0]).unwrap().len(), 2);
    }

    #[test]
    fn parallel_ranks_count_copies() {
        let g = Graph::new(3, vec![(0, 1), (1, 0), (1, 2), (0, 1)]).unwrap();
        assert_eq!(g.parallel_ranks(), vec![0, 1, 0, 2]);
        assert!(!g.is_simple());
    }

    #[test]
    fn star_center_becomes_triangle() {
        let g = Graph::new(4, vec![(0, 1), (0, 2), (0, 3)]).unwrap();
        let r = reduce_degree3(&g);
        assert_eq!(r.reduced.n(), 6);
        assert_eq!(r.reduced.max_degree(), 3);
        assert_eq!(r.reduced.m(), 6);
    }

    #[test]
    fn path_is_unchanged() {
        let g = Graph::new(3, vec![(0, 1), (1, 2)]).unwrap();
        let r = reduce_degree3(&g);
        assert_eq!(r.reduced, g);
    }
}
