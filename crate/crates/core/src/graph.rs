//! Finite oriented graphs with incidence maps `d0`, `d1`.
//!
//! Edges are oriented as given; there are no implicit inverse edges. Loops
//! and parallel edges are allowed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Which end of an edge: `d0` or `d1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    D0,
    D1,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::D0, Side::D1];

    pub fn index(self) -> usize {
        match self {
            Side::D0 => 0,
            Side::D1 => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub d0: VertexId,
    pub d1: VertexId,
}

impl Edge {
    pub fn new(id: u32, d0: u32, d1: u32) -> Edge {
        Edge {
            id: EdgeId(id),
            d0: VertexId(d0),
            d1: VertexId(d1),
        }
    }

    pub fn is_loop(&self) -> bool {
        self.d0 == self.d1
    }

    pub fn end(&self, side: Side) -> VertexId {
        match side {
            Side::D0 => self.d0,
            Side::D1 => self.d1,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no vertices")]
    Empty,
    #[error("duplicate vertex id {0}")]
    DuplicateVertex(VertexId),
    #[error("duplicate edge id {0}")]
    DuplicateEdge(EdgeId),
    #[error("edge {edge} references missing vertex {vertex}")]
    DanglingIncidence { edge: EdgeId, vertex: VertexId },
    #[error("graph is disconnected ({0} components)")]
    Disconnected(usize),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("unknown edge {0}")]
    UnknownEdge(EdgeId),
    #[error("edge set is not a spanning tree: {0}")]
    NotSpanningTree(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeMap<EdgeId, Edge>,
}

impl OrientedGraph {
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<OrientedGraph, GraphError> {
        let mut vs = BTreeSet::new();
        for v in vertices {
            if !vs.insert(v) {
                return Err(GraphError::DuplicateVertex(v));
            }
        }
        if vs.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut es = BTreeMap::new();
        for e in edges {
            for v in [e.d0, e.d1] {
                if !vs.contains(&v) {
                    return Err(GraphError::DanglingIncidence {
                        edge: e.id,
                        vertex: v,
                    });
                }
            }
            if es.insert(e.id, e).is_some() {
                return Err(GraphError::DuplicateEdge(e.id));
            }
        }
        Ok(OrientedGraph {
            vertices: vs,
            edges: es,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Vertices in ascending id order.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    /// Edges in ascending id order.
    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.values()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edge(&self, e: EdgeId) -> Result<&Edge, GraphError> {
        self.edges.get(&e).ok_or(GraphError::UnknownEdge(e))
    }

    /// Edges touching `v` at either end, ascending id order.
    pub fn incident(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.values().filter(move |e| e.d0 == v || e.d1 == v)
    }

    pub fn components(&self) -> Vec<Vec<VertexId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.vertices() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for e in self.incident(v) {
                    for w in [e.d0, e.d1] {
                        if seen.insert(w) {
                            comp.push(w);
                            queue.push_back(w);
                        }
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectivityReport {
    pub components: Vec<Vec<VertexId>>,
}

impl ConnectivityReport {
    pub fn connected(&self) -> bool {
        self.components.len() == 1
    }
}

pub fn validate_graph(g: &OrientedGraph) -> ConnectivityReport {
    ConnectivityReport {
        components: g.components(),
    }
}

/// `|E| − |V| + 1`, the rank of the free fundamental group.
pub fn free_rank(g: &OrientedGraph) -> Result<usize, GraphError> {
    let comps = g.components().len();
    if comps != 1 {
        return Err(GraphError::Disconnected(comps));
    }
    Ok(g.edge_count() + 1 - g.vertex_count())
}

/// A maximal subtree, rooted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanningTree {
    root: VertexId,
    tree_edges: BTreeSet<EdgeId>,
    /// child vertex -> (tree edge, parent vertex)
    parent: BTreeMap<VertexId, (EdgeId, VertexId)>,
}

impl SpanningTree {
    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.tree_edges.iter().copied()
    }

    pub fn contains(&self, e: EdgeId) -> bool {
        self.tree_edges.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.tree_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree_edges.is_empty()
    }

    /// Tree edge and parent vertex of `v`, `None` for the root.
    pub fn parent(&self, v: VertexId) -> Option<(EdgeId, VertexId)> {
        self.parent.get(&v).copied()
    }

    /// Check that `edges` form a spanning tree of `g` and root it at `root`.
    pub fn from_edges(
        g: &OrientedGraph,
        root: VertexId,
        edges: impl IntoIterator<Item = EdgeId>,
    ) -> Result<SpanningTree, GraphError> {
        if !g.has_vertex(root) {
            return Err(GraphError::UnknownVertex(root));
        }
        let mut tree_edges = BTreeSet::new();
        for e in edges {
            let edge = g.edge(e)?;
            if edge.is_loop() {
                return Err(GraphError::NotSpanningTree(format!("{e} is a loop")));
            }
            if !tree_edges.insert(e) {
                return Err(GraphError::NotSpanningTree(format!("{e} listed twice")));
            }
        }
        if tree_edges.len() + 1 != g.vertex_count() {
            return Err(GraphError::NotSpanningTree(format!(
                "{} edges for {} vertices",
                tree_edges.len(),
                g.vertex_count()
            )));
        }
        let parent = bfs_parents(g, root, |e| tree_edges.contains(&e.id));
        if parent.len() + 1 != g.vertex_count() {
            return Err(GraphError::NotSpanningTree(
                "edges do not connect every vertex".into(),
            ));
        }
        Ok(SpanningTree {
            root,
            tree_edges,
            parent,
        })
    }
}

fn bfs_parents(
    g: &OrientedGraph,
    root: VertexId,
    allowed: impl Fn(&Edge) -> bool,
) -> BTreeMap<VertexId, (EdgeId, VertexId)> {
    let mut parent = BTreeMap::new();
    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for e in g.incident(v).filter(|e| !e.is_loop() && allowed(e)) {
            let w = if e.d0 == v { e.d1 } else { e.d0 };
            if seen.insert(w) {
                parent.insert(w, (e.id, v));
                queue.push_back(w);
            }
        }
    }
    parent
}

/// Breadth-first spanning tree from `root`, scanning incident edges in id order.
pub fn spanning_tree(g: &OrientedGraph, root: VertexId) -> Result<SpanningTree, GraphError> {
    if !g.has_vertex(root) {
        return Err(GraphError::UnknownVertex(root));
    }
    let parent = bfs_parents(g, root, |_| true);
    if parent.len() + 1 != g.vertex_count() {
        return Err(GraphError::Disconnected(g.components().len()));
    }
    let tree_edges = parent.values().map(|&(e, _)| e).collect();
    Ok(SpanningTree {
        root,
        tree_edges,
        parent,
    })
}

/// Isomorphism of oriented multigraphs (orientation and multiplicities kept).
pub fn graphs_isomorphic(a: &OrientedGraph, b: &OrientedGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let av: Vec<VertexId> = a.vertices().collect();
    let bv: Vec<VertexId> = b.vertices().collect();
    let mult = |g: &OrientedGraph, vs: &[VertexId]| {
        let pos: BTreeMap<VertexId, usize> = vs.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let n = vs.len();
        let mut m = vec![0usize; n * n];
        for e in g.edges() {
            m[pos[&e.d0] * n + pos[&e.d1]] += 1;
        }
        m
    };
    let n = av.len();
    let ma = mult(a, &av);
    let mb = mult(b, &bv);
    let signature = |m: &[usize], i: usize| {
        let out: usize = (0..n).map(|j| m[i * n + j]).sum();
        let inn: usize = (0..n).map(|j| m[j * n + i]).sum();
        (out, inn, m[i * n + i])
    };
    let sa: Vec<_> = (0..n).map(|i| signature(&ma, i)).collect();
    let sb: Vec<_> = (0..n).map(|i| signature(&mb, i)).collect();
    let mut sorted_a = sa.clone();
    let mut sorted_b = sb.clone();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return false;
    }

    fn extend(
        i: usize,
        n: usize,
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
        ma: &[usize],
        mb: &[usize],
        sa: &[(usize, usize, usize)],
        sb: &[(usize, usize, usize)],
    ) -> bool {
        if i == n {
            return true;
        }
        for j in 0..n {
            if used[j] || sa[i] != sb[j] {
                continue;
            }
            let consistent = (0..i).all(|k| {
                let l = assign[k];
                ma[i * n + k] == mb[j * n + l] && ma[k * n + i] == mb[l * n + j]
            });
            if !consistent {
                continue;
            }
            used[j] = true;
            assign.push(j);
            if extend(i + 1, n, assign, used, ma, mb, sa, sb) {
                return true;
            }
            assign.pop();
            used[j] = false;
        }
        false
    }

    extend(
        0,
        n,
        &mut Vec::with_capacity(n),
        &mut vec![false; n],
        &ma,
        &mb,
        &sa,
        &sb,
    )
}
