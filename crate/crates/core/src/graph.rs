//! Weighted undirected graphs in forward-star form, and contraction.

use alloc::vec;
use alloc::vec::Vec;

use crate::matching::Matching;
use crate::{EdgeId, Error, NodeId, Weight};

/// An undirected edge with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Weight,
}

/// One directed half of an undirected edge, as seen from its source node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub target: NodeId,
    pub weight: Weight,
    pub edge: EdgeId,
}

/// Weighted undirected graph stored as an adjacency array.
///
/// Every edge `{u, v}` appears once in [`Graph::edges`] and once in each of
/// the two adjacency segments, with the same weight. Edge weights are
/// positive, node weights nonnegative, and there are no self-loops or
/// parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    xadj: Vec<usize>,
    adjncy: Vec<NodeId>,
    arc_weight: Vec<Weight>,
    arc_edge: Vec<EdgeId>,
    edges: Vec<Edge>,
    node_weight: Vec<Weight>,
    coords: Option<Vec<[f64; 2]>>,
}

impl Graph {
    /// Builds a graph from an edge list.
    ///
    /// Parallel edges are merged by summing their weights; the merged edge
    /// keeps the id of its first occurrence, and ids are otherwise assigned
    /// in input order.
    pub fn from_edges(
        n: usize,
        edges: &[(NodeId, NodeId, Weight)],
        node_weight: Vec<Weight>,
    ) -> Result<Self, Error> {
        if node_weight.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: node_weight.len(),
            });
        }
        if let Some(v) = node_weight.iter().position(|&c| c < 0) {
            return Err(Error::NegativeNodeWeight(v as NodeId));
        }
        let mut canon = Vec::with_capacity(edges.len());
        for (pos, &(u, v, w)) in edges.iter().enumerate() {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::NodeOutOfRange {
                        node: x as usize,
                        n,
                    });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if w <= 0 {
                return Err(Error::NonPositiveEdgeWeight { u, v, weight: w });
            }
            canon.push((u.min(v), u.max(v), w, pos));
        }
        canon.sort_unstable_by_key(|&(u, v, _, pos)| (u, v, pos));
        let mut merged: Vec<(usize, Edge)> = Vec::with_capacity(canon.len());
        for (u, v, w, pos) in canon {
            match merged.last_mut() {
                Some((_, e)) if e.u == u && e.v == v => e.weight += w,
                _ => merged.push((pos, Edge { u, v, weight: w })),
            }
        }
        merged.sort_unstable_by_key(|&(pos, _)| pos);
        let edges = merged.into_iter().map(|(_, e)| e).collect();
        Ok(Self::from_simple_edges(n, edges, node_weight))
    }

    /// Builds a graph with unit node weights.
    pub fn unit(n: usize, edges: &[(NodeId, NodeId, Weight)]) -> Result<Self, Error> {
        Self::from_edges(n, edges, vec![1; n])
    }

    /// Builds the adjacency arrays from edges that are already simple,
    /// canonical (`u < v`) and validated.
    pub(crate) fn from_simple_edges(n: usize, edges: Vec<Edge>, node_weight: Vec<Weight>) -> Self {
        let mut xadj = vec![0usize; n + 1];
        for e in &edges {
            xadj[e.u as usize + 1] += 1;
            xadj[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            xadj[i + 1] += xadj[i];
        }
        let arcs = xadj[n];
        let mut fill = xadj.clone();
        let mut adjncy = vec![0; arcs];
        let mut arc_weight = vec![0; arcs];
        let mut arc_edge = vec![0; arcs];
        for (id, e) in edges.iter().enumerate() {
            for (from, to) in [(e.u, e.v), (e.v, e.u)] {
                let slot = fill[from as usize];
                fill[from as usize] += 1;
                adjncy[slot] = to;
                arc_weight[slot] = e.weight;
                arc_edge[slot] = id as EdgeId;
            }
        }
        Self {
            xadj,
            adjncy,
            arc_weight,
            arc_edge,
            edges,
            node_weight,
            coords: None,
        }
    }

    /// Attaches 2D coordinates, one per node.
    pub fn with_coords(mut self, coords: Vec<[f64; 2]>) -> Result<Self, Error> {
        if coords.len() != self.n() {
            return Err(Error::LengthMismatch {
                expected: self.n(),
                got: coords.len(),
            });
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.node_weight.len()
    }

    /// Number of undirected edges.
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> Edge {
        self.edges[e as usize]
    }

    pub fn node_weight(&self, v: NodeId) -> Weight {
        self.node_weight[v as usize]
    }

    pub fn node_weights(&self) -> &[Weight] {
        &self.node_weight
    }

    pub fn total_node_weight(&self) -> Weight {
        self.node_weight.iter().sum()
    }

    pub fn max_node_weight(&self) -> Weight {
        self.node_weight.iter().copied().max().unwrap_or(0)
    }

    pub fn total_edge_weight(&self) -> Weight {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.xadj[v as usize + 1] - self.xadj[v as usize]
    }

    /// Neighbors of `v` with the connecting edge weight.
    pub fn neighbors(&self, v: NodeId) -> impl Iterator<Item = (NodeId, Weight)> + '_ {
        let range = self.xadj[v as usize]..self.xadj[v as usize + 1];
        self.adjncy[range.clone()]
            .iter()
            .copied()
            .zip(self.arc_weight[range].iter().copied())
    }

    pub fn arcs(&self, v: NodeId) -> impl Iterator<Item = Arc> + '_ {
        (self.xadj[v as usize]..self.xadj[v as usize + 1]).map(move |i| Arc {
            target: self.adjncy[i],
            weight: self.arc_weight[i],
            edge: self.arc_edge[i],
        })
    }

    /// Id of the edge `{u, v}`, if present.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        self.arcs(u).find(|a| a.target == v).map(|a| a.edge)
    }

    pub fn coords(&self) -> Option<&[[f64; 2]]> {
        self.coords.as_deref()
    }

    /// Induced subgraph on `nodes` (in that order), with coordinates carried over.
    pub fn induced(&self, nodes: &[NodeId]) -> Self {
        self.induced_with_edges(nodes).0
    }

    /// Induced subgraph plus, for each of its edges, the id of the original
    /// edge. Edges keep their relative id order, so inducing on `0..n` in
    /// order reproduces the graph exactly.
    pub fn induced_with_edges(&self, nodes: &[NodeId]) -> (Self, Vec<EdgeId>) {
        let mut local = vec![NodeId::MAX; self.n()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v as usize] = i as NodeId;
        }
        let mut kept = Vec::new();
        for &v in nodes {
            for arc in self.arcs(v) {
                if local[arc.target as usize] != NodeId::MAX && v < arc.target {
                    kept.push(arc.edge);
                }
            }
        }
        kept.sort_unstable();
        let edges = kept
            .iter()
            .map(|&id| {
                let e = self.edge(id);
                let (a, b) = (local[e.u as usize], local[e.v as usize]);
                Edge {
                    u: a.min(b),
                    v: a.max(b),
                    weight: e.weight,
                }
            })
            .collect();
        let weights = nodes.iter().map(|&v| self.node_weight(v)).collect();
        let mut sub = Self::from_simple_edges(nodes.len(), edges, weights);
        sub.coords = self
            .coords
            .as_ref()
            .map(|c| nodes.iter().map(|&v| c[v as usize]).collect());
        (sub, kept)
    }
}

/// Contracts every edge of `matching`.
///
/// Coarse ids are handed out in fine-id scan order: the first endpoint of a
/// matched pair that the scan meets claims the next id for both. Parallel
/// coarse edges are merged additively and matched edges disappear. Returns
/// the coarse graph and the fine-to-coarse node map.
pub fn contract(g: &Graph, matching: &Matching) -> Result<(Graph, Vec<NodeId>), Error> {
    let n = g.n();
    matching.validate(g)?;

    let mut coarse_map = vec![NodeId::MAX; n];
    let mut members: Vec<[NodeId; 2]> = Vec::with_capacity(n);
    for v in 0..n as NodeId {
        if coarse_map[v as usize] != NodeId::MAX {
            continue;
        }
        let id = members.len() as NodeId;
        coarse_map[v as usize] = id;
        match matching.mate(v) {
            Some(u) => {
                coarse_map[u as usize] = id;
                members.push([v, u]);
            }
            None => members.push([v, v]),
        }
    }
    let cn = members.len();

    let mut node_weight = Vec::with_capacity(cn);
    let mut edges = Vec::new();
    let mut acc = vec![0 as Weight; cn];
    let mut touched = Vec::new();
    for (c, pair) in members.iter().enumerate() {
        let parts: &[NodeId] = if pair[0] == pair[1] {
            &pair[..1]
        } else {
            &pair[..]
        };
        node_weight.push(parts.iter().map(|&v| g.node_weight(v)).sum());
        for &v in parts {
            for (w, weight) in g.neighbors(v) {
                let t = coarse_map[w as usize] as usize;
                if t == c {
                    continue;
                }
                if acc[t] == 0 {
                    touched.push(t);
                }
                acc[t] += weight;
            }
        }
        touched.sort_unstable();
        for &t in &touched {
            if t > c {
                edges.push(Edge {
                    u: c as NodeId,
                    v: t as NodeId,
                    weight: acc[t],
                });
            }
            acc[t] = 0;
        }
        touched.clear();
    }

    let mut coarse = Graph::from_simple_edges(cn, edges, node_weight);
    if let Some(coords) = g.coords() {
        let merged = members
            .iter()
            .map(|pair| {
                let parts: &[NodeId] = if pair[0] == pair[1] {
                    &pair[..1]
                } else {
                    &pair[..]
                };
                let total: Weight = parts.iter().map(|&v| g.node_weight(v)).sum();
                let mut xy = [0.0f64; 2];
                for &v in parts {
                    let f = if total > 0 {
                        g.node_weight(v) as f64 / total as f64
                    } else {
                        1.0 / parts.len() as f64
                    };
                    xy[0] += f * coords[v as usize][0];
                    xy[1] += f * coords[v as usize][1];
                }
                xy
            })
            .collect();
        coarse.coords = Some(merged);
    }
    Ok((coarse, coarse_map))
}

/// One contraction step: the matching applied to the finer graph, the
/// resulting fine-to-coarse map, and the coarse graph.
#[derive(Debug, Clone)]
pub struct Level {
    pub matching: Matching,
    pub coarse_map: Vec<NodeId>,
    pub coarse: Graph,
}

/// Stack of contraction levels, finest first. The input graph itself is not
/// stored; level `i` maps graph `i` onto graph `i + 1`, with graph 0 being the
/// input.
#[derive(Debug, Clone, Default)]
pub struct Hierarchy {
    pub levels: Vec<Level>,
}

impl Hierarchy {
    /// Number of contraction steps.
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Graph at `index`, where 0 is `input` and `depth()` is the coarsest.
    pub fn graph<'a>(&'a self, input: &'a Graph, index: usize) -> &'a Graph {
        match index {
            0 => input,
            i => &self.levels[i - 1].coarse,
        }
    }

    pub fn coarsest<'a>(&'a self, input: &'a Graph) -> &'a Graph {
        self.graph(input, self.depth())
    }
}
