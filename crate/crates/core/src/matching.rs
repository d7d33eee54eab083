//! Sequential approximate maximum-weight matchings over rated edges.
//!
//! All matchers maximize the edge *rating*, not the raw edge weight. Ties in
//! rating are broken by the smaller edge id, which gives every matcher a
//! total order on edges and makes results reproducible.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::graph::Graph;
use crate::{EdgeId, Error, NodeId, Weight};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedEdge {
    pub edge: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub weight: Weight,
    pub rating: f64,
}

/// A set of vertex-disjoint edges together with the symmetric mate array.
#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    edges: Vec<MatchedEdge>,
    mate: Vec<Option<NodeId>>,
}

impl Matching {
    pub fn empty(n: usize) -> Self {
        Self {
            edges: Vec::new(),
            mate: vec![None; n],
        }
    }

    /// Matching from edge ids, rated by raw weight.
    pub fn from_edges(g: &Graph, ids: &[EdgeId]) -> Result<Self, Error> {
        let ratings: Vec<f64> = g.edges().iter().map(|e| e.weight as f64).collect();
        Self::from_rated_edges(g, ids, &ratings)
    }

    /// Matching from edge ids with ratings indexed by edge id.
    pub fn from_rated_edges(g: &Graph, ids: &[EdgeId], ratings: &[f64]) -> Result<Self, Error> {
        let mut m = Self::empty(g.n());
        for &id in ids {
            if id as usize >= g.m() {
                return Err(Error::InvalidMatching("edge id out of range"));
            }
            let e = g.edge(id);
            if m.is_matched(e.u) || m.is_matched(e.v) {
                return Err(Error::InvalidMatching("edges share a node"));
            }
            m.push(g, id, ratings[id as usize]);
        }
        Ok(m)
    }

    fn push(&mut self, g: &Graph, id: EdgeId, rating: f64) {
        let e = g.edge(id);
        debug_assert!(self.mate[e.u as usize].is_none() && self.mate[e.v as usize].is_none());
        self.mate[e.u as usize] = Some(e.v);
        self.mate[e.v as usize] = Some(e.u);
        self.edges.push(MatchedEdge {
            edge: id,
            u: e.u,
            v: e.v,
            weight: e.weight,
            rating,
        });
    }

    pub fn edges(&self) -> &[MatchedEdge] {
        &self.edges
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges.iter().map(|e| e.edge)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn mate(&self, v: NodeId) -> Option<NodeId> {
        self.mate[v as usize]
    }

    pub fn is_matched(&self, v: NodeId) -> bool {
        self.mate[v as usize].is_some()
    }

    /// Sum of the ratings of the matched edges.
    pub fn rated_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.rating).sum()
    }

    /// Sum of the raw weights of the matched edges.
    pub fn weight(&self) -> Weight {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Checks vertex-disjointness, mate symmetry and that every matched edge
    /// exists in `g`.
    pub fn validate(&self, g: &Graph) -> Result<(), Error> {
        if self.mate.len() != g.n() {
            return Err(Error::InvalidMatching("mate array does not fit the graph"));
        }
        let mut seen = 0usize;
        for (v, mate) in self.mate.iter().enumerate() {
            if let Some(u) = *mate {
                if u as usize >= g.n() || u as usize == v {
                    return Err(Error::InvalidMatching("mate out of range"));
                }
                if self.mate[u as usize] != Some(v as NodeId) {
                    return Err(Error::InvalidMatching("mate is not symmetric"));
                }
                seen += 1;
            }
        }
        if seen != 2 * self.edges.len() {
            return Err(Error::InvalidMatching("edge list disagrees with mates"));
        }
        for e in &self.edges {
            if self.mate[e.u as usize] != Some(e.v) || g.find_edge(e.u, e.v) != Some(e.edge) {
                return Err(Error::InvalidMatching("matched pair is not an edge"));
            }
        }
        Ok(())
    }

    /// No edge of `g` has both endpoints unmatched.
    pub fn is_maximal(&self, g: &Graph) -> bool {
        g.edges()
            .iter()
            .all(|e| self.is_matched(e.u) || self.is_matched(e.v))
    }
}

/// Descending rating, then ascending edge id.
pub(crate) fn rating_order(ratings: &[f64], a: EdgeId, b: EdgeId) -> Ordering {
    ratings[b as usize]
        .total_cmp(&ratings[a as usize])
        .then(a.cmp(&b))
}

/// Edge ids sorted by descending rating, ties by ascending id.
pub fn rated_edge_order(ratings: &[f64]) -> Vec<EdgeId> {
    let mut order: Vec<EdgeId> = (0..ratings.len() as EdgeId).collect();
    order.sort_unstable_by(|&a, &b| rating_order(ratings, a, b));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatcherKind {
    Shem,
    Greedy,
    Gpa,
}

impl MatcherKind {
    pub const ALL: [MatcherKind; 3] = [MatcherKind::Shem, MatcherKind::Greedy, MatcherKind::Gpa];

    pub fn name(self) -> &'static str {
        match self {
            MatcherKind::Shem => "shem",
            MatcherKind::Greedy => "greedy",
            MatcherKind::Gpa => "gpa",
        }
    }

    /// Runs the matcher; only SHEM consumes randomness.
    pub fn run<R: Rng>(self, g: &Graph, ratings: &[f64], rng: &mut R) -> Matching {
        match self {
            MatcherKind::Shem => shem(g, ratings, rng),
            MatcherKind::Greedy => greedy_matching(g, ratings),
            MatcherKind::Gpa => gpa(g, ratings),
        }
    }
}

impl fmt::Display for MatcherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatcherKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MatcherKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidConfig("unknown matcher"))
    }
}

/// Sorted heavy edge matching.
///
/// Nodes are scanned by increasing degree, equal degrees in a seeded random
/// order. Each unmatched node takes its best-rated edge to an unmatched
/// neighbor.
pub fn shem<R: Rng>(g: &Graph, ratings: &[f64], rng: &mut R) -> Matching {
    let n = g.n();
    let keys: Vec<u64> = (0..n).map(|_| rng.gen()).collect();
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.sort_unstable_by_key(|&v| (g.degree(v), keys[v as usize], v));

    let mut m = Matching::empty(n);
    for v in order {
        if m.is_matched(v) {
            continue;
        }
        let best = g
            .arcs(v)
            .filter(|a| !m.is_matched(a.target))
            .min_by(|a, b| rating_order(ratings, a.edge, b.edge))
            .map(|a| a.edge);
        if let Some(e) = best {
            m.push(g, e, ratings[e as usize]);
        }
    }
    m
}

/// Greedy matching: scan edges by descending rating and take every edge
/// whose endpoints are both still free.
pub fn greedy_matching(g: &Graph, ratings: &[f64]) -> Matching {
    let mut m = Matching::empty(g.n());
    fill_greedy(g, ratings, &rated_edge_order(ratings), &mut m);
    m
}

fn fill_greedy(g: &Graph, ratings: &[f64], order: &[EdgeId], m: &mut Matching) {
    for &id in order {
        let e = g.edge(id);
        if !m.is_matched(e.u) && !m.is_matched(e.v) {
            m.push(g, id, ratings[id as usize]);
        }
    }
}

const NO_EDGE: EdgeId = EdgeId::MAX;

/// Global path algorithm.
///
/// Edges are scanned by descending rating and collected into node-disjoint
/// paths and even-length cycles. Each path and cycle is then matched
/// optimally by dynamic programming. A final greedy sweep adds any edge
/// whose endpoints both stayed free, so the result is maximal.
pub fn gpa(g: &Graph, ratings: &[f64]) -> Matching {
    let n = g.n();
    let order = rated_edge_order(ratings);

    let mut slots = vec![[NO_EDGE; 2]; n];
    let mut parent: Vec<NodeId> = (0..n as NodeId).collect();
    let mut comp_edges = vec![0usize; n];

    fn find(parent: &mut [NodeId], mut v: NodeId) -> NodeId {
        while parent[v as usize] != v {
            let up = parent[parent[v as usize] as usize];
            parent[v as usize] = up;
            v = up;
        }
        v
    }

    for &id in &order {
        let e = g.edge(id);
        let (su, sv) = (&slots[e.u as usize], &slots[e.v as usize]);
        if su[1] != NO_EDGE || sv[1] != NO_EDGE {
            continue;
        }
        let (ru, rv) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if ru != rv {
            parent[rv as usize] = ru;
            comp_edges[ru as usize] += comp_edges[rv as usize] + 1;
        } else if comp_edges[ru as usize] % 2 == 1 {
            // u and v are the two ends of an odd path; closing it makes an even cycle
            comp_edges[ru as usize] += 1;
        } else {
            continue;
        }
        for x in [e.u, e.v] {
            let s = &mut slots[x as usize];
            if s[0] == NO_EDGE {
                s[0] = id;
            } else {
                s[1] = id;
            }
        }
    }

    let mut m = Matching::empty(n);
    let mut visited = vec![false; n];
    let mut chain = Vec::new();
    let mut weights = Vec::new();

    let walk = |start: NodeId, visited: &mut [bool], chain: &mut Vec<EdgeId>| {
        chain.clear();
        let mut cur = start;
        let mut prev = NO_EDGE;
        visited[cur as usize] = true;
        loop {
            let s = slots[cur as usize];
            let next = if s[0] != prev { s[0] } else { s[1] };
            if next == NO_EDGE || (next == prev) {
                break;
            }
            let e = g.edge(next);
            let other = if e.u == cur { e.v } else { e.u };
            chain.push(next);
            prev = next;
            cur = other;
            if visited[cur as usize] {
                break;
            }
            visited[cur as usize] = true;
        }
    };

    // paths start at their degree-one ends; whatever is left are cycles
    for pass in 0..2 {
        for v in 0..n as NodeId {
            let s = slots[v as usize];
            let is_start = match pass {
                0 => s[0] != NO_EDGE && s[1] == NO_EDGE,
                _ => s[1] != NO_EDGE,
            };
            if visited[v as usize] || !is_start {
                continue;
            }
            walk(v, &mut visited, &mut chain);
            weights.clear();
            weights.extend(chain.iter().map(|&id| ratings[id as usize]));
            let picked = if pass == 0 {
                dp_path_matching(&weights).1
            } else {
                dp_cycle_matching(&weights).1
            };
            for i in picked {
                let id = chain[i];
                m.push(g, id, ratings[id as usize]);
            }
        }
    }

    fill_greedy(g, ratings, &order, &mut m);
    m
}

/// Maximum-weight matching of a path given its edge weights in path order.
/// Returns the optimum and the selected edge positions, ascending.
pub fn dp_path_matching(weights: &[f64]) -> (f64, Vec<usize>) {
    let len = weights.len();
    // best[i]: optimum over the first i edges
    let mut best = vec![0.0f64; len + 1];
    let mut take = vec![false; len + 1];
    for i in 1..=len {
        let skip = best[i - 1];
        let with = weights[i - 1] + if i >= 2 { best[i - 2] } else { 0.0 };
        if with > skip {
            best[i] = with;
            take[i] = true;
        } else {
            best[i] = skip;
        }
    }
    let mut picked = Vec::new();
    let mut i = len;
    while i > 0 {
        if take[i] {
            picked.push(i - 1);
            i = i.saturating_sub(2);
        } else {
            i -= 1;
        }
    }
    picked.reverse();
    (best[len], picked)
}

/// Maximum-weight matching of a cycle whose edge `i` joins edges `i - 1`
/// and `i + 1`. Solved as the better of the two paths obtained by deleting
/// edge 0 or edge 1, the two edges at the node they share.
pub fn dp_cycle_matching(weights: &[f64]) -> (f64, Vec<usize>) {
    let len = weights.len();
    if len < 3 {
        return dp_path_matching(weights);
    }
    let (va, pa) = dp_path_matching(&weights[1..]);
    let rotated: Vec<f64> = weights[2..].iter().chain(&weights[..1]).copied().collect();
    let (vb, pb) = dp_path_matching(&rotated);
    if vb > va {
        let mut picked: Vec<usize> = pb.into_iter().map(|i| (i + 2) % len).collect();
        picked.sort_unstable();
        (vb, picked)
    } else {
        (va, pa.into_iter().map(|i| i + 1).collect())
    }
}

/// Exhaustive maximum-rating matching for small graphs (test oracle).
pub fn brute_force_max_matching(g: &Graph, ratings: &[f64]) -> (f64, Matching) {
    fn search(
        g: &Graph,
        ratings: &[f64],
        next: usize,
        used: &mut [bool],
        chosen: &mut Vec<EdgeId>,
        value: f64,
        best: &mut (f64, Vec<EdgeId>),
    ) {
        if value > best.0 {
            *best = (value, chosen.clone());
        }
        for id in next..g.m() {
            let e = g.edge(id as EdgeId);
            if used[e.u as usize] || used[e.v as usize] {
                continue;
            }
            used[e.u as usize] = true;
            used[e.v as usize] = true;
            chosen.push(id as EdgeId);
            search(g, ratings, id + 1, used, chosen, value + ratings[id], best);
            chosen.pop();
            used[e.u as usize] = false;
            used[e.v as usize] = false;
        }
    }
    let mut best = (0.0, Vec::new());
    let mut used = vec![false; g.n()];
    search(g, ratings, 0, &mut used, &mut Vec::new(), 0.0, &mut best);
    let m = Matching::from_rated_edges(g, &best.1, ratings).expect("search keeps edges disjoint");
    (best.0, m)
}
