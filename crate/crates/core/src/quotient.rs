//! Quotient graph over blocks and the randomized edge coloring that
//! schedules pairwise refinement.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;
use crate::partition::Partition;
use crate::{BlockId, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuotientEdge {
    pub a: BlockId,
    pub b: BlockId,
    /// Total weight of graph edges running between `a` and `b`.
    pub cut_weight: Weight,
}

/// Graph whose nodes are blocks; `{a, b}` is an edge iff some graph edge
/// runs between blocks `a` and `b`. Edges are sorted by `(a, b)` with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    k: u32,
    edges: Vec<QuotientEdge>,
    incident: Vec<Vec<usize>>,
}

impl QuotientGraph {
    pub fn from_edges(k: u32, mut edges: Vec<QuotientEdge>) -> Self {
        for e in &mut edges {
            if e.a > e.b {
                core::mem::swap(&mut e.a, &mut e.b);
            }
        }
        edges.sort_unstable_by_key(|e| (e.a, e.b));
        edges.dedup_by(|next, prev| {
            let same = next.a == prev.a && next.b == prev.b;
            if same {
                prev.cut_weight += next.cut_weight;
            }
            same
        });
        let mut incident = vec![Vec::new(); k as usize];
        for (i, e) in edges.iter().enumerate() {
            incident[e.a as usize].push(i);
            incident[e.b as usize].push(i);
        }
        Self { k, edges, incident }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn edges(&self) -> &[QuotientEdge] {
        &self.edges
    }

    pub fn degree(&self, b: BlockId) -> usize {
        self.incident[b as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.incident.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn build_quotient(g: &Graph, p: &Partition) -> QuotientGraph {
    let mut crossing: Vec<QuotientEdge> = g
        .edges()
        .iter()
        .filter_map(|e| {
            let (a, b) = (p.block(e.u), p.block(e.v));
            (a != b).then(|| QuotientEdge {
                a: a.min(b),
                b: a.max(b),
                cut_weight: e.weight,
            })
        })
        .collect();
    crossing.sort_unstable_by_key(|e| (e.a, e.b));
    QuotientGraph::from_edges(p.k(), crossing)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeColoring {
    /// Color of each quotient edge, by edge index.
    pub color: Vec<u32>,
    /// One more than the largest color used.
    pub num_colors: u32,
    /// True if the round cap was hit and the greedy fallback finished the job.
    pub used_fallback: bool,
}

impl EdgeColoring {
    pub fn is_proper(&self, q: &QuotientGraph) -> bool {
        if self.color.len() != q.edges().len() {
            return false;
        }
        q.incident.iter().all(|inc| {
            let mut seen: Vec<u32> = inc.iter().map(|&i| self.color[i]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
    }
}

/// Colors the quotient edges by simulating the distributed protocol.
///
/// Each round every block flips a coin. An active block picks a random
/// uncolored incident edge and sends it with its free-color list to the
/// other endpoint. Requests that reach an active block are rejected; a
/// passive block serves the request from the lowest block id and colors the
/// edge with the smallest color free at both ends. The palette has
/// `2Δ - 1` colors, so a common free color always exists. After
/// `64 |E|` rounds the remaining edges are colored greedily from the same
/// palette.
pub fn color_edges<R: Rng>(q: &QuotientGraph, rng: &mut R) -> EdgeColoring {
    const UNCOLORED: u32 = u32::MAX;
    let m = q.edges().len();
    let k = q.k() as usize;
    let palette = (2 * q.max_degree()).saturating_sub(1).max(1);
    let mut used = vec![vec![false; palette]; k];
    let mut color = vec![UNCOLORED; m];
    let mut remaining = m;

    let assign = |i: usize, color: &mut [u32], used: &mut [Vec<bool>]| {
        let e = q.edges()[i];
        let (a, b) = (e.a as usize, e.b as usize);
        let c = (0..palette)
            .find(|&c| !used[a][c] && !used[b][c])
            .expect("palette of 2Δ-1 colors always leaves a common free color");
        used[a][c] = true;
        used[b][c] = true;
        color[i] = c as u32;
    };

    let round_cap = 64 * m;
    let mut active = vec![false; k];
    let mut request: Vec<Option<(usize, usize)>> = vec![None; k];
    let mut rounds = 0;
    while remaining > 0 && rounds < round_cap {
        rounds += 1;
        for flag in active.iter_mut() {
            *flag = rng.gen();
        }
        request.iter_mut().for_each(|r| *r = None);
        for u in 0..k {
            if !active[u] {
                continue;
            }
            let open: Vec<usize> = q.incident[u]
                .iter()
                .copied()
                .filter(|&i| color[i] == UNCOLORED)
                .collect();
            let Some(&i) = open.choose(rng) else { continue };
            let e = q.edges()[i];
            let v = if e.a as usize == u { e.b } else { e.a } as usize;
            if active[v] {
                continue;
            }
            // senders are visited in id order, so the first one kept is the lowest
            if request[v].is_none() {
                request[v] = Some((u, i));
            }
        }
        for slot in &request {
            if let Some((_, i)) = *slot {
                assign(i, &mut color, &mut used);
                remaining -= 1;
            }
        }
    }

    let used_fallback = remaining > 0;
    for i in 0..m {
        if color[i] == UNCOLORED {
            assign(i, &mut color, &mut used);
        }
    }
    let num_colors = color.iter().map(|&c| c + 1).max().unwrap_or(0);
    EdgeColoring {
        color,
        num_colors,
        used_fallback,
    }
}

/// Rounds of block pairs: round `r` holds every edge of color `r`. Colors
/// with no edges are skipped.
pub fn schedule(q: &QuotientGraph, coloring: &EdgeColoring) -> Vec<Vec<(BlockId, BlockId)>> {
    let mut rounds = vec![Vec::new(); coloring.num_colors as usize];
    for (e, &c) in q.edges().iter().zip(&coloring.color) {
        rounds[c as usize].push((e.a, e.b));
    }
    rounds.retain(|r| !r.is_empty());
    rounds
}
