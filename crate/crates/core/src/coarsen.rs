//! Coarsening: rated matchings computed block-locally plus a gap-graph
//! matching across blocks, contracted until the graph is small enough.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{contract, Graph, Hierarchy, Level};
use crate::matching::{rating_order, MatcherKind, Matching};
use crate::rating::{rate_all, RatingKind};
use crate::runtime::{derive_seed, Executor};
use crate::{rng_from_seed, EdgeId, Error, NodeId};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoarsenConfig {
    pub rating: RatingKind,
    pub matcher: MatcherKind,
    /// α in the stop rule `k · max(min_coarse_per_block, n / (α k²))`.
    pub contraction_stop_factor: f64,
    pub min_coarse_per_block: usize,
    pub max_levels: usize,
    /// A round that removes fewer than this fraction of nodes ends coarsening.
    pub stall_fraction: f64,
}

impl Default for CoarsenConfig {
    fn default() -> Self {
        Self {
            rating: RatingKind::ExpansionStar2,
            matcher: MatcherKind::Gpa,
            contraction_stop_factor: 60.0,
            min_coarse_per_block: 20,
            max_levels: 64,
            stall_fraction: 0.05,
        }
    }
}

/// Preliminary assignment of nodes to `parts` groups; matchings are first
/// computed inside each group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockAssignment {
    block_of: Vec<u32>,
    parts: u32,
}

impl BlockAssignment {
    pub fn new(block_of: Vec<u32>, parts: u32) -> Result<Self, Error> {
        if parts == 0 {
            return Err(Error::InvalidConfig("prepartition needs at least one part"));
        }
        if let Some(&block) = block_of.iter().find(|&&b| b >= parts) {
            return Err(Error::BlockOutOfRange { block, k: parts });
        }
        Ok(Self { block_of, parts })
    }

    pub fn single(n: usize) -> Self {
        Self {
            block_of: vec![0; n],
            parts: 1,
        }
    }

    pub fn parts(&self) -> u32 {
        self.parts
    }

    pub fn block(&self, v: NodeId) -> u32 {
        self.block_of[v as usize]
    }

    pub fn block_of(&self) -> &[u32] {
        &self.block_of
    }

    /// Assignment for the coarse graph: each coarse node inherits the part
    /// of the lowest-id fine node mapped onto it.
    pub fn project(&self, coarse_map: &[NodeId], coarse_n: usize) -> Self {
        let mut block_of = vec![u32::MAX; coarse_n];
        for (v, &c) in coarse_map.iter().enumerate() {
            if block_of[c as usize] == u32::MAX {
                block_of[c as usize] = self.block_of[v];
            }
        }
        Self {
            block_of,
            parts: self.parts,
        }
    }
}

/// Node count at or below which coarsening stops.
pub fn stop_threshold(n: usize, k: u32, cfg: &CoarsenConfig) -> f64 {
    let k = k as f64;
    let per_block =
        (n as f64 / (cfg.contraction_stop_factor * k * k)).max(cfg.min_coarse_per_block as f64);
    k * per_block
}

/// Contracts `g` level by level until it has at most [`stop_threshold`]
/// nodes, a round removes fewer than `stall_fraction` of the nodes, nothing
/// can be matched, or `max_levels` is reached.
pub fn coarsen_until<E: Executor + ?Sized>(
    g: &Graph,
    k: u32,
    cfg: &CoarsenConfig,
    prepart: &BlockAssignment,
    seed: u64,
    exec: &E,
) -> Result<Hierarchy, Error> {
    if k < 1 {
        return Err(Error::InvalidConfig("k must be at least 1"));
    }
    if cfg.contraction_stop_factor <= 0.0 {
        return Err(Error::InvalidConfig(
            "contraction stop factor must be positive",
        ));
    }
    if prepart.block_of.len() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: prepart.block_of.len(),
        });
    }
    let threshold = stop_threshold(g.n(), k, cfg);
    let mut hierarchy = Hierarchy::default();
    let mut prepart = prepart.clone();
    while hierarchy.depth() < cfg.max_levels {
        let current = hierarchy.coarsest(g);
        let before = current.n();
        if before as f64 <= threshold {
            break;
        }
        let ratings = rate_all(current, cfg.rating);
        let level_seed = derive_seed(seed, &[hierarchy.depth() as u64]);
        let matching =
            parallel_match_round(current, &ratings, &prepart, cfg.matcher, level_seed, exec);
        if matching.is_empty() {
            break;
        }
        let (coarse, coarse_map) = contract(current, &matching)?;
        let after = coarse.n();
        prepart = prepart.project(&coarse_map, after);
        hierarchy.levels.push(Level {
            matching,
            coarse_map,
            coarse,
        });
        if ((before - after) as f64) < cfg.stall_fraction * before as f64 {
            break;
        }
    }
    Ok(hierarchy)
}

/// One matching round: `matcher` inside every prepartition block, then a
/// locally-heaviest matching on the gap graph. A gap edge that wins
/// dissolves the local matches of its endpoints.
pub fn parallel_match_round<E: Executor + ?Sized>(
    g: &Graph,
    ratings: &[f64],
    prepart: &BlockAssignment,
    matcher: MatcherKind,
    seed: u64,
    exec: &E,
) -> Matching {
    let parts = prepart.parts();
    let local_edges: Vec<Vec<EdgeId>> = if parts == 1 {
        let mut rng = rng_from_seed(derive_seed(seed, &[0]));
        vec![matcher.run(g, ratings, &mut rng).edge_ids().collect()]
    } else {
        let mut members = vec![Vec::new(); parts as usize];
        for v in 0..g.n() as NodeId {
            members[prepart.block(v) as usize].push(v);
        }
        exec.map(parts as usize, |b| {
            let (sub, edge_map) = g.induced_with_edges(&members[b]);
            let sub_ratings: Vec<f64> = edge_map.iter().map(|&e| ratings[e as usize]).collect();
            let mut rng = rng_from_seed(derive_seed(seed, &[b as u64]));
            matcher
                .run(&sub, &sub_ratings, &mut rng)
                .edge_ids()
                .map(|e| edge_map[e as usize])
                .collect()
        })
    };
    let union: Vec<EdgeId> = local_edges.into_iter().flatten().collect();
    let local = Matching::from_rated_edges(g, &union, ratings).expect("blocks are disjoint");
    if parts == 1 {
        return local;
    }

    let gap = gap_graph(g, ratings, prepart, &local);
    let winners = locally_heaviest_matching(g, ratings, &gap);
    if winners.is_empty() {
        return local;
    }
    let mut displaced = vec![false; g.n()];
    for &e in &winners {
        let edge = g.edge(e);
        displaced[edge.u as usize] = true;
        displaced[edge.v as usize] = true;
    }
    let mut edges: Vec<EdgeId> = local
        .edges()
        .iter()
        .filter(|m| !displaced[m.u as usize] && !displaced[m.v as usize])
        .map(|m| m.edge)
        .collect();
    edges.extend_from_slice(&winners);
    Matching::from_rated_edges(g, &edges, ratings).expect("dissolution keeps edges disjoint")
}

/// Cross-block edges whose rating strictly exceeds the rating of the local
/// match at each endpoint; an unmatched endpoint imposes no bound.
pub fn gap_graph(
    g: &Graph,
    ratings: &[f64],
    prepart: &BlockAssignment,
    local: &Matching,
) -> Vec<EdgeId> {
    let mut mate_rating = vec![f64::NEG_INFINITY; g.n()];
    for m in local.edges() {
        mate_rating[m.u as usize] = m.rating;
        mate_rating[m.v as usize] = m.rating;
    }
    g.edges()
        .iter()
        .enumerate()
        .filter(|(id, e)| {
            let r = ratings[*id];
            prepart.block(e.u) != prepart.block(e.v)
                && r > mate_rating[e.u as usize]
                && r > mate_rating[e.v as usize]
        })
        .map(|(id, _)| id as EdgeId)
        .collect()
}

/// Repeatedly accepts every candidate edge that is the best-rated remaining
/// edge at both of its endpoints (ties by lower edge id), then drops all
/// candidates touching an accepted endpoint.
pub fn locally_heaviest_matching(g: &Graph, ratings: &[f64], candidates: &[EdgeId]) -> Vec<EdgeId> {
    const NONE: EdgeId = EdgeId::MAX;
    let mut best = vec![NONE; g.n()];
    let mut matched = vec![false; g.n()];
    let mut remaining = candidates.to_vec();
    let mut accepted = Vec::new();
    while !remaining.is_empty() {
        for &e in &remaining {
            let edge = g.edge(e);
            for x in [edge.u, edge.v] {
                let slot = &mut best[x as usize];
                if *slot == NONE || rating_order(ratings, e, *slot).is_lt() {
                    *slot = e;
                }
            }
        }
        for &e in &remaining {
            let edge = g.edge(e);
            if best[edge.u as usize] == e && best[edge.v as usize] == e {
                accepted.push(e);
                matched[edge.u as usize] = true;
                matched[edge.v as usize] = true;
            }
        }
        for &e in &remaining {
            let edge = g.edge(e);
            best[edge.u as usize] = NONE;
            best[edge.v as usize] = NONE;
        }
        remaining.retain(|&e| {
            let edge = g.edge(e);
            !matched[edge.u as usize] && !matched[edge.v as usize]
        });
    }
    accepted
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runtime::Sequential;

    fn path(n: u32) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        Graph::unit(n as usize, &edges).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let cfg = CoarsenConfig::default();
        assert_eq!(stop_threshold(1024, 4, &cfg), 80.0);
        assert_eq!(stop_threshold(100, 2, &cfg), 40.0);
        assert_eq!(
            stop_threshold(1_000_000, 2, &cfg),
            2.0 * 1_000_000.0 / 240.0
        );
    }

    #[test]
    fn star_stalls_after_one_level() {
        let edges: Vec<_> = (1..=50).map(|i| (0, i, 1)).collect();
        let star = Graph::unit(51, &edges).unwrap();
        let h = coarsen_until(
            &star,
            2,
            &CoarsenConfig::default(),
            &BlockAssignment::single(51),
            9,
            &Sequential,
        )
        .unwrap();
        assert_eq!(h.depth(), 1);
        assert_eq!(h.coarsest(&star).n(), 50);
    }

    #[test]
    fn single_part_equals_sequential_matcher() {
        let g = path(9);
        let r = rate_all(&g, RatingKind::Weight);
        for matcher in MatcherKind::ALL {
            let round =
                parallel_match_round(&g, &r, &BlockAssignment::single(9), matcher, 4, &Sequential);
            let mut rng = rng_from_seed(derive_seed(4, &[0]));
            assert_eq!(round, matcher.run(&g, &r, &mut rng));
        }
    }

    #[test]
    fn gap_graph_examples() {
        // blocks {0,1} and {2,3}; cross edge (1,2)
        let g = Graph::unit(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let prepart = BlockAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let no_cross = BlockAssignment::new(vec![0, 0, 0, 0], 2).unwrap();
        let local = Matching::from_rated_edges(&g, &[0, 2], &[3.0, 5.0, 4.0]).unwrap();
        assert!(gap_graph(&g, &[3.0, 5.0, 4.0], &no_cross, &local).is_empty());
        assert_eq!(gap_graph(&g, &[3.0, 5.0, 4.0], &prepart, &local), vec![1]);
        let local = Matching::from_rated_edges(&g, &[2], &[1.0, 3.0, 4.0]).unwrap();
        assert!(gap_graph(&g, &[1.0, 3.0, 4.0], &prepart, &local).is_empty());
    }

    #[test]
    fn heavy_cross_edge_dissolves_local_matches() {
        let g = Graph::unit(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]).unwrap();
        let prepart = BlockAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let m = parallel_match_round(
            &g,
            &[1.0, 5.0, 1.0],
            &prepart,
            MatcherKind::Greedy,
            0,
            &Sequential,
        );
        assert_eq!(m.edge_ids().collect::<Vec<_>>(), vec![1]);
        m.validate(&g).unwrap();

        let m = parallel_match_round(
            &g,
            &[5.0, 1.0, 5.0],
            &prepart,
            MatcherKind::Greedy,
            0,
            &Sequential,
        );
        let mut ids: Vec<_> = m.edge_ids().collect();
        ids.sort_unstable();
        assert_eq!(ids, vec![0, 2]);
    }

    #[test]
    fn locally_heaviest_examples() {
        let single = Graph::unit(2, &[(0, 1, 1)]).unwrap();
        assert_eq!(locally_heaviest_matching(&single, &[1.0], &[0]), vec![0]);

        let p = path(4);
        assert_eq!(
            locally_heaviest_matching(&p, &[3.0, 4.0, 3.0], &[0, 1, 2]),
            vec![1]
        );

        let c4 = Graph::unit(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap();
        assert_eq!(
            locally_heaviest_matching(&c4, &[5.0, 1.0, 5.0, 1.0], &[0, 1, 2, 3]),
            vec![0, 2]
        );
    }

    #[test]
    fn prepartition_projection_follows_lowest_fine_node() {
        let b = BlockAssignment::new(vec![0, 1, 1, 0], 2).unwrap();
        assert_eq!(b.project(&[0, 0, 1, 1], 2).block_of(), &[0, 1]);
    }
}
