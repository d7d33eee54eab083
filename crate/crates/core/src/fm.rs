//! Two-way FM local search between a pair of blocks.
//!
//! The search is confined to a band of nodes within a bounded BFS distance
//! of the pair's boundary. Gains are full-graph gains: neighbors outside the
//! band count with their fixed block, they just never move. Every pass is
//! rolled back to the prefix with the lexicographically smallest
//! `(imbalance, cut)`.

use alloc::collections::{BTreeMap, BinaryHeap};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;
use crate::partition::{BalanceSpec, Partition};
use crate::{rng_from_seed, BlockId, Error, NodeId, Quality, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QueueStrategy {
    TopGain,
    Alternate,
    TopGainMaxLoad,
    MaxLoad,
}

impl QueueStrategy {
    pub const ALL: [QueueStrategy; 4] = [
        QueueStrategy::TopGain,
        QueueStrategy::Alternate,
        QueueStrategy::TopGainMaxLoad,
        QueueStrategy::MaxLoad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueueStrategy::TopGain => "top_gain",
            QueueStrategy::Alternate => "alternate",
            QueueStrategy::TopGainMaxLoad => "top_gain_max_load",
            QueueStrategy::MaxLoad => "max_load",
        }
    }
}

impl fmt::Display for QueueStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueueStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        QueueStrategy::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or(Error::InvalidConfig("unknown queue strategy"))
    }
}

/// When the outer refinement loops give up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StopRule {
    /// Run exactly one global iteration.
    Once,
    /// Stop after a global iteration that does not improve `(imbalance, cut)`.
    NoChange,
    /// Stop after two consecutive global iterations without improvement.
    TwoNoChange,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefineConfig {
    pub queue_strategy: QueueStrategy,
    /// Fraction of the smaller band side tolerated as unimproving moves.
    pub fm_patience: f64,
    pub bfs_depth: usize,
    pub local_iterations: usize,
    pub max_global_iterations: usize,
    pub stop_rule: StopRule,
}

/// Read access to a node-to-block map.
pub trait Assignment {
    fn block(&self, v: NodeId) -> BlockId;
}

impl Assignment for [BlockId] {
    fn block(&self, v: NodeId) -> BlockId {
        self[v as usize]
    }
}

impl Assignment for Vec<BlockId> {
    fn block(&self, v: NodeId) -> BlockId {
        self[v as usize]
    }
}

impl Assignment for Partition {
    fn block(&self, v: NodeId) -> BlockId {
        Partition::block(self, v)
    }
}

/// A base assignment with a sparse set of overridden nodes.
#[derive(Debug, Clone)]
pub struct Overlay<'a> {
    base: &'a [BlockId],
    changed: BTreeMap<NodeId, BlockId>,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a [BlockId]) -> Self {
        Self {
            base,
            changed: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, v: NodeId, b: BlockId) {
        if self.base[v as usize] == b {
            self.changed.remove(&v);
        } else {
            self.changed.insert(v, b);
        }
    }

    /// Nodes whose block differs from the base, with their new block.
    pub fn changes(&self) -> impl Iterator<Item = (NodeId, BlockId)> + '_ {
        self.changed.iter().map(|(&v, &b)| (v, b))
    }
}

impl Assignment for Overlay<'_> {
    fn block(&self, v: NodeId) -> BlockId {
        match self.changed.get(&v) {
            Some(&b) => b,
            None => self.base[v as usize],
        }
    }
}

/// Cut reduction from moving `v` into `target`: weight to `target` minus
/// weight to the node's own block.
pub fn gain<A: Assignment + ?Sized>(g: &Graph, v: NodeId, assign: &A, target: BlockId) -> Weight {
    let own = assign.block(v);
    g.neighbors(v)
        .map(|(w, weight)| {
            let b = assign.block(w);
            if b == target {
                weight
            } else if b == own {
                -weight
            } else {
                0
            }
        })
        .sum()
}

const NOT_IN_BAND: u32 = u32::MAX;

/// The nodes of a block pair that a search may move.
#[derive(Debug, Clone)]
pub struct Band {
    pub pair: (BlockId, BlockId),
    /// Band nodes, ascending.
    pub nodes: Vec<NodeId>,
    /// Band nodes with a neighbor across the pair, ascending.
    pub boundary: Vec<NodeId>,
    /// Band nodes with a neighbor in the pair's blocks that lies outside the band.
    pub frontier: Vec<NodeId>,
    local: Vec<u32>,
}

impl Band {
    fn from_nodes<A: Assignment + ?Sized>(
        g: &Graph,
        assign: &A,
        pair: (BlockId, BlockId),
        mut nodes: Vec<NodeId>,
    ) -> Self {
        nodes.sort_unstable();
        let mut local = vec![NOT_IN_BAND; g.n()];
        for (i, &v) in nodes.iter().enumerate() {
            local[v as usize] = i as u32;
        }
        let in_pair = |b: BlockId| b == pair.0 || b == pair.1;
        let mut boundary = Vec::new();
        let mut frontier = Vec::new();
        for &v in &nodes {
            let own = assign.block(v);
            let mut crosses = false;
            let mut open = false;
            for (w, _) in g.neighbors(v) {
                let b = assign.block(w);
                if in_pair(b) {
                    crosses |= b != own;
                    open |= local[w as usize] == NOT_IN_BAND;
                }
            }
            if crosses {
                boundary.push(v);
            }
            if open {
                frontier.push(v);
            }
        }
        Self {
            pair,
            nodes,
            boundary,
            frontier,
            local,
        }
    }

    /// All nodes of both blocks.
    pub fn whole<A: Assignment + ?Sized>(g: &Graph, assign: &A, pair: (BlockId, BlockId)) -> Self {
        let nodes = (0..g.n() as NodeId)
            .filter(|&v| {
                let b = assign.block(v);
                b == pair.0 || b == pair.1
            })
            .collect();
        Self::from_nodes(g, assign, pair, nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.local[v as usize] != NOT_IN_BAND
    }

    fn index(&self, v: NodeId) -> Option<usize> {
        match self.local[v as usize] {
            NOT_IN_BAND => None,
            i => Some(i as usize),
        }
    }
}

/// Band of all pair nodes within `depth` BFS levels of the pair boundary;
/// depth 1 is the boundary itself. A pair without cut edges has an empty
/// band, and `depth >= n` takes both blocks whole.
pub fn extract_band<A: Assignment + ?Sized>(
    g: &Graph,
    assign: &A,
    pair: (BlockId, BlockId),
    depth: usize,
) -> Band {
    let candidates: Vec<NodeId> = (0..g.n() as NodeId).collect();
    let band = extract_band_from(g, assign, pair, depth, &candidates);
    if depth >= g.n() && !band.is_empty() {
        return Band::whole(g, assign, pair);
    }
    band
}

/// Like [`extract_band`], but only nodes in `candidates` are tested for
/// being on the boundary. `candidates` must contain every boundary node.
pub fn extract_band_from<A: Assignment + ?Sized>(
    g: &Graph,
    assign: &A,
    pair: (BlockId, BlockId),
    depth: usize,
    candidates: &[NodeId],
) -> Band {
    let in_pair = |b: BlockId| b == pair.0 || b == pair.1;
    let mut seen = vec![false; g.n()];
    let mut level = Vec::new();
    for &v in candidates {
        let own = assign.block(v);
        if seen[v as usize] || !in_pair(own) {
            continue;
        }
        let crosses = g.neighbors(v).any(|(w, _)| {
            let b = assign.block(w);
            b != own && in_pair(b)
        });
        if crosses {
            seen[v as usize] = true;
            level.push(v);
        }
    }
    let mut nodes = level.clone();
    for _ in 1..depth.max(1) {
        let mut next = Vec::new();
        for &v in &level {
            for (w, _) in g.neighbors(v) {
                if !seen[w as usize] && in_pair(assign.block(w)) {
                    seen[w as usize] = true;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        nodes.extend_from_slice(&next);
        level = next;
    }
    Band::from_nodes(g, assign, pair, nodes)
}

/// Weights, weight caps and cut of a block pair at the start of a search.
/// Index 0 refers to `pair.0`, index 1 to `pair.1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairState {
    pub pair: (BlockId, BlockId),
    pub weight: [Weight; 2],
    pub cap: [Weight; 2],
    /// Cut of the whole partition.
    pub cut: Weight,
}

impl PairState {
    pub fn of(p: &Partition, pair: (BlockId, BlockId), spec: &BalanceSpec) -> Self {
        Self {
            pair,
            weight: [p.block_weight(pair.0), p.block_weight(pair.1)],
            cap: [spec.l_max, spec.l_max],
            cut: p.cut(),
        }
    }

    pub fn imbalance(&self) -> Weight {
        pair_imbalance(self.weight, self.cap)
    }

    pub fn quality(&self) -> Quality {
        (self.imbalance(), self.cut)
    }
}

fn pair_imbalance(weight: [Weight; 2], cap: [Weight; 2]) -> Weight {
    (weight[0] - cap[0]).max(weight[1] - cap[1]).max(0)
}

/// What the queue selector sees: the best gain in each queue (if any) and
/// the current pair weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueState {
    pub top_gain: [Option<Weight>; 2],
    pub weight: [Weight; 2],
    pub cap: [Weight; 2],
    /// Side that gave the previous node.
    pub last: Option<usize>,
}

/// Picks the side (0 or 1) whose queue gives the next node, or `None` when
/// both queues are empty.
///
/// Under `TopGain` and `TopGainMaxLoad` an overloaded side always gives.
/// If the chosen queue is empty the other side gives instead.
pub fn select_queue<R: Rng>(strategy: QueueStrategy, s: &QueueState, rng: &mut R) -> Option<usize> {
    let [g0, g1] = s.top_gain;
    if g0.is_none() && g1.is_none() {
        return None;
    }
    let heavier = |rng: &mut R| match s.weight[0].cmp(&s.weight[1]) {
        core::cmp::Ordering::Greater => 0,
        core::cmp::Ordering::Less => 1,
        core::cmp::Ordering::Equal => rng.gen_range(0..2),
    };
    let excess = [s.weight[0] - s.cap[0], s.weight[1] - s.cap[1]];
    let overloaded = excess[0] > 0 || excess[1] > 0;
    let side = match strategy {
        QueueStrategy::TopGain | QueueStrategy::TopGainMaxLoad if overloaded => {
            usize::from(excess[1] > excess[0])
        }
        QueueStrategy::TopGain | QueueStrategy::TopGainMaxLoad => match (g0, g1) {
            (Some(a), Some(b)) if a > b => 0,
            (Some(a), Some(b)) if a < b => 1,
            (Some(_), Some(_)) if strategy == QueueStrategy::TopGain => rng.gen_range(0..2),
            (Some(_), Some(_)) => heavier(rng),
            (Some(_), None) => 0,
            _ => 1,
        },
        QueueStrategy::MaxLoad => heavier(rng),
        QueueStrategy::Alternate => s.last.map_or(0, |l| 1 - l),
    };
    if s.top_gain[side].is_some() {
        Some(side)
    } else {
        Some(1 - side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub node: NodeId,
    pub from: BlockId,
    pub to: BlockId,
    pub gain: Weight,
    /// Pair `(imbalance, cut)` right after this move.
    pub quality: Quality,
}

/// Moves of one FM pass in order, and the prefix length to keep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveLog {
    pub initial: PairState,
    pub moves: Vec<Move>,
    pub best_prefix: usize,
}

impl MoveLog {
    pub fn quality_after(&self, prefix: usize) -> Quality {
        match prefix {
            0 => self.initial.quality(),
            i => self.moves[i - 1].quality,
        }
    }

    pub fn best_quality(&self) -> Quality {
        self.quality_after(self.best_prefix)
    }

    pub fn kept(&self) -> &[Move] {
        &self.moves[..self.best_prefix]
    }
}

/// One FM pass over `band`, starting from `assign` and `state`.
///
/// Queues start with the band's boundary nodes in a seeded random order;
/// ties in gain pop in that order. The pass stops when both queues are
/// empty or when more than `max(1, fm_patience * min(|A ∩ band|, |B ∩ band|))`
/// moves in a row failed to beat the best state seen.
pub fn fm_pass<A: Assignment + ?Sized>(
    g: &Graph,
    band: &Band,
    assign: &A,
    state: PairState,
    cfg: &RefineConfig,
    seed: u64,
) -> MoveLog {
    let mut rng = rng_from_seed(seed);
    let pair = state.pair;
    let blocks = [pair.0, pair.1];
    let len = band.len();

    let mut side = Vec::with_capacity(len);
    let mut gains = Vec::with_capacity(len);
    let mut count = [0usize; 2];
    for &v in &band.nodes {
        let s = usize::from(assign.block(v) == pair.1);
        count[s] += 1;
        side.push(s as u8);
        gains.push(gain(g, v, assign, blocks[1 - s]));
    }

    let mut log = MoveLog {
        initial: state,
        moves: Vec::new(),
        best_prefix: 0,
    };
    if len == 0 {
        return log;
    }

    let mut moved = vec![false; len];
    let mut key = vec![0u64; len];
    let mut queued = vec![false; len];
    let mut queues: [BinaryHeap<(Weight, u64, u32)>; 2] = [BinaryHeap::new(), BinaryHeap::new()];

    let mut start: Vec<u32> = band
        .boundary
        .iter()
        .map(|&v| band.index(v).expect("boundary lies in band") as u32)
        .collect();
    start.shuffle(&mut rng);
    for i in start {
        let i = i as usize;
        key[i] = rng.gen();
        queued[i] = true;
        queues[side[i] as usize].push((gains[i], key[i], i as u32));
    }

    let limit = ((cfg.fm_patience * count[0].min(count[1]) as f64) as usize).max(1);
    let mut weight = state.weight;
    let mut cut = state.cut;
    let mut best = state.quality();
    let mut last = None;

    loop {
        let mut top = [None, None];
        for s in 0..2 {
            while let Some(&(gv, _, i)) = queues[s].peek() {
                let i = i as usize;
                if moved[i] || gains[i] != gv || side[i] as usize != s {
                    queues[s].pop();
                } else {
                    top[s] = Some(gv);
                    break;
                }
            }
        }
        let qs = QueueState {
            top_gain: top,
            weight,
            cap: state.cap,
            last,
        };
        let Some(s) = select_queue(cfg.queue_strategy, &qs, &mut rng) else {
            break;
        };
        let (gv, _, i) = queues[s].pop().expect("selected queue is nonempty");
        let i = i as usize;
        let v = band.nodes[i];
        let c = g.node_weight(v);

        moved[i] = true;
        side[i] = (1 - s) as u8;
        weight[s] -= c;
        weight[1 - s] += c;
        cut -= gv;
        last = Some(s);

        for (w, omega) in g.neighbors(v) {
            let Some(j) = band.index(w) else { continue };
            if moved[j] {
                continue;
            }
            if side[j] as usize == s {
                gains[j] += 2 * omega;
            } else {
                gains[j] -= 2 * omega;
            }
            if !queued[j] {
                queued[j] = true;
                key[j] = rng.gen();
            }
            queues[side[j] as usize].push((gains[j], key[j], j as u32));
        }

        let quality = (pair_imbalance(weight, state.cap), cut);
        log.moves.push(Move {
            node: v,
            from: blocks[s],
            to: blocks[1 - s],
            gain: gv,
            quality,
        });
        if quality < best {
            best = quality;
            log.best_prefix = log.moves.len();
        } else if log.moves.len() - log.best_prefix > limit {
            break;
        }
    }
    log
}

/// Outcome of refining one block pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairResult {
    pub pair: (BlockId, BlockId),
    /// New block of every node that changed sides.
    pub assignments: Vec<(NodeId, BlockId)>,
    pub before: PairState,
    pub after: PairState,
}

impl PairResult {
    pub fn delta_cut(&self) -> Weight {
        self.after.cut - self.before.cut
    }

    /// Writes the assignments into `p`.
    pub fn apply(&self, g: &Graph, p: &mut Partition) {
        for &(v, b) in &self.assignments {
            p.move_node(g, v, b);
        }
    }
}

/// Runs two FM passes on the same band with different seeds and keeps the
/// better one by `(imbalance, cut)`; equal results keep the first seed's.
pub fn refine_band<A: Assignment + ?Sized>(
    g: &Graph,
    band: &Band,
    assign: &A,
    state: PairState,
    cfg: &RefineConfig,
    seeds: [u64; 2],
) -> PairResult {
    let first = fm_pass(g, band, assign, state, cfg, seeds[0]);
    let log = if band.is_empty() {
        first
    } else {
        let second = fm_pass(g, band, assign, state, cfg, seeds[1]);
        if second.best_quality() < first.best_quality() {
            second
        } else {
            first
        }
    };
    let mut weight = state.weight;
    let mut final_block: BTreeMap<NodeId, BlockId> = BTreeMap::new();
    for mv in log.kept() {
        let c = g.node_weight(mv.node);
        let s = usize::from(mv.from == state.pair.1);
        weight[s] -= c;
        weight[1 - s] += c;
        final_block.insert(mv.node, mv.to);
    }
    let assignments = final_block
        .into_iter()
        .filter(|&(v, b)| assign.block(v) != b)
        .collect();
    PairResult {
        pair: state.pair,
        assignments,
        before: state,
        after: PairState {
            weight,
            cut: log.best_quality().1,
            ..state
        },
    }
}

/// Refines `pair` of `p` on a band of depth `cfg.bfs_depth`, without
/// modifying `p`.
pub fn refine_pair(
    g: &Graph,
    p: &Partition,
    pair: (BlockId, BlockId),
    spec: &BalanceSpec,
    cfg: &RefineConfig,
    seed_a: u64,
    seed_b: u64,
) -> PairResult {
    let band = extract_band(g, p, pair, cfg.bfs_depth);
    refine_band(
        g,
        &band,
        p,
        PairState::of(p, pair, spec),
        cfg,
        [seed_a, seed_b],
    )
}
