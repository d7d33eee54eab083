//! Initial partitioning of the coarsest graph by seeded recursive bisection.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::Rng;

use crate::fm::{fm_pass, Band, PairState, QueueStrategy, RefineConfig, StopRule};
use crate::graph::Graph;
use crate::partition::{BalanceSpec, Partition};
use crate::runtime::{derive_seed, Executor};
use crate::{rng_from_seed, BlockId, Error, NodeId, Quality, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InitConfig {
    /// Independent seeded attempts; the best one wins.
    pub repeats: usize,
    /// FM passes after growing each bisection.
    pub fm_passes: usize,
    /// Grown regions tried per bisection.
    pub growing_trials_per_bisection: usize,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            repeats: 3,
            fm_passes: 3,
            growing_trials_per_bisection: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InitialPartition {
    pub partition: Partition,
    /// Index of the winning attempt.
    pub attempt: usize,
    /// False when no attempt met the balance constraint.
    pub balanced: bool,
}

const BISECTION_FM: RefineConfig = RefineConfig {
    queue_strategy: QueueStrategy::TopGain,
    fm_patience: 1.0,
    bfs_depth: usize::MAX,
    local_iterations: 1,
    max_global_iterations: 1,
    stop_rule: StopRule::Once,
};

/// Splits `g` into `k` blocks. Runs `cfg.repeats` recursive bisections with
/// seeds derived from `seed` and the attempt index, and keeps the one with
/// the smallest `(imbalance, cut)`; ties go to the lower attempt index.
pub fn initial_partition<E: Executor + ?Sized>(
    g: &Graph,
    k: u32,
    spec: &BalanceSpec,
    cfg: &InitConfig,
    seed: u64,
    exec: &E,
) -> Result<InitialPartition, Error> {
    if k == 0 {
        return Err(Error::InvalidConfig("k must be at least 1"));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidConfig(
            "initial partitioning needs at least one repeat",
        ));
    }
    if k == 1 {
        let partition = Partition::single_block(g);
        let balanced = partition.imbalance(spec) == 0;
        return Ok(InitialPartition {
            partition,
            attempt: 0,
            balanced,
        });
    }
    let attempts = exec.map(cfg.repeats, |i| {
        let mut rng = rng_from_seed(derive_seed(seed, &[i as u64]));
        let block_of = recursive_bisection(g, k, spec.epsilon, cfg, &mut rng);
        Partition::new(g, block_of, k).expect("bisection assigns blocks below k")
    });
    let (attempt, partition) = attempts
        .into_iter()
        .enumerate()
        .min_by_key(|(i, p)| (p.quality(spec), *i))
        .expect("at least one attempt");
    let balanced = partition.imbalance(spec) == 0;
    Ok(InitialPartition {
        partition,
        attempt,
        balanced,
    })
}

/// Block ids for `g` from recursive bisection into `k` parts. `k` splits as
/// `ceil(k/2)` / `floor(k/2)` with proportional target weights.
pub fn recursive_bisection<R: Rng>(
    g: &Graph,
    k: u32,
    epsilon: f64,
    cfg: &InitConfig,
    rng: &mut R,
) -> Vec<BlockId> {
    let levels = (u32::BITS - (k.max(1) - 1).leading_zeros()).max(1);
    let level_eps = epsilon / levels as f64;
    let mut block_of = vec![0; g.n()];
    let nodes: Vec<NodeId> = (0..g.n() as NodeId).collect();
    split(g, &nodes, 0, k, level_eps, cfg, rng, &mut block_of);
    block_of
}

#[allow(clippy::too_many_arguments)]
fn split<R: Rng>(
    sub: &Graph,
    original: &[NodeId],
    first: BlockId,
    k: u32,
    level_eps: f64,
    cfg: &InitConfig,
    rng: &mut R,
    out: &mut [BlockId],
) {
    if k <= 1 || sub.n() == 0 {
        for &v in original {
            out[v as usize] = first;
        }
        return;
    }
    let k_left = k.div_ceil(2);
    let total = sub.total_node_weight();
    let max_c = sub.max_node_weight();
    let left_target =
        ((2 * total as i128 * k_left as i128 + k as i128) / (2 * k as i128)) as Weight;
    let targets = [left_target, total - left_target];
    let caps = [k_left, k - k_left]
        .map(|ks| (total as f64 * ks as f64 / k as f64 * (1.0 + level_eps)) as Weight + max_c);
    let halves = bisect(sub, targets, caps, cfg, rng);

    for (side, (first, k_side)) in [(first, k_left), (first + k_left, k - k_left)]
        .into_iter()
        .enumerate()
    {
        let local: Vec<NodeId> = (0..sub.n() as NodeId)
            .filter(|&v| halves.block(v) as usize == side)
            .collect();
        let mapped: Vec<NodeId> = local.iter().map(|&v| original[v as usize]).collect();
        if k_side == 1 {
            for &v in &mapped {
                out[v as usize] = first;
            }
        } else {
            let child = sub.induced(&local);
            split(&child, &mapped, first, k_side, level_eps, cfg, rng, out);
        }
    }
}

fn bisection_quality(p: &Partition, caps: [Weight; 2]) -> Quality {
    let w = p.block_weights();
    let imbalance = (w[0] - caps[0]).max(w[1] - caps[1]).max(0);
    (imbalance, p.cut())
}

/// Two-way split of `g` aiming at block weights `targets`, with block 0 at
/// most `caps[0]` and block 1 at most `caps[1]` heavy.
///
/// Grows block 0 from a random seed node, always absorbing the frontier node
/// that most reduces the cut, until it reaches its target weight. When the
/// frontier runs dry (disconnected graphs) growth restarts from the heaviest
/// unassigned node. The best of the trials is then improved by FM.
pub fn bisect<R: Rng>(
    g: &Graph,
    targets: [Weight; 2],
    caps: [Weight; 2],
    cfg: &InitConfig,
    rng: &mut R,
) -> Partition {
    let mut best: Option<(Quality, Partition)> = None;
    for _ in 0..cfg.growing_trials_per_bisection.max(1) {
        let start = rng.gen_range(0..g.n()) as NodeId;
        let block_of = grow_region(g, start, targets[0]);
        let p = Partition::new(g, block_of, 2).expect("two blocks");
        let q = bisection_quality(&p, caps);
        if best.as_ref().is_none_or(|(bq, _)| q < *bq) {
            best = Some((q, p));
        }
    }
    let (_, mut p) = best.expect("at least one trial");
    for _ in 0..cfg.fm_passes {
        let band = Band::whole(g, &p, (0, 1));
        let state = PairState {
            pair: (0, 1),
            weight: [p.block_weight(0), p.block_weight(1)],
            cap: caps,
            cut: p.cut(),
        };
        let log = fm_pass(g, &band, &p, state, &BISECTION_FM, rng.gen());
        if log.best_prefix == 0 {
            break;
        }
        for mv in log.kept() {
            p.move_node(g, mv.node, mv.to);
        }
    }
    p
}

/// Block 0 grown from `start` up to about `target` weight; everything else
/// is block 1.
fn grow_region(g: &Graph, start: NodeId, target: Weight) -> Vec<BlockId> {
    let n = g.n();
    let mut block_of = vec![1; n];
    // connection of each node to the region, and its total incident weight
    let mut inside = vec![0 as Weight; n];
    let out: Vec<Weight> = (0..n as NodeId)
        .map(|v| g.neighbors(v).map(|(_, w)| w).sum())
        .collect();
    let mut frontier: BinaryHeap<(Weight, Reverse<NodeId>)> = BinaryHeap::new();
    let mut weight = 0;
    let mut next = Some(start);

    while weight < target {
        let v = match next.take() {
            Some(v) => v,
            None => {
                let mut found = None;
                while let Some((gain, Reverse(v))) = frontier.pop() {
                    if block_of[v as usize] == 1 && gain == 2 * inside[v as usize] - out[v as usize]
                    {
                        found = Some(v);
                        break;
                    }
                }
                match found {
                    Some(v) => v,
                    None => {
                        let heaviest = (0..n as NodeId)
                            .filter(|&v| block_of[v as usize] == 1)
                            .max_by_key(|&v| (g.node_weight(v), Reverse(v)));
                        match heaviest {
                            Some(v) => v,
                            None => break,
                        }
                    }
                }
            }
        };
        let c = g.node_weight(v);
        if weight > 0 && weight + c - target > target - weight {
            break;
        }
        block_of[v as usize] = 0;
        weight += c;
        for (w, omega) in g.neighbors(v) {
            if block_of[w as usize] == 1 {
                inside[w as usize] += omega;
                frontier.push((2 * inside[w as usize] - out[w as usize], Reverse(w)));
            }
        }
    }
    block_of
}
