//! The multilevel driver: prepartition, coarsen, initial partition, and
//! level-by-level pairwise refinement scheduled by quotient edge colorings.
//!
//! Results depend only on the graph and the [`RunConfig`]. Every random
//! stream is seeded from the master seed and a position tag, and all pairs of
//! a color round read the same round-start snapshot, so the executor's
//! worker count cannot change the output.

use alloc::vec;
use alloc::vec::Vec;

use crate::coarsen::{coarsen_until, BlockAssignment};
use crate::config::RunConfig;
use crate::fm::{extract_band_from, refine_band, Overlay, PairResult, PairState};
use crate::graph::Graph;
use crate::initial::initial_partition;
use crate::partition::{BalanceSpec, Partition};
use crate::quotient::{build_quotient, color_edges};
use crate::{rng_from_seed, BlockId, Error, NodeId, Quality, Weight};

/// Runs independent work units, returning results in index order.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs every unit on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Source of wall-clock readings for phase timing.
pub trait Clock {
    fn seconds(&self) -> f64;
}

/// A clock that always reads zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the random stream at `path` below `master`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(master), |h, &x| mix(h ^ mix(x)))
}

const TAG_COARSEN: u64 = 1;
const TAG_INIT: u64 = 2;
const TAG_COLOR: u64 = 3;
const TAG_REFINE: u64 = 4;

/// Seed of one FM leg of a pair refinement. `leg` is
/// `2 * local_iteration + side`, so the two searches of a pair differ.
pub fn refine_seed(
    master: u64,
    level: usize,
    global_iter: usize,
    color: usize,
    pair: (BlockId, BlockId),
    leg: usize,
) -> u64 {
    let pair = ((pair.0 as u64) << 32) | pair.1 as u64;
    derive_seed(
        master,
        &[
            TAG_REFINE,
            level as u64,
            global_iter as u64,
            color as u64,
            pair,
            leg as u64,
        ],
    )
}

/// Recursive coordinate bisection into `parts` groups of near-equal size.
///
/// Splits alternate between x (even depth) and y, at the position that gives
/// the left side `ceil(len * ceil(p/2) / p)` nodes; equal coordinates are
/// ordered by node id. Without coordinates, nodes are split by id.
pub fn prepartition_rcb(
    coords: Option<&[[f64; 2]]>,
    n: usize,
    parts: u32,
) -> Result<BlockAssignment, Error> {
    if parts == 0 {
        return Err(Error::InvalidConfig("prepartition needs at least one part"));
    }
    if let Some(c) = coords {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: c.len(),
            });
        }
    }
    fn split(
        ids: &mut [NodeId],
        coords: Option<&[[f64; 2]]>,
        depth: usize,
        first: u32,
        parts: u32,
        out: &mut [u32],
    ) {
        if parts <= 1 || ids.len() <= 1 {
            for &v in ids.iter() {
                out[v as usize] = first;
            }
            return;
        }
        let left_parts = parts.div_ceil(2);
        let left = (ids.len() * left_parts as usize).div_ceil(parts as usize);
        match coords {
            Some(c) => {
                let axis = depth % 2;
                ids.sort_unstable_by(|&a, &b| {
                    c[a as usize][axis]
                        .total_cmp(&c[b as usize][axis])
                        .then(a.cmp(&b))
                });
            }
            None => ids.sort_unstable(),
        }
        let (lo, hi) = ids.split_at_mut(left);
        split(lo, coords, depth + 1, first, left_parts, out);
        split(
            hi,
            coords,
            depth + 1,
            first + left_parts,
            parts - left_parts,
            out,
        );
    }
    let mut ids: Vec<NodeId> = (0..n as NodeId).collect();
    let mut out = vec![0; n];
    split(&mut ids, coords, 0, 0, parts, &mut out);
    BlockAssignment::new(out, parts)
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseSeconds {
    pub coarsen: f64,
    pub initial: f64,
    pub refine: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    /// Cut after refinement on each level, coarsest first.
    pub level_cuts: Vec<Weight>,
    /// `(imbalance, cut)` right after projection onto each level, coarsest first.
    pub projected: Vec<Quality>,
    /// `(imbalance, cut)` after refinement on each level, coarsest first.
    pub refined: Vec<Quality>,
    pub final_cut: Weight,
    pub final_imbalance: Weight,
    pub l_max: Weight,
    /// True when every block of the result weighs at most `l_max`.
    pub balanced: bool,
    pub initial_balanced: bool,
    pub coarsest_nodes: usize,
    pub seconds: PhaseSeconds,
    pub master_seed: u64,
    pub global_iterations: usize,
    /// Quotient edges summed over all global iterations.
    pub quotient_edges: usize,
    /// Pair refinements performed, counting each local iteration.
    pub pair_refinements: usize,
}

impl RunStats {
    pub fn levels(&self) -> usize {
        self.level_cuts.len()
    }
}

/// Partitions `g` into `cfg.k` blocks.
pub fn run_multilevel<E: Executor + ?Sized, C: Clock + ?Sized>(
    g: &Graph,
    cfg: &RunConfig,
    exec: &E,
    clock: &C,
) -> Result<(Partition, RunStats), Error> {
    cfg.validate()?;
    let k = cfg.k;
    if g.n() == 0 {
        return Err(Error::TooManyBlocks {
            k: k as usize,
            n: 0,
        });
    }
    if k as usize > g.n() {
        return Err(Error::TooManyBlocks {
            k: k as usize,
            n: g.n(),
        });
    }
    let spec = BalanceSpec::new(g, k, cfg.epsilon)?;
    let mut stats = RunStats {
        l_max: spec.l_max,
        master_seed: cfg.master_seed,
        ..RunStats::default()
    };

    if k == 1 {
        let p = Partition::single_block(g);
        stats.final_imbalance = p.imbalance(&spec);
        stats.balanced = stats.final_imbalance == 0;
        stats.initial_balanced = stats.balanced;
        stats.coarsest_nodes = g.n();
        stats.level_cuts.push(0);
        stats.projected.push(p.quality(&spec));
        stats.refined.push(p.quality(&spec));
        return Ok((p, stats));
    }

    let t0 = clock.seconds();
    let parts = cfg.prepartition_parts.unwrap_or(k).min(g.n() as u32);
    let prepart = prepartition_rcb(g.coords(), g.n(), parts)?;
    let hierarchy = coarsen_until(
        g,
        k,
        &cfg.coarsen,
        &prepart,
        derive_seed(cfg.master_seed, &[TAG_COARSEN]),
        exec,
    )?;
    let t1 = clock.seconds();

    let coarsest = hierarchy.coarsest(g);
    stats.coarsest_nodes = coarsest.n();
    let init = initial_partition(
        coarsest,
        k,
        &spec,
        &cfg.init,
        derive_seed(cfg.master_seed, &[TAG_INIT]),
        exec,
    )?;
    stats.initial_balanced = init.balanced;
    let t2 = clock.seconds();

    let mut p = init.partition;
    for level in (0..=hierarchy.depth()).rev() {
        let graph = hierarchy.graph(g, level);
        if level < hierarchy.depth() {
            p = p.project(graph, &hierarchy.levels[level].coarse_map)?;
        }
        stats.projected.push(p.quality(&spec));
        p = refine_level(graph, p, &spec, cfg, level, exec, &mut stats);
        stats.refined.push(p.quality(&spec));
        stats.level_cuts.push(p.cut());
    }
    let t3 = clock.seconds();

    stats.final_cut = p.cut();
    stats.final_imbalance = p.imbalance(&spec);
    stats.balanced = stats.final_imbalance == 0;
    stats.seconds = PhaseSeconds {
        coarsen: t1 - t0,
        initial: t2 - t1,
        refine: t3 - t2,
    };
    Ok((p, stats))
}

/// Global iterations on one level. Returns the best partition seen, so the
/// level never ends worse than it started.
fn refine_level<E: Executor + ?Sized>(
    g: &Graph,
    mut p: Partition,
    spec: &BalanceSpec,
    cfg: &RunConfig,
    level: usize,
    exec: &E,
    stats: &mut RunStats,
) -> Partition {
    use crate::fm::StopRule;

    let mut best_quality = p.quality(spec);
    let mut best = p.clone();
    let mut idle = 0;
    for global_iter in 0..cfg.refine.max_global_iterations {
        let before = p.quality(spec);
        let q = build_quotient(g, &p);
        let mut rng = rng_from_seed(derive_seed(
            cfg.master_seed,
            &[TAG_COLOR, level as u64, global_iter as u64],
        ));
        let coloring = color_edges(&q, &mut rng);

        // boundary nodes of every quotient edge under the current partition
        let mut boundary: Vec<Vec<NodeId>> = vec![Vec::new(); q.edges().len()];
        for e in g.edges() {
            let (a, b) = (p.block(e.u), p.block(e.v));
            if a != b {
                let key = (a.min(b), a.max(b));
                let i = q
                    .edges()
                    .binary_search_by_key(&key, |qe| (qe.a, qe.b))
                    .expect("crossing pair is a quotient edge");
                boundary[i].push(e.u);
                boundary[i].push(e.v);
            }
        }

        let mut rounds: Vec<Vec<usize>> = vec![Vec::new(); coloring.num_colors as usize];
        for (i, &c) in coloring.color.iter().enumerate() {
            rounds[c as usize].push(i);
        }
        stats.global_iterations += 1;
        stats.quotient_edges += q.edges().len();

        for (color, round) in rounds.iter().enumerate() {
            if round.is_empty() {
                continue;
            }
            let snapshot = &p;
            let results = exec.map(round.len(), |j| {
                let i = round[j];
                let qe = q.edges()[i];
                refine_pair_locally(g, snapshot, (qe.a, qe.b), spec, cfg, &boundary[i], |leg| {
                    refine_seed(
                        cfg.master_seed,
                        level,
                        global_iter,
                        color,
                        (qe.a, qe.b),
                        leg,
                    )
                })
            });
            for r in &results {
                r.apply(g, &mut p);
            }
            stats.pair_refinements += results.len() * cfg.refine.local_iterations;
        }

        let after = p.quality(spec);
        if after < best_quality {
            best_quality = after;
            best = p.clone();
        }
        let improved = after < before;
        match cfg.refine.stop_rule {
            StopRule::Once => break,
            StopRule::NoChange if !improved => break,
            StopRule::TwoNoChange if !improved => {
                idle += 1;
                if idle >= 2 {
                    break;
                }
            }
            _ => idle = 0,
        }
    }
    best
}

/// `local_iterations` rounds of [`refine_band`] on one pair, each on a band
/// re-extracted from the pair's own updated view of `p`.
fn refine_pair_locally(
    g: &Graph,
    p: &Partition,
    pair: (BlockId, BlockId),
    spec: &BalanceSpec,
    cfg: &RunConfig,
    boundary: &[NodeId],
    seed: impl Fn(usize) -> u64,
) -> PairResult {
    let start = PairState::of(p, pair, spec);
    let mut overlay = Overlay::new(p.block_of());
    let mut state = start;
    let mut candidates = boundary.to_vec();
    for local in 0..cfg.refine.local_iterations {
        let band = extract_band_from(g, &overlay, pair, cfg.refine.bfs_depth, &candidates);
        if band.is_empty() {
            break;
        }
        let r = refine_band(
            g,
            &band,
            &overlay,
            state,
            &cfg.refine,
            [seed(2 * local), seed(2 * local + 1)],
        );
        // a node can only join the boundary next to a node that moved
        candidates = band.boundary;
        for &(v, b) in &r.assignments {
            overlay.set(v, b);
            candidates.push(v);
            candidates.extend(g.neighbors(v).map(|(w, _)| w));
        }
        state = r.after;
    }
    PairResult {
        pair,
        assignments: overlay.changes().collect(),
        before: start,
        after: state,
    }
}
