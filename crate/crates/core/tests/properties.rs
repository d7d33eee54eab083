use std::collections::HashSet;

use pairpart_core::coarsen::{coarsen_until, BlockAssignment, CoarsenConfig};
use pairpart_core::fm::{
    extract_band, fm_pass, gain, refine_pair, PairState, QueueStrategy, RefineConfig, StopRule,
};
use pairpart_core::graph::contract;
use pairpart_core::matching::{
    brute_force_max_matching, gpa, greedy_matching, rated_edge_order, shem, MatcherKind,
};
use pairpart_core::partition::cut_weight;
use pairpart_core::quotient::{color_edges, schedule, QuotientEdge, QuotientGraph};
use pairpart_core::rating::{rate_all, rate_edge};
use pairpart_core::runtime::{derive_seed, refine_seed, Executor, NoClock, Sequential};
use pairpart_core::{
    run_multilevel, BalanceSpec, BlockId, Graph, NodeId, Partition, Preset, RatingKind, RunConfig,
    Weight,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type RawEdges = Vec<(NodeId, NodeId, Weight)>;

/// Random loop-free edge lists on `2..=max_n` nodes; duplicates are merged
/// by the graph constructor.
fn raw_graph(
    max_n: usize,
    max_m: usize,
    max_w: Weight,
) -> impl Strategy<Value = (usize, RawEdges)> {
    (2..=max_n).prop_flat_map(move |n| {
        let edge = (0..n as NodeId, 1..n as NodeId, 1..=max_w)
            .prop_map(move |(u, d, w)| (u, (u + d) % n as NodeId, w));
        (Just(n), prop::collection::vec(edge, 0..=max_m))
    })
}

fn graph(max_n: usize, max_m: usize, max_w: Weight) -> impl Strategy<Value = Graph> {
    (raw_graph(max_n, max_m, max_w), any::<u64>()).prop_map(|((n, edges), seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..n).map(|_| rng.gen_range(0..4)).collect();
        Graph::from_edges(n, &edges, weights).unwrap()
    })
}

fn random_blocks(n: usize, k: u32, rng: &mut ChaCha8Rng) -> Vec<BlockId> {
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

fn random_ratings(m: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.01..10.0)).collect()
}

fn pair_quality(
    g: &Graph,
    blocks: &[BlockId],
    pair: (BlockId, BlockId),
    l_max: Weight,
) -> (Weight, Weight) {
    let mut w = [0, 0];
    for (v, &b) in blocks.iter().enumerate() {
        if b == pair.0 {
            w[0] += g.node_weight(v as NodeId);
        } else if b == pair.1 {
            w[1] += g.node_weight(v as NodeId);
        }
    }
    (
        (w[0] - l_max).max(w[1] - l_max).max(0),
        cut_weight(g, blocks),
    )
}

fn refine_cfg(patience: f64, depth: usize, strategy: QueueStrategy) -> RefineConfig {
    RefineConfig {
        queue_strategy: strategy,
        fm_patience: patience,
        bfs_depth: depth,
        local_iterations: 1,
        max_global_iterations: 1,
        stop_rule: StopRule::Once,
    }
}

const STRATEGIES: [QueueStrategy; 4] = [
    QueueStrategy::TopGain,
    QueueStrategy::Alternate,
    QueueStrategy::TopGainMaxLoad,
    QueueStrategy::MaxLoad,
];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn construction_is_symmetric(g in graph(30, 80, 5)) {
        for v in 0..g.n() as NodeId {
            for (w, omega) in g.neighbors(v) {
                prop_assert_ne!(v, w);
                prop_assert!(omega > 0);
                prop_assert!(g.neighbors(w).any(|(x, o)| x == v && o == omega));
            }
        }
        let arcs: usize = (0..g.n() as NodeId).map(|v| g.degree(v)).sum();
        prop_assert_eq!(arcs, 2 * g.m());
    }

    #[test]
    fn contraction_conserves_weight_and_cut(g in graph(50, 150, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = greedy_matching(&g, &random_ratings(g.m(), &mut rng));
        let (coarse, map) = contract(&g, &m).unwrap();
        prop_assert_eq!(coarse.n(), g.n() - m.len());
        prop_assert_eq!(coarse.total_node_weight(), g.total_node_weight());
        prop_assert_eq!(coarse.total_edge_weight(), g.total_edge_weight() - m.weight());
        for _ in 0..5 {
            let k = rng.gen_range(1..=4);
            let p = Partition::new(&coarse, random_blocks(coarse.n(), k, &mut rng), k).unwrap();
            let fine = p.project(&g, &map).unwrap();
            prop_assert_eq!(fine.cut(), p.cut());
            prop_assert_eq!(fine.block_weights(), p.block_weights());
            prop_assert!(fine.is_consistent(&g));
        }
        // unmatched nodes keep their weight and degree
        for v in 0..g.n() as NodeId {
            if !m.is_matched(v) {
                let x = map[v as usize];
                prop_assert_eq!(coarse.node_weight(x), g.node_weight(v));
                prop_assert!(coarse.degree(x) <= g.degree(v));
            }
        }
    }

    #[test]
    fn move_caches_stay_exact(g in graph(40, 120, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(1..=5);
        let mut p = Partition::new(&g, random_blocks(g.n(), k, &mut rng), k).unwrap();
        for _ in 0..60 {
            let v = rng.gen_range(0..g.n() as NodeId);
            p.move_node(&g, v, rng.gen_range(0..k));
        }
        prop_assert!(p.is_consistent(&g));
        prop_assert_eq!(p.cut(), cut_weight(&g, p.block_of()));
        prop_assert_eq!(p.block_weights().iter().sum::<Weight>(), g.total_node_weight());
    }

    #[test]
    fn rating_order_survives_scaling(g in graph(25, 60, 6), gamma in 2..6i64) {
        let scaled_edges: RawEdges = g.edges().iter().map(|e| (e.u, e.v, e.weight * gamma)).collect();
        let scaled = Graph::from_edges(g.n(), &scaled_edges, g.node_weights().to_vec()).unwrap();
        for kind in RatingKind::ALL {
            let r = rate_all(&g, kind);
            prop_assert!(r.iter().all(|&x| x > 0.0));
            for (e, &x) in r.iter().enumerate() {
                prop_assert_eq!(x.to_bits(), rate_edge(&g, e as u32, kind).to_bits());
            }
            prop_assert_eq!(rated_edge_order(&r), rated_edge_order(&rate_all(&scaled, kind)));
        }
    }

    #[test]
    fn matchings_are_valid_maximal_and_deterministic(g in graph(40, 120, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_ratings(g.m(), &mut rng);
        for kind in [MatcherKind::Shem, MatcherKind::Greedy, MatcherKind::Gpa] {
            let m = kind.run(&g, &r, &mut ChaCha8Rng::seed_from_u64(seed));
            m.validate(&g).unwrap();
            prop_assert!(m.is_maximal(&g));
            prop_assert_eq!(m, kind.run(&g, &r, &mut ChaCha8Rng::seed_from_u64(seed)));
        }
    }

    #[test]
    fn half_approximation(g in graph(9, 14, 1), seed in any::<u64>()) {
        let r = random_ratings(g.m(), &mut ChaCha8Rng::seed_from_u64(seed));
        let (opt, best) = brute_force_max_matching(&g, &r);
        best.validate(&g).unwrap();
        for m in [greedy_matching(&g, &r), gpa(&g, &r), shem(&g, &r, &mut ChaCha8Rng::seed_from_u64(seed))] {
            prop_assert!(m.rated_weight() <= opt + 1e-9);
        }
        prop_assert!(greedy_matching(&g, &r).rated_weight() >= 0.5 * opt - 1e-9);
        prop_assert!(gpa(&g, &r).rated_weight() >= 0.5 * opt - 1e-9);
    }

    #[test]
    fn gpa_is_exact_on_paths_and_even_cycles(len in 1..12usize, cycle in any::<bool>(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<NodeId> = (0..=len as NodeId).collect();
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let n = perm.len();
        let mut edges: RawEdges = perm.windows(2).map(|w| (w[0], w[1], 1)).collect();
        if cycle && n >= 4 && n.is_multiple_of(2) {
            edges.push((perm[n - 1], perm[0], 1));
        }
        let g = Graph::unit(n, &edges).unwrap();
        let r = random_ratings(g.m(), &mut rng);
        let m = gpa(&g, &r);
        prop_assert!((m.rated_weight() - brute_force_max_matching(&g, &r).0).abs() < 1e-9);
    }

    #[test]
    fn hierarchies_shrink_and_preserve_cuts(g in graph(120, 360, 3), seed in any::<u64>()) {
        let cfg = CoarsenConfig { min_coarse_per_block: 2, ..CoarsenConfig::default() };
        let prepart = BlockAssignment::new((0..g.n() as u32).map(|v| v % 3).collect(), 3).unwrap();
        let h = coarsen_until(&g, 2, &cfg, &prepart, seed, &Sequential).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (i, level) in h.levels.iter().enumerate() {
            let fine = h.graph(&g, i);
            level.matching.validate(fine).unwrap();
            prop_assert!(level.coarse.n() < fine.n());
            prop_assert_eq!(level.coarse.total_node_weight(), g.total_node_weight());
            let p = Partition::new(&level.coarse, random_blocks(level.coarse.n(), 3, &mut rng), 3).unwrap();
            prop_assert_eq!(p.project(fine, &level.coarse_map).unwrap().cut(), p.cut());
        }
    }

    #[test]
    fn colorings_are_proper_and_cover_every_edge(k in 2..=32u32, density in 0.05..1.0f64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for a in 0..k {
            for b in a + 1..k {
                if rng.gen_bool(density) {
                    edges.push(QuotientEdge { a, b, cut_weight: rng.gen_range(1..10) });
                }
            }
        }
        let q = QuotientGraph::from_edges(k, edges);
        let c = color_edges(&q, &mut rng);
        prop_assert!(c.is_proper(&q));
        prop_assert!(c.num_colors as usize <= 2 * q.max_degree());
        let rounds = schedule(&q, &c);
        let mut covered: Vec<(u32, u32)> = rounds.iter().flatten().copied().collect();
        prop_assert_eq!(covered.len(), q.edges().len());
        covered.sort_unstable();
        let expected: Vec<(u32, u32)> = q.edges().iter().map(|e| (e.a, e.b)).collect();
        prop_assert_eq!(covered, expected);
        for round in &rounds {
            let mut blocks: Vec<u32> = round.iter().flat_map(|&(a, b)| [a, b]).collect();
            blocks.sort_unstable();
            prop_assert!(blocks.windows(2).all(|w| w[0] != w[1]));
        }
    }

    #[test]
    fn gains_match_recomputation_after_moves(g in graph(100, 300, 5), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut blocks = random_blocks(g.n(), 3, &mut rng);
        for _ in 0..40 {
            let v = rng.gen_range(0..g.n() as NodeId);
            blocks[v as usize] = rng.gen_range(0..3);
            let u = rng.gen_range(0..g.n() as NodeId);
            let target = (blocks[u as usize] + 1) % 3;
            let before = cut_weight(&g, &blocks);
            let mut moved = blocks.clone();
            moved[u as usize] = target;
            prop_assert_eq!(gain(&g, u, &blocks[..], target), before - cut_weight(&g, &moved));
        }
    }

    #[test]
    fn fm_logs_replay_exactly(g in graph(60, 180, 4), seed in any::<u64>(), depth in 1..6usize, s in 0..4usize, patience in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=4);
        let p = Partition::new(&g, random_blocks(g.n(), k, &mut rng), k).unwrap();
        let spec = BalanceSpec::new(&g, k, 0.03).unwrap();
        let pair = (0, 1);
        let cfg = refine_cfg(patience, depth, STRATEGIES[s]);
        let band = extract_band(&g, &p, pair, depth);
        let log = fm_pass(&g, &band, &p, PairState::of(&p, pair, &spec), &cfg, seed);

        let mut blocks = p.block_of().to_vec();
        let mut moved = HashSet::new();
        let mut qualities = vec![pair_quality(&g, &blocks, pair, spec.l_max)];
        prop_assert_eq!(qualities[0], log.initial.quality());
        for mv in &log.moves {
            prop_assert!(band.contains(mv.node));
            prop_assert!(moved.insert(mv.node));
            prop_assert_eq!(blocks[mv.node as usize], mv.from);
            blocks[mv.node as usize] = mv.to;
            let q = pair_quality(&g, &blocks, pair, spec.l_max);
            prop_assert_eq!(q, mv.quality);
            qualities.push(q);
        }
        let best = (0..qualities.len()).min_by_key(|&i| (qualities[i], i)).unwrap();
        prop_assert_eq!(log.best_prefix, best);
    }

    #[test]
    fn refine_pair_never_worsens(g in graph(60, 180, 4), seed in any::<u64>(), depth in 1..6usize) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(2..=4);
        let p = Partition::new(&g, random_blocks(g.n(), k, &mut rng), k).unwrap();
        let spec = BalanceSpec::new(&g, k, 0.03).unwrap();
        let pair = (0, rng.gen_range(1..k));
        let cfg = refine_cfg(0.2, depth, QueueStrategy::TopGain);
        let r = refine_pair(&g, &p, pair, &spec, &cfg, seed, seed ^ 1);
        prop_assert!(r.after.quality() <= r.before.quality());
        let mut q = p.clone();
        r.apply(&g, &mut q);
        prop_assert!(q.is_consistent(&g));
        prop_assert_eq!(pair_quality(&g, q.block_of(), pair, spec.l_max), r.after.quality());
        prop_assert_eq!(r, refine_pair(&g, &p, pair, &spec, &cfg, seed, seed ^ 1));
    }
}

/// Runs units in reverse order and in uneven chunks on scoped threads.
struct Scrambled;

impl Executor for Scrambled {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        let f = &f;
        let mut out: Vec<(usize, T)> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..count)
                .rev()
                .collect::<Vec<_>>()
                .chunks(3)
                .map(|chunk| {
                    let chunk = chunk.to_vec();
                    s.spawn(move || chunk.into_iter().map(|i| (i, f(i))).collect::<Vec<_>>())
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().unwrap())
                .collect()
        });
        out.sort_by_key(|&(i, _)| i);
        out.into_iter().map(|(_, t)| t).collect()
    }
}

fn grid(rows: u32, cols: u32) -> Graph {
    let mut edges = Vec::new();
    let mut coords = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            coords.push([c as f64, r as f64]);
            if c + 1 < cols {
                edges.push((r * cols + c, r * cols + c + 1, 1));
            }
            if r + 1 < rows {
                edges.push((r * cols + c, (r + 1) * cols + c, 1));
            }
        }
    }
    Graph::unit((rows * cols) as usize, &edges)
        .unwrap()
        .with_coords(coords)
        .unwrap()
}

#[test]
fn runs_do_not_depend_on_the_executor() {
    let g = grid(30, 30);
    for preset in Preset::ALL {
        for seed in 0..3 {
            let cfg = RunConfig::preset(preset, 8).with_seed(seed);
            let (a, sa) = run_multilevel(&g, &cfg, &Sequential, &NoClock).unwrap();
            let (b, sb) = run_multilevel(&g, &cfg, &Scrambled, &NoClock).unwrap();
            assert_eq!(a, b);
            assert_eq!(sa, sb);
        }
    }
}

#[test]
fn runs_are_monotone_per_level_and_cover_every_quotient_edge() {
    let g = grid(24, 24);
    for k in [2, 5, 8] {
        let cfg = RunConfig::preset(Preset::Strong, k).with_seed(k as u64);
        let (p, stats) = run_multilevel(&g, &cfg, &Sequential, &NoClock).unwrap();
        assert!(p.is_consistent(&g));
        assert_eq!(p.k(), k);
        for (projected, refined) in stats.projected.iter().zip(&stats.refined) {
            assert!(refined <= projected);
        }
        assert_eq!(
            stats.pair_refinements,
            stats.quotient_edges * cfg.refine.local_iterations
        );
        assert_eq!(stats.levels(), stats.refined.len());
    }
}

#[test]
fn seeds_do_not_collide() {
    let mut seen = HashSet::with_capacity(1 << 20);
    for level in 0..10 {
        for gi in 0..10 {
            for color in 0..10 {
                for a in 0..10u32 {
                    for b in 0..10u32 {
                        for leg in 0..10 {
                            assert!(seen.insert(refine_seed(42, level, gi, color, (a, b), leg)));
                        }
                    }
                }
            }
        }
    }
    assert_eq!(seen.len(), 1_000_000);
    assert!(seen.insert(derive_seed(42, &[])));
}
