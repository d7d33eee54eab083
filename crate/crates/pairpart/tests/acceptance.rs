//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits nonzero if any fails.

use std::collections::HashMap;
use std::time::Instant;

use pairpart::bench::{builtin_suite, geometric_mean, Instance};
use pairpart::exec::ThreadPool;
use pairpart::gen::{gen_grid, gen_rgg, gen_two_cliques};
use pairpart::io::format_partition;
use pairpart_core::fm::{
    extract_band, fm_pass, refine_pair, PairState, QueueStrategy, RefineConfig, StopRule,
};
use pairpart_core::graph::contract;
use pairpart_core::matching::{brute_force_max_matching, gpa, greedy_matching, MatcherKind};
use pairpart_core::partition::cut_weight;
use pairpart_core::quotient::{build_quotient, color_edges, QuotientEdge, QuotientGraph};
use pairpart_core::rating::rate_all;
use pairpart_core::runtime::{NoClock, Sequential};
use pairpart_core::{
    run_multilevel, BalanceSpec, BlockId, Graph, NodeId, Partition, Preset, RatingKind, RunConfig,
    Weight,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, max_w: Weight) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u as NodeId, v as NodeId, rng.gen_range(1..=max_w)));
            }
        }
    }
    let weights = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    Graph::from_edges(n, &edges, weights).unwrap()
}

/// Sparse random graph with about `n * degree / 2` edges.
fn sparse_graph(rng: &mut ChaCha8Rng, n: usize, degree: f64) -> Graph {
    let m = (n as f64 * degree / 2.0) as usize;
    let edges: Vec<_> = (0..m)
        .map(|_| {
            let u = rng.gen_range(0..n as NodeId);
            let v = (u + rng.gen_range(1..n as NodeId)) % n as NodeId;
            (u, v, rng.gen_range(1..=4))
        })
        .collect();
    let weights = (0..n).map(|_| rng.gen_range(1..=3)).collect();
    Graph::from_edges(n, &edges, weights).unwrap()
}

fn ratings(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(0.01..100.0)).collect()
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = 0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=10);
        let p = rng.gen_range(0.1..0.9);
        let g = random_graph(&mut rng, n, p, 1);
        let r = ratings(&mut rng, g.m());
        let (opt, _) = brute_force_max_matching(&g, &r);
        for m in [greedy_matching(&g, &r), gpa(&g, &r)] {
            if m.validate(&g).is_err() || m.rated_weight() < 0.5 * opt - 1e-9 {
                failures += 1;
            }
        }
    }
    let mut exact_failures = 0;
    let mut structured = 0;
    for len in 1..=11usize {
        for cycle in [false, true] {
            let n = len + 1;
            if cycle && (n < 4 || n % 2 == 1) {
                continue;
            }
            for _ in 0..10 {
                let mut perm: Vec<NodeId> = (0..n as NodeId).collect();
                for i in (1..n).rev() {
                    perm.swap(i, rng.gen_range(0..=i));
                }
                let mut edges: Vec<_> = perm.windows(2).map(|w| (w[0], w[1], 1)).collect();
                if cycle {
                    edges.push((perm[n - 1], perm[0], 1));
                }
                let g = Graph::unit(n, &edges).unwrap();
                let r = ratings(&mut rng, g.m());
                structured += 1;
                if (gpa(&g, &r).rated_weight() - brute_force_max_matching(&g, &r).0).abs() > 1e-9 {
                    exact_failures += 1;
                }
            }
        }
    }
    outcome(
        failures == 0 && exact_failures == 0,
        format!(
            "500 random graphs, {failures} below half the optimum; {structured} paths/even cycles, {exact_failures} GPA misses"
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cut_failures = 0;
    let mut weight_failures = 0;
    let mut checks = 0;
    for _ in 0..200 {
        let n = rng.gen_range(20..=200);
        let degree = rng.gen_range(2.0..8.0);
        let g = sparse_graph(&mut rng, n, degree);
        let kind = RatingKind::ALL[rng.gen_range(0..RatingKind::ALL.len())];
        let matcher =
            [MatcherKind::Shem, MatcherKind::Greedy, MatcherKind::Gpa][rng.gen_range(0..3)];
        let mut graphs = vec![g];
        let mut maps = Vec::new();
        for _ in 0..3 {
            let fine = graphs.last().unwrap();
            let m = matcher.run(fine, &rate_all(fine, kind), &mut rng);
            let (coarse, map) = contract(fine, &m).unwrap();
            if coarse.total_node_weight() != fine.total_node_weight() {
                weight_failures += 1;
            }
            graphs.push(coarse);
            maps.push(map);
        }
        for _ in 0..20 {
            let k = rng.gen_range(2..=8);
            let top = graphs.last().unwrap();
            let mut p = Partition::new(top, (0..top.n()).map(|_| rng.gen_range(0..k)).collect(), k)
                .unwrap();
            for level in (0..3).rev() {
                let fine = p.project(&graphs[level], &maps[level]).unwrap();
                checks += 1;
                if fine.cut() != p.cut()
                    || fine.cut() != cut_weight(&graphs[level], fine.block_of())
                {
                    cut_failures += 1;
                }
                p = fine;
            }
        }
    }
    outcome(
        cut_failures == 0 && weight_failures == 0,
        format!(
            "{checks} projections, {cut_failures} cut mismatches, {weight_failures} weight changes"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = 0;
    let mut fallbacks = 0;
    for i in 0..200 {
        let k = rng.gen_range(2..=32u32);
        let q = if i % 2 == 0 {
            let density = rng.gen_range(0.05..1.0);
            let mut edges = Vec::new();
            for a in 0..k {
                for b in a + 1..k {
                    if rng.gen_bool(density) {
                        edges.push(QuotientEdge {
                            a,
                            b,
                            cut_weight: 1,
                        });
                    }
                }
            }
            QuotientGraph::from_edges(k, edges)
        } else {
            let g = sparse_graph(&mut rng, 300, 5.0);
            let p =
                Partition::new(&g, (0..g.n()).map(|_| rng.gen_range(0..k)).collect(), k).unwrap();
            build_quotient(&g, &p)
        };
        let c = color_edges(&q, &mut rng);
        fallbacks += usize::from(c.used_fallback);
        if !c.is_proper(&q) || c.num_colors as usize > 2 * q.max_degree() {
            failures += 1;
        }
    }
    outcome(
        failures == 0,
        format!(
            "200 quotient graphs, {failures} improper or over 2·Δ, {fallbacks} needed the fallback"
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let strategies = [
        QueueStrategy::TopGain,
        QueueStrategy::Alternate,
        QueueStrategy::TopGainMaxLoad,
        QueueStrategy::MaxLoad,
    ];
    let mut worse = 0;
    let mut replay = 0;
    for _ in 0..100 {
        let n = rng.gen_range(10..=300);
        let degree = rng.gen_range(2.0..8.0);
        let g = sparse_graph(&mut rng, n, degree);
        let k = rng.gen_range(2..=6);
        let p = Partition::new(&g, (0..n).map(|_| rng.gen_range(0..k)).collect(), k).unwrap();
        let spec = BalanceSpec::new(&g, k, rng.gen_range(0.0..0.1)).unwrap();
        let a = rng.gen_range(0..k);
        let pair = (a, (a + rng.gen_range(1..k)) % k);
        let pair = (pair.0.min(pair.1), pair.0.max(pair.1));
        let cfg = RefineConfig {
            queue_strategy: strategies[rng.gen_range(0..4)],
            fm_patience: rng.gen_range(0.0..0.5),
            bfs_depth: rng.gen_range(1..=20),
            local_iterations: 1,
            max_global_iterations: 1,
            stop_rule: StopRule::Once,
        };
        let (sa, sb) = (rng.gen(), rng.gen());
        let r = refine_pair(&g, &p, pair, &spec, &cfg, sa, sb);
        if r.after.quality() > r.before.quality() {
            worse += 1;
        }
        let mut q = p.clone();
        r.apply(&g, &mut q);
        let w = [q.block_weight(pair.0), q.block_weight(pair.1)];
        let imbalance = (w[0] - spec.l_max).max(w[1] - spec.l_max).max(0);
        if (imbalance, cut_weight(&g, q.block_of())) != r.after.quality() {
            replay += 1;
        }

        // replay the kept prefix of one pass move by move
        let band = extract_band(&g, &p, pair, cfg.bfs_depth);
        let log = fm_pass(&g, &band, &p, PairState::of(&p, pair, &spec), &cfg, sa);
        let mut blocks: Vec<BlockId> = p.block_of().to_vec();
        let mut weights = [p.block_weight(pair.0), p.block_weight(pair.1)];
        for mv in log.kept() {
            blocks[mv.node as usize] = mv.to;
            let c = g.node_weight(mv.node);
            let from = usize::from(mv.from == pair.1);
            weights[from] -= c;
            weights[1 - from] += c;
        }
        let imbalance = (weights[0] - spec.l_max)
            .max(weights[1] - spec.l_max)
            .max(0);
        if (imbalance, cut_weight(&g, &blocks)) != log.best_quality() {
            replay += 1;
        }
    }
    outcome(
        worse == 0 && replay == 0,
        format!("100 instances, {worse} worsened, {replay} replay mismatches"),
    )
}

fn criterion_5() -> Outcome {
    let g = gen_rgg(12, 1);
    let pools: Vec<ThreadPool> = [1, 2, 4]
        .iter()
        .map(|&w| ThreadPool::new(w).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let mut mismatches = 0;
    for seed in 0..5 {
        let cfg = RunConfig::preset(Preset::Fast, 8).with_seed(seed);
        let files: Vec<Vec<u8>> = pools
            .iter()
            .map(|pool| {
                let (p, _) = run_multilevel(&g, &cfg, pool, &NoClock).unwrap();
                let path = dir.path().join(format!("s{seed}.w{}.part", pool.workers()));
                std::fs::write(&path, format_partition(p.block_of())).unwrap();
                std::fs::read(&path).unwrap()
            })
            .collect();
        mismatches += files.windows(2).filter(|w| w[0] != w[1]).count();
    }
    outcome(
        mismatches == 0,
        format!("5 seeds x workers 1/2/4, {mismatches} differing files"),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Variant {
    Minimal,
    Fast,
    Strong,
    FastWeight,
}

impl Variant {
    fn config(self, k: u32, seed: u64) -> RunConfig {
        let preset = match self {
            Variant::Minimal => Preset::Minimal,
            Variant::Fast | Variant::FastWeight => Preset::Fast,
            Variant::Strong => Preset::Strong,
        };
        let mut cfg = RunConfig::preset(preset, k).with_seed(seed);
        if self == Variant::FastWeight {
            cfg.coarsen.rating = RatingKind::Weight;
        }
        cfg
    }
}

#[derive(Clone, Copy)]
struct Run {
    cut: Weight,
    balanced: bool,
    seconds: f64,
}

/// Builtin-suite runs shared by criteria 6 to 8.
struct Runs {
    suite: Vec<Instance>,
    cache: HashMap<(usize, u32, u64, Variant), Run>,
}

impl Runs {
    fn get(&mut self, inst: usize, k: u32, seed: u64, variant: Variant) -> Run {
        let suite = &self.suite;
        *self
            .cache
            .entry((inst, k, seed, variant))
            .or_insert_with(|| {
                let start = Instant::now();
                let (p, stats) = run_multilevel(
                    &suite[inst].graph,
                    &variant.config(k, seed),
                    &Sequential,
                    &NoClock,
                )
                .unwrap();
                Run {
                    cut: p.cut(),
                    balanced: stats.balanced,
                    seconds: start.elapsed().as_secs_f64(),
                }
            })
    }

    /// Geometric mean over (instance, k) of the average cut, and the mean
    /// wall time per run.
    fn summary(&mut self, ks: &[u32], seeds: u64, variant: Variant) -> (f64, f64) {
        let mut avg_cuts = Vec::new();
        let mut seconds = Vec::new();
        for inst in 0..self.suite.len() {
            for &k in ks {
                let runs: Vec<Run> = (0..seeds).map(|s| self.get(inst, k, s, variant)).collect();
                avg_cuts.push(runs.iter().map(|r| r.cut as f64).sum::<f64>() / runs.len() as f64);
                seconds.extend(runs.iter().map(|r| r.seconds));
            }
        }
        let time = seconds.iter().sum::<f64>() / seconds.len() as f64;
        (geometric_mean(&avg_cuts).unwrap(), time)
    }
}

fn criterion_6(runs: &mut Runs) -> Outcome {
    let mut total = 0;
    let mut unbalanced = Vec::new();
    for inst in 0..runs.suite.len() {
        for k in [2, 4, 8, 16] {
            for seed in 0..10 {
                total += 1;
                if !runs.get(inst, k, seed, Variant::Fast).balanced {
                    unbalanced.push(format!("{}/k{k}/s{seed}", runs.suite[inst].name));
                }
            }
        }
    }
    let rate = (total - unbalanced.len()) as f64 / total as f64;
    let flagged = if unbalanced.is_empty() {
        String::new()
    } else {
        format!(", flagged: {}", unbalanced.join(" "))
    };
    outcome(
        rate >= 0.95,
        format!("{:.1}% of {total} runs balanced{flagged}", 100.0 * rate),
    )
}

fn criterion_7(runs: &mut Runs) -> Outcome {
    let (weight, _) = runs.summary(&[8, 16], 10, Variant::FastWeight);
    let (star2, _) = runs.summary(&[8, 16], 10, Variant::Fast);
    outcome(
        weight >= 0.98 * star2,
        format!(
            "geometric-mean cut weight {weight:.1} vs expansion_star2 {star2:.1} ({:+.1}%)",
            100.0 * (weight / star2 - 1.0)
        ),
    )
}

fn criterion_8(runs: &mut Runs) -> Outcome {
    let (minimal, t_min) = runs.summary(&[8, 16], 10, Variant::Minimal);
    let (fast, t_fast) = runs.summary(&[8, 16], 10, Variant::Fast);
    let (strong, t_strong) = runs.summary(&[8, 16], 10, Variant::Strong);
    let cuts = strong <= fast * 1.01 && fast * 1.01 <= minimal * 1.02;
    let times = t_min < t_fast && t_fast < t_strong;
    outcome(
        cuts && times,
        format!(
            "cut minimal/fast/strong {minimal:.1}/{fast:.1}/{strong:.1}, mean time {:.1}/{:.1}/{:.1} ms",
            1e3 * t_min,
            1e3 * t_fast,
            1e3 * t_strong
        ),
    )
}

fn criterion_9() -> Outcome {
    let cycle = Graph::unit(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (0, 3, 1)]).unwrap();
    let cases = [
        ("4x4 grid", gen_grid(4, 4), 4),
        ("C4", cycle, 2),
        ("two 8-cliques", gen_two_cliques(8), 1),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g, optimum) in cases {
        let hits = (0..10)
            .filter(|&seed| {
                let cfg = RunConfig::preset(Preset::Fast, 2).with_seed(seed);
                let (p, stats) = run_multilevel(&g, &cfg, &Sequential, &NoClock).unwrap();
                p.cut() == optimum && stats.balanced
            })
            .count();
        pass &= hits >= 9;
        parts.push(format!("{name} {hits}/10"));
    }
    outcome(pass, parts.join(", "))
}

fn report(id: usize, title: &str, start: Instant, o: &Outcome, results: &mut Vec<bool>) {
    println!(
        "criterion {id:>2} {} {title}: {} [{:.2}s]",
        if o.pass { "PASS" } else { "FAIL" },
        o.detail,
        start.elapsed().as_secs_f64()
    );
    results.push(o.pass);
}

fn main() {
    // libtest flags such as --nocapture are accepted and ignored
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let suite_start = Instant::now();
    let mut results = Vec::new();
    type Criterion = (&'static str, fn() -> Outcome);
    let standalone: [Criterion; 5] = [
        ("matching approximation", criterion_1),
        ("cut preservation", criterion_2),
        ("quotient coloring", criterion_3),
        ("refinement safety", criterion_4),
        ("determinism across workers", criterion_5),
    ];
    for (i, (title, f)) in standalone.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        report(i + 1, title, start, &o, &mut results);
    }

    let mut runs = Runs {
        suite: builtin_suite(),
        cache: HashMap::new(),
    };
    type SuiteCriterion = (&'static str, fn(&mut Runs) -> Outcome);
    let on_suite: [SuiteCriterion; 3] = [
        ("balance compliance", criterion_6),
        ("rating ordering", criterion_7),
        ("preset ordering", criterion_8),
    ];
    for (i, (title, f)) in on_suite.iter().enumerate() {
        let start = Instant::now();
        let o = f(&mut runs);
        report(i + 6, title, start, &o, &mut results);
    }
    let start = Instant::now();
    report(9, "known optima", start, &criterion_9(), &mut results);

    let total = suite_start.elapsed().as_secs_f64();
    let budget = outcome(
        total < 300.0,
        format!("whole suite took {total:.1}s of 300s"),
    );
    report(10, "end-to-end budget", suite_start, &budget, &mut results);

    let failed = results.iter().filter(|&&p| !p).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
