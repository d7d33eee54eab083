//! Benchmark harness: repeated seeded runs over an instance suite, reported
//! per instance and aggregated with geometric means.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use pairpart_core::runtime::{Executor, NoClock};
use pairpart_core::{run_multilevel, BalanceSpec, Graph, Partition, RunConfig, Weight};

use crate::gen::{gen_grid, gen_rgg, gen_two_community};
use crate::io;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometric mean of an empty list")]
    Empty,
    #[error("geometric mean is undefined for {0}")]
    NonPositive(f64),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{instance}, k = {k}: {source}")]
    Run {
        instance: String,
        k: u32,
        source: pairpart_core::Error,
    },
}

pub fn geometric_mean(values: &[f64]) -> Result<f64, Error> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    if let Some(&bad) = values.iter().find(|&&x| x.is_nan() || x <= 0.0) {
        return Err(Error::NonPositive(bad));
    }
    let log_sum: f64 = values.iter().map(|x| x.ln()).sum();
    Ok((log_sum / values.len() as f64).exp())
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub graph: Graph,
}

/// rgg10, rgg12, 64x64 and 100x100 grids, and a two-community graph.
pub fn builtin_suite() -> Vec<Instance> {
    let instance = |name: &str, graph| Instance {
        name: name.to_owned(),
        graph,
    };
    vec![
        instance("rgg10", gen_rgg(10, 1)),
        instance("rgg12", gen_rgg(12, 1)),
        instance("grid64x64", gen_grid(64, 64)),
        instance("grid100x100", gen_grid(100, 100)),
        instance("two_community", gen_two_community(1000, 8.0, 20, 1)),
    ]
}

/// Every `*.graph` file in `dir`, sorted by name, with coordinates from a
/// sibling `*.xyz` file when present.
pub fn load_suite(dir: &Path) -> Result<Vec<Instance>, io::Error> {
    let entries = fs::read_dir(dir).map_err(|source| io::Error::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "graph"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let mut graph = io::read_metis(&path)?;
            let xyz = path.with_extension("xyz");
            if xyz.exists() {
                let coords = io::read_coords(&xyz, graph.n())?;
                graph = graph.with_coords(coords)?;
            }
            let name = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok(Instance { name, graph })
        })
        .collect()
}

/// Heaviest block relative to the average block weight.
pub fn balance(p: &Partition) -> f64 {
    let total: Weight = p.block_weights().iter().sum();
    let max = p.block_weights().iter().copied().max().unwrap_or(0);
    if total == 0 {
        1.0
    } else {
        max as f64 * p.k() as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub k: u32,
    pub seed: u64,
    pub cut: Weight,
    pub balance: f64,
    pub imbalance: Weight,
    pub seconds: f64,
}

impl RunRecord {
    pub fn balanced(&self) -> bool {
        self.imbalance == 0
    }
}

/// One timed run of `cfg` on `inst`.
pub fn run_once<E: Executor + ?Sized>(
    inst: &Instance,
    cfg: &RunConfig,
    exec: &E,
) -> Result<(Partition, RunRecord), Error> {
    let start = Instant::now();
    let (p, stats) =
        run_multilevel(&inst.graph, cfg, exec, &NoClock).map_err(|source| Error::Run {
            instance: inst.name.clone(),
            k: cfg.k,
            source,
        })?;
    let seconds = start.elapsed().as_secs_f64();
    let record = RunRecord {
        instance: inst.name.clone(),
        k: cfg.k,
        seed: cfg.master_seed,
        cut: p.cut(),
        balance: balance(&p),
        imbalance: stats.final_imbalance,
        seconds,
    };
    Ok((p, record))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub instance: String,
    pub k: u32,
    pub runs: usize,
    pub avg_cut: f64,
    pub best_cut: Weight,
    pub avg_balance: f64,
    pub avg_seconds: f64,
    /// Runs whose result violates the balance constraint.
    pub unbalanced: usize,
}

impl Row {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let runs = records.len();
        let mean =
            |f: &dyn Fn(&RunRecord) -> f64| records.iter().map(f).sum::<f64>() / runs.max(1) as f64;
        Self {
            instance: records
                .first()
                .map(|r| r.instance.clone())
                .unwrap_or_default(),
            k: records.first().map_or(0, |r| r.k),
            runs,
            avg_cut: mean(&|r| r.cut as f64),
            best_cut: records.iter().map(|r| r.cut).min().unwrap_or(0),
            avg_balance: mean(&|r| r.balance),
            avg_seconds: mean(&|r| r.seconds),
            unbalanced: records.iter().filter(|r| !r.balanced()).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<Row>,
    pub records: Vec<RunRecord>,
    /// Geometric means over rows; `None` where some value is zero.
    pub geo_avg_cut: Option<f64>,
    pub geo_best_cut: Option<f64>,
    pub geo_avg_balance: Option<f64>,
    pub geo_avg_seconds: Option<f64>,
}

impl BenchReport {
    pub fn from_records(records: Vec<RunRecord>) -> Self {
        let mut rows: Vec<Row> = Vec::new();
        let mut start = 0;
        for i in 1..=records.len() {
            let boundary = i == records.len()
                || records[i].instance != records[start].instance
                || records[i].k != records[start].k;
            if boundary && i > start {
                rows.push(Row::from_records(&records[start..i]));
                start = i;
            }
        }
        let geo =
            |f: &dyn Fn(&Row) -> f64| geometric_mean(&rows.iter().map(f).collect::<Vec<_>>()).ok();
        Self {
            geo_avg_cut: geo(&|r| r.avg_cut),
            geo_best_cut: geo(&|r| r.best_cut as f64),
            geo_avg_balance: geo(&|r| r.avg_balance),
            geo_avg_seconds: geo(&|r| r.avg_seconds),
            rows,
            records,
        }
    }

    pub fn render(&self) -> String {
        let opt = |x: Option<f64>, digits: usize| match x {
            Some(x) => format!("{x:.digits$}"),
            None => "n/a".to_owned(),
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:>4} {:>5} {:>12} {:>10} {:>12} {:>12} {:>10}",
            "instance",
            "k",
            "runs",
            "avg cut",
            "best cut",
            "avg balance",
            "avg time [s]",
            "unbalanced"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<16} {:>4} {:>5} {:>12.1} {:>10} {:>12.4} {:>12.4} {:>10}",
                r.instance,
                r.k,
                r.runs,
                r.avg_cut,
                r.best_cut,
                r.avg_balance,
                r.avg_seconds,
                r.unbalanced
            );
        }
        let _ = writeln!(
            out,
            "{:<16} {:>4} {:>5} {:>12} {:>10} {:>12} {:>12} {:>10}",
            "geometric mean",
            "",
            "",
            opt(self.geo_avg_cut, 1),
            opt(self.geo_best_cut, 1),
            opt(self.geo_avg_balance, 4),
            opt(self.geo_avg_seconds, 4),
            self.rows.iter().map(|r| r.unbalanced).sum::<usize>()
        );
        out
    }
}

/// Runs every instance for every `k` with seeds `cfg.master_seed + rep`.
/// With `out_dir`, each partition is written to
/// `<instance>.k<k>.s<seed>.part` there.
pub fn run_bench<E: Executor + ?Sized>(
    instances: &[Instance],
    k_list: &[u32],
    reps: usize,
    cfg: &RunConfig,
    exec: &E,
    out_dir: Option<&Path>,
) -> Result<BenchReport, Error> {
    let mut records = Vec::new();
    for inst in instances {
        for &k in k_list {
            for rep in 0..reps {
                let run_cfg = RunConfig {
                    k,
                    master_seed: cfg.master_seed.wrapping_add(rep as u64),
                    ..*cfg
                };
                let (p, record) = run_once(inst, &run_cfg, exec)?;
                if let Some(dir) = out_dir {
                    let name = format!("{}.k{}.s{}.part", inst.name, k, run_cfg.master_seed);
                    io::write_partition(&dir.join(name), p.block_of())?;
                }
                records.push(record);
            }
        }
    }
    Ok(BenchReport::from_records(records))
}

/// Whether `p` meets the balance constraint of `k` and `epsilon` on `g`.
pub fn is_balanced(g: &Graph, p: &Partition, epsilon: f64) -> bool {
    BalanceSpec::new(g, p.k(), epsilon).is_ok_and(|spec| p.imbalance(&spec) == 0)
}
