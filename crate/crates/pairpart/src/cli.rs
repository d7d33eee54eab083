//! Command-line interface.
//!
//! Exit codes: 0 success, 1 usage error, 2 I/O or input format error,
//! 3 the result violates the balance constraint (the partition is still
//! written).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pairpart_core::fm::QueueStrategy;
use pairpart_core::matching::MatcherKind;
use pairpart_core::runtime::Executor;
use pairpart_core::{run_multilevel, Preset, RatingKind, RunConfig};
use serde::Serialize;

use crate::bench::{self, balance};
use crate::exec::{ThreadPool, WallClock};
use crate::gen::{gen_grid, gen_rgg};
use crate::io;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pairpart",
    version,
    about = "Multilevel k-way graph partitioner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition a METIS graph file into k blocks.
    Partition(PartitionArgs),
    /// Run repeated partitions over an instance suite and print a report.
    Bench(BenchArgs),
    /// Write a generated instance as a METIS graph file.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Allowed imbalance.
    #[arg(long, default_value_t = RunConfig::DEFAULT_EPSILON, allow_negative_numbers = true)]
    epsilon: f64,
    /// minimal, fast or strong.
    #[arg(long, default_value = "fast")]
    preset: Preset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    workers: u32,
    /// Edge rating used for matching; overrides the preset.
    #[arg(long)]
    rating: Option<RatingKind>,
    /// shem, greedy or gpa; overrides the preset.
    #[arg(long)]
    matcher: Option<MatcherKind>,
    /// FM queue selection strategy; overrides the preset.
    #[arg(long)]
    queue: Option<QueueStrategy>,
}

impl RunArgs {
    fn config(&self, k: u32) -> RunConfig {
        let mut cfg = RunConfig::preset(self.preset, k).with_seed(self.seed);
        cfg.epsilon = self.epsilon;
        if let Some(r) = self.rating {
            cfg.coarsen.rating = r;
        }
        if let Some(m) = self.matcher {
            cfg.coarsen.matcher = m;
        }
        if let Some(q) = self.queue {
            cfg.refine.queue_strategy = q;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StatsFormat {
    Text,
    Json,
}

#[derive(Debug, Args)]
struct PartitionArgs {
    #[arg(long)]
    graph: PathBuf,
    /// File with one "x y" line per node.
    #[arg(long)]
    coords: Option<PathBuf>,
    #[arg(long)]
    k: u32,
    #[command(flatten)]
    run: RunArgs,
    /// Partition file to write; defaults to <graph>.part.<k>.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    stats: StatsFormat,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// "builtin" or a directory of *.graph files (with optional *.xyz coordinates).
    #[arg(long, default_value = "builtin")]
    suite: String,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8")]
    k_list: Vec<u32>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[command(flatten)]
    run: RunArgs,
    /// Directory to write every partition into.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GenCommand {
    /// Random geometric graph on 2^exponent points.
    Rgg {
        #[arg(long)]
        exponent: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// rows x cols grid.
    Grid {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        coords: Option<PathBuf>,
    },
}

#[derive(Debug, Serialize)]
struct PhaseJson {
    coarsen: f64,
    initial: f64,
    refine: f64,
}

#[derive(Debug, Serialize)]
struct StatsJson {
    cut: i64,
    imbalance: i64,
    l_max: i64,
    seconds_per_phase: PhaseJson,
    seed: u64,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn io(message: impl ToString) -> Self {
        Self {
            code: EXIT_IO,
            message: message.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::io(e)
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Partition(a) => partition(a, out),
        Command::Bench(a) => run_bench(a, out),
        Command::Gen(g) => generate(g, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if f.code == EXIT_USAGE {
                let _ = writeln!(err, "\nFor more information, try '--help'.");
            }
            f.code
        }
    }
}

fn pool(workers: u32) -> Result<ThreadPool, Failure> {
    ThreadPool::new(workers as usize)
        .map_err(|e| Failure::io(format!("cannot start worker threads: {e}")))
}

fn check(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.validate().map_err(Failure::usage)
}

fn partition(a: PartitionArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = a.run.config(a.k);
    check(&cfg)?;
    let mut g = io::read_metis(&a.graph)?;
    if let Some(path) = &a.coords {
        let coords = io::read_coords(path, g.n())?;
        g = g.with_coords(coords).map_err(Failure::io)?;
    }
    if a.k as usize > g.n() {
        return Err(Failure::usage(format!(
            "k = {} exceeds the {} nodes of the graph",
            a.k,
            g.n()
        )));
    }
    let exec = pool(a.run.workers)?;
    let clock = WallClock::new();
    let (p, stats) = run_multilevel(&g, &cfg, &exec, &clock).map_err(Failure::usage)?;

    let path = a
        .out
        .unwrap_or_else(|| default_partition_path(&a.graph, a.k));
    io::write_partition(&path, p.block_of())?;

    let s = &stats.seconds;
    match a.stats {
        StatsFormat::Json => {
            let json = StatsJson {
                cut: stats.final_cut,
                imbalance: stats.final_imbalance,
                l_max: stats.l_max,
                seconds_per_phase: PhaseJson {
                    coarsen: s.coarsen,
                    initial: s.initial,
                    refine: s.refine,
                },
                seed: stats.master_seed,
            };
            let text = serde_json::to_string_pretty(&json).expect("stats serialize");
            let _ = writeln!(out, "{text}");
        }
        StatsFormat::Text => {
            let _ = writeln!(out, "cut {}", stats.final_cut);
            let _ = writeln!(out, "balance {:.4}", balance(&p));
            let _ = writeln!(out, "imbalance {}", stats.final_imbalance);
            let _ = writeln!(out, "l_max {}", stats.l_max);
            let _ = writeln!(out, "levels {}", stats.levels());
            let _ = writeln!(
                out,
                "seconds coarsen {:.4} initial {:.4} refine {:.4}",
                s.coarsen, s.initial, s.refine
            );
            let _ = writeln!(out, "seed {}", stats.master_seed);
            let _ = writeln!(out, "partition {}", path.display());
        }
    }
    if stats.balanced {
        Ok(EXIT_OK)
    } else {
        Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!(
                "heaviest block exceeds L_max = {} by {}; partition written anyway",
                stats.l_max, stats.final_imbalance
            ),
        })
    }
}

/// `<graph>.part.<k>`, the name METIS tools use.
pub fn default_partition_path(graph: &Path, k: u32) -> PathBuf {
    let mut name = graph.as_os_str().to_owned();
    name.push(format!(".part.{k}"));
    PathBuf::from(name)
}

fn run_bench(a: BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    if a.k_list.is_empty() || a.reps == 0 {
        return Err(Failure::usage(
            "bench needs at least one k and one repetition",
        ));
    }
    for &k in &a.k_list {
        check(&a.run.config(k))?;
    }
    let instances = if a.suite == "builtin" {
        bench::builtin_suite()
    } else {
        bench::load_suite(Path::new(&a.suite))?
    };
    if instances.is_empty() {
        return Err(Failure::io(format!("no *.graph files in {}", a.suite)));
    }
    let exec = pool(a.run.workers)?;
    let report = bench_report(&instances, &a, &exec)?;
    let _ = write!(out, "{}", report.render());
    Ok(EXIT_OK)
}

fn bench_report<E: Executor>(
    instances: &[bench::Instance],
    a: &BenchArgs,
    exec: &E,
) -> Result<bench::BenchReport, Failure> {
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::io(format!("{}: {e}", dir.display())))?;
    }
    let cfg = a.run.config(a.k_list[0]);
    bench::run_bench(
        instances,
        &a.k_list,
        a.reps,
        &cfg,
        exec,
        a.out_dir.as_deref(),
    )
    .map_err(|e| match e {
        bench::Error::Run { .. } => Failure::usage(e),
        e => Failure::io(e),
    })
}

fn generate(cmd: GenCommand, out: &mut dyn Write) -> Result<i32, Failure> {
    let (g, path, coords_path) = match cmd {
        GenCommand::Rgg {
            exponent,
            seed,
            out,
            coords,
        } => {
            if !(1..=30).contains(&exponent) {
                return Err(Failure::usage("exponent must lie in 1..=30"));
            }
            (gen_rgg(exponent, seed), out, coords)
        }
        GenCommand::Grid {
            rows,
            cols,
            out,
            coords,
        } => {
            if rows == 0 || cols == 0 {
                return Err(Failure::usage("grid dimensions must be positive"));
            }
            (gen_grid(rows, cols), out, coords)
        }
    };
    io::write_metis(&path, &g)?;
    if let (Some(cp), Some(c)) = (coords_path, g.coords()) {
        io::write_coords(&cp, c)?;
    }
    let _ = writeln!(
        out,
        "{} nodes, {} edges -> {}",
        g.n(),
        g.m(),
        path.display()
    );
    Ok(EXIT_OK)
}
