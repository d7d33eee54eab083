//! File formats, instance generators, a thread-pool executor, the benchmark
//! harness and the command-line interface around [`pairpart_core`].

pub mod bench;
pub mod cli;
pub mod exec;
pub mod gen;
pub mod io;

pub use pairpart_core;
