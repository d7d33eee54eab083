//! Multilevel k-way graph partitioning.
//!
//! The pipeline has three phases. The input graph is coarsened by repeatedly
//! contracting rated matchings, the coarsest graph is split into `k` blocks by
//! seeded recursive bisection, and the partition is projected back level by
//! level while pairs of adjacent blocks are refined with two-way FM search.
//! Block pairs are scheduled through an edge coloring of the quotient graph so
//! that every round touches vertex-disjoint pairs.
//!
//! The crate is `no_std` (it needs `alloc`). Parallel execution and timing
//! are injected through the [`runtime::Executor`] and [`runtime::Clock`]
//! traits; the single-threaded [`runtime::Sequential`] executor is the
//! reference semantics.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coarsen;
pub mod config;
mod error;
pub mod fm;
pub mod graph;
pub mod initial;
pub mod matching;
pub mod partition;
pub mod quotient;
pub mod rating;
pub mod runtime;

pub use config::{Preset, RunConfig};
pub use error::Error;
pub use graph::{Graph, Hierarchy, Level};
pub use matching::Matching;
pub use partition::{BalanceSpec, Partition};
pub use rating::RatingKind;
pub use runtime::{run_multilevel, RunStats};

/// Dense node index, `0..n` at every level.
pub type NodeId = u32;
/// Index into [`Graph::edges`].
pub type EdgeId = u32;
/// Block index, `0..k`.
pub type BlockId = u32;
/// Node and edge weights. Signed so gains and deltas share the type.
pub type Weight = i64;

/// Lexicographic `(imbalance, cut)` pair used to rank partition states.
pub type Quality = (Weight, Weight);

pub(crate) fn rng_from_seed(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
