//! Run configuration and the three named presets.

use core::fmt;
use core::str::FromStr;

use crate::coarsen::CoarsenConfig;
use crate::fm::{QueueStrategy, RefineConfig, StopRule};
use crate::initial::InitConfig;
use crate::matching::MatcherKind;
use crate::rating::RatingKind;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    Minimal,
    Fast,
    Strong,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Minimal, Preset::Fast, Preset::Strong];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Minimal => "minimal",
            Preset::Fast => "fast",
            Preset::Strong => "strong",
        }
    }

    pub fn coarsen(self) -> CoarsenConfig {
        CoarsenConfig {
            rating: RatingKind::ExpansionStar2,
            matcher: MatcherKind::Gpa,
            contraction_stop_factor: 60.0,
            ..CoarsenConfig::default()
        }
    }

    pub fn init(self) -> InitConfig {
        let (repeats, fm_passes, growing_trials_per_bisection) = match self {
            Preset::Minimal => (1, 2, 2),
            Preset::Fast => (3, 3, 4),
            Preset::Strong => (5, 4, 6),
        };
        InitConfig {
            repeats,
            fm_passes,
            growing_trials_per_bisection,
        }
    }

    pub fn refine(self) -> RefineConfig {
        let (bfs_depth, stop_rule, max_global_iterations, local_iterations, fm_patience) =
            match self {
                Preset::Minimal => (1, StopRule::Once, 1, 1, 0.01),
                Preset::Fast => (5, StopRule::NoChange, 15, 3, 0.05),
                Preset::Strong => (20, StopRule::TwoNoChange, 15, 5, 0.20),
            };
        RefineConfig {
            queue_strategy: QueueStrategy::TopGain,
            fm_patience,
            bfs_depth,
            local_iterations,
            max_global_iterations,
            stop_rule,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or(Error::InvalidConfig("unknown preset"))
    }
}

/// Everything [`crate::run_multilevel`] needs besides the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub k: u32,
    pub epsilon: f64,
    pub coarsen: CoarsenConfig,
    pub init: InitConfig,
    pub refine: RefineConfig,
    /// Parts of the geometric prepartition used for matching locality;
    /// `None` uses `k`. Independent of the worker count so results are too.
    pub prepartition_parts: Option<u32>,
    pub master_seed: u64,
}

impl RunConfig {
    pub const DEFAULT_EPSILON: f64 = 0.03;

    pub fn preset(preset: Preset, k: u32) -> Self {
        Self {
            k,
            epsilon: Self::DEFAULT_EPSILON,
            coarsen: preset.coarsen(),
            init: preset.init(),
            refine: preset.refine(),
            prepartition_parts: None,
            master_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(
                "epsilon must be a finite nonnegative number",
            ));
        }
        if self.coarsen.contraction_stop_factor <= 0.0 {
            return Err(Error::InvalidConfig(
                "contraction stop factor must be positive",
            ));
        }
        if !(self.coarsen.stall_fraction > 0.0 && self.coarsen.stall_fraction < 1.0) {
            return Err(Error::InvalidConfig("stall fraction must lie in (0, 1)"));
        }
        if self.init.repeats == 0 {
            return Err(Error::InvalidConfig(
                "initial partitioning needs at least one repeat",
            ));
        }
        if self.refine.fm_patience < 0.0 {
            return Err(Error::InvalidConfig("FM patience must be nonnegative"));
        }
        if self.prepartition_parts == Some(0) {
            return Err(Error::InvalidConfig("prepartition needs at least one part"));
        }
        Ok(())
    }
}
