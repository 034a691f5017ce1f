//! Schedule construction.
//!
//! * [`solve_exact`]: depth-first enumeration of serial schedule-generation
//!   lists with lower-bound pruning. Optimal for the weighted tardiness
//!   objective; intended for instances of at most [`EXACT_JOB_CAP`] jobs.
//! * [`solve_heuristic`]: serial schedule generation over priority-rule and
//!   randomized activity lists, improved by forward-backward justification,
//!   optionally warm-started from a known feasible schedule.
//!
//! Both are deterministic for fixed inputs and seed.

mod exact;
mod heuristic;
mod sgs;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FeasibilityReport, ModelError};
use crate::par::Parallelism;

pub use exact::{solve_exact, ExactOutcome};
pub use heuristic::{solve_heuristic, solve_heuristic_with, HeuristicOptions, HeuristicSolution};

/// Largest instance accepted by the exact search.
pub const EXACT_JOB_CAP: usize = 14;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    /// Wall-clock cap per solve. Restart counts are the deterministic budget;
    /// hitting this cap is reported on the solution.
    #[serde(with = "secs")]
    pub time_limit: Duration,
    /// Node budget of the exact search.
    pub node_limit: u64,
    /// Activity lists tried by the heuristic.
    pub restarts: usize,
    pub seed: u64,
    #[serde(default)]
    pub parallelism: Parallelism,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time_limit: Duration::from_secs(10),
            node_limit: 20_000_000,
            restarts: 64,
            seed: 0,
            parallelism: Parallelism::default(),
        }
    }
}

impl SolveLimits {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_time_limit(mut self, time_limit: Duration) -> Self {
        self.time_limit = time_limit;
        self
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }
}

mod secs {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(serde::de::Error::custom("time limit must be positive"));
        }
        Ok(Duration::from_secs_f64(v))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no feasible schedule within the horizon was found")]
    Infeasible,
    #[error("warm start is not feasible for this instance ({} violations)", .0.violations.len())]
    InvalidWarmStart(FeasibilityReport),
    #[error("exact search is limited to {cap} jobs, instance has {jobs}")]
    TooLarge { jobs: usize, cap: usize },
    #[error("protecting a project requires a warm start")]
    ProtectWithoutWarmStart,
    #[error(transparent)]
    Model(#[from] ModelError),
}
