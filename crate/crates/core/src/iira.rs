//! Untargeted relaxation: repeatedly find the bottleneck resource by an
//! indicator and raise its capacity where smoothed utilization peaks.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::indicators::{rank_resources, Indicator};
use crate::model::{consumption_timeline, Capacity, ProblemInstance, Schedule, Time};
use crate::proposal::{RelaxError, Relaxation, RelaxationRun};
use crate::solver::SolveLimits;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Uniform,
    Triangular,
}

/// Smoothing kernel of `2 * half_width + 1` weights summing to 1. Written
/// as family name plus half-width, e.g. `triangular2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Kernel {
    pub family: KernelFamily,
    pub half_width: usize,
}

impl Kernel {
    pub const IDENTITY: Kernel = Kernel { family: KernelFamily::Uniform, half_width: 0 };

    pub fn uniform(half_width: usize) -> Self {
        Kernel { family: KernelFamily::Uniform, half_width }
    }

    pub fn triangular(half_width: usize) -> Self {
        Kernel { family: KernelFamily::Triangular, half_width }
    }

    /// Weights for offsets `-w..=w`.
    pub fn weights(&self) -> Vec<Rational> {
        let w = self.half_width as i128;
        (-w..=w)
            .map(|o| match self.family {
                KernelFamily::Uniform => Rational::new(1, 2 * w + 1),
                KernelFamily::Triangular => Rational::new(w + 1 - o.abs(), (w + 1) * (w + 1)),
            })
            .collect()
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match self.family {
            KernelFamily::Uniform => "uniform",
            KernelFamily::Triangular => "triangular",
        };
        write!(f, "{family}{}", self.half_width)
    }
}

impl FromStr for Kernel {
    type Err = RelaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let split = lower.find(|c: char| c.is_ascii_digit()).unwrap_or(lower.len());
        let (name, width) = lower.split_at(split);
        let family = match name {
            "uniform" | "u" => KernelFamily::Uniform,
            "triangular" | "t" => KernelFamily::Triangular,
            "identity" if width.is_empty() => return Ok(Kernel::IDENTITY),
            _ => return Err(RelaxError::InvalidParams(format!("unknown kernel `{s}`"))),
        };
        let half_width =
            width.parse().map_err(|_| RelaxError::InvalidParams(format!("kernel `{s}` needs a half-width")))?;
        Ok(Kernel { family, half_width })
    }
}

impl TryFrom<String> for Kernel {
    type Error = RelaxError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Kernel> for String {
    fn from(k: Kernel) -> String {
        k.to_string()
    }
}

/// Utilization ratio per block of `granularity` periods; 0 where the block
/// has no capacity. The last block may be shorter.
pub fn granular_load(instance: &ProblemInstance, schedule: &Schedule, k: usize, granularity: usize) -> Vec<Rational> {
    assert!(granularity > 0, "granularity must be positive");
    let load = consumption_timeline(instance, schedule, k);
    let cap = instance.capacity_profile(k);
    load.chunks(granularity)
        .zip(cap.chunks(granularity))
        .map(|(l, c)| {
            let used: Capacity = l.iter().sum();
            let avail: Capacity = c.iter().sum();
            if avail == 0 {
                Rational::zero()
            } else {
                Rational::new(used as i128, avail as i128)
            }
        })
        .collect()
}

/// Same-length convolution of `load` with `kernel`, zero padded.
pub fn improvement_potential(load: &[Rational], kernel: &Kernel) -> Vec<Rational> {
    let weights = kernel.weights();
    let w = kernel.half_width as isize;
    (0..load.len() as isize)
        .map(|i| {
            (-w..=w)
                .filter_map(|o| {
                    let idx = i + o;
                    (0..load.len() as isize).contains(&idx).then(|| load[idx as usize] * weights[(o + w) as usize])
                })
                .sum()
        })
        .collect()
}

/// Indices of the `count` largest values, earliest first among equals,
/// returned in ascending index order.
pub fn top_blocks(potential: &[Rational], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..potential.len()).collect();
    idx.sort_by(|&a, &b| potential[b].cmp(&potential[a]).then(a.cmp(&b)));
    idx.truncate(count);
    idx.sort_unstable();
    idx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IiraParams {
    pub indicator: Indicator,
    pub kernel: Kernel,
    pub granularity: usize,
    /// Blocks relaxed per iteration.
    pub periods: usize,
    pub iterations: usize,
    /// Capacity added per period of a selected block.
    pub delta: Capacity,
}

impl IiraParams {
    pub fn validate(&self) -> Result<(), RelaxError> {
        let fail = |m: &str| Err(RelaxError::InvalidParams(m.into()));
        if !matches!(self.indicator, Indicator::Mrur | Indicator::Auau) {
            return fail("indicator must be mrur or auau");
        }
        if self.granularity == 0 {
            return fail("granularity must be at least 1");
        }
        if self.periods == 0 {
            return fail("periods must be at least 1");
        }
        if self.iterations == 0 {
            return fail("iterations must be at least 1");
        }
        if self.delta < 1 {
            return fail("delta must be at least 1");
        }
        Ok(())
    }
}

/// Runs the untargeted relaxation. `target` only affects reported metrics and
/// the guard that the target's tardiness never grows.
pub fn run_iira(
    original: &ProblemInstance,
    baseline: &Schedule,
    params: &IiraParams,
    target: usize,
    limits: &SolveLimits,
) -> Result<RelaxationRun, RelaxError> {
    params.validate()?;
    let mut run = Relaxation::new(original, baseline, target, limits)?;
    if original.num_resources() == 0 {
        return Ok(run.finish());
    }
    for _ in 0..params.iterations {
        let ranking = rank_resources(&run.modified, &run.schedule, params.indicator, limits.parallelism);
        let k = ranking[0].resource.index();
        let load = granular_load(&run.modified, &run.schedule, k, params.granularity);
        let potential = improvement_potential(&load, &params.kernel);
        for block in top_blocks(&potential, params.periods) {
            let start: Time = block * params.granularity;
            let end = (start + params.granularity).min(original.horizon());
            run.modified = run.modified.with_capacity_delta(k, start, end, params.delta)?;
        }
        run.resolve()?;
    }
    Ok(run.finish())
}
