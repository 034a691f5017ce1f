//! Targeted relaxation: relax the capacity a target project's jobs would need
//! to start earlier, using suffix-relaxed schedules and left-shift closures.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{JobId, ProblemInstance, Schedule, Time};
use crate::par::{self, Parallelism};
use crate::proposal::{RelaxError, Relaxation, RelaxationRun};
use crate::solver::SolveLimits;

/// `S^t`: jobs starting at or before `t` keep their start; every later job
/// starts as soon as its predecessors (in `S^t`) have completed.
pub fn suffix_relaxed_schedule(instance: &ProblemInstance, schedule: &Schedule, t: Time) -> Schedule {
    let mut starts = vec![0; instance.num_jobs()];
    for &j in instance.topological_order() {
        starts[j] = if schedule.start(j) <= t {
            schedule.start(j)
        } else {
            instance.predecessors(j).iter().map(|&i| starts[i] + instance.job(i).duration).max().unwrap_or(0)
        };
    }
    Schedule::new(starts)
}

/// Times at which `S^t` can change: 0 and every start time, ascending.
pub fn breakpoints(schedule: &Schedule) -> Vec<Time> {
    let set: BTreeSet<Time> = std::iter::once(0).chain(schedule.starts.iter().copied()).collect();
    set.into_iter().collect()
}

/// For every job, the smallest start it takes in any suffix-relaxed schedule
/// when that is strictly before its current start.
pub fn earliest_relaxed_starts(instance: &ProblemInstance, schedule: &Schedule, mode: Parallelism) -> Vec<Option<Time>> {
    let relaxed = par::map(mode, &breakpoints(schedule), |&t| suffix_relaxed_schedule(instance, schedule, t));
    (0..instance.num_jobs())
        .map(|j| relaxed.iter().map(|s| s.start(j)).filter(|&s| s < schedule.start(j)).min())
        .collect()
}

/// Maximal runs `[start, end)` of positive capacity of `k` within the horizon.
pub fn availability_intervals(instance: &ProblemInstance, k: usize) -> Vec<(Time, Time)> {
    let mut out = Vec::new();
    let mut open = None;
    for t in 0..instance.horizon() {
        match (instance.capacity(k, t) > 0, open) {
            (true, None) => open = Some(t),
            (false, Some(s)) => {
                out.push((s, t));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push((s, instance.horizon()));
    }
    out
}

/// Jobs that must move earlier for `job` to move earlier: the least set
/// containing `job` and, for each member `j`, every job `i` with `C_i = S_j`
/// that is a predecessor of `j` or shares a resource with it, plus, when
/// `S_j` opens an availability interval of a resource `j` uses, every job on
/// that resource completing exactly when the previous interval closed.
///
/// Availability intervals are taken from `instance`, which should be the
/// unrelaxed instance.
pub fn left_shift_closure(instance: &ProblemInstance, schedule: &Schedule, job: usize) -> BTreeSet<usize> {
    let n = instance.num_jobs();
    let m = instance.num_resources();
    let intervals: Vec<Vec<(Time, Time)>> = (0..m).map(|k| availability_intervals(instance, k)).collect();
    let completion = |i: usize| schedule.completion(instance, i);
    let shares = |a: usize, b: usize| (0..m).any(|k| instance.job(a).uses(k) && instance.job(b).uses(k));

    let mut closure = BTreeSet::from([job]);
    let mut stack = vec![job];
    while let Some(j) = stack.pop() {
        let sj = schedule.start(j);
        let add = |i: usize, closure: &mut BTreeSet<usize>, stack: &mut Vec<usize>| {
            if closure.insert(i) {
                stack.push(i);
            }
        };
        for &i in instance.predecessors(j) {
            if completion(i) == sj {
                add(i, &mut closure, &mut stack);
            }
        }
        for i in 0..n {
            if i != j && completion(i) == sj && shares(i, j) {
                add(i, &mut closure, &mut stack);
            }
        }
        for (k, ivs) in intervals.iter().enumerate() {
            if !instance.job(j).uses(k) {
                continue;
            }
            if let Some(pos) = ivs.iter().position(|&(s, _)| s == sj) {
                if pos > 0 {
                    let prev_end = ivs[pos - 1].1;
                    for i in 0..n {
                        if instance.job(i).uses(k) && completion(i) == prev_end {
                            add(i, &mut closure, &mut stack);
                        }
                    }
                }
            }
        }
    }
    closure
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IntervalKey {
    /// Earliest relaxed start first.
    #[serde(rename = "t")]
    Start,
    /// Smallest left shift first.
    #[serde(rename = "ds")]
    Shift,
}

impl IntervalKey {
    pub fn name(self) -> &'static str {
        match self {
            IntervalKey::Start => "t",
            IntervalKey::Shift => "ds",
        }
    }
}

impl fmt::Display for IntervalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IntervalKey {
    type Err = RelaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "t" | "k_t" | "start" => Ok(IntervalKey::Start),
            "ds" | "k_ds" | "shift" => Ok(IntervalKey::Shift),
            _ => Err(RelaxError::InvalidParams(format!("unknown interval key `{s}` (expected t or ds)"))),
        }
    }
}

/// A job together with an earlier window `[start, end)` it could occupy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ImprovementInterval {
    #[serde(rename = "j")]
    pub job: JobId,
    #[serde(rename = "s")]
    pub start: Time,
    #[serde(rename = "e")]
    pub end: Time,
}

pub fn find_intervals_to_relax(
    original: &ProblemInstance,
    schedule: &Schedule,
    limit: usize,
    key: IntervalKey,
    target: usize,
    mode: Parallelism,
) -> Vec<ImprovementInterval> {
    let earliest = earliest_relaxed_starts(original, schedule, mode);
    let mut candidates: Vec<(Time, usize, Time)> = left_shift_closure(original, schedule, target)
        .into_iter()
        .filter_map(|j| earliest[j].map(|s| (s, j, schedule.start(j) - s)))
        .collect();
    match key {
        IntervalKey::Start => candidates.sort_by_key(|&(s, j, _)| (s, j)),
        IntervalKey::Shift => candidates.sort_by_key(|&(_, j, shift)| (shift, j)),
    }
    candidates
        .into_iter()
        .take(limit)
        .map(|(s, j, _)| ImprovementInterval { job: JobId::from_index(j), start: s, end: s + original.job(j).duration })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SsiraParams {
    pub key: IntervalKey,
    /// Intervals relaxed per iteration.
    pub intervals: usize,
    pub iterations: usize,
}

impl SsiraParams {
    pub fn validate(&self) -> Result<(), RelaxError> {
        if self.intervals == 0 {
            return Err(RelaxError::InvalidParams("intervals must be at least 1".into()));
        }
        if self.iterations == 0 {
            return Err(RelaxError::InvalidParams("iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Runs the targeted relaxation. Each iteration raises every resource a
/// selected job uses by the job's consumption over the job's earlier window,
/// then re-solves from the current schedule.
pub fn run_ssira(
    original: &ProblemInstance,
    baseline: &Schedule,
    params: &SsiraParams,
    target: usize,
    limits: &SolveLimits,
) -> Result<RelaxationRun, RelaxError> {
    params.validate()?;
    let mut run = Relaxation::new(original, baseline, target, limits)?;
    for _ in 0..params.iterations {
        let chosen =
            find_intervals_to_relax(original, &run.schedule, params.intervals, params.key, target, limits.parallelism);
        if chosen.is_empty() {
            break;
        }
        for iv in &chosen {
            let job = original.job(iv.job.index());
            for (k, &q) in job.consumption.iter().enumerate() {
                if q > 0 {
                    run.modified = run.modified.with_capacity_delta(k, iv.start, iv.end, q)?;
                }
            }
        }
        run.resolve()?;
    }
    Ok(run.finish())
}
