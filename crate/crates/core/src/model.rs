//! Scheduling model: jobs in precedence in-trees, renewable resources with
//! periodic (24-period) capacities plus sparse overlay edits, and schedules.
//!
//! Time is a zero-based grid `0..horizon`. A job started at `s` with duration
//! `d` occupies the half-open interval `[s, s + d)`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A time period index on the zero-based grid.
pub type Time = usize;

/// Capacity and consumption quantities. Signed so overlay deltas fit.
pub type Capacity = i64;

/// Length of the capacity repetition cycle.
pub const CYCLE: usize = 24;

/// External (1-based) job identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct JobId(pub u32);

impl JobId {
    pub fn from_index(index: usize) -> Self {
        JobId(index as u32 + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for JobId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "J{}", self.0)
    }
}

/// External (1-based) resource identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResourceId(pub u32);

impl ResourceId {
    pub fn from_index(index: usize) -> Self {
        ResourceId(index as u32 + 1)
    }

    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for ResourceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("horizon must be positive")]
    EmptyHorizon,
    #[error("job {0} has zero duration")]
    ZeroDuration(JobId),
    #[error("job {job} has duration {duration} exceeding the horizon {horizon}")]
    DurationExceedsHorizon { job: JobId, duration: Time, horizon: Time },
    #[error("job {job} has {found} consumption entries, expected {expected}")]
    ConsumptionArity { job: JobId, found: usize, expected: usize },
    #[error("job {job} has negative consumption on {resource}")]
    NegativeConsumption { job: JobId, resource: ResourceId },
    #[error("job {job} needs {demand} of {resource} but its capacity never exceeds {max}")]
    Unschedulable { job: JobId, resource: ResourceId, demand: Capacity, max: Capacity },
    #[error("precedence ({0}, {1}) references an unknown job")]
    UnknownJob(u32, u32),
    #[error("precedence ({0}, {0}) is a self loop")]
    SelfLoop(JobId),
    #[error("duplicate precedence ({0}, {1})")]
    DuplicatePrecedence(JobId, JobId),
    #[error("job {0} has more than one successor; the precedence graph must be an in-forest")]
    NotInForest(JobId),
    #[error("precedence graph contains a cycle through {0}")]
    Cycle(JobId),
    #[error("job {0} is not a project root but carries a due date or weight")]
    NonRootDueDate(JobId),
    #[error("{resource} has negative capacity {value} at t={t}")]
    NegativeCapacity { resource: ResourceId, t: Time, value: Capacity },
    #[error("{resource} has an overlay entry at t={t} outside the horizon")]
    OverlayOutsideHorizon { resource: ResourceId, t: Time },
    #[error("schedule has {found} start times, instance has {expected} jobs")]
    ScheduleLength { found: usize, expected: usize },
    #[error("unknown resource {0}")]
    UnknownResource(ResourceId),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub duration: Time,
    /// `None` encodes an infinite due date.
    pub due_date: Option<Time>,
    pub weight: u64,
    /// Per-period consumption, indexed by resource index.
    pub consumption: Vec<Capacity>,
}

impl Job {
    pub fn new(duration: Time, consumption: Vec<Capacity>) -> Self {
        Job { duration, due_date: None, weight: 0, consumption }
    }

    pub fn with_due_date(mut self, due_date: Time, weight: u64) -> Self {
        self.due_date = Some(due_date);
        self.weight = weight;
        self
    }

    pub fn uses(&self, k: usize) -> bool {
        self.consumption[k] > 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resource {
    pub base_pattern: [Capacity; CYCLE],
    /// Signed capacity deltas, zero entries are never stored.
    pub overlay: BTreeMap<Time, Capacity>,
}

impl Resource {
    pub fn constant(capacity: Capacity) -> Self {
        Resource { base_pattern: [capacity; CYCLE], overlay: BTreeMap::new() }
    }

    pub fn periodic(base_pattern: [Capacity; CYCLE]) -> Self {
        Resource { base_pattern, overlay: BTreeMap::new() }
    }

    pub fn capacity(&self, t: Time) -> Capacity {
        self.base_pattern[t % CYCLE] + self.overlay.get(&t).copied().unwrap_or(0)
    }

    pub fn profile(&self, horizon: Time) -> Vec<Capacity> {
        (0..horizon).map(|t| self.capacity(t)).collect()
    }

    /// Adds `delta` to the overlay at `t`, keeping the overlay canonical.
    pub fn add_delta(&mut self, t: Time, delta: Capacity) {
        if delta == 0 {
            return;
        }
        let entry = self.overlay.entry(t).or_insert(0);
        *entry += delta;
        if *entry == 0 {
            self.overlay.remove(&t);
        }
    }
}

/// A structurally valid problem instance. Construction validates every model
/// invariant, so downstream code may rely on them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemInstance {
    jobs: Vec<Job>,
    precedences: Vec<(usize, usize)>,
    resources: Vec<Resource>,
    horizon: Time,
    successor: Vec<Option<usize>>,
    predecessors: Vec<Vec<usize>>,
    topological: Vec<usize>,
}

impl ProblemInstance {
    /// Builds an instance from 0-based job indices in `precedences`.
    pub fn new(
        jobs: Vec<Job>,
        precedences: Vec<(usize, usize)>,
        resources: Vec<Resource>,
        horizon: Time,
    ) -> Result<Self, ModelError> {
        if horizon == 0 {
            return Err(ModelError::EmptyHorizon);
        }
        let n = jobs.len();
        let m = resources.len();

        let mut successor = vec![None; n];
        let mut predecessors = vec![Vec::new(); n];
        for &(i, j) in &precedences {
            if i >= n || j >= n {
                return Err(ModelError::UnknownJob(i as u32 + 1, j as u32 + 1));
            }
            if i == j {
                return Err(ModelError::SelfLoop(JobId::from_index(i)));
            }
            match successor[i] {
                Some(s) if s == j => {
                    return Err(ModelError::DuplicatePrecedence(JobId::from_index(i), JobId::from_index(j)))
                }
                Some(_) => return Err(ModelError::NotInForest(JobId::from_index(i))),
                None => successor[i] = Some(j),
            }
            predecessors[j].push(i);
        }
        for preds in &mut predecessors {
            preds.sort_unstable();
        }
        let topological = topological_order(&successor, &predecessors)?;

        for (k, res) in resources.iter().enumerate() {
            let id = ResourceId::from_index(k);
            if let Some((&t, _)) = res.overlay.range(horizon..).next() {
                return Err(ModelError::OverlayOutsideHorizon { resource: id, t });
            }
            for t in 0..horizon {
                let value = res.capacity(t);
                if value < 0 {
                    return Err(ModelError::NegativeCapacity { resource: id, t, value });
                }
            }
        }
        let max_capacity: Vec<Capacity> = resources
            .iter()
            .map(|r| (0..horizon).map(|t| r.capacity(t)).max().unwrap_or(0))
            .collect();

        for (j, job) in jobs.iter().enumerate() {
            let id = JobId::from_index(j);
            if job.duration == 0 {
                return Err(ModelError::ZeroDuration(id));
            }
            if job.duration > horizon {
                return Err(ModelError::DurationExceedsHorizon { job: id, duration: job.duration, horizon });
            }
            if job.consumption.len() != m {
                return Err(ModelError::ConsumptionArity { job: id, found: job.consumption.len(), expected: m });
            }
            for (k, &q) in job.consumption.iter().enumerate() {
                if q < 0 {
                    return Err(ModelError::NegativeConsumption { job: id, resource: ResourceId::from_index(k) });
                }
                if q > max_capacity[k] {
                    return Err(ModelError::Unschedulable {
                        job: id,
                        resource: ResourceId::from_index(k),
                        demand: q,
                        max: max_capacity[k],
                    });
                }
            }
            if successor[j].is_some() && (job.due_date.is_some() || job.weight > 0) {
                return Err(ModelError::NonRootDueDate(id));
            }
        }

        Ok(ProblemInstance { jobs, precedences, resources, horizon, successor, predecessors, topological })
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn job(&self, j: usize) -> &Job {
        &self.jobs[j]
    }

    pub fn num_jobs(&self) -> usize {
        self.jobs.len()
    }

    pub fn resources(&self) -> &[Resource] {
        &self.resources
    }

    pub fn num_resources(&self) -> usize {
        self.resources.len()
    }

    pub fn horizon(&self) -> Time {
        self.horizon
    }

    pub fn precedences(&self) -> &[(usize, usize)] {
        &self.precedences
    }

    pub fn successor(&self, j: usize) -> Option<usize> {
        self.successor[j]
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.predecessors[j]
    }

    /// Jobs ordered so that every predecessor precedes its successor; ties by
    /// lowest index.
    pub fn topological_order(&self) -> &[usize] {
        &self.topological
    }

    pub fn is_project(&self, j: usize) -> bool {
        self.successor[j].is_none()
    }

    /// Project roots (out-degree zero) in index order.
    pub fn projects(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.jobs.len()).filter(move |&j| self.successor[j].is_none())
    }

    /// The project root of the in-tree containing `j`.
    pub fn root_of(&self, mut j: usize) -> usize {
        while let Some(s) = self.successor[j] {
            j = s;
        }
        j
    }

    pub fn capacity(&self, k: usize, t: Time) -> Capacity {
        self.resources[k].capacity(t)
    }

    /// Effective capacity of resource `k` over the whole horizon.
    pub fn capacity_profile(&self, k: usize) -> Vec<Capacity> {
        self.resources[k].profile(self.horizon)
    }

    pub fn capacity_profiles(&self) -> Vec<Vec<Capacity>> {
        (0..self.resources.len()).map(|k| self.capacity_profile(k)).collect()
    }

    /// Returns a copy with `delta` added to the capacity of `k` at every
    /// period of `[start, end)`. Fails if a capacity would become negative.
    pub fn with_capacity_delta(&self, k: usize, start: Time, end: Time, delta: Capacity) -> Result<Self, ModelError> {
        let mut resources = self.resources.clone();
        let res = resources.get_mut(k).ok_or(ModelError::UnknownResource(ResourceId::from_index(k)))?;
        for t in start..end.min(self.horizon) {
            res.add_delta(t, delta);
        }
        self.with_resources(resources)
    }

    /// Same jobs and precedences, different resources. Re-validates.
    pub fn with_resources(&self, resources: Vec<Resource>) -> Result<Self, ModelError> {
        ProblemInstance::new(self.jobs.clone(), self.precedences.clone(), resources, self.horizon)
    }

    /// Same jobs and precedences, capacities set to `profiles` over the horizon
    /// (base patterns kept, differences stored in the overlay).
    pub fn with_capacity_profiles(&self, profiles: &[Vec<Capacity>]) -> Result<Self, ModelError> {
        let resources = self
            .resources
            .iter()
            .zip(profiles)
            .map(|(res, profile)| {
                let mut out = Resource::periodic(res.base_pattern);
                for (t, &c) in profile.iter().enumerate().take(self.horizon) {
                    out.add_delta(t, c - res.base_pattern[t % CYCLE]);
                }
                out
            })
            .collect();
        self.with_resources(resources)
    }
}

fn topological_order(successor: &[Option<usize>], predecessors: &[Vec<usize>]) -> Result<Vec<usize>, ModelError> {
    let n = successor.len();
    let mut indegree: Vec<usize> = predecessors.iter().map(Vec::len).collect();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = ready.pop_first() {
        order.push(j);
        if let Some(s) = successor[j] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                ready.insert(s);
            }
        }
    }
    if order.len() < n {
        let stuck = (0..n).find(|&j| indegree[j] > 0).unwrap_or(0);
        return Err(ModelError::Cycle(JobId::from_index(stuck)));
    }
    Ok(order)
}

/// Start times, one per job.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Schedule {
    pub starts: Vec<Time>,
}

impl Schedule {
    pub fn new(starts: Vec<Time>) -> Self {
        Schedule { starts }
    }

    pub fn start(&self, j: usize) -> Time {
        self.starts[j]
    }

    pub fn completion(&self, instance: &ProblemInstance, j: usize) -> Time {
        self.starts[j] + instance.job(j).duration
    }

    pub fn makespan(&self, instance: &ProblemInstance) -> Time {
        (0..self.starts.len()).map(|j| self.completion(instance, j)).max().unwrap_or(0)
    }

    fn check_len(&self, instance: &ProblemInstance) -> Result<(), ModelError> {
        if self.starts.len() != instance.num_jobs() {
            return Err(ModelError::ScheduleLength { found: self.starts.len(), expected: instance.num_jobs() });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Precedence { before: JobId, after: JobId, completion: Time, start: Time },
    Capacity { resource: ResourceId, t: Time, load: Capacity, capacity: Capacity },
    Horizon { job: JobId, completion: Time },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks precedence, capacity and horizon constraints.
pub fn validate(instance: &ProblemInstance, schedule: &Schedule) -> Result<FeasibilityReport, ModelError> {
    schedule.check_len(instance)?;
    let mut violations = Vec::new();
    for (j, job) in instance.jobs().iter().enumerate() {
        let completion = schedule.start(j) + job.duration;
        if completion > instance.horizon() {
            violations.push(Violation::Horizon { job: JobId::from_index(j), completion });
        }
    }
    for &(i, j) in instance.precedences() {
        let completion = schedule.completion(instance, i);
        if completion > schedule.start(j) {
            violations.push(Violation::Precedence {
                before: JobId::from_index(i),
                after: JobId::from_index(j),
                completion,
                start: schedule.start(j),
            });
        }
    }
    for k in 0..instance.num_resources() {
        let load = consumption_timeline(instance, schedule, k);
        for (t, &l) in load.iter().enumerate() {
            let capacity = instance.capacity(k, t);
            if l > capacity {
                violations.push(Violation::Capacity { resource: ResourceId::from_index(k), t, load: l, capacity });
            }
        }
    }
    Ok(FeasibilityReport { violations })
}

/// Convenience wrapper: `true` iff the schedule has the right length and no violations.
pub fn is_feasible(instance: &ProblemInstance, schedule: &Schedule) -> bool {
    validate(instance, schedule).map(|r| r.is_feasible()).unwrap_or(false)
}

/// Total load of resource `k` per period over `[0, horizon)`. Parts of jobs
/// running past the horizon are not counted.
pub fn consumption_timeline(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Vec<Capacity> {
    let horizon = instance.horizon();
    let mut load = vec![0; horizon];
    for (j, job) in instance.jobs().iter().enumerate() {
        let q = job.consumption[k];
        if q == 0 {
            continue;
        }
        let start = schedule.start(j).min(horizon);
        let end = (schedule.start(j) + job.duration).min(horizon);
        for slot in &mut load[start..end] {
            *slot += q;
        }
    }
    load
}

/// Unweighted tardiness `max(0, C_j - due_j)`; zero for jobs without due date.
pub fn tardiness(instance: &ProblemInstance, schedule: &Schedule, j: usize) -> Time {
    match instance.job(j).due_date {
        Some(due) => schedule.completion(instance, j).saturating_sub(due),
        None => 0,
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TardinessReport {
    pub total: u64,
    /// Weighted tardiness of every project root.
    pub per_project: BTreeMap<JobId, u64>,
}

pub fn weighted_tardiness(instance: &ProblemInstance, schedule: &Schedule) -> TardinessReport {
    let mut report = TardinessReport::default();
    for p in instance.projects() {
        let value = instance.job(p).weight * tardiness(instance, schedule, p) as u64;
        report.total += value;
        report.per_project.insert(JobId::from_index(p), value);
    }
    report
}

/// The weighted tardiness objective alone.
pub fn objective(instance: &ProblemInstance, schedule: &Schedule) -> u64 {
    instance
        .projects()
        .map(|p| instance.job(p).weight * tardiness(instance, schedule, p) as u64)
        .sum()
}

/// Small reference instances used throughout the tests and examples.
pub mod samples {
    use super::*;

    /// Three jobs, one resource of constant capacity, jobs 1 and 2 precede
    /// job 3, which is due at 4 with the given weight.
    pub fn tiny1_with(capacity: Capacity, weight: u64) -> ProblemInstance {
        ProblemInstance::new(
            vec![Job::new(2, vec![1]), Job::new(3, vec![2]), Job::new(1, vec![1]).with_due_date(4, weight)],
            vec![(0, 2), (1, 2)],
            vec![Resource::constant(capacity)],
            12,
        )
        .expect("valid sample")
    }

    pub fn tiny1() -> ProblemInstance {
        tiny1_with(2, 1)
    }

    /// [`tiny1`] plus a second resource of capacity 2 that no job uses.
    pub fn tiny2() -> ProblemInstance {
        let mut jobs = tiny1().jobs().to_vec();
        for job in &mut jobs {
            job.consumption.push(0);
        }
        ProblemInstance::new(
            jobs,
            vec![(0, 2), (1, 2)],
            vec![Resource::constant(2), Resource::constant(2)],
            12,
        )
        .expect("valid sample")
    }
}

#[cfg(test)]
mod tests {
    use super::samples::*;
    use super::*;

    #[test]
    fn tiny1_reference_schedule_is_feasible() {
        let inst = tiny1();
        let report = validate(&inst, &Schedule::new(vec![3, 0, 5])).unwrap();
        assert!(report.is_feasible(), "{report:?}");
    }

    #[test]
    fn overlapping_start_violates_capacity_at_zero() {
        let inst = tiny1();
        let report = validate(&inst, &Schedule::new(vec![0, 0, 5])).unwrap();
        assert!(report.violations.contains(&Violation::Capacity {
            resource: ResourceId(1),
            t: 0,
            load: 3,
            capacity: 2
        }));
        assert!(report.violations.iter().all(|v| matches!(v, Violation::Capacity { .. })));
    }

    #[test]
    fn equal_starts_on_precedence_violate() {
        let inst = tiny1();
        let report = validate(&inst, &Schedule::new(vec![3, 0, 3])).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::Precedence { before: JobId(1), after: JobId(3), .. })));
    }

    #[test]
    fn horizon_overrun_is_reported() {
        let inst = tiny1();
        let report = validate(&inst, &Schedule::new(vec![3, 0, 12])).unwrap();
        assert!(report.violations.contains(&Violation::Horizon { job: JobId(3), completion: 13 }));
    }

    #[test]
    fn schedule_length_mismatch_is_rejected() {
        assert_eq!(
            validate(&tiny1(), &Schedule::new(vec![0, 0])),
            Err(ModelError::ScheduleLength { found: 2, expected: 3 })
        );
    }

    #[test]
    fn weighted_tardiness_examples() {
        let s = Schedule::new(vec![3, 0, 5]);
        let report = weighted_tardiness(&tiny1(), &s);
        assert_eq!(report.total, 2);
        assert_eq!(report.per_project[&JobId(3)], 2);
        assert_eq!(weighted_tardiness(&tiny1_with(2, 2), &s).total, 4);
        assert_eq!(weighted_tardiness(&tiny1_with(3, 1), &Schedule::new(vec![0, 0, 3])).total, 0);
    }

    #[test]
    fn timeline_examples() {
        let inst = tiny1();
        let load = consumption_timeline(&inst, &Schedule::new(vec![3, 0, 5]), 0);
        assert_eq!(load, vec![2, 2, 2, 1, 1, 1, 0, 0, 0, 0, 0, 0]);

        let empty = ProblemInstance::new(vec![], vec![], vec![Resource::constant(1)], 5).unwrap();
        assert_eq!(consumption_timeline(&empty, &Schedule::new(vec![]), 0), vec![0; 5]);

        let single = ProblemInstance::new(vec![Job::new(2, vec![3])], vec![], vec![Resource::constant(3)], 5).unwrap();
        assert_eq!(consumption_timeline(&single, &Schedule::new(vec![1]), 0), vec![0, 3, 3, 0, 0]);
    }

    #[test]
    fn structural_errors() {
        let r = || vec![Resource::constant(2)];
        let j = |d| Job::new(d, vec![1]);
        assert_eq!(
            ProblemInstance::new(vec![j(1), j(1), j(1)], vec![(0, 1), (0, 2)], r(), 5),
            Err(ModelError::NotInForest(JobId(1)))
        );
        assert!(matches!(
            ProblemInstance::new(vec![j(1), j(1)], vec![(0, 1), (1, 0)], r(), 5),
            Err(ModelError::NotInForest(_)) | Err(ModelError::Cycle(_))
        ));
        assert_eq!(
            ProblemInstance::new(vec![j(1).with_due_date(3, 1), j(1)], vec![(0, 1)], r(), 5),
            Err(ModelError::NonRootDueDate(JobId(1)))
        );
        assert!(matches!(
            ProblemInstance::new(vec![Job::new(1, vec![3])], vec![], r(), 5),
            Err(ModelError::Unschedulable { .. })
        ));
        assert!(matches!(ProblemInstance::new(vec![j(6)], vec![], r(), 5), Err(ModelError::DurationExceedsHorizon { .. })));
        assert_eq!(ProblemInstance::new(vec![j(1)], vec![(0, 4)], r(), 5), Err(ModelError::UnknownJob(1, 5)));
    }

    #[test]
    fn two_node_cycle_is_detected() {
        // 0 -> 1 -> 2 -> 1 is impossible under out-degree one; 1 -> 2 -> 1 is a cycle.
        let jobs = vec![Job::new(1, vec![1]), Job::new(1, vec![1])];
        let err = ProblemInstance::new(jobs, vec![(0, 1), (1, 0)], vec![Resource::constant(1)], 4).unwrap_err();
        assert!(matches!(err, ModelError::Cycle(_)));
    }

    #[test]
    fn capacity_delta_keeps_overlay_canonical() {
        let inst = tiny1();
        let up = inst.with_capacity_delta(0, 0, 2, 1).unwrap();
        assert_eq!(up.capacity(0, 0), 3);
        assert_eq!(up.capacity(0, 2), 2);
        let back = up.with_capacity_delta(0, 0, 2, -1).unwrap();
        assert_eq!(back, inst);
        assert!(matches!(inst.with_capacity_delta(0, 0, 1, -3), Err(ModelError::NegativeCapacity { .. })));
    }

    #[test]
    fn roots_and_topology() {
        let inst = tiny1();
        assert_eq!(inst.projects().collect::<Vec<_>>(), vec![2]);
        assert_eq!(inst.root_of(0), 2);
        assert_eq!(inst.topological_order(), &[0, 1, 2]);
        assert_eq!(inst.predecessors(2), &[0, 1]);
    }
}
