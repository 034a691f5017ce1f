//! Relaxation proposals: a relaxed instance, its schedule, the capacity
//! changes that separate it from the original, and improvement metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::accounting::{apply_changes, extract_changes, reduce_capacity_changes, AccountingError, CapacityChanges};
use crate::model::{
    objective, tardiness, validate, weighted_tardiness, FeasibilityReport, JobId, ModelError, ProblemInstance,
    Schedule,
};
use crate::solver::{solve_heuristic_with, HeuristicOptions, SolveError, SolveLimits};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("{0} is not a project root")]
    NotAProject(JobId),
    #[error("baseline schedule is infeasible ({} violations)", .0.violations.len())]
    InfeasibleBaseline(FeasibilityReport),
    #[error("no project is tardy in the baseline schedule and no target was given")]
    NoTarget,
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Accounting(#[from] AccountingError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// Target tardiness before minus after; positive is an improvement.
    pub delta_tardiness: i64,
    /// Sum over jobs of the absolute completion time change.
    pub delta_s: u64,
}

pub fn metrics(
    instance: &ProblemInstance,
    baseline: &Schedule,
    relaxed: &Schedule,
    target: usize,
) -> Metrics {
    let delta_tardiness = tardiness(instance, baseline, target) as i64 - tardiness(instance, relaxed, target) as i64;
    let delta_s = (0..instance.num_jobs())
        .map(|j| baseline.start(j).abs_diff(relaxed.start(j)) as u64)
        .sum();
    Metrics { delta_tardiness, delta_s }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxationProposal {
    /// Number of relaxation iterations behind this proposal; 0 is the baseline.
    pub iteration: usize,
    pub target: JobId,
    /// The original instance with the changes applied.
    pub instance: ProblemInstance,
    pub schedule: Schedule,
    pub objective: u64,
    #[serde(flatten)]
    pub changes: CapacityChanges,
    pub metrics: Metrics,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxationRun {
    pub iterations: Vec<RelaxationProposal>,
    #[serde(rename = "final")]
    pub last: RelaxationProposal,
}

/// Project with the largest weighted tardiness, lowest id on ties. `None` if
/// no project is tardy.
pub fn default_target(instance: &ProblemInstance, schedule: &Schedule) -> Option<usize> {
    let report = weighted_tardiness(instance, schedule);
    report
        .per_project
        .iter()
        .filter(|(_, &v)| v > 0)
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(id, _)| id.index())
}

/// Shared driver state for both relaxation algorithms.
pub(crate) struct Relaxation<'a> {
    pub original: &'a ProblemInstance,
    pub baseline: &'a Schedule,
    pub target: usize,
    pub limits: &'a SolveLimits,
    /// Raw relaxed instance; capacity only grows.
    pub modified: ProblemInstance,
    pub schedule: Schedule,
    pub proposals: Vec<RelaxationProposal>,
}

impl<'a> Relaxation<'a> {
    pub fn new(
        original: &'a ProblemInstance,
        baseline: &'a Schedule,
        target: usize,
        limits: &'a SolveLimits,
    ) -> Result<Self, RelaxError> {
        if target >= original.num_jobs() || !original.is_project(target) {
            return Err(RelaxError::NotAProject(JobId::from_index(target)));
        }
        let report = validate(original, baseline)?;
        if !report.is_feasible() {
            return Err(RelaxError::InfeasibleBaseline(report));
        }
        Ok(Relaxation {
            original,
            baseline,
            target,
            limits,
            modified: original.clone(),
            schedule: baseline.clone(),
            proposals: Vec::new(),
        })
    }

    /// Re-solves the relaxed instance from the current schedule and records
    /// the resulting proposal.
    pub fn resolve(&mut self) -> Result<(), RelaxError> {
        // Capacities only grew, so the previous schedule is still feasible.
        let options = HeuristicOptions { warm_start: Some(&self.schedule), protect: Some(self.target) };
        let solution = solve_heuristic_with(&self.modified, self.limits, &options)?;
        self.schedule = solution.schedule;
        let proposal = account(
            self.original,
            self.baseline,
            &self.modified,
            &self.schedule,
            self.target,
            self.proposals.len() + 1,
        )?;
        self.proposals.push(proposal);
        Ok(())
    }

    pub fn finish(self) -> RelaxationRun {
        let last = match self.proposals.last() {
            Some(p) => p.clone(),
            None => identity_proposal(self.original, self.baseline, self.target),
        };
        RelaxationRun { iterations: self.proposals, last }
    }
}

/// Reduces `modified` to what `schedule` consumes, splits the difference into
/// additions and migrations and builds the proposal.
pub fn account(
    original: &ProblemInstance,
    baseline: &Schedule,
    modified: &ProblemInstance,
    schedule: &Schedule,
    target: usize,
    iteration: usize,
) -> Result<RelaxationProposal, RelaxError> {
    let reduced = reduce_capacity_changes(original, modified, schedule)?;
    let changes = extract_changes(original, &reduced, schedule)?;
    let instance = apply_changes(original, &changes)?;
    Ok(RelaxationProposal {
        iteration,
        target: JobId::from_index(target),
        objective: objective(&instance, schedule),
        metrics: metrics(original, baseline, schedule, target),
        instance,
        schedule: schedule.clone(),
        changes,
    })
}

pub fn identity_proposal(original: &ProblemInstance, baseline: &Schedule, target: usize) -> RelaxationProposal {
    RelaxationProposal {
        iteration: 0,
        target: JobId::from_index(target),
        instance: original.clone(),
        schedule: baseline.clone(),
        objective: objective(original, baseline),
        changes: CapacityChanges::default(),
        metrics: Metrics::default(),
    }
}
