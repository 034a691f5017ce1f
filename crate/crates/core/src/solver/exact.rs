use std::time::Instant;

use super::sgs::{Prepared, Timeline};
use super::{solve_heuristic, SolveError, SolveLimits, EXACT_JOB_CAP};
use crate::model::{ProblemInstance, Schedule, Time};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExactOutcome {
    Optimal { schedule: Schedule, objective: u64 },
    /// Node or time budget ran out; `best` is the incumbent, if any.
    LimitExceeded { best: Option<(Schedule, u64)> },
    Infeasible,
}

impl ExactOutcome {
    pub fn best(&self) -> Option<(&Schedule, u64)> {
        match self {
            ExactOutcome::Optimal { schedule, objective } => Some((schedule, *objective)),
            ExactOutcome::LimitExceeded { best } => best.as_ref().map(|(s, o)| (s, *o)),
            ExactOutcome::Infeasible => None,
        }
    }
}

/// Exhaustive search over serial schedule-generation lists.
///
/// Among optimal schedules, one with the smallest sum of starts admits no
/// single-job left shift, and listing its jobs by (start, index) makes the
/// serial scheme reproduce it exactly. The search therefore only extends a
/// list with a job whose earliest placement comes after the previous one in
/// (start, index) order, which visits every such schedule exactly once.
pub fn solve_exact(instance: &ProblemInstance, limits: &SolveLimits) -> Result<ExactOutcome, SolveError> {
    let n = instance.num_jobs();
    if n > EXACT_JOB_CAP {
        return Err(SolveError::TooLarge { jobs: n, cap: EXACT_JOB_CAP });
    }
    let seed_limits = limits.clone().with_restarts(limits.restarts.min(16));
    let incumbent = match solve_heuristic(instance, &seed_limits, None) {
        Ok(sol) => Some((sol.schedule.starts, sol.objective)),
        Err(SolveError::Infeasible) => None,
        Err(e) => return Err(e),
    };
    if let Some((_, 0)) = incumbent {
        let (starts, objective) = incumbent.expect("checked");
        return Ok(ExactOutcome::Optimal { schedule: Schedule::new(starts), objective });
    }

    let prep = Prepared::new(instance);
    let mut search = Search {
        prep: &prep,
        starts: vec![0; n],
        placed: vec![false; n],
        incumbent,
        nodes: 0,
        node_limit: limits.node_limit,
        deadline: (Instant::now(), limits.time_limit),
        aborted: false,
        tail: tails(instance),
    };
    let mut timeline = prep.timeline();
    search.dfs(&mut timeline, 0, None, 0);

    Ok(match (search.aborted, search.incumbent) {
        (false, Some((starts, objective))) => ExactOutcome::Optimal { schedule: Schedule::new(starts), objective },
        (false, None) => ExactOutcome::Infeasible,
        (true, best) => ExactOutcome::LimitExceeded { best: best.map(|(s, o)| (Schedule::new(s), o)) },
    })
}

/// Duration of the longest chain from a job to its project root, inclusive.
fn tails(instance: &ProblemInstance) -> Vec<Time> {
    let mut tail = vec![0; instance.num_jobs()];
    for &j in instance.topological_order().iter().rev() {
        tail[j] = instance.job(j).duration + instance.successor(j).map_or(0, |s| tail[s]);
    }
    tail
}

struct Search<'p> {
    prep: &'p Prepared<'p>,
    starts: Vec<Time>,
    placed: Vec<bool>,
    incumbent: Option<(Vec<Time>, u64)>,
    nodes: u64,
    node_limit: u64,
    deadline: (Instant, std::time::Duration),
    aborted: bool,
    tail: Vec<Time>,
}

impl Search<'_> {
    fn est(&self, j: usize) -> Option<Time> {
        let inst = self.prep.instance;
        let mut est = 0;
        for &i in inst.predecessors(j) {
            if !self.placed[i] {
                return None;
            }
            est = est.max(self.starts[i] + inst.job(i).duration);
        }
        Some(est)
    }

    /// Objective of placed roots plus a precedence bound for the others.
    /// Every future start is at least `floor`.
    fn lower_bound(&self, floor: Time) -> u64 {
        let inst = self.prep.instance;
        let mut start_lb = vec![0; inst.num_jobs()];
        let mut bound = 0;
        for &j in inst.topological_order() {
            let d = inst.job(j).duration;
            start_lb[j] = if self.placed[j] {
                self.starts[j]
            } else {
                inst.predecessors(j).iter().map(|&i| start_lb[i] + inst.job(i).duration).fold(floor, Time::max)
            };
            if let (true, Some(due)) = (inst.is_project(j), inst.job(j).due_date) {
                bound += inst.job(j).weight * (start_lb[j] + d).saturating_sub(due) as u64;
            }
        }
        bound
    }

    fn out_of_budget(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.node_limit
            || (self.nodes.is_multiple_of(4096) && self.deadline.0.elapsed() >= self.deadline.1)
        {
            self.aborted = true;
        }
        self.aborted
    }

    fn dfs(&mut self, timeline: &mut Timeline<'_>, depth: usize, last: Option<(Time, usize)>, partial: u64) {
        let inst = self.prep.instance;
        let n = inst.num_jobs();
        if depth == n {
            if self.incumbent.as_ref().is_none_or(|(_, best)| partial < *best) {
                self.incumbent = Some((self.starts.clone(), partial));
            }
            return;
        }
        let mut children: Vec<(Time, usize)> = Vec::new();
        for j in 0..n {
            if self.placed[j] {
                continue;
            }
            let Some(est) = self.est(j) else { continue };
            let Some(t) = timeline.earliest(j, est) else {
                // A job that cannot be placed now never can be later.
                return;
            };
            if last.is_none_or(|prev| (t, j) > prev) {
                children.push((t, j));
            }
        }
        // Most urgent first so good incumbents appear early.
        children.sort_by_key(|&(t, j)| (t + self.tail[j], t, j));
        for (t, j) in children {
            if self.out_of_budget() {
                return;
            }
            let job = inst.job(j);
            let gain = match (inst.is_project(j), job.due_date) {
                (true, Some(due)) => job.weight * (t + job.duration).saturating_sub(due) as u64,
                _ => 0,
            };
            self.starts[j] = t;
            self.placed[j] = true;
            let bound_ok = self
                .incumbent
                .as_ref()
                .is_none_or(|(_, best)| partial + gain < *best && self.lower_bound(t) < *best);
            if bound_ok {
                timeline.reserve(j, t);
                self.dfs(timeline, depth + 1, Some((t, j)), partial + gain);
                timeline.release(j, t);
            }
            self.placed[j] = false;
            if self.aborted {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::samples::{tiny1, tiny1_with};
    use crate::model::{is_feasible, objective, Job, Resource};

    #[test]
    fn tiny1_optimum_is_two() {
        let out = solve_exact(&tiny1(), &SolveLimits::default()).unwrap();
        let (s, obj) = out.best().unwrap();
        assert!(matches!(out, ExactOutcome::Optimal { .. }));
        assert_eq!(obj, 2);
        assert!(is_feasible(&tiny1(), s));
        assert_eq!(objective(&tiny1(), s), 2);
    }

    #[test]
    fn capacity_three_reaches_zero() {
        let inst = tiny1_with(3, 1);
        let out = solve_exact(&inst, &SolveLimits::default()).unwrap();
        assert_eq!(out, ExactOutcome::Optimal { schedule: Schedule::new(vec![0, 0, 3]), objective: 0 });
    }

    #[test]
    fn too_large_is_refused() {
        let jobs = (0..EXACT_JOB_CAP + 1).map(|_| Job::new(1, vec![1])).collect();
        let inst = ProblemInstance::new(jobs, vec![], vec![Resource::constant(1)], 40).unwrap();
        assert_eq!(
            solve_exact(&inst, &SolveLimits::default()),
            Err(SolveError::TooLarge { jobs: EXACT_JOB_CAP + 1, cap: EXACT_JOB_CAP })
        );
    }

    #[test]
    fn infeasible_within_horizon() {
        let inst = ProblemInstance::new(
            vec![Job::new(3, vec![1]), Job::new(3, vec![1])],
            vec![],
            vec![Resource::constant(1)],
            5,
        )
        .unwrap();
        assert_eq!(solve_exact(&inst, &SolveLimits::default()).unwrap(), ExactOutcome::Infeasible);
    }

    #[test]
    fn tight_node_budget_reports_limit() {
        let mut limits = SolveLimits::default();
        limits.node_limit = 0;
        let out = solve_exact(&tiny1(), &limits).unwrap();
        assert!(matches!(out, ExactOutcome::LimitExceeded { best: Some((_, 2)) }));
    }
}
