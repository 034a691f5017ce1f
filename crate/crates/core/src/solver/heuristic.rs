use std::cmp::Reverse;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sgs::{justify, list_by_start, serial_sgs, Prepared};
use super::{SolveError, SolveLimits};
use crate::model::{objective, tardiness, validate, ProblemInstance, Schedule, Time};
use crate::par;

#[derive(Clone, Debug, Default)]
pub struct HeuristicOptions<'a> {
    /// Feasible schedule for this instance; never beaten by the result.
    pub warm_start: Option<&'a Schedule>,
    /// Project whose tardiness may not exceed its tardiness in the warm start.
    pub protect: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicSolution {
    pub schedule: Schedule,
    pub objective: u64,
    /// Some restarts were skipped because the wall-clock cap was reached.
    pub time_limit_hit: bool,
}

pub fn solve_heuristic(
    instance: &ProblemInstance,
    limits: &SolveLimits,
    warm_start: Option<&Schedule>,
) -> Result<HeuristicSolution, SolveError> {
    solve_heuristic_with(instance, limits, &HeuristicOptions { warm_start, protect: None })
}

#[derive(Clone, Copy, Debug)]
enum Rule {
    EarliestRootDueDate,
    MinimumSlack,
    LongestPath,
}

const RULES: [Rule; 3] = [Rule::EarliestRootDueDate, Rule::MinimumSlack, Rule::LongestPath];

struct Priorities {
    /// `rank[rule][j]`: position of `j` when sorted by the rule.
    rank: Vec<Vec<usize>>,
}

impl Priorities {
    fn new(inst: &ProblemInstance) -> Self {
        let n = inst.num_jobs();
        let d = |j: usize| inst.job(j).duration as i64;
        let mut head = vec![0i64; n];
        for &j in inst.topological_order() {
            head[j] = inst.predecessors(j).iter().map(|&i| head[i] + d(i)).max().unwrap_or(0);
        }
        let mut tail = vec![0i64; n];
        for &j in inst.topological_order().iter().rev() {
            tail[j] = d(j) + inst.successor(j).map_or(0, |s| tail[s]);
        }
        let far = inst.horizon() as i64 * 4;
        let root_due: Vec<i64> =
            (0..n).map(|j| inst.job(inst.root_of(j)).due_date.map_or(far, |x| x as i64)).collect();
        let rank = RULES
            .iter()
            .map(|rule| {
                let mut order: Vec<usize> = (0..n).collect();
                match rule {
                    Rule::EarliestRootDueDate => order.sort_by_key(|&j| (root_due[j], Reverse(tail[j]), j)),
                    Rule::MinimumSlack => order.sort_by_key(|&j| (root_due[j] - tail[j] - head[j], j)),
                    Rule::LongestPath => order.sort_by_key(|&j| (Reverse(tail[j]), j)),
                }
                let mut rank = vec![0; n];
                for (pos, &j) in order.iter().enumerate() {
                    rank[j] = pos;
                }
                rank
            })
            .collect();
        Priorities { rank }
    }
}

/// Precedence-feasible list picking the eligible job with the smallest key.
fn list_from_keys(inst: &ProblemInstance, keys: &[f64]) -> Vec<usize> {
    let n = inst.num_jobs();
    let mut missing: Vec<usize> = (0..n).map(|j| inst.predecessors(j).len()).collect();
    let mut eligible: Vec<usize> = (0..n).filter(|&j| missing[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while !eligible.is_empty() {
        let (pos, _) = eligible
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)))
            .expect("non-empty");
        let j = eligible.swap_remove(pos);
        order.push(j);
        if let Some(s) = inst.successor(j) {
            missing[s] -= 1;
            if missing[s] == 0 {
                eligible.push(s);
            }
        }
    }
    order
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    objective: u64,
    starts: Vec<Time>,
}

struct Context<'a> {
    prep: Prepared<'a>,
    protect: Option<(usize, Time)>,
}

impl Context<'_> {
    fn admissible(&self, starts: &[Time]) -> bool {
        match self.protect {
            Some((p, bound)) => {
                let due = self.prep.instance.job(p).due_date.unwrap_or(Time::MAX);
                (starts[p] + self.prep.duration(p)).saturating_sub(due) <= bound
            }
            None => true,
        }
    }

    fn evaluate(&self, starts: Vec<Time>) -> Candidate {
        let objective = objective(self.prep.instance, &Schedule::new(starts.clone()));
        Candidate { objective, starts }
    }

    /// Repeated forward-backward justification while it strictly improves.
    fn improve(&self, mut best: Candidate) -> Candidate {
        let inst = self.prep.instance;
        let makespan = (0..inst.num_jobs()).map(|j| best.starts[j] + inst.job(j).duration).max().unwrap_or(0);
        for _ in 0..4 {
            let mut improved = false;
            let due_aware = |root: usize, c: Time| inst.job(root).due_date.map_or(makespan, |due| due.max(c));
            let passes: [&dyn Fn(usize, Time) -> Time; 2] = [&|_, _| makespan, &due_aware];
            for pass in passes {
                if let Some(starts) = justify(&self.prep, &best.starts, pass) {
                    let cand = self.evaluate(starts);
                    if cand.objective < best.objective && self.admissible(&cand.starts) {
                        best = cand;
                        improved = true;
                    }
                }
            }
            if !improved {
                break;
            }
        }
        best
    }

    fn run_list(&self, order: &[usize]) -> Option<Candidate> {
        let starts = serial_sgs(&self.prep, order)?;
        let cand = self.improve(self.evaluate(starts));
        self.admissible(&cand.starts).then_some(cand)
    }
}

/// Heuristic solve with optional warm start and protected project.
pub fn solve_heuristic_with(
    instance: &ProblemInstance,
    limits: &SolveLimits,
    options: &HeuristicOptions<'_>,
) -> Result<HeuristicSolution, SolveError> {
    let started = Instant::now();
    let protect = match (options.protect, options.warm_start) {
        (Some(p), Some(w)) => Some((p, tardiness(instance, w, p))),
        (Some(_), None) => return Err(SolveError::ProtectWithoutWarmStart),
        _ => None,
    };
    let ctx = Context { prep: Prepared::new(instance), protect };

    let mut pool: Vec<Candidate> = Vec::new();
    if let Some(warm) = options.warm_start {
        let report = validate(instance, warm)?;
        if !report.is_feasible() {
            return Err(SolveError::InvalidWarmStart(report));
        }
        let incumbent = ctx.evaluate(warm.starts.clone());
        // Left-justifying the warm start's order never delays any job.
        if let Some(c) = ctx.run_list(&list_by_start(&warm.starts)) {
            pool.push(c);
        }
        pool.push(incumbent);
    }

    let priorities = Priorities::new(instance);
    let n = instance.num_jobs();
    let time_hit = AtomicBool::new(false);
    let restarts = limits.restarts.max(1);
    let results = par::map_range(limits.parallelism, restarts, |r| {
        if started.elapsed() >= limits.time_limit {
            time_hit.store(true, Ordering::Relaxed);
            return None;
        }
        let rank = &priorities.rank[r % RULES.len()];
        let keys: Vec<f64> = if r < RULES.len() {
            rank.iter().map(|&x| x as f64).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(limits.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(r as u64));
            // Every fourth list ignores the rules entirely.
            let spread = if r % 4 == 3 { f64::INFINITY } else { n as f64 * 0.3 + 1.0 };
            rank.iter()
                .map(|&x| if spread.is_finite() { x as f64 + rng.random_range(0.0..spread) } else { rng.random() })
                .collect()
        };
        ctx.run_list(&list_from_keys(instance, &keys))
    });
    pool.extend(results.into_iter().flatten());

    let best = pool.into_iter().min().ok_or(SolveError::Infeasible)?;
    Ok(HeuristicSolution {
        objective: best.objective,
        schedule: Schedule::new(best.starts),
        time_limit_hit: time_hit.load(Ordering::Relaxed),
    })
}
