//! Independent oracles and random instance builders shared by test targets.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rcpsp_relax::model::{Capacity, Job, ProblemInstance, Resource, Schedule, Time, CYCLE};
use rcpsp_relax::Rational;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random in-forest instance: 4..=8 jobs, durations 1..=3, one or two
/// resources whose capacity varies over the day, horizon `min(30, sum d + 6)`.
pub fn random_instance(seed: u64) -> ProblemInstance {
    let mut rng = rng(seed);
    let n = rng.random_range(4..=8);
    let m = rng.random_range(1..=2);
    let mut patterns = Vec::new();
    for _ in 0..m {
        let mut pattern = [0 as Capacity; CYCLE];
        for c in pattern.iter_mut() {
            *c = match rng.random_range(0..100) {
                0..8 => 0,
                8..20 => 1,
                _ => rng.random_range(2..=3),
            };
        }
        pattern[rng.random_range(0..CYCLE)] = 3;
        patterns.push(pattern);
    }
    let mut successor = vec![None; n];
    for (i, s) in successor.iter_mut().enumerate().take(n - 1) {
        if rng.random_bool(0.6) {
            *s = Some(rng.random_range(i + 1..n));
        }
    }
    let durations: Vec<Time> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    let horizon = (durations.iter().sum::<Time>() + 6).min(30);
    let mut jobs = Vec::new();
    for j in 0..n {
        let consumption = (0..m).map(|_| if rng.random_bool(0.7) { rng.random_range(1..=2) } else { 0 }).collect();
        let mut job = Job::new(durations[j], consumption);
        if successor[j].is_none() {
            let due = rng.random_range(1..=horizon / 2 + 1);
            job = job.with_due_date(due, rng.random_range(1..=3));
        }
        jobs.push(job);
    }
    let precedences = successor.iter().enumerate().filter_map(|(i, s)| s.map(|s| (i, s))).collect();
    let resources = patterns.into_iter().map(Resource::periodic).collect();
    ProblemInstance::new(jobs, precedences, resources, horizon).expect("random instance is valid")
}

/// Unit capacity, unit (0/1) consumption variant.
pub fn random_unit_instance(seed: u64) -> ProblemInstance {
    let mut rng = rng(seed);
    let n = rng.random_range(3..=8);
    let m = rng.random_range(1..=2);
    let jobs: Vec<Job> = (0..n)
        .map(|_| {
            let mut consumption: Vec<Capacity> = (0..m).map(|_| rng.random_range(0..=1)).collect();
            consumption[0] = 1;
            Job::new(rng.random_range(1..=4), consumption)
        })
        .collect();
    let horizon = jobs.iter().map(|j| j.duration).sum::<Time>() * 2 + 4;
    ProblemInstance::new(jobs, vec![], (0..m).map(|_| Resource::constant(1)).collect(), horizon).unwrap()
}

/// Capacity minus consumption of the given placements, computed per period.
fn residual(inst: &ProblemInstance, placed: &[(usize, Time)]) -> Vec<Vec<Capacity>> {
    let mut res: Vec<Vec<Capacity>> = (0..inst.num_resources())
        .map(|k| (0..inst.horizon()).map(|t| inst.capacity(k, t)).collect())
        .collect();
    for &(j, s) in placed {
        let job = inst.job(j);
        for (k, row) in res.iter_mut().enumerate() {
            for slot in &mut row[s..s + job.duration] {
                *slot -= job.consumption[k];
            }
        }
    }
    res
}

fn fits(inst: &ProblemInstance, res: &[Vec<Capacity>], j: usize, s: Time) -> bool {
    let job = inst.job(j);
    s + job.duration <= inst.horizon()
        && res.iter().enumerate().all(|(k, row)| row[s..s + job.duration].iter().all(|&r| r >= job.consumption[k]))
}

/// Minimum weighted tardiness over every start vector on the full time grid,
/// `None` if no feasible schedule exists. Plain enumeration in index order of
/// a topological sort, pruned only by capacity, precedence and the objective
/// accumulated on already placed project roots.
pub fn brute_force_optimum(inst: &ProblemInstance) -> Option<u64> {
    let mut order: Vec<usize> = Vec::new();
    let mut done = vec![false; inst.num_jobs()];
    while order.len() < inst.num_jobs() {
        for j in 0..inst.num_jobs() {
            if !done[j] && inst.predecessors(j).iter().all(|&i| done[i]) {
                done[j] = true;
                order.push(j);
            }
        }
    }
    fn rec(
        inst: &ProblemInstance,
        order: &[usize],
        depth: usize,
        starts: &mut Vec<Time>,
        res: &mut Vec<Vec<Capacity>>,
        partial: u64,
        best: &mut Option<u64>,
    ) {
        if best.is_some_and(|b| partial >= b) {
            return;
        }
        if depth == order.len() {
            *best = Some(partial);
            return;
        }
        let j = order[depth];
        let job = inst.job(j);
        let est = inst.predecessors(j).iter().map(|&i| starts[i] + inst.job(i).duration).max().unwrap_or(0);
        for s in est..=inst.horizon().saturating_sub(job.duration) {
            if !fits(inst, res, j, s) {
                continue;
            }
            let cost = job.due_date.map_or(0, |due| job.weight * (s + job.duration).saturating_sub(due) as u64);
            starts[j] = s;
            for (k, row) in res.iter_mut().enumerate() {
                for slot in &mut row[s..s + job.duration] {
                    *slot -= job.consumption[k];
                }
            }
            rec(inst, order, depth + 1, starts, res, partial + cost, best);
            for (k, row) in res.iter_mut().enumerate() {
                for slot in &mut row[s..s + job.duration] {
                    *slot += job.consumption[k];
                }
            }
        }
    }
    let mut best = None;
    let mut res = residual(inst, &[]);
    rec(inst, &order, 0, &mut vec![0; inst.num_jobs()], &mut res, 0, &mut best);
    best
}

/// Some feasible schedule with random idle time inserted, if the random
/// placement succeeds.
pub fn random_feasible_schedule(inst: &ProblemInstance, seed: u64) -> Option<Schedule> {
    let mut rng = rng(seed);
    let n = inst.num_jobs();
    let mut starts = vec![0; n];
    let mut placed: Vec<(usize, Time)> = Vec::new();
    let mut done = vec![false; n];
    while placed.len() < n {
        let ready: Vec<usize> =
            (0..n).filter(|&j| !done[j] && inst.predecessors(j).iter().all(|&i| done[i])).collect();
        let j = ready[rng.random_range(0..ready.len())];
        let est = inst.predecessors(j).iter().map(|&i| starts[i] + inst.job(i).duration).max().unwrap_or(0);
        let res = residual(inst, &placed);
        let options: Vec<Time> = (est..=inst.horizon().saturating_sub(inst.job(j).duration))
            .filter(|&s| fits(inst, &res, j, s))
            .take(3)
            .collect();
        if options.is_empty() {
            return None;
        }
        let s = options[rng.random_range(0..options.len())];
        starts[j] = s;
        done[j] = true;
        placed.push((j, s));
    }
    Some(Schedule::new(starts))
}

/// Load of `k` at `t`, from the definition.
pub fn load_at(inst: &ProblemInstance, s: &Schedule, k: usize, t: Time) -> Capacity {
    (0..inst.num_jobs())
        .filter(|&j| s.start(j) <= t && t < s.start(j) + inst.job(j).duration)
        .map(|j| inst.job(j).consumption[k])
        .sum()
}

pub fn mrur_oracle(inst: &ProblemInstance, s: &Schedule, k: usize) -> Rational {
    let cmax = (0..inst.num_jobs()).map(|j| s.start(j) + inst.job(j).duration).max().unwrap_or(0);
    let mut num = 0i128;
    for j in 0..inst.num_jobs() {
        num += inst.job(j).duration as i128 * inst.job(j).consumption[k] as i128;
    }
    let mut den = 0i128;
    for t in 0..cmax {
        den += inst.capacity(k, t) as i128;
    }
    if den == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(num, den)
    }
}

/// Active periods as inclusive `(first, last)` pairs, found by scanning the
/// load from the definition.
pub fn active_periods_oracle(inst: &ProblemInstance, s: &Schedule, k: usize) -> Vec<(Time, Time)> {
    let mut out: Vec<(Time, Time)> = Vec::new();
    for t in 0..inst.horizon() {
        if load_at(inst, s, k, t) > 0 {
            match out.last_mut() {
                Some(last) if last.1 + 1 == t => last.1 = t,
                _ => out.push((t, t)),
            }
        }
    }
    out
}

pub fn pru_oracle(inst: &ProblemInstance, s: &Schedule, k: usize, first: Time, last: Time) -> Rational {
    let num: i128 = (0..inst.num_jobs())
        .filter(|&j| inst.job(j).consumption[k] > 0 && first <= s.start(j) && s.start(j) <= last)
        .map(|j| inst.job(j).duration as i128 * inst.job(j).consumption[k] as i128)
        .sum();
    let den: i128 = (first..=last).map(|t| inst.capacity(k, t) as i128).sum();
    Rational::new(num, den)
}

pub fn auau_oracle(inst: &ProblemInstance, s: &Schedule, k: usize) -> Rational {
    let periods = active_periods_oracle(inst, s, k);
    if periods.is_empty() {
        return Rational::from_integer(0);
    }
    let total: Rational = periods.iter().map(|&(a, b)| pru_oracle(inst, s, k, a, b)).sum();
    total / Rational::from_integer(periods.len() as i128)
}

/// `S^t` by direct recursion on the definition.
pub fn suffix_relaxed_oracle(inst: &ProblemInstance, s: &Schedule, t: Time) -> Vec<Time> {
    fn start(inst: &ProblemInstance, s: &Schedule, t: Time, j: usize) -> Time {
        if s.start(j) <= t {
            return s.start(j);
        }
        inst.predecessors(j).iter().map(|&i| start(inst, s, t, i) + inst.job(i).duration).max().unwrap_or(0)
    }
    (0..inst.num_jobs()).map(|j| start(inst, s, t, j)).collect()
}

/// Per-job minimum relaxed start strictly below the current start, over
/// every `t` in `[0, T]`.
pub fn earliest_relaxed_oracle(inst: &ProblemInstance, s: &Schedule) -> Vec<Option<Time>> {
    let all: Vec<Vec<Time>> = (0..=inst.horizon()).map(|t| suffix_relaxed_oracle(inst, s, t)).collect();
    (0..inst.num_jobs()).map(|j| all.iter().map(|st| st[j]).filter(|&x| x < s.start(j)).min()).collect()
}

/// Left-shift closure by naive iteration to a fixpoint over all job pairs.
pub fn closure_oracle(inst: &ProblemInstance, s: &Schedule, job: usize) -> BTreeSet<usize> {
    let n = inst.num_jobs();
    let m = inst.num_resources();
    let c = |i: usize| s.start(i) + inst.job(i).duration;
    let positive = |k: usize, t: Time| t < inst.horizon() && inst.capacity(k, t) > 0;
    let mut set = BTreeSet::from([job]);
    loop {
        let mut grown = set.clone();
        for &j in &set {
            let sj = s.start(j);
            for i in 0..n {
                let pred = inst.precedences().contains(&(i, j));
                let share = i != j && (0..m).any(|k| inst.job(i).consumption[k] > 0 && inst.job(j).consumption[k] > 0);
                if c(i) == sj && (pred || share) {
                    grown.insert(i);
                }
            }
            for k in 0..m {
                if inst.job(j).consumption[k] == 0 {
                    continue;
                }
                let opens = positive(k, sj) && (sj == 0 || !positive(k, sj - 1));
                if !opens {
                    continue;
                }
                // End of the previous availability interval, if any.
                let prev_end = (1..sj).rev().find(|&t| positive(k, t - 1) && !positive(k, t));
                if let Some(e) = prev_end {
                    for i in 0..n {
                        if inst.job(i).consumption[k] > 0 && c(i) == e {
                            grown.insert(i);
                        }
                    }
                }
            }
        }
        if grown == set {
            return set;
        }
        set = grown;
    }
}

/// Checks a proposal against the original instance from first principles:
/// the reduced capacity is `max(original, load)` everywhere, the listed
/// changes re-compose it exactly (counting what donors gave away), the
/// proposal's instance equals the composition, and its schedule fits.
pub fn check_proposal(
    original: &ProblemInstance,
    proposal: &rcpsp_relax::proposal::RelaxationProposal,
) -> Result<(), String> {
    let s = &proposal.schedule;
    if !rcpsp_relax::model::is_feasible(&proposal.instance, s) {
        return Err("schedule infeasible on the proposed instance".into());
    }
    let m = original.num_resources();
    let horizon = original.horizon();
    let mut composed: Vec<Vec<Capacity>> =
        (0..m).map(|k| (0..horizon).map(|t| original.capacity(k, t)).collect()).collect();
    let mut outflow = vec![vec![0; horizon]; m];
    for a in &proposal.changes.additions {
        if a.amount < 1 || a.start >= a.end || a.end > horizon {
            return Err(format!("malformed addition {a:?}"));
        }
        for t in a.start..a.end {
            composed[a.resource.index()][t] += a.amount;
        }
    }
    for mig in &proposal.changes.migrations {
        if mig.amount < 1 || mig.from == mig.to || mig.start >= mig.end || mig.end > horizon {
            return Err(format!("malformed migration {mig:?}"));
        }
        for t in mig.start..mig.end {
            composed[mig.to.index()][t] += mig.amount;
            composed[mig.from.index()][t] -= mig.amount;
            outflow[mig.from.index()][t] += mig.amount;
        }
    }
    for k in 0..m {
        for t in 0..horizon {
            let load = load_at(original, s, k, t);
            let minimal = original.capacity(k, t).max(load);
            if composed[k][t] + outflow[k][t] != minimal {
                return Err(format!("round trip differs at k={k} t={t}"));
            }
            if composed[k][t] < load {
                return Err(format!("capacity below load at k={k} t={t}"));
            }
            if proposal.instance.capacity(k, t) != composed[k][t] {
                return Err(format!("proposal instance differs at k={k} t={t}"));
            }
        }
    }
    Ok(())
}

/// Two resources on 8h shifts ([6,14) each day) and random jobs packed
/// against shift boundaries.
pub fn two_shift_fixture(seed: u64) -> (ProblemInstance, Schedule) {
    let mut rng = rng(seed);
    let mut pattern = [0; CYCLE];
    pattern[6..14].fill(2);
    let n = 6;
    let jobs: Vec<Job> = (0..n)
        .map(|_| Job::new(rng.random_range(1..=3), vec![rng.random_range(0..=1), 1]))
        .collect();
    let inst = ProblemInstance::new(jobs, vec![], vec![Resource::periodic(pattern), Resource::periodic(pattern)], 72)
        .unwrap();
    // Half the jobs end exactly at 14 or 38, the others start at 30 or 54.
    let starts = (0..n)
        .map(|j| {
            let d = inst.job(j).duration;
            match j % 4 {
                0 => 14 - d,
                1 => 30,
                2 => 38 - d,
                _ => 54,
            }
        })
        .collect();
    (inst, Schedule::new(starts))
}
