use crate::model::{Capacity, ProblemInstance, Time};

/// Instance data precomputed once per solve and shared by every restart.
pub(crate) struct Prepared<'a> {
    pub instance: &'a ProblemInstance,
    pub capacities: Vec<Vec<Capacity>>,
    /// Per job: the resources it uses and the amount.
    pub demands: Vec<Vec<(usize, Capacity)>>,
}

impl<'a> Prepared<'a> {
    pub fn new(instance: &'a ProblemInstance) -> Self {
        let demands = instance
            .jobs()
            .iter()
            .map(|job| job.consumption.iter().enumerate().filter(|(_, &q)| q > 0).map(|(k, &q)| (k, q)).collect())
            .collect();
        Prepared { instance, capacities: instance.capacity_profiles(), demands }
    }

    pub fn timeline(&self) -> Timeline<'_> {
        Timeline { prep: self, residual: self.capacities.clone() }
    }

    pub fn duration(&self, j: usize) -> Time {
        self.instance.job(j).duration
    }
}

/// Residual capacity over the horizon while a schedule is being built.
pub(crate) struct Timeline<'p> {
    prep: &'p Prepared<'p>,
    residual: Vec<Vec<Capacity>>,
}

impl Timeline<'_> {
    /// Earliest `t >= est` such that `j` fits on `[t, t + d)` within the horizon.
    pub fn earliest(&self, j: usize, est: Time) -> Option<Time> {
        let d = self.prep.duration(j);
        let horizon = self.prep.instance.horizon();
        let mut t = est;
        'search: while t + d <= horizon {
            for &(k, q) in &self.prep.demands[j] {
                let row = &self.residual[k];
                for u in (t..t + d).rev() {
                    if row[u] < q {
                        t = u + 1;
                        continue 'search;
                    }
                }
            }
            return Some(t);
        }
        None
    }

    /// Latest start `s` with `s + d <= latest_finish` such that `j` fits.
    pub fn latest(&self, j: usize, latest_finish: Time) -> Option<Time> {
        let d = self.prep.duration(j);
        let mut s = latest_finish.min(self.prep.instance.horizon()).checked_sub(d)?;
        'search: loop {
            for &(k, q) in &self.prep.demands[j] {
                let row = &self.residual[k];
                if let Some(u) = (s..s + d).find(|&u| row[u] < q) {
                    s = u.checked_sub(d)?;
                    continue 'search;
                }
            }
            return Some(s);
        }
    }

    pub fn reserve(&mut self, j: usize, start: Time) {
        let d = self.prep.duration(j);
        for &(k, q) in &self.prep.demands[j] {
            for slot in &mut self.residual[k][start..start + d] {
                *slot -= q;
            }
        }
    }

    pub fn release(&mut self, j: usize, start: Time) {
        let d = self.prep.duration(j);
        for &(k, q) in &self.prep.demands[j] {
            for slot in &mut self.residual[k][start..start + d] {
                *slot += q;
            }
        }
    }
}

/// Serial schedule-generation scheme. `order` must list every job after all
/// of its predecessors. Returns `None` if some job does not fit in the horizon.
pub(crate) fn serial_sgs(prep: &Prepared<'_>, order: &[usize]) -> Option<Vec<Time>> {
    let inst = prep.instance;
    let mut timeline = prep.timeline();
    let mut starts = vec![0; inst.num_jobs()];
    for &j in order {
        let est = inst.predecessors(j).iter().map(|&i| starts[i] + prep.duration(i)).max().unwrap_or(0);
        let t = timeline.earliest(j, est)?;
        timeline.reserve(j, t);
        starts[j] = t;
    }
    Some(starts)
}

/// Activity list sorted by start time (ties by index). Precedence-feasible for
/// any feasible schedule because durations are positive.
pub(crate) fn list_by_start(starts: &[Time]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..starts.len()).collect();
    order.sort_by_key(|&j| (starts[j], j));
    order
}

/// One backward pass (right-justify) followed by one forward pass (left-justify).
///
/// In the backward pass every project root may finish as late as
/// `root_finish(root, completion)`; every other job as late as its successor's
/// new start. Returns `None` only if a pass cannot place a job, which does not
/// happen for feasible input.
pub(crate) fn justify(
    prep: &Prepared<'_>,
    starts: &[Time],
    root_finish: impl Fn(usize, Time) -> Time,
) -> Option<Vec<Time>> {
    let inst = prep.instance;
    let n = inst.num_jobs();
    let completion = |j: usize| starts[j] + prep.duration(j);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| (std::cmp::Reverse(completion(j)), std::cmp::Reverse(j)));
    let mut timeline = prep.timeline();
    let mut back = vec![0; n];
    for &j in &order {
        let latest_finish = match inst.successor(j) {
            Some(s) => back[s],
            None => root_finish(j, completion(j)).max(completion(j)),
        };
        let s = timeline.latest(j, latest_finish)?;
        timeline.reserve(j, s);
        back[j] = s;
    }
    serial_sgs(prep, &list_by_start(&back))
}
