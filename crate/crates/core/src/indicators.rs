//! Execution bottleneck indicators computed from a schedule.
//!
//! [`Indicator::Mrur`] and [`Indicator::Auau`] account for capacities and
//! consumption amounts. [`Indicator::Mur`] and [`Indicator::Auad`] are the
//! job-shop reference forms, which only look at busy time; on instances with
//! unit capacities and unit consumptions they agree with the former two.

use std::fmt;
use std::str::FromStr;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::model::{consumption_timeline, ProblemInstance, ResourceId, Schedule, Time};
use crate::par::{self, Parallelism};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Indicator {
    Mrur,
    Auau,
    Mur,
    Auad,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [Indicator::Mrur, Indicator::Auau, Indicator::Mur, Indicator::Auad];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::Mrur => "mrur",
            Indicator::Auau => "auau",
            Indicator::Mur => "mur",
            Indicator::Auad => "auad",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown indicator `{0}` (expected mrur, auau, mur or auad)")]
pub struct UnknownIndicator(pub String);

impl FromStr for Indicator {
    type Err = UnknownIndicator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownIndicator(s.to_string()))
    }
}

/// An indicator value. `undefined` marks a zero denominator, in which case
/// `value` is 0 so that rankings stay total.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Score {
    pub value: Rational,
    pub undefined: bool,
}

impl Score {
    fn ratio(num: i128, den: i128) -> Score {
        if den == 0 {
            Score { value: Rational::zero(), undefined: true }
        } else {
            Score { value: Rational::new(num, den), undefined: false }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            exact: String,
            value: f64,
            undefined: bool,
        }
        Repr { exact: self.value.to_string(), value: self.to_f64(), undefined: self.undefined }.serialize(s)
    }
}

/// Maximal run `[start, end)` of positive consumption on one resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ActivePeriod {
    pub resource: ResourceId,
    pub start: Time,
    pub end: Time,
}

impl ActivePeriod {
    pub fn len(&self) -> Time {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

fn runs(mask: impl IntoIterator<Item = bool>) -> Vec<(Time, Time)> {
    let mut out = Vec::new();
    let mut open = None;
    let mut len = 0;
    for (t, on) in mask.into_iter().enumerate() {
        match (on, open) {
            (true, None) => open = Some(t),
            (false, Some(s)) => {
                out.push((s, t));
                open = None;
            }
            _ => {}
        }
        len = t + 1;
    }
    if let Some(s) = open {
        out.push((s, len));
    }
    out
}

pub fn active_periods(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Vec<ActivePeriod> {
    let load = consumption_timeline(instance, schedule, k);
    runs(load.iter().map(|&l| l > 0))
        .into_iter()
        .map(|(start, end)| ActivePeriod { resource: ResourceId::from_index(k), start, end })
        .collect()
}

fn work(instance: &ProblemInstance, j: usize, k: usize) -> i128 {
    let job = instance.job(j);
    job.duration as i128 * job.consumption[k] as i128
}

fn available(instance: &ProblemInstance, k: usize, start: Time, end: Time) -> i128 {
    (start..end.min(instance.horizon())).map(|t| instance.capacity(k, t) as i128).sum()
}

/// Consumed capacity-time over available capacity-time before the makespan.
pub fn mrur(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Score {
    let num: i128 = (0..instance.num_jobs()).map(|j| work(instance, j, k)).sum();
    Score::ratio(num, available(instance, k, 0, schedule.makespan(instance)))
}

/// Utilization of one active period; jobs are attributed to the period in
/// which they start, including any part running past its end.
pub fn pru(instance: &ProblemInstance, schedule: &Schedule, k: usize, period: &ActivePeriod) -> Rational {
    let num: i128 = (0..instance.num_jobs())
        .filter(|&j| instance.job(j).uses(k) && (period.start..period.end).contains(&schedule.start(j)))
        .map(|j| work(instance, j, k))
        .sum();
    // Positive load implies positive capacity at every period of the run.
    Rational::new(num, available(instance, k, period.start, period.end))
}

/// Mean period utilization over the active periods of `k`.
pub fn auau(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Score {
    let periods = active_periods(instance, schedule, k);
    if periods.is_empty() {
        return Score { value: Rational::zero(), undefined: true };
    }
    let sum: Rational = periods.iter().map(|p| pru(instance, schedule, k, p)).sum();
    Score { value: sum / Rational::from_integer(periods.len() as i128), undefined: false }
}

/// Busy time of `k` over the makespan.
pub fn mur(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Score {
    let busy: i128 =
        (0..instance.num_jobs()).filter(|&j| instance.job(j).uses(k)).map(|j| instance.job(j).duration as i128).sum();
    Score::ratio(busy, schedule.makespan(instance) as i128)
}

/// Execution periods: merged busy intervals of the jobs using `k`.
pub fn execution_periods(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Vec<(Time, Time)> {
    let mut intervals: Vec<(Time, Time)> = (0..instance.num_jobs())
        .filter(|&j| instance.job(j).uses(k))
        .map(|j| (schedule.start(j), schedule.completion(instance, j)))
        .collect();
    intervals.sort_unstable();
    let mut merged: Vec<(Time, Time)> = Vec::new();
    for (s, e) in intervals {
        match merged.last_mut() {
            Some(last) if s <= last.1 => last.1 = last.1.max(e),
            _ => merged.push((s, e)),
        }
    }
    merged
}

/// Mean over execution periods of job time started in the period per period length.
pub fn auad(instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Score {
    let periods = execution_periods(instance, schedule, k);
    if periods.is_empty() {
        return Score { value: Rational::zero(), undefined: true };
    }
    let sum: Rational = periods
        .iter()
        .map(|&(s, e)| {
            let busy: i128 = (0..instance.num_jobs())
                .filter(|&j| instance.job(j).uses(k) && (s..e).contains(&schedule.start(j)))
                .map(|j| instance.job(j).duration as i128)
                .sum();
            Rational::new(busy, (e - s) as i128)
        })
        .sum();
    Score { value: sum / Rational::from_integer(periods.len() as i128), undefined: false }
}

pub fn score(indicator: Indicator, instance: &ProblemInstance, schedule: &Schedule, k: usize) -> Score {
    match indicator {
        Indicator::Mrur => mrur(instance, schedule, k),
        Indicator::Auau => auau(instance, schedule, k),
        Indicator::Mur => mur(instance, schedule, k),
        Indicator::Auad => auad(instance, schedule, k),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RankedResource {
    pub resource: ResourceId,
    pub score: Score,
}

/// Resources by descending score, ties broken by lowest id.
pub fn rank_resources(
    instance: &ProblemInstance,
    schedule: &Schedule,
    indicator: Indicator,
    mode: Parallelism,
) -> Vec<RankedResource> {
    let mut ranked = par::map_range(mode, instance.num_resources(), |k| RankedResource {
        resource: ResourceId::from_index(k),
        score: score(indicator, instance, schedule, k),
    });
    ranked.sort_by(|a, b| b.score.value.cmp(&a.score.value).then(a.resource.cmp(&b.resource)));
    ranked
}
