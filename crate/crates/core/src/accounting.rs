//! Turning raw capacity relaxations into consumed-only changes, expressed as
//! capacity additions and migrations between resources.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    consumption_timeline, validate, Capacity, FeasibilityReport, ModelError, ProblemInstance, ResourceId, Schedule,
    Time,
};

/// Extra capacity `amount` on `resource` over `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CapacityAddition {
    #[serde(rename = "k")]
    pub resource: ResourceId,
    #[serde(rename = "s")]
    pub start: Time,
    #[serde(rename = "e")]
    pub end: Time,
    #[serde(rename = "c")]
    pub amount: Capacity,
}

/// Capacity `amount` moved from `from` to `to` over `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CapacityMigration {
    pub from: ResourceId,
    pub to: ResourceId,
    #[serde(rename = "s")]
    pub start: Time,
    #[serde(rename = "e")]
    pub end: Time,
    #[serde(rename = "c")]
    pub amount: Capacity,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapacityChanges {
    pub additions: Vec<CapacityAddition>,
    pub migrations: Vec<CapacityMigration>,
}

impl CapacityChanges {
    pub fn is_empty(&self) -> bool {
        self.additions.is_empty() && self.migrations.is_empty()
    }

    /// Capacity-time added from outside the instance.
    pub fn added_volume(&self) -> i64 {
        self.additions.iter().map(|a| a.amount * (a.end - a.start) as i64).sum()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AccountingError {
    #[error("modified capacity of {resource} at t={t} is below the original")]
    NotARelaxation { resource: ResourceId, t: Time },
    #[error("schedule is infeasible for the modified instance ({} violations)", .0.violations.len())]
    Infeasible(FeasibilityReport),
    #[error("instances differ in jobs, precedences or horizon")]
    Mismatch,
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn same_structure(a: &ProblemInstance, b: &ProblemInstance) -> bool {
    a.jobs() == b.jobs()
        && a.precedences() == b.precedences()
        && a.horizon() == b.horizon()
        && a.num_resources() == b.num_resources()
}

/// Keeps only the part of the relaxation the schedule consumes:
/// `original + max(0, consumption - original)` at every `(k, t)`.
pub fn reduce_capacity_changes(
    original: &ProblemInstance,
    modified: &ProblemInstance,
    schedule: &Schedule,
) -> Result<ProblemInstance, AccountingError> {
    if !same_structure(original, modified) {
        return Err(AccountingError::Mismatch);
    }
    let report = validate(modified, schedule)?;
    if !report.is_feasible() {
        return Err(AccountingError::Infeasible(report));
    }
    let mut profiles = original.capacity_profiles();
    for (k, profile) in profiles.iter_mut().enumerate() {
        let load = consumption_timeline(original, schedule, k);
        for (t, c) in profile.iter_mut().enumerate() {
            if modified.capacity(k, t) < *c {
                return Err(AccountingError::NotARelaxation { resource: ResourceId::from_index(k), t });
            }
            *c += (load[t] - *c).max(0);
        }
    }
    Ok(original.with_capacity_profiles(&profiles)?)
}

/// Decomposes a non-negative profile into rectangles `(start, end, height)`:
/// every maximal run of `diff >= level` is a unit slab, and slabs with the same
/// run are stacked. Sorted by `(start, end)`.
pub fn slab_rectangles(diff: &[Capacity]) -> Vec<(Time, Time, Capacity)> {
    let top = diff.iter().copied().max().unwrap_or(0);
    let mut slabs: Vec<(Time, Time)> = Vec::new();
    for level in 1..=top {
        let mut t = 0;
        while t < diff.len() {
            if diff[t] >= level {
                let s = t;
                while t < diff.len() && diff[t] >= level {
                    t += 1;
                }
                slabs.push((s, t));
            } else {
                t += 1;
            }
        }
    }
    slabs.sort_unstable();
    let mut out: Vec<(Time, Time, Capacity)> = Vec::new();
    for (s, e) in slabs {
        match out.last_mut() {
            Some(last) if (last.0, last.1) == (s, e) => last.2 += 1,
            _ => out.push((s, e, 1)),
        }
    }
    out
}

/// Splits `reduced - original` into additions and migrations. A rectangle
/// becomes a migration when another resource has at least its height of
/// spare original capacity over its whole span; the donor with the most spare
/// capacity (lowest id on ties) is chosen and its spare capacity is debited.
pub fn extract_changes(
    original: &ProblemInstance,
    reduced: &ProblemInstance,
    schedule: &Schedule,
) -> Result<CapacityChanges, AccountingError> {
    if !same_structure(original, reduced) {
        return Err(AccountingError::Mismatch);
    }
    let m = original.num_resources();
    let horizon = original.horizon();
    let mut spare: Vec<Vec<Capacity>> = (0..m)
        .map(|k| {
            let load = consumption_timeline(original, schedule, k);
            (0..horizon).map(|t| original.capacity(k, t) - load[t]).collect()
        })
        .collect();
    let mut changes = CapacityChanges::default();
    for k in 0..m {
        let mut diff = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let d = reduced.capacity(k, t) - original.capacity(k, t);
            if d < 0 {
                return Err(AccountingError::NotARelaxation { resource: ResourceId::from_index(k), t });
            }
            diff.push(d);
        }
        for (start, end, amount) in slab_rectangles(&diff) {
            let donor = (0..m)
                .filter(|&d| d != k)
                .map(|d| (spare[d][start..end].iter().copied().min().unwrap_or(0), d))
                .filter(|&(slack, _)| slack >= amount)
                .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)));
            let to = ResourceId::from_index(k);
            match donor {
                Some((_, d)) => {
                    for s in &mut spare[d][start..end] {
                        *s -= amount;
                    }
                    changes.migrations.push(CapacityMigration {
                        from: ResourceId::from_index(d),
                        to,
                        start,
                        end,
                        amount,
                    });
                }
                None => changes.additions.push(CapacityAddition { resource: to, start, end, amount }),
            }
        }
    }
    Ok(changes)
}

/// Applies `changes` to `original`: additions and migration receivers gain
/// capacity, migration donors lose it.
pub fn apply_changes(original: &ProblemInstance, changes: &CapacityChanges) -> Result<ProblemInstance, ModelError> {
    let mut profiles = original.capacity_profiles();
    let mut shift = |k: ResourceId, start: Time, end: Time, delta: Capacity| -> Result<(), ModelError> {
        let row = profiles.get_mut(k.index()).ok_or(ModelError::UnknownResource(k))?;
        let end = end.min(row.len());
        for c in &mut row[start.min(end)..end] {
            *c += delta;
        }
        Ok(())
    };
    for a in &changes.additions {
        shift(a.resource, a.start, a.end, a.amount)?;
    }
    for mig in &changes.migrations {
        shift(mig.to, mig.start, mig.end, mig.amount)?;
        shift(mig.from, mig.start, mig.end, -mig.amount)?;
    }
    original.with_capacity_profiles(&profiles)
}

/// Capacity moved away from each resource by migrations, per period.
pub fn migration_outflow(original: &ProblemInstance, changes: &CapacityChanges) -> Vec<Vec<Capacity>> {
    let mut out = vec![vec![0; original.horizon()]; original.num_resources()];
    for mig in &changes.migrations {
        for c in &mut out[mig.from.index()][mig.start..mig.end] {
            *c += mig.amount;
        }
    }
    out
}

/// Problems found by [`check_round_trip`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoundTripIssue {
    /// `original + changes + outflow != reduced` at `(k, t)`.
    Mismatch { resource: ResourceId, t: Time, composed: Capacity, reduced: Capacity },
    /// A donor's capacity after migrating is below its consumption.
    DonorOverdrawn { resource: ResourceId, t: Time },
    Model(ModelError),
}

/// Checks that the changes re-compose the reduced instance exactly (adding
/// back what donors gave away) and that no donor dips below its consumption.
pub fn check_round_trip(
    original: &ProblemInstance,
    reduced: &ProblemInstance,
    changes: &CapacityChanges,
    schedule: &Schedule,
) -> Vec<RoundTripIssue> {
    let composed = match apply_changes(original, changes) {
        Ok(c) => c,
        Err(e) => return vec![RoundTripIssue::Model(e)],
    };
    let outflow = migration_outflow(original, changes);
    let mut issues = Vec::new();
    for k in 0..original.num_resources() {
        let load = consumption_timeline(original, schedule, k);
        for t in 0..original.horizon() {
            let resource = ResourceId::from_index(k);
            let c = composed.capacity(k, t);
            if c + outflow[k][t] != reduced.capacity(k, t) {
                issues.push(RoundTripIssue::Mismatch {
                    resource,
                    t,
                    composed: c + outflow[k][t],
                    reduced: reduced.capacity(k, t),
                });
            }
            if c < load[t] {
                issues.push(RoundTripIssue::DonorOverdrawn { resource, t });
            }
        }
    }
    issues
}
