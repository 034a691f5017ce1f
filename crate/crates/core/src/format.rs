//! Extended instance format (JSON).
//!
//! ```json
//! {"jobs":[{"id":1,"duration":2,"due_date":null,"weight":0,"consumption":{"1":1}}],
//!  "precedences":[[1,3]],
//!  "resources":[{"id":1,"base_pattern":[2, ...24 values],"overlay":{"5":1}}],
//!  "horizon":12}
//! ```
//!
//! Ids are 1-based and dense. A `null` due date is an infinite due date.
//! Consumption maps omit zero entries on output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Capacity, Job, ModelError, ProblemInstance, Resource, Time, CYCLE};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("job ids must be 1..={expected} in order, found {found} at position {position}")]
    JobIds { position: usize, found: u32, expected: usize },
    #[error("resource ids must be 1..={expected} in order, found {found} at position {position}")]
    ResourceIds { position: usize, found: u32, expected: usize },
    #[error("job {job} references unknown resource {resource}")]
    UnknownResource { job: u32, resource: u32 },
    #[error("resource {resource} base pattern has {found} values, expected 24")]
    PatternLength { resource: u32, found: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct JobDoc {
    pub id: u32,
    pub duration: Time,
    pub due_date: Option<Time>,
    #[serde(default)]
    pub weight: u64,
    #[serde(default)]
    pub consumption: BTreeMap<u32, Capacity>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ResourceDoc {
    pub id: u32,
    pub base_pattern: Vec<Capacity>,
    #[serde(default)]
    pub overlay: BTreeMap<Time, Capacity>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct InstanceDoc {
    pub jobs: Vec<JobDoc>,
    pub precedences: Vec<(u32, u32)>,
    pub resources: Vec<ResourceDoc>,
    pub horizon: Time,
}

impl From<&ProblemInstance> for InstanceDoc {
    fn from(inst: &ProblemInstance) -> Self {
        let jobs = inst
            .jobs()
            .iter()
            .enumerate()
            .map(|(j, job)| JobDoc {
                id: j as u32 + 1,
                duration: job.duration,
                due_date: job.due_date,
                weight: job.weight,
                consumption: job
                    .consumption
                    .iter()
                    .enumerate()
                    .filter(|(_, &q)| q != 0)
                    .map(|(k, &q)| (k as u32 + 1, q))
                    .collect(),
            })
            .collect();
        let resources = inst
            .resources()
            .iter()
            .enumerate()
            .map(|(k, r)| ResourceDoc { id: k as u32 + 1, base_pattern: r.base_pattern.to_vec(), overlay: r.overlay.clone() })
            .collect();
        InstanceDoc {
            jobs,
            precedences: inst.precedences().iter().map(|&(i, j)| (i as u32 + 1, j as u32 + 1)).collect(),
            resources,
            horizon: inst.horizon(),
        }
    }
}

impl TryFrom<InstanceDoc> for ProblemInstance {
    type Error = FormatError;

    fn try_from(doc: InstanceDoc) -> Result<Self, FormatError> {
        let m = doc.resources.len();
        let mut resources = Vec::with_capacity(m);
        for (position, r) in doc.resources.into_iter().enumerate() {
            if r.id as usize != position + 1 {
                return Err(FormatError::ResourceIds { position, found: r.id, expected: m });
            }
            let base_pattern: [Capacity; CYCLE] = r
                .base_pattern
                .as_slice()
                .try_into()
                .map_err(|_| FormatError::PatternLength { resource: r.id, found: r.base_pattern.len() })?;
            let mut res = Resource::periodic(base_pattern);
            for (t, delta) in r.overlay {
                res.add_delta(t, delta);
            }
            resources.push(res);
        }
        let n = doc.jobs.len();
        let mut jobs = Vec::with_capacity(n);
        for (position, j) in doc.jobs.into_iter().enumerate() {
            if j.id as usize != position + 1 {
                return Err(FormatError::JobIds { position, found: j.id, expected: n });
            }
            let mut consumption = vec![0; m];
            for (k, q) in j.consumption {
                if k == 0 || k as usize > m {
                    return Err(FormatError::UnknownResource { job: j.id, resource: k });
                }
                consumption[k as usize - 1] = q;
            }
            jobs.push(Job { duration: j.duration, due_date: j.due_date, weight: j.weight, consumption });
        }
        let mut precedences = Vec::with_capacity(doc.precedences.len());
        for (i, j) in doc.precedences {
            if i == 0 || j == 0 || i as usize > n || j as usize > n {
                return Err(ModelError::UnknownJob(i, j).into());
            }
            precedences.push((i as usize - 1, j as usize - 1));
        }
        Ok(ProblemInstance::new(jobs, precedences, resources, doc.horizon)?)
    }
}

impl Serialize for ProblemInstance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        InstanceDoc::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProblemInstance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = InstanceDoc::deserialize(d)?;
        ProblemInstance::try_from(doc).map_err(serde::de::Error::custom)
    }
}

/// Serializes in canonical form: fixed field order, sorted maps, pretty printed.
pub fn to_json(instance: &ProblemInstance) -> String {
    let mut out = serde_json::to_string_pretty(&InstanceDoc::from(instance)).expect("instance serializes");
    out.push('\n');
    out
}

pub fn from_json(text: &str) -> Result<ProblemInstance, FormatError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    ProblemInstance::try_from(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::samples::tiny1;

    #[test]
    fn canonical_round_trip_is_byte_identical() {
        let inst = tiny1().with_capacity_delta(0, 3, 5, 2).unwrap();
        let text = to_json(&inst);
        let back = from_json(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(to_json(&back), text);
    }

    #[test]
    fn null_due_date_is_infinite() {
        let text = to_json(&tiny1());
        assert!(text.contains("\"due_date\": null"));
        assert!(text.contains("\"due_date\": 4"));
    }

    #[test]
    fn rejects_bad_ids_and_patterns() {
        let mut doc = InstanceDoc::from(&tiny1());
        doc.jobs[1].id = 7;
        assert!(matches!(ProblemInstance::try_from(doc), Err(FormatError::JobIds { .. })));

        let mut doc = InstanceDoc::from(&tiny1());
        doc.resources[0].base_pattern.pop();
        assert!(matches!(ProblemInstance::try_from(doc), Err(FormatError::PatternLength { .. })));

        let mut doc = InstanceDoc::from(&tiny1());
        doc.jobs[0].consumption.insert(9, 1);
        assert!(matches!(ProblemInstance::try_from(doc), Err(FormatError::UnknownResource { .. })));

        assert!(matches!(from_json("{"), Err(FormatError::Json(_))));
    }
}
