//! PSPLIB single-mode (`.sm`) reading and writing.
//!
//! The parser follows the layout of the published j30/j60/j90/j120 files:
//! a header block with the job and resource counts, then the
//! `PRECEDENCE RELATIONS`, `REQUESTS/DURATIONS` and `RESOURCEAVAILABILITIES`
//! sections, separated by lines of asterisks. The dummy super-source (first
//! job) and super-sink (last job) are removed from the returned network.
//!
//! [`synthesize`] produces networks in the same layout from a seed. It is used
//! for the bundled benchmark sources; real PSPLIB files go through the same
//! parser.

use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Capacity, Time};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> ParseError {
    ParseError { line, message: message.into() }
}

/// Precedence network of the real (non-dummy) jobs, 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawNetwork {
    pub durations: Vec<Time>,
    /// `requests[j][k]`: per-period demand of job `j` on renewable resource `k`.
    pub requests: Vec<Vec<Capacity>>,
    pub successors: Vec<Vec<usize>>,
    pub capacities: Vec<Capacity>,
}

impl RawNetwork {
    pub fn num_jobs(&self) -> usize {
        self.durations.len()
    }

    pub fn num_resources(&self) -> usize {
        self.capacities.len()
    }

    pub fn edge_count(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.successors.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Lines<'a> {
    /// 1-based number of the line `next` would return.
    fn line_no(&self) -> usize {
        self.pos + 1
    }

    fn next(&mut self) -> Option<&'a str> {
        let line = self.lines.get(self.pos).copied();
        if line.is_some() {
            self.pos += 1;
        }
        line
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn seek(&mut self, header: &str) -> Result<(), ParseError> {
        while let Some(line) = self.next() {
            if line.trim_start().starts_with(header) {
                return Ok(());
            }
        }
        Err(err(self.line_no(), format!("missing section `{header}`")))
    }
}

fn is_separator(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && t.chars().all(|c| c == '*')
}

fn ints(line: &str, line_no: usize) -> Result<Vec<i64>, ParseError> {
    line.split_whitespace()
        .map(|tok| tok.parse::<i64>().map_err(|_| err(line_no, format!("expected an integer, found `{tok}`"))))
        .collect()
}

fn header_value(line: &str, line_no: usize) -> Result<i64, ParseError> {
    let value = line.split(':').nth(1).ok_or_else(|| err(line_no, "expected `key : value`"))?;
    let tok = value.split_whitespace().next().ok_or_else(|| err(line_no, "missing value"))?;
    tok.parse().map_err(|_| err(line_no, format!("expected an integer, found `{tok}`")))
}

/// Reads the rows of a section until the separator. Returns the rows with
/// their line numbers; a missing separator or early end is a truncation.
fn section_rows<'a>(lines: &mut Lines<'a>, expected: usize) -> Result<Vec<(usize, &'a str)>, ParseError> {
    let mut rows = Vec::with_capacity(expected);
    loop {
        let line_no = lines.line_no();
        match lines.next() {
            None => {
                return Err(err(line_no, format!("section truncated after {} of {expected} jobs", rows.len())));
            }
            Some(line) if is_separator(line) => {
                if rows.len() != expected {
                    return Err(err(line_no, format!("job count mismatch: found {} rows, header declares {expected}", rows.len())));
                }
                return Ok(rows);
            }
            Some(line) if line.trim().is_empty() => continue,
            Some(line) => rows.push((line_no, line)),
        }
    }
}

/// Parses a single-mode PSPLIB file.
pub fn parse_psplib(text: &str) -> Result<RawNetwork, ParseError> {
    let mut lines = Lines { lines: text.lines().collect(), pos: 0 };

    lines.seek("jobs (incl. supersource/sink")?;
    let job_line = lines.line_no() - 1;
    let total_jobs = header_value(lines.lines[job_line - 1], job_line)?;
    if total_jobs < 2 {
        return Err(err(job_line, "at least the two dummy jobs are required"));
    }
    let total_jobs = total_jobs as usize;

    lines.seek("- renewable")?;
    let res_line = lines.line_no() - 1;
    let num_resources = header_value(lines.lines[res_line - 1], res_line)? as usize;

    lines.seek("PRECEDENCE RELATIONS:")?;
    if lines.peek().is_some_and(|l| l.trim_start().starts_with("jobnr")) {
        lines.next();
    }
    let mut successors = vec![Vec::new(); total_jobs];
    for (expected_id, (line_no, row)) in section_rows(&mut lines, total_jobs)?.into_iter().enumerate() {
        let v = ints(row, line_no)?;
        if v.len() < 3 {
            return Err(err(line_no, "precedence row needs job number, mode count and successor count"));
        }
        if v[0] as usize != expected_id + 1 {
            return Err(err(line_no, format!("expected job {}, found {}", expected_id + 1, v[0])));
        }
        if v[1] != 1 {
            return Err(err(line_no, format!("job {} has {} modes; only single-mode files are supported", v[0], v[1])));
        }
        let count = v[2] as usize;
        if v.len() - 3 != count {
            return Err(err(line_no, format!("job {} declares {count} successors but lists {}", v[0], v.len() - 3)));
        }
        for &s in &v[3..] {
            if s < 1 || s as usize > total_jobs {
                return Err(err(line_no, format!("successor {s} out of range")));
            }
            successors[expected_id].push(s as usize - 1);
        }
    }

    lines.seek("REQUESTS/DURATIONS:")?;
    while lines.peek().is_some_and(|l| {
        let t = l.trim_start();
        t.starts_with("jobnr") || t.starts_with('-')
    }) {
        lines.next();
    }
    let mut durations = vec![0; total_jobs];
    let mut requests = vec![Vec::new(); total_jobs];
    for (expected_id, (line_no, row)) in section_rows(&mut lines, total_jobs)?.into_iter().enumerate() {
        let v = ints(row, line_no)?;
        if v.len() != 3 + num_resources {
            return Err(err(line_no, format!("expected {} fields, found {}", 3 + num_resources, v.len())));
        }
        if v[0] as usize != expected_id + 1 {
            return Err(err(line_no, format!("expected job {}, found {}", expected_id + 1, v[0])));
        }
        if v[2] < 0 || v[3..].iter().any(|&q| q < 0) {
            return Err(err(line_no, "negative duration or request"));
        }
        durations[expected_id] = v[2] as Time;
        requests[expected_id] = v[3..].to_vec();
    }

    lines.seek("RESOURCEAVAILABILITIES:")?;
    if lines.peek().is_some_and(|l| l.trim_start().starts_with('R')) {
        lines.next();
    }
    let cap_line = lines.line_no();
    let capacities = ints(lines.next().ok_or_else(|| err(cap_line, "missing resource availabilities"))?, cap_line)?;
    if capacities.len() != num_resources {
        return Err(err(cap_line, format!("expected {num_resources} capacities, found {}", capacities.len())));
    }

    // Drop the dummy source and sink and renumber.
    let is_dummy = |j: usize| durations[j] == 0 && requests[j].iter().all(|&q| q == 0);
    let has_preds = |j: usize| successors.iter().any(|s| s.contains(&j));
    let first_dummy = is_dummy(0) && !has_preds(0);
    let last = total_jobs - 1;
    let last_dummy = is_dummy(last) && successors[last].is_empty();
    let keep: Vec<usize> = (0..total_jobs)
        .filter(|&j| !(j == 0 && first_dummy) && !(j == last && last_dummy))
        .collect();
    let mut remap = vec![usize::MAX; total_jobs];
    for (new, &old) in keep.iter().enumerate() {
        remap[old] = new;
    }
    Ok(RawNetwork {
        durations: keep.iter().map(|&j| durations[j]).collect(),
        requests: keep.iter().map(|&j| requests[j].clone()).collect(),
        successors: keep
            .iter()
            .map(|&j| successors[j].iter().filter(|&&s| remap[s] != usize::MAX).map(|&s| remap[s]).collect())
            .collect(),
        capacities,
    })
}

/// Writes `net` in PSPLIB single-mode layout, adding the dummy source and sink.
pub fn write_psplib(net: &RawNetwork, basedata: &str, seed: u64) -> String {
    let n = net.num_jobs();
    let m = net.num_resources();
    let total = n + 2;
    let has_pred: Vec<bool> = {
        let mut v = vec![false; n];
        for (_, j) in net.edges() {
            v[j] = true;
        }
        v
    };
    let horizon: Time = net.durations.iter().sum();
    let stars = "*".repeat(72);
    let mut out = String::new();
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "file with basedata            : {basedata}");
    let _ = writeln!(out, "initial value random generator: {seed}");
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "projects                      :  1");
    let _ = writeln!(out, "jobs (incl. supersource/sink ):  {total}");
    let _ = writeln!(out, "horizon                       :  {horizon}");
    let _ = writeln!(out, "RESOURCES");
    let _ = writeln!(out, "  - renewable                 :  {m}   R");
    let _ = writeln!(out, "  - nonrenewable              :  0   N");
    let _ = writeln!(out, "  - doubly constrained        :  0   D");
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "PROJECT INFORMATION:");
    let _ = writeln!(out, "pronr.  #jobs rel.date duedate tardcost  MPM-Time");
    let _ = writeln!(out, "    1     {n:2}      0       0        0        0");
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "PRECEDENCE RELATIONS:");
    let _ = writeln!(out, "jobnr.    #modes  #successors   successors");
    let write_prec = |out: &mut String, id: usize, succ: &[usize]| {
        let _ = write!(out, "{id:4}        1       {:4}       ", succ.len());
        for s in succ {
            let _ = write!(out, "{s:4}");
        }
        out.push('\n');
    };
    let starts: Vec<usize> = (0..n).filter(|&j| !has_pred[j]).map(|j| j + 2).collect();
    write_prec(&mut out, 1, &starts);
    for j in 0..n {
        let succ: Vec<usize> = if net.successors[j].is_empty() {
            vec![total]
        } else {
            net.successors[j].iter().map(|&s| s + 2).collect()
        };
        write_prec(&mut out, j + 2, &succ);
    }
    write_prec(&mut out, total, &[]);
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "REQUESTS/DURATIONS:");
    let _ = write!(out, "jobnr. mode duration");
    for k in 1..=m {
        let _ = write!(out, "  R{k:2}");
    }
    out.push('\n');
    let _ = writeln!(out, "{}", "-".repeat(72));
    let write_req = |out: &mut String, id: usize, d: Time, q: &[Capacity]| {
        let _ = write!(out, "{id:3}      1     {d:2}    ");
        for v in q {
            let _ = write!(out, "{v:5}");
        }
        out.push('\n');
    };
    write_req(&mut out, 1, 0, &vec![0; m]);
    for j in 0..n {
        write_req(&mut out, j + 2, net.durations[j], &net.requests[j]);
    }
    write_req(&mut out, total, 0, &vec![0; m]);
    let _ = writeln!(out, "{stars}");
    let _ = writeln!(out, "RESOURCEAVAILABILITIES:");
    for k in 1..=m {
        let _ = write!(out, "  R{k:2}");
    }
    out.push('\n');
    for c in &net.capacities {
        let _ = write!(out, "{c:5}");
    }
    out.push('\n');
    let _ = writeln!(out, "{stars}");
    out
}

/// Shape parameters for [`synthesize`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    pub jobs: usize,
    pub resources: usize,
    /// Target number of arcs per non-dummy job.
    pub complexity: f64,
    /// Probability that a job requests a given resource.
    pub resource_factor: f64,
    /// Position of the capacity between the largest single request (0) and
    /// the peak demand of the earliest-start schedule (1).
    pub resource_strength: f64,
    pub max_duration: Time,
    pub max_request: Capacity,
    /// Bound on successors and predecessors per job.
    pub max_degree: usize,
}

impl NetworkParams {
    /// 30 jobs, 4 resources, the j30 parameter ranges.
    pub fn j30(complexity: f64) -> Self {
        NetworkParams {
            jobs: 30,
            resources: 4,
            complexity,
            resource_factor: 0.5,
            resource_strength: 0.5,
            max_duration: 10,
            max_request: 10,
            max_degree: 3,
        }
    }
}

/// Generates a random acyclic network in the PSPLIB style. Deterministic in `seed`.
pub fn synthesize(params: &NetworkParams, seed: u64) -> RawNetwork {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.jobs;
    let m = params.resources;
    let durations: Vec<Time> = (0..n).map(|_| rng.random_range(1..=params.max_duration)).collect();

    let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pred_count = vec![0usize; n];
    // reach[i][j]: j reachable from i.
    let mut reach = vec![vec![false; n]; n];
    let add_arc = |i: usize, j: usize, successors: &mut Vec<Vec<usize>>, pred_count: &mut Vec<usize>, reach: &mut Vec<Vec<bool>>| {
        successors[i].push(j);
        pred_count[j] += 1;
        let mut sources: Vec<usize> = (0..n).filter(|&a| a == i || reach[a][i]).collect();
        sources.sort_unstable();
        let targets: Vec<usize> = (0..n).filter(|&b| b == j || reach[j][b]).collect();
        for &a in &sources {
            for &b in &targets {
                reach[a][b] = true;
            }
        }
    };

    let num_starts = (n / 10).max(1);
    for j in num_starts..n {
        let candidates: Vec<usize> = (0..j).filter(|&i| successors[i].len() < params.max_degree).collect();
        if let Some(&i) = candidates.choose(&mut rng) {
            add_arc(i, j, &mut successors, &mut pred_count, &mut reach);
        }
    }
    let target_arcs = (params.complexity * n as f64).round() as usize;
    let mut attempts = 0;
    while successors.iter().map(Vec::len).sum::<usize>() < target_arcs && attempts < 50 * n {
        attempts += 1;
        let i = rng.random_range(0..n - 1);
        let j = rng.random_range(i + 1..n);
        if successors[i].len() >= params.max_degree || pred_count[j] >= params.max_degree || reach[i][j] {
            continue;
        }
        add_arc(i, j, &mut successors, &mut pred_count, &mut reach);
    }
    for s in &mut successors {
        s.sort_unstable();
    }

    let mut requests = vec![vec![0; m]; n];
    for row in &mut requests {
        for q in row.iter_mut() {
            if rng.random_bool(params.resource_factor) {
                *q = rng.random_range(1..=params.max_request);
            }
        }
        if row.iter().all(|&q| q == 0) {
            let k = rng.random_range(0..m);
            row[k] = rng.random_range(1..=params.max_request);
        }
    }

    // Earliest-start schedule for the peak demand.
    let mut est = vec![0; n];
    for i in 0..n {
        for &j in &successors[i] {
            est[j] = est[j].max(est[i] + durations[i]);
        }
    }
    let span = (0..n).map(|j| est[j] + durations[j]).max().unwrap_or(0);
    let capacities = (0..m)
        .map(|k| {
            let kmin = requests.iter().map(|r| r[k]).max().unwrap_or(0);
            let mut load = vec![0; span];
            for j in 0..n {
                for slot in &mut load[est[j]..est[j] + durations[j]] {
                    *slot += requests[j][k];
                }
            }
            let kmax = load.into_iter().max().unwrap_or(0);
            kmin + (params.resource_strength * (kmax - kmin) as f64).round() as Capacity
        })
        .collect();

    RawNetwork { durations, requests, successors, capacities }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY_SM: &str = "\
************************************************************************
file with basedata            : tiny.bas
initial value random generator: 1
************************************************************************
projects                      :  1
jobs (incl. supersource/sink ):  5
horizon                       :  6
RESOURCES
  - renewable                 :  1   R
  - nonrenewable              :  0   N
  - doubly constrained        :  0   D
************************************************************************
PRECEDENCE RELATIONS:
jobnr.    #modes  #successors   successors
   1        1          2           2   3
   2        1          1           4
   3        1          1           4
   4        1          1           5
   5        1          0
************************************************************************
REQUESTS/DURATIONS:
jobnr. mode duration  R 1
------------------------------------------------------------------------
  1      1     0       0
  2      1     2       1
  3      1     3       2
  4      1     1       1
  5      1     0       0
************************************************************************
RESOURCEAVAILABILITIES:
  R 1
    2
************************************************************************
";

    #[test]
    fn parses_hand_written_fixture() {
        let net = parse_psplib(TINY_SM).unwrap();
        assert_eq!(
            net,
            RawNetwork {
                durations: vec![2, 3, 1],
                requests: vec![vec![1], vec![2], vec![1]],
                successors: vec![vec![2], vec![2], vec![]],
                capacities: vec![2],
            }
        );
    }

    #[test]
    fn truncated_jobs_section_reports_truncation_line() {
        let cut: String = TINY_SM.lines().take(17).map(|l| format!("{l}\n")).collect();
        let e = parse_psplib(&cut).unwrap_err();
        assert_eq!(e.line, 18, "{e}");
        assert!(e.message.contains("truncated"));
    }

    #[test]
    fn job_count_mismatch_is_reported() {
        let text = TINY_SM.replace("jobs (incl. supersource/sink ):  5", "jobs (incl. supersource/sink ):  6");
        let e = parse_psplib(&text).unwrap_err();
        assert!(e.message.contains("mismatch"), "{e}");
        assert_eq!(e.line, 20);
    }

    #[test]
    fn non_integer_field_names_line() {
        let text = TINY_SM.replace("  3      1     3       2", "  3      1     x       2");
        let e = parse_psplib(&text).unwrap_err();
        assert_eq!(e.line, 26);
        assert!(e.message.contains("`x`"));
    }

    #[test]
    fn multi_mode_is_rejected() {
        let text = TINY_SM.replace("   2        1          1           4", "   2        3          1           4");
        assert!(parse_psplib(&text).unwrap_err().message.contains("single-mode"));
    }

    #[test]
    fn synthesized_network_round_trips_through_writer() {
        let net = synthesize(&NetworkParams::j30(1.8), 7);
        assert_eq!(net.num_jobs(), 30);
        let text = write_psplib(&net, "synthetic.bas", 7);
        assert_eq!(parse_psplib(&text).unwrap(), net);
        assert!(text.contains("jobs (incl. supersource/sink ):  32"));
    }

    #[test]
    fn synthesized_network_is_deterministic_and_acyclic() {
        let p = NetworkParams::j30(2.1);
        let a = synthesize(&p, 3);
        assert_eq!(a, synthesize(&p, 3));
        for (i, j) in a.edges() {
            assert!(i < j);
        }
        for (j, row) in a.requests.iter().enumerate() {
            for (k, &q) in row.iter().enumerate() {
                assert!(q <= a.capacities[k], "job {j} exceeds capacity of resource {k}");
            }
        }
    }
}
