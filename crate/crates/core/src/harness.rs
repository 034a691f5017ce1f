//! Batch evaluation of both relaxation algorithms over parameter grids, with
//! per-instance best-combination summaries and CSV/text outputs.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::iira::{run_iira, IiraParams, Kernel};
use crate::indicators::Indicator;
use crate::model::{Capacity, ProblemInstance, Schedule};
use crate::par;
use crate::proposal::{default_target, RelaxError, RelaxationRun};
use crate::solver::{solve_heuristic, SolveLimits};
use crate::ssira::{run_ssira, IntervalKey, SsiraParams};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Iira,
    Ssira,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Iira => "iira",
            Algorithm::Ssira => "ssira",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which algorithms an evaluation covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Iira,
    Ssira,
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> Vec<Algorithm> {
        match self {
            AlgorithmChoice::Iira => vec![Algorithm::Iira],
            AlgorithmChoice::Ssira => vec![Algorithm::Ssira],
            AlgorithmChoice::Both => vec![Algorithm::Iira, Algorithm::Ssira],
        }
    }
}

impl FromStr for AlgorithmChoice {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "iira" => Ok(AlgorithmChoice::Iira),
            "ssira" => Ok(AlgorithmChoice::Ssira),
            "both" => Ok(AlgorithmChoice::Both),
            _ => Err(HarnessError::Grid(format!("unknown algorithm `{s}` (expected iira, ssira or both)"))),
        }
    }
}

/// One parameter combination of either algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "algorithm", content = "params", rename_all = "lowercase")]
pub enum Combo {
    Iira(IiraParams),
    Ssira(SsiraParams),
}

impl Combo {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            Combo::Iira(_) => Algorithm::Iira,
            Combo::Ssira(_) => Algorithm::Ssira,
        }
    }

    pub fn run(
        &self,
        instance: &ProblemInstance,
        baseline: &Schedule,
        target: usize,
        limits: &SolveLimits,
    ) -> Result<RelaxationRun, RelaxError> {
        match self {
            Combo::Iira(p) => run_iira(instance, baseline, p, target, limits),
            Combo::Ssira(p) => run_ssira(instance, baseline, p, target, limits),
        }
    }
}

/// Compact label, e.g. `mrur/uniform1/g4/p1/i3/d2` or `t/it2/i3`.
impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Combo::Iira(p) => write!(
                f,
                "{}/{}/g{}/p{}/i{}/d{}",
                p.indicator, p.kernel, p.granularity, p.periods, p.iterations, p.delta
            ),
            Combo::Ssira(p) => write!(f, "{}/it{}/i{}", p.key, p.intervals, p.iterations),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IiraGrid {
    pub indicators: Vec<Indicator>,
    pub kernels: Vec<Kernel>,
    pub granularities: Vec<usize>,
    pub periods: Vec<usize>,
    pub iterations: Vec<usize>,
    pub deltas: Vec<Capacity>,
}

impl IiraGrid {
    /// 2 x 6 x 3 x 2 x 2 x 2 = 288 combinations.
    pub fn full() -> Self {
        IiraGrid {
            indicators: vec![Indicator::Mrur, Indicator::Auau],
            kernels: [1, 2, 3].into_iter().flat_map(|w| [Kernel::uniform(w), Kernel::triangular(w)]).collect(),
            granularities: vec![1, 4, 8],
            periods: vec![1, 3],
            iterations: vec![1, 3],
            deltas: vec![1, 2],
        }
    }

    /// 2 x 2 x 3 x 2 = 24 combinations.
    pub fn reduced() -> Self {
        IiraGrid {
            indicators: vec![Indicator::Mrur, Indicator::Auau],
            kernels: vec![Kernel::uniform(1), Kernel::triangular(2)],
            granularities: vec![1, 4, 8],
            periods: vec![3],
            iterations: vec![3],
            deltas: vec![1, 2],
        }
    }

    pub fn combos(&self) -> Vec<IiraParams> {
        let mut out = Vec::new();
        for &indicator in &self.indicators {
            for &kernel in &self.kernels {
                for &granularity in &self.granularities {
                    for &periods in &self.periods {
                        for &iterations in &self.iterations {
                            for &delta in &self.deltas {
                                out.push(IiraParams { indicator, kernel, granularity, periods, iterations, delta });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsiraGrid {
    pub keys: Vec<IntervalKey>,
    pub intervals: Vec<usize>,
    pub iterations: Vec<usize>,
}

impl SsiraGrid {
    /// 2 x 3 x 6 = 36 combinations.
    pub fn full() -> Self {
        SsiraGrid { keys: vec![IntervalKey::Start, IntervalKey::Shift], intervals: vec![1, 2, 4], iterations: (1..=6).collect() }
    }

    /// 2 x 3 x 2 = 12 combinations.
    pub fn reduced() -> Self {
        SsiraGrid { keys: vec![IntervalKey::Start, IntervalKey::Shift], intervals: vec![1, 2, 4], iterations: vec![1, 3] }
    }

    pub fn combos(&self) -> Vec<SsiraParams> {
        let mut out = Vec::new();
        for &key in &self.keys {
            for &intervals in &self.intervals {
                for &iterations in &self.iterations {
                    out.push(SsiraParams { key, intervals, iterations });
                }
            }
        }
        out
    }
}

/// Parameter grids of both algorithms; the file format of `--grid`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub iira: IiraGrid,
    pub ssira: SsiraGrid,
}

impl GridConfig {
    pub fn full() -> Self {
        GridConfig { iira: IiraGrid::full(), ssira: SsiraGrid::full() }
    }

    pub fn reduced() -> Self {
        GridConfig { iira: IiraGrid::reduced(), ssira: SsiraGrid::reduced() }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let grid: GridConfig = serde_json::from_str(&text)?;
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        for p in self.iira.combos() {
            p.validate().map_err(|e| HarnessError::Grid(e.to_string()))?;
        }
        for p in self.ssira.combos() {
            p.validate().map_err(|e| HarnessError::Grid(e.to_string()))?;
        }
        Ok(())
    }

    pub fn combos(&self, algorithm: Algorithm) -> Vec<Combo> {
        match algorithm {
            Algorithm::Iira => self.iira.combos().into_iter().map(Combo::Iira).collect(),
            Algorithm::Ssira => self.ssira.combos().into_iter().map(Combo::Ssira).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub instance: String,
    pub algorithm: Algorithm,
    pub combo: usize,
    pub params: String,
    /// 1-based job id of the target project; empty if none could be chosen.
    pub target: Option<u32>,
    pub delta_tardiness: i64,
    pub delta_s: u64,
    pub iterations: usize,
    pub additions: usize,
    pub migrations: usize,
    pub added_volume: i64,
    /// Empty on success.
    pub error: String,
}

impl EvaluationRecord {
    pub fn improving(&self) -> bool {
        self.error.is_empty() && self.delta_tardiness > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub instance: String,
    pub algorithm: Algorithm,
    pub combo: usize,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    /// Sorted by instance, algorithm and combination index.
    pub records: Vec<EvaluationRecord>,
    /// Same order as `records`. Not reproducible, hence kept apart.
    pub timings: Vec<Timing>,
    pub algorithms: Vec<Algorithm>,
    pub instances: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct EvaluateOptions {
    pub algorithms: AlgorithmChoice,
    pub grid: GridConfig,
    pub limits: SolveLimits,
    /// Target project per instance; the most tardy project otherwise.
    pub targets: BTreeMap<String, usize>,
}

struct Prepared {
    baseline: Result<Schedule, String>,
    target: Result<usize, String>,
}

/// Solves every instance once, then runs every combination of the selected
/// algorithms on every instance. Per-run failures are recorded, not fatal.
pub fn run_grid(instances: &[(String, ProblemInstance)], options: &EvaluateOptions) -> Evaluation {
    run_grid_observed(instances, options, |_, _, _, _| {})
}

/// Like [`run_grid`], also handing every successful run to `observe` together
/// with its instance and baseline schedule.
pub fn run_grid_observed<F>(instances: &[(String, ProblemInstance)], options: &EvaluateOptions, observe: F) -> Evaluation
where
    F: Fn(&ProblemInstance, &Schedule, &Combo, &RelaxationRun) + Sync,
{
    let mode = options.limits.parallelism;
    let prepared: Vec<Prepared> = par::map(mode, instances, |(name, instance)| {
        let baseline = solve_heuristic(instance, &options.limits, None).map(|s| s.schedule).map_err(|e| e.to_string());
        let target = match (&baseline, options.targets.get(name)) {
            (Err(e), _) => Err(e.clone()),
            (Ok(_), Some(&t)) => Ok(t),
            (Ok(s), None) => default_target(instance, s).ok_or_else(|| RelaxError::NoTarget.to_string()),
        };
        Prepared { baseline, target }
    });

    let algorithms = options.algorithms.algorithms();
    let mut tasks = Vec::new();
    for (i, _) in prepared.iter().enumerate() {
        for &algorithm in &algorithms {
            for (c, combo) in options.grid.combos(algorithm).into_iter().enumerate() {
                tasks.push((i, c, combo));
            }
        }
    }
    let results = par::map(mode, &tasks, |&(i, c, combo)| {
        let p = &prepared[i];
        let (name, instance) = &instances[i];
        let clock = Instant::now();
        let mut record = EvaluationRecord {
            instance: name.clone(),
            algorithm: combo.algorithm(),
            combo: c,
            params: combo.to_string(),
            target: p.target.as_ref().ok().map(|&t| t as u32 + 1),
            delta_tardiness: 0,
            delta_s: 0,
            iterations: 0,
            additions: 0,
            migrations: 0,
            added_volume: 0,
            error: String::new(),
        };
        let outcome = match (&p.baseline, &p.target) {
            (Ok(baseline), Ok(target)) => combo.run(instance, baseline, *target, &options.limits).map_err(|e| e.to_string()),
            (Err(e), _) | (_, Err(e)) => Err(e.clone()),
        };
        match outcome {
            Ok(run) => {
                if let Ok(baseline) = &p.baseline {
                    observe(instance, baseline, &combo, &run);
                }
                record.delta_tardiness = run.last.metrics.delta_tardiness;
                record.delta_s = run.last.metrics.delta_s;
                record.iterations = run.iterations.len();
                record.additions = run.last.changes.additions.len();
                record.migrations = run.last.changes.migrations.len();
                record.added_volume = run.last.changes.added_volume();
            }
            Err(e) => record.error = e,
        }
        let timing = Timing {
            instance: record.instance.clone(),
            algorithm: record.algorithm,
            combo: c,
            seconds: clock.elapsed().as_secs_f64(),
        };
        (record, timing)
    });
    let mut results = results;
    results.sort_by(|a, b| {
        (&a.0.instance, a.0.algorithm, a.0.combo).cmp(&(&b.0.instance, b.0.algorithm, b.0.combo))
    });
    let (records, timings) = results.into_iter().unzip();
    let mut names: Vec<String> = instances.iter().map(|(n, _)| n.clone()).collect();
    names.sort();
    Evaluation { records, timings, algorithms, instances: names }
}

/// Best record of one algorithm on one instance: largest tardiness
/// improvement, then smallest schedule difference, then lowest index.
pub fn best_records(records: &[EvaluationRecord]) -> BTreeMap<(String, Algorithm), &EvaluationRecord> {
    let mut best: BTreeMap<(String, Algorithm), &EvaluationRecord> = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_empty()) {
        let key = (r.instance.clone(), r.algorithm);
        let better = match best.get(&key) {
            None => true,
            Some(b) => (r.delta_tardiness, std::cmp::Reverse(r.delta_s)) > (b.delta_tardiness, std::cmp::Reverse(b.delta_s)),
        };
        if better {
            best.insert(key, r);
        }
    }
    best
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    /// Instances with a positive tardiness improvement.
    pub improving: usize,
    /// Improving instances the other algorithms do not improve.
    pub unique: usize,
    /// Improving instances where this algorithm's best is at least as good as
    /// every other's (improvement, then difference). Ties count for both.
    pub best: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub instances: usize,
    pub per_algorithm: BTreeMap<Algorithm, AlgorithmSummary>,
}

pub fn summarize(evaluation: &Evaluation) -> Summary {
    let best = best_records(&evaluation.records);
    let mut per_algorithm: BTreeMap<Algorithm, AlgorithmSummary> =
        evaluation.algorithms.iter().map(|&a| (a, AlgorithmSummary::default())).collect();
    let rank = |r: &EvaluationRecord| (r.delta_tardiness, std::cmp::Reverse(r.delta_s));
    for name in &evaluation.instances {
        let own = |a: Algorithm| best.get(&(name.clone(), a)).copied().filter(|r| r.improving());
        for &a in &evaluation.algorithms {
            let Some(mine) = own(a) else { continue };
            let others: Vec<Option<&EvaluationRecord>> =
                evaluation.algorithms.iter().filter(|&&b| b != a).map(|&b| own(b)).collect();
            let entry = per_algorithm.get_mut(&a).expect("algorithm listed");
            entry.improving += 1;
            if others.iter().all(Option::is_none) {
                entry.unique += 1;
            }
            if others.iter().flatten().all(|o| rank(mine) >= rank(o)) {
                entry.best += 1;
            }
        }
    }
    Summary { instances: evaluation.instances.len(), per_algorithm }
}

fn percent(count: usize, of: usize) -> String {
    if of == 0 {
        return "-".into();
    }
    format!("{:.1}%", count as f64 * 100.0 / of as f64)
}

pub fn format_summary(summary: &Summary) -> String {
    let mut out = String::new();
    let n = summary.instances;
    let _ = writeln!(out, "instances: {n}");
    let _ = write!(out, "{:<10}", "");
    for a in summary.per_algorithm.keys() {
        let _ = write!(out, "{:>16}", a.name().to_uppercase());
    }
    out.push('\n');
    let rows: [(&str, fn(&AlgorithmSummary) -> usize); 3] =
        [("Improving", |s| s.improving), ("Unique", |s| s.unique), ("Best", |s| s.best)];
    for (label, get) in rows {
        let _ = write!(out, "{label:<10}");
        for s in summary.per_algorithm.values() {
            let v = get(s);
            let _ = write!(out, "{:>16}", format!("{v} ({})", percent(v, n)));
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub instance: String,
    pub algorithm: Algorithm,
    pub params: String,
    pub delta_s: u64,
    pub delta_tardiness: i64,
}

/// Best combination per instance and algorithm.
pub fn plot_points(evaluation: &Evaluation) -> Vec<PlotPoint> {
    best_records(&evaluation.records)
        .into_values()
        .map(|r| PlotPoint {
            instance: r.instance.clone(),
            algorithm: r.algorithm,
            params: r.params.clone(),
            delta_s: r.delta_s,
            delta_tardiness: r.delta_tardiness,
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: &[&str]) -> Result<(), HarnessError> {
    let mut writer = csv::WriterBuilder::new().has_headers(!rows.is_empty()).from_writer(Vec::new());
    if rows.is_empty() {
        writer.write_record(header)?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    let bytes = writer.into_inner().map_err(|e| HarnessError::Io { path: path.display().to_string(), source: e.into_error() })?;
    fs::write(path, bytes).map_err(io_err(path))
}

pub const RECORD_COLUMNS: [&str; 12] = [
    "instance",
    "algorithm",
    "combo",
    "params",
    "target",
    "delta_tardiness",
    "delta_s",
    "iterations",
    "additions",
    "migrations",
    "added_volume",
    "error",
];

/// Writes `records.csv`, `summary.txt`, `plotdata.csv` and `timings.csv`.
pub fn write_outputs(dir: &Path, evaluation: &Evaluation) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_csv(&dir.join("records.csv"), &evaluation.records, &RECORD_COLUMNS)?;
    write_csv(&dir.join("plotdata.csv"), &plot_points(evaluation), &["instance", "algorithm", "params", "delta_s", "delta_tardiness"])?;
    write_csv(&dir.join("timings.csv"), &evaluation.timings, &["instance", "algorithm", "combo", "seconds"])?;
    let summary = dir.join("summary.txt");
    fs::write(&summary, format_summary(&summarize(evaluation))).map_err(io_err(&summary))
}
