//! Benchmark instances from PSPLIB-style networks: in-forest reduction, due
//! dates, shift calendars and duration/consumption scaling.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Capacity, Job, ModelError, ProblemInstance, Resource, Time, CYCLE};
use crate::par::{self, Parallelism};
use crate::psplib::{synthesize, NetworkParams, RawNetwork};
use crate::solver::{solve_heuristic, SolveError, SolveLimits};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenerationError {
    #[error("network is cyclic")]
    Cyclic,
    #[error("no feasible schedule found even with unit durations and consumptions")]
    Unschedulable,
    #[error("due date factor must be positive, got {0}")]
    Alpha(f64),
    #[error("expected {expected} shift patterns, got {found}")]
    ShiftCount { expected: usize, found: usize },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Daily on-hours of a resource.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ShiftPattern {
    /// Hours 6 to 14.
    #[serde(rename = "8h")]
    Eight,
    /// Hours 6 to 22.
    #[serde(rename = "16h")]
    Sixteen,
    #[serde(rename = "24h")]
    Full,
}

impl ShiftPattern {
    pub fn is_on(self, hour: usize) -> bool {
        match self {
            ShiftPattern::Eight => (6..14).contains(&hour),
            ShiftPattern::Sixteen => (6..22).contains(&hour),
            ShiftPattern::Full => true,
        }
    }

    pub fn pattern(self, capacity: Capacity) -> [Capacity; CYCLE] {
        std::array::from_fn(|h| if self.is_on(h) { capacity } else { 0 })
    }
}

/// How shift patterns are assigned to the resources of an instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftMix {
    /// Every resource always on.
    #[serde(rename = "24h")]
    Full,
    /// Each resource draws 8h, 16h or 24h.
    Mixed,
}

impl ShiftMix {
    pub fn name(self) -> &'static str {
        match self {
            ShiftMix::Full => "24h",
            ShiftMix::Mixed => "mixed",
        }
    }

    pub fn assign(self, resources: usize, rng: &mut impl Rng) -> Vec<ShiftPattern> {
        const ALL: [ShiftPattern; 3] = [ShiftPattern::Eight, ShiftPattern::Sixteen, ShiftPattern::Full];
        (0..resources)
            .map(|_| match self {
                ShiftMix::Full => ShiftPattern::Full,
                ShiftMix::Mixed => ALL[rng.random_range(0..ALL.len())],
            })
            .collect()
    }
}

impl fmt::Display for ShiftMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShiftMix {
    type Err = GenerationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "24h" | "full" => Ok(ShiftMix::Full),
            "mixed" => Ok(ShiftMix::Mixed),
            _ => Err(GenerationError::Config(format!("unknown shift mix `{s}` (expected 24h or mixed)"))),
        }
    }
}

/// Longest duration-weighted path starting at each job (inclusive).
fn downstream(net: &RawNetwork) -> Result<Vec<Time>, GenerationError> {
    let n = net.num_jobs();
    let mut indegree = vec![0; n];
    for (_, j) in net.edges() {
        indegree[j] += 1;
    }
    let mut order: Vec<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut i = 0;
    while i < order.len() {
        for &s in &net.successors[order[i]] {
            indegree[s] -= 1;
            if indegree[s] == 0 {
                order.push(s);
            }
        }
        i += 1;
    }
    if order.len() < n {
        return Err(GenerationError::Cyclic);
    }
    let mut down = vec![0; n];
    for &j in order.iter().rev() {
        down[j] = net.durations[j] + net.successors[j].iter().map(|&s| down[s]).max().unwrap_or(0);
    }
    Ok(down)
}

/// Keeps, for every job with several successors, only the arc to the one with
/// the longest downstream path (lowest index on ties). Returns 0-based arcs.
pub fn to_inforest(net: &RawNetwork) -> Result<Vec<(usize, usize)>, GenerationError> {
    let down = downstream(net)?;
    Ok((0..net.num_jobs())
        .filter_map(|i| {
            let best = net.successors[i].iter().copied().max_by(|&a, &b| down[a].cmp(&down[b]).then(b.cmp(&a)))?;
            Some((i, best))
        })
        .collect())
}

/// Per-instance modification settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Modifications {
    /// Due date of a project is `round(alpha * critical path)`.
    pub alpha: f64,
    pub shifts: Vec<ShiftPattern>,
    /// Tardiness weight per project root, in root order; missing entries are 1.
    pub weights: Vec<u64>,
}

/// Length of the longest chain ending at each job, inclusive.
fn heads_inclusive(durations: &[Time], arcs: &[(usize, usize)]) -> Vec<Time> {
    let n = durations.len();
    let mut succ = vec![None; n];
    let mut indeg = vec![0; n];
    for &(i, j) in arcs {
        succ[i] = Some(j);
        indeg[j] += 1;
    }
    let mut order: Vec<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut i = 0;
    while i < order.len() {
        if let Some(s) = succ[order[i]] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                order.push(s);
            }
        }
        i += 1;
    }
    let mut head = vec![0; n];
    for &j in &order {
        head[j] += durations[j];
        if let Some(s) = succ[j] {
            head[s] = head[s].max(head[j]);
        }
    }
    head
}

fn build(
    net: &RawNetwork,
    arcs: &[(usize, usize)],
    durations: &[Time],
    requests: &[Vec<Capacity>],
    mods: &Modifications,
) -> Result<ProblemInstance, GenerationError> {
    let n = net.num_jobs();
    let mut is_root = vec![true; n];
    for &(i, _) in arcs {
        is_root[i] = false;
    }
    let cp = heads_inclusive(durations, arcs);
    let mut jobs = Vec::with_capacity(n);
    let mut root_index = 0;
    let mut max_due = 0;
    for j in 0..n {
        let mut job = Job::new(durations[j], requests[j].clone());
        if is_root[j] {
            let due = (mods.alpha * cp[j] as f64).round() as Time;
            max_due = max_due.max(due);
            job = job.with_due_date(due, mods.weights.get(root_index).copied().unwrap_or(1));
            root_index += 1;
        }
        jobs.push(job);
    }
    let total: Time = durations.iter().sum();
    let horizon = CYCLE * (total + max_due).div_ceil(CYCLE).max(1);
    let resources =
        net.capacities.iter().zip(&mods.shifts).map(|(&c, s)| Resource::periodic(s.pattern(c))).collect();
    Ok(ProblemInstance::new(jobs, arcs.to_vec(), resources, horizon)?)
}

/// Turns a network into an instance: in-forest reduction, due dates, shift
/// calendars and horizon. If the heuristic finds no schedule, durations are
/// halved (rounding up) until all are 1, then consumptions above 1 are
/// decremented, until it does.
pub fn apply_modifications(
    net: &RawNetwork,
    mods: &Modifications,
    limits: &SolveLimits,
) -> Result<ProblemInstance, GenerationError> {
    if !(mods.alpha > 0.0 && mods.alpha.is_finite()) {
        return Err(GenerationError::Alpha(mods.alpha));
    }
    if mods.shifts.len() != net.num_resources() {
        return Err(GenerationError::ShiftCount { expected: net.num_resources(), found: mods.shifts.len() });
    }
    let arcs = to_inforest(net)?;
    let mut durations = net.durations.clone();
    let mut requests = net.requests.clone();
    loop {
        // Demands above what any shift offers cannot be met by waiting.
        let instance = build(net, &arcs, &durations, &requests, mods);
        if let Ok(instance) = instance {
            match solve_heuristic(&instance, limits, None) {
                Ok(_) => return Ok(instance),
                Err(SolveError::Infeasible) => {}
                Err(e) => return Err(e.into()),
            }
        }
        if durations.iter().any(|&d| d > 1) {
            for d in &mut durations {
                *d = d.div_ceil(2);
            }
        } else if requests.iter().flatten().any(|&q| q > 1) {
            for q in requests.iter_mut().flatten() {
                if *q > 1 {
                    *q -= 1;
                }
            }
        } else {
            return Err(GenerationError::Unschedulable);
        }
    }
}

/// Seeded shift patterns and project weights in `1..=3` for `net`.
pub fn modifications_for(net: &RawNetwork, alpha: f64, mix: ShiftMix, seed: u64) -> Modifications {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EED_0000_0000_0000);
    let shifts = mix.assign(net.num_resources(), &mut rng);
    let roots = net.successors.iter().filter(|s| s.is_empty()).count();
    let weights = (0..roots).map(|_| rng.random_range(1..=3)).collect();
    Modifications { alpha, shifts, weights }
}

/// Network shape of a source family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub name: String,
    pub complexity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkConfig {
    pub seed: u64,
    pub families: Vec<Family>,
    pub alphas: Vec<f64>,
    pub shift_mixes: Vec<ShiftMix>,
    pub instances_per_group: usize,
    pub limits: SolveLimits,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            seed: 1,
            families: vec![
                Family { name: "dense".into(), complexity: 2.1 },
                Family { name: "sparse".into(), complexity: 1.5 },
            ],
            alphas: vec![0.8, 1.0],
            shift_mixes: vec![ShiftMix::Full, ShiftMix::Mixed],
            instances_per_group: 5,
            limits: SolveLimits::default().with_restarts(16),
        }
    }
}

impl BenchmarkConfig {
    /// Seed of the `index`-th source network of family `family`.
    pub fn network_seed(&self, family: usize, index: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add((family * 1000 + index) as u64)
    }

    /// The synthesized source networks, family by family.
    pub fn source_networks(&self) -> Vec<(String, RawNetwork)> {
        let mut out = Vec::new();
        for (f, family) in self.families.iter().enumerate() {
            for i in 0..self.instances_per_group {
                let net = synthesize(&NetworkParams::j30(family.complexity), self.network_seed(f, i));
                out.push((format!("{}-{}", family.name, i + 1), net));
            }
        }
        out
    }
}

fn alpha_tag(alpha: f64) -> String {
    format!("a{:02}", (alpha * 10.0).round() as i64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    /// E.g. `dense-a08-mixed-3`.
    pub name: String,
    /// E.g. `dense-a08-mixed`.
    pub group: String,
    pub source: String,
    pub instance: ProblemInstance,
}

/// Generates every group (family x alpha x shift mix) from synthesized sources.
pub fn generate_benchmark(config: &BenchmarkConfig, mode: Parallelism) -> Result<Vec<GeneratedInstance>, GenerationError> {
    generate_from_sources(config, &config.source_networks(), mode)
}

/// Like [`generate_benchmark`] but with given source networks, which must be
/// `instances_per_group` per family in family order.
pub fn generate_from_sources(
    config: &BenchmarkConfig,
    sources: &[(String, RawNetwork)],
    mode: Parallelism,
) -> Result<Vec<GeneratedInstance>, GenerationError> {
    let per = config.instances_per_group;
    if per == 0 || config.families.is_empty() || config.alphas.is_empty() || config.shift_mixes.is_empty() {
        return Err(GenerationError::Config("empty benchmark configuration".into()));
    }
    if sources.len() != config.families.len() * per {
        return Err(GenerationError::Config(format!(
            "need {} source networks, got {}",
            config.families.len() * per,
            sources.len()
        )));
    }
    let mut jobs = Vec::new();
    for (f, family) in config.families.iter().enumerate() {
        for &alpha in &config.alphas {
            for &mix in &config.shift_mixes {
                for i in 0..per {
                    jobs.push((f, family, alpha, mix, i));
                }
            }
        }
    }
    let results = par::map(mode, &jobs, |&(f, family, alpha, mix, i)| {
        let (source_name, net) = &sources[f * per + i];
        let group = format!("{}-{}-{}", family.name, alpha_tag(alpha), mix);
        let mods = modifications_for(net, alpha, mix, config.network_seed(f, i));
        let instance = apply_modifications(net, &mods, &config.limits)?;
        Ok(GeneratedInstance { name: format!("{group}-{}", i + 1), group, source: source_name.clone(), instance })
    });
    results.into_iter().collect()
}
