use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rcpsp_relax::format::{from_json, to_json, FormatError};
use rcpsp_relax::generate::{
    apply_modifications, generate_benchmark, generate_from_sources, modifications_for, BenchmarkConfig, Family,
    GenerationError, ShiftMix,
};
use rcpsp_relax::harness::{run_grid, write_outputs, AlgorithmChoice, EvaluateOptions, GridConfig, HarnessError};
use rcpsp_relax::iira::{run_iira, IiraParams, Kernel};
use rcpsp_relax::indicators::{score, Indicator};
use rcpsp_relax::model::{weighted_tardiness, JobId, ProblemInstance, Schedule, TardinessReport};
use rcpsp_relax::par::{self, Parallelism};
use rcpsp_relax::proposal::{default_target, RelaxError};
use rcpsp_relax::psplib::{parse_psplib, ParseError, RawNetwork};
use rcpsp_relax::solver::{solve_exact, solve_heuristic, ExactOutcome, SolveError, SolveLimits};
use rcpsp_relax::ssira::{run_ssira, IntervalKey, SsiraParams};
use rcpsp_relax_service::ServiceConfig;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{path}: {source}")]
    Psplib { path: String, source: ParseError },
    #[error(transparent)]
    Generation(#[from] GenerationError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Relax(#[from] RelaxError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.display().to_string(), source }
}

#[derive(Parser)]
#[command(name = "rcpsp-relax", version, about = "Bottleneck identification and capacity relaxation for project scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the benchmark instance groups.
    Generate(GenerateArgs),
    /// Convert a PSPLIB single-mode file into an extended-format instance.
    Convert(ConvertArgs),
    /// Solve an instance and print the schedule.
    Solve(SolveArgs),
    /// Per-resource indicator scores as CSV.
    Indicators(IndicatorArgs),
    /// Run a relaxation algorithm and print the final proposal.
    Relax(RelaxArgs),
    /// Evaluate parameter grids over a directory of instances.
    Evaluate(EvaluateArgs),
    /// Start the HTTP service.
    Serve(ServeArgs),
}

#[derive(Args, Clone)]
struct LimitArgs {
    /// Wall-clock cap per solve, in seconds.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Priority lists tried by the heuristic.
    #[arg(long, default_value_t = 64)]
    restarts: usize,
}

impl LimitArgs {
    fn limits(&self) -> Result<SolveLimits, CliError> {
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return Err(CliError::Usage("--time-limit must be positive".into()));
        }
        Ok(SolveLimits::default()
            .with_time_limit(Duration::from_secs_f64(self.time_limit))
            .with_seed(self.seed)
            .with_restarts(self.restarts.max(1)))
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Due date factors, one group per value.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 1.0])]
    alpha: Vec<f64>,
    /// Shift mixes, one group per value.
    #[arg(long, value_delimiter = ',', default_values = ["24h", "mixed"])]
    shifts: Vec<String>,
    #[arg(long, default_value_t = 5)]
    per_group: usize,
    /// Directory of .sm files to use instead of synthesized networks.
    #[arg(long)]
    sources: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    restarts: usize,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value = "24h")]
    shifts: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Exact search (small instances only).
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndicatorArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Schedule JSON as printed by `solve`; solved if omitted.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// One indicator, or all four if omitted.
    #[arg(long)]
    indicator: Option<String>,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Iira,
    Ssira,
}

#[derive(Args)]
struct RelaxArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Target project job id; the most tardy project if omitted.
    #[arg(long)]
    target: Option<u32>,
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Bottleneck indicator (iira).
    #[arg(long, default_value = "mrur")]
    indicator: String,
    /// Smoothing kernel, e.g. uniform1 or triangular2 (iira).
    #[arg(long, default_value = "uniform1")]
    kernel: String,
    /// Periods per block (iira).
    #[arg(long, default_value_t = 4)]
    granularity: usize,
    /// Blocks relaxed per iteration (iira).
    #[arg(long, default_value_t = 1)]
    periods: usize,
    /// Capacity added per period (iira).
    #[arg(long, default_value_t = 1)]
    delta: i64,
    /// Interval order: t or ds (ssira).
    #[arg(long, default_value = "t")]
    key: String,
    /// Intervals relaxed per iteration (ssira).
    #[arg(long, default_value_t = 2)]
    intervals: usize,
    #[arg(long, default_value_t = 1)]
    iterations: usize,
    /// Print every iteration's proposal instead of only the last.
    #[arg(long)]
    all_iterations: bool,
    #[command(flatten)]
    limits: LimitArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    instances_dir: PathBuf,
    #[arg(long, default_value = "both")]
    algorithm: String,
    /// Grid JSON file; the full grids if omitted.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Use the reduced grids (ignored with --grid).
    #[arg(long)]
    reduced: bool,
    #[arg(long)]
    out_dir: PathBuf,
    /// Worker threads; 1 runs sequentially, 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Target project per instance as name=job-id; repeatable.
    #[arg(long = "target", value_parser = parse_target)]
    targets: Vec<(String, u32)>,
    #[command(flatten)]
    limits: LimitArgs,
}

fn parse_target(s: &str) -> Result<(String, u32), String> {
    let (name, id) = s.split_once('=').ok_or("expected name=job-id")?;
    let id: u32 = id.parse().map_err(|_| format!("bad job id `{id}`"))?;
    Ok((name.to_string(), id))
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value = "data")]
    data_dir: PathBuf,
    #[command(flatten)]
    limits: LimitArgs,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(io_err(path))
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    from_json(&read(path)?).map_err(|source| CliError::Format { path: path.display().to_string(), source })
}

fn load_network(path: &Path) -> Result<RawNetwork, CliError> {
    parse_psplib(&read(path)?).map_err(|source| CliError::Psplib { path: path.display().to_string(), source })
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            fs::write(path, text).map_err(io_err(path))
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(io_err(Path::new("<stdout>"))),
    }
}

fn pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

fn parse_mixes(names: &[String]) -> Result<Vec<ShiftMix>, CliError> {
    Ok(names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?)
}

fn sorted_files(dir: &Path, extension: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case(extension)))
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let mut config = BenchmarkConfig {
        seed: args.seed,
        alphas: args.alpha.clone(),
        shift_mixes: parse_mixes(&args.shifts)?,
        instances_per_group: args.per_group,
        limits: SolveLimits::default().with_seed(args.seed).with_restarts(args.restarts.max(1)),
        ..BenchmarkConfig::default()
    };
    let generated = match &args.sources {
        None => generate_benchmark(&config, Parallelism::Rayon)?,
        Some(dir) => {
            let files = sorted_files(dir, "sm")?;
            let sources = files.iter().map(|f| Ok((stem(f), load_network(f)?))).collect::<Result<Vec<_>, CliError>>()?;
            config.families = vec![Family { name: "psplib".into(), complexity: 0.0 }];
            config.instances_per_group = sources.len();
            generate_from_sources(&config, &sources, Parallelism::Rayon)?
        }
    };
    fs::create_dir_all(&args.out_dir).map_err(io_err(&args.out_dir))?;
    for g in &generated {
        let path = args.out_dir.join(format!("{}.json", g.name));
        fs::write(&path, to_json(&g.instance)).map_err(io_err(&path))?;
    }
    eprintln!("wrote {} instances to {}", generated.len(), args.out_dir.display());
    Ok(())
}

fn convert(args: &ConvertArgs) -> Result<(), CliError> {
    let net = load_network(&args.input)?;
    let mix: ShiftMix = args.shifts.parse()?;
    let mods = modifications_for(&net, args.alpha, mix, args.seed);
    let limits = SolveLimits::default().with_seed(args.seed).with_restarts(16);
    let instance = apply_modifications(&net, &mods, &limits)?;
    emit(args.out.as_deref(), &to_json(&instance))
}

#[derive(Serialize)]
struct SolveOutput {
    schedule: Schedule,
    objective: u64,
    tardiness: TardinessReport,
    /// Set by the exact search only.
    #[serde(skip_serializing_if = "Option::is_none")]
    optimal: Option<bool>,
}

fn solve(args: &SolveArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let limits = args.limits.limits()?;
    let (schedule, objective, optimal) = if args.exact {
        match solve_exact(&instance, &limits)? {
            ExactOutcome::Optimal { schedule, objective } => (schedule, objective, Some(true)),
            ExactOutcome::LimitExceeded { best: Some((schedule, objective)) } => (schedule, objective, Some(false)),
            ExactOutcome::LimitExceeded { best: None } | ExactOutcome::Infeasible => {
                return Err(SolveError::Infeasible.into())
            }
        }
    } else {
        let s = solve_heuristic(&instance, &limits, None)?;
        (s.schedule, s.objective, None)
    };
    let out = SolveOutput { tardiness: weighted_tardiness(&instance, &schedule), schedule, objective, optimal };
    emit(args.out.as_deref(), &pretty(&out)?)
}

/// Reads a schedule file (either `solve` output or a bare `{"starts": [...]}`)
/// or solves the instance.
fn baseline(instance: &ProblemInstance, path: Option<&Path>, limits: &SolveLimits) -> Result<Schedule, CliError> {
    match path {
        Some(p) => {
            let value: serde_json::Value = serde_json::from_str(&read(p)?)?;
            let doc = value.get("schedule").cloned().unwrap_or(value);
            Ok(serde_json::from_value(doc)?)
        }
        None => Ok(solve_heuristic(instance, limits, None)?.schedule),
    }
}

fn indicators(args: &IndicatorArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let limits = args.limits.limits()?;
    let schedule = baseline(&instance, args.schedule.as_deref(), &limits)?;
    let chosen: Vec<Indicator> = match &args.indicator {
        Some(name) => vec![name.parse().map_err(|e| CliError::Usage(format!("{e}")))?],
        None => Indicator::ALL.to_vec(),
    };
    let mut text = String::from("resource,indicator,exact,value,undefined\n");
    for k in 0..instance.num_resources() {
        for &ind in &chosen {
            let s = score(ind, &instance, &schedule, k);
            text.push_str(&format!("{},{},{},{},{}\n", k + 1, ind, s.value, s.to_f64(), s.undefined));
        }
    }
    emit(args.out.as_deref(), &text)
}

fn relax(args: &RelaxArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.instance)?;
    let limits = args.limits.limits()?;
    let schedule = baseline(&instance, args.schedule.as_deref(), &limits)?;
    let target = match args.target {
        Some(0) => return Err(RelaxError::NotAProject(JobId(0)).into()),
        Some(id) => JobId(id).index(),
        None => default_target(&instance, &schedule).ok_or(RelaxError::NoTarget)?,
    };
    let run = match args.algorithm {
        AlgorithmArg::Iira => {
            let params = IiraParams {
                indicator: args.indicator.parse().map_err(|e| CliError::Usage(format!("{e}")))?,
                kernel: args.kernel.parse::<Kernel>()?,
                granularity: args.granularity,
                periods: args.periods,
                iterations: args.iterations,
                delta: args.delta,
            };
            run_iira(&instance, &schedule, &params, target, &limits)?
        }
        AlgorithmArg::Ssira => {
            let params =
                SsiraParams { key: args.key.parse::<IntervalKey>()?, intervals: args.intervals, iterations: args.iterations };
            run_ssira(&instance, &schedule, &params, target, &limits)?
        }
    };
    let text = if args.all_iterations { pretty(&run)? } else { pretty(&run.last)? };
    emit(args.out.as_deref(), &text)
}

fn evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    let grid = match &args.grid {
        Some(path) => GridConfig::load(path)?,
        None if args.reduced => GridConfig::reduced(),
        None => GridConfig::full(),
    };
    let files = sorted_files(&args.instances_dir, "json")?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("no .json instances in {}", args.instances_dir.display())));
    }
    let instances = files.iter().map(|f| Ok((stem(f), load_instance(f)?))).collect::<Result<Vec<_>, CliError>>()?;
    let mode = if args.jobs == 1 { Parallelism::Sequential } else { Parallelism::Rayon };
    let mut targets = BTreeMap::new();
    for (name, id) in &args.targets {
        if *id == 0 {
            return Err(RelaxError::NotAProject(JobId(0)).into());
        }
        targets.insert(name.clone(), JobId(*id).index());
    }
    let options = EvaluateOptions {
        algorithms: args.algorithm.parse::<AlgorithmChoice>()?,
        grid,
        limits: args.limits.limits()?.with_parallelism(mode),
        targets,
    };
    let evaluation = par::with_threads(args.jobs, || run_grid(&instances, &options));
    write_outputs(&args.out_dir, &evaluation)?;
    eprintln!("{} records written to {}", evaluation.records.len(), args.out_dir.display());
    Ok(())
}

fn serve(args: &ServeArgs) -> Result<(), CliError> {
    let addr: SocketAddr = format!("{}:{}", args.host, args.port)
        .parse()
        .map_err(|e| CliError::Usage(format!("bad address: {e}")))?;
    let config = ServiceConfig { data_dir: args.data_dir.clone(), limits: args.limits.limits()? };
    let runtime = tokio::runtime::Runtime::new().map_err(io_err(Path::new("<runtime>")))?;
    runtime.block_on(rcpsp_relax_service::serve(addr, config)).map_err(io_err(&args.data_dir))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Convert(a) => convert(a),
        Command::Solve(a) => solve(a),
        Command::Indicators(a) => indicators(a),
        Command::Relax(a) => relax(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
