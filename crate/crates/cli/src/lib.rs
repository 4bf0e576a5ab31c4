//! Command-line driver: solve instances with a chosen engine, cross-check
//! engines, report structural statistics and generate random instances.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use dafsa_be::generate::{banded_instance, micro_instance, BandedSpec, MicroSpec};
use dafsa_be::io::{read_instance, write_uai, write_wcsp, InstanceStats, ResultRecord, Status};
use dafsa_be::model::{
    bucket_elimination, min_fill_ordering, EliminationOrder, GraphicalModel, OrderingSource,
    SolveError, SolveOptions, SolverResult, Task,
};
use dafsa_be::oracle::{brute_force, tabular_be, OracleBudget};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "dafsa-be",
    version,
    about = "Exact MAP and WCSP solving by bucket elimination over automaton-compressed factors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve instances and print one record per instance.
    Solve(SolveArgs),
    /// Report redundancy, induced width and factor shape per instance.
    Stats(StatsArgs),
    /// Write seeded random instances to a directory.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Engine {
    Dafsa,
    Tabular,
    Brute,
    CheckAll,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    JsonLines,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderingKind {
    MinFill,
    WeightedMinFill,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TaskArg {
    Map,
    Wcsp,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Instance files (.uai or .wcsp).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Solve as this task instead of the one implied by the file format.
    #[arg(long, value_enum)]
    task: Option<TaskArg>,
    /// Values closer than this are treated as equal.
    #[arg(long, env = "DAFSA_BE_EPSILON", default_value_t = dafsa_be::factor::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value_t = OrderingKind::MinFill)]
    ordering: OrderingKind,
    /// Whitespace-separated variable ids, used with `--ordering file`.
    #[arg(long)]
    ordering_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Engine::Dafsa)]
    engine: Engine,
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    format: OutputFormat,
    /// Per-instance time limit in seconds.
    #[arg(long, default_value_t = 7200.0)]
    time_limit: f64,
    /// Keep infinite-cost assignments in the automaton factors.
    #[arg(long)]
    no_prune: bool,
    /// Include solve times in json-lines records.
    #[arg(long)]
    timings: bool,
    /// Worker threads; instances are solved in parallel.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 1_000_000)]
    max_assignments: u128,
    #[arg(long, default_value_t = 10_000_000)]
    max_table_cells: u128,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StatsFormat {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, value_enum, default_value_t = StatsFormat::Csv)]
    format: StatsFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GeneratorKind {
    Micro,
    Banded,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    kind: GeneratorKind,
    #[arg(long, value_enum, default_value_t = TaskArg::Wcsp)]
    task: TaskArg,
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add hard constraints (WCSP micro instances).
    #[arg(long)]
    hard: bool,
    #[arg(long, default_value_t = 30)]
    variables: usize,
    #[arg(long, default_value_t = 16)]
    window: usize,
    #[arg(long, default_value_t = 8)]
    arity: usize,
    #[arg(long, default_value_t = 2)]
    stride: usize,
    #[arg(long, default_value_t = 2)]
    per_window: usize,
    #[arg(long)]
    out: PathBuf,
}

impl From<TaskArg> for Task {
    fn from(t: TaskArg) -> Task {
        match t {
            TaskArg::Map => Task::Map,
            TaskArg::Wcsp => Task::Wcsp,
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(&a, out, err),
        Command::Stats(a) => stats(&a, out, err),
        Command::Generate(a) => generate(&a, out),
    };
    result.unwrap_or_else(|e| {
        let _ = writeln!(err, "error: {e}");
        e.code()
    })
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) | CliError::Csv(_) => EXIT_INTERNAL,
        }
    }
}

fn load(
    path: &Path,
    common: &CommonArgs,
    user_order: Option<&[usize]>,
) -> Result<(GraphicalModel, EliminationOrder), String> {
    let mut model = read_instance(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(t) = common.task {
        model = model.with_task(t.into());
    }
    let order = match (common.ordering, user_order) {
        (OrderingKind::MinFill, _) => min_fill_ordering(&model, false),
        (OrderingKind::WeightedMinFill, _) => min_fill_ordering(&model, true),
        (OrderingKind::File, Some(ids)) => {
            EliminationOrder::new(ids.to_vec(), OrderingSource::User)
                .ok()
                .filter(|d| d.len() == model.variable_count())
                .ok_or_else(|| {
                    format!(
                        "{}: ordering file is not a permutation of the {} variables",
                        path.display(),
                        model.variable_count()
                    )
                })?
        }
        (OrderingKind::File, None) => unreachable!("checked before loading"),
    };
    Ok((model, order))
}

fn read_ordering(common: &CommonArgs) -> Result<Option<Vec<usize>>, CliError> {
    match (common.ordering, &common.ordering_file) {
        (OrderingKind::File, None) => Err(CliError::Usage(
            "--ordering file needs --ordering-file".into(),
        )),
        (OrderingKind::File, Some(p)) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            text.split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map(Some)
                .map_err(|_| {
                    CliError::Usage(format!("{}: ordering must list variable ids", p.display()))
                })
        }
        _ => Ok(None),
    }
}

fn check_common(common: &CommonArgs) -> Result<(), CliError> {
    if !(common.epsilon > 0.0 && common.epsilon.is_finite()) {
        return Err(CliError::Usage(format!(
            "epsilon must be positive, got {}",
            common.epsilon
        )));
    }
    Ok(())
}

/// Per-instance outcome, most severe first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Outcome {
    Internal,
    Disagreement,
    ParseError,
    Ok,
}

impl Outcome {
    fn exit_code(self) -> i32 {
        match self {
            Outcome::Internal => EXIT_INTERNAL,
            Outcome::Disagreement => EXIT_DISAGREEMENT,
            Outcome::ParseError => EXIT_USAGE,
            Outcome::Ok => EXIT_OK,
        }
    }
}

struct Finished {
    text: String,
    diagnostic: Option<String>,
    outcome: Outcome,
}

fn solve(args: &SolveArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    check_common(&args.common)?;
    if !(args.time_limit > 0.0 && args.time_limit.is_finite()) {
        return Err(CliError::Usage("time limit must be positive".into()));
    }
    let user_order = read_ordering(&args.common)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build().map_err(std::io::Error::other)?;
    let finished: Vec<Finished> = pool.install(|| {
        args.common
            .inputs
            .par_iter()
            .map(|p| solve_one(p, args, user_order.as_deref()))
            .collect()
    });
    let mut worst = Outcome::Ok;
    for f in finished {
        out.write_all(f.text.as_bytes())?;
        if let Some(d) = f.diagnostic {
            writeln!(err, "{d}")?;
        }
        worst = worst.min(f.outcome);
    }
    out.flush()?;
    Ok(worst.exit_code())
}

fn engine_name(e: Engine) -> &'static str {
    match e {
        Engine::Dafsa => "dafsa",
        Engine::Tabular => "tabular",
        Engine::Brute => "brute",
        Engine::CheckAll => "check-all",
    }
}

fn run_engine(
    engine: Engine,
    model: &GraphicalModel,
    order: &EliminationOrder,
    opts: &SolveOptions,
    budget: &OracleBudget,
) -> Result<SolverResult, SolveError> {
    match engine {
        Engine::Tabular => tabular_be(model, order, budget, opts.deadline),
        Engine::Brute => brute_force(model, budget, opts.deadline),
        Engine::Dafsa | Engine::CheckAll => bucket_elimination(model, order, opts),
    }
}

fn render(record: &ResultRecord, format: OutputFormat) -> String {
    match format {
        OutputFormat::Human => record.to_human(),
        OutputFormat::JsonLines => record.to_json_line() + "\n",
    }
}

fn solve_one(path: &Path, args: &SolveArgs, user_order: Option<&[usize]>) -> Finished {
    let file = path.display().to_string();
    let (model, order) = match load(path, &args.common, user_order) {
        Ok(x) => x,
        Err(message) => {
            return Finished {
                text: String::new(),
                diagnostic: Some(format!("error: {message}")),
                outcome: Outcome::ParseError,
            }
        }
    };
    let budget = OracleBudget {
        max_assignments: args.max_assignments,
        max_table_cells: args.max_table_cells,
    };
    let limit = Duration::from_secs_f64(args.time_limit);
    let opts = |start: Instant| SolveOptions {
        epsilon: args.common.epsilon,
        prune_infinity: !args.no_prune,
        deadline: Some(start + limit),
    };
    let record = ResultRecord::new(
        &file,
        engine_name(args.engine),
        &model,
        &order,
        args.common.epsilon,
    );
    let (record, outcome) =
        match run_engine(args.engine, &model, &order, &opts(Instant::now()), &budget) {
            Ok(r) => {
                let record =
                    record.with_result(&r, args.timings || args.format == OutputFormat::Human);
                if args.engine == Engine::CheckAll {
                    cross_check(record, &r, &model, &order, &opts, &budget)
                } else {
                    (record, Outcome::Ok)
                }
            }
            Err(e) => failure(record, e),
        };
    let diagnostic = match outcome {
        Outcome::Internal | Outcome::Disagreement => Some(format!(
            "{file}: {}",
            record
                .message
                .clone()
                .unwrap_or_else(|| record.status.as_str().to_string())
        )),
        _ => None,
    };
    Finished {
        text: render(&record, args.format),
        diagnostic,
        outcome,
    }
}

fn failure(record: ResultRecord, e: SolveError) -> (ResultRecord, Outcome) {
    match e {
        SolveError::Timeout => (record.with_status(Status::Timeout, None), Outcome::Ok),
        SolveError::OverBudget { .. } => (
            record.with_status(Status::OverBudget, Some(e.to_string())),
            Outcome::Ok,
        ),
        other => (
            record.with_status(Status::Error, Some(other.to_string())),
            Outcome::Internal,
        ),
    }
}

/// Runs the reference engines that fit their budgets and compares them with
/// the automaton result.
fn cross_check(
    mut record: ResultRecord,
    primary: &SolverResult,
    model: &GraphicalModel,
    order: &EliminationOrder,
    opts: &dyn Fn(Instant) -> SolveOptions,
    budget: &OracleBudget,
) -> (ResultRecord, Outcome) {
    let task = model.task();
    let mut checks = BTreeMap::new();
    let mut agree = true;
    let certificate = match &primary.assignment {
        Some(x) => task.optima_agree(model.evaluate(x), primary.optimum),
        None => true,
    };
    checks.insert(
        "certificate".to_string(),
        if certificate { "ok" } else { "failed" }.to_string(),
    );
    agree &= certificate;
    for engine in [Engine::Tabular, Engine::Brute] {
        let verdict = match run_engine(engine, model, order, &opts(Instant::now()), budget) {
            Ok(r) => {
                let same = r.is_feasible() == primary.is_feasible()
                    && task.optima_agree(r.optimum, primary.optimum);
                agree &= same;
                if same {
                    "agree".to_string()
                } else {
                    format!("disagree ({})", r.optimum)
                }
            }
            Err(SolveError::Timeout) => "timeout".to_string(),
            Err(SolveError::OverBudget { .. }) => "over-budget".to_string(),
            Err(e) => {
                agree = false;
                format!("error ({e})")
            }
        };
        checks.insert(engine_name(engine).to_string(), verdict);
    }
    record.checks = Some(checks);
    if agree {
        (record, Outcome::Ok)
    } else {
        let record = record.with_status(Status::Disagreement, Some("engines disagree".into()));
        (record, Outcome::Disagreement)
    }
}

#[derive(Serialize)]
struct Aggregate {
    instances: usize,
    mean_redundancy: Option<f64>,
}

#[derive(Serialize)]
struct StatsReport {
    instances: Vec<InstanceStats>,
    aggregate: Aggregate,
}

fn stats(args: &StatsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    check_common(&args.common)?;
    let user_order = read_ordering(&args.common)?;
    let mut rows = Vec::new();
    let mut code = EXIT_OK;
    for p in &args.common.inputs {
        match load(p, &args.common, user_order.as_deref()) {
            Ok((m, d)) => rows.push(InstanceStats::new(
                &p.display().to_string(),
                &m,
                &d,
                args.common.epsilon,
            )),
            Err(message) => {
                writeln!(err, "error: {message}")?;
                code = EXIT_USAGE;
            }
        }
    }
    let aggregate = Aggregate {
        instances: rows.len(),
        mean_redundancy: InstanceStats::aggregate_redundancy(&rows),
    };
    match args.format {
        StatsFormat::Json => {
            let report = StatsReport {
                instances: rows,
                aggregate,
            };
            serde_json::to_writer_pretty(&mut *out, &report).map_err(std::io::Error::from)?;
            writeln!(out)?;
        }
        StatsFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record([
                "file",
                "task",
                "variables",
                "factors",
                "max_arity",
                "mean_arity",
                "max_domain",
                "ordering",
                "induced_width",
                "mean_redundancy",
                "min_redundancy",
            ])?;
            let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
            for s in &rows {
                let min = s.redundancy.iter().copied().reduce(f64::min);
                w.write_record([
                    s.file.clone(),
                    s.task.to_string(),
                    s.variables.to_string(),
                    s.factors.to_string(),
                    s.max_arity.to_string(),
                    s.mean_arity.to_string(),
                    s.max_domain.to_string(),
                    s.ordering.to_string(),
                    s.induced_width.to_string(),
                    opt(s.mean_redundancy),
                    opt(min),
                ])?;
            }
            let mut last = vec![String::new(); 11];
            last[0] = "(aggregate)".into();
            last[9] = opt(aggregate.mean_redundancy);
            w.write_record(&last)?;
            w.flush()?;
        }
    }
    Ok(code)
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    std::fs::create_dir_all(&args.out)?;
    let task: Task = args.task.into();
    for i in 0..args.count {
        let seed = args.seed + i;
        let (model, stem) = match args.kind {
            GeneratorKind::Micro => (
                micro_instance(seed, &MicroSpec::new(task, args.hard)),
                format!("micro-{}-{seed:04}", task.name()),
            ),
            GeneratorKind::Banded => {
                let spec = BandedSpec {
                    task,
                    variables: args.variables,
                    window: args.window,
                    arity: args.arity,
                    stride: args.stride.max(1),
                    factors_per_window: args.per_window,
                };
                (
                    banded_instance(seed, &spec),
                    format!("banded-{}-{seed:04}", task.name()),
                )
            }
        };
        let (text, ext) = match task {
            Task::Map => (write_uai(&model), "uai"),
            Task::Wcsp => (write_wcsp(&model, &stem), "wcsp"),
        };
        let path = args.out.join(format!("{stem}.{ext}"));
        std::fs::write(&path, text)?;
        writeln!(out, "{}", path.display())?;
    }
    Ok(EXIT_OK)
}
