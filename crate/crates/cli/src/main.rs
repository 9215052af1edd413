//! Command-line front end: solve, p2p, simulate, bench and gen.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible.

mod manifest;

use std::fmt;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use transplan::bench::{bench_table_csv, heuristic_name, run_bench, BenchConfig};
use transplan::budget::Budget;
use transplan::execsim::{compare_makespans, simulate_execution, ExecError};
use transplan::netmodel::{
    apply_shared_groups, load_network, load_request, ModelError, Network, Request,
};
use transplan::optimizer::{solve, SolveError, SolveOptions};
use transplan::p2p::{simulate_p2p, P2PError};
use transplan::plan::Plan;
use transplan::planner::{Heuristic, ValueOrder};
use transplan::rational::{format_rational, parse_rational, Rational};
use transplan::scheduler::{build_problem, greedy_schedule, optimal_schedule_within};
use transplan::workload::{benchmark_network, generate_demands, OriginDistribution};

use manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(
    name = "transplan",
    version,
    about = "Plan and schedule multi-source file transfers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find routes and a transfer schedule minimizing the makespan.
    Solve(SolveArgs),
    /// Run the peer-to-peer baseline.
    P2p(P2pArgs),
    /// Execute a stored plan with per-link managers.
    Simulate(SimulateArgs),
    /// Compare both heuristics and the baseline on generated requests.
    Bench(BenchArgs),
    /// Generate a benchmark request.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Minpath,
    Fastestlink,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Minpath => Heuristic::MinPath,
            HeuristicArg::Fastestlink => Heuristic::FastestLink,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ValueOrderArg {
    Inc,
    Dec,
}

impl From<ValueOrderArg> for ValueOrder {
    fn from(v: ValueOrderArg) -> Self {
        match v {
            ValueOrderArg::Inc => ValueOrder::Increasing,
            ValueOrderArg::Dec => ValueOrder::Decreasing,
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long, value_enum, default_value = "minpath")]
    heuristic: HeuristicArg,
    #[arg(long, value_enum, default_value = "dec")]
    value_order: ValueOrderArg,
    /// Wall-clock limit in seconds.
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    /// Search node limit; with it, runs are reproducible.
    #[arg(long)]
    node_limit: Option<u64>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    request: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct P2pArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    request: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    network: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    /// Schedule table whose makespan the execution is compared with.
    /// Without it the plan is scheduled first.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Streams per link, overriding the network file.
    #[arg(long)]
    max_streams: Option<u32>,
    /// Limit in seconds for scheduling the plan when no schedule is given.
    #[arg(long, default_value_t = 10.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Comma-separated values; an empty string is an empty list.
#[derive(Debug, Clone)]
struct List<T>(Vec<T>);

impl<T: std::str::FromStr> std::str::FromStr for List<T> {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(',')
            .map(str::trim)
            .filter(|v| !v.is_empty())
            .map(|v| v.parse().map_err(|_| format!("invalid list entry {v:?}")))
            .collect::<Result<_, _>>()
            .map(List)
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Request sizes, comma-separated.
    #[arg(long, default_value = "25,50,100,150,200")]
    sizes: List<usize>,
    /// Seeds, comma-separated.
    #[arg(long, default_value = "1,2,3,4,5")]
    seeds: List<u64>,
    #[arg(long, value_enum, default_value = "dec")]
    value_order: ValueOrderArg,
    #[arg(long, default_value_t = 30.0)]
    time_limit: f64,
    #[arg(long)]
    node_limit: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of files.
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// Failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    fn infeasible(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnroutableDemand(_) => Failure::infeasible(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => m.into(),
            SolveError::NoFeasiblePlan | SolveError::NoPlanWithinLimit => {
                Failure::infeasible(e.to_string())
            }
            SolveError::Schedule(_) => Failure::input(e.to_string()),
        }
    }
}

impl From<P2PError> for Failure {
    fn from(e: P2PError) -> Self {
        match e {
            P2PError::Model(m) => m.into(),
            P2PError::Infeasible(_) => Failure::infeasible(e.to_string()),
        }
    }
}

impl From<ExecError> for Failure {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Stuck { .. } => Failure::infeasible(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        ErrorKind::NotFound => Failure::input(format!("no such file: {}", path.display())),
        _ => Failure::input(format!("cannot read {}: {e}", path.display())),
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn out_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))
}

fn seconds(value: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(value)
        .map_err(|_| Failure::input(format!("invalid time limit {value}")))
}

/// The network as written, with shared groups rewritten into plain links.
fn read_network(path: &Path) -> Result<Network, Failure> {
    let raw = load_network(&read(path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(apply_shared_groups(&raw, raw.shared_groups())?)
}

fn read_request(path: &Path) -> Result<Request, Failure> {
    load_request(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn manifest_error(e: std::io::Error) -> Failure {
    Failure::input(format!("cannot write manifest: {e}"))
}

fn cmd_solve(args: &SolveArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let network = read_network(&args.network)?;
    let request = read_request(&args.request)?;
    let options = SolveOptions {
        heuristic: args.search.heuristic.into(),
        value_order: args.search.value_order.into(),
        time_limit: Some(seconds(args.search.time_limit)?),
        node_limit: args.search.node_limit,
        seed: args.seed,
    };
    let solution = solve(&network, &request, &options)?;
    for warning in &solution.warnings {
        log::warn!("{warning}");
    }

    out_dir(&args.out)?;
    write(&args.out, "plan.json", &(solution.plan.to_json() + "\n"))?;
    write(
        &args.out,
        "schedule.csv",
        &solution.schedule.to_csv(&solution.problem),
    )?;
    write(&args.out, "trace.csv", &solution.trace_csv())?;
    let mut manifest = RunManifest::new("solve", args.seed);
    manifest
        .input("network", &args.network)
        .input("request", &args.request)
        .option("heuristic", heuristic_name(options.heuristic))
        .option("value_order", format!("{:?}", options.value_order))
        .option("time_limit", args.search.time_limit)
        .option(
            "node_limit",
            args.search
                .node_limit
                .map_or("none".into(), |n| n.to_string()),
        )
        .option("status", solution.status.as_str());
    manifest
        .write(
            &args.out,
            &["plan.json", "schedule.csv", "trace.csv"],
            started.elapsed(),
        )
        .map_err(manifest_error)?;

    println!("makespan {}", format_rational(&solution.makespan));
    println!("best found after {} ms", solution.best_found.as_millis());
    println!("status {}", solution.status.as_str());
    Ok(())
}

fn cmd_p2p(args: &P2pArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let network = load_network(&read(&args.network)?)
        .map_err(|e| Failure::input(format!("{}: {e}", args.network.display())))?;
    let request = read_request(&args.request)?;
    let result = simulate_p2p(&network, &request, args.seed)?;
    out_dir(&args.out)?;
    write(&args.out, "transfers.csv", &result.to_csv())?;
    let mut manifest = RunManifest::new("p2p", args.seed);
    manifest
        .input("network", &args.network)
        .input("request", &args.request);
    manifest
        .write(&args.out, &["transfers.csv"], started.elapsed())
        .map_err(manifest_error)?;
    println!("makespan {}", format_rational(&result.makespan));
    Ok(())
}

/// Makespan from the `# makespan` footer of a schedule table.
fn schedule_makespan(path: &Path) -> Result<Rational, Failure> {
    let text = read(path)?;
    text.lines()
        .find_map(|l| l.strip_prefix("# makespan "))
        .ok_or_else(|| Failure::input(format!("{}: no makespan footer", path.display())))
        .and_then(|v| {
            parse_rational(v.trim()).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
        })
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let mut network = read_network(&args.network)?;
    if let Some(streams) = args.max_streams {
        let mut doc = network.to_document();
        doc.links.iter_mut().for_each(|l| l.max_streams = streams);
        network = Network::from_document(doc)?;
    }
    let plan_text = read(&args.plan)?;
    let plan = Plan::from_json(&plan_text)
        .map_err(|e| Failure::input(format!("{}: parse error: {e}", args.plan.display())))?;
    plan.check_paths(&network)
        .map_err(|e| Failure::input(format!("{}: {e}", args.plan.display())))?;

    let scheduled = match &args.schedule {
        Some(path) => schedule_makespan(path)?,
        None => {
            let problem =
                build_problem(&network, &plan).map_err(|e| Failure::input(e.to_string()))?;
            let greedy = greedy_schedule(&problem).map_err(|e| Failure::input(e.to_string()))?;
            let mut budget = Budget::new(Some(seconds(args.time_limit)?), None);
            optimal_schedule_within(&problem, Some(greedy.makespan), &mut budget)
                .schedule
                .map_or(greedy.makespan, |s| s.makespan)
        }
    };
    let result = simulate_execution(&network, &plan, args.seed)?;
    let gap = compare_makespans(&scheduled, &result.makespan);

    out_dir(&args.out)?;
    write(&args.out, "execution.csv", &result.to_csv())?;
    let mut manifest = RunManifest::new("simulate", args.seed);
    manifest
        .input("network", &args.network)
        .input("plan", &args.plan);
    if let Some(path) = &args.schedule {
        manifest.input("schedule", path);
    }
    if let Some(streams) = args.max_streams {
        manifest.option("max_streams", streams);
    }
    manifest
        .write(&args.out, &["execution.csv"], started.elapsed())
        .map_err(manifest_error)?;

    println!("makespan {}", format_rational(&result.makespan));
    println!("schedule makespan {}", format_rational(&scheduled));
    println!("gap {gap:.4}");
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let config = BenchConfig {
        sizes: args.sizes.0.clone(),
        seeds: args.seeds.0.clone(),
        time_limit: Some(seconds(args.time_limit)?),
        node_limit: args.node_limit,
        value_order: args.value_order.into(),
    };
    let rows = run_bench(&config);
    out_dir(&args.out)?;
    write(&args.out, "table.csv", &bench_table_csv(&rows))?;

    let mut outputs = vec!["table.csv".to_string()];
    for row in &rows {
        for run in &row.runs {
            let Ok(outcome) = &run.outcome else { continue };
            let name = format!(
                "n{}-s{}-{}",
                row.size,
                row.seed,
                heuristic_name(run.heuristic).to_lowercase()
            );
            let dir = args.out.join(&name);
            out_dir(&dir)?;
            let s = &outcome.solution;
            write(&dir, "plan.json", &(s.plan.to_json() + "\n"))?;
            write(&dir, "schedule.csv", &s.schedule.to_csv(&s.problem))?;
            write(&dir, "trace.csv", &s.trace_csv())?;
            let mut manifest = RunManifest::new("bench", row.seed);
            manifest
                .option("size", row.size)
                .option("heuristic", heuristic_name(run.heuristic))
                .option("status", s.status.as_str());
            manifest
                .write(
                    &dir,
                    &["plan.json", "schedule.csv", "trace.csv"],
                    s.best_found,
                )
                .map_err(manifest_error)?;
            outputs.push(name);
        }
    }
    let mut manifest = RunManifest::new("bench", 0);
    manifest
        .option("sizes", format!("{:?}", config.sizes))
        .option("seeds", format!("{:?}", config.seeds))
        .option("time_limit", args.time_limit)
        .option("value_order", format!("{:?}", config.value_order));
    let outputs: Vec<&str> = outputs.iter().map(String::as_str).collect();
    manifest
        .write(&args.out, &outputs, started.elapsed())
        .map_err(manifest_error)?;
    println!(
        "{} rows written to {}",
        rows.len(),
        args.out.join("table.csv").display()
    );
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let started = Instant::now();
    let request = generate_demands(args.size, &OriginDistribution::benchmark(), args.seed);
    out_dir(&args.out)?;
    write(&args.out, "request.json", &(request.to_json() + "\n"))?;
    write(
        &args.out,
        "network.json",
        &(benchmark_network().to_json() + "\n"),
    )?;
    let mut manifest = RunManifest::new("gen", args.seed);
    manifest.option("size", args.size);
    manifest
        .write(
            &args.out,
            &["request.json", "network.json"],
            started.elapsed(),
        )
        .map_err(manifest_error)?;
    println!(
        "{} files written to {}",
        args.size,
        args.out.join("request.json").display()
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::P2p(a) => cmd_p2p(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code)
        }
    }
}
