//! Heuristic comparison on generated benchmark requests.

use std::fmt::Write as _;
use std::time::Duration;

use crate::execsim::{compare_makespans, simulate_execution};
use crate::optimizer::{solve, Solution, SolveOptions};
use crate::p2p::simulate_p2p;
use crate::planner::{Heuristic, ValueOrder};
use crate::rational::{format_rational, Rational};
use crate::workload::{benchmark_network, generate_demands, OriginDistribution};

pub const HEURISTICS: [Heuristic; 2] = [Heuristic::FastestLink, Heuristic::MinPath];

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    pub value_order: ValueOrder,
}

/// One solver run inside a row.
#[derive(Debug, Clone)]
pub struct SolverRun {
    pub heuristic: Heuristic,
    pub outcome: Result<SolverOutcome, String>,
}

#[derive(Debug, Clone)]
pub struct SolverOutcome {
    pub solution: Solution,
    /// Greedy execution of the solution's plan.
    pub exec_makespan: Option<Rational>,
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub size: usize,
    pub seed: u64,
    pub runs: Vec<SolverRun>,
    pub p2p: Result<Rational, String>,
}

impl BenchRow {
    pub fn run(&self, heuristic: Heuristic) -> Option<&SolverOutcome> {
        self.runs
            .iter()
            .find(|r| r.heuristic == heuristic)
            .and_then(|r| r.outcome.as_ref().ok())
    }
}

pub fn heuristic_name(h: Heuristic) -> &'static str {
    match h {
        Heuristic::FastestLink => "FastestLink",
        Heuristic::MinPath => "MinPath",
    }
}

/// Runs both heuristics, greedy execution and the P2P baseline for every
/// size and seed. Failures are kept per row.
pub fn run_bench(config: &BenchConfig) -> Vec<BenchRow> {
    let network = benchmark_network();
    let dist = OriginDistribution::benchmark();
    let mut rows = Vec::new();
    for &size in &config.sizes {
        for &seed in &config.seeds {
            let request = generate_demands(size, &dist, seed);
            let runs = HEURISTICS
                .iter()
                .map(|&heuristic| {
                    let options = SolveOptions {
                        heuristic,
                        value_order: config.value_order,
                        time_limit: config.time_limit,
                        node_limit: config.node_limit,
                        seed,
                    };
                    let outcome = solve(&network, &request, &options)
                        .map(|solution| SolverOutcome {
                            exec_makespan: simulate_execution(&network, &solution.plan, seed)
                                .ok()
                                .map(|e| e.makespan),
                            solution,
                        })
                        .map_err(|e| e.to_string());
                    log::info!("bench size {size} seed {seed} {heuristic:?} done");
                    SolverRun { heuristic, outcome }
                })
                .collect();
            let p2p = simulate_p2p(&network, &request, seed)
                .map(|r| r.makespan)
                .map_err(|e| e.to_string());
            rows.push(BenchRow {
                size,
                seed,
                runs,
                p2p,
            });
        }
    }
    rows
}

/// One line per (row, heuristic).
pub fn bench_table_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(
        "size,seed,heuristic,makespan,best_ms,status,p2p_makespan,exec_makespan,exec_gap\n",
    );
    for row in rows {
        let p2p = row
            .p2p
            .as_ref()
            .map_or_else(|e| format!("error: {e}"), format_rational);
        for run in &row.runs {
            let name = heuristic_name(run.heuristic);
            match &run.outcome {
                Ok(o) => {
                    let s = &o.solution;
                    let (exec, gap) = match &o.exec_makespan {
                        Some(e) => (
                            format_rational(e),
                            format!("{:.4}", compare_makespans(&s.makespan, e)),
                        ),
                        None => ("error".into(), String::new()),
                    };
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{}",
                        row.size,
                        row.seed,
                        name,
                        format_rational(&s.makespan),
                        s.best_found.as_millis(),
                        s.status.as_str(),
                        p2p,
                        exec,
                        gap
                    );
                }
                Err(e) => {
                    let _ = writeln!(
                        out,
                        "{},{},{},error: {},,,{},,",
                        row.size, row.seed, name, e, p2p
                    );
                }
            }
        }
    }
    out
}
