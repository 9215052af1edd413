//! Plan-then-schedule branch and bound on the makespan.
//!
//! The planner enumerates routings under a strict makespan bound; every
//! routing is handed to the scheduler, which looks for a schedule strictly
//! better than the incumbent. Each improvement tightens the planner's
//! bound, so later routings must beat it too. The planner search resumes
//! after each plan instead of restarting.

use std::fmt::Write as _;
use std::time::Duration;

use log::{debug, info};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bound::makespan_lower_bound;
use crate::budget::Budget;
use crate::netmodel::{validate_request, ModelError, Network, Request};
use crate::plan::Plan;
use crate::planner::{Heuristic, PlanOutcome, Planner, PlannerError, SearchConfig, ValueOrder};
use crate::rational::{format_rational, Rational};
use crate::scheduler::{
    build_problem, greedy_schedule, optimal_schedule_within, Schedule, ScheduleError,
    ScheduleProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub heuristic: Heuristic,
    pub value_order: ValueOrder,
    pub time_limit: Option<Duration>,
    /// Search-node allowance shared by planner and scheduler. Unlike the
    /// time limit it truncates runs reproducibly.
    pub node_limit: Option<u64>,
    /// Unused by the deterministic search; recorded for run manifests.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            heuristic: Heuristic::MinPath,
            value_order: ValueOrder::Decreasing,
            time_limit: None,
            node_limit: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofStatus {
    /// The planner ran out of routings below the incumbent, or the
    /// incumbent met the lower bound.
    Optimal,
    TimeLimit,
    NodeLimit,
}

impl ProofStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ProofStatus::Optimal => "optimal",
            ProofStatus::TimeLimit => "time-limit",
            ProofStatus::NodeLimit => "node-limit",
        }
    }
}

/// One incumbent improvement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TracePoint {
    pub ms: u64,
    /// Search nodes spent so far; reproducible unlike `ms`.
    pub nodes: u64,
    pub makespan: Rational,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub plans: u64,
    pub planner_decisions: u64,
    /// Nodes spent in the scheduler's branch and bound.
    pub schedule_nodes: u64,
    /// All search nodes, planner and scheduler together.
    pub nodes: u64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: Plan,
    pub problem: ScheduleProblem,
    pub schedule: Schedule,
    pub makespan: Rational,
    pub status: ProofStatus,
    /// `true` when `schedule` is known to be optimal for `plan`.
    pub schedule_proven: bool,
    pub trace: Vec<TracePoint>,
    /// Wall time at which the final incumbent was found.
    pub best_found: Duration,
    /// Demands already present at the destination.
    pub satisfied: Vec<String>,
    pub warnings: Vec<String>,
    /// Routing-independent lower bound; reaching it ends the search.
    pub lower_bound: Rational,
    pub stats: SolveStats,
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no feasible plan")]
    NoFeasiblePlan,
    #[error("limit reached before a first plan was found")]
    NoPlanWithinLimit,
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

impl From<PlannerError> for SolveError {
    fn from(_: PlannerError) -> Self {
        SolveError::NoFeasiblePlan
    }
}

impl Solution {
    /// `ms,makespan` rows, one per incumbent.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("ms,makespan\n");
        for p in &self.trace {
            let _ = writeln!(out, "{},{}", p.ms, format_rational(&p.makespan));
        }
        out
    }

    /// Like [`Solution::trace_csv`] but keyed by node count, so it is
    /// identical across repeated runs.
    pub fn trace_nodes_csv(&self) -> String {
        let mut out = String::from("nodes,makespan\n");
        for p in &self.trace {
            let _ = writeln!(out, "{},{}", p.nodes, format_rational(&p.makespan));
        }
        out
    }
}

struct Incumbent {
    plan: Plan,
    problem: ScheduleProblem,
    schedule: Schedule,
    proven: bool,
}

pub fn solve(
    network: &Network,
    request: &Request,
    options: &SolveOptions,
) -> Result<Solution, SolveError> {
    let mut budget = Budget::new(options.time_limit, options.node_limit);
    let req = validate_request(network, request)?;
    let destination = network.site(req.destination).id.clone();

    if req.demands.is_empty() {
        return Ok(Solution {
            plan: Plan {
                destination,
                routes: Vec::new(),
            },
            problem: ScheduleProblem::default(),
            schedule: Schedule {
                starts: Vec::new(),
                makespan: Rational::default(),
            },
            makespan: Rational::default(),
            status: ProofStatus::Optimal,
            schedule_proven: true,
            trace: vec![TracePoint {
                ms: 0,
                nodes: 0,
                makespan: Rational::default(),
            }],
            best_found: Duration::ZERO,
            satisfied: req.satisfied,
            warnings: req.warnings,
            lower_bound: Rational::default(),
            stats: SolveStats::default(),
        });
    }

    let config = SearchConfig {
        heuristic: Some(options.heuristic),
        value_order: options.value_order,
    };
    let mut planner = Planner::new(network, &req, None, config)?;
    let lower_bound = makespan_lower_bound(network, &req);
    let mut trace = Vec::new();
    let mut best_found = Duration::ZERO;
    let mut record = |budget: &Budget, makespan: Rational, best_found: &mut Duration| {
        let elapsed = budget.elapsed();
        *best_found = elapsed;
        info!(
            "incumbent {} after {} nodes",
            format_rational(&makespan),
            budget.nodes()
        );
        trace.push(TracePoint {
            ms: elapsed.as_millis() as u64,
            nodes: budget.nodes(),
            makespan,
        });
    };

    let first = match planner.next_plan_within(&mut budget) {
        PlanOutcome::Plan(p) => p,
        PlanOutcome::Exhausted => return Err(SolveError::NoFeasiblePlan),
        PlanOutcome::Interrupted => return Err(SolveError::NoPlanWithinLimit),
    };
    let problem = build_problem(network, &first)?;
    let schedule = greedy_schedule(&problem)?;
    record(&budget, schedule.makespan, &mut best_found);
    let mut best = Incumbent {
        plan: first,
        problem,
        schedule,
        proven: false,
    };

    let mut complete = true;
    let search = optimal_schedule_within(&best.problem, Some(best.schedule.makespan), &mut budget);
    let mut schedule_nodes = search.nodes;
    if let Some(s) = search.schedule {
        record(&budget, s.makespan, &mut best_found);
        best.schedule = s;
    }
    complete &= search.complete;
    best.proven = search.complete;
    planner.set_bound(best.schedule.makespan);

    while complete && best.schedule.makespan > lower_bound {
        match planner.next_plan_within(&mut budget) {
            PlanOutcome::Plan(plan) => {
                let problem = build_problem(network, &plan)?;
                let search =
                    optimal_schedule_within(&problem, Some(best.schedule.makespan), &mut budget);
                debug!(
                    "plan {} scheduled in {} nodes",
                    planner.stats().plans,
                    search.nodes
                );
                schedule_nodes += search.nodes;
                if let Some(s) = search.schedule {
                    record(&budget, s.makespan, &mut best_found);
                    planner.set_bound(s.makespan);
                    best = Incumbent {
                        plan,
                        problem,
                        schedule: s,
                        proven: search.complete,
                    };
                }
                complete = search.complete;
            }
            PlanOutcome::Exhausted => break,
            PlanOutcome::Interrupted => complete = false,
        }
    }

    let status = if complete {
        ProofStatus::Optimal
    } else if budget.hit_node_limit() {
        ProofStatus::NodeLimit
    } else {
        ProofStatus::TimeLimit
    };
    let planner_stats = planner.stats();
    Ok(Solution {
        makespan: best.schedule.makespan,
        plan: best.plan,
        problem: best.problem,
        schedule: best.schedule,
        status,
        schedule_proven: best.proven,
        trace,
        best_found,
        satisfied: req.satisfied,
        warnings: req.warnings,
        lower_bound,
        stats: SolveStats {
            plans: planner_stats.plans,
            planner_decisions: planner_stats.decisions,
            schedule_nodes,
            nodes: budget.nodes(),
        },
    })
}
