//! Scheduling stage: transfer tasks on unary link resources.
//!
//! Every (demand, link) pair of a plan becomes one task; the tasks of a
//! demand form a chain in path order. Each link hosts one transfer at a
//! time. Sites with finite storage add a cumulative resource: a file
//! passing through such a site occupies `size` units of it from the start
//! of its incoming transfer until the end of its outgoing transfer.

use std::collections::{BinaryHeap, HashMap};

use num_integer::Integer;
use thiserror::Error;

use crate::budget::Budget;
use crate::netmodel::{transfer_duration, Network};
use crate::plan::Plan;
use crate::rational::{ceil_ticks, exact_ticks, format_rational, lcm_of_denoms, Rational};
use crate::transfer::{transfers_csv, Transfer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("plan references unknown link {0:?}")]
    UnknownLink(String),
    #[error("plan references unknown site {0:?}")]
    UnknownSite(String),
    #[error("demand {demand} exceeds site capacity at {site}")]
    DemandExceedsCapacity { demand: String, site: String },
}

/// One transfer of one demand over one link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub demand: String,
    pub link: String,
    pub duration: Rational,
    pub size: Rational,
    /// Previous transfer on the demand's path.
    pub predecessor: Option<usize>,
    pub successor: Option<usize>,
    /// Index into [`ScheduleProblem::links`].
    pub resource: usize,
}

/// A file held at a capacity-limited transit site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    /// Index into [`ScheduleProblem::storage`].
    pub resource: usize,
    pub demand: String,
    /// Task bringing the file in; the occupancy starts with it.
    pub incoming: usize,
    /// Task taking the file out; the occupancy ends with it.
    pub outgoing: usize,
    pub usage: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StorageResource {
    pub site: String,
    pub capacity: Rational,
}

/// Tasks are stored demand by demand (demands in id order), each chain in
/// path order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScheduleProblem {
    pub tasks: Vec<Task>,
    /// Link ids, one unary resource each.
    pub links: Vec<String>,
    pub storage: Vec<StorageResource>,
    pub occupancies: Vec<Occupancy>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    /// Start time per task, parallel to [`ScheduleProblem::tasks`].
    pub starts: Vec<Rational>,
    pub makespan: Rational,
}

/// Builds the scheduling problem of `plan`.
pub fn build_problem(network: &Network, plan: &Plan) -> Result<ScheduleProblem, ScheduleError> {
    let mut routes: Vec<_> = plan.routes.iter().collect();
    routes.sort_by(|a, b| a.demand.cmp(&b.demand));

    let mut problem = ScheduleProblem::default();
    let mut link_slot = vec![None; network.num_links()];
    let mut storage_slot = vec![None; network.num_sites()];
    for route in routes {
        let origin = network
            .site_index(&route.origin)
            .ok_or_else(|| ScheduleError::UnknownSite(route.origin.clone()))?;
        let mut prev: Option<usize> = None;
        for (pos, id) in route.links.iter().enumerate() {
            let l = network
                .link_index(id)
                .ok_or_else(|| ScheduleError::UnknownLink(id.clone()))?;
            let resource = *link_slot[l].get_or_insert_with(|| {
                problem.links.push(id.clone());
                problem.links.len() - 1
            });
            let ix = problem.tasks.len();
            problem.tasks.push(Task {
                demand: route.demand.clone(),
                link: id.clone(),
                duration: transfer_duration(&route.size, network.link(l)),
                size: route.size,
                predecessor: prev,
                successor: None,
                resource,
            });
            if let Some(p) = prev {
                problem.tasks[p].successor = Some(ix);
            }
            prev = Some(ix);

            let site = network.head(l);
            let is_last = pos + 1 == route.links.len();
            if is_last || site == origin {
                continue;
            }
            if let Some(capacity) = network.site(site).storage_capacity {
                let resource = *storage_slot[site].get_or_insert_with(|| {
                    problem.storage.push(StorageResource {
                        site: network.site(site).id.clone(),
                        capacity,
                    });
                    problem.storage.len() - 1
                });
                problem.occupancies.push(Occupancy {
                    resource,
                    demand: route.demand.clone(),
                    incoming: ix,
                    outgoing: ix + 1,
                    usage: route.size,
                });
            }
        }
    }
    Ok(problem)
}

impl ScheduleProblem {
    pub fn makespan_of(&self, starts: &[Rational]) -> Rational {
        self.tasks
            .iter()
            .zip(starts)
            .map(|(t, s)| s + t.duration)
            .max()
            .unwrap_or_default()
    }
}

impl Schedule {
    /// The schedule as a transfer log ordered by start time.
    pub fn transfers(&self, problem: &ScheduleProblem) -> Vec<Transfer> {
        let mut order: Vec<usize> = (0..problem.tasks.len()).collect();
        order.sort_by(|&a, &b| self.starts[a].cmp(&self.starts[b]).then(a.cmp(&b)));
        order
            .into_iter()
            .map(|i| {
                let task = &problem.tasks[i];
                Transfer {
                    demand: task.demand.clone(),
                    link: task.link.clone(),
                    start: self.starts[i],
                    end: self.starts[i] + task.duration,
                }
            })
            .collect()
    }

    pub fn to_csv(&self, problem: &ScheduleProblem) -> String {
        transfers_csv(&self.transfers(problem), &self.makespan)
    }
}

/// Integer view of a problem, in ticks of `1 / scale` time units and
/// `1 / usage_scale` size units.
struct Ticks {
    scale: i64,
    dur: Vec<i64>,
    tail: Vec<i64>,
    /// Tasks with equal class have interchangeable remaining chains.
    class: Vec<usize>,
    pred: Vec<Option<usize>>,
    succ: Vec<Option<usize>>,
    res: Vec<usize>,
    res_tasks: Vec<Vec<usize>>,
    occ_in: Vec<Option<usize>>,
    occ_out: Vec<Option<usize>>,
    occ_res: Vec<usize>,
    usage: Vec<i64>,
    cap: Vec<i64>,
}

impl Ticks {
    fn new(problem: &ScheduleProblem) -> Self {
        let n = problem.tasks.len();
        let scale = lcm_of_denoms(problem.tasks.iter().map(|t| &t.duration));
        let usage_scale = problem
            .occupancies
            .iter()
            .map(|o| &o.usage)
            .chain(problem.storage.iter().map(|s| &s.capacity))
            .fold(1i64, |acc, v| acc.lcm(v.denom()));
        let dur: Vec<i64> = problem
            .tasks
            .iter()
            .map(|t| exact_ticks(&t.duration, scale))
            .collect();
        let mut tail = vec![0; n];
        for i in (0..n).rev() {
            if let Some(s) = problem.tasks[i].successor {
                tail[i] = tail[s] + dur[s];
            }
        }
        let mut res_tasks = vec![Vec::new(); problem.links.len()];
        for (i, t) in problem.tasks.iter().enumerate() {
            res_tasks[t.resource].push(i);
        }
        let mut occ_in = vec![None; n];
        let mut occ_out = vec![None; n];
        for (k, o) in problem.occupancies.iter().enumerate() {
            occ_in[o.incoming] = Some(k);
            occ_out[o.outgoing] = Some(k);
        }
        let usage: Vec<i64> = problem
            .occupancies
            .iter()
            .map(|o| exact_ticks(&o.usage, usage_scale))
            .collect();
        let hold = |o: Option<usize>| o.map(|k| (problem.occupancies[k].resource, usage[k]));
        let mut classes = HashMap::new();
        let mut class = vec![0; n];
        for i in (0..n).rev() {
            let key = (
                problem.tasks[i].resource,
                dur[i],
                hold(occ_in[i]),
                hold(occ_out[i]),
                problem.tasks[i].successor.map(|s| class[s]),
            );
            let next = classes.len();
            class[i] = *classes.entry(key).or_insert(next);
        }
        Self {
            scale,
            dur,
            tail,
            class,
            pred: problem.tasks.iter().map(|t| t.predecessor).collect(),
            succ: problem.tasks.iter().map(|t| t.successor).collect(),
            res: problem.tasks.iter().map(|t| t.resource).collect(),
            res_tasks,
            occ_in,
            occ_out,
            occ_res: problem.occupancies.iter().map(|o| o.resource).collect(),
            usage,
            cap: problem
                .storage
                .iter()
                .map(|s| exact_ticks(&s.capacity, usage_scale))
                .collect(),
        }
    }

    fn len(&self) -> usize {
        self.dur.len()
    }

    fn schedule(&self, starts: &[i64]) -> Schedule {
        let makespan = (0..self.len())
            .map(|i| starts[i] + self.dur[i])
            .max()
            .unwrap_or(0);
        Schedule {
            starts: starts
                .iter()
                .map(|&s| Rational::new(s, self.scale))
                .collect(),
            makespan: Rational::new(makespan, self.scale),
        }
    }
}

// ---- greedy list scheduling ---------------------------------------------

/// Earliest `s >= from` such that `[s, s + len)` avoids every interval of
/// the sorted, disjoint `busy`.
fn first_gap(busy: &[(i64, i64)], from: i64, len: i64) -> i64 {
    let mut s = from;
    let first = busy.partition_point(|&(_, end)| end <= from);
    for &(b, e) in &busy[first..] {
        if s + len <= b {
            break;
        }
        s = s.max(e);
    }
    s
}

fn insert_interval(busy: &mut Vec<(i64, i64)>, iv: (i64, i64)) {
    let at = busy.partition_point(|&(b, _)| b < iv.0);
    busy.insert(at, iv);
}

/// Peak usage over `[from, to)` of the given `(start, end, usage)` intervals.
fn peak_load(held: &[(i64, i64, i64)], from: i64, to: i64) -> i64 {
    let points = std::iter::once(from).chain(
        held.iter()
            .map(|&(s, _, _)| s)
            .filter(|&s| s > from && s < to),
    );
    points
        .map(|p| {
            held.iter()
                .filter(|&&(s, e, _)| s <= p && p < e)
                .map(|&(_, _, u)| u)
                .sum()
        })
        .max()
        .unwrap_or(0)
}

/// List scheduling: repeatedly places the ready task that can start
/// earliest (ties by task order, i.e. demand id). A task that brings a file
/// into a capacity-limited site is placed together with the transfers that
/// take it out again, so storage is only ever claimed for known intervals.
pub fn greedy_schedule(problem: &ScheduleProblem) -> Result<Schedule, ScheduleError> {
    let tp = Ticks::new(problem);
    let n = tp.len();
    for (k, &u) in tp.usage.iter().enumerate() {
        if u > tp.cap[tp.occ_res[k]] {
            return Err(ScheduleError::DemandExceedsCapacity {
                demand: problem.occupancies[k].demand.clone(),
                site: problem.storage[tp.occ_res[k]].site.clone(),
            });
        }
    }

    let mut starts: Vec<Option<i64>> = vec![None; n];
    let mut busy: Vec<Vec<(i64, i64)>> = vec![Vec::new(); problem.links.len()];
    let mut held: Vec<Vec<(i64, i64, i64)>> = vec![Vec::new(); problem.storage.len()];
    let mut ready: Vec<usize> = (0..n).filter(|&i| tp.pred[i].is_none()).collect();

    let segment_of = |first: usize| {
        let mut seg = vec![first];
        let mut at = first;
        while tp.occ_in[at].is_some() {
            at = tp.succ[at].expect("occupancy has an outgoing task");
            seg.push(at);
        }
        seg
    };

    let place = |seg: &[usize],
                 from: i64,
                 busy: &[Vec<(i64, i64)>],
                 held: &[Vec<(i64, i64, i64)>]|
     -> Option<Vec<i64>> {
        let mut at = from;
        let mut seg_starts = Vec::with_capacity(seg.len());
        for &t in seg {
            let s = first_gap(&busy[tp.res[t]], at, tp.dur[t]);
            seg_starts.push(s);
            at = s + tp.dur[t];
        }
        for (k, &t) in seg.iter().enumerate() {
            if let Some(o) = tp.occ_in[t] {
                let (from, to) = (seg_starts[k], seg_starts[k + 1] + tp.dur[seg[k + 1]]);
                let r = tp.occ_res[o];
                if peak_load(&held[r], from, to) + tp.usage[o] > tp.cap[r] {
                    return None;
                }
            }
        }
        Some(seg_starts)
    };

    while !ready.is_empty() {
        let mut best: Option<(i64, usize, Vec<usize>, Vec<i64>)> = None;
        for &t in &ready {
            let release = tp.pred[t].map_or(0, |p| starts[p].unwrap() + tp.dur[p]);
            let seg = segment_of(t);
            let mut candidates: Vec<i64> = vec![release];
            if seg.len() > 1 {
                for &u in &seg {
                    candidates.extend(busy[tp.res[u]].iter().map(|&(_, e)| e));
                    if let Some(o) = tp.occ_in[u] {
                        candidates.extend(held[tp.occ_res[o]].iter().map(|&(_, e, _)| e));
                    }
                }
                candidates.retain(|&c| c >= release);
                candidates.sort_unstable();
                candidates.dedup();
            }
            let placed = candidates
                .iter()
                .find_map(|&c| place(&seg, c, &busy, &held))
                .expect("placing after every interval always fits");
            let key = (placed[0], t);
            if best.as_ref().is_none_or(|b| key < (b.0, b.1)) {
                best = Some((placed[0], t, seg, placed));
            }
        }
        let (_, first, seg, seg_starts) = best.expect("ready set is nonempty");
        ready.retain(|&t| t != first);
        for (k, &t) in seg.iter().enumerate() {
            starts[t] = Some(seg_starts[k]);
            insert_interval(
                &mut busy[tp.res[t]],
                (seg_starts[k], seg_starts[k] + tp.dur[t]),
            );
            if let Some(o) = tp.occ_in[t] {
                let end = seg_starts[k + 1] + tp.dur[seg[k + 1]];
                held[tp.occ_res[o]].push((seg_starts[k], end, tp.usage[o]));
            }
        }
        let last = *seg.last().unwrap();
        if let Some(s) = tp.succ[last] {
            ready.push(s);
        }
    }

    let starts: Vec<i64> = starts.into_iter().map(|s| s.unwrap()).collect();
    Ok(tp.schedule(&starts))
}

// ---- branch and bound ---------------------------------------------------

/// Outcome of a budgeted [`optimal_schedule_within`] call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleSearch {
    /// Best schedule found strictly below the bound.
    pub schedule: Option<Schedule>,
    /// `true` when the search tree was fully explored, i.e. `schedule` is
    /// optimal (or no schedule beats the bound).
    pub complete: bool,
    pub nodes: u64,
}

/// Minimal-makespan schedule strictly below `strict_upper` (`None` means
/// unbounded), or `None` when no schedule beats it.
pub fn optimal_schedule(
    problem: &ScheduleProblem,
    strict_upper: Option<Rational>,
) -> Option<Schedule> {
    optimal_schedule_within(problem, strict_upper, &mut Budget::unlimited()).schedule
}

/// Chronological schedule-or-postpone branch and bound.
///
/// At each node the ready task with the smallest earliest start (ties:
/// longest remaining chain, then task order) is either fixed at that start
/// or postponed. A postponed task becomes selectable again only after its
/// earliest start moves. Nodes whose lower bound reaches the incumbent are
/// cut.
pub fn optimal_schedule_within(
    problem: &ScheduleProblem,
    strict_upper: Option<Rational>,
    budget: &mut Budget,
) -> ScheduleSearch {
    let tp = Ticks::new(problem);
    if tp
        .usage
        .iter()
        .zip(&tp.occ_res)
        .any(|(&u, &r)| u > tp.cap[r])
    {
        return ScheduleSearch {
            schedule: None,
            complete: true,
            nodes: 0,
        };
    }
    let bound = strict_upper.map_or(i64::MAX, |b| ceil_ticks(&b, tp.scale));
    let mut search = SetTimes::new(&tp, bound, budget);
    let before = search.budget.nodes();
    search.run(0, 0);
    let nodes = search.budget.nodes() - before;
    ScheduleSearch {
        schedule: search.best_starts.as_ref().map(|s| tp.schedule(s)),
        complete: !search.interrupted,
        nodes,
    }
}

/// Root lower bound used by the branch and bound.
pub fn lower_bound(problem: &ScheduleProblem) -> Rational {
    let tp = Ticks::new(problem);
    let mut budget = Budget::unlimited();
    let search = SetTimes::new(&tp, i64::MAX, &mut budget);
    let mut rlb = vec![0; tp.len()];
    Rational::new(search.lower_bound(0, 0, &mut rlb), tp.scale)
}

struct SetTimes<'a, 'b> {
    tp: &'a Ticks,
    start: Vec<Option<i64>>,
    free_at: Vec<i64>,
    occ_start: Vec<Option<i64>>,
    occ_end: Vec<Option<i64>>,
    postponed: Vec<Option<i64>>,
    scheduled: usize,
    best: i64,
    best_starts: Option<Vec<i64>>,
    budget: &'b mut Budget,
    interrupted: bool,
}

impl<'a, 'b> SetTimes<'a, 'b> {
    fn new(tp: &'a Ticks, best: i64, budget: &'b mut Budget) -> Self {
        Self {
            tp,
            start: vec![None; tp.len()],
            free_at: vec![0; tp.res_tasks.len()],
            occ_start: vec![None; tp.usage.len()],
            occ_end: vec![None; tp.usage.len()],
            postponed: vec![None; tp.len()],
            scheduled: 0,
            best,
            best_starts: None,
            budget,
            interrupted: false,
        }
    }

    fn end(&self, t: usize) -> Option<i64> {
        self.start[t].map(|s| s + self.tp.dur[t])
    }

    /// Earliest start from precedence and link availability alone.
    fn unary_est(&self, t: usize) -> i64 {
        let release = self.tp.pred[t].map_or(0, |p| self.end(p).expect("ready task"));
        release.max(self.free_at[self.tp.res[t]])
    }

    /// Earliest start including storage, `None` while blocked by files
    /// whose departure is not yet scheduled.
    fn est(&self, t: usize) -> Option<i64> {
        let base = self.unary_est(t);
        let Some(o) = self.tp.occ_in[t] else {
            return Some(base);
        };
        let r = self.tp.occ_res[o];
        let need = self.tp.usage[o];
        let cap = self.tp.cap[r];
        let mut load = 0;
        let mut closing = Vec::new();
        for k in 0..self.tp.usage.len() {
            if self.tp.occ_res[k] != r || self.occ_start[k].is_none() {
                continue;
            }
            match self.occ_end[k] {
                None => load += self.tp.usage[k],
                Some(e) if e > base => {
                    load += self.tp.usage[k];
                    closing.push((e, self.tp.usage[k]));
                }
                Some(_) => {}
            }
        }
        if load + need <= cap {
            return Some(base);
        }
        closing.sort_unstable();
        for (e, u) in closing {
            load -= u;
            if load + need <= cap {
                return Some(e);
            }
        }
        None
    }

    /// Max of chain bounds and per-link preemptive one-machine bounds over
    /// unscheduled tasks, none of which can start before `now`. `rlb`
    /// receives a release lower bound per unscheduled task.
    fn lower_bound(&self, current_end: i64, now: i64, rlb: &mut [i64]) -> i64 {
        let tp = self.tp;
        let mut lb = current_end;
        for t in 0..tp.len() {
            if self.start[t].is_some() {
                continue;
            }
            let chain = match tp.pred[t] {
                Some(p) if self.start[p].is_none() => rlb[p] + tp.dur[p],
                Some(p) => self.end(p).unwrap(),
                None => 0,
            };
            rlb[t] = chain.max(now).max(self.free_at[tp.res[t]]);
            lb = lb.max(rlb[t] + tp.dur[t] + tp.tail[t]);
        }
        let mut jobs = Vec::new();
        for tasks in &tp.res_tasks {
            jobs.clear();
            jobs.extend(
                tasks
                    .iter()
                    .filter(|&&t| self.start[t].is_none())
                    .map(|&t| (rlb[t], tp.dur[t], tp.tail[t])),
            );
            if jobs.len() > 1 {
                lb = lb.max(preemptive_bound(&mut jobs));
            }
        }
        lb
    }

    fn run(&mut self, current_end: i64, now: i64) {
        if self.interrupted {
            return;
        }
        if !self.budget.tick() {
            self.interrupted = true;
            return;
        }
        let tp = self.tp;
        let n = tp.len();
        if self.scheduled == n {
            if current_end < self.best {
                self.best = current_end;
                self.best_starts = Some(self.start.iter().map(|s| s.unwrap()).collect());
            }
            return;
        }

        let mut rlb = vec![0; n];
        if self.lower_bound(current_end, now, &mut rlb) >= self.best {
            return;
        }

        // (est, -tail, index) of the selected task.
        let mut pick: Option<(i64, i64, usize)> = None;
        let mut waiting: Vec<(i64, usize)> = Vec::new();
        for t in 0..n {
            if self.start[t].is_some() || tp.pred[t].is_some_and(|p| self.start[p].is_none()) {
                continue;
            }
            let Some(est) = self.est(t) else { continue };
            match self.postponed[t] {
                Some(p) if est <= p => waiting.push((est, t)),
                _ => {
                    let key = (est, -tp.tail[t], t);
                    if pick.is_none_or(|k| key < k) {
                        pick = Some(key);
                    }
                }
            }
        }
        let Some((est, _, t)) = pick else { return };
        // A postponed task that could have finished before `est` would be
        // left-shifted in any completion; such completions are dominated.
        if waiting
            .iter()
            .any(|&(e, w)| e + tp.dur[w] <= est && tp.occ_in[w].is_none())
        {
            return;
        }

        // Two ready tasks whose remaining chains are identical can trade
        // places once both are released. If an earlier twin was postponed,
        // starting `t` now mirrors the branch that started the twin.
        let release = |x: usize| tp.pred[x].map_or(0, |p| self.end(p).unwrap());
        let mirrored = waiting
            .iter()
            .any(|&(_, w)| w < t && tp.class[w] == tp.class[t] && release(w) <= est);
        if !mirrored {
            self.start_branch(t, est, current_end);
        }
        if self.interrupted {
            return;
        }

        // Branch 2: postpone `t` until its earliest start changes.
        let old = self.postponed[t].replace(est);
        self.run(current_end, est);
        self.postponed[t] = old;
    }

    fn start_branch(&mut self, t: usize, est: i64, current_end: i64) {
        let tp = self.tp;
        let r = tp.res[t];
        let old_free = self.free_at[r];
        self.start[t] = Some(est);
        self.free_at[r] = est + tp.dur[t];
        self.scheduled += 1;
        if let Some(o) = tp.occ_in[t] {
            self.occ_start[o] = Some(est);
        }
        if let Some(o) = tp.occ_out[t] {
            self.occ_end[o] = Some(est + tp.dur[t]);
        }
        self.run(current_end.max(est + tp.dur[t]), est);
        if let Some(o) = tp.occ_out[t] {
            self.occ_end[o] = None;
        }
        if let Some(o) = tp.occ_in[t] {
            self.occ_start[o] = None;
        }
        self.scheduled -= 1;
        self.free_at[r] = old_free;
        self.start[t] = None;
    }
}

/// Makespan-with-tails of the preemptive longest-tail-first schedule of
/// `(head, duration, tail)` jobs on one machine, a lower bound for the
/// non-preemptive case.
fn preemptive_bound(jobs: &mut [(i64, i64, i64)]) -> i64 {
    jobs.sort_unstable();
    let mut ready: BinaryHeap<(i64, i64)> = BinaryHeap::new();
    let mut time = 0;
    let mut next = 0;
    let mut bound = 0;
    while next < jobs.len() || !ready.is_empty() {
        if ready.is_empty() {
            time = time.max(jobs[next].0);
        }
        while next < jobs.len() && jobs[next].0 <= time {
            ready.push((jobs[next].2, jobs[next].1));
            next += 1;
        }
        let (tail, left) = ready.pop().expect("a released job");
        let horizon = jobs.get(next).map_or(i64::MAX, |j| j.0);
        let run = left.min(horizon - time);
        time += run;
        if run == left {
            bound = bound.max(time + tail);
        } else {
            ready.push((tail, left - run));
        }
    }
    bound
}

// ---- verification -------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("schedule has {got} start times for {expected} tasks")]
    TaskCount { expected: usize, got: usize },
    #[error("negative start for {demand} on {link}")]
    NegativeStart { demand: String, link: String },
    #[error("precedence violated for {demand} on {link}")]
    Precedence { demand: String, link: String },
    #[error("unary overlap on {link}")]
    UnaryOverlap { link: String },
    #[error("capacity exceeded at {site}")]
    CapacityExceeded { site: String },
    #[error("makespan {reported} differs from actual {actual}")]
    Makespan { reported: String, actual: String },
}

/// Re-checks precedences, link exclusivity, storage capacity and the
/// makespan of `schedule`. Written independently of the search code.
pub fn verify_schedule(
    problem: &ScheduleProblem,
    schedule: &Schedule,
) -> Result<(), Vec<Violation>> {
    let tasks = &problem.tasks;
    if schedule.starts.len() != tasks.len() {
        return Err(vec![Violation::TaskCount {
            expected: tasks.len(),
            got: schedule.starts.len(),
        }]);
    }
    let start = |i: usize| schedule.starts[i];
    let end = |i: usize| schedule.starts[i] + tasks[i].duration;
    let mut violations = Vec::new();

    for (i, task) in tasks.iter().enumerate() {
        if start(i) < Rational::default() {
            violations.push(Violation::NegativeStart {
                demand: task.demand.clone(),
                link: task.link.clone(),
            });
        }
        if let Some(p) = task.predecessor {
            if end(p) > start(i) {
                violations.push(Violation::Precedence {
                    demand: task.demand.clone(),
                    link: task.link.clone(),
                });
            }
        }
    }

    for (r, link) in problem.links.iter().enumerate() {
        let mut on: Vec<usize> = (0..tasks.len())
            .filter(|&i| tasks[i].resource == r)
            .collect();
        on.sort_by_key(|&i| start(i));
        if on.windows(2).any(|w| end(w[0]) > start(w[1])) {
            violations.push(Violation::UnaryOverlap { link: link.clone() });
        }
    }

    for (r, store) in problem.storage.iter().enumerate() {
        let spans: Vec<(Rational, Rational, Rational)> = problem
            .occupancies
            .iter()
            .filter(|o| o.resource == r)
            .map(|o| (start(o.incoming), end(o.outgoing), o.usage))
            .collect();
        let exceeded = spans.iter().any(|&(at, _, _)| {
            let load: Rational = spans
                .iter()
                .filter(|&&(s, e, _)| s <= at && at < e)
                .map(|&(_, _, u)| u)
                .sum();
            load > store.capacity
        });
        if exceeded {
            violations.push(Violation::CapacityExceeded {
                site: store.site.clone(),
            });
        }
    }

    let actual = problem.makespan_of(&schedule.starts);
    if actual != schedule.makespan {
        violations.push(Violation::Makespan {
            reported: format_rational(&schedule.makespan),
            actual: format_rational(&actual),
        });
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::load_network;
    use crate::plan::Route;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn d1(capacity_m: Option<i64>) -> Network {
        let m = match capacity_m {
            Some(c) => format!(r#"{{"id":"M","storage_capacity":{c}}}"#),
            None => r#"{"id":"M"}"#.to_string(),
        };
        load_network(&format!(
            r#"{{"sites":[{{"id":"S"}},{m},{{"id":"T"}}],"links":[
            {{"id":"S-M","from":"S","to":"M","weight":2}},
            {{"id":"M-T","from":"M","to":"T","weight":2}},
            {{"id":"S-T","from":"S","to":"T","weight":5}}]}}"#
        ))
        .unwrap()
    }

    fn plan(routes: &[(&str, &[&str])]) -> Plan {
        Plan {
            destination: "T".into(),
            routes: routes
                .iter()
                .map(|(d, links)| Route {
                    demand: d.to_string(),
                    size: q(1),
                    origin: "S".into(),
                    links: links.iter().map(|s| s.to_string()).collect(),
                })
                .collect(),
        }
    }

    const VIA_M: &[&str] = &["S-M", "M-T"];
    const DIRECT: &[&str] = &["S-T"];

    #[test]
    fn builds_chains() {
        let net = d1(None);
        let p = build_problem(&net, &plan(&[("f", VIA_M)])).unwrap();
        assert_eq!(p.tasks.len(), 2);
        assert_eq!(p.tasks[1].predecessor, Some(0));
        assert_eq!((p.tasks[0].duration, p.tasks[1].duration), (q(2), q(2)));
        assert!(p.occupancies.is_empty());

        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", DIRECT)])).unwrap();
        assert_eq!(p.tasks.len(), 3);
        assert_eq!(p.links, ["S-M", "M-T", "S-T"]);
        assert_eq!(p.tasks[2].predecessor, None);
    }

    #[test]
    fn storage_adds_occupancies() {
        let net = d1(Some(1));
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", VIA_M)])).unwrap();
        assert_eq!(p.storage.len(), 1);
        assert_eq!(p.occupancies.len(), 2);
        assert!(p.occupancies.iter().all(|o| o.usage == q(1)));
    }

    #[test]
    fn unknown_link_is_rejected() {
        let net = d1(None);
        assert_eq!(
            build_problem(&net, &plan(&[("f", &["S-X"])])),
            Err(ScheduleError::UnknownLink("S-X".into()))
        );
    }

    #[test]
    fn greedy_examples() {
        let net = d1(None);
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", VIA_M)])).unwrap();
        let s = greedy_schedule(&p).unwrap();
        assert_eq!(s.starts, [q(0), q(2), q(2), q(4)]);
        assert_eq!(s.makespan, q(6));
        verify_schedule(&p, &s).unwrap();

        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", DIRECT)])).unwrap();
        assert_eq!(greedy_schedule(&p).unwrap().makespan, q(5));

        let p = build_problem(&net, &plan(&[("f", DIRECT)])).unwrap();
        let s = greedy_schedule(&p).unwrap();
        assert_eq!((s.starts[0], s.makespan), (q(0), q(5)));
    }

    #[test]
    fn greedy_rejects_oversized_file() {
        let net = d1(Some(1));
        let mut pl = plan(&[("f", VIA_M)]);
        pl.routes[0].size = q(2);
        let p = build_problem(&net, &pl).unwrap();
        assert!(matches!(
            greedy_schedule(&p),
            Err(ScheduleError::DemandExceedsCapacity { .. })
        ));
    }

    #[test]
    fn optimal_examples() {
        let net = d1(None);
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", VIA_M)])).unwrap();
        let s = optimal_schedule(&p, Some(q(7))).unwrap();
        assert_eq!(s.makespan, q(6));
        verify_schedule(&p, &s).unwrap();
        assert_eq!(optimal_schedule(&p, Some(q(6))), None);

        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", DIRECT)])).unwrap();
        assert_eq!(optimal_schedule(&p, None).unwrap().makespan, q(5));
    }

    #[test]
    fn storage_delays_second_file() {
        let net = d1(Some(1));
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", VIA_M)])).unwrap();
        let g = greedy_schedule(&p).unwrap();
        verify_schedule(&p, &g).unwrap();
        let s = optimal_schedule(&p, None).unwrap();
        verify_schedule(&p, &s).unwrap();
        // f2 may only enter M once f1 has left at 4: 4 + 2 + 2.
        assert_eq!(s.makespan, q(8));
        assert_eq!(g.makespan, q(8));
    }

    #[test]
    fn verifier_reports_overlap_and_capacity() {
        let net = d1(Some(1));
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", VIA_M)])).unwrap();
        let bad = Schedule {
            starts: vec![q(0), q(2), q(1), q(4)],
            makespan: q(6),
        };
        let errs = verify_schedule(&p, &bad).unwrap_err();
        let text: Vec<String> = errs.iter().map(|e| e.to_string()).collect();
        assert!(
            text.contains(&"unary overlap on S-M".to_string()),
            "{text:?}"
        );
        assert!(
            text.contains(&"capacity exceeded at M".to_string()),
            "{text:?}"
        );
    }

    #[test]
    fn verifier_checks_precedence_and_makespan() {
        let net = d1(None);
        let p = build_problem(&net, &plan(&[("f", VIA_M)])).unwrap();
        let bad = Schedule {
            starts: vec![q(0), q(1)],
            makespan: q(4),
        };
        let errs = verify_schedule(&p, &bad).unwrap_err();
        assert!(matches!(errs[0], Violation::Precedence { .. }));
        assert!(matches!(errs[1], Violation::Makespan { .. }));
    }

    #[test]
    fn csv_export() {
        let net = d1(None);
        let p = build_problem(&net, &plan(&[("f1", VIA_M), ("f2", DIRECT)])).unwrap();
        let s = optimal_schedule(&p, None).unwrap();
        assert_eq!(
            s.to_csv(&p),
            "demand,link,start,end\nf1,S-M,0,2\nf2,S-T,0,5\nf1,M-T,2,4\n# makespan 5\n"
        );
    }

    mod props {
        use super::super::*;
        use crate::oracle::oracle_schedule;
        use proptest::prelude::*;

        /// Chains of (link, duration) plus optional storage at one site.
        fn problem() -> impl Strategy<Value = ScheduleProblem> {
            let chain = prop::collection::vec((0usize..3, 1i64..5), 1..4);
            (
                prop::collection::vec(chain, 1..4),
                prop::option::of((1i64..3, prop::collection::vec(1i64..3, 3))),
            )
                .prop_map(|(chains, storage)| {
                    let mut p = ScheduleProblem {
                        links: vec!["a".into(), "b".into(), "c".into()],
                        ..Default::default()
                    };
                    if let Some((cap, _)) = storage {
                        p.storage.push(StorageResource {
                            site: "M".into(),
                            capacity: Rational::from_integer(cap),
                        });
                    }
                    let mut total = 0;
                    for (d, chain) in chains.iter().enumerate() {
                        for (k, &(link, dur)) in chain.iter().enumerate() {
                            if total == 8 {
                                break;
                            }
                            total += 1;
                            let ix = p.tasks.len();
                            let pred = (k > 0).then(|| ix - 1);
                            if let Some(pr) = pred {
                                p.tasks[pr].successor = Some(ix);
                                if let Some((_, usage)) = &storage {
                                    if k == 1 {
                                        p.occupancies.push(Occupancy {
                                            resource: 0,
                                            demand: format!("d{d}"),
                                            incoming: pr,
                                            outgoing: ix,
                                            usage: Rational::from_integer(usage[d]),
                                        });
                                    }
                                }
                            }
                            p.tasks.push(Task {
                                demand: format!("d{d}"),
                                link: p.links[link].clone(),
                                duration: Rational::from_integer(dur),
                                size: Rational::from_integer(1),
                                predecessor: pred,
                                successor: None,
                                resource: link,
                            });
                        }
                    }
                    p
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(300))]

            #[test]
            fn optimum_matches_oracle(p in problem()) {
                let expected = oracle_schedule(&p).unwrap();
                let got = optimal_schedule(&p, None);
                prop_assert_eq!(got.as_ref().map(|s| s.makespan), expected);
                if let Some(s) = &got {
                    prop_assert_eq!(verify_schedule(&p, s), Ok(()));
                    prop_assert!(lower_bound(&p) <= s.makespan);
                }
            }

            #[test]
            fn greedy_is_feasible_and_no_better(p in problem()) {
                match greedy_schedule(&p) {
                    Ok(g) => {
                        prop_assert_eq!(verify_schedule(&p, &g), Ok(()));
                        let opt = optimal_schedule(&p, None).unwrap();
                        prop_assert!(g.makespan >= opt.makespan);
                        prop_assert_eq!(optimal_schedule(&p, Some(opt.makespan)), None);
                    }
                    Err(ScheduleError::DemandExceedsCapacity { .. }) => {
                        prop_assert_eq!(optimal_schedule(&p, None), None);
                    }
                    Err(e) => prop_assert!(false, "{e}"),
                }
            }

            #[test]
            fn ample_storage_changes_nothing(p in problem()) {
                let mut bare = p.clone();
                bare.storage.clear();
                bare.occupancies.clear();
                let mut roomy = p;
                let total: Rational = roomy.occupancies.iter().map(|o| o.usage).sum();
                for s in &mut roomy.storage {
                    s.capacity = total;
                }
                prop_assert_eq!(
                    optimal_schedule(&roomy, None).map(|s| s.makespan),
                    optimal_schedule(&bare, None).map(|s| s.makespan)
                );
            }
        }
    }
}
