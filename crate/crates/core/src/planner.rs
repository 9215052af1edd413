//! Link-based planning model.
//!
//! One 0/1 routing variable `X[d,e]` per demand and link says whether demand
//! `d` travels over link `e`; one start bound `P[d,e]` per pair carries the
//! earliest time that transfer could begin. Propagation runs to a fixpoint
//! of four rule families:
//!
//! * degree sums: exactly one selected link leaves the origin set and one
//!   enters the destination; intermediate sites carry at most one selected
//!   link in each direction, and as many in as out;
//! * start-bound chaining: a transfer cannot start before the cheapest
//!   still-possible transfer into its tail site has ended. Links whose tail
//!   cannot be reached from an origin over possible links are dropped;
//! * conditional precedence, implied by the two rules above once the in-link
//!   of a site is fixed;
//! * the per-link cut against the incumbent makespan: earliest start plus
//!   the load committed to the link plus the remaining shortest path must
//!   stay strictly below the bound.
//!
//! All times are integers counted in ticks of `1 / scale` time units, where
//! `scale` makes every duration and shortest-path term integral.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use log::trace;
use num_integer::Integer;
use thiserror::Error;

use crate::budget::Budget;
use crate::netmodel::{shortest_path_table, LinkIx, Network, NormalizedRequest, SiteIx};
use crate::plan::{Plan, Route};
use crate::rational::{ceil_ticks, exact_ticks, lcm_of_denoms, Rational};

const ZERO: u8 = 0b01;
const ONE: u8 = 0b10;
const BOTH: u8 = ZERO | ONE;

/// Variable-selection heuristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heuristic {
    /// Smallest transfer duration first.
    FastestLink,
    /// Smallest `lower(P) + duration + remaining shortest path` first.
    MinPath,
}

/// Value tried first at each decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ValueOrder {
    /// 0 first, then 1.
    Increasing,
    /// 1 first, then 0.
    #[default]
    Decreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchConfig {
    /// `None` selects unassigned variables in (demand id, link id) order.
    pub heuristic: Option<Heuristic>,
    pub value_order: ValueOrder,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("no feasible routing")]
    NoFeasibleRouting,
    #[error("loop detected in routing of demand {0}")]
    LoopDetected(String),
    #[error("routing of demand {0} is incomplete")]
    Incomplete(String),
}

/// Current domain of a routing variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Zero,
    One,
    Both,
}

/// Index of a routing variable: demand position and link index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarRef {
    pub demand: usize,
    pub link: LinkIx,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingVar {
    pub demand: String,
    pub link: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartBound {
    pub demand: String,
    pub link: String,
    pub lower: Rational,
    pub upper: Rational,
}

/// Result of one [`Planner::next_plan_within`] call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanOutcome {
    Plan(Plan),
    /// No further plan exists under the current bound.
    Exhausted,
    /// The budget ran out; calling again resumes where the search stopped.
    Interrupted,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PlannerStats {
    pub decisions: u64,
    pub failures: u64,
    pub plans: u64,
}

#[derive(Debug, Clone, Copy)]
enum Undo {
    Dom(u32, u8),
    Lower(u32, i64),
}

#[derive(Debug, Clone, Copy)]
struct Frame {
    var: usize,
    value: u8,
    alt_done: bool,
    mark: usize,
}

/// Search state of the planning model.
pub struct Planner<'a> {
    net: &'a Network,
    req: &'a NormalizedRequest,
    config: SearchConfig,
    num_links: usize,
    dest: SiteIx,
    scale: i64,
    is_origin: Vec<bool>,
    size_ticks: Vec<i64>,
    sp_ticks: Vec<Option<i64>>,
    dur: Vec<i64>,
    horizon: i64,
    bound: Option<i64>,
    dom: Vec<u8>,
    lower: Vec<i64>,
    trail: Vec<Undo>,
    stack: Vec<Frame>,
    dirty: Vec<usize>,
    in_dirty: Vec<bool>,
    settled: Vec<bool>,
    scratch: Vec<LinkIx>,
    heap: BinaryHeap<Reverse<(i64, LinkIx)>>,
    resume: bool,
    exhausted: bool,
    stats: PlannerStats,
}

impl<'a> Planner<'a> {
    /// Creates the model for `request` and propagates it. `makespan_bound`
    /// (strict, `None` for unbounded) activates the cut.
    pub fn new(
        net: &'a Network,
        req: &'a NormalizedRequest,
        makespan_bound: Option<Rational>,
        config: SearchConfig,
    ) -> Result<Self, PlannerError> {
        let nd = req.demands.len();
        let ne = net.num_links();
        let ns = net.num_sites();
        let dest = req.destination;

        let size_scale = lcm_of_denoms(req.demands.iter().map(|d| &d.size));
        let weight_scale = lcm_of_denoms(net.links().iter().map(|l| &l.weight));
        let scale = size_scale * weight_scale;
        let size_ticks: Vec<i64> = req
            .demands
            .iter()
            .map(|d| exact_ticks(&d.size, size_scale))
            .collect();
        let weight_ticks: Vec<i64> = net
            .links()
            .iter()
            .map(|l| exact_ticks(&l.weight, weight_scale))
            .collect();
        let sp = shortest_path_table(net, dest);
        let sp_ticks = (0..ne)
            .map(|e| sp.link(e).map(|v| exact_ticks(&v, weight_scale)))
            .collect();

        let mut is_origin = vec![false; nd * ns];
        let mut dur = vec![0; nd * ne];
        for (d, demand) in req.demands.iter().enumerate() {
            for &o in &demand.origins {
                is_origin[d * ns + o] = true;
            }
            for e in 0..ne {
                dur[d * ne + e] = size_ticks[d] * weight_ticks[e];
            }
        }
        // Moving every file one after another over every link is an upper
        // bound on any schedule of any plan.
        let total_weight: i64 = weight_ticks.iter().sum();
        let horizon = size_ticks.iter().fold(0i64, |acc, s| {
            acc.saturating_add(s.saturating_mul(total_weight))
        });

        let mut planner = Self {
            net,
            req,
            config,
            num_links: ne,
            dest,
            scale,
            is_origin,
            size_ticks,
            sp_ticks,
            dur,
            horizon,
            bound: None,
            dom: vec![BOTH; nd * ne],
            lower: vec![0; nd * ne],
            trail: Vec::new(),
            stack: Vec::new(),
            dirty: Vec::new(),
            in_dirty: vec![false; nd],
            settled: vec![false; ns],
            scratch: Vec::new(),
            heap: BinaryHeap::new(),
            resume: false,
            exhausted: false,
            stats: PlannerStats::default(),
        };
        planner.fix_structural_zeros();
        for d in 0..nd {
            planner.mark_dirty(d);
        }
        if !planner.propagate() {
            return Err(PlannerError::NoFeasibleRouting);
        }
        if let Some(bound) = makespan_bound {
            let mark = planner.trail.len();
            planner.set_bound(bound);
            if !planner.propagate() {
                planner.undo_to(mark);
                planner.exhausted = true;
            }
        }
        planner.trail.clear();
        Ok(planner)
    }

    /// Zeros that hold for every plan: nothing enters an origin or leaves
    /// the destination, nothing uses a link that cannot reach the
    /// destination, and no file transits a site too small to hold it.
    fn fix_structural_zeros(&mut self) {
        let ns = self.net.num_sites();
        for d in 0..self.req.demands.len() {
            let size = self.req.demands[d].size;
            for e in 0..self.num_links {
                let head = self.net.head(e);
                let tail = self.net.tail(e);
                let transit_too_small = head != self.dest
                    && !self.is_origin[d * ns + head]
                    && self
                        .net
                        .site(head)
                        .storage_capacity
                        .is_some_and(|c| c < size);
                if self.is_origin[d * ns + head]
                    || tail == self.dest
                    || self.sp_ticks[e].is_none()
                    || transit_too_small
                {
                    self.dom[d * self.num_links + e] = ZERO;
                }
            }
        }
    }

    pub fn config(&self) -> SearchConfig {
        self.config
    }

    pub fn stats(&self) -> PlannerStats {
        self.stats
    }

    /// Tightens (or sets) the strict makespan bound used by the cut. Takes
    /// effect at the next propagation.
    pub fn set_bound(&mut self, bound: Rational) {
        let ticks = ceil_ticks(&bound, self.scale);
        self.bound = Some(self.bound.map_or(ticks, |b| b.min(ticks)));
    }

    pub fn bound(&self) -> Option<Rational> {
        self.bound.map(|b| self.to_time(b))
    }

    pub fn horizon(&self) -> Rational {
        self.to_time(self.horizon)
    }

    fn to_time(&self, ticks: i64) -> Rational {
        Rational::new(ticks, self.scale)
    }

    fn var(&self, d: usize, e: LinkIx) -> usize {
        d * self.num_links + e
    }

    fn var_ref(&self, var: usize) -> VarRef {
        let (demand, link) = var.div_rem(&self.num_links);
        VarRef { demand, link }
    }

    fn is_origin(&self, d: usize, site: SiteIx) -> bool {
        self.is_origin[d * self.net.num_sites() + site]
    }

    /// Resolves `(demand id, link id)` to a variable reference.
    pub fn lookup(&self, demand: &str, link: &str) -> Option<VarRef> {
        let d = self.req.demands.iter().position(|x| x.id == demand)?;
        let e = self.net.link_index(link)?;
        Some(VarRef { demand: d, link: e })
    }

    pub fn domain(&self, v: VarRef) -> Domain {
        match self.dom[self.var(v.demand, v.link)] {
            ZERO => Domain::Zero,
            ONE => Domain::One,
            _ => Domain::Both,
        }
    }

    pub fn routing_var(&self, v: VarRef) -> RoutingVar {
        RoutingVar {
            demand: self.req.demands[v.demand].id.clone(),
            link: self.net.link(v.link).id.clone(),
            domain: self.domain(v),
        }
    }

    pub fn start_bound(&self, v: VarRef) -> StartBound {
        StartBound {
            demand: self.req.demands[v.demand].id.clone(),
            link: self.net.link(v.link).id.clone(),
            lower: self.to_time(self.lower[self.var(v.demand, v.link)]),
            upper: self.to_time(self.horizon),
        }
    }

    /// Exact copy of every domain and start bound, for restore checks.
    pub fn snapshot(&self) -> (Vec<u8>, Vec<i64>) {
        (self.dom.clone(), self.lower.clone())
    }

    pub fn unassigned(&self) -> Vec<VarRef> {
        (0..self.dom.len())
            .filter(|&v| self.dom[v] == BOTH)
            .map(|v| self.var_ref(v))
            .collect()
    }

    /// True once no further plan exists under the current bound.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn depth(&self) -> usize {
        self.stack.len()
    }

    // ---- trail ----------------------------------------------------------

    fn mark_dirty(&mut self, d: usize) {
        if !self.in_dirty[d] {
            self.in_dirty[d] = true;
            self.dirty.push(d);
        }
    }

    /// Narrows `var` to `dom & keep`. Returns `false` on a wipe-out.
    fn restrict(&mut self, var: usize, keep: u8) -> bool {
        let old = self.dom[var];
        let new = old & keep;
        if new == old {
            return true;
        }
        if new == 0 {
            return false;
        }
        self.trail.push(Undo::Dom(var as u32, old));
        self.dom[var] = new;
        true
    }

    fn raise_lower(&mut self, var: usize, value: i64) {
        let old = self.lower[var];
        if value > old {
            self.trail.push(Undo::Lower(var as u32, old));
            self.lower[var] = value;
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail entry") {
                Undo::Dom(v, old) => self.dom[v as usize] = old,
                Undo::Lower(v, old) => self.lower[v as usize] = old,
            }
        }
    }

    // ---- propagation ----------------------------------------------------

    /// Runs all rules to a fixpoint. Returns `false` if the state is
    /// infeasible.
    pub fn propagate(&mut self) -> bool {
        loop {
            while let Some(d) = self.dirty.pop() {
                self.in_dirty[d] = false;
                if !self.propagate_demand(d) {
                    self.clear_dirty();
                    return false;
                }
            }
            match self.propagate_cut() {
                None => {
                    self.clear_dirty();
                    return false;
                }
                Some(false) => return true,
                Some(true) => {}
            }
        }
    }

    fn clear_dirty(&mut self) {
        for d in self.dirty.drain(..) {
            self.in_dirty[d] = false;
        }
    }

    fn propagate_demand(&mut self, d: usize) -> bool {
        loop {
            let before = self.trail.len();
            if !self.propagate_degrees(d) || !self.propagate_starts(d) {
                return false;
            }
            if self.trail.len() == before {
                return true;
            }
        }
    }

    /// Degree-sum filtering for one demand.
    fn propagate_degrees(&mut self, d: usize) -> bool {
        let net = self.net;
        let mut group = std::mem::take(&mut self.scratch);
        group.clear();
        for &o in &self.req.demands[d].origins {
            group.extend_from_slice(net.out_links(o));
        }
        let ok = self.exactly_one(d, &group) && self.exactly_one(d, net.in_links(self.dest));
        self.scratch = group;
        if !ok {
            return false;
        }

        for n in 0..net.num_sites() {
            if n == self.dest || self.is_origin(d, n) {
                continue;
            }
            let ins = net.in_links(n);
            let outs = net.out_links(n);
            let (in_ones, in_poss) = self.count(d, ins);
            let (out_ones, out_poss) = self.count(d, outs);
            if in_ones > 1 || out_ones > 1 {
                return false;
            }
            if in_poss == 0 && !self.clear_all(d, outs) {
                return false;
            }
            if out_poss == 0 && !self.clear_all(d, ins) {
                return false;
            }
            let used = in_ones == 1 || out_ones == 1;
            if used && !(self.exactly_one(d, ins) && self.exactly_one(d, outs)) {
                return false;
            }
        }
        true
    }

    /// (number fixed to 1, number that may still be 1)
    fn count(&self, d: usize, links: &[LinkIx]) -> (usize, usize) {
        links.iter().fold((0, 0), |(ones, poss), &e| {
            let dom = self.dom[self.var(d, e)];
            (
                ones + usize::from(dom == ONE),
                poss + usize::from(dom & ONE != 0),
            )
        })
    }

    fn clear_all(&mut self, d: usize, links: &[LinkIx]) -> bool {
        links.iter().all(|&e| {
            let v = self.var(d, e);
            self.restrict(v, ZERO)
        })
    }

    fn exactly_one(&mut self, d: usize, links: &[LinkIx]) -> bool {
        let (ones, poss) = self.count(d, links);
        match (ones, poss) {
            (0, 0) => false,
            (0, 1) => {
                let e = *links
                    .iter()
                    .find(|&&e| self.dom[self.var(d, e)] & ONE != 0)
                    .expect("one candidate");
                let v = self.var(d, e);
                self.restrict(v, ONE)
            }
            (0, _) => true,
            (1, _) => links.iter().all(|&e| {
                let v = self.var(d, e);
                self.dom[v] == ONE || self.restrict(v, ZERO)
            }),
            _ => false,
        }
    }

    /// Earliest-start chaining for one demand. Settles sites in order of
    /// the earliest time the file can be there, raising start bounds of
    /// outgoing links along the way; links whose tail is never reached can
    /// carry no part of a path.
    fn propagate_starts(&mut self, d: usize) -> bool {
        let net = self.net;
        self.settled.iter_mut().for_each(|s| *s = false);
        self.heap.clear();
        for &o in &self.req.demands[d].origins {
            self.settled[o] = true;
            for &e in net.out_links(o) {
                let v = self.var(d, e);
                if self.dom[v] & ONE != 0 {
                    self.heap.push(Reverse((self.lower[v] + self.dur[v], e)));
                }
            }
        }
        while let Some(Reverse((arrival, f))) = self.heap.pop() {
            let n = net.head(f);
            if self.settled[n] {
                continue;
            }
            self.settled[n] = true;
            if n == self.dest {
                continue;
            }
            for &e in net.out_links(n) {
                let v = self.var(d, e);
                if self.dom[v] & ONE == 0 {
                    continue;
                }
                self.raise_lower(v, arrival);
                self.heap.push(Reverse((self.lower[v] + self.dur[v], e)));
            }
        }
        for e in 0..self.num_links {
            let v = self.var(d, e);
            if self.dom[v] & ONE == 0 {
                continue;
            }
            let unreachable = !self.settled[net.tail(e)];
            let late = self.lower[v] + self.dur[v] > self.horizon;
            if (unreachable || late) && !self.restrict(v, ZERO) {
                return false;
            }
        }
        true
    }

    /// Per-link cut against the strict makespan bound. `None` on failure,
    /// otherwise whether any domain changed.
    fn propagate_cut(&mut self) -> Option<bool> {
        let Some(bound) = self.bound else {
            return Some(false);
        };
        let nd = self.req.demands.len();
        let mut changed = false;
        for e in 0..self.num_links {
            let Some(sp) = self.sp_ticks[e] else { continue };
            let mut candidates = 0;
            let mut min_start = i64::MAX;
            let mut min_size = i64::MAX;
            let mut committed = 0i64;
            for d in 0..nd {
                let v = self.var(d, e);
                let dom = self.dom[v];
                if dom & ONE == 0 {
                    continue;
                }
                candidates += 1;
                min_start = min_start.min(self.lower[v]);
                min_size = min_size.min(self.size_ticks[d]);
                if dom == ONE {
                    committed += self.dur[v];
                }
            }
            if candidates == 0 {
                continue;
            }
            let base = min_start + committed + sp * min_size;
            if committed > 0 && base >= bound {
                return None;
            }
            for d in 0..nd {
                let v = self.var(d, e);
                if self.dom[v] == BOTH && base + self.dur[v] >= bound {
                    self.restrict(v, ZERO);
                    self.mark_dirty(d);
                    changed = true;
                }
            }
        }
        Some(changed)
    }

    // ---- search ---------------------------------------------------------

    /// Picks the next decision variable, or `None` when all are assigned.
    pub fn select_variable(&self, heuristic: Option<Heuristic>) -> Option<VarRef> {
        let free = (0..self.dom.len()).filter(|&v| self.dom[v] == BOTH);
        let best = match heuristic {
            None => free.min(),
            Some(Heuristic::FastestLink) => free.min_by_key(|&v| (self.dur[v], v)),
            Some(Heuristic::MinPath) => free.min_by_key(|&v| (self.min_path_score(v), v)),
        };
        best.map(|v| self.var_ref(v))
    }

    fn min_path_score(&self, v: usize) -> i64 {
        let VarRef { demand, link } = self.var_ref(v);
        let sp = self.sp_ticks[link].unwrap_or(i64::MAX / 4);
        self.lower[v] + self.dur[v] + sp * self.size_ticks[demand]
    }

    /// Opens a decision level, assigns `value` and propagates. On failure
    /// the level is left open; undo it with [`Planner::undo_decision`].
    /// Always fails on an exhausted planner.
    pub fn decide(&mut self, v: VarRef, value: bool) -> bool {
        let var = self.var(v.demand, v.link);
        let bit = if value { ONE } else { ZERO };
        self.stack.push(Frame {
            var,
            value: bit,
            alt_done: true,
            mark: self.trail.len(),
        });
        !self.exhausted && self.assign(var, bit)
    }

    /// Closes the innermost decision level and restores the state it saw.
    pub fn undo_decision(&mut self) -> bool {
        match self.stack.pop() {
            Some(frame) => {
                self.undo_to(frame.mark);
                self.clear_dirty();
                true
            }
            None => false,
        }
    }

    fn assign(&mut self, var: usize, bit: u8) -> bool {
        self.stats.decisions += 1;
        let d = var / self.num_links;
        if !self.restrict(var, bit) {
            return false;
        }
        self.mark_dirty(d);
        self.propagate()
    }

    /// Returns the next plan under the current bound, or `None` once the
    /// search tree is exhausted.
    pub fn next_plan(&mut self) -> Option<Plan> {
        match self.next_plan_within(&mut Budget::unlimited()) {
            PlanOutcome::Plan(p) => Some(p),
            _ => None,
        }
    }

    /// Depth-first search with chronological backtracking. Each call
    /// resumes after the previously returned plan.
    pub fn next_plan_within(&mut self, budget: &mut Budget) -> PlanOutcome {
        if self.exhausted {
            return PlanOutcome::Exhausted;
        }
        if std::mem::take(&mut self.resume) && !self.backtrack() {
            self.exhausted = true;
            return PlanOutcome::Exhausted;
        }
        loop {
            if !budget.tick() {
                return PlanOutcome::Interrupted;
            }
            let Some(v) = self.select_variable(self.config.heuristic) else {
                let plan = self
                    .extract_paths()
                    .expect("propagation admits only simple paths");
                self.resume = true;
                self.stats.plans += 1;
                return PlanOutcome::Plan(plan);
            };
            let var = self.var(v.demand, v.link);
            let value = match self.config.value_order {
                ValueOrder::Increasing => ZERO,
                ValueOrder::Decreasing => ONE,
            };
            self.stack.push(Frame {
                var,
                value,
                alt_done: false,
                mark: self.trail.len(),
            });
            trace!(
                "depth {} x[{},{}] := {} bound {:?}",
                self.stack.len(),
                self.req.demands[v.demand].id,
                self.net.link(v.link).id,
                u8::from(value == ONE),
                self.bound
            );
            if !self.assign(var, value) && !self.backtrack() {
                self.exhausted = true;
                return PlanOutcome::Exhausted;
            }
        }
    }

    /// Undoes decisions until an untried alternative propagates. Returns
    /// `false` when none is left.
    fn backtrack(&mut self) -> bool {
        self.stats.failures += 1;
        while let Some(frame) = self.stack.pop() {
            self.undo_to(frame.mark);
            self.clear_dirty();
            if frame.alt_done {
                continue;
            }
            let value = frame.value ^ BOTH;
            self.stack.push(Frame {
                value,
                alt_done: true,
                ..frame
            });
            trace!(
                "depth {} retry with {}",
                self.stack.len(),
                u8::from(value == ONE)
            );
            if self.assign(frame.var, value) {
                return true;
            }
        }
        false
    }

    /// Reads the plan out of a fully assigned state, walking each demand's
    /// selected links from its origin to the destination.
    pub fn extract_paths(&self) -> Result<Plan, PlannerError> {
        let net = self.net;
        let mut routes = Vec::with_capacity(self.req.demands.len());
        for (d, demand) in self.req.demands.iter().enumerate() {
            let row = &self.dom[d * self.num_links..(d + 1) * self.num_links];
            if row.contains(&BOTH) {
                return Err(PlannerError::Incomplete(demand.id.clone()));
            }
            let selected = row.iter().filter(|&&x| x == ONE).count();
            let mut starts = demand.origins.iter().flat_map(|&o| {
                net.out_links(o)
                    .iter()
                    .copied()
                    .filter(|&e| row[e] == ONE)
                    .map(move |e| (o, e))
            });
            let Some((origin, first)) = starts.next() else {
                return Err(PlannerError::Incomplete(demand.id.clone()));
            };
            if starts.next().is_some() {
                return Err(PlannerError::LoopDetected(demand.id.clone()));
            }

            let mut links = vec![net.link(first).id.clone()];
            let mut at = net.head(first);
            let mut visited = vec![false; net.num_sites()];
            visited[origin] = true;
            while at != self.dest {
                if std::mem::replace(&mut visited[at], true) {
                    return Err(PlannerError::LoopDetected(demand.id.clone()));
                }
                let next = net.out_links(at).iter().copied().find(|&e| row[e] == ONE);
                let Some(e) = next else {
                    return Err(PlannerError::Incomplete(demand.id.clone()));
                };
                links.push(net.link(e).id.clone());
                at = net.head(e);
            }
            if links.len() != selected {
                return Err(PlannerError::LoopDetected(demand.id.clone()));
            }
            routes.push(Route {
                demand: demand.id.clone(),
                size: demand.size,
                origin: net.site(origin).id.clone(),
                links,
            });
        }
        Ok(Plan {
            destination: net.site(self.dest).id.clone(),
            routes,
        })
    }

    #[cfg(test)]
    pub(crate) fn force_domain(&mut self, v: VarRef, domain: Domain) {
        let var = self.var(v.demand, v.link);
        self.dom[var] = match domain {
            Domain::Zero => ZERO,
            Domain::One => ONE,
            Domain::Both => BOTH,
        };
    }
}
