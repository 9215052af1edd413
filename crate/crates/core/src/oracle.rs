//! Brute-force ground truth for small instances.
//!
//! Shares only the data model with the planner and scheduler: paths are
//! enumerated directly on the graph, link-only schedules by trying every
//! task order on every link, and schedules with storage limits by trying
//! every integer start time.

use num_integer::Integer;
use thiserror::Error;

use crate::netmodel::{LinkIx, Network, Request, SiteIx};
use crate::rational::Rational;
use crate::scheduler::ScheduleProblem;

pub const MAX_SITES: usize = 6;
pub const MAX_LINKS: usize = 10;
pub const MAX_DEMANDS: usize = 4;
/// Limits for the time-indexed search used when storage is finite.
const MAX_TIMED_TASKS: usize = 8;
const MAX_TIMED_HORIZON: i64 = 48;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle instance too large")]
    TooLarge,
    #[error("no feasible routing for demand {0}")]
    Unroutable(String),
    #[error("no feasible schedule")]
    Unschedulable,
}

/// One complete routing with its optimal makespan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OraclePlan {
    /// Per remaining demand (in request order): origin id and link ids.
    pub routes: Vec<(String, String, Vec<String>)>,
    pub makespan: Option<Rational>,
}

/// Optimal makespan over every routing and every schedule.
pub fn oracle_solve(network: &Network, request: &Request) -> Result<Rational, OracleError> {
    let inst = Instance::new(network, request)?;
    if inst.demands.is_empty() {
        return Ok(Rational::default());
    }
    let mut best: Option<i64> = None;
    for choice in inst.combinations() {
        let jobs = inst.jobs(&choice);
        if best.is_some_and(|b| jobs.trivial_bound() >= b) {
            continue;
        }
        if let Some(ms) = jobs.optimum(best)? {
            best = Some(ms);
        }
    }
    best.map(|b| Rational::new(b, inst.scale))
        .ok_or(OracleError::Unschedulable)
}

/// Every routing of the request with its own optimal makespan (`None`
/// when storage limits make it unschedulable).
pub fn oracle_plans(network: &Network, request: &Request) -> Result<Vec<OraclePlan>, OracleError> {
    let inst = Instance::new(network, request)?;
    let mut out = Vec::new();
    for choice in inst.combinations() {
        let jobs = inst.jobs(&choice);
        let makespan = jobs.optimum(None)?.map(|m| Rational::new(m, inst.scale));
        let routes = inst
            .demands
            .iter()
            .zip(&choice)
            .map(|(d, &k)| {
                let (origin, links) = &d.paths[k];
                (
                    d.id.clone(),
                    network.site(*origin).id.clone(),
                    links.iter().map(|&l| network.link(l).id.clone()).collect(),
                )
            })
            .collect();
        out.push(OraclePlan { routes, makespan });
    }
    Ok(out)
}

/// Optimal makespan of a fixed scheduling problem, if any schedule exists.
pub fn oracle_schedule(problem: &ScheduleProblem) -> Result<Option<Rational>, OracleError> {
    let scale = problem
        .tasks
        .iter()
        .fold(1i64, |acc, t| acc.lcm(t.duration.denom()));
    let usage_scale = problem
        .occupancies
        .iter()
        .map(|o| o.usage.denom())
        .chain(problem.storage.iter().map(|s| s.capacity.denom()))
        .fold(1i64, |acc, d| acc.lcm(d));
    let to_int = |r: &Rational, s: i64| (r * s).to_integer();
    let jobs = Jobs {
        dur: problem
            .tasks
            .iter()
            .map(|t| to_int(&t.duration, scale))
            .collect(),
        pred: problem.tasks.iter().map(|t| t.predecessor).collect(),
        resource: problem.tasks.iter().map(|t| t.resource).collect(),
        holds: problem
            .occupancies
            .iter()
            .map(|o| Hold {
                site: o.resource,
                first: o.incoming,
                last: o.outgoing,
                usage: to_int(&o.usage, usage_scale),
            })
            .collect(),
        capacity: problem
            .storage
            .iter()
            .map(|s| to_int(&s.capacity, usage_scale))
            .collect(),
    };
    Ok(jobs.optimum(None)?.map(|m| Rational::new(m, scale)))
}

struct OracleDemand {
    id: String,
    size: Rational,
    paths: Vec<(SiteIx, Vec<LinkIx>)>,
}

struct Instance<'a> {
    network: &'a Network,
    demands: Vec<OracleDemand>,
    scale: i64,
    usage_scale: i64,
}

impl<'a> Instance<'a> {
    fn new(network: &'a Network, request: &Request) -> Result<Self, OracleError> {
        if network.num_sites() > MAX_SITES
            || network.num_links() > MAX_LINKS
            || request.demands.len() > MAX_DEMANDS
        {
            return Err(OracleError::TooLarge);
        }
        let dest = network
            .site_index(&request.destination)
            .ok_or(OracleError::TooLarge)?;
        let mut demands = Vec::new();
        for d in &request.demands {
            if d.origins.contains(&request.destination) {
                continue;
            }
            let mut paths = Vec::new();
            for o in &d.origins {
                if let Some(origin) = network.site_index(o) {
                    simple_paths(
                        network,
                        origin,
                        dest,
                        &mut vec![origin],
                        &mut Vec::new(),
                        &mut |p| paths.push((origin, p.to_vec())),
                    );
                }
            }
            if paths.is_empty() {
                return Err(OracleError::Unroutable(d.id.clone()));
            }
            demands.push(OracleDemand {
                id: d.id.clone(),
                size: d.size,
                paths,
            });
        }
        let mut scale = 1i64;
        let mut usage_scale = 1i64;
        for d in &demands {
            usage_scale = usage_scale.lcm(d.size.denom());
            for l in network.links() {
                scale = scale.lcm((d.size * l.weight).denom());
            }
        }
        for s in network.sites() {
            if let Some(c) = s.storage_capacity {
                usage_scale = usage_scale.lcm(c.denom());
            }
        }
        Ok(Self {
            network,
            demands,
            scale,
            usage_scale,
        })
    }

    /// Every combination of one path index per demand.
    fn combinations(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for d in &self.demands {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d.paths.len()).map(move |k| {
                        let mut c = prefix.clone();
                        c.push(k);
                        c
                    })
                })
                .collect();
        }
        out
    }

    fn jobs(&self, choice: &[usize]) -> Jobs {
        let net = self.network;
        let mut jobs = Jobs::default();
        let mut sites = vec![None; net.num_sites()];
        for (d, &k) in self.demands.iter().zip(choice) {
            let (_, path) = &d.paths[k];
            for (pos, &l) in path.iter().enumerate() {
                let ix = jobs.dur.len();
                jobs.dur
                    .push((d.size * net.link(l).weight * self.scale).to_integer());
                jobs.pred.push((pos > 0).then(|| ix - 1));
                jobs.resource.push(l);
                if pos + 1 < path.len() {
                    let site = net.head(l);
                    if let Some(cap) = net.site(site).storage_capacity {
                        let slot = *sites[site].get_or_insert_with(|| {
                            jobs.capacity.push((cap * self.usage_scale).to_integer());
                            jobs.capacity.len() - 1
                        });
                        jobs.holds.push(Hold {
                            site: slot,
                            first: ix,
                            last: ix + 1,
                            usage: (d.size * self.usage_scale).to_integer(),
                        });
                    }
                }
            }
        }
        jobs
    }
}

/// Depth-first enumeration of simple paths from the last site of `sites`
/// to `dest`.
fn simple_paths(
    net: &Network,
    at: SiteIx,
    dest: SiteIx,
    sites: &mut Vec<SiteIx>,
    links: &mut Vec<LinkIx>,
    emit: &mut dyn FnMut(&[LinkIx]),
) {
    if at == dest {
        emit(links);
        return;
    }
    for &l in net.out_links(at) {
        let next = net.head(l);
        if sites.contains(&next) {
            continue;
        }
        sites.push(next);
        links.push(l);
        simple_paths(net, next, dest, sites, links, emit);
        links.pop();
        sites.pop();
    }
}

struct Hold {
    site: usize,
    first: usize,
    last: usize,
    usage: i64,
}

/// Integer task data; chains are stored with predecessors before successors.
#[derive(Default)]
struct Jobs {
    dur: Vec<i64>,
    pred: Vec<Option<usize>>,
    resource: Vec<usize>,
    holds: Vec<Hold>,
    capacity: Vec<i64>,
}

impl Jobs {
    fn len(&self) -> usize {
        self.dur.len()
    }

    fn trivial_bound(&self) -> i64 {
        let mut chain = vec![0; self.len()];
        let mut lb = 0;
        for i in 0..self.len() {
            chain[i] = self.pred[i].map_or(0, |p| chain[p]) + self.dur[i];
            lb = lb.max(chain[i]);
        }
        let mut load = std::collections::HashMap::new();
        for i in 0..self.len() {
            *load.entry(self.resource[i]).or_insert(0) += self.dur[i];
        }
        lb.max(load.values().copied().max().unwrap_or(0))
    }

    /// Optimal makespan strictly below `below`, if any.
    fn optimum(&self, below: Option<i64>) -> Result<Option<i64>, OracleError> {
        if self.holds.is_empty() {
            Ok(self.by_orders(below))
        } else {
            self.by_start_times(below)
        }
    }

    fn by_orders(&self, below: Option<i64>) -> Option<i64> {
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..self.len() {
            groups.entry(self.resource[i]).or_default().push(i);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().filter(|g| g.len() > 1).collect();
        let mut edges: Vec<(usize, usize)> = (0..self.len())
            .filter_map(|i| self.pred[i].map(|p| (p, i)))
            .collect();
        let mut best = below.unwrap_or(i64::MAX);
        let mut found = None;
        self.order_groups(&groups, &mut edges, &mut best, &mut found);
        found
    }

    fn order_groups(
        &self,
        groups: &[Vec<usize>],
        edges: &mut Vec<(usize, usize)>,
        best: &mut i64,
        found: &mut Option<i64>,
    ) {
        let Some(ms) = self.longest_path(edges) else {
            return;
        };
        if ms >= *best {
            return;
        }
        let Some((first, rest)) = groups.split_first() else {
            *best = ms;
            *found = Some(ms);
            return;
        };
        for order in permutations(first) {
            let before = edges.len();
            edges.extend(order.windows(2).map(|w| (w[0], w[1])));
            self.order_groups(rest, edges, best, found);
            edges.truncate(before);
        }
    }

    /// Makespan of the earliest-start schedule under `edges`, or `None`
    /// when they form a cycle.
    fn longest_path(&self, edges: &[(usize, usize)]) -> Option<i64> {
        let n = self.len();
        let mut start = vec![0i64; n];
        for _ in 0..=n {
            let mut changed = false;
            for &(a, b) in edges {
                if start[a] + self.dur[a] > start[b] {
                    start[b] = start[a] + self.dur[a];
                    changed = true;
                }
            }
            if !changed {
                return Some((0..n).map(|i| start[i] + self.dur[i]).max().unwrap_or(0));
            }
        }
        None
    }

    fn by_start_times(&self, below: Option<i64>) -> Result<Option<i64>, OracleError> {
        let horizon: i64 = self.dur.iter().sum();
        if self.len() > MAX_TIMED_TASKS || horizon > MAX_TIMED_HORIZON {
            return Err(OracleError::TooLarge);
        }
        let mut tail = vec![0; self.len()];
        for i in (0..self.len()).rev() {
            if let Some(p) = self.pred[i] {
                tail[p] = tail[p].max(tail[i] + self.dur[i]);
            }
        }
        let mut best = below.unwrap_or(i64::MAX).min(horizon + 1);
        let mut found = None;
        let mut start = vec![0i64; self.len()];
        self.place(0, &mut start, &tail, horizon, &mut best, &mut found);
        Ok(found)
    }

    fn place(
        &self,
        i: usize,
        start: &mut [i64],
        tail: &[i64],
        horizon: i64,
        best: &mut i64,
        found: &mut Option<i64>,
    ) {
        if i == self.len() {
            let ms = (0..i).map(|k| start[k] + self.dur[k]).max().unwrap_or(0);
            if ms < *best {
                *best = ms;
                *found = Some(ms);
            }
            return;
        }
        let release = self.pred[i].map_or(0, |p| start[p] + self.dur[p]);
        for s in release..=horizon - self.dur[i] {
            if s + self.dur[i] + tail[i] >= *best {
                break;
            }
            let clash = (0..i).any(|k| {
                self.resource[k] == self.resource[i]
                    && start[k] < s + self.dur[i]
                    && s < start[k] + self.dur[k]
            });
            if clash {
                continue;
            }
            start[i] = s;
            if self.storage_ok(i, start) {
                self.place(i + 1, start, tail, horizon, best, found);
            }
        }
    }

    /// Checks every site whose holds are fully timed once task `i` is set.
    fn storage_ok(&self, i: usize, start: &[i64]) -> bool {
        let spans: Vec<(usize, i64, i64, i64)> = self
            .holds
            .iter()
            .filter(|h| h.last <= i)
            .map(|h| {
                (
                    h.site,
                    start[h.first],
                    start[h.last] + self.dur[h.last],
                    h.usage,
                )
            })
            .collect();
        spans.iter().all(|&(site, at, _, _)| {
            let load: i64 = spans
                .iter()
                .filter(|&&(s, b, e, _)| s == site && b <= at && at < e)
                .map(|&(_, _, _, u)| u)
                .sum();
            load <= self.capacity[site]
        })
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for k in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
