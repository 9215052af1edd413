//! Greedy execution of a plan by per-link managers.
//!
//! A file waits at a site until the manager of the next link on its path
//! has a free stream, then moves. Managers serve waiting files in order of
//! arrival, ties by demand id. A transfer takes its nominal duration no
//! matter how many streams share the link.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::netmodel::{transfer_duration, Network, SiteIx};
use crate::plan::Plan;
use crate::rational::{to_f64, Rational};
use crate::transfer::{transfers_csv, Transfer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("plan references unknown link {0:?}")]
    UnknownLink(String),
    #[error("plan references unknown site {0:?}")]
    UnknownSite(String),
    #[error("stuck execution: {}", waiting.join(", "))]
    Stuck {
        /// `demand at site` for every file that cannot move.
        waiting: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecResult {
    pub makespan: Rational,
    /// Transfers in start order.
    pub transfers: Vec<Transfer>,
    /// Highest number of simultaneous transfers seen per used link.
    pub peak_streams: BTreeMap<String, u32>,
}

impl ExecResult {
    pub fn to_csv(&self) -> String {
        transfers_csv(&self.transfers, &self.makespan)
    }
}

struct Moving {
    demand: String,
    size: Rational,
    path: Vec<usize>,
    /// Index of the next link to take.
    next: usize,
    at: SiteIx,
    since: Rational,
    in_flight: bool,
}

/// Runs `plan` to completion. `seed` is accepted for interface symmetry
/// with the other simulators; execution is deterministic.
pub fn simulate_execution(
    network: &Network,
    plan: &Plan,
    seed: u64,
) -> Result<ExecResult, ExecError> {
    let _ = seed;
    let dest = network
        .site_index(&plan.destination)
        .ok_or_else(|| ExecError::UnknownSite(plan.destination.clone()))?;
    let mut files = Vec::new();
    for route in &plan.routes {
        let at = network
            .site_index(&route.origin)
            .ok_or_else(|| ExecError::UnknownSite(route.origin.clone()))?;
        let path = route
            .links
            .iter()
            .map(|id| {
                network
                    .link_index(id)
                    .ok_or_else(|| ExecError::UnknownLink(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        files.push(Moving {
            demand: route.demand.clone(),
            size: route.size,
            path,
            next: 0,
            at,
            since: Rational::default(),
            in_flight: false,
        });
    }

    let mut active = vec![0u32; network.num_links()];
    let mut peak = vec![0u32; network.num_links()];
    // (end, file) of transfers in progress.
    let mut running: Vec<(Rational, usize)> = Vec::new();
    let mut transfers = Vec::new();
    let mut now = Rational::default();
    let mut makespan = Rational::default();
    let done = |f: &Moving| f.at == dest && f.next == f.path.len();

    loop {
        let mut queue: Vec<usize> = (0..files.len())
            .filter(|&f| !files[f].in_flight && !done(&files[f]))
            .collect();
        queue.sort_by(|&a, &b| {
            files[a]
                .since
                .cmp(&files[b].since)
                .then_with(|| files[a].demand.cmp(&files[b].demand))
        });
        for f in queue {
            let file = &mut files[f];
            let Some(&link) = file.path.get(file.next) else {
                continue;
            };
            if network.tail(link) != file.at || active[link] >= network.link(link).max_streams {
                continue;
            }
            active[link] += 1;
            peak[link] = peak[link].max(active[link]);
            let end = now + transfer_duration(&file.size, network.link(link));
            file.in_flight = true;
            running.push((end, f));
            transfers.push(Transfer {
                demand: file.demand.clone(),
                link: network.link(link).id.clone(),
                start: now,
                end,
            });
        }

        let Some(&(next, _)) = running.iter().min() else {
            break;
        };
        now = next;
        running.retain(|&(end, f)| {
            if end != now {
                return true;
            }
            let file = &mut files[f];
            let link = file.path[file.next];
            active[link] -= 1;
            file.at = network.head(link);
            file.next += 1;
            file.since = now;
            file.in_flight = false;
            makespan = makespan.max(now);
            false
        });
    }

    let waiting: Vec<String> = files
        .iter()
        .filter(|f| !done(f))
        .map(|f| format!("{} at {}", f.demand, network.site(f.at).id))
        .collect();
    if !waiting.is_empty() {
        return Err(ExecError::Stuck { waiting });
    }
    let peak_streams = (0..network.num_links())
        .filter(|&l| peak[l] > 0)
        .map(|l| (network.link(l).id.clone(), peak[l]))
        .collect();
    Ok(ExecResult {
        makespan,
        transfers,
        peak_streams,
    })
}

/// Relative difference `|exec - schedule| / schedule`; infinite when the
/// schedule is empty but execution is not.
pub fn compare_makespans(schedule: &Rational, exec: &Rational) -> f64 {
    if *schedule == Rational::default() {
        return if *exec == Rational::default() {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let diff = if exec > schedule {
        exec - schedule
    } else {
        schedule - exec
    };
    to_f64(&(diff / schedule))
}
