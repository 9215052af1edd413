//! Routing-independent lower bounds on the optimal makespan.
//!
//! Every file needs at least its shortest path time. Every file also ends
//! with exactly one transfer into the destination, and it cannot start that
//! transfer before it could possibly reach the link's tail. When all files
//! have the same size, the links into the destination are single machines
//! with identical processing times, and whether all files fit before a
//! deadline `T` reduces to a flow problem: the k-th last transfer on link
//! `e` must start by `T - k * p_e`.

use std::collections::VecDeque;

use num_integer::Integer;

use crate::netmodel::{shortest_path_table, Network, NormalizedRequest};
use crate::rational::Rational;

pub fn makespan_lower_bound(network: &Network, request: &NormalizedRequest) -> Rational {
    let Some(first) = request.demands.first() else {
        return Rational::default();
    };
    let dest = request.destination;
    let to_dest = shortest_path_table(network, dest);
    let mut bound = Rational::default();
    for d in &request.demands {
        if let Some(best) = d.origins.iter().filter_map(|&o| to_dest.site(o)).min() {
            bound = bound.max(d.size * best);
        }
    }
    if request.demands.iter().all(|d| d.size == first.size) {
        bound = bound.max(last_hop_bound(network, request, first.size));
    }
    bound
}

fn last_hop_bound(network: &Network, request: &NormalizedRequest, size: Rational) -> Rational {
    let dest = request.destination;
    let entries: Vec<usize> = network
        .in_links(dest)
        .iter()
        .copied()
        .filter(|&l| network.tail(l) != dest)
        .collect();
    if entries.is_empty() {
        return Rational::default();
    }
    let mut scale = size.denom().lcm(&1);
    for l in network.links() {
        scale = scale.lcm((size * l.weight).denom());
    }
    let ticks = |r: Rational| (r * scale).to_integer();
    let proc: Vec<i64> = entries
        .iter()
        .map(|&l| ticks(size * network.link(l).weight))
        .collect();

    // Earliest arrival of each file at each entry link's tail, grouped by
    // identical arrival vectors.
    let tables: Vec<_> = entries
        .iter()
        .map(|&l| shortest_path_table(network, network.tail(l)))
        .collect();
    let mut groups: Vec<(Vec<Option<i64>>, i64)> = Vec::new();
    for d in &request.demands {
        let release: Vec<Option<i64>> = tables
            .iter()
            .map(|t| {
                d.origins
                    .iter()
                    .filter_map(|&o| t.site(o))
                    .min()
                    .map(|r| ticks(r * size))
            })
            .collect();
        match groups.iter_mut().find(|(r, _)| *r == release) {
            Some((_, count)) => *count += 1,
            None => groups.push((release, 1)),
        }
    }
    let files = request.demands.len() as i64;

    let fits = |deadline: i64| {
        let mut flow = FlowGraph::new(2 + groups.len());
        let (source, sink) = (0, 1);
        for (g, (_, count)) in groups.iter().enumerate() {
            flow.add_edge(source, 2 + g, *count);
        }
        for (e, &p) in proc.iter().enumerate() {
            let slots = (deadline / p).min(files);
            if slots == 0 {
                continue;
            }
            // Slot nodes k = 1..=slots; a file that may use slot k may use
            // every earlier-indexed one as well.
            let base = flow.len();
            for _ in 0..slots {
                flow.add_node();
            }
            for k in 0..slots as usize {
                flow.add_edge(base + k, sink, 1);
                if k > 0 {
                    flow.add_edge(base + k, base + k - 1, files);
                }
            }
            for (g, (release, count)) in groups.iter().enumerate() {
                if let Some(r) = release[e] {
                    let usable = ((deadline - r) / p).min(slots);
                    if deadline >= r && usable > 0 {
                        flow.add_edge(2 + g, base + usable as usize - 1, *count);
                    }
                }
            }
        }
        flow.max_flow(source, sink) == files
    };

    let mut lo = 0i64;
    let mut hi = proc.iter().copied().max().unwrap_or(1).max(1);
    while !fits(hi) {
        lo = hi;
        hi *= 2;
    }
    // `lo` does not fit (or is zero), `hi` fits.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Rational::new(hi, scale)
}

/// Edmonds–Karp max flow on a small graph.
struct FlowGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i64>,
}

impl FlowGraph {
    fn new(nodes: usize) -> Self {
        Self {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn add_node(&mut self) {
        self.adj.push(Vec::new());
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) {
        self.adj[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
        self.adj[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(0);
    }

    fn max_flow(&mut self, source: usize, sink: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; self.len()];
            let mut queue = VecDeque::from([source]);
            let mut reached = false;
            while let Some(n) = queue.pop_front() {
                for &edge in &self.adj[n] {
                    let next = self.to[edge];
                    if self.cap[edge] > 0 && via[next] == usize::MAX && next != source {
                        via[next] = edge;
                        if next == sink {
                            reached = true;
                            break;
                        }
                        queue.push_back(next);
                    }
                }
                if reached {
                    break;
                }
            }
            if !reached {
                return total;
            }
            let mut push = i64::MAX;
            let mut n = sink;
            while n != source {
                let edge = via[n];
                push = push.min(self.cap[edge]);
                n = self.to[edge ^ 1];
            }
            n = sink;
            while n != source {
                let edge = via[n];
                self.cap[edge] -= push;
                self.cap[edge ^ 1] += push;
                n = self.to[edge ^ 1];
            }
            total += push;
        }
    }
}
