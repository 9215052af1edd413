//! Cooperative search limits shared by the planner and the scheduler.

use std::time::{Duration, Instant};

/// Wall-clock and node-count allowance for one solve.
///
/// Searches call [`Budget::tick`] once per node and stop as soon as it
/// returns `false`. A node limit makes truncated runs reproducible, a time
/// limit does not.
#[derive(Debug, Clone)]
pub struct Budget {
    started: Instant,
    deadline: Option<Instant>,
    node_limit: Option<u64>,
    nodes: u64,
    expired: bool,
}

impl Budget {
    pub fn new(time_limit: Option<Duration>, node_limit: Option<u64>) -> Self {
        let started = Instant::now();
        Self {
            started,
            deadline: time_limit.map(|t| started + t),
            node_limit,
            nodes: 0,
            expired: false,
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None, None)
    }

    /// Counts one search node. Returns `false` once the budget is spent.
    pub fn tick(&mut self) -> bool {
        if self.expired {
            return false;
        }
        self.nodes += 1;
        if self.node_limit.is_some_and(|limit| self.nodes > limit) {
            self.expired = true;
        } else if self.nodes.is_multiple_of(32) {
            self.check_clock();
        }
        !self.expired
    }

    /// Re-reads the clock without counting a node.
    pub fn check_clock(&mut self) -> bool {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.expired = true;
        }
        !self.expired
    }

    pub fn expired(&self) -> bool {
        self.expired
    }

    /// `true` when the node allowance, not the clock, ended the search.
    pub fn hit_node_limit(&self) -> bool {
        self.node_limit.is_some_and(|limit| self.nodes > limit)
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn elapsed(&self) -> Duration {
        self.started.elapsed()
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self::unlimited()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_limit_is_exact() {
        let mut b = Budget::new(None, Some(3));
        assert!(b.tick() && b.tick() && b.tick());
        assert!(!b.tick());
        assert!(b.expired());
        assert!(!b.tick());
    }

    #[test]
    fn zero_time_limit_expires_on_clock_check() {
        let mut b = Budget::new(Some(Duration::ZERO), None);
        assert!(!b.check_clock());
    }
}
