//! Benchmark requests and the five-site benchmark network.
//!
//! The network's link weights are a repository choice, not measured data:
//! BNL and LBNL are close to each other, MIT has the fastest direct link to
//! Prague, KISTI is slow everywhere. See `data/benchmark_network.json`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::netmodel::{load_network, Demand, Network, Request};
use crate::rational::Rational;

pub const BENCHMARK_DESTINATION: &str = "Prague";

const BENCHMARK_NETWORK: &str = include_str!("../data/benchmark_network.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("no guaranteed origin")]
    NoGuaranteedOrigin,
    #[error("probability {probability} for site {site} is outside [0, 1]")]
    BadProbability { site: String, probability: f64 },
}

/// Per-site probability that a file has a replica there. Sites are drawn
/// in the listed order.
#[derive(Debug, Clone, PartialEq)]
pub struct OriginDistribution {
    sites: Vec<(String, f64)>,
}

impl OriginDistribution {
    pub fn new(sites: Vec<(String, f64)>) -> Result<Self, WorkloadError> {
        if let Some((site, p)) = sites.iter().find(|(_, p)| !(0.0..=1.0).contains(p)) {
            return Err(WorkloadError::BadProbability {
                site: site.clone(),
                probability: *p,
            });
        }
        if !sites.iter().any(|(_, p)| *p == 1.0) {
            return Err(WorkloadError::NoGuaranteedOrigin);
        }
        Ok(Self { sites })
    }

    /// Everything at BNL, 60% at LBNL, a few files at MIT and KISTI.
    pub fn benchmark() -> Self {
        Self::new(vec![
            ("BNL".into(), 1.0),
            ("LBNL".into(), 0.6),
            ("MIT".into(), 0.01),
            ("KISTI".into(), 0.05),
        ])
        .expect("benchmark distribution is valid")
    }

    pub fn sites(&self) -> &[(String, f64)] {
        &self.sites
    }
}

/// `n` unit-size files destined for Prague. Every site joins a file's
/// origin set independently with its probability.
pub fn generate_demands(n: usize, dist: &OriginDistribution, seed: u64) -> Request {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = n.saturating_sub(1).to_string().len().max(4);
    let demands = (0..n)
        .map(|i| {
            let origins: Vec<&str> = dist
                .sites
                .iter()
                .filter(|(_, p)| rng.gen::<f64>() < *p)
                .map(|(s, _)| s.as_str())
                .collect();
            Demand::new(format!("f{i:0width$}"), Rational::from_integer(1), &origins)
        })
        .collect();
    Request {
        destination: BENCHMARK_DESTINATION.into(),
        demands,
    }
}

pub fn benchmark_network() -> Network {
    load_network(BENCHMARK_NETWORK).expect("bundled benchmark network is valid")
}
