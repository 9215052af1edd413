//! Transfer plans: one origin and one simple path per demand.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{Network, NormalizedRequest};
use crate::rational::{serde_rational, Rational};

/// The chosen route of one demand.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub demand: String,
    #[serde(with = "serde_rational")]
    pub size: Rational,
    pub origin: String,
    /// Link ids from `origin` to the destination, in transfer order.
    pub links: Vec<String>,
}

/// Output of the planning stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub destination: String,
    /// One route per demand, sorted by demand id.
    pub routes: Vec<Route>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanViolation {
    #[error("route {demand}: unknown link {link:?}")]
    UnknownLink { demand: String, link: String },
    #[error("route {demand}: empty path")]
    EmptyPath { demand: String },
    #[error("route {demand}: first link does not leave origin {origin:?}")]
    WrongStart { demand: String, origin: String },
    #[error("route {demand}: links {prev:?} and {next:?} are not consecutive")]
    Disconnected {
        demand: String,
        prev: String,
        next: String,
    },
    #[error("route {demand}: path does not end at destination {destination:?}")]
    WrongEnd { demand: String, destination: String },
    #[error("route {demand}: site {site:?} visited twice")]
    RepeatedSite { demand: String, site: String },
    #[error("route {demand}: {origin:?} is not an origin of the demand")]
    NotAnOrigin { demand: String, origin: String },
    #[error("demand {0} is not routed")]
    MissingDemand(String),
    #[error("demand {0} is routed twice or is not requested")]
    UnexpectedRoute(String),
    #[error("route {demand}: size differs from the request")]
    SizeMismatch { demand: String },
}

impl Plan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn route(&self, demand: &str) -> Option<&Route> {
        self.routes.iter().find(|r| r.demand == demand)
    }

    /// Checks that every route is a simple path from its origin to the
    /// destination over links of `network`.
    pub fn check_paths(&self, network: &Network) -> Result<(), PlanViolation> {
        for route in &self.routes {
            check_route(network, &self.destination, route)?;
        }
        Ok(())
    }

    /// [`Plan::check_paths`] plus coverage of exactly the demands of
    /// `request`, from one of their own origins.
    pub fn check_against(
        &self,
        network: &Network,
        request: &NormalizedRequest,
    ) -> Result<(), PlanViolation> {
        self.check_paths(network)?;
        let wanted: HashMap<&str, _> = request.demands.iter().map(|d| (d.id.as_str(), d)).collect();
        let mut seen = HashSet::new();
        for route in &self.routes {
            let Some(demand) = wanted.get(route.demand.as_str()) else {
                return Err(PlanViolation::UnexpectedRoute(route.demand.clone()));
            };
            if !seen.insert(route.demand.as_str()) {
                return Err(PlanViolation::UnexpectedRoute(route.demand.clone()));
            }
            if demand.size != route.size {
                return Err(PlanViolation::SizeMismatch {
                    demand: route.demand.clone(),
                });
            }
            let origin_ok = network
                .site_index(&route.origin)
                .is_some_and(|o| demand.origins.contains(&o));
            if !origin_ok {
                return Err(PlanViolation::NotAnOrigin {
                    demand: route.demand.clone(),
                    origin: route.origin.clone(),
                });
            }
        }
        for demand in &request.demands {
            if !seen.contains(demand.id.as_str()) {
                return Err(PlanViolation::MissingDemand(demand.id.clone()));
            }
        }
        Ok(())
    }
}

fn check_route(network: &Network, destination: &str, route: &Route) -> Result<(), PlanViolation> {
    let demand = || route.demand.clone();
    if route.links.is_empty() {
        return Err(PlanViolation::EmptyPath { demand: demand() });
    }
    let mut visited = HashSet::new();
    visited.insert(route.origin.as_str());
    let mut at = route.origin.as_str();
    let mut prev: Option<&str> = None;
    for id in &route.links {
        let link = network
            .link_index(id)
            .map(|ix| network.link(ix))
            .ok_or_else(|| PlanViolation::UnknownLink {
                demand: demand(),
                link: id.clone(),
            })?;
        if link.from != at {
            return Err(match prev {
                None => PlanViolation::WrongStart {
                    demand: demand(),
                    origin: route.origin.clone(),
                },
                Some(p) => PlanViolation::Disconnected {
                    demand: demand(),
                    prev: p.to_string(),
                    next: id.clone(),
                },
            });
        }
        if !visited.insert(link.to.as_str()) {
            return Err(PlanViolation::RepeatedSite {
                demand: demand(),
                site: link.to.clone(),
            });
        }
        at = link.to.as_str();
        prev = Some(id.as_str());
    }
    if at != destination {
        return Err(PlanViolation::WrongEnd {
            demand: demand(),
            destination: destination.to_string(),
        });
    }
    Ok(())
}
