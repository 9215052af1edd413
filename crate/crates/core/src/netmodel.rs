//! Network, demand and request model.
//!
//! A [`Network`] is a directed weighted graph of sites and links. The weight
//! of a link is the number of time units needed to move one size unit of
//! data across it, so a file of size `s` occupies the link for `s * weight`.
//! Sites and links are kept sorted by id; internal indices therefore follow
//! lexicographic id order, which every tie-break in the crate relies on.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};

use log::warn;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{serde_opt_rational, serde_rational, Rational};

/// Index of a site inside a [`Network`].
pub type SiteIx = usize;
/// Index of a link inside a [`Network`].
pub type LinkIx = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate site id {0:?}")]
    DuplicateSite(String),
    #[error("duplicate link id {0:?}")]
    DuplicateLink(String),
    #[error("duplicate demand id {0:?}")]
    DuplicateDemand(String),
    #[error("unknown site {site:?} referenced by {context}")]
    UnknownSite { context: String, site: String },
    #[error("unknown link {link:?} referenced by {context}")]
    UnknownLink { context: String, link: String },
    #[error("nonpositive weight on link {0:?}")]
    NonpositiveWeight(String),
    #[error("link {0:?} starts and ends at the same site")]
    SelfLoop(String),
    #[error("link {0:?} must allow at least one stream")]
    ZeroStreams(String),
    #[error("negative storage capacity at site {0:?}")]
    NegativeCapacity(String),
    #[error("shared group at {site:?}: link {link:?} is not {side} at that site")]
    GroupMismatch {
        site: String,
        link: String,
        side: Side,
    },
    #[error("shared group at {site:?}: nonpositive limit")]
    NonpositiveLimit { site: String },
    #[error("shared group at {site:?}: limit exhausts link weight of {link:?}")]
    LimitExhaustsWeight { site: String, link: String },
    #[error("nonpositive size for demand {0:?}")]
    NonpositiveSize(String),
    #[error("demand {0:?} has no origins")]
    NoOrigins(String),
    #[error("unknown destination site {0:?}")]
    UnknownDestination(String),
    #[error("unroutable demand {0}")]
    UnroutableDemand(String),
}

/// A site (node) of the network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Site {
    pub id: String,
    /// Free storage in size units; `None` means unbounded.
    #[serde(
        default,
        with = "serde_opt_rational",
        skip_serializing_if = "Option::is_none"
    )]
    pub storage_capacity: Option<Rational>,
}

impl Site {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            storage_capacity: None,
        }
    }

    pub fn with_capacity(id: impl Into<String>, capacity: Rational) -> Self {
        Self {
            id: id.into(),
            storage_capacity: Some(capacity),
        }
    }
}

fn default_streams() -> u32 {
    1
}

fn is_one(v: &u32) -> bool {
    *v == 1
}

/// A directed link between two sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub from: String,
    pub to: String,
    /// Time units per size unit.
    #[serde(with = "serde_rational")]
    pub weight: Rational,
    /// Parallel transfers allowed during execution. The planning model
    /// always treats a link as a unary resource.
    #[serde(default = "default_streams", skip_serializing_if = "is_one")]
    pub max_streams: u32,
}

impl Link {
    pub fn new(
        id: impl Into<String>,
        from: impl Into<String>,
        to: impl Into<String>,
        weight: Rational,
    ) -> Self {
        Self {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            weight,
            max_streams: 1,
        }
    }
}

/// Which side of a site a shared group constrains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Incoming,
    Outgoing,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Incoming => "incoming",
            Side::Outgoing => "outgoing",
        })
    }
}

/// Links attached to one site that share a router or fiber.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SharedGroup {
    pub site: String,
    pub side: Side,
    #[serde(rename = "members")]
    pub member_links: Vec<String>,
    #[serde(with = "serde_rational")]
    pub limit: Rational,
}

/// On-disk form of a network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    #[serde(default)]
    pub sites: Vec<Site>,
    #[serde(default)]
    pub links: Vec<Link>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shared_groups: Vec<SharedGroup>,
}

/// Validated network with adjacency indexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    sites: Vec<Site>,
    links: Vec<Link>,
    shared_groups: Vec<SharedGroup>,
    site_ix: HashMap<String, SiteIx>,
    link_ix: HashMap<String, LinkIx>,
    tails: Vec<SiteIx>,
    heads: Vec<SiteIx>,
    out: Vec<Vec<LinkIx>>,
    inc: Vec<Vec<LinkIx>>,
}

impl Network {
    /// Builds and validates a network. Sites and links are re-ordered by id.
    /// Shared groups are recorded but not applied; see [`apply_shared_groups`].
    pub fn new(
        mut sites: Vec<Site>,
        mut links: Vec<Link>,
        shared_groups: Vec<SharedGroup>,
    ) -> Result<Self, ModelError> {
        sites.sort_by(|a, b| a.id.cmp(&b.id));
        links.sort_by(|a, b| a.id.cmp(&b.id));

        let mut site_ix = HashMap::with_capacity(sites.len());
        for (ix, site) in sites.iter().enumerate() {
            if site_ix.insert(site.id.clone(), ix).is_some() {
                return Err(ModelError::DuplicateSite(site.id.clone()));
            }
            if matches!(&site.storage_capacity, Some(c) if *c < Rational::zero()) {
                return Err(ModelError::NegativeCapacity(site.id.clone()));
            }
        }

        let mut link_ix = HashMap::with_capacity(links.len());
        let mut tails = Vec::with_capacity(links.len());
        let mut heads = Vec::with_capacity(links.len());
        let mut out = vec![Vec::new(); sites.len()];
        let mut inc = vec![Vec::new(); sites.len()];
        for (ix, link) in links.iter().enumerate() {
            if link_ix.insert(link.id.clone(), ix).is_some() {
                return Err(ModelError::DuplicateLink(link.id.clone()));
            }
            let lookup = |site: &str| {
                site_ix
                    .get(site)
                    .copied()
                    .ok_or_else(|| ModelError::UnknownSite {
                        context: format!("link {:?}", link.id),
                        site: site.to_string(),
                    })
            };
            let tail = lookup(&link.from)?;
            let head = lookup(&link.to)?;
            if tail == head {
                return Err(ModelError::SelfLoop(link.id.clone()));
            }
            if link.weight <= Rational::zero() {
                return Err(ModelError::NonpositiveWeight(link.id.clone()));
            }
            if link.max_streams == 0 {
                return Err(ModelError::ZeroStreams(link.id.clone()));
            }
            tails.push(tail);
            heads.push(head);
            out[tail].push(ix);
            inc[head].push(ix);
        }

        let network = Self {
            sites,
            links,
            shared_groups: Vec::new(),
            site_ix,
            link_ix,
            tails,
            heads,
            out,
            inc,
        };
        for group in &shared_groups {
            network.check_group(group)?;
        }
        Ok(Self {
            shared_groups,
            ..network
        })
    }

    pub fn from_document(doc: NetworkDocument) -> Result<Self, ModelError> {
        Self::new(doc.sites, doc.links, doc.shared_groups)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            sites: self.sites.clone(),
            links: self.links.clone(),
            shared_groups: self.shared_groups.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network serializes")
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// Shared groups declared in the source document (not yet applied).
    pub fn shared_groups(&self) -> &[SharedGroup] {
        &self.shared_groups
    }

    pub fn site(&self, ix: SiteIx) -> &Site {
        &self.sites[ix]
    }

    pub fn link(&self, ix: LinkIx) -> &Link {
        &self.links[ix]
    }

    pub fn site_index(&self, id: &str) -> Option<SiteIx> {
        self.site_ix.get(id).copied()
    }

    pub fn link_index(&self, id: &str) -> Option<LinkIx> {
        self.link_ix.get(id).copied()
    }

    pub fn tail(&self, link: LinkIx) -> SiteIx {
        self.tails[link]
    }

    pub fn head(&self, link: LinkIx) -> SiteIx {
        self.heads[link]
    }

    /// OUT(n): links leaving `site`.
    pub fn out_links(&self, site: SiteIx) -> &[LinkIx] {
        &self.out[site]
    }

    /// IN(n): links entering `site`.
    pub fn in_links(&self, site: SiteIx) -> &[LinkIx] {
        &self.inc[site]
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    fn check_group(&self, group: &SharedGroup) -> Result<(), ModelError> {
        let site = self
            .site_index(&group.site)
            .ok_or_else(|| ModelError::UnknownSite {
                context: "shared group".into(),
                site: group.site.clone(),
            })?;
        if group.limit <= Rational::zero() {
            return Err(ModelError::NonpositiveLimit {
                site: group.site.clone(),
            });
        }
        for member in &group.member_links {
            let link = self
                .link_index(member)
                .ok_or_else(|| ModelError::UnknownLink {
                    context: format!("shared group at {:?}", group.site),
                    link: member.clone(),
                })?;
            let attached = match group.side {
                Side::Incoming => self.head(link) == site,
                Side::Outgoing => self.tail(link) == site,
            };
            if !attached {
                return Err(ModelError::GroupMismatch {
                    site: group.site.clone(),
                    link: member.clone(),
                    side: group.side,
                });
            }
            if self.links[link].weight <= group.limit {
                return Err(ModelError::LimitExhaustsWeight {
                    site: group.site.clone(),
                    link: member.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Parses and validates a network document (JSON).
pub fn load_network(document: &str) -> Result<Network, ModelError> {
    let doc: NetworkDocument =
        serde_json::from_str(document).map_err(|e| ModelError::Parse(e.to_string()))?;
    Network::from_document(doc)
}

/// A requested file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demand {
    pub id: String,
    #[serde(with = "serde_rational")]
    pub size: Rational,
    pub origins: Vec<String>,
}

impl Demand {
    pub fn new(id: impl Into<String>, size: Rational, origins: &[&str]) -> Self {
        Self {
            id: id.into(),
            size,
            origins: origins.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// A set of demands that must all reach one destination site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub destination: String,
    pub demands: Vec<Demand>,
}

impl Request {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("request serializes")
    }
}

pub fn load_request(document: &str) -> Result<Request, ModelError> {
    serde_json::from_str(document).map_err(|e| ModelError::Parse(e.to_string()))
}

/// A demand resolved against a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedDemand {
    pub id: String,
    pub size: Rational,
    /// Sorted, deduplicated origin sites.
    pub origins: Vec<SiteIx>,
}

/// A request resolved against a network: demands sorted by id, demands
/// already present at the destination split off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedRequest {
    pub destination: SiteIx,
    pub demands: Vec<NormalizedDemand>,
    /// Demands whose file already resides at the destination.
    pub satisfied: Vec<String>,
    pub warnings: Vec<String>,
}

/// dur_de = size(d) * weight(e).
pub fn transfer_duration(size: &Rational, link: &Link) -> Rational {
    size * link.weight
}

/// Resolves a request against `network`.
pub fn validate_request(
    network: &Network,
    request: &Request,
) -> Result<NormalizedRequest, ModelError> {
    let destination = network
        .site_index(&request.destination)
        .ok_or_else(|| ModelError::UnknownDestination(request.destination.clone()))?;
    let reaches_dest = reverse_reachable(network, destination);

    let mut seen = HashSet::new();
    let mut demands = Vec::new();
    let mut satisfied = Vec::new();
    let mut warnings = Vec::new();
    for demand in &request.demands {
        if !seen.insert(demand.id.as_str()) {
            return Err(ModelError::DuplicateDemand(demand.id.clone()));
        }
        if demand.size <= Rational::zero() {
            return Err(ModelError::NonpositiveSize(demand.id.clone()));
        }
        if demand.origins.is_empty() {
            return Err(ModelError::NoOrigins(demand.id.clone()));
        }
        let mut origins = BTreeSet::new();
        for origin in &demand.origins {
            match network.site_index(origin) {
                Some(ix) => {
                    origins.insert(ix);
                }
                None => {
                    let msg = format!(
                        "demand {:?}: dropping unknown origin site {:?}",
                        demand.id, origin
                    );
                    warn!("{msg}");
                    warnings.push(msg);
                }
            }
        }
        if origins.contains(&destination) {
            satisfied.push(demand.id.clone());
            continue;
        }
        if !origins.iter().any(|&o| reaches_dest[o]) {
            return Err(ModelError::UnroutableDemand(demand.id.clone()));
        }
        demands.push(NormalizedDemand {
            id: demand.id.clone(),
            size: demand.size,
            origins: origins.into_iter().collect(),
        });
    }
    demands.sort_by(|a, b| a.id.cmp(&b.id));
    satisfied.sort();
    Ok(NormalizedRequest {
        destination,
        demands,
        satisfied,
        warnings,
    })
}

fn reverse_reachable(network: &Network, target: SiteIx) -> Vec<bool> {
    let mut seen = vec![false; network.num_sites()];
    seen[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(n) = queue.pop_front() {
        for &l in network.in_links(n) {
            let t = network.tail(l);
            if !seen[t] {
                seen[t] = true;
                queue.push_back(t);
            }
        }
    }
    seen
}

/// Per-unit-size shortest distances toward one destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPaths {
    destination: SiteIx,
    site_dist: Vec<Option<Rational>>,
    link_dist: Vec<Option<Rational>>,
    link_ids: Vec<String>,
}

impl ShortestPaths {
    pub fn destination(&self) -> SiteIx {
        self.destination
    }

    /// SP_e: distance from the head of `link` to the destination, `None`
    /// when unreachable.
    pub fn link(&self, link: LinkIx) -> Option<Rational> {
        self.link_dist[link]
    }

    pub fn by_id(&self, link: &str) -> Option<Rational> {
        let ix = self.link_ids.iter().position(|l| l == link)?;
        self.link_dist[ix]
    }

    /// Distance from `site` to the destination.
    pub fn site(&self, site: SiteIx) -> Option<Rational> {
        self.site_dist[site]
    }
}

/// Single-target Dijkstra over link weights.
pub fn shortest_path_table(network: &Network, destination: SiteIx) -> ShortestPaths {
    let mut dist: Vec<Option<Rational>> = vec![None; network.num_sites()];
    let mut heap = BinaryHeap::new();
    dist[destination] = Some(Rational::zero());
    heap.push(Reverse((Rational::zero(), destination)));
    while let Some(Reverse((d, n))) = heap.pop() {
        if dist[n].is_some_and(|best| best < d) {
            continue;
        }
        for &l in network.in_links(n) {
            let t = network.tail(l);
            let cand = d + network.link(l).weight;
            if dist[t].is_none_or(|best| cand < best) {
                dist[t] = Some(cand);
                heap.push(Reverse((cand, t)));
            }
        }
    }
    let link_dist = (0..network.num_links())
        .map(|l| dist[network.head(l)])
        .collect();
    ShortestPaths {
        destination,
        site_dist: dist,
        link_dist,
        link_ids: network.links().iter().map(|l| l.id.clone()).collect(),
    }
}

/// Rewrites each shared group into a dummy site plus one dummy link.
///
/// Member links are re-attached to the dummy site and lose `limit` from
/// their weight; the dummy link carries exactly `limit`, so every path keeps
/// its total weight while traffic through the group is funnelled over one
/// link.
pub fn apply_shared_groups(
    network: &Network,
    groups: &[SharedGroup],
) -> Result<Network, ModelError> {
    let mut sites = network.sites.clone();
    let mut links = network.links.clone();
    let mut taken_sites: HashSet<String> = sites.iter().map(|s| s.id.clone()).collect();
    let mut taken_links: HashSet<String> = links.iter().map(|l| l.id.clone()).collect();

    for group in groups {
        network.check_group(group)?;
        let mut dummy = format!("{}'", group.site);
        while taken_sites.contains(&dummy) {
            dummy.push('\'');
        }
        taken_sites.insert(dummy.clone());
        sites.push(Site::new(dummy.clone()));

        for member in &group.member_links {
            let link = links
                .iter_mut()
                .find(|l| &l.id == member)
                .expect("checked above");
            match group.side {
                Side::Incoming => link.to = dummy.clone(),
                Side::Outgoing => link.from = dummy.clone(),
            }
            link.weight -= group.limit;
            if link.weight <= Rational::zero() {
                return Err(ModelError::LimitExhaustsWeight {
                    site: group.site.clone(),
                    link: member.clone(),
                });
            }
        }

        let (from, to) = match group.side {
            Side::Incoming => (dummy.clone(), group.site.clone()),
            Side::Outgoing => (group.site.clone(), dummy.clone()),
        };
        let mut id = format!("{from}->{to}");
        while taken_links.contains(&id) {
            id.push('\'');
        }
        taken_links.insert(id.clone());
        links.push(Link::new(id, from, to, group.limit));
    }

    Network::new(sites, links, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    const D1: &str = r#"{
        "sites": [{"id": "S"}, {"id": "M"}, {"id": "T"}],
        "links": [
            {"id": "S-M", "from": "S", "to": "M", "weight": 2},
            {"id": "M-T", "from": "M", "to": "T", "weight": "2"},
            {"id": "S-T", "from": "S", "to": "T", "weight": "5"}
        ]
    }"#;

    fn d1() -> Network {
        load_network(D1).unwrap()
    }

    #[test]
    fn loads_small_network() {
        let net = d1();
        assert_eq!(net.num_sites(), 3);
        assert_eq!(net.num_links(), 3);
        let s = net.site_index("S").unwrap();
        let out: Vec<&str> = net
            .out_links(s)
            .iter()
            .map(|&l| net.link(l).id.as_str())
            .collect();
        assert_eq!(out, ["S-M", "S-T"]);
        let t = net.site_index("T").unwrap();
        assert_eq!(net.in_links(t).len(), 2);
    }

    #[test]
    fn rejects_unknown_site() {
        let doc = r#"{"sites":[{"id":"S"}],"links":[{"id":"a","from":"S","to":"X","weight":1}]}"#;
        let err = load_network(doc).unwrap_err();
        assert!(err.to_string().contains("unknown site"), "{err}");
        assert!(err.to_string().contains("\"X\""));
    }

    #[test]
    fn rejects_zero_weight() {
        let doc = r#"{"sites":[{"id":"S"},{"id":"T"}],"links":[{"id":"a","from":"S","to":"T","weight":"0"}]}"#;
        let err = load_network(doc).unwrap_err();
        assert_eq!(err, ModelError::NonpositiveWeight("a".into()));
        assert!(err.to_string().contains("nonpositive weight"));
    }

    #[test]
    fn rejects_duplicates_and_garbage() {
        let doc = r#"{"sites":[{"id":"S"},{"id":"S"}],"links":[]}"#;
        assert_eq!(
            load_network(doc).unwrap_err(),
            ModelError::DuplicateSite("S".into())
        );
        assert!(matches!(
            load_network("{not json").unwrap_err(),
            ModelError::Parse(_)
        ));
    }

    #[test]
    fn durations_are_size_times_weight() {
        let link = Link::new("e", "a", "b", q(5));
        assert_eq!(transfer_duration(&q(1), &link), q(5));
        assert_eq!(transfer_duration(&q(3), &link), q(15));
        let link = Link::new("e", "a", "b", q(2));
        assert_eq!(transfer_duration(&q(2), &link), q(4));
        let half = Rational::new(1, 2);
        assert_eq!(
            transfer_duration(&half, &Link::new("e", "a", "b", Rational::new(3, 10))),
            Rational::new(3, 20)
        );
    }

    #[test]
    fn shortest_paths_on_small_network() {
        let net = d1();
        let sp = shortest_path_table(&net, net.site_index("T").unwrap());
        assert_eq!(sp.by_id("S-M"), Some(q(2)));
        assert_eq!(sp.by_id("M-T"), Some(q(0)));
        assert_eq!(sp.by_id("S-T"), Some(q(0)));
    }

    #[test]
    fn unreachable_head_is_infinite() {
        let doc = r#"{"sites":[{"id":"S"},{"id":"T"},{"id":"Z"}],
            "links":[{"id":"a","from":"S","to":"T","weight":1},{"id":"b","from":"S","to":"Z","weight":1}]}"#;
        let net = load_network(doc).unwrap();
        let sp = shortest_path_table(&net, net.site_index("T").unwrap());
        assert_eq!(sp.by_id("b"), None);
        assert_eq!(sp.by_id("a"), Some(q(0)));
    }

    #[test]
    fn shared_group_inserts_dummy_vertex() {
        let net = d1();
        let group = SharedGroup {
            site: "T".into(),
            side: Side::Incoming,
            member_links: vec!["M-T".into(), "S-T".into()],
            limit: q(1),
        };
        let out = apply_shared_groups(&net, &[group]).unwrap();
        let ids: Vec<&str> = out.sites().iter().map(|s| s.id.as_str()).collect();
        assert_eq!(ids, ["M", "S", "T", "T'"]);
        let find = |id: &str| out.link(out.link_index(id).unwrap()).clone();
        assert_eq!(find("S-M").weight, q(2));
        assert_eq!((find("M-T").to.as_str(), find("M-T").weight), ("T'", q(1)));
        assert_eq!((find("S-T").to.as_str(), find("S-T").weight), ("T'", q(4)));
        let dummy = find("T'->T");
        assert_eq!((dummy.from.as_str(), dummy.to.as_str()), ("T'", "T"));
        assert_eq!(dummy.weight, q(1));
        assert_eq!(out.num_links(), 4);
    }

    #[test]
    fn outgoing_group_keeps_direction() {
        let net = d1();
        let group = SharedGroup {
            site: "S".into(),
            side: Side::Outgoing,
            member_links: vec!["S-M".into(), "S-T".into()],
            limit: q(1),
        };
        let out = apply_shared_groups(&net, &[group]).unwrap();
        let dummy = out.link(out.link_index("S->S'").unwrap());
        assert_eq!((dummy.from.as_str(), dummy.to.as_str()), ("S", "S'"));
        let st = out.link(out.link_index("S-T").unwrap());
        assert_eq!((st.from.as_str(), st.weight), ("S'", q(4)));
    }

    #[test]
    fn empty_group_list_is_identity() {
        let net = d1();
        assert_eq!(apply_shared_groups(&net, &[]).unwrap(), net);
    }

    #[test]
    fn limit_may_not_exhaust_weight() {
        let net = d1();
        let group = SharedGroup {
            site: "T".into(),
            side: Side::Incoming,
            member_links: vec!["M-T".into()],
            limit: q(2),
        };
        let err = apply_shared_groups(&net, &[group]).unwrap_err();
        assert!(
            err.to_string().contains("limit exhausts link weight"),
            "{err}"
        );
    }

    #[test]
    fn group_member_must_attach_on_declared_side() {
        let net = d1();
        let group = SharedGroup {
            site: "T".into(),
            side: Side::Outgoing,
            member_links: vec!["M-T".into()],
            limit: q(1),
        };
        assert!(matches!(
            apply_shared_groups(&net, &[group]),
            Err(ModelError::GroupMismatch { .. })
        ));
    }

    #[test]
    fn request_normalization() {
        let net = d1();
        let req = Request {
            destination: "T".into(),
            demands: vec![
                Demand::new("g", q(1), &["T"]),
                Demand::new("f", q(1), &["S", "Nowhere"]),
            ],
        };
        let norm = validate_request(&net, &req).unwrap();
        assert_eq!(norm.satisfied, ["g"]);
        assert_eq!(norm.demands.len(), 1);
        assert_eq!(norm.demands[0].origins, [net.site_index("S").unwrap()]);
        assert_eq!(norm.warnings.len(), 1);
    }

    #[test]
    fn unroutable_demand_is_rejected() {
        let doc = r#"{"sites":[{"id":"S"},{"id":"T"},{"id":"Z"}],
            "links":[{"id":"a","from":"S","to":"T","weight":1}]}"#;
        let net = load_network(doc).unwrap();
        let req = Request {
            destination: "T".into(),
            demands: vec![Demand::new("f", q(1), &["Z"])],
        };
        let err = validate_request(&net, &req).unwrap_err();
        assert_eq!(err.to_string(), "unroutable demand f");
    }

    #[test]
    fn round_trip_is_stable() {
        let net = d1();
        let again = load_network(&net.to_json()).unwrap();
        assert_eq!(net, again);
    }
}
