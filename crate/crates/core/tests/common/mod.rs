//! Random instances for integration tests.

#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use transplan::netmodel::{load_network, validate_request, Demand, Network, Request};
use transplan::rational::Rational;

pub const SITE_NAMES: [&str; 4] = ["A", "B", "C", "D"];
pub const DEST: &str = "T";

/// A routable instance with at most 5 sites, 8 links, 4 demands and
/// integer weights 1..=5. Returns `None` when the draw is unroutable.
pub fn random_instance<R: Rng>(rng: &mut R, max_size: i64) -> Option<(Network, Request)> {
    let n_sites = rng.gen_range(3..=5);
    let mut sites: Vec<&str> = SITE_NAMES[..n_sites - 1].to_vec();
    sites.push(DEST);
    let mut pairs: Vec<(usize, usize)> = (0..n_sites)
        .flat_map(|a| (0..n_sites).map(move |b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect();
    pairs.shuffle(rng);
    let n_links = rng.gen_range(n_sites - 1..=8).min(pairs.len());
    let links: Vec<String> = pairs[..n_links]
        .iter()
        .map(|&(a, b)| {
            format!(
                r#"{{"id":"{0}{1}","from":"{0}","to":"{1}","weight":{2}}}"#,
                sites[a],
                sites[b],
                rng.gen_range(1..=5)
            )
        })
        .collect();
    let site_docs: Vec<String> = sites.iter().map(|s| format!(r#"{{"id":"{s}"}}"#)).collect();
    let doc = format!(
        r#"{{"sites":[{}],"links":[{}]}}"#,
        site_docs.join(","),
        links.join(",")
    );
    let network = load_network(&doc).expect("generated network is valid");

    let n_demands = rng.gen_range(1..=4);
    let demands = (0..n_demands)
        .map(|i| {
            let mut origins: Vec<&str> = sites[..n_sites - 1]
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.4))
                .collect();
            if origins.is_empty() {
                origins.push(sites[rng.gen_range(0..n_sites - 1)]);
            }
            let size = Rational::from_integer(rng.gen_range(1..=max_size));
            Demand::new(format!("f{i}"), size, &origins)
        })
        .collect();
    let request = Request {
        destination: DEST.into(),
        demands,
    };
    validate_request(&network, &request).ok()?;
    Some((network, request))
}

pub fn instances(seed: u64, count: usize, max_size: i64) -> Vec<(Network, Request)> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        if let Some(inst) = random_instance(&mut rng, max_size) {
            out.push(inst);
        }
    }
    out
}
