//! Seeded synthetic graph generators for test corpora.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Synthetic {
    /// `G(n, p)`: every ordered (directed) or unordered pair independently.
    Erdos { n: usize, p: f64, seed: u64 },
    /// Preferential attachment, `m` edges per new node. Directed graphs
    /// orient each edge at random.
    ScaleFree { n: usize, m: usize, seed: u64 },
}

impl std::str::FromStr for Synthetic {
    type Err = Error;

    /// `erdos:n,p,seed` or `scalefree:n,m,seed`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad synthetic spec {s:?}; expected erdos:n,p,seed or scalefree:n,m,seed"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let n: usize = parts[0].parse().map_err(|_| bad())?;
        let seed: u64 = parts[2].parse().map_err(|_| bad())?;
        match kind {
            "erdos" => {
                let p: f64 = parts[1].parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(bad());
                }
                Ok(Synthetic::Erdos { n, p, seed })
            }
            "scalefree" => {
                let m: usize = parts[1].parse().map_err(|_| bad())?;
                if m == 0 {
                    return Err(bad());
                }
                Ok(Synthetic::ScaleFree { n, m, seed })
            }
            _ => Err(bad()),
        }
    }
}

impl Synthetic {
    pub fn generate(&self, directed: bool) -> Result<Graph> {
        match *self {
            Synthetic::Erdos { n, p, seed } => Ok(erdos_renyi(n, p, directed, seed)),
            Synthetic::ScaleFree { n, m, seed } => Ok(scale_free(n, m, directed, seed)),
        }
    }
}

pub fn erdos_renyi(n: usize, p: f64, directed: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u == v || (!directed && v < u) {
                continue;
            }
            if rng.random::<f64>() < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Graph::from_edges(n, edges, directed).expect("generated ids are in range")
}

pub fn scale_free(n: usize, m: usize, directed: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let core = (m + 1).min(n);
    let mut edges = Vec::new();
    // endpoint multiset: a node appears once per incident edge
    let mut ends: Vec<usize> = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    for new in core..n {
        let mut targets: Vec<usize> = Vec::with_capacity(m);
        while targets.len() < m.min(new) {
            let t = if ends.is_empty() {
                rng.random_range(0..new)
            } else {
                ends[rng.random_range(0..ends.len())]
            };
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((new, t));
            ends.extend([new, t]);
        }
    }
    let oriented = edges.into_iter().map(|(u, v)| {
        if directed && rng.random::<bool>() {
            (v, u, 1.0)
        } else {
            (u, v, 1.0)
        }
    });
    Graph::from_edges(n, oriented.collect::<Vec<_>>(), directed).expect("generated ids are in range")
}

/// Random strongly connected digraph: a Hamiltonian cycle over a random
/// permutation plus each other ordered pair with probability `p`. Weights
/// are 1 unless `weighted`, in which case they are uniform on `[0.5, 2)`.
pub fn strongly_connected(n: usize, p: f64, weighted: bool, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let weight = |rng: &mut ChaCha8Rng| if weighted { rng.random_range(0.5..2.0) } else { 1.0 };
    let mut edges = Vec::new();
    let mut on_cycle = std::collections::HashSet::new();
    if n > 1 {
        for i in 0..n {
            let (u, v) = (order[i], order[(i + 1) % n]);
            if on_cycle.insert((u, v)) {
                edges.push((u, v, weight(&mut rng)));
            }
        }
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && !on_cycle.contains(&(u, v)) && rng.random::<f64>() < p {
                edges.push((u, v, weight(&mut rng)));
            }
        }
    }
    Graph::from_edges(n, edges, true).expect("generated ids are in range")
}
