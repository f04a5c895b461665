//! Herdability centrality and the classical centralities it is compared
//! against.
//!
//! Herdability centrality ranks each node of a strongly connected graph by
//! the minimum energy `J_i` needed to herd the whole network with node `i`
//! as the only input: `Hc_i = min_k J_k / J_i`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, LU};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics;
use crate::energy::{self, CutoffPolicy, EnergyResult};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

/// Nodes whose `Hc` is within this of 1 form the argmin set.
pub const ARGMIN_TOL: f64 = 1e-9;

/// Minimum energy to herd `g` from `node` alone.
pub fn node_energy(g: &Graph, node: usize, d: f64, policy: CutoffPolicy) -> Result<EnergyResult> {
    let sys = dynamics::taylor_consensus(g, node)?;
    let gram = dynamics::lyapunov_gramian(&sys)?;
    let spec = energy::spectrum(&gram.w, policy)?;
    energy::min_energy_to_orthant(&spec, d)
}

#[derive(Debug, Clone, Serialize)]
pub struct HerdabilityCentralityReport {
    /// `J_i`, `None` where the solve failed.
    pub energies: Vec<Option<f64>>,
    /// `Hc_i`, `None` where the solve failed.
    pub centrality: Vec<Option<f64>>,
    pub argmin: Vec<usize>,
    pub d: f64,
    pub horizon: &'static str,
    pub partial: bool,
    pub errors: Vec<(usize, String)>,
}

pub fn herdability_centrality(g: &Graph, d: f64, policy: CutoffPolicy) -> Result<HerdabilityCentralityReport> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold d = {d} must be positive")));
    }
    let dag = g.scc_decompose();
    if dag.len() != 1 {
        return Err(Error::NotStronglyConnected { components: dag.len() });
    }
    let results: Vec<Result<f64>> = (0..g.node_count())
        .into_par_iter()
        .map(|i| node_energy(g, i, d, policy).map(|r| r.energy))
        .collect();

    let mut energies = Vec::with_capacity(results.len());
    let mut errors = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(j) => energies.push(Some(j)),
            Err(e) => {
                log::warn!("energy solve failed for node {}: {e}", g.label(i));
                errors.push((i, e.to_string()));
                energies.push(None);
            }
        }
    }
    let min = energies.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let centrality: Vec<Option<f64>> = energies.iter().map(|j| j.map(|j| min / j)).collect();
    let argmin = centrality
        .iter()
        .enumerate()
        .filter(|(_, h)| h.is_some_and(|h| h >= 1.0 - ARGMIN_TOL))
        .map(|(i, _)| i)
        .collect();
    Ok(HerdabilityCentralityReport {
        energies,
        centrality,
        argmin,
        d,
        horizon: "infinite",
        partial: !errors.is_empty(),
        errors,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassicMeasure {
    InDegree,
    Eccentricity,
    Closeness,
    Betweenness,
    Eigenvector,
    Katz,
}

impl ClassicMeasure {
    pub const ALL: [ClassicMeasure; 6] = [
        ClassicMeasure::InDegree,
        ClassicMeasure::Eccentricity,
        ClassicMeasure::Closeness,
        ClassicMeasure::Betweenness,
        ClassicMeasure::Eigenvector,
        ClassicMeasure::Katz,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ClassicMeasure::InDegree => "indegree",
            ClassicMeasure::Eccentricity => "eccentricity",
            ClassicMeasure::Closeness => "closeness",
            ClassicMeasure::Betweenness => "betweenness",
            ClassicMeasure::Eigenvector => "eigenvector",
            ClassicMeasure::Katz => "katz",
        }
    }

    /// Eccentricity ranks the node with the *smallest* value first.
    pub fn lower_is_central(&self) -> bool {
        matches!(self, ClassicMeasure::Eccentricity)
    }
}

impl std::str::FromStr for ClassicMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassicMeasure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown centrality measure {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ClassicParams {
    /// Katz attenuation; defaults to `0.85 / λ_max`.
    pub katz_alpha: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassicCentralityReport {
    pub measure: ClassicMeasure,
    pub scores: Vec<f64>,
    /// Katz attenuation actually used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub katz_alpha: Option<f64>,
}

pub fn classic_centrality(g: &Graph, measure: ClassicMeasure, params: ClassicParams) -> Result<ClassicCentralityReport> {
    let mut katz_alpha = None;
    let scores = match measure {
        ClassicMeasure::InDegree => g.degrees().iter().map(|d| d.in_degree as f64).collect(),
        ClassicMeasure::Eccentricity => (0..g.node_count())
            .map(|u| bfs_distances(g, u).into_iter().flatten().max().unwrap_or(0) as f64)
            .collect(),
        ClassicMeasure::Closeness => (0..g.node_count())
            .map(|u| {
                bfs_distances(g, u)
                    .into_iter()
                    .flatten()
                    .filter(|&d| d > 0)
                    .map(|d| 1.0 / d as f64)
                    .sum()
            })
            .collect(),
        ClassicMeasure::Betweenness => betweenness(g),
        ClassicMeasure::Eigenvector => eigenvector(g)?,
        ClassicMeasure::Katz => {
            let (scores, alpha) = katz(g, params.katz_alpha)?;
            katz_alpha = Some(alpha);
            scores
        }
    };
    Ok(ClassicCentralityReport {
        measure,
        scores,
        katz_alpha,
    })
}

/// Hop distances from `s` along directed edges; `None` when unreachable.
pub fn bfs_distances(g: &Graph, s: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[s] = Some(0);
    let mut queue = VecDeque::from([s]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &(v, _) in g.out_neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Brandes' algorithm on hop distances, endpoints excluded, no
/// normalization. Undirected graphs count each unordered pair once.
fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let mut cb = vec![0.0; n];
    for s in 0..n {
        let mut stack = Vec::with_capacity(n);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut sigma = vec![0.0f64; n];
        let mut dist = vec![-1i64; n];
        sigma[s] = 1.0;
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            stack.push(v);
            for &(w, _) in g.out_neighbors(v) {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        while let Some(w) = stack.pop() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    if !g.is_directed() {
        cb.iter_mut().for_each(|c| *c /= 2.0);
    }
    cb
}

/// Unweighted adjacency, `adj[(u, v)] = 1` for an edge `u → v`.
pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for arc in g.arcs() {
        a[(arc.source, arc.target)] = 1.0;
    }
    a
}

/// Dominant eigenvector of the adjacency, accumulating along in-bound
/// edges. Iterates with `Aᵀ + I`, which has the same Perron vector and is
/// primitive for strongly connected graphs.
fn eigenvector(g: &Graph) -> Result<Vec<f64>> {
    let n = g.node_count();
    let dag = g.scc_decompose();
    if dag.len() != 1 {
        return Err(Error::NotStronglyConnected { components: dag.len() });
    }
    let max_iter = 100_000;
    let mut x = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    for _ in 0..max_iter {
        let mut next = x.clone();
        for arc in g.arcs() {
            next[arc.target] += x[arc.source];
        }
        let norm = next.norm();
        next /= norm;
        let change = (&next - &x).amax();
        x = next;
        if change < 1e-13 {
            return Ok(x.iter().copied().collect());
        }
    }
    Err(Error::NoConvergence {
        what: "eigenvector power iteration",
        iterations: max_iter,
    })
}

/// Spectral radius of the unweighted adjacency matrix.
pub fn adjacency_spectral_radius(g: &Graph) -> Result<f64> {
    if g.node_count() == 0 {
        return Ok(0.0);
    }
    Ok(linalg::eigenvalues(&adjacency(g))?
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max))
}

/// Katz scores `Σ_{ℓ≥1} α^ℓ·(Aᵀ)^ℓ·1`, from `(I − α·Aᵀ)·k = 1`, `k − 1`.
fn katz(g: &Graph, alpha: Option<f64>) -> Result<(Vec<f64>, f64)> {
    let n = g.node_count();
    let lambda_max = adjacency_spectral_radius(g)?;
    // nilpotent adjacency (a DAG): every positive attenuation converges
    let limit = if lambda_max > 1e-12 { 1.0 / lambda_max } else { f64::INFINITY };
    let alpha = alpha.unwrap_or(if limit.is_finite() { 0.85 * limit } else { 0.85 });
    if !(alpha > 0.0 && alpha < limit) {
        return Err(Error::KatzAlpha {
            alpha,
            limit,
            lambda_max,
        });
    }
    let m = DMatrix::identity(n, n) - adjacency(g).transpose() * alpha;
    let k = LU::new(m)
        .solve(&DVector::from_element(n, 1.0))
        .ok_or(Error::KatzAlpha {
            alpha,
            limit,
            lambda_max,
        })?;
    Ok((k.iter().map(|v| v - 1.0).collect(), alpha))
}

/// Nodes with the best score (ties within `1e-9` relative).
pub fn best_nodes(measure: ClassicMeasure, scores: &[f64]) -> Vec<usize> {
    let sign = if measure.lower_is_central() { -1.0 } else { 1.0 };
    let best = scores.iter().map(|s| sign * s).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * best.abs().max(1.0);
    scores
        .iter()
        .enumerate()
        .filter(|(_, s)| sign * **s >= best - tol)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapEntry {
    pub measure: ClassicMeasure,
    pub best_nodes: Vec<usize>,
    /// Highest `Hc` among the measure's best nodes.
    pub hc_max: f64,
    /// Lowest `Hc` among the measure's best nodes.
    pub hc_min: f64,
    pub attains_one: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub entries: Vec<OverlapEntry>,
    pub any_attains_one: bool,
    pub herdability: HerdabilityCentralityReport,
}

pub fn overlap_report(g: &Graph, d: f64, policy: CutoffPolicy, params: ClassicParams) -> Result<OverlapReport> {
    let herd = herdability_centrality(g, d, policy)?;
    overlap_from_report(g, herd, params)
}

pub fn overlap_from_report(g: &Graph, herd: HerdabilityCentralityReport, params: ClassicParams) -> Result<OverlapReport> {
    let mut entries = Vec::new();
    for measure in ClassicMeasure::ALL {
        let report = classic_centrality(g, measure, params)?;
        let best = best_nodes(measure, &report.scores);
        let hcs: Vec<f64> = best.iter().filter_map(|&i| herd.centrality[i]).collect();
        let hc_max = hcs.iter().copied().fold(f64::NAN, f64::max);
        let hc_min = hcs.iter().copied().fold(f64::NAN, f64::min);
        entries.push(OverlapEntry {
            measure,
            best_nodes: best,
            hc_max,
            hc_min,
            attains_one: hc_max >= 1.0 - ARGMIN_TOL,
        });
    }
    Ok(OverlapReport {
        any_attains_one: entries.iter().any(|e| e.attains_one),
        entries,
        herdability: herd,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HubDegreeReport {
    pub top_fraction: f64,
    /// Top nodes by `Hc`, descending, ties by id.
    pub top_nodes: Vec<usize>,
    pub overall_avg_degree: f64,
    pub top_avg_degree: f64,
}

pub fn hub_degree_report(g: &Graph, d: f64, top_fraction: f64, policy: CutoffPolicy) -> Result<HubDegreeReport> {
    let herd = herdability_centrality(g, d, policy)?;
    hub_degree_from_report(g, &herd, top_fraction)
}

/// Mean total degree of the top `⌈fraction·n⌉` nodes by `Hc` against the
/// whole graph.
pub fn hub_degree_from_report(g: &Graph, herd: &HerdabilityCentralityReport, top_fraction: f64) -> Result<HubDegreeReport> {
    if !(top_fraction > 0.0 && top_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("top fraction {top_fraction} must lie in (0, 1]")));
    }
    let n = g.node_count();
    let degrees = g.degrees();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| herd.centrality[i].unwrap_or(f64::NEG_INFINITY);
    order.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    // guard against 0.1·30 = 3.0000000000000004 rounding up
    let count = ((top_fraction * n as f64) - 1e-9).ceil().max(1.0) as usize;
    let top_nodes: Vec<usize> = order.into_iter().take(count.min(n)).collect();
    let mean = |nodes: &mut dyn Iterator<Item = usize>| {
        let (sum, cnt) = nodes.fold((0usize, 0usize), |(s, c), u| (s + degrees[u].total, c + 1));
        if cnt == 0 {
            0.0
        } else {
            sum as f64 / cnt as f64
        }
    };
    Ok(HubDegreeReport {
        top_fraction,
        overall_avg_degree: mean(&mut (0..n)),
        top_avg_degree: mean(&mut top_nodes.iter().copied()),
        top_nodes,
    })
}
