//! Complete herdability and minimal herding-node selection.
//!
//! A positive system is completely herdable exactly when every state node is
//! reachable from some input node. The smallest input set therefore takes one
//! node from each root component of the SCC condensation, which is found in
//! `O(n + |E|)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// How to pick the representative of a root SCC. Remaining ties go to the
/// smallest id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    SmallestId,
    MaxOutDegree,
    MaxTotalDegree,
}

impl std::str::FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smallest-id" => Ok(TieBreak::SmallestId),
            "max-out-degree" => Ok(TieBreak::MaxOutDegree),
            "max-total-degree" => Ok(TieBreak::MaxTotalDegree),
            other => Err(Error::InvalidArgument(format!(
                "unknown tie-break policy {other:?} (smallest-id|max-out-degree|max-total-degree)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HerdingCover {
    pub herding_nodes: Vec<usize>,
    /// Herding node count `N_H`.
    pub herding_count: usize,
    /// Root SCC count `N_r`.
    pub root_count: usize,
    /// Weakly connected component count `N_w`.
    pub weak_count: usize,
    /// `n_H = N_H / n`.
    pub herding_fraction: f64,
    /// `n_w = N_H / N_w`.
    pub per_weak_component: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HerdabilityCheck {
    pub herdable: bool,
    pub unreached: Vec<usize>,
}

/// Input connectability test for an explicit input placement.
pub fn is_herdable(g: &Graph, input_nodes: &[usize]) -> Result<HerdabilityCheck> {
    if input_nodes.is_empty() {
        return Err(Error::InvalidArgument("input node set is empty".into()));
    }
    let reached = g.reachable_from(input_nodes)?;
    let mut hit = vec![false; g.node_count()];
    for u in reached {
        hit[u] = true;
    }
    let unreached: Vec<usize> = (0..g.node_count()).filter(|&u| !hit[u]).collect();
    Ok(HerdabilityCheck {
        herdable: unreached.is_empty(),
        unreached,
    })
}

/// One representative per root SCC of the condensation.
pub fn herding_cover(g: &Graph, tie_break: TieBreak) -> HerdingCover {
    let dag = g.scc_decompose();
    let degrees = g.degrees();
    let score = |u: usize| match tie_break {
        TieBreak::SmallestId => 0,
        TieBreak::MaxOutDegree => degrees[u].out_degree,
        TieBreak::MaxTotalDegree => degrees[u].total,
    };

    let mut herding_nodes: Vec<usize> = dag
        .roots
        .iter()
        .map(|&c| {
            let members = &dag.components[c];
            // members are ascending, so the first maximum is the smallest id
            let mut best = members[0];
            for &u in &members[1..] {
                if score(u) > score(best) {
                    best = u;
                }
            }
            best
        })
        .collect();
    herding_nodes.sort_unstable();

    let n = g.node_count();
    let herding_count = herding_nodes.len();
    let weak_count = g.weakly_connected_components().len();
    HerdingCover {
        herding_nodes,
        herding_count,
        root_count: dag.roots.len(),
        weak_count,
        herding_fraction: if n == 0 { 0.0 } else { herding_count as f64 / n as f64 },
        per_weak_component: if weak_count == 0 {
            0.0
        } else {
            herding_count as f64 / weak_count as f64
        },
    }
}

/// Indicator-column input matrix: column `k` is `e_{nodes[k]}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputMatrix {
    pub n: usize,
    pub nodes: Vec<usize>,
}

impl InputMatrix {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.n, self.nodes.len());
        for (k, &i) in self.nodes.iter().enumerate() {
            b[(i, k)] = 1.0;
        }
        b
    }
}

pub fn build_input_matrix(nodes: &[usize], n: usize) -> Result<InputMatrix> {
    if nodes.is_empty() {
        return Err(Error::InvalidArgument("herding cover is empty".into()));
    }
    if let Some(&id) = nodes.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidNode { id, n });
    }
    Ok(InputMatrix {
        n,
        nodes: nodes.to_vec(),
    })
}
