//! Driver-node baseline from structural controllability: the number of
//! inputs needed is `max(n − |M|, 1)` for a maximum matching `M` of the
//! bipartite graph linking out-copies to in-copies of nodes.

use std::collections::VecDeque;

use serde::Serialize;

use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriverNodeResult {
    /// `N_c`.
    pub driver_count: usize,
    /// `n_c = N_c / n`.
    pub driver_fraction: f64,
    pub matching_size: usize,
    /// Nodes whose in-copy is unmatched; `[0]` for a perfect matching, since
    /// one driver is still required and any node serves.
    pub driver_nodes: Vec<usize>,
    /// `matched_source[v] = Some(u)` when arc `u → v` is in the matching.
    #[serde(skip)]
    pub matched_source: Vec<Option<usize>>,
}

/// Maximum bipartite matching by Hopcroft–Karp, `O(|E|·√n)`.
/// Returns `match_left[u] = Some(v)` (out-copy of `u` to in-copy of `v`).
pub fn hopcroft_karp(n_left: usize, n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let mut match_left: Vec<Option<usize>> = vec![None; n_left];
    let mut match_right: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![INF; n_left];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match match_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }

        // vertex-disjoint shortest augmenting paths, iterative DFS
        let mut next_edge = vec![0usize; n_left];
        for root in 0..n_left {
            if match_left[root].is_some() {
                continue;
            }
            let mut stack = vec![root];
            let mut path_right: Vec<usize> = Vec::new();
            while let Some(&u) = stack.last() {
                if next_edge[u] == adj[u].len() {
                    dist[u] = INF;
                    stack.pop();
                    path_right.pop();
                    continue;
                }
                let v = adj[u][next_edge[u]];
                next_edge[u] += 1;
                match match_right[v] {
                    None => {
                        // augment along stack/path_right
                        path_right.push(v);
                        for (&l, &r) in stack.iter().zip(path_right.iter()) {
                            match_left[l] = Some(r);
                            match_right[r] = Some(l);
                        }
                        break;
                    }
                    Some(w) if dist[w] == dist[u] + 1 => {
                        path_right.push(v);
                        stack.push(w);
                    }
                    _ => {}
                }
            }
        }
    }
    match_left
}

pub fn driver_node_count(g: &Graph) -> DriverNodeResult {
    let n = g.node_count();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|u| g.out_neighbors(u).iter().map(|&(v, _)| v).collect())
        .collect();
    let match_left = hopcroft_karp(n, n, &adj);
    let mut matched_source = vec![None; n];
    for (u, m) in match_left.iter().enumerate() {
        if let Some(v) = *m {
            matched_source[v] = Some(u);
        }
    }
    let matching_size = match_left.iter().filter(|m| m.is_some()).count();
    let mut driver_nodes: Vec<usize> = (0..n).filter(|&v| matched_source[v].is_none()).collect();
    if driver_nodes.is_empty() && n > 0 {
        driver_nodes.push(0);
    }
    let driver_count = (n - matching_size).max(1);
    DriverNodeResult {
        driver_count,
        driver_fraction: if n == 0 { 0.0 } else { driver_count as f64 / n as f64 },
        matching_size,
        driver_nodes,
        matched_source,
    }
}

/// True when no augmenting path exists for the given matching, i.e. the
/// matching is maximum (Berge).
pub fn is_maximum_matching(g: &Graph, matched_source: &[Option<usize>]) -> bool {
    let n = g.node_count();
    let mut match_left = vec![None; n];
    for (v, m) in matched_source.iter().enumerate() {
        if let Some(u) = *m {
            match_left[u] = Some(v);
        }
    }
    // alternating BFS from free left vertices
    let mut seen_left = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&u| match_left[u].is_none()).collect();
    for &u in &queue {
        seen_left[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.out_neighbors(u) {
            if match_left[u] == Some(v) {
                continue;
            }
            match matched_source[v] {
                None => return false,
                Some(w) if !seen_left[w] => {
                    seen_left[w] = true;
                    queue.push_back(w);
                }
                _ => {}
            }
        }
    }
    true
}
