//! Directed and undirected weighted graphs with original node labels.
//!
//! Node ids are always `0..n`. Undirected graphs store both orientations of
//! every edge, so traversal code never needs to special-case them.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    directed: bool,
    labels: Vec<String>,
    /// Sorted by `(source, target)`; both orientations when undirected.
    arcs: Vec<Arc>,
    out_adj: Vec<Vec<(usize, f64)>>,
    in_adj: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree {
    pub in_degree: usize,
    pub out_degree: usize,
    pub total: usize,
}

/// Condensation of a graph into strongly connected components.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDag {
    pub component_of: Vec<usize>,
    /// Components numbered by their smallest member; members sorted.
    pub components: Vec<Vec<usize>>,
    pub dag_edges: BTreeSet<(usize, usize)>,
    /// Components with no inbound DAG edge, ascending.
    pub roots: Vec<usize>,
}

impl SccDag {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl Graph {
    /// Builds a graph on `n` nodes labelled `"0".."n-1"`.
    pub fn from_edges<I>(n: usize, edges: I, directed: bool) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let labels = (0..n).map(|i| i.to_string()).collect();
        Self::with_labels(labels, edges, directed).map(|(g, _)| g)
    }

    /// Builds a graph from labels and edges, returning any warnings raised
    /// while normalizing (dropped self-loops, merged duplicates).
    pub fn with_labels<I>(labels: Vec<String>, edges: I, directed: bool) -> Result<(Self, Vec<String>)>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let n = labels.len();
        let mut warnings = Vec::new();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            for id in [u, v] {
                if id >= n {
                    return Err(Error::InvalidNode { id, n });
                }
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge {u}->{v} has non-positive weight {w}"
                )));
            }
            if u == v {
                warnings.push(format!("dropped self-loop on node {}", labels[u]));
                continue;
            }
            let key = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            match merged.get_mut(&key) {
                Some(acc) => {
                    warnings.push(format!(
                        "duplicate edge {} {}: weights summed",
                        labels[key.0], labels[key.1]
                    ));
                    *acc += w;
                }
                None => {
                    merged.insert(key, w);
                }
            }
        }
        for w in &warnings {
            log::warn!("{w}");
        }

        let mut arcs: Vec<Arc> = Vec::with_capacity(if directed { merged.len() } else { 2 * merged.len() });
        for (&(u, v), &w) in &merged {
            arcs.push(Arc { source: u, target: v, weight: w });
            if !directed {
                arcs.push(Arc { source: v, target: u, weight: w });
            }
        }
        arcs.sort_by_key(|a| (a.source, a.target));

        let mut out_adj = vec![Vec::new(); n];
        let mut in_adj = vec![Vec::new(); n];
        for a in &arcs {
            out_adj[a.source].push((a.target, a.weight));
            in_adj[a.target].push((a.source, a.weight));
        }
        Ok((
            Graph {
                n,
                directed,
                labels,
                arcs,
                out_adj,
                in_adj,
            },
            warnings,
        ))
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Number of edges `L`: unordered pairs for undirected graphs.
    pub fn edge_count(&self) -> usize {
        if self.directed {
            self.arcs.len()
        } else {
            self.arcs.len() / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn out_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.out_adj[u]
    }

    pub fn in_neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.in_adj[u]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: usize) -> &str {
        &self.labels[id]
    }

    pub fn id_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn check_node(&self, id: usize) -> Result<()> {
        if id < self.n {
            Ok(())
        } else {
            Err(Error::InvalidNode { id, n: self.n })
        }
    }

    /// Pure edge counts; weights are ignored.
    pub fn degrees(&self) -> Vec<Degree> {
        (0..self.n)
            .map(|u| {
                let in_degree = self.in_adj[u].len();
                let out_degree = self.out_adj[u].len();
                let total = if self.directed { in_degree + out_degree } else { out_degree };
                Degree {
                    in_degree,
                    out_degree,
                    total,
                }
            })
            .collect()
    }

    /// All nodes reachable from `sources` along directed edges, sources
    /// included, ascending.
    pub fn reachable_from(&self, sources: &[usize]) -> Result<Vec<usize>> {
        if sources.is_empty() {
            return Err(Error::InvalidArgument("source set is empty".into()));
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            self.check_node(s)?;
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &self.out_adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok((0..self.n).filter(|&u| seen[u]).collect())
    }

    /// Connected components ignoring edge direction, each sorted, ordered by
    /// smallest member.
    pub fn weakly_connected_components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![usize::MAX; self.n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = Vec::new();
            comp[s] = c;
            stack.push(s);
            while let Some(u) = stack.pop() {
                members.push(u);
                for &(v, _) in self.out_adj[u].iter().chain(self.in_adj[u].iter()) {
                    if comp[v] == usize::MAX {
                        comp[v] = c;
                        stack.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Tarjan's algorithm, iterative so deep graphs cannot overflow the
    /// stack. Runs in `O(n + |E|)`.
    pub fn scc_decompose(&self) -> SccDag {
        const UNVISITED: usize = usize::MAX;
        let n = self.n;
        let mut index = vec![UNVISITED; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut call: Vec<(usize, usize)> = Vec::new();
        let mut next_index = 0usize;
        let mut raw: Vec<Vec<usize>> = Vec::new();

        for s in 0..n {
            if index[s] != UNVISITED {
                continue;
            }
            index[s] = next_index;
            low[s] = next_index;
            next_index += 1;
            stack.push(s);
            on_stack[s] = true;
            call.push((s, 0));

            while let Some(frame) = call.last_mut() {
                let v = frame.0;
                if frame.1 < self.out_adj[v].len() {
                    let w = self.out_adj[v][frame.1].0;
                    frame.1 += 1;
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    call.pop();
                    if let Some(&(parent, _)) = call.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        raw.push(comp);
                    }
                }
            }
        }

        raw.sort_by_key(|c| c[0]);
        let mut component_of = vec![0usize; n];
        for (c, members) in raw.iter().enumerate() {
            for &u in members {
                component_of[u] = c;
            }
        }
        let mut dag_edges = BTreeSet::new();
        let mut has_inbound = vec![false; raw.len()];
        for a in &self.arcs {
            let (cu, cv) = (component_of[a.source], component_of[a.target]);
            if cu != cv {
                dag_edges.insert((cu, cv));
                has_inbound[cv] = true;
            }
        }
        let roots = (0..raw.len()).filter(|&c| !has_inbound[c]).collect();
        SccDag {
            component_of,
            components: raw,
            dag_edges,
            roots,
        }
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.n > 0 && self.scc_decompose().len() == 1
    }

    /// Subgraph induced by `nodes`, keeping their labels. New ids follow the
    /// ascending order of the old ids.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Graph> {
        let mut keep: Vec<usize> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut new_id = vec![usize::MAX; self.n];
        for (i, &u) in keep.iter().enumerate() {
            self.check_node(u)?;
            new_id[u] = i;
        }
        let labels = keep.iter().map(|&u| self.labels[u].clone()).collect();
        let edges = self
            .arcs
            .iter()
            .filter(|a| new_id[a.source] != usize::MAX && new_id[a.target] != usize::MAX)
            .filter(|a| self.directed || a.source < a.target)
            .map(|a| (new_id[a.source], new_id[a.target], a.weight));
        Graph::with_labels(labels, edges, self.directed).map(|(g, _)| g)
    }

    /// Largest strongly connected component (ties go to the component with
    /// the smallest member) as a standalone graph.
    pub fn largest_scc(&self) -> Result<Graph> {
        let dag = self.scc_decompose();
        let best = dag
            .components
            .iter()
            .enumerate()
            .max_by_key(|(c, members)| (members.len(), std::cmp::Reverse(*c)))
            .map(|(_, m)| m.clone())
            .ok_or_else(|| Error::InvalidArgument("graph has no nodes".into()))?;
        self.induced_subgraph(&best)
    }

    /// Deterministic edge-list text that [`parse_edge_list`] reads back to
    /// the same graph.
    pub fn to_edge_list(&self) -> String {
        let lines: Vec<(usize, usize, f64)> = self
            .arcs
            .iter()
            .filter(|a| self.directed || a.source < a.target)
            .map(|a| (a.source, a.target, a.weight))
            .collect();

        let mut touched = vec![false; self.n];
        let mut first_seen = Vec::with_capacity(self.n);
        for &(u, v, _) in &lines {
            for x in [u, v] {
                if !touched[x] {
                    touched[x] = true;
                    first_seen.push(x);
                }
            }
        }
        let numeric = numeric_labels(&self.labels);
        // Non-numeric ids come from first appearance, so declare every node
        // up front unless the edge lines already introduce them in id order.
        let declare_all = !numeric
            && (first_seen.len() < self.n || first_seen.iter().enumerate().any(|(i, &u)| i != u));

        let mut out = String::new();
        for u in 0..self.n {
            if declare_all || !touched[u] {
                let _ = writeln!(out, "{}", self.labels[u]);
            }
        }
        for (u, v, w) in lines {
            if w == 1.0 {
                let _ = writeln!(out, "{} {}", self.labels[u], self.labels[v]);
            } else {
                let _ = writeln!(out, "{} {} {}", self.labels[u], self.labels[v], w);
            }
        }
        out
    }
}

fn numeric_labels(labels: &[String]) -> bool {
    labels.iter().all(|l| l.parse::<u64>().is_ok())
}

/// Reads the whitespace-separated edge-list format: `u v [w]` per line, `#`
/// comments, and single-token lines declaring an isolated node.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph> {
    parse_edge_list_with_warnings(text, directed).map(|(g, _)| g)
}

pub fn parse_edge_list_with_warnings(text: &str, directed: bool) -> Result<(Graph, Vec<String>)> {
    let mut order: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut raw_edges: Vec<(usize, usize, f64)> = Vec::new();

    let mut intern = |tok: &str, line: usize| -> Result<usize> {
        if tok.starts_with('#') {
            return Err(Error::Parse {
                line,
                reason: format!("label {tok:?} may not start with '#'"),
            });
        }
        if let Some(&i) = index.get(tok) {
            return Ok(i);
        }
        let i = order.len();
        order.push(tok.to_string());
        index.insert(tok.to_string(), i);
        Ok(i)
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        match toks.as_slice() {
            [u] => {
                intern(u, line)?;
            }
            [u, v] | [u, v, _] => {
                let w = match toks.get(2) {
                    None => 1.0,
                    Some(t) => {
                        let w: f64 = t.parse().map_err(|_| Error::Parse {
                            line,
                            reason: format!("weight {t:?} is not a number"),
                        })?;
                        if !(w.is_finite() && w > 0.0) {
                            return Err(Error::Parse {
                                line,
                                reason: format!("non-positive weight {t}"),
                            });
                        }
                        w
                    }
                };
                let a = intern(u, line)?;
                let b = intern(v, line)?;
                raw_edges.push((a, b, w));
            }
            _ => {
                return Err(Error::Parse {
                    line,
                    reason: format!("expected \"u v [w]\", found {} fields", toks.len()),
                })
            }
        }
    }

    // Integer labels keep their numeric order; anything else keeps order of
    // first appearance.
    let mut perm: Vec<usize> = (0..order.len()).collect();
    if numeric_labels(&order) {
        perm.sort_by_key(|&i| (order[i].parse::<u64>().unwrap_or(0), order[i].clone()));
    }
    let mut new_id = vec![0usize; order.len()];
    for (new, &old) in perm.iter().enumerate() {
        new_id[old] = new;
    }
    let labels: Vec<String> = perm.iter().map(|&old| order[old].clone()).collect();
    let edges = raw_edges
        .into_iter()
        .map(|(a, b, w)| (new_id[a], new_id[b], w));
    Graph::with_labels(labels, edges, directed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)], true).unwrap()
    }

    fn cycle3() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], true).unwrap()
    }

    fn star5() -> Graph {
        Graph::from_edges(5, (1..5).map(|l| (0, l, 1.0)), false).unwrap()
    }

    #[test]
    fn parse_directed_path() {
        let g = parse_edge_list("0 1\n1 2\n", true).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn parse_undirected_stores_both_orientations() {
        let g = parse_edge_list("a b 2.0\n", false).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(
            g.arcs(),
            &[
                Arc { source: 0, target: 1, weight: 2.0 },
                Arc { source: 1, target: 0, weight: 2.0 }
            ]
        );
        assert_eq!(g.labels(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn parse_rejects_bad_weights_and_lines() {
        match parse_edge_list("0 1 -1\n", true) {
            Err(Error::Parse { line: 1, reason }) => assert!(reason.contains("non-positive")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_edge_list("# c\n0 1\n0 1 0\n", true),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 x\n", true),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_edge_list("0 1 2 3\n", true),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn parse_numeric_labels_sorted_numerically() {
        let g = parse_edge_list("10 2\n2 1\n", true).unwrap();
        assert_eq!(g.labels(), &["1", "2", "10"]);
        assert_eq!(g.out_neighbors(2), &[(1, 1.0)]);
    }

    #[test]
    fn self_loops_dropped_and_duplicates_summed() {
        let (g, warnings) = parse_edge_list_with_warnings("0 0\n0 1\n0 1 2.5\n", true).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.arcs(), &[Arc { source: 0, target: 1, weight: 3.5 }]);
        assert_eq!(warnings.len(), 2);

        let (g, _) = parse_edge_list_with_warnings("a b\nb a\n", false).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.out_neighbors(0), &[(1, 2.0)]);
    }

    #[test]
    fn serialize_round_trips() {
        let text = "x y\ny z 0.5\nq\n";
        let g = parse_edge_list(text, true).unwrap();
        let s1 = g.to_edge_list();
        let g2 = parse_edge_list(&s1, true).unwrap();
        assert_eq!(g, g2);
        assert_eq!(s1, g2.to_edge_list());
    }

    #[test]
    fn scc_examples() {
        let dag = cycle3().scc_decompose();
        assert_eq!(dag.components, vec![vec![0, 1, 2]]);
        assert_eq!(dag.roots, vec![0]);

        let dag = path3().scc_decompose();
        assert_eq!(dag.components, vec![vec![0], vec![1], vec![2]]);
        assert_eq!(dag.roots, vec![0]);

        let g = Graph::from_edges(4, [(0, 2, 1.0), (1, 2, 1.0), (2, 3, 1.0)], true).unwrap();
        let dag = g.scc_decompose();
        assert_eq!(dag.len(), 4);
        let roots: Vec<_> = dag.roots.iter().map(|&c| dag.components[c].clone()).collect();
        assert_eq!(roots, vec![vec![0], vec![1]]);
        assert_eq!(
            dag.dag_edges.iter().copied().collect::<Vec<_>>(),
            vec![(0, 2), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn weak_components_examples() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)], true).unwrap();
        assert_eq!(g.weakly_connected_components().len(), 2);
        assert_eq!(star5().weakly_connected_components().len(), 1);
        let g = Graph::from_edges(4, std::iter::empty(), true).unwrap();
        assert_eq!(g.weakly_connected_components().len(), 4);
    }

    #[test]
    fn reachability_examples() {
        assert_eq!(path3().reachable_from(&[0]).unwrap(), vec![0, 1, 2]);
        assert_eq!(path3().reachable_from(&[2]).unwrap(), vec![2]);
        assert_eq!(cycle3().reachable_from(&[1]).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            path3().reachable_from(&[7]),
            Err(Error::InvalidNode { id: 7, n: 3 })
        ));
        assert!(path3().reachable_from(&[]).is_err());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(star5().degrees()[0].total, 4);
        assert_eq!(star5().degrees()[1].total, 1);
        let d = path3().degrees()[1];
        assert_eq!((d.in_degree, d.out_degree), (1, 1));
        let g = Graph::from_edges(3, [(0, 1, 1.0)], true).unwrap();
        assert_eq!(
            g.degrees()[2],
            Degree { in_degree: 0, out_degree: 0, total: 0 }
        );
    }

    #[test]
    fn largest_scc_extraction() {
        // 0->1->2->0 plus tail 2->3->4 and separate 2-cycle 5<->6
        let g = Graph::from_edges(
            7,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 0, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (5, 6, 1.0),
                (6, 5, 1.0),
            ],
            true,
        )
        .unwrap();
        let s = g.largest_scc().unwrap();
        assert_eq!(s.node_count(), 3);
        assert_eq!(s.edge_count(), 3);
        assert!(s.is_strongly_connected());
    }
}
