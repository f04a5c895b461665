//! Test-only reference implementations. Each one is deliberately naive and
//! shares no code path with the library routine it checks.
#![allow(dead_code)]

use herd_core::dynamics::SystemMatrices;
use herd_core::Graph;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random digraph with arbitrary structure (possibly disconnected, possibly
/// with isolated nodes).
pub fn random_digraph(n: usize, p: f64, seed: u64) -> Graph {
    herd_core::synth::erdos_renyi(n, p, true, seed)
}

/// Boolean transitive closure by Warshall's algorithm; `reach[u][v]` iff a
/// directed path (possibly empty) leads from `u` to `v`.
pub fn transitive_closure(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut r = vec![vec![false; n]; n];
    for (u, row) in r.iter_mut().enumerate() {
        row[u] = true;
    }
    for a in g.arcs() {
        r[a.source][a.target] = true;
        if !g.is_directed() {
            r[a.target][a.source] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

pub fn covers_all(reach: &[Vec<bool>], inputs: &[usize]) -> bool {
    (0..reach.len()).all(|v| inputs.iter().any(|&u| reach[u][v]))
}

/// Whether any `k`-subset of nodes reaches every node.
pub fn some_subset_covers(reach: &[Vec<bool>], k: usize) -> bool {
    fn rec(reach: &[Vec<bool>], start: usize, k: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return covers_all(reach, chosen);
        }
        for u in start..reach.len() {
            chosen.push(u);
            if rec(reach, u + 1, k, chosen) {
                return true;
            }
            chosen.pop();
        }
        false
    }
    if k == 0 {
        return reach.is_empty();
    }
    rec(reach, 0, k, &mut Vec::new())
}

/// Hop distances by Floyd–Warshall.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let mut d = vec![vec![None; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = Some(0);
    }
    for a in g.arcs() {
        d[a.source][a.target] = Some(1);
        if !g.is_directed() {
            d[a.target][a.source] = Some(1);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|c| x + y < c) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Dense 0/1 adjacency, symmetric for undirected graphs.
pub fn adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.node_count();
    let mut a = DMatrix::zeros(n, n);
    for arc in g.arcs() {
        a[(arc.source, arc.target)] = 1.0;
        if !g.is_directed() {
            a[(arc.target, arc.source)] = 1.0;
        }
    }
    a
}

/// Betweenness by explicit pair enumeration. The number of shortest `s → t`
/// paths is `(A^k)_{st}` with `k = dist(s, t)`, since every walk of minimal
/// length is a path.
pub fn betweenness_enumeration(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let dist = floyd_warshall(g);
    let a = adjacency(g);
    let mut powers = vec![DMatrix::identity(n, n)];
    for k in 1..n.max(1) {
        let next = &powers[k - 1] * &a;
        powers.push(next);
    }
    let sigma = |s: usize, t: usize| -> f64 { dist[s][t].map_or(0.0, |k| powers[k][(s, t)]) };
    let mut cb = vec![0.0; n];
    for s in 0..n {
        for t in 0..n {
            let Some(dst) = dist[s][t] else { continue };
            if s == t {
                continue;
            }
            for (v, c) in cb.iter_mut().enumerate() {
                if v == s || v == t {
                    continue;
                }
                if let (Some(x), Some(y)) = (dist[s][v], dist[v][t]) {
                    if x + y == dst {
                        *c += sigma(s, v) * sigma(v, t) / sigma(s, t);
                    }
                }
            }
        }
    }
    if !g.is_directed() {
        cb.iter_mut().for_each(|c| *c /= 2.0);
    }
    cb
}

/// Harmonic closeness `Σ_{t≠u} 1/dist(u, t)` over reachable `t`.
pub fn closeness_enumeration(g: &Graph) -> Vec<f64> {
    floyd_warshall(g)
        .iter()
        .map(|row| row.iter().flatten().filter(|&&d| d > 0).map(|&d| 1.0 / d as f64).sum())
        .collect()
}

/// Largest finite out-distance.
pub fn eccentricity_enumeration(g: &Graph) -> Vec<f64> {
    floyd_warshall(g)
        .iter()
        .map(|row| row.iter().flatten().copied().max().unwrap_or(0) as f64)
        .collect()
}

/// `Σ_{ℓ=1}^{terms} α^ℓ (Aᵀ)^ℓ 1`.
pub fn katz_series(g: &Graph, alpha: f64, terms: usize) -> Vec<f64> {
    let at = adjacency(g).transpose();
    let n = g.node_count();
    let mut term = DVector::from_element(n, 1.0);
    let mut sum = DVector::zeros(n);
    for _ in 0..terms {
        term = &at * term * alpha;
        sum += &term;
    }
    sum.iter().copied().collect()
}

/// Size of a maximum matching between out-copies and in-copies of the nodes,
/// by exhaustive search over arcs.
pub fn exhaustive_matching(g: &Graph) -> usize {
    let n = g.node_count();
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    for a in g.arcs() {
        arcs.push((a.source, a.target));
        if !g.is_directed() {
            arcs.push((a.target, a.source));
        }
    }
    // group arcs by source so each source picks at most one target
    let mut by_source = vec![Vec::new(); n];
    for (u, v) in arcs {
        by_source[u].push(v);
    }
    fn rec(u: usize, by_source: &[Vec<usize>], used: &mut [bool], best_rest: &[usize], size: usize, best: &mut usize) {
        if u == by_source.len() {
            *best = (*best).max(size);
            return;
        }
        if size + best_rest[u] <= *best {
            return;
        }
        for &v in &by_source[u] {
            if !used[v] {
                used[v] = true;
                rec(u + 1, by_source, used, best_rest, size + 1, best);
                used[v] = false;
            }
        }
        rec(u + 1, by_source, used, best_rest, size, best);
    }
    // upper bound on matches available from sources u.. for pruning
    let mut best_rest = vec![0; n + 1];
    for u in (0..n).rev() {
        best_rest[u] = best_rest[u + 1] + usize::from(!by_source[u].is_empty());
    }
    let mut best = 0;
    rec(0, &by_source, &mut vec![false; n], &best_rest, 0, &mut best);
    best
}

/// Controllability matrix rank `rank [b, Ab, …, A^{n−1}b]` by SVD.
pub fn kalman_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let mut c = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        c.columns_mut(k * m, m).copy_from(&block);
        block = a * block;
    }
    let sv = c.singular_values();
    let top = sv.max();
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

/// Characteristic polynomial coefficients `c_0 = 1, c_1, …, c_n` of
/// `det(sI − A)` by Faddeev–LeVerrier.
pub fn char_poly(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![1.0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    let id = DMatrix::<f64>::identity(n, n);
    for k in 1..=n {
        m = a * &m + &id * coeffs[k - 1];
        let c = -(a * &m).trace() / k as f64;
        coeffs.push(c);
    }
    coeffs
}

/// Routh–Hurwitz test: every root of the polynomial has negative real part.
pub fn routh_hurwitz_stable(coeffs: &[f64]) -> bool {
    let n = coeffs.len() - 1;
    if coeffs.iter().any(|&c| c <= 0.0) {
        return false;
    }
    let width = n / 2 + 1;
    let mut rows: Vec<Vec<f64>> = vec![vec![0.0; width]; n + 1];
    for (i, &c) in coeffs.iter().enumerate() {
        rows[i % 2][i / 2] = c;
    }
    for r in 2..=n {
        let pivot = rows[r - 1][0];
        if pivot <= 0.0 {
            return false;
        }
        for j in 0..width - 1 {
            rows[r][j] = (pivot * rows[r - 2][j + 1] - rows[r - 2][0] * rows[r - 1][j + 1]) / pivot;
        }
    }
    rows.iter().all(|row| row[0] > 0.0)
}

/// `∫_0^{t_f} e^{Aτ}BBᵀe^{Aᵀτ} dτ` by composite Simpson, stepping each
/// column of `e^{Aτ}B` with a single propagator `e^{Ah}`.
pub fn gramian_simpson(sys: &SystemMatrices, t_f: f64, steps: usize) -> DMatrix<f64> {
    let steps = steps + steps % 2;
    let h = t_f / steps as f64;
    let prop = (&sys.a * h).exp();
    let n = sys.a.nrows();
    let mut w = DMatrix::zeros(n, n);
    let mut next = DVector::zeros(n);
    for col in sys.b.column_iter() {
        let mut y: DVector<f64> = col.into_owned();
        for k in 0..=steps {
            let weight = if k == 0 || k == steps {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w.ger(weight, &y, &y, 1.0);
            next.gemv(1.0, &prop, &y, 0.0);
            std::mem::swap(&mut y, &mut next);
        }
    }
    w * (h / 3.0)
}

/// Gershgorin bound on the spectral radius.
pub fn gershgorin(a: &DMatrix<f64>) -> f64 {
    a.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// `min xᵀ W⁻¹ x` over `x ≥ d` for an invertible `W` (n ≤ 4), by grid search
/// over a box that must contain the minimizer, then repeated zooming around
/// the best grid point.
pub fn grid_min_energy(w: &DMatrix<f64>, d: f64) -> f64 {
    let n = w.nrows();
    let winv = w.clone().try_inverse().expect("invertible Gramian");
    let energy = |x: &DVector<f64>| (x.transpose() * &winv * x)[(0, 0)];
    // any x with J(x) ≤ J(d·1) has ‖x‖² ≤ λ_max(W)·J(d·1)
    let j0 = energy(&DVector::from_element(n, d));
    let lmax = w.symmetric_eigenvalues().max();
    let radius = (lmax * j0).sqrt();
    let per_dim = 9usize;
    let mut center = DVector::from_element(n, d + 0.5 * (radius - d).max(0.0));
    let mut half = 0.5 * (radius - d).max(d) + 1e-12;
    let mut best = (j0, DVector::from_element(n, d));
    for _ in 0..200 {
        let total = per_dim.pow(n as u32);
        for idx in 0..total {
            let mut x = DVector::zeros(n);
            let mut rem = idx;
            for k in 0..n {
                let step = (rem % per_dim) as f64 / (per_dim - 1) as f64;
                rem /= per_dim;
                x[k] = (center[k] - half + 2.0 * half * step).max(d);
            }
            let j = energy(&x);
            if j < best.0 {
                best = (j, x);
            }
        }
        center = best.1.clone();
        half *= 0.6;
        if half < 1e-12 * radius.max(d) {
            break;
        }
    }
    best.0
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Random seed-derived size in `lo..=hi`.
pub fn size_for(seed: u64, lo: usize, hi: usize) -> usize {
    rng(seed ^ 0x9e37_79b9).random_range(lo..=hi)
}

/// Directed graph on which the in-degree argmax node has `Hc` well below
/// the best node. Found once by a seeded search and stored here verbatim.
pub const OVERLAP_WITNESS: &str = "\
0 3
1 2
1 3
2 0
3 1
";

pub fn star(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|v| (0, v, 1.0)).collect::<Vec<_>>(), false).unwrap()
}

pub fn cycle(n: usize, directed: bool) -> Graph {
    Graph::from_edges(n, (0..n).map(|v| (v, (v + 1) % n, 1.0)).collect::<Vec<_>>(), directed).unwrap()
}

pub fn complete(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v, 1.0))).collect();
    Graph::from_edges(n, edges, false).unwrap()
}
