//! Strictly convex QP over the reduced Gramian eigenbasis:
//!
//! ```text
//! minimize   Σ_i α_i² / λ_i        (i = 1..r)
//! subject to V·α ≥ d·1             (n rows)
//! ```
//!
//! The solver works in whitened coordinates `β = Λ^{-1/2}·α`, where the
//! objective is `‖β‖²` and the constraints read `M·β ≥ d` with
//! `M = V·Λ^{1/2}`. The problem is then the least-norm point of a polyhedron.
//!
//! Feasibility is settled first by a phase-1 step: the point of the convex
//! hull of the rows of `M` closest to the origin (Wolfe's algorithm). If that
//! point `z` is nonzero then `m_kᵀz ≥ ‖z‖² > 0` for every row, so a scaled
//! copy of `z` is strictly feasible. Otherwise the hull weights certify that
//! no `β` satisfies all constraints (Gordan's alternative).
//!
//! The optimum is then found with a primal active-set method started from
//! that feasible point.

use nalgebra::{Cholesky, DMatrix, DVector, LU};
use serde::Serialize;

use crate::error::{Error, Result};

/// Phase-1 hull distance (relative to the largest row norm of `M`) at or
/// below which the constraint set is declared empty.
pub const INFEASIBLE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub enum PhaseOne {
    /// Strictly feasible starting point in whitened coordinates.
    Feasible { start: DVector<f64>, distance: f64 },
    Infeasible { distance: f64, weights: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
pub struct KktResiduals {
    /// `‖2·Λ⁻¹·α − Vᵀ·μ‖ / max(1, ‖2·Λ⁻¹·α‖)`
    pub stationarity: f64,
    /// `max_k max(0, d − (V·α)_k) / d`
    pub primal: f64,
    /// `max_k max(0, −μ_k)`, relative to `max(1, ‖μ‖∞)`
    pub dual: f64,
    /// `|μᵀ(V·α − d)| / max(1, J)`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub alpha: DVector<f64>,
    /// Lagrange multipliers, one per constraint row (zero off the active set).
    pub multipliers: DVector<f64>,
    pub active_set: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    pub kkt: KktResiduals,
}

/// Minimum-norm point of the convex hull of the rows of `points`.
/// Returns the point and its barycentric weights.
pub fn min_norm_hull_point(points: &DMatrix<f64>) -> Result<(DVector<f64>, Vec<f64>)> {
    let count = points.nrows();
    let dim = points.ncols();
    if count == 0 {
        return Err(Error::InvalidArgument("empty point set".into()));
    }
    let row = |k: usize| points.row(k).transpose();
    let scale = (0..count).map(|k| row(k).norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let z1 = 1e-12 * scale;
    let z2 = 1e-10;

    let first = (0..count)
        .min_by(|&a, &b| row(a).norm_squared().total_cmp(&row(b).norm_squared()))
        .unwrap();
    let mut set: Vec<usize> = vec![first];
    let mut w: Vec<f64> = vec![1.0];
    let mut x = row(first);

    let max_major = 50 * (count + dim) + 100;
    for _ in 0..max_major {
        let (j, xp) = (0..count)
            .map(|k| (k, x.dot(&row(k))))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - xp <= z1 || set.contains(&j) {
            return Ok((x, scatter(count, &set, &w)));
        }
        set.push(j);
        w.push(0.0);

        loop {
            let v = affine_min_weights(points, &set)?;
            if v.iter().all(|&vi| vi > z2) {
                w = v;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, vi) in w.iter().zip(&v) {
                if *vi <= z2 && wi - vi > 0.0 {
                    theta = theta.min(wi / (wi - vi));
                }
            }
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = theta * vi + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < set.len() {
                if w[k] <= z2 {
                    set.remove(k);
                    w.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= total);
            if set.len() == 1 {
                w = vec![1.0];
                break;
            }
        }
        x = DVector::zeros(dim);
        for (&k, &wk) in set.iter().zip(&w) {
            x += row(k) * wk;
        }
    }
    Err(Error::NoConvergence {
        what: "phase-1 minimum-norm point",
        iterations: max_major,
    })
}

fn scatter(count: usize, set: &[usize], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; count];
    for (&k, &wk) in set.iter().zip(w) {
        out[k] = wk;
    }
    out
}

/// Weights of the minimum-norm point in the affine hull of the selected rows.
fn affine_min_weights(points: &DMatrix<f64>, set: &[usize]) -> Result<Vec<f64>> {
    let s = set.len();
    let mut kkt = DMatrix::zeros(s + 1, s + 1);
    for (a, &i) in set.iter().enumerate() {
        for (b, &j) in set.iter().enumerate() {
            kkt[(a, b)] = points.row(i).dot(&points.row(j));
        }
        kkt[(a, s)] = 1.0;
        kkt[(s, a)] = 1.0;
    }
    let mut rhs = DVector::zeros(s + 1);
    rhs[s] = 1.0;
    let sol = LU::new(kkt).solve(&rhs).ok_or(Error::NoConvergence {
        what: "phase-1 affine subproblem",
        iterations: 0,
    })?;
    Ok(sol.rows(0, s).iter().copied().collect())
}

/// Feasibility of `M·β ≥ d` for `d > 0`.
pub fn phase_one(m: &DMatrix<f64>, d: f64) -> Result<PhaseOne> {
    let (z, weights) = min_norm_hull_point(m)?;
    let row_scale = (0..m.nrows()).map(|k| m.row(k).norm()).fold(0.0, f64::max);
    let distance = z.norm();
    if row_scale == 0.0 || distance <= INFEASIBLE_TOL * row_scale {
        return Ok(PhaseOne::Infeasible { distance, weights });
    }
    let margin = (m * &z).min();
    if margin <= 0.0 {
        return Ok(PhaseOne::Infeasible { distance, weights });
    }
    Ok(PhaseOne::Feasible {
        start: z * (d / margin),
        distance,
    })
}

/// Solves the reduced orthant QP for eigenvalues `lambda` (length `r`, all
/// positive) and orthonormal columns `v` (`n×r`). `max_iter` caps the
/// active-set iterations.
pub fn solve_orthant_qp(
    lambda: &DVector<f64>,
    v: &DMatrix<f64>,
    d: f64,
    max_iter: usize,
) -> Result<QpSolution> {
    let r = lambda.len();
    let n = v.nrows();
    if r == 0 {
        return Err(Error::ZeroGramian);
    }
    if v.ncols() != r {
        return Err(Error::InvalidArgument(format!(
            "basis has {} columns but {r} eigenvalues",
            v.ncols()
        )));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidArgument(format!("threshold d = {d} must be positive")));
    }
    if lambda.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("retained eigenvalues must be positive".into()));
    }
    let sqrt_l = lambda.map(f64::sqrt);
    let mut m = v.clone();
    for (c, s) in sqrt_l.iter().enumerate() {
        m.column_mut(c).scale_mut(*s);
    }

    let start = match phase_one(&m, d)? {
        PhaseOne::Feasible { start, .. } => start,
        PhaseOne::Infeasible { distance, weights } => {
            return Err(Error::Infeasible {
                distance,
                certificate: weights,
            })
        }
    };

    // Warm start: the single-constraint minimizers d·m_k/‖m_k‖². Any that is
    // feasible for all rows is already optimal.
    let feas_tol = 1e-12 * d;
    let mut beta = start;
    let mut best_norm = beta.norm_squared();
    for k in 0..n {
        let mk = m.row(k).transpose();
        let nk = mk.norm_squared();
        if nk == 0.0 {
            continue;
        }
        let cand = mk * (d / nk);
        if cand.norm_squared() < best_norm && (&m * &cand).iter().all(|&s| s >= d - feas_tol) {
            best_norm = cand.norm_squared();
            beta = cand;
        }
    }

    let mut working: Vec<usize> = Vec::new();
    let slack_tol = 1e-10 * d;
    for k in 0..n {
        if m.row(k).dot(&beta.transpose()) - d <= slack_tol && independent(&m, &working, k) {
            working.push(k);
        }
    }

    let mut iterations = 0;
    let gamma_final;
    loop {
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                what: "active-set QP",
                iterations,
            });
        }
        iterations += 1;

        let (target, gamma) = equality_min_norm(&m, &working, d)?;
        let p = &target - &beta;
        if p.norm() <= 1e-12 * beta.norm().max(d) {
            beta = target;
            // objective ‖β‖²: stationarity 2β = M_Wᵀ μ, so μ = 2γ
            let (idx, most_negative) = gamma
                .iter()
                .enumerate()
                .fold((usize::MAX, 0.0f64), |acc, (i, &g)| if 2.0 * g < acc.1 { (i, 2.0 * g) } else { acc });
            let mult_tol = 1e-12 * gamma.amax().max(1.0);
            if idx == usize::MAX || most_negative >= -mult_tol {
                gamma_final = gamma;
                break;
            }
            working.remove(idx);
            continue;
        }

        let mut step = 1.0;
        let mut blocking = None;
        for k in 0..n {
            if working.contains(&k) {
                continue;
            }
            let mk = m.row(k);
            let mp = mk.dot(&p.transpose());
            if mp < 0.0 {
                let slack = (mk.dot(&beta.transpose()) - d).max(0.0);
                let t = slack / -mp;
                if t < step {
                    step = t;
                    blocking = Some(k);
                }
            }
        }
        beta += &p * step;
        if let Some(k) = blocking {
            working.push(k);
        }
    }

    let mut multipliers = DVector::zeros(n);
    for (&k, &g) in working.iter().zip(gamma_final.iter()) {
        multipliers[k] = 2.0 * g;
    }
    let alpha = beta.component_mul(&sqrt_l);
    let objective = beta.norm_squared();
    let mut active_set = working.clone();
    active_set.sort_unstable();
    let kkt = kkt_residuals(lambda, v, d, &alpha, &multipliers);
    Ok(QpSolution {
        alpha,
        multipliers,
        active_set,
        objective,
        iterations,
        kkt,
    })
}

/// Least-norm `β` with `m_k·β = d` for all `k` in `working`, plus the
/// coefficients `γ` with `β = M_Wᵀ·γ`.
fn equality_min_norm(m: &DMatrix<f64>, working: &[usize], d: f64) -> Result<(DVector<f64>, DVector<f64>)> {
    let r = m.ncols();
    if working.is_empty() {
        return Ok((DVector::zeros(r), DVector::zeros(0)));
    }
    let mw = m.select_rows(working);
    let gram = &mw * mw.transpose();
    let rhs = DVector::from_element(working.len(), d);
    let gamma = match Cholesky::new(gram.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => LU::new(gram).solve(&rhs).ok_or(Error::NoConvergence {
            what: "active-set equality subproblem",
            iterations: 0,
        })?,
    };
    Ok((mw.transpose() * &gamma, gamma))
}

fn independent(m: &DMatrix<f64>, working: &[usize], k: usize) -> bool {
    let mk = m.row(k).transpose();
    let norm = mk.norm();
    if norm == 0.0 {
        return false;
    }
    if working.is_empty() {
        return true;
    }
    // residual of m_k after projecting onto the span of the working rows
    let mw = m.select_rows(working);
    let gram = &mw * mw.transpose();
    let coeffs = match Cholesky::new(gram) {
        Some(ch) => ch.solve(&(&mw * &mk)),
        None => return false,
    };
    let resid = &mk - mw.transpose() * coeffs;
    resid.norm() > 1e-9 * norm
}

pub fn kkt_residuals(
    lambda: &DVector<f64>,
    v: &DMatrix<f64>,
    d: f64,
    alpha: &DVector<f64>,
    mu: &DVector<f64>,
) -> KktResiduals {
    let grad = alpha.component_div(lambda) * 2.0;
    let stationarity = (&grad - v.transpose() * mu).norm() / grad.norm().max(1.0);
    let slack = v * alpha - DVector::from_element(v.nrows(), d);
    let primal = slack.iter().map(|&s| (-s).max(0.0)).fold(0.0, f64::max) / d;
    let dual = mu.iter().map(|&m| (-m).max(0.0)).fold(0.0, f64::max) / mu.amax().max(1.0);
    let objective: f64 = alpha.iter().zip(lambda.iter()).map(|(a, l)| a * a / l).sum();
    let complementarity = mu.dot(&slack).abs() / objective.max(1.0);
    KktResiduals {
        stationarity,
        primal,
        dual,
        complementarity,
    }
}
