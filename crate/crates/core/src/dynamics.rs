//! Grounded consensus dynamics and controllability Gramians.
//!
//! With herding node `i`, every node relaxes toward its in-neighbours and
//! node `i` is additionally pulled toward the external input:
//!
//! ```text
//! ẋ_j = Σ_{z ∈ N_j} w_zj (x_z − x_j)            j ≠ i
//! ẋ_i = Σ_{z ∈ N_i} w_zi (x_z − x_i) + u − x_i
//! ```
//!
//! i.e. `A = −L_in − e_i·e_iᵀ`, `B = e_i`. The grounding term makes `A`
//! Hurwitz whenever every node is reachable from `i`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;

/// Eigenvalues with real part at or above this are treated as non-decaying.
pub const HURWITZ_TOL: f64 = 1e-10;
/// Relative Lyapunov residual above which a solve is reported as inaccurate.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub herding_nodes: Vec<usize>,
}

impl SystemMatrices {
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Consensus dynamics grounded at a single herding node.
pub fn taylor_consensus(g: &Graph, herding_node: usize) -> Result<SystemMatrices> {
    grounded_consensus(g, &[herding_node])
}

/// Consensus dynamics with one grounded input per listed node; `B` has one
/// indicator column per node.
pub fn grounded_consensus(g: &Graph, herding_nodes: &[usize]) -> Result<SystemMatrices> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("graph has no nodes".into()));
    }
    let input = crate::herd::build_input_matrix(herding_nodes, n)?;
    let mut a = DMatrix::zeros(n, n);
    for j in 0..n {
        for &(z, w) in g.in_neighbors(j) {
            a[(j, z)] += w;
            a[(j, j)] -= w;
        }
    }
    for &i in herding_nodes {
        a[(i, i)] -= 1.0;
    }
    Ok(SystemMatrices {
        a,
        b: input.to_dense(),
        herding_nodes: herding_nodes.to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurwitzCheck {
    pub hurwitz: bool,
    /// Largest real part over the spectrum.
    pub abscissa: f64,
}

pub fn is_hurwitz(a: &DMatrix<f64>) -> Result<HurwitzCheck> {
    if !a.is_square() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {}x{}, expected square",
            a.nrows(),
            a.ncols()
        )));
    }
    let abscissa = linalg::eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(HurwitzCheck {
        hurwitz: abscissa < -HURWITZ_TOL,
        abscissa,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Horizon {
    Finite(f64),
    Infinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    pub w: DMatrix<f64>,
    pub horizon: Horizon,
}

/// Frobenius norm of `A·W + W·Aᵀ + B·Bᵀ` relative to `‖B·Bᵀ‖`.
pub fn lyapunov_residual(sys: &SystemMatrices, w: &DMatrix<f64>) -> f64 {
    let bbt = &sys.b * sys.b.transpose();
    let r = &sys.a * w + w * sys.a.transpose() + &bbt;
    let scale = bbt.norm();
    if scale == 0.0 {
        r.norm()
    } else {
        r.norm() / scale
    }
}

/// Infinite-horizon Gramian from `A·W + W·Aᵀ + B·Bᵀ = 0`.
pub fn lyapunov_gramian(sys: &SystemMatrices) -> Result<Gramian> {
    let check = is_hurwitz(&sys.a)?;
    if !check.hurwitz {
        return Err(Error::NotHurwitz {
            abscissa: check.abscissa,
        });
    }
    let bbt = &sys.b * sys.b.transpose();
    let w = linalg::solve_lyapunov(&sys.a, &bbt)?;
    let residual = lyapunov_residual(sys, &w);
    if residual > LYAPUNOV_RESIDUAL_TOL {
        log::warn!("Lyapunov solve is ill-conditioned: relative residual {residual:e}");
    }
    Ok(Gramian {
        w,
        horizon: Horizon::Infinite,
    })
}

/// `∫₀^{t_f} e^{Aτ}·B·Bᵀ·e^{Aᵀτ} dτ` by composite Simpson's rule on `steps`
/// (rounded up to even) panels. The integrand is propagated with a single
/// matrix exponential `e^{A·h}`.
pub fn finite_gramian_quadrature(sys: &SystemMatrices, t_f: f64, steps: usize) -> Result<Gramian> {
    if !(t_f >= 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon {t_f} must be finite and >= 0")));
    }
    if steps < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 quadrature steps, got {steps}")));
    }
    let n = sys.n();
    if t_f == 0.0 {
        return Ok(Gramian {
            w: DMatrix::zeros(n, n),
            horizon: Horizon::Finite(0.0),
        });
    }
    let steps = steps + steps % 2;
    let h = t_f / steps as f64;
    let step = (&sys.a * h).exp();
    let mut x = sys.b.clone();
    let mut acc = DMatrix::zeros(n, n);
    for k in 0..=steps {
        let weight = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc.gemm(weight, &x, &x.transpose(), 1.0);
        x = &step * x;
    }
    acc *= h / 3.0;
    Ok(Gramian {
        w: (&acc + acc.transpose()) * 0.5,
        horizon: Horizon::Finite(t_f),
    })
}

/// Finite-horizon Gramian from the infinite one:
/// `W(t) = W∞ − e^{At}·W∞·e^{Aᵀt}` (valid for Hurwitz `A`).
pub fn finite_gramian_from_infinite(sys: &SystemMatrices, w_inf: &DMatrix<f64>, t_f: f64) -> Gramian {
    let e = (&sys.a * t_f).exp();
    let w = w_inf - &e * w_inf * e.transpose();
    Gramian {
        w: (&w + w.transpose()) * 0.5,
        horizon: Horizon::Finite(t_f),
    }
}

/// Horizon after which `e^{A·t}` has decayed by `e^{-40}`.
pub fn settling_horizon(abscissa: f64) -> f64 {
    40.0 / abscissa.abs()
}
