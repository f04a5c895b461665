//! Minimum control energy to drive the state from the origin into the
//! shifted orthant `H_d = {x : x_i ≥ d}`.
//!
//! The energy to reach a point `x_f` in the range of the Gramian `W` is
//! `x_fᵀ·W⁺·x_f`. Writing `x_f = V·α` over the `r` range eigenvectors turns
//! the search for the cheapest point of `H_d` into the reduced QP solved in
//! [`crate::qp`].

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dynamics::{self, Gramian, Horizon, SystemMatrices};
use crate::error::{Error, Result};
use crate::linalg;
use crate::qp;

/// Tolerance on `‖(I − V·Vᵀ)·x‖ / ‖x‖` for a point to count as reachable.
pub const RANGE_TOL: f64 = 1e-6;

/// How the numerical rank of a Gramian is decided.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffPolicy {
    /// Keep `λ_i > 1e-9·n·λ_1`.
    #[default]
    Default,
    /// Keep `λ_i > eps·λ_1`.
    Relative(f64),
}

impl CutoffPolicy {
    pub fn relative(&self, n: usize) -> f64 {
        match *self {
            CutoffPolicy::Default => 1e-9 * n as f64,
            CutoffPolicy::Relative(eps) => eps,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GramianSpectrum {
    /// All `n` eigenvalues, descending.
    pub eigenvalues: DVector<f64>,
    /// Orthonormal eigenvectors as columns, matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
    pub rank: usize,
    /// Absolute cutoff: eigenvalues above it are kept.
    pub cutoff: f64,
}

impl GramianSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn range_values(&self) -> DVector<f64> {
        self.eigenvalues.rows(0, self.rank).into_owned()
    }

    /// `n×r` orthonormal basis of the range.
    pub fn range_basis(&self) -> DMatrix<f64> {
        self.eigenvectors.columns(0, self.rank).into_owned()
    }

    /// `‖(I − V·Vᵀ)·x‖`.
    pub fn out_of_range_residual(&self, x: &DVector<f64>) -> f64 {
        let v = self.range_basis();
        (x - &v * (v.transpose() * x)).norm()
    }

    /// `W⁺·x` in the eigenbasis.
    pub fn pinv_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let v = self.range_basis();
        let coeffs = (v.transpose() * x).component_div(&self.range_values());
        v * coeffs
    }
}

/// Full symmetric eigendecomposition with numerical rank. A zero (or
/// negative semidefinite) Gramian yields rank 0.
pub fn spectrum(w: &DMatrix<f64>, policy: CutoffPolicy) -> Result<GramianSpectrum> {
    if !w.is_square() {
        return Err(Error::InvalidArgument("Gramian must be square".into()));
    }
    let n = w.nrows();
    let asym = (w - w.transpose()).norm();
    if asym > 1e-8 * w.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::InvalidArgument(format!(
            "Gramian is not symmetric (‖W − Wᵀ‖ = {asym:e})"
        )));
    }
    let (eigenvalues, eigenvectors) = linalg::symmetric_eigen_desc(w);
    let top = if n == 0 { 0.0 } else { eigenvalues[0] };
    let cutoff = if top > 0.0 { policy.relative(n) * top } else { 0.0 };
    let rank = if top > 0.0 {
        eigenvalues.iter().take_while(|&&l| l > cutoff).count()
    } else {
        0
    };
    Ok(GramianSpectrum {
        eigenvalues,
        eigenvectors,
        rank,
        cutoff,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyResult {
    /// Minimum energy `J`.
    pub energy: f64,
    /// Optimal terminal state.
    pub terminal_state: Vec<f64>,
    /// Coordinates of the terminal state in the range eigenbasis.
    pub alpha: Vec<f64>,
    pub d: f64,
    /// Constraint rows (node ids) tight at the optimum.
    pub active_set: Vec<usize>,
    pub multipliers: Vec<f64>,
    pub kkt: qp::KktResiduals,
    pub iterations: usize,
}

/// Cheapest point of `H_d ∩ range(W)` and its energy.
pub fn min_energy_to_orthant(spec: &GramianSpectrum, d: f64) -> Result<EnergyResult> {
    if spec.rank == 0 {
        return Err(Error::ZeroGramian);
    }
    let n = spec.n();
    let lambda = spec.range_values();
    let v = spec.range_basis();
    let sol = qp::solve_orthant_qp(&lambda, &v, d, 100 * n.max(1))?;
    let x_f = &v * &sol.alpha;
    Ok(EnergyResult {
        energy: sol.objective,
        terminal_state: x_f.iter().copied().collect(),
        alpha: sol.alpha.iter().copied().collect(),
        d,
        active_set: sol.active_set,
        multipliers: sol.multipliers.iter().copied().collect(),
        kkt: sol.kkt,
        iterations: sol.iterations,
    })
}

/// `x_fᵀ·W⁺·x_f` for a reachable `x_f`.
pub fn min_energy_to_point(spec: &GramianSpectrum, x_f: &DVector<f64>) -> Result<f64> {
    if x_f.len() != spec.n() {
        return Err(Error::InvalidArgument(format!(
            "state has length {}, expected {}",
            x_f.len(),
            spec.n()
        )));
    }
    let norm = x_f.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let residual = spec.out_of_range_residual(x_f);
    if residual > RANGE_TOL * norm {
        return Err(Error::OutOfRange { residual });
    }
    let v = spec.range_basis();
    let proj = v.transpose() * x_f;
    Ok(proj
        .iter()
        .zip(spec.range_values().iter())
        .map(|(c, l)| c * c / l)
        .sum())
}

/// Open-loop minimum-energy input `u(t) = Bᵀ·e^{Aᵀ(t_f − t)}·p` with
/// `W(t_f)·p = x_f`, which moves the state from the origin to `x_f` at
/// `t_f`.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub p: DVector<f64>,
    pub t_f: f64,
    /// `x_fᵀ·W(t_f)⁺·x_f`, the energy this input spends.
    pub energy: f64,
}

impl ControlSignal {
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let e = (self.a.transpose() * (self.t_f - t)).exp();
        self.b.transpose() * (e * &self.p)
    }

    /// Samples the input on the uniform grid `t_k = k·dt`, `k = 0..=count`,
    /// with one matrix exponential, stepping backwards from `t_f`.
    pub fn sampled(&self, count: usize) -> SampledControl {
        let dt = self.t_f / count as f64;
        let step = (self.a.transpose() * dt).exp();
        let mut y = self.p.clone();
        let mut values = vec![DVector::zeros(self.b.ncols()); count + 1];
        for k in (0..=count).rev() {
            values[k] = self.b.transpose() * &y;
            y = &step * y;
        }
        SampledControl { dt, values }
    }
}

/// Piecewise-linear interpolation of grid samples; exact on grid points.
#[derive(Debug, Clone)]
pub struct SampledControl {
    pub dt: f64,
    pub values: Vec<DVector<f64>>,
}

impl SampledControl {
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let last = self.values.len() - 1;
        let pos = (t / self.dt).clamp(0.0, last as f64);
        let k = pos.round();
        if (pos - k).abs() < 1e-9 {
            return self.values[k as usize].clone();
        }
        let lo = pos.floor() as usize;
        let hi = (lo + 1).min(last);
        let frac = pos - lo as f64;
        &self.values[lo] * (1.0 - frac) + &self.values[hi] * frac
    }
}

/// Builds the minimum-energy input reaching `x_f` at the finite horizon
/// `t_f`. `gramian` may be the infinite-horizon Gramian (the finite one is
/// derived from it) or already the Gramian at `t_f`.
pub fn synthesize_control(
    sys: &SystemMatrices,
    gramian: &Gramian,
    x_f: &DVector<f64>,
    t_f: f64,
    policy: CutoffPolicy,
) -> Result<ControlSignal> {
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidArgument(format!("synthesis horizon {t_f} must be finite and positive")));
    }
    let finite = match gramian.horizon {
        Horizon::Finite(h) if h == t_f => gramian.clone(),
        Horizon::Finite(h) => {
            return Err(Error::InvalidArgument(format!(
                "Gramian horizon {h} does not match synthesis horizon {t_f}"
            )))
        }
        Horizon::Infinite => dynamics::finite_gramian_from_infinite(sys, &gramian.w, t_f),
    };
    let spec = spectrum(&finite.w, policy)?;
    let norm = x_f.norm();
    if norm == 0.0 {
        return Ok(ControlSignal {
            a: sys.a.clone(),
            b: sys.b.clone(),
            p: DVector::zeros(sys.n()),
            t_f,
            energy: 0.0,
        });
    }
    let energy = min_energy_to_point(&spec, x_f)?;
    Ok(ControlSignal {
        a: sys.a.clone(),
        b: sys.b.clone(),
        p: spec.pinv_apply(x_f),
        t_f,
        energy,
    })
}
