//! Fixed-step trajectory simulation, used to check the energy pipeline
//! against the ODE it claims to solve.

use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{self, SystemMatrices};
use crate::energy::{self, CutoffPolicy};
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub inputs: Vec<DVector<f64>>,
    /// `∫‖u‖² dt` by Simpson's rule over the grid.
    pub energy: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least one sample")
    }
}

/// Classical RK4 on `ẋ = A·x + B·u(t)` from `x(0) = 0`.
///
/// The step is shrunk so that an even number of steps lands exactly on
/// `t_f`; `h` must not exceed `t_f / 1000`.
pub fn integrate<F>(sys: &SystemMatrices, control: F, t_f: f64, h: f64) -> Result<Trajectory>
where
    F: Fn(f64) -> DVector<f64>,
{
    integrate_from(sys, DVector::zeros(sys.n()), control, t_f, h)
}

pub fn integrate_from<F>(
    sys: &SystemMatrices,
    x0: DVector<f64>,
    control: F,
    t_f: f64,
    h: f64,
) -> Result<Trajectory>
where
    F: Fn(f64) -> DVector<f64>,
{
    if !(t_f > 0.0 && t_f.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon {t_f} must be finite and positive")));
    }
    if !(h > 0.0) || h > t_f / 1000.0 * (1.0 + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "step {h} must be positive and at most t_f/1000 = {}",
            t_f / 1000.0
        )));
    }
    let mut steps = (t_f / h).ceil() as usize;
    steps += steps % 2;
    let h = t_f / steps as f64;

    let f = |x: &DVector<f64>, u: &DVector<f64>| &sys.a * x + &sys.b * u;

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    let mut x = x0;
    let mut u = control(0.0);
    for k in 0..steps {
        let t = k as f64 * h;
        let u_mid = control(t + 0.5 * h);
        let u_next = control(t + h);
        let k1 = f(&x, &u);
        let k2 = f(&(&x + &k1 * (0.5 * h)), &u_mid);
        let k3 = f(&(&x + &k2 * (0.5 * h)), &u_mid);
        let k4 = f(&(&x + &k3 * h), &u_next);
        let next = &x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        times.push(t);
        states.push(std::mem::replace(&mut x, next));
        inputs.push(std::mem::replace(&mut u, u_next));
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup { t: t + h });
        }
    }
    times.push(t_f);
    states.push(x);
    inputs.push(u);

    let mut energy = 0.0;
    for (k, u) in inputs.iter().enumerate() {
        let weight = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        energy += weight * u.norm_squared();
    }
    energy *= h / 3.0;

    Ok(Trajectory {
        times,
        states,
        inputs,
        energy,
    })
}

/// Largest step for which RK4 stays well inside its stability region:
/// `0.1 / ρ`, bounding the spectral radius `ρ` by Gershgorin discs.
pub fn default_step(sys: &SystemMatrices, t_f: f64) -> f64 {
    let gersh = (0..sys.n())
        .map(|i| sys.a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let stable = if gersh > 0.0 { 0.1 / gersh } else { f64::INFINITY };
    (t_f / 1000.0).min(stable)
}

pub const MARGIN_TOL: f64 = 1e-3;
pub const ENERGY_RATIO_RANGE: (f64, f64) = (0.99, 1.02);

#[derive(Debug, Clone, Serialize)]
pub struct HerdingVerification {
    pub herding_node: usize,
    pub d: f64,
    pub t_f: f64,
    pub h: f64,
    pub predicted_energy: f64,
    pub realized_energy: f64,
    /// `realized / predicted`.
    pub energy_ratio: f64,
    /// `min_i x_i(t_f) − d`.
    pub margin: f64,
    pub terminal_state: Vec<f64>,
    pub passed: bool,
}

/// Full pipeline for one herding node: dynamics, Gramian, optimal terminal
/// state, synthesized input, and a simulated run from the origin.
///
/// `t_f` defaults to `40 / |spectral abscissa|` and `h` to
/// [`default_step`].
pub fn verify_herding(
    g: &Graph,
    herding_node: usize,
    d: f64,
    t_f: Option<f64>,
    h: Option<f64>,
    policy: CutoffPolicy,
) -> Result<(HerdingVerification, Trajectory)> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected {
            components: g.scc_decompose().len(),
        });
    }
    g.check_node(herding_node)?;
    let sys = dynamics::taylor_consensus(g, herding_node)?;
    verify_system(&sys, d, t_f, h, policy)
}

/// [`verify_herding`] for prebuilt system matrices. If `A` is not Hurwitz an
/// explicit `t_f` is required and the finite-horizon Gramian is used, so an
/// input that cannot reach every node surfaces as an infeasibility error
/// from the energy stage.
pub fn verify_system(
    sys: &SystemMatrices,
    d: f64,
    t_f: Option<f64>,
    h: Option<f64>,
    policy: CutoffPolicy,
) -> Result<(HerdingVerification, Trajectory)> {
    let stability = dynamics::is_hurwitz(&sys.a)?;
    let t_f = match t_f {
        Some(t) => t,
        None if stability.hurwitz => dynamics::settling_horizon(stability.abscissa),
        None => {
            return Err(Error::NotHurwitz {
                abscissa: stability.abscissa,
            })
        }
    };
    let h = h.unwrap_or_else(|| default_step(sys, t_f));
    // Without a stable A only the finite-horizon Gramian exists.
    let gram = if stability.hurwitz {
        dynamics::lyapunov_gramian(sys)?
    } else {
        let panels = ((t_f / h).ceil() as usize).max(1000);
        dynamics::finite_gramian_quadrature(sys, t_f, panels)?
    };
    let spec = energy::spectrum(&gram.w, policy)?;
    let opt = energy::min_energy_to_orthant(&spec, d)?;
    let x_f = DVector::from_vec(opt.terminal_state.clone());
    let signal = energy::synthesize_control(sys, &gram, &x_f, t_f, policy)?;

    let mut steps = (t_f / h).ceil() as usize;
    steps += steps % 2;
    let sampled = signal.sampled(2 * steps);
    let traj = integrate(sys, |t| sampled.eval(t), t_f, h)?;

    let terminal = traj.final_state();
    let margin = terminal.iter().map(|&x| x - d).fold(f64::INFINITY, f64::min);
    let energy_ratio = traj.energy / opt.energy;
    let passed = margin >= -MARGIN_TOL * d
        && energy_ratio >= ENERGY_RATIO_RANGE.0
        && energy_ratio <= ENERGY_RATIO_RANGE.1;
    let herding_node = sys.herding_nodes.first().copied().unwrap_or(0);
    let record = HerdingVerification {
        herding_node,
        d,
        t_f,
        h: t_f / steps as f64,
        predicted_energy: opt.energy,
        realized_energy: traj.energy,
        energy_ratio,
        margin,
        terminal_state: terminal.iter().copied().collect(),
        passed,
    };
    Ok((record, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn scalar() -> SystemMatrices {
        SystemMatrices {
            a: DMatrix::from_element(1, 1, -1.0),
            b: DMatrix::from_element(1, 1, 1.0),
            herding_nodes: vec![0],
        }
    }

    #[test]
    fn zero_input_stays_at_origin() {
        let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)], true).unwrap();
        let sys = dynamics::taylor_consensus(&g, 0).unwrap();
        let traj = integrate(&sys, |_| DVector::zeros(1), 5.0, 0.005).unwrap();
        assert!(traj.states.iter().all(|x| x.norm() == 0.0));
        assert_eq!(traj.energy, 0.0);
    }

    #[test]
    fn scalar_analytic_run() {
        let sys = scalar();
        let t_f = 20.0;
        let traj = integrate(&sys, |t| DVector::from_element(1, 2.0 * (-(t_f - t)).exp()), t_f, 0.01).unwrap();
        // x(t_f) = 2·∫ e^{-(t_f-τ)}e^{-(t_f-τ)} dτ = 1 − e^{-40}
        assert!((traj.final_state()[0] - 1.0).abs() < 1e-6);
        assert!((traj.energy - 2.0).abs() < 1e-6);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn step_limits() {
        let sys = scalar();
        assert!(integrate(&sys, |_| DVector::zeros(1), 1.0, 0.01).is_err());
        assert!(integrate(&sys, |_| DVector::zeros(1), 0.0, 0.001).is_err());
    }

    #[test]
    fn blowup_detected() {
        let sys = SystemMatrices {
            a: DMatrix::from_element(1, 1, 800.0),
            b: DMatrix::from_element(1, 1, 1.0),
            herding_nodes: vec![0],
        };
        assert!(matches!(
            integrate(&sys, |_| DVector::from_element(1, 1.0), 10.0, 0.01),
            Err(Error::Blowup { .. })
        ));
    }

    #[test]
    fn path2_pipeline() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)], false).unwrap();
        let (rec, _) = verify_herding(&g, 0, 1.0, None, None, CutoffPolicy::Default).unwrap();
        assert!(rec.passed, "{rec:?}");
        assert!(rec.margin >= -1e-4);
        assert!((rec.energy_ratio - 1.0).abs() < 1e-2);
    }

    #[test]
    fn disconnected_input_is_infeasible() {
        // node 1 is unreachable from input node 0
        let g = Graph::from_edges(2, std::iter::empty(), true).unwrap();
        let sys = dynamics::taylor_consensus(&g, 0).unwrap();
        let err = verify_system(&sys, 1.0, Some(10.0), None, CutoffPolicy::Default).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }), "{err:?}");
        let err = verify_system(&sys, 1.0, None, None, CutoffPolicy::Default).unwrap_err();
        assert!(matches!(err, Error::NotHurwitz { .. }), "{err:?}");
    }
}
