use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node id {id} out of range for graph with {n} nodes")]
    InvalidNode { id: usize, n: usize },

    #[error("unknown node label {0:?}")]
    UnknownLabel(String),

    #[error("graph is not strongly connected ({components} components); extract the largest SCC first")]
    NotStronglyConnected { components: usize },

    #[error("system matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },

    #[error("Gramian has numerical rank 0; no state is reachable from the origin")]
    ZeroGramian,

    #[error(
        "terminal set is unreachable: distance from origin to the constraint hull is {distance:e}"
    )]
    Infeasible {
        distance: f64,
        /// Nonnegative row weights `y` (summing to one) with `Vᵀy ≈ 0`.
        certificate: Vec<f64>,
    },

    #[error("target state lies outside the Gramian range (residual {residual:e})")]
    OutOfRange { residual: f64 },

    #[error("{what} did not converge within {iterations} iterations")]
    NoConvergence { what: &'static str, iterations: usize },

    #[error("state became non-finite at t = {t}")]
    Blowup { t: f64 },

    #[error("Katz attenuation {alpha} must lie in (0, {limit}) (1/λ_max with λ_max = {lambda_max})")]
    KatzAlpha {
        alpha: f64,
        limit: f64,
        lambda_max: f64,
    },
}

impl Error {
    /// True for failures of numerical procedures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotHurwitz { .. }
                | Error::ZeroGramian
                | Error::Infeasible { .. }
                | Error::OutOfRange { .. }
                | Error::NoConvergence { .. }
                | Error::Blowup { .. }
        )
    }
}
