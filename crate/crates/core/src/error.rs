use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the formula.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A scenario or config field violates one of its bounds.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("quadrature did not converge: error estimate {estimate:.3e} after {subdivisions} subdivisions")]
    Quadrature { estimate: f64, subdivisions: usize },

    /// The edge rate is zero, so the mission never completes.
    #[error("infeasible coverage: edge multicast rate is zero")]
    InfeasibleCoverage,

    #[error("root bracketing failed: g({lo:e}) = {g_lo:e}, g({hi:e}) = {g_hi:e}")]
    Bracketing { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },

    #[error("no grid point satisfies the backhaul and harvesting constraints")]
    EmptyFeasibleSet,

    #[error("config: {0}")]
    Config(String),

    #[error("unknown sweep parameter `{0}` (expected one of h_u, lambda_g, p_hov, r0, p_u)")]
    UnknownParameter(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
