//! Independent reference computations: exhaustive grid search over the
//! design variables and Monte Carlo simulation of the GU point process.

mod brute;
mod monte_carlo;

pub use brute::{brute_force_p1, brute_force_reduced, randomized_scenario, GridRange, GridSpec, OracleOptimum};
pub use monte_carlo::{
    mc_edge_distribution, mc_edge_rate, ppp_drop, stream_rng, DropSample, EdgeRates, EmpiricalCdf, McEdgeRate,
    RNG_ALGORITHM,
};
