//! Property and oracle checks run against one scenario.

use std::f64::consts::PI;

use crate::edge::{edge_cdf, edge_rate, edge_rate_exact};
use crate::error::Result;
use crate::fso::CONSTRAINT_REL_TOL;
use crate::optimizer::{exact_profile, solve_with, AltitudeModel};
use crate::oracle::{brute_force_p1, brute_force_reduced, mc_edge_distribution, mc_edge_rate, GridRange, GridSpec};
use crate::quadrature::QuadratureSpec;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    /// `|observed - expected| <= tolerance`.
    Within,
    /// `observed <= expected + tolerance`.
    AtMost,
    /// `observed >= expected - tolerance`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationCheck {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

impl ValidationCheck {
    pub fn new(name: &str, expected: f64, observed: f64, tolerance: f64, comparison: Comparison) -> Self {
        let pass = match comparison {
            Comparison::Within => (observed - expected).abs() <= tolerance,
            Comparison::AtMost => observed <= expected + tolerance,
            Comparison::AtLeast => observed >= expected - tolerance,
        };
        Self {
            name: name.into(),
            expected,
            observed,
            tolerance,
            comparison,
            pass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    pub n_drops: usize,
    pub delta: f64,
    /// Points per axis of the oracle grids.
    pub oracle_points: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            n_drops: 100_000,
            delta: 1.0,
            oracle_points: 9,
        }
    }
}

/// Runs every check. Errors only on numerical failure; a failed check is
/// reported through its `pass` flag.
pub fn run_suite(s: &Scenario, opts: &SuiteOptions, quad: &QuadratureSpec) -> Result<Vec<ValidationCheck>> {
    s.validate()?;
    let mut checks = Vec::new();
    let n = opts.n_drops as f64;
    let (lambda, r0) = (s.geom.lambda_g, s.geom.r0);

    // point process
    let cdf = mc_edge_distribution(s, opts.n_drops, opts.seed)?;
    let mean = PI * lambda * r0 * r0;
    checks.push(ValidationCheck::new(
        "ppp_mean_count",
        mean,
        cdf.mean_count,
        4.0 * (mean / n).sqrt(),
        Comparison::Within,
    ));
    let p_empty = edge_cdf(0.0, lambda, r0)?;
    checks.push(ValidationCheck::new(
        "ppp_empty_fraction",
        p_empty,
        cdf.empty_fraction,
        4.0 * (p_empty * (1.0 - p_empty) / n).sqrt() + 3.0 / n,
        Comparison::Within,
    ));
    checks.push(ValidationCheck::new(
        "edge_cdf_sup_deviation",
        0.0,
        cdf.sup_deviation(lambda, r0),
        (1.8 / n.sqrt()).max(0.01),
        Comparison::AtMost,
    ));

    // solver
    let sol = solve_with(s, opts.delta, quad)?;
    let h = sol.design.h_u;
    checks.push(ValidationCheck::new(
        "fbr_relative_slack",
        0.0,
        sol.fbr_slack.abs() / sol.c_edge.max(f64::MIN_POSITIVE),
        CONSTRAINT_REL_TOL,
        Comparison::AtMost,
    ));
    checks.push(ValidationCheck::new(
        "fph_relative_slack",
        0.0,
        sol.fph_slack.abs() / (s.geom.p_hov + sol.design.p_u),
        CONSTRAINT_REL_TOL,
        Comparison::AtMost,
    ));
    checks.push(ValidationCheck::new(
        "ee_identity_relative_error",
        0.0,
        (sol.ee_system - sol.c_edge / sol.design.p_f).abs() / sol.ee_system,
        1e-12,
        Comparison::AtMost,
    ));

    // edge rate vs Monte Carlo at the solved design
    let mc = mc_edge_rate(s, sol.design.p_u, h, opts.n_drops, opts.seed)?;
    checks.push(ValidationCheck::new(
        "mc_edge_rate_relative_error",
        0.0,
        (mc.mean_low - sol.c_edge).abs() / sol.c_edge,
        (5.0 * mc.std_err_low / sol.c_edge).max(0.01),
        Comparison::AtMost,
    ));
    let low = mc_edge_rate(s, s.rf.p_max, s.geom.h0, opts.n_drops, opts.seed)?;
    checks.push(ValidationCheck::new(
        "mc_rate_gap_at_h0",
        0.0,
        (low.mean_full - low.mean_low) / low.mean_full,
        0.06,
        Comparison::AtMost,
    ));
    let rerun = mc_edge_rate(s, sol.design.p_u, h, opts.n_drops.min(10_000), opts.seed)?;
    let again = mc_edge_rate(s, sol.design.p_u, h, opts.n_drops.min(10_000), opts.seed)?;
    checks.push(ValidationCheck::new(
        "mc_rerun_identical",
        1.0,
        f64::from(u8::from(rerun == again)),
        0.0,
        Comparison::Within,
    ));

    // upper bound where it is guaranteed
    let h_bound = (s.env.alpha_los + 1.0).sqrt() * r0 * 1.001;
    if h_bound <= s.geom.h_max {
        let h_b = h_bound.max(s.geom.h0);
        let e = edge_rate(s.rf.p_max, h_b, s, quad)?;
        checks.push(ValidationCheck::new(
            "upper_bound_excess",
            0.0,
            (e.c_edge - e.c_edge_upper) / e.c_edge_upper,
            1e-12,
            Comparison::AtMost,
        ));
    }

    // derivative against a central difference
    let model = AltitudeModel::new(h, s, quad)?;
    let mut worst = 0.0f64;
    for frac in [0.25, 0.5, 1.0] {
        let p = frac * s.rf.p_max;
        let step = 1e-6 * p.max(1.0);
        let fd = (model.ee_tilde(p + step) - model.ee_tilde(p - step)) / (2.0 * step);
        let g = model.derivative(p);
        worst = worst.max((g - fd).abs() / g.abs().max(f64::MIN_POSITIVE));
    }
    checks.push(ValidationCheck::new(
        "derivative_fd_relative_error",
        0.0,
        worst,
        1e-6,
        Comparison::AtMost,
    ));

    // surrogate gap over the altitude grid
    let profile = exact_profile(s, opts.delta, quad)?;
    let gap = profile
        .iter()
        .map(|p| (p.ee_u_tilde - p.ee_u_exact).abs() / p.ee_u_tilde)
        .fold(0.0, f64::max);
    checks.push(ValidationCheck::new(
        "surrogate_relative_gap",
        0.0,
        gap,
        0.05,
        Comparison::AtMost,
    ));

    // oracles
    let k = opts.oracle_points.max(2);
    let grid = GridSpec::covering(s, k, 3.0)?;
    let full = brute_force_p1(s, &grid, quad)?;
    let dense_h = GridRange::new(s.geom.h0, s.geom.h_max, 4 * k);
    let dense_p = GridRange::new(0.0, s.rf.p_max, 4 * k);
    let reduced = brute_force_reduced(s, &dense_h, &dense_p, quad)?;
    let oracle_best = full.ee_system.max(reduced.ee_system);
    checks.push(ValidationCheck::new(
        "solver_vs_oracle_ratio",
        1.0,
        sol.ee_system / oracle_best,
        0.01,
        Comparison::AtLeast,
    ));
    let coarse_reduced = brute_force_reduced(s, &grid.h_u, &grid.p_u, quad)?;
    checks.push(ValidationCheck::new(
        "full_grid_over_closed_form",
        1.0,
        full.ee_system / coarse_reduced.ee_system,
        1e-9,
        Comparison::AtMost,
    ));

    // exactness of the quadrature the checks rely on
    let (_, err) = edge_rate_exact(sol.design.p_u, h, s, quad)?;
    checks.push(ValidationCheck::new(
        "quadrature_relative_error_estimate",
        0.0,
        err / sol.c_edge,
        quad.relative_tolerance(),
        Comparison::AtMost,
    ));
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons() {
        assert!(ValidationCheck::new("a", 1.0, 1.05, 0.1, Comparison::Within).pass);
        assert!(!ValidationCheck::new("a", 1.0, 1.2, 0.1, Comparison::Within).pass);
        assert!(ValidationCheck::new("a", 0.0, -5.0, 0.0, Comparison::AtMost).pass);
        assert!(!ValidationCheck::new("a", 1.0, 0.98, 0.01, Comparison::AtLeast).pass);
        assert!(!ValidationCheck::new("a", 0.0, f64::NAN, 1.0, Comparison::AtMost).pass);
    }

    #[test]
    fn defaults_pass_everything() {
        let opts = SuiteOptions {
            n_drops: 20_000,
            delta: 5.0,
            ..Default::default()
        };
        let checks = run_suite(&Scenario::default(), &opts, &QuadratureSpec::default()).unwrap();
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
        assert!(checks.len() >= 14);
    }
}
