//! System energy-efficiency maximization.
//!
//! The solver works in three layers:
//!
//! 1. For a fixed UAV power `P_U` and altitude `H_U` the edge rate is fixed,
//!    so maximizing `C_edge / P_F` means minimizing `P_F`. Both UAV
//!    constraints bind at the minimum, which gives `P_F = Q_I + Q_E` and
//!    `rho = Q_I / (Q_I + Q_E)` in closed form ([`optimal_fso`]).
//! 2. Replacing `C_edge` by its upper bound `mu * B * log2(1 + P_U y)` turns
//!    the remaining objective into a function of `P_U` whose derivative is
//!    positive near zero and changes sign at most once, so the best power at
//!    an altitude is either `P_max` or that root ([`optimal_power_at_altitude`]).
//!    The derivative decreases up to some way past the root, then climbs back
//!    towards zero from below as the objective decays.
//! 3. A uniform grid over altitude picks the best surrogate value; the
//!    closed-form FSO design is then re-evaluated with the exact edge rate
//!    ([`solve`]).

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::edge::{edge_rate_exact, los_moments, LosMoments};
use crate::error::{Error, Result};
use crate::fso::{backhaul_snr, fbr_satisfied, fph_satisfied, fso_gain, FsoOperatingPoint};
use crate::quadrature::QuadratureSpec;
use crate::scenario::{GeometryParams, Scenario};

/// Lower end of the bisection bracket for the inner power problem, W.
pub const POWER_BRACKET_FLOOR: f64 = 1e-12;
/// Bisection stops once the bracket is this narrow relative to its upper end.
pub const POWER_RELATIVE_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignVariables {
    pub p_f: f64,
    pub rho: f64,
    pub h_u: f64,
    pub p_u: f64,
}

/// Minimum OBS power shares for decoding (`q_i`) and harvesting (`q_e`), W.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QFactors {
    pub q_i: f64,
    pub q_e: f64,
}

impl QFactors {
    pub fn new(p_u: f64, c_edge: f64, omega: f64, s: &Scenario) -> Self {
        let f = &s.fso;
        let q_i = f.noise_uav * f.beta_loss / omega * (2.0 * c_edge / f.bandwidth_fso * LN_2).exp_m1();
        let q_e = (p_u + s.geom.p_hov) / (f.eta * omega);
        Self { q_i, q_e }
    }

    pub fn operating_point(&self) -> FsoOperatingPoint {
        let p_f = self.q_i + self.q_e;
        FsoOperatingPoint {
            p_f,
            rho: self.q_i / p_f,
        }
    }
}

fn check_design_inputs(op: &'static str, p_u: f64, h_u: f64, s: &Scenario) -> Result<()> {
    if !(0.0..=s.rf.p_max).contains(&p_u) {
        return Err(Error::domain(op, format!("p_u = {p_u} outside [0, {}]", s.rf.p_max)));
    }
    if !(s.geom.h0..=s.geom.h_max).contains(&h_u) {
        return Err(Error::domain(
            op,
            format!("h_u = {h_u} outside [{}, {}]", s.geom.h0, s.geom.h_max),
        ));
    }
    Ok(())
}

/// Minimum-power FSO design for a given UAV power and altitude.
pub fn optimal_fso(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<(FsoOperatingPoint, QFactors)> {
    check_design_inputs("optimal_fso", p_u, h_u, s)?;
    let (c_edge, _) = edge_rate_exact(p_u, h_u, s, quad)?;
    let q = QFactors::new(p_u, c_edge, fso_gain(h_u, s)?, s);
    Ok((q.operating_point(), q))
}

/// `C_edge / (Q_I + Q_E)`: the system efficiency after the FSO variables
/// are set optimally.
pub fn ee_u_exact(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    Ok(evaluate_design(p_u, h_u, s, quad)?.ee_system)
}

/// Surrogate efficiency with the edge rate replaced by its upper bound.
pub fn ee_u_tilde(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    check_design_inputs("ee_u_tilde", p_u, h_u, s)?;
    Ok(AltitudeModel::new(h_u, s, quad)?.ee_tilde(p_u))
}

/// Derivative of [`ee_u_tilde`] with respect to `p_u`.
pub fn inner_power_derivative(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    if !(p_u >= 0.0) {
        return Err(Error::domain(
            "inner_power_derivative",
            format!("p_u must be >= 0 (got {p_u})"),
        ));
    }
    Ok(AltitudeModel::new(h_u, s, quad)?.derivative(p_u))
}

pub fn optimal_power_at_altitude(h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<f64> {
    check_design_inputs("optimal_power_at_altitude", 0.0, h_u, s)?;
    AltitudeModel::new(h_u, s, quad)?.optimal_power()
}

/// Everything the surrogate objective needs at one altitude.
///
/// `mu` and `y` do not depend on `P_U`, so one pair of quadratures per
/// altitude serves every power evaluation.
#[derive(Debug, Clone, Copy)]
pub struct AltitudeModel<'a> {
    s: &'a Scenario,
    pub h_u: f64,
    pub omega: f64,
    pub moments: LosMoments,
}

impl<'a> AltitudeModel<'a> {
    pub fn new(h_u: f64, s: &'a Scenario, quad: &QuadratureSpec) -> Result<Self> {
        Ok(Self {
            s,
            h_u,
            omega: fso_gain(h_u, s)?,
            moments: los_moments(h_u, s, quad)?,
        })
    }

    fn sigma_beta(&self) -> f64 {
        self.s.fso.noise_uav * self.s.fso.beta_loss
    }

    /// Exponent `2 mu B / W` of the decode-power term.
    fn exponent(&self) -> f64 {
        2.0 * self.moments.mu * self.s.rf.bandwidth_rf / self.s.fso.bandwidth_fso
    }

    pub fn c_edge_upper(&self, p_u: f64) -> f64 {
        self.moments.upper_rate(p_u, self.s.rf.bandwidth_rf)
    }

    /// Expanded surrogate:
    /// `mu B omega log2(1 + P y) / (sigma beta)` over
    /// `(1 + P y)^(2 mu B / W) - 1 + (P + P_hov) / (eta sigma beta)`.
    pub fn ee_tilde(&self, p_u: f64) -> f64 {
        let sb = self.sigma_beta();
        let log_x = (p_u * self.moments.y).ln_1p();
        let numerator = self.moments.mu * self.s.rf.bandwidth_rf * self.omega / sb * log_x / LN_2;
        let denominator = (self.exponent() * log_x).exp_m1() + (p_u + self.s.geom.p_hov) / (self.s.fso.eta * sb);
        numerator / denominator
    }

    /// The same surrogate written as the fractional objective with the
    /// upper-bound rate substituted for the edge rate.
    pub fn ee_tilde_fractional(&self, p_u: f64) -> f64 {
        let c = self.c_edge_upper(p_u);
        let q = QFactors::new(p_u, c, self.omega, self.s);
        c / (q.q_i + q.q_e)
    }

    /// Analytic `d ee_tilde / d p_u` by the quotient rule.
    pub fn derivative(&self, p_u: f64) -> f64 {
        let sb = self.sigma_beta();
        let y = self.moments.y;
        let k = self.exponent();
        let x = 1.0 + p_u * y;
        let log_x = (p_u * y).ln_1p();
        let scale = self.moments.mu * self.s.rf.bandwidth_rf * self.omega / (sb * LN_2);
        let numerator = scale * log_x;
        let d_numerator = scale * y / x;
        let harvest = 1.0 / (self.s.fso.eta * sb);
        let denominator = (k * log_x).exp_m1() + (p_u + self.s.geom.p_hov) * harvest;
        let d_denominator = k * y * (k * log_x).exp() / x + harvest;
        (d_numerator * denominator - numerator * d_denominator) / (denominator * denominator)
    }

    /// `P_max` if the surrogate still increases there, otherwise the root of
    /// the derivative found by bisection.
    pub fn optimal_power(&self) -> Result<f64> {
        let p_max = self.s.rf.p_max;
        if self.derivative(p_max) > 0.0 {
            return Ok(p_max);
        }
        let (mut lo, mut hi) = (POWER_BRACKET_FLOOR.min(0.5 * p_max), p_max);
        let g_lo = self.derivative(lo);
        if !(g_lo > 0.0) {
            return Err(Error::Bracketing {
                lo,
                hi,
                g_lo,
                g_hi: self.derivative(hi),
            });
        }
        while hi - lo > POWER_RELATIVE_WIDTH * hi {
            let mid = 0.5 * (lo + hi);
            if self.derivative(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Closed-form design and exact efficiency at a fixed `(p_u, h_u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignEvaluation {
    pub design: DesignVariables,
    pub q: QFactors,
    pub c_edge: f64,
    pub omega: f64,
    /// `c_edge / p_f`.
    pub ee_system: f64,
    pub fbr_slack: f64,
    pub fph_slack: f64,
    /// Decoder-branch SNR of the optical link.
    pub snr_fso: f64,
}

pub fn evaluate_design(p_u: f64, h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<DesignEvaluation> {
    check_design_inputs("evaluate_design", p_u, h_u, s)?;
    let (c_edge, _) = edge_rate_exact(p_u, h_u, s, quad)?;
    let omega = fso_gain(h_u, s)?;
    let q = QFactors::new(p_u, c_edge, omega, s);
    let op = q.operating_point();
    Ok(DesignEvaluation {
        design: DesignVariables {
            p_f: op.p_f,
            rho: op.rho,
            h_u,
            p_u,
        },
        q,
        c_edge,
        omega,
        ee_system: c_edge / op.p_f,
        fbr_slack: fbr_satisfied(&op, h_u, c_edge, s)?.slack,
        fph_slack: fph_satisfied(&op, h_u, p_u, s)?.slack,
        snr_fso: backhaul_snr(&op, h_u, s)?,
    })
}

/// One altitude of the outer search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltitudeSample {
    pub h_u: f64,
    pub ee_u_tilde: f64,
    /// Surrogate-optimal UAV power at this altitude.
    pub p_u: f64,
    pub omega: f64,
    pub c_edge_upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub design: DesignVariables,
    /// `c_edge / p_f` at the returned design, bits/J.
    pub ee_system: f64,
    pub ee_u_exact: f64,
    pub ee_u_tilde: f64,
    pub c_edge: f64,
    pub q: QFactors,
    pub fbr_slack: f64,
    pub fph_slack: f64,
    pub snr_fso: f64,
    pub delta: f64,
    pub altitude_profile: Vec<AltitudeSample>,
}

/// Altitudes `h0, h0 + delta, ..., h0 + N delta` with `N = floor((h_max - h0) / delta)`.
pub fn altitude_grid(geom: &GeometryParams, delta: f64) -> Result<Vec<f64>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(
            "altitude_grid",
            format!("delta must be > 0 (got {delta})"),
        ));
    }
    let n = ((geom.h_max - geom.h0) / delta * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=n).map(|i| (geom.h0 + i as f64 * delta).min(geom.h_max)).collect())
}

fn sample_altitude(h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<AltitudeSample> {
    let model = AltitudeModel::new(h_u, s, quad)?;
    let p_u = model.optimal_power()?;
    Ok(AltitudeSample {
        h_u,
        ee_u_tilde: model.ee_tilde(p_u),
        p_u,
        omega: model.omega,
        c_edge_upper: model.c_edge_upper(p_u),
    })
}

/// Index of the best surrogate value. Strict improvement over a running
/// maximum that starts at zero, so ties keep the lowest altitude.
pub fn best_altitude(profile: &[AltitudeSample]) -> usize {
    let mut best = 0;
    let mut ee_max = 0.0;
    for (i, sample) in profile.iter().enumerate() {
        if sample.ee_u_tilde > ee_max {
            ee_max = sample.ee_u_tilde;
            best = i;
        }
    }
    best
}

pub fn solve(s: &Scenario, delta: f64) -> Result<SolutionReport> {
    solve_with(s, delta, &QuadratureSpec::default())
}

pub fn solve_with(s: &Scenario, delta: f64, quad: &QuadratureSpec) -> Result<SolutionReport> {
    s.validate()?;
    let grid = altitude_grid(&s.geom, delta)?;
    let profile = grid
        .par_iter()
        .map(|&h| sample_altitude(h, s, quad))
        .collect::<Result<Vec<_>>>()?;

    let chosen = profile[best_altitude(&profile)];
    let eval = evaluate_design(chosen.p_u, chosen.h_u, s, quad)?;
    Ok(SolutionReport {
        design: eval.design,
        ee_system: eval.ee_system,
        ee_u_exact: eval.c_edge / (eval.q.q_i + eval.q.q_e),
        ee_u_tilde: chosen.ee_u_tilde,
        c_edge: eval.c_edge,
        q: eval.q,
        fbr_slack: eval.fbr_slack,
        fph_slack: eval.fph_slack,
        snr_fso: eval.snr_fso,
        delta,
        altitude_profile: profile,
    })
}

/// Surrogate and exact quantities at one altitude, both at the
/// surrogate-optimal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub h_u: f64,
    pub p_u: f64,
    pub ee_u_tilde: f64,
    pub ee_u_exact: f64,
    pub c_edge: f64,
    pub c_edge_upper: f64,
    pub omega: f64,
    pub p_f: f64,
    pub rho: f64,
    /// Received optical power `p_f * omega` under the per-altitude design.
    pub p_rec: f64,
    pub q: QFactors,
    pub snr_fso: f64,
}

pub fn exact_profile(s: &Scenario, delta: f64, quad: &QuadratureSpec) -> Result<Vec<ProfileSample>> {
    s.validate()?;
    altitude_grid(&s.geom, delta)?
        .par_iter()
        .map(|&h| profile_sample(h, s, quad))
        .collect()
}

pub fn profile_sample(h_u: f64, s: &Scenario, quad: &QuadratureSpec) -> Result<ProfileSample> {
    let a = sample_altitude(h_u, s, quad)?;
    let e = evaluate_design(a.p_u, h_u, s, quad)?;
    Ok(ProfileSample {
        h_u,
        p_u: a.p_u,
        ee_u_tilde: a.ee_u_tilde,
        ee_u_exact: e.ee_system,
        c_edge: e.c_edge,
        c_edge_upper: a.c_edge_upper,
        omega: e.omega,
        p_f: e.design.p_f,
        rho: e.design.rho,
        p_rec: e.design.p_f * e.omega,
        q: e.q,
        snr_fso: e.snr_fso,
    })
}

/// Reference altitudes bracketing the efficiency-optimal one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryAltitudes {
    /// Maximizes received optical power at a fixed OBS power, i.e. `omega`.
    pub h_ph: f64,
    /// Maximizes `P_F(H_U) * omega(H_U)` along the per-altitude designs.
    pub h_ph_optimized: f64,
    /// Maximizes the exact edge rate at the per-altitude optimal power.
    pub h_mc: f64,
}

fn argmax_by(samples: &[ProfileSample], key: impl Fn(&ProfileSample) -> f64) -> f64 {
    let mut best = &samples[0];
    for s in &samples[1..] {
        if key(s) > key(best) {
            best = s;
        }
    }
    best.h_u
}

pub fn auxiliary_altitudes_from_profile(profile: &[ProfileSample]) -> AuxiliaryAltitudes {
    AuxiliaryAltitudes {
        h_ph: argmax_by(profile, |p| p.omega),
        h_ph_optimized: argmax_by(profile, |p| p.p_rec),
        h_mc: argmax_by(profile, |p| p.c_edge),
    }
}

pub fn auxiliary_altitudes(s: &Scenario, delta: f64, quad: &QuadratureSpec) -> Result<AuxiliaryAltitudes> {
    Ok(auxiliary_altitudes_from_profile(&exact_profile(s, delta, quad)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fso::CONSTRAINT_REL_TOL;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn symmetric_q_factors_split_in_half() {
        let s = Scenario::default();
        let omega = fso_gain(100.0, &s).unwrap();
        // choose c_edge so that Q_I equals Q_E
        let q_e = (0.1 + s.geom.p_hov) / (s.fso.eta * omega);
        let snr = q_e * omega / (s.fso.noise_uav * s.fso.beta_loss);
        let c = 0.5 * s.fso.bandwidth_fso * (1.0 + snr).log2();
        let q = QFactors::new(0.1, c, omega, &s);
        assert!((q.q_i / q.q_e - 1.0).abs() < 1e-9);
        assert!((q.operating_point().rho - 0.5).abs() < 1e-9);
    }

    #[test]
    fn zero_power_needs_no_backhaul() {
        let s = Scenario::default();
        let (op, q) = optimal_fso(0.0, 100.0, &s, &quad()).unwrap();
        assert_eq!(q.q_i, 0.0);
        assert_eq!(op.rho, 0.0);
        assert_eq!(op.p_f, q.q_e);
        assert_eq!(ee_u_exact(0.0, 100.0, &s, &quad()).unwrap(), 0.0);
        assert_eq!(ee_u_tilde(0.0, 100.0, &s, &quad()).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_design_is_tight() {
        let s = Scenario::default();
        for &(p, h) in &[(0.2, 60.0), (0.05, 130.0), (0.2, 200.0)] {
            let e = evaluate_design(p, h, &s, &quad()).unwrap();
            assert!(e.fbr_slack.abs() <= CONSTRAINT_REL_TOL * e.c_edge, "{e:?}");
            assert!(e.fph_slack.abs() <= CONSTRAINT_REL_TOL * (s.geom.p_hov + p), "{e:?}");
            assert!(e.design.rho > 0.0 && e.design.rho < 1.0);
        }
    }

    #[test]
    fn expanded_and_fractional_surrogates_agree() {
        let s = Scenario::default();
        for &h in &[60.0, 95.0, 150.0, 200.0] {
            let m = AltitudeModel::new(h, &s, &quad()).unwrap();
            for &p in &[1e-6, 1e-3, 0.05, 0.2] {
                let a = m.ee_tilde(p);
                let b = m.ee_tilde_fractional(p);
                assert!((a - b).abs() <= 1e-12 * a, "h={h} p={p}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_positive_near_zero_power() {
        let s = Scenario::default();
        for &h in &[60.0, 120.0, 200.0] {
            assert!(inner_power_derivative(1e-9, h, &s, &quad()).unwrap() > 0.0);
        }
    }

    #[test]
    fn default_scenario_uses_full_power() {
        let s = Scenario::default();
        for &h in &[60.0, 100.0, 150.0, 200.0] {
            assert_eq!(optimal_power_at_altitude(h, &s, &quad()).unwrap(), s.rf.p_max);
        }
    }

    #[test]
    fn interior_power_is_a_root() {
        let mut s = Scenario::default();
        s.rf.p_max = 1e3;
        let m = AltitudeModel::new(100.0, &s, &quad()).unwrap();
        assert!(m.derivative(s.rf.p_max) < 0.0);
        let p = m.optimal_power().unwrap();
        assert!(p > 0.0 && p < s.rf.p_max);
        let scale = m.ee_tilde(p) / p;
        assert!(m.derivative(p).abs() <= 1e-6 * scale);
        // increasing to the left, decreasing to the right
        assert!(m.ee_tilde(0.9 * p) < m.ee_tilde(p));
        assert!(m.ee_tilde(1.1 * p) < m.ee_tilde(p));
    }

    #[test]
    fn derivative_has_one_sign_change() {
        let mut s = Scenario::default();
        s.rf.p_max = 1e3;
        let m = AltitudeModel::new(100.0, &s, &quad()).unwrap();
        let root = m.optimal_power().unwrap();
        let g: Vec<f64> = (1..=1000).map(|k| m.derivative(k as f64)).collect();
        let changes = g.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
        assert_eq!(changes, 1);
        assert!(g[..root as usize - 1].iter().all(|&x| x > 0.0));
        assert!(g[root as usize..].iter().all(|&x| x < 0.0));
        // not monotone over the whole range: the minimum is interior
        let k_min = (0..g.len()).min_by(|&a, &b| g[a].total_cmp(&g[b])).unwrap();
        assert!(k_min > root as usize && k_min < g.len() - 1);
    }

    #[test]
    fn altitude_grid_counts() {
        let g = GeometryParams::default();
        assert_eq!(altitude_grid(&g, 1.0).unwrap().len(), 141);
        assert_eq!(altitude_grid(&g, 3.0).unwrap().len(), 47);
        let g600 = GeometryParams { h_max: 600.0, ..g };
        let grid = altitude_grid(&g600, 0.1).unwrap();
        assert_eq!(grid.len(), 5401);
        assert!(*grid.last().unwrap() <= 600.0);
        assert!(altitude_grid(&g, 0.0).is_err());
    }

    #[test]
    fn rejects_out_of_range_design_inputs() {
        let s = Scenario::default();
        assert!(optimal_fso(0.3, 100.0, &s, &quad()).is_err());
        assert!(optimal_fso(0.1, 50.0, &s, &quad()).is_err());
        assert!(ee_u_tilde(0.1, 250.0, &s, &quad()).is_err());
    }

    #[test]
    fn solve_defaults() {
        let s = Scenario::default();
        let r = solve(&s, 1.0).unwrap();
        assert_eq!(r.altitude_profile.len(), 141);
        assert_eq!(r.design.p_u, 0.2);
        assert!(r.design.h_u > 60.0 && r.design.h_u < 200.0);
        assert_eq!(r.ee_system, r.c_edge / r.design.p_f);
        assert!(r.fbr_slack.abs() <= CONSTRAINT_REL_TOL * r.c_edge);
        assert!(r.fph_slack.abs() <= CONSTRAINT_REL_TOL * (s.geom.p_hov + r.design.p_u));
        let best = r
            .altitude_profile
            .iter()
            .map(|a| a.ee_u_tilde)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best, r.ee_u_tilde);
    }

    #[test]
    fn ties_keep_lowest_altitude() {
        let sample = |h_u, ee| AltitudeSample {
            h_u,
            ee_u_tilde: ee,
            p_u: 0.2,
            omega: 1e-4,
            c_edge_upper: 1e7,
        };
        let profile = [
            sample(60.0, 1.0),
            sample(61.0, 3.0),
            sample(62.0, 2.0),
            sample(63.0, 3.0),
        ];
        assert_eq!(best_altitude(&profile), 1);
        let flat = [sample(60.0, 2.0), sample(61.0, 2.0)];
        assert_eq!(best_altitude(&flat), 0);
    }

    #[test]
    fn auxiliary_ordering_on_defaults() {
        let s = Scenario::default();
        let aux = auxiliary_altitudes(&s, 1.0, &quad()).unwrap();
        let r = solve(&s, 1.0).unwrap();
        assert_eq!(aux.h_ph, s.geom.h0);
        assert!(aux.h_mc > s.geom.h0);
        assert!(
            aux.h_ph < r.design.h_u && r.design.h_u < aux.h_mc,
            "{aux:?} {}",
            r.design.h_u
        );
    }
}
