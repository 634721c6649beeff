//! OBS-to-UAV optical link: channel gain, power splitting, backhaul
//! throughput and the two feasibility constraints at the UAV.

use std::f64::consts::LOG2_E;

use crate::error::{Error, Result};
use crate::scenario::{GeometryParams, Scenario};

/// Relative tolerance on constraint right-hand sides.
pub const CONSTRAINT_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsoOperatingPoint {
    /// OBS transmit power, W.
    pub p_f: f64,
    /// Fraction of received optical power sent to the information decoder.
    pub rho: f64,
}

impl FsoOperatingPoint {
    pub fn new(p_f: f64, rho: f64) -> Result<Self> {
        if !(p_f > 0.0 && p_f.is_finite()) {
            return Err(Error::domain(
                "FsoOperatingPoint",
                format!("p_f must be > 0 (got {p_f})"),
            ));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::domain(
                "FsoOperatingPoint",
                format!("rho must lie in [0, 1] (got {rho})"),
            ));
        }
        Ok(Self { p_f, rho })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FsoLinkState {
    /// OBS-to-UAV distance, m.
    pub l_back: f64,
    /// Average optical channel power gain.
    pub omega: f64,
    /// Received optical power, W.
    pub p_rec: f64,
    /// Received power routed to the decoder, W.
    pub p_decode: f64,
    /// Received power routed to the harvester (before conversion loss), W.
    pub p_harvest_input: f64,
}

pub fn backhaul_distance(h_u: f64, geom: &GeometryParams) -> Result<f64> {
    if !(h_u >= geom.h0) {
        return Err(Error::domain(
            "backhaul_distance",
            format!("altitude {h_u} below OBS altitude {}", geom.h0),
        ));
    }
    Ok(geom.l0.hypot(h_u - geom.h0))
}

/// Average optical power gain `tau * D_r^2 / (theta_t^2 L^2) * 10^(-kappa L / 10)`.
pub fn fso_gain(h_u: f64, s: &Scenario) -> Result<f64> {
    let l = backhaul_distance(h_u, &s.geom)?;
    if l == 0.0 {
        return Err(Error::domain("fso_gain", "zero OBS-to-UAV distance"));
    }
    let f = &s.fso;
    Ok(f.tau_combined * f.d_r * f.d_r / (f.theta_t * f.theta_t * l * l) * 10f64.powf(-f.kappa * l / 10.0))
}

pub fn link_state(op: &FsoOperatingPoint, h_u: f64, s: &Scenario) -> Result<FsoLinkState> {
    let l_back = backhaul_distance(h_u, &s.geom)?;
    let omega = fso_gain(h_u, s)?;
    let p_rec = op.p_f * omega;
    Ok(FsoLinkState {
        l_back,
        omega,
        p_rec,
        p_decode: p_rec * op.rho,
        p_harvest_input: p_rec * (1.0 - op.rho),
    })
}

/// SNR at the decoder branch, `P_F * omega * rho / (sigma_U^2 * beta)`.
pub fn backhaul_snr(op: &FsoOperatingPoint, h_u: f64, s: &Scenario) -> Result<f64> {
    let omega = fso_gain(h_u, s)?;
    Ok(op.p_f * omega * op.rho / (s.fso.noise_uav * s.fso.beta_loss))
}

/// IM/DD backhaul throughput `(W/2) log2(1 + SNR)`, bits/s.
pub fn backhaul_rate(op: &FsoOperatingPoint, h_u: f64, s: &Scenario) -> Result<f64> {
    let snr = backhaul_snr(op, h_u, s)?;
    Ok(0.5 * s.fso.bandwidth_fso * snr.ln_1p() * LOG2_E)
}

/// Power harvested at the UAV, `eta * P_F * omega * (1 - rho)`, W.
pub fn harvested_power(op: &FsoOperatingPoint, h_u: f64, s: &Scenario) -> Result<f64> {
    Ok(s.fso.eta * link_state(op, h_u, s)?.p_harvest_input)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub satisfied: bool,
    /// Left-hand side minus right-hand side.
    pub slack: f64,
    pub rhs: f64,
}

impl ConstraintCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        let slack = lhs - rhs;
        Self {
            satisfied: slack >= -CONSTRAINT_REL_TOL * rhs.abs(),
            slack,
            rhs,
        }
    }

    /// `|slack| / rhs`, or `|slack|` when the right-hand side is zero.
    pub fn relative_slack(&self) -> f64 {
        if self.rhs == 0.0 {
            self.slack.abs()
        } else {
            (self.slack / self.rhs).abs()
        }
    }
}

/// Backhaul must carry at least the edge multicast rate.
pub fn fbr_satisfied(op: &FsoOperatingPoint, h_u: f64, c_edge: f64, s: &Scenario) -> Result<ConstraintCheck> {
    if !(c_edge >= 0.0) {
        return Err(Error::domain(
            "fbr_satisfied",
            format!("c_edge must be >= 0 (got {c_edge})"),
        ));
    }
    Ok(ConstraintCheck::new(backhaul_rate(op, h_u, s)?, c_edge))
}

/// Harvested power must cover hovering plus RF transmission.
pub fn fph_satisfied(op: &FsoOperatingPoint, h_u: f64, p_u: f64, s: &Scenario) -> Result<ConstraintCheck> {
    if !(p_u >= 0.0) {
        return Err(Error::domain("fph_satisfied", format!("p_u must be >= 0 (got {p_u})")));
    }
    Ok(ConstraintCheck::new(harvested_power(op, h_u, s)?, s.geom.p_hov + p_u))
}
